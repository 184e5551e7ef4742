//! SVG overlay of speed curves against `M`, drawn from sweep rows.

use std::fmt::Write;

use crate::sweep::Row;

const W: f64 = 720.0;
const H: f64 = 460.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"];

/// Curves of speed against `M` for every `(method, p)` in `rows`, with the
/// reference `sqrt(2 p M)` for each `p`.
pub fn render(rows: &[Row]) -> String {
    let m_max = rows.iter().map(|r| r.m).fold(0.0, f64::max).max(1e-9);
    let v_max = rows.iter().map(|r| r.value).filter(|v| v.is_finite()).fold(0.0, f64::max).max(1e-9) * 1.1;
    let sx = |m: f64| LEFT + m / m_max * (W - LEFT - RIGHT);
    let sy = |v: f64| H - BOTTOM - v.min(v_max) / v_max * (H - TOP - BOTTOM);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let (x0, x1, y0, y1) = (sx(0.0), sx(m_max), sy(0.0), sy(v_max));
    let _ = writeln!(s, r#"<path d="M{x0},{y1} L{x0},{y0} L{x1},{y0}" stroke="black" fill="none"/>"#);
    for i in 0..=5 {
        let m = m_max * i as f64 / 5.0;
        let v = v_max * i as f64 / 5.0;
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{:.3}</text>"#, sx(m), y0 + 18.0, m);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{:.3}</text>"#, x0 - 6.0, sy(v) + 4.0, v);
    }
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">M</text>"#, (x0 + x1) / 2.0, H - 10.0);
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.1}" transform="rotate(-90 14 {:.1})" text-anchor="middle">speed</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );

    let mut keys: Vec<(String, f64)> = Vec::new();
    for r in rows {
        if !keys.iter().any(|(m, p)| *m == r.method && *p == r.p) {
            keys.push((r.method.clone(), r.p));
        }
    }
    let mut legend = Vec::new();
    for (k, (method, p)) in keys.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let mut curve: Vec<&Row> =
            rows.iter().filter(|r| &r.method == method && r.p == *p && r.value.is_finite()).collect();
        curve.sort_by(|a, b| a.m.total_cmp(&b.m));
        let pts: Vec<String> = curve.iter().map(|r| format!("{:.2},{:.2}", sx(r.m), sy(r.value))).collect();
        let _ =
            writeln!(s, r#"<polyline points="{}" stroke="{color}" fill="none" stroke-width="1.5"/>"#, pts.join(" "));
        for r in &curve {
            let e = r.stderr / (r.inverse * r.inverse);
            if e > 0.0 {
                let _ = writeln!(
                    s,
                    r#"<line x1="{x:.2}" x2="{x:.2}" y1="{:.2}" y2="{:.2}" stroke="{color}"/>"#,
                    sy(r.value - e),
                    sy(r.value + e),
                    x = sx(r.m)
                );
            }
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#, sx(r.m), sy(r.value));
        }
        legend.push((format!("{method} p={p}"), color, false));
    }
    let mut ps: Vec<f64> = keys.iter().map(|k| k.1).collect();
    ps.sort_by(f64::total_cmp);
    ps.dedup();
    for p in ps {
        let pts: Vec<String> = (0..=100)
            .map(|i| m_max * i as f64 / 100.0)
            .filter(|m| (2.0 * p * m).sqrt() <= v_max)
            .map(|m| format!("{:.2},{:.2}", sx(m), sy((2.0 * p * m).sqrt())))
            .collect();
        let _ =
            writeln!(s, r#"<polyline points="{}" stroke="gray" stroke-dasharray="5,4" fill="none"/>"#, pts.join(" "));
        legend.push((format!("sqrt(2pM) p={p}"), "gray", true));
    }
    for (i, (label, color, dashed)) in legend.iter().enumerate() {
        let y = TOP + 10.0 + 18.0 * i as f64;
        let lx = W - RIGHT + 12.0;
        let dash = if *dashed { r#" stroke-dasharray="5,4""# } else { "" };
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" x2="{}" y1="{y}" y2="{y}" stroke="{color}" stroke-width="2"{dash}/>"#,
            lx + 20.0
        );
        let _ = writeln!(s, r#"<text x="{}" y="{}">{label}</text>"#, lx + 26.0, y + 4.0);
    }
    s.push_str("</svg>\n");
    s
}
