use crossing::quenched::{
    main_term, quenched_speed_mc, speed_from_lyapunov, DifferenceGrid, QuenchedMode, TruncationPolicy,
};
use crossing::WalkParams;

#[test]
fn site_average_and_lyapunov_derivative_agree() {
    for (p, m) in [(0.3, 1.0), (0.5, 2.0), (0.7, 0.5)] {
        let params = WalkParams::new(p, m).unwrap();
        let pol = TruncationPolicy::for_params(&params, 1e-7).unwrap();
        let a = quenched_speed_mc(&params, 40_000, &pol, 11, QuenchedMode::Iid).unwrap();
        let b = speed_from_lyapunov(&params, 400_000, &DifferenceGrid::default(), 12).unwrap();
        let tol = 4.0 * (a.stderr * a.stderr + b.stderr * b.stderr).sqrt();
        assert!((a.inverse - b.inverse).abs() <= tol, "p={p} M={m}: {} vs {} (tol {tol})", a.inverse, b.inverse);
    }
}

#[test]
fn inverse_speed_approaches_main_term_as_height_grows() {
    let p = 0.5;
    let mut last = f64::INFINITY;
    for (i, m) in [1.0, 2.0, 4.0, 8.0].into_iter().enumerate() {
        let params = WalkParams::new(p, m).unwrap();
        let pol = TruncationPolicy::for_params(&params, 1e-7).unwrap();
        let e = quenched_speed_mc(&params, 40_000, &pol, 20 + i as u64, QuenchedMode::Iid).unwrap();
        let gap = (e.inverse / main_term(&params) - 1.0).abs();
        assert!(gap < last, "M={m}: {gap} not below {last}");
        last = gap;
    }
    assert!(last < 0.05);
}
