use approx::assert_abs_diff_eq;
use lorentz_core::calibrate::*;
use lorentz_core::exec::Exec;
use lorentz_core::hedlund::TubeOracle;
use lorentz_core::reach::GridOracle;
use lorentz_core::spacetime::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn v2(a: f64, b: f64) -> Vector<2> {
    Vector::<2>::new(a, b)
}

fn hedlund() -> Hedlund {
    make_hedlund(HedlundParams::new([0.5, 0.3, 0.2], 0.01).unwrap()).unwrap()
}

fn flat_pairs(n: usize, seed: u64) -> Vec<(Vector<2>, Vector<2>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let p = v2((rng.gen::<f64>() * 50.0).round() * 0.02, (rng.gen::<f64>() * 50.0).round() * 0.02);
            let t = rng.gen_range(5..60) as f64 * 0.02;
            let x = (rng.gen_range(-0.75..0.75) * t / 0.02f64).round() * 0.02;
            (p, p + v2(t, x))
        })
        .collect()
}

#[test]
fn minkowski_pseudo_time() {
    let f = make_flat::<2>();
    let o = GridOracle::new(&f, 0.02, 5);
    let pairs = flat_pairs(40, 3);
    let up = is_pseudo_time(&o, &Calibration::linear(v2(1.0, 0.0), 1.0), 1.0, &pairs, 1e-9).unwrap();
    assert!(up.pass, "{up:?}");
    assert_eq!(up.checked, 40);
    assert!(up.eps_hat > 0.0);
    let down = is_pseudo_time(&o, &Calibration::linear(v2(-1.0, 0.0), 1.0), 1.0, &pairs, 1e-9).unwrap();
    assert!(!down.pass);
    assert_eq!(down.violations, 40);
}

#[test]
fn hedlund_linear_pseudo_time() {
    let h = hedlund();
    let lam = Vector::<3>::new(0.5, 0.3, 0.2);
    let o = TubeOracle::new(&h, 0.01).with_exec(Exec::Sequential);
    let pairs = vec![
        (Vector::<3>::zeros(), Vector::<3>::new(3.0, 2.0, 2.5)),
        (Vector::<3>::zeros(), Vector::<3>::new(1.0, 1.0, 0.5)),
        (Vector::<3>::new(0.0, 0.0, 0.5), Vector::<3>::new(0.5, 0.5, 3.0)),
        (Vector::<3>::new(0.3, 0.0, 0.0), Vector::<3>::new(4.3, 0.0, 0.0)),
    ];
    let r = is_pseudo_time(&o, &Calibration::linear(lam, 1.0), 1.0, &pairs, 2.0 * 0.01).unwrap();
    assert!(r.pass, "{r:?}");
    assert_eq!(r.checked, pairs.len());
}

#[test]
fn line_calibration_defects() {
    let h = hedlund();
    let lam = h.lambdas();
    let alpha = Vector::<3>::new(0.5, 0.3, 0.2);
    assert_abs_diff_eq!(hedlund_lstar(&lam, &alpha), 1.0, epsilon = 1e-15);
    let l1 = CausalPath::new(&h, vec![Vector::<3>::new(0.2, 0.0, 0.0), Vector::<3>::new(3.2, 0.0, 0.0)]).unwrap();
    let r = check_calibrated(&h, &Calibration::linear(alpha, 1.0), &l1);
    assert!(r.defect < 1e-9);
    assert!(r.light_gap > 0.0);

    let alpha2 = Vector::<3>::new(0.5, 0.6, 0.2);
    let ls = hedlund_lstar(&lam, &alpha2);
    assert_abs_diff_eq!(ls, 1.0, epsilon = 1e-15);
    let l2 = CausalPath::new(&h, vec![Vector::<3>::new(0.0, 0.1, 0.5), Vector::<3>::new(0.0, 2.6, 0.5)]).unwrap();
    let r = check_calibrated(&h, &Calibration::linear(alpha2, ls), &l2);
    assert_abs_diff_eq!(r.defect, (alpha2[1] / lam[1] - ls) * lam[1], epsilon = 1e-6);

    let f = make_flat::<2>();
    let line = CausalPath::new(&f, vec![v2(0.0, 0.3), v2(4.0, 0.3)]).unwrap();
    assert!(check_calibrated(&f, &Calibration::linear(v2(1.0, 0.0), 1.0), &line).defect < 1e-12);
}

#[test]
fn l_infty_examples() {
    let f = make_flat::<2>();
    let pts = sample_points(&f, 50, 1);
    assert_abs_diff_eq!(l_infty(&f, |_| v2(1.0, 0.0), &pts), 1.0, epsilon = 1e-12);
    assert_eq!(l_infty(&f, |_| v2(0.0, 1.0), &pts), f64::NEG_INFINITY);
    let h = hedlund();
    let pts = sample_points(&h, 200, 2);
    assert_eq!(l_infty(&h, |_| Vector::<3>::new(0.5, 0.3, 0.2), &pts), f64::NEG_INFINITY);
    // the obstruction sits on L₁: g₁(−ω♯,−ω♯) = −1 + 3(λ₂²+λ₃²)/λ₁²
    let g = h.metric(&Vector::<3>::new(0.4, 0.0, 0.0));
    let sharp = -(g.try_inverse().unwrap() * Vector::<3>::new(0.5, 0.3, 0.2));
    assert_abs_diff_eq!(quad(&g, &sharp), -1.0 + 3.0 * (0.09 + 0.04) / 0.25, epsilon = 1e-9);
}

#[test]
fn one_sided_duality() {
    let f = make_flat::<2>();
    let pts = sample_points(&f, 100, 4);
    let r = duality_check(&f, &v2(1.0, 0.0), 1.0, 4, 50, &pts, 7, 1e-9);
    assert!(r.pass);
    assert_abs_diff_eq!(r.best_l_infty, 1.0, epsilon = 1e-12);
    let h = hedlund();
    let pts = sample_points(&h, 500, 5);
    let lam = Vector::<3>::new(0.5, 0.3, 0.2);
    let r = duality_check(&h, &lam, hedlund_lstar(&h.lambdas(), &lam), 4, 50, &pts, 8, 1e-9);
    assert!(r.pass, "{r:?}");
}

#[test]
fn calibrations_are_equivariant() {
    let cal = Calibration {
        alpha: Vector::<3>::new(0.5, 0.3, 0.2),
        correction: vec![FourierMode { amp: 0.01, k: [1, -2, 3], phase: 0.4 }],
        lstar: 1.0,
    };
    let x = Vector::<3>::new(0.31, -0.7, 1.9);
    for k in [Vector::<3>::new(1.0, 0.0, 0.0), Vector::<3>::new(-3.0, 5.0, 2.0)] {
        assert!((cal.tau(&(x + k)) - cal.tau(&x) - cal.alpha.dot(&k)).abs() < 1e-9);
    }
    assert!(cal.lipschitz().is_finite());
    let h = 1e-6;
    let fd = (cal.tau(&(x + Vector::<3>::new(0.0, h, 0.0))) - cal.tau(&(x - Vector::<3>::new(0.0, h, 0.0)))) / (2.0 * h);
    assert!((fd - cal.omega(&x)[1]).abs() < 1e-7);
}

#[test]
fn boundary_torus_witness() {
    for n in [2.0, 4.0] {
        let w = boundary_witness(n, 0.1, 1e-3);
        assert!(w.causal);
        assert_eq!(w.homology[0], -1);
        assert_eq!(w.loop_integral, -1.0);
        assert!(w.closing_gap < 0.5, "{w:?}");
    }
}
