use approx::assert_abs_diff_eq;
use lorentz_core::exec::Exec;
use lorentz_core::graphcheck::*;
use lorentz_core::measures::{occupation_measure, DirectionBins, OccupationMeasure};
use lorentz_core::spacetime::*;
use lorentz_core::Error;

fn v2(a: f64, b: f64) -> Vector<2> {
    Vector::<2>::new(a, b)
}

fn hedlund() -> Hedlund {
    make_hedlund(HedlundParams::new([0.5, 0.3, 0.2], 0.01).unwrap()).unwrap()
}

#[test]
fn trivial_fits() {
    let mut s = SupportSample::<2>::new();
    s.push(v2(0.2, 0.3), v2(1.0, 0.1));
    s.push(v2(0.2, 0.3), v2(1.0, 0.1));
    let h = holder_check(&s);
    assert_eq!(h.k, 0.0);
    assert!(h.injective);
    let f = make_flat::<2>();
    let mut one = SupportSample::<2>::new();
    one.push(v2(0.0, 0.0), v2(1.0, 0.0));
    let l = lipschitz_check(&f, &one, 0.5);
    assert_eq!(l.k, 0.0);
    assert_eq!(l.used, 1);

    let mut bad = SupportSample::<2>::new();
    bad.push(v2(0.5, 0.5), v2(1.0, 0.0));
    bad.push(v2(0.5, 0.5), v2(1.0, 0.5));
    assert!(!holder_check(&bad).injective);
}

#[test]
fn restriction_to_timelike_cone() {
    let f = make_flat::<2>();
    let mut s = SupportSample::<2>::new();
    s.push(v2(0.0, 0.0), v2(1.0, 0.0));
    s.push(v2(0.1, 0.0), v2(1.0, 0.99));
    s.push(v2(0.2, 0.0), v2(-1.0, 0.0));
    assert_eq!(s.restrict_timelike(&f, 0.1).len(), 1);
    assert_eq!(s.restrict_timelike(&f, 0.0).len(), 2);
}

#[test]
fn hedlund_three_line_support() {
    let h = hedlund();
    let bins = DirectionBins::<3>::standard();
    let mus: Vec<OccupationMeasure<3>> = (0..3)
        .map(|i| {
            let p = family_shift(i);
            let mut q = p;
            q[i] += 2.0;
            occupation_measure(&CausalPath::new(&h, vec![p, q]).unwrap(), &bins).unwrap()
        })
        .collect();
    let mix = OccupationMeasure::mix(&[(&mus[0], 1.0 / 3.0), (&mus[1], 1.0 / 3.0), (&mus[2], 1.0 / 3.0)]);
    let s = SupportSample::from_measure(&mix);
    let fit = holder_check(&s);
    assert!(fit.injective);
    assert!(fit.k.is_finite() && fit.k > 0.0);
    // tangents differ by at most 2 (plus the position part) while distinct tubes sit ≥ ½ − 2ε apart
    assert!(fit.k <= (2.0f64 + 3.0) / (0.5 - 2.0 * h.eps()) * 4.0, "{}", fit.k);
    assert!(lipschitz_check(&h, &s, 0.01).k.is_finite());
}

#[test]
fn r20_ladder() {
    let rep = minkowski_ladder(&[1e-1, 1e-2, 1e-3, 1e-4], 41);
    assert!((rep.exponent - 0.5).abs() <= 0.05, "{}", rep.exponent);
    assert!(rep.lipschitz_growth >= 10.0, "{}", rep.lipschitz_growth);
    assert!(rep.holder_spread < 10.0, "{}", rep.holder_spread);
    assert!(rep.pass(0.05, 10.0));
}

#[test]
fn fit_exponent_recovers_power_laws() {
    let pts: Vec<(f64, f64)> = (1..20).map(|i| (i as f64 * 0.1, 3.0 * (i as f64 * 0.1).powf(0.7))).collect();
    assert_abs_diff_eq!(fit_exponent(&pts), 0.7, epsilon = 1e-12);
    assert!(fit_exponent(&[(1.0, 1.0)]).is_nan());
}

#[test]
fn lemma20a_trivial_cases() {
    let g = make_flat::<2>().metric(&v2(0.0, 0.0));
    let v = v2(1.0, 0.3);
    let (r, ok) = lemma20a_ratio(&g, &v, &v);
    assert!(ok && r.is_infinite());
    let null = v2(1.0, 1.0);
    assert_eq!(quad(&g, &null), 0.0);
    assert!(cone::light_distance(&g, &v2(1.0, 0.0), &null) < 1e-12);
    let (r, ok) = lemma20a_ratio(&g, &v2(1.0, 0.0), &v2(1.0, 0.5));
    assert!(ok && r > 0.0);
}

#[test]
fn lemma20a_on_hedlund() {
    let rep = lemma20a_check(&hedlund(), 10_000, 11, Exec::Sequential);
    assert_eq!(rep.samples, 10_000);
    assert!(rep.pass, "{rep:?}");
    assert!(rep.eps_tilde > 0.0 && rep.c_tilde.is_finite());
    assert_eq!(rep.reverse_cs_failures, 0);
}

#[test]
fn identical_segments_gain_nothing() {
    let f = make_flat::<2>();
    let s = pregeodesic_segment(&f, &v2(0.3, 0.4), &v2(1.0, 0.2), 0.1, 1e-3).unwrap();
    let g = crossing_gain(&f, &s, &s, 0.1, &CrossingOptions::default()).unwrap();
    assert!(g.gain.abs() < 1e-12, "{}", g.gain);
    assert_eq!(g.dist_tangent, 0.0);
}

#[test]
fn minkowski_gain_matches_closed_form() {
    let f = make_flat::<2>();
    let eps = 0.1;
    let (a1, u1) = (v2(0.0, 0.0), v2(1.0, 0.0));
    let a2 = v2(0.0, 1e-4);
    let u2 = v2(1e-2f64.cos(), 1e-2f64.sin());
    let s1 = pregeodesic_segment(&f, &a1, &u1, eps, eps / 100.0).unwrap();
    let s2 = pregeodesic_segment(&f, &a2, &u2, eps, eps / 100.0).unwrap();
    let g = crossing_gain(&f, &s1, &s2, eps, &CrossingOptions::default()).unwrap();
    let exact = minkowski_gain(&a1, &u1, &a2, &u2, eps);
    assert!(exact > 0.0);
    assert!((g.gain - exact).abs() <= 0.01 * exact, "{} vs {exact}", g.gain);
}

#[test]
fn spacelike_exchange_is_rejected() {
    let f = make_flat::<2>();
    let s1 = CausalPath::new(&f, vec![v2(-0.1, 0.0), v2(0.1, 0.0)]).unwrap();
    let s2 = CausalPath::new(&f, vec![v2(-0.1, 0.5), v2(0.1, 0.5)]).unwrap();
    assert!(matches!(crossing_gain(&f, &s1, &s2, 0.1, &CrossingOptions::default()), Err(Error::NotCrossingConfiguration(_))));
}

#[test]
fn small_batteries_have_positive_gain() {
    let c = make_conformally_flat::<2>(1.0, vec![FourierMode { amp: 0.2, k: [1, 1], phase: 0.3 }]).unwrap();
    let opts = CrossingOptions::default();
    let b = crossing_battery(&c, 12, 0.1, Regime::Holder(1.0), 5, &opts, Exec::Sequential);
    assert!(b.computed >= 8, "{} of {}", b.computed, b.configurations);
    assert!(b.pass && b.eta_hat > 0.0 && b.min_gain > 0.0);
    let l = crossing_battery(&c, 12, 0.1, Regime::Lipschitz(1.0), 6, &opts, Exec::Sequential);
    assert!(l.computed > 0);
    assert!(l.pass, "{}", l.eta_hat);
    let mut buf = Vec::new();
    b.write_csv(&mut buf).unwrap();
    let s = String::from_utf8(buf).unwrap();
    assert_eq!(s.lines().next().unwrap(), "dist_base,dist_tangent,gain");
    assert_eq!(s.lines().count(), b.computed + 1);
}

#[test]
fn batteries_are_deterministic_across_modes() {
    let c = make_conformally_flat::<2>(1.0, vec![FourierMode { amp: 0.2, k: [1, 1], phase: 0.3 }]).unwrap();
    let opts = CrossingOptions::default();
    let a = crossing_battery(&c, 4, 0.1, Regime::Holder(1.0), 9, &opts, Exec::Sequential);
    let b = lorentz_core::exec::with_threads(8, || crossing_battery(&c, 4, 0.1, Regime::Holder(1.0), 9, &opts, Exec::Parallel));
    assert_eq!(a.rows.len(), b.rows.len());
    for (x, y) in a.rows.iter().zip(&b.rows) {
        assert_eq!(x.gain.to_bits(), y.gain.to_bits());
    }
}
