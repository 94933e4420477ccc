use approx::assert_abs_diff_eq;
use lorentz_core::spacetime::*;
use lorentz_core::Error;
use proptest::prelude::*;

fn hedlund() -> Hedlund {
    make_hedlund(HedlundParams::new([0.5, 0.3, 0.2], 0.01).unwrap()).unwrap()
}

#[test]
fn classify_basic_vectors() {
    let h = hedlund();
    let v1 = Vector::<3>::repeat(1.0) / 3f64.sqrt();
    for p in [Vector::<3>::zeros(), Vector::<3>::new(0.3, 0.71, 0.2), Vector::<3>::new(0.0, 0.0, 0.505)] {
        assert_eq!(classify(&h, &p, &v1), CausalClass::TimelikeFuture);
    }
    let f = make_flat::<2>();
    let o = Vector::<2>::zeros();
    assert_eq!(classify(&f, &o, &Vector::<2>::new(1.0, 1.0)), CausalClass::LightlikeFuture);
    assert_eq!(classify(&f, &o, &Vector::<2>::new(-1.0, 1.0)), CausalClass::LightlikePast);
    assert_eq!(classify(&f, &o, &Vector::<2>::new(0.0, 1.0)), CausalClass::Spacelike);
    assert_eq!(classify(&f, &o, &Vector::<2>::new(-1.0, 0.0)), CausalClass::TimelikePast);
    assert_eq!(classify(&f, &o, &Vector::<2>::zeros()), CausalClass::Zero);
    assert_eq!(classify(&f, &o, &Vector::<2>::new(1.0, 0.0)), CausalClass::TimelikeFuture);
}

#[test]
fn lengths_of_simple_segments() {
    let f = make_flat::<2>();
    let p = CausalPath::new(&f, vec![Vector::<2>::zeros(), Vector::<2>::new(2.0, 1.0)]).unwrap();
    assert_abs_diff_eq!(p.l_g, 3f64.sqrt(), epsilon = 1e-12);
    let null = CausalPath::new(&f, vec![Vector::<2>::zeros(), Vector::<2>::new(1.0, 1.0)]).unwrap();
    assert_eq!(null.l_g, 0.0);

    let h = hedlund();
    for t in [0.5, 3.0, 7.25] {
        let a = Vector::<3>::new(0.2, 0.0, 0.0);
        let b = a + Vector::<3>::new(t, 0.0, 0.0);
        let seg = CausalPath::new(&h, vec![a, b]).unwrap();
        assert_abs_diff_eq!(seg.l_g, 0.5 * t, epsilon = 1e-12);
        assert_abs_diff_eq!(lorentz_length(&h, &seg).unwrap(), 0.5 * t, epsilon = 1e-12);
    }
}

#[test]
fn spacelike_segment_is_rejected() {
    let f = make_flat::<2>();
    let err = CausalPath::new(&f, vec![Vector::<2>::zeros(), Vector::<2>::new(1.0, 0.0), Vector::<2>::new(1.2, 1.0)]).unwrap_err();
    assert!(matches!(err, Error::NonCausalSegment { index: 1, .. }));
}

#[test]
fn hedlund_line_equality_and_far_field() {
    let h = hedlund();
    for i in 0..3 {
        let mut p = family_shift(i) + Vector::<3>::new(1.0, -2.0, 3.0);
        p[i] = 0.137;
        assert_eq!(h.metric(&p), h.g_line[i]);
    }
    let far = Vector::<3>::new(0.25, 0.25, 0.25);
    assert!(h.tube(&far).is_none());
    assert_eq!(h.metric(&far), h.g_eps);
    let v1 = h.v1;
    let diff = h.g_2eps - h.g_eps;
    let expect = v1 * v1.transpose() * (-0.75 * 0.01 * 0.01);
    assert!((diff - expect).amax() < 1e-15);
    // negative semidefinite
    let (vals, _) = sym_eigen(&diff);
    assert!(vals.iter().all(|&x| x <= 1e-18));
}

#[test]
fn hedlund_verification_passes_and_tampering_fails() {
    let h = hedlund();
    let rep = verify_hedlund(&h, 100_000, 17);
    assert!(rep.pass, "{rep:?}");
    assert_eq!(rep.cond_i.samples + rep.cond_ii.samples + rep.cond_iii.samples, 200_000);

    let bad = HedlundParams::new([0.5, 0.3, 0.2], 0.01).unwrap().with_bump(Bump::Scaled(0.5));
    let rep = verify_hedlund(&Hedlund::new_unchecked(bad), 4000, 3);
    assert!(rep.line_equality_dev > 1e-3);
    assert!(!rep.pass);
    assert!(matches!(make_hedlund(bad), Err(Error::ConditionViolated(_))));
}

#[test]
fn near_degenerate_lambda_margin_is_reported() {
    let p = HedlundParams::new([0.01, 0.495, 0.495], 0.01).unwrap();
    let rep = verify_hedlund(&Hedlund::new_unchecked(p), 2000, 5);
    assert_abs_diff_eq!(rep.v1_margin, -0.01f64.powi(2) / 9.0 + 0.01f64.powi(2) / 4.0, epsilon = 1e-15);
}

#[test]
fn hedlund_params_are_validated() {
    assert!(matches!(HedlundParams::new([0.5, 0.0, 0.5], 0.01), Err(Error::InvalidParameter { ref key, .. }) if key == "lambdas"));
    assert!(matches!(HedlundParams::new([0.5, 0.3, 0.2], 0.3), Err(Error::InvalidParameter { ref key, .. }) if key == "eps"));
    let p = HedlundParams::new([5.0, 3.0, 2.0], 0.01).unwrap();
    assert_abs_diff_eq!(p.lambdas[0], 0.5, epsilon = 1e-15);
}

#[test]
fn conformal_factor_pointwise() {
    let f = make_flat::<2>();
    assert_eq!(classify(&f, &Vector::<2>::new(0.3, 0.4), &Vector::<2>::new(1.0, 0.0)), CausalClass::TimelikeFuture);
    let c = make_conformally_flat::<2>(1.0, vec![FourierMode { amp: 0.3, k: [1, 0], phase: 0.0 }]).unwrap();
    let g = c.metric(&Vector::<2>::new(0.25, 0.7));
    assert_abs_diff_eq!(g[(0, 0)], -1.69, epsilon = 1e-12);
    assert_abs_diff_eq!(g[(1, 1)], 1.69, epsilon = 1e-12);
    assert_eq!(g[(0, 1)], 0.0);
    let bad = make_conformally_flat::<2>(0.2, vec![FourierMode { amp: 0.5, k: [1, 0], phase: 0.0 }]);
    assert!(matches!(bad, Err(Error::NonPositiveConformalFactor { .. })));
}

#[test]
fn boundary_torus_null_directions() {
    let b = make_boundary_2torus();
    let p = Vector::<2>::new(0.25, 0.4);
    let v = Vector::<2>::new(-0.5, 1.0);
    assert_eq!(classify(&b, &p, &v), CausalClass::LightlikeFuture);
    let (x1, x2) = BoundaryTorus::frame(&p);
    let g = b.metric(&p);
    assert!(quad(&g, &Vector::<2>::new(x1[0], x1[1])).abs() < 1e-15);
    assert!(quad(&g, &Vector::<2>::new(x2[0], x2[1])).abs() < 1e-15);
    assert!(check_metric(&b, 2000, 1).pass());
}

#[test]
fn metric_invariants_on_all_families() {
    assert!(check_metric(&hedlund(), 5000, 2).pass());
    assert!(check_metric(&make_flat::<3>(), 500, 2).pass());
    let c = make_conformally_flat::<3>(1.0, vec![FourierMode { amp: 0.2, k: [1, 2, -1], phase: 0.4 }]).unwrap();
    assert!(check_metric(&c, 2000, 2).pass());
}

#[test]
fn light_distance_in_minkowski() {
    let g = make_flat::<2>().metric(&Vector::<2>::zeros());
    let o = Vector::<2>::new(1.0, 0.0);
    // distance from (1,0) to the lines t = ±x is 1/√2
    assert_abs_diff_eq!(cone::light_distance(&g, &o, &o), 0.5f64.sqrt(), epsilon = 1e-12);
    assert_abs_diff_eq!(cone::light_distance(&g, &o, &Vector::<2>::new(1.0, 1.0)), 0.0, epsilon = 1e-12);
    let g3 = make_flat::<3>().metric(&Vector::<3>::zeros());
    let o3 = Vector::<3>::new(1.0, 0.0, 0.0);
    assert_abs_diff_eq!(cone::light_distance(&g3, &o3, &o3), 0.5f64.sqrt(), epsilon = 1e-9);
}

proptest! {
    #[test]
    fn hedlund_is_periodic(x in -3.0f64..3.0, y in -3.0f64..3.0, z in -3.0f64..3.0, a in -3i32..3, b in -3i32..3, c in -3i32..3) {
        let h = hedlund();
        let p = Vector::<3>::new(x, y, z);
        let k = Vector::<3>::new(a as f64, b as f64, c as f64);
        prop_assert!((h.metric(&p) - h.metric(&(p + k))).amax() < 1e-12);
    }

    #[test]
    fn classification_is_scale_invariant(x in -2.0f64..2.0, y in -2.0f64..2.0, s in 0.01f64..100.0) {
        let f = make_flat::<2>();
        let p = Vector::<2>::zeros();
        let v = Vector::<2>::new(x, y);
        prop_assume!(v.norm() > 1e-3);
        prop_assert_eq!(classify(&f, &p, &v), classify(&f, &p, &(v * s)));
    }

    #[test]
    fn lengths_are_additive(t in 0.1f64..3.0, u in 0.0f64..0.9) {
        let f = make_flat::<2>();
        let a = Vector::<2>::zeros();
        let m = Vector::<2>::new(t, u * t);
        let b = Vector::<2>::new(2.0 * t, 0.0);
        let whole = CausalPath::new(&f, vec![a, m, b]).unwrap();
        let l1 = CausalPath::new(&f, vec![a, m]).unwrap();
        let l2 = CausalPath::new(&f, vec![m, b]).unwrap();
        prop_assert!((whole.l_g - l1.l_g - l2.l_g).abs() < 1e-12);
        // reverse triangle inequality
        prop_assert!(whole.l_g <= 2.0 * t + 1e-12);
    }
}
