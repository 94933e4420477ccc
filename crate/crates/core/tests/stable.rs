use approx::assert_abs_diff_eq;
use lorentz_core::exec::Exec;
use lorentz_core::hedlund::standard_path;
use lorentz_core::reach::GridOracle;
use lorentz_core::spacetime::*;
use lorentz_core::stable::*;
use lorentz_core::Error;

fn v2(a: f64, b: f64) -> Vector<2> {
    Vector::<2>::new(a, b)
}

fn hedlund() -> Hedlund {
    make_hedlund(HedlundParams::new([0.5, 0.3, 0.2], 0.01).unwrap()).unwrap()
}

fn est(value: f64) -> StableEstimate {
    StableEstimate {
        value,
        err: 0.0,
        n_used: 1.0,
        flag: ConeFlag::In,
        samples: vec![(1.0, value)],
        superadditive: true,
    }
}

/// Hedlund table with the exact linear `ℓ(h) = Σλᵢhⁱ` on a grid of simplex directions.
fn hedlund_table() -> StableSepTable<3> {
    let lam = [0.5, 0.3, 0.2];
    let mut t = StableSepTable::<3>::new();
    let n = 6;
    for a in 0..=n {
        for b in 0..=(n - a) {
            let h = Vector::<3>::new(a as f64, b as f64, (n - a - b) as f64) / n as f64;
            t.push(&h, &est((0..3).map(|i| lam[i] * h[i]).sum()));
        }
    }
    t
}

#[test]
fn rotation_vectors() {
    let f = make_flat::<2>();
    let line = CausalPath::new(&f, vec![v2(0.3, 0.1), v2(5.3, 0.1)]).unwrap();
    assert_abs_diff_eq!(rotation_vector(&line).unwrap(), v2(1.0, 0.0), epsilon = 1e-15);
    let u = v2(1.0, 0.6).normalize();
    let ray = CausalPath::new(&f, vec![v2(0.0, 0.0), u * 2.0, u * 7.0]).unwrap();
    assert_abs_diff_eq!(rotation_vector(&ray).unwrap(), u, epsilon = 1e-14);
    let h = hedlund();
    let q = Vector::<3>::new(3.0, 2.0, 2.5);
    let sp = standard_path(&h, &Vector::<3>::zeros(), &q).unwrap();
    assert_abs_diff_eq!(rotation_vector(&sp).unwrap(), q / sp.l_r, epsilon = 1e-15);
    let point = CausalPath::new(&f, vec![v2(0.0, 0.0), v2(0.0, 0.0)]).unwrap();
    assert!(matches!(rotation_vector(&point), Err(Error::ZeroLengthPath)));
}

#[test]
fn flat_stable_separation() {
    let f = make_flat::<2>();
    let o = GridOracle::new(&f, 0.02, 5);
    let e = stable_time_separation(&o, &v2(0.0, 0.0), &v2(2.0, 1.0), &[1.0, 2.0], 0.05, 1e-9).unwrap();
    assert_eq!(e.flag, ConeFlag::In);
    assert!(e.superadditive);
    assert_abs_diff_eq!(e.value, 3f64.sqrt(), epsilon = 1e-9);
    let out = stable_time_separation(&o, &v2(0.0, 0.0), &v2(0.5, 1.0), &[1.0, 2.0], 0.05, 1e-9).unwrap();
    assert_eq!(out.flag, ConeFlag::Out);
    assert_eq!(out.value, 0.0);
}

#[test]
fn conformal_bounds_bracket_lhat() {
    let c = make_conformally_flat::<2>(1.0, vec![FourierMode { amp: 0.3, k: [1, 1], phase: 0.2 }]).unwrap();
    let o = GridOracle::new(&c, 0.02, 3).with_exec(Exec::Sequential);
    for h in [v2(1.0, 0.0), v2(1.0, 0.5), v2(2.0, -1.0)] {
        let e = stable_time_separation(&o, &v2(0.0, 0.0), &h, &[2.0], 0.0, 1e-9).unwrap();
        let m = (h[0] * h[0] - h[1] * h[1]).sqrt();
        assert!(e.value >= 0.7 * m && e.value <= 1.3 * m, "{h:?}: {}", e.value);
    }
}

#[test]
fn dual_stable_examples() {
    let t = hedlund_table();
    let lam = Vector::<3>::new(0.5, 0.3, 0.2);
    assert_abs_diff_eq!(dual_stable(&t, &lam).unwrap(), 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(dual_stable(&t, &Vector::<3>::new(1.0, 0.3, 0.2)).unwrap(), 1.0, epsilon = 1e-12);
    let a = Vector::<3>::new(0.7, 0.2, 0.9);
    assert_eq!(dual_stable(&t, &(a * 4.0)).unwrap(), 4.0 * dual_stable(&t, &a).unwrap());
    assert!(matches!(dual_stable(&t, &Vector::<3>::new(1.0, -0.1, 0.2)), Err(Error::NotInDualCone)));

    let mut flat = StableSepTable::<2>::new();
    for i in -20..=20 {
        let r = i as f64 * 0.1;
        flat.push(&v2(r.cosh(), r.sinh()), &est(1.0));
    }
    assert_abs_diff_eq!(dual_stable(&flat, &v2(1.0, 0.0)).unwrap(), 1.0, epsilon = 1e-12);
}

#[test]
fn fenchel_inequality_on_table() {
    let t = hedlund_table();
    for alpha in [Vector::<3>::new(0.5, 0.3, 0.2), Vector::<3>::new(1.0, 2.0, 0.1)] {
        let ls = dual_stable(&t, &alpha).unwrap();
        for i in 0..t.len() {
            assert!(ls * t.values[i] <= alpha.dot(&t.direction(i)) + 1e-12);
        }
    }
}

#[test]
fn t17_properties() {
    let t = hedlund_table();
    let lam = Vector::<3>::new(0.5, 0.3, 0.2);
    let r = check_t17_properties(&t, |h| lam.dot(h), 1000);
    assert!(r.pass);
    assert!(r.superadditivity_worst.abs() < 1e-12, "linear ℓ gives equality");

    let mut flat = StableSepTable::<2>::new();
    let mink = |h: &Vector<2>| (h[0] * h[0] - h[1] * h[1]).max(0.0).sqrt();
    for i in -8..=8 {
        let h = v2(1.0, i as f64 * 0.1);
        flat.push(&h, &est(mink(&h)));
    }
    let r = check_t17_properties(&flat, mink, 1000);
    assert!(r.pass, "{r:?}");
    assert_eq!(r.concavity_worst, 0.0);
    // strictly concave along non-parallel timelike pairs
    for i in 0..flat.len() {
        for j in (i + 1)..flat.len() {
            let (a, b) = (flat.direction(i), flat.direction(j));
            assert!(mink(&((a + b) * 0.5)) > 0.5 * (flat.values[i] + flat.values[j]));
        }
    }

    let mut bad = StableSepTable::<2>::new();
    bad.push(&v2(1.0, 0.5), &est(1.0));
    bad.push(&v2(1.0, -0.5), &est(1.0));
    assert!(!check_t17_properties(&bad, |_| 0.1, 10).pass);
}

#[test]
fn table_csv_and_lookup() {
    let t = hedlund_table();
    let v = t.lookup(&Vector::<3>::new(2.0, 0.0, 0.0)).unwrap();
    assert_abs_diff_eq!(v, 1.0, epsilon = 1e-12);
    let mut buf = Vec::new();
    t.write_csv(&mut buf).unwrap();
    let s = String::from_utf8(buf).unwrap();
    assert_eq!(s.lines().next().unwrap(), "h0,h1,h2,lhat,err,n_used,flag");
    assert_eq!(s.lines().count(), t.len() + 1);
}

#[test]
fn flat_cone_is_the_future_light_cone() {
    let f = make_flat::<2>();
    let c = estimate_cone(&f, &[v2(0.0, 0.0)], &ConeOptions::new(0.1, 5, 10.0)).unwrap();
    assert!(c.zero_excluded);
    let d = c.hausdorff_to(&v2(1.0, 0.0), &[v2(1.0, 1.0), v2(1.0, -1.0)]);
    assert!(d < 0.05, "{d}");
}

#[test]
fn boundary_torus_cone() {
    let b = make_boundary_2torus();
    let c = estimate_cone(&b, &[v2(0.0, 0.0)], &ConeOptions::new(0.1, 5, 20.0)).unwrap();
    assert!(c.zero_excluded);
    let d = c.hausdorff_to(&v2(1.0, 1.0), &[v2(1.0, 0.0), v2(0.0, 1.0)]);
    assert!(d < 0.05, "{d}");
}

#[test]
fn hull_and_polygon_distance() {
    let pts = [[0.0, 0.0], [1.0, 0.0], [0.5, 0.2], [1.0, 1.0], [0.0, 1.0]];
    let h = convex_hull_2d(&pts);
    assert_eq!(h.len(), 4);
    assert_eq!(hausdorff_polygons(&h, &h), 0.0);
    let shifted: Vec<[f64; 2]> = h.iter().map(|p| [p[0] + 0.1, p[1]]).collect();
    assert_abs_diff_eq!(hausdorff_polygons(&h, &shifted), 0.1, epsilon = 1e-12);
}
