use approx::assert_abs_diff_eq;
use lorentz_core::exec::Exec;
use lorentz_core::hedlund::TubeOracle;
use lorentz_core::measures::*;
use lorentz_core::reach::GridOracle;
use lorentz_core::spacetime::*;
use lorentz_core::Error;
use std::f64::consts::TAU;

fn v2(a: f64, b: f64) -> Vector<2> {
    Vector::<2>::new(a, b)
}

fn hedlund() -> Hedlund {
    make_hedlund(HedlundParams::new([0.5, 0.3, 0.2], 0.01).unwrap()).unwrap()
}

fn line_run(h: &Hedlund, i: usize, t: f64) -> CausalPath<3> {
    let p = family_shift(i);
    let mut q = p;
    q[i] += t;
    CausalPath::new(h, vec![p, q]).unwrap()
}

#[test]
fn hedlund_line_measure() {
    let h = hedlund();
    let bins = DirectionBins::<3>::standard();
    assert_eq!(bins.centers.len(), 320);
    let mu = occupation_measure(&line_run(&h, 0, 5.0), &bins).unwrap();
    let dirs: std::collections::BTreeSet<u32> = mu.cells.keys().map(|k| k.2).collect();
    assert_eq!(dirs.len(), 1);
    assert_abs_diff_eq!(mu.mass(), 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(rotation_class(&mu), Vector::<3>::new(1.0, 0.0, 0.0), epsilon = 1e-12);
    assert_abs_diff_eq!(average_length(&h, &mu).unwrap(), 0.5, epsilon = 1e-12);
}

#[test]
fn mixtures_are_linear() {
    let h = hedlund();
    let bins = DirectionBins::<3>::standard();
    let a = occupation_measure(&line_run(&h, 0, 3.0), &bins).unwrap();
    let b = occupation_measure(&line_run(&h, 1, 2.0), &bins).unwrap();
    let mix = OccupationMeasure::mix(&[(&a, 0.3), (&b, 0.7)]);
    let expect = rotation_class(&a) * 0.3 + rotation_class(&b) * 0.7;
    assert_abs_diff_eq!(rotation_class(&mix), expect, epsilon = 1e-15);
    assert_abs_diff_eq!(average_length(&h, &mix).unwrap(), 0.3 * 0.5 + 0.7 * 0.3, epsilon = 1e-12);
    assert!(a.disjoint(&b));
    // a self-mixture keeps both components and stays linear
    let same = OccupationMeasure::mix(&[(&a, 0.5), (&a, 0.5)]);
    assert_abs_diff_eq!(rotation_class(&same), rotation_class(&a), epsilon = 1e-15);
}

#[test]
fn twice_traversed_loop_gives_the_same_measure() {
    let f = make_flat::<2>();
    let bins = DirectionBins::<2>::standard();
    let once = occupation_measure(&CausalPath::new(&f, vec![v2(0.1, 0.2), v2(1.1, 0.2)]).unwrap(), &bins).unwrap();
    let twice = occupation_measure(&CausalPath::new(&f, vec![v2(0.1, 0.2), v2(2.1, 0.2)]).unwrap(), &bins).unwrap();
    assert_eq!(once.cells.len(), twice.cells.len());
    for (k, c) in &once.cells {
        assert_abs_diff_eq!(c.weight, twice.cells[k].weight, epsilon = 1e-12);
    }
}

#[test]
fn closed_loop_rotation_class() {
    let f = make_flat::<2>();
    let k = v2(3.0, 1.0);
    let p = CausalPath::new(&f, vec![v2(0.0, 0.0), k]).unwrap();
    let mu = occupation_measure(&p, &DirectionBins::standard()).unwrap();
    assert_abs_diff_eq!(rotation_class(&mu), k / p.l_r, epsilon = 1e-12);
}

#[test]
fn flat_average_lengths() {
    let f = make_flat::<2>();
    let bins = DirectionBins::<2>::standard();
    let null = occupation_measure(&CausalPath::new(&f, vec![v2(0.0, 0.0), v2(2.0, 2.0)]).unwrap(), &bins).unwrap();
    assert!(average_length(&f, &null).unwrap() < 1e-9);
    let u = v2(1.0, 0.4).normalize();
    let mu = occupation_measure(&CausalPath::new(&f, vec![v2(0.0, 0.0), u * 3.0]).unwrap(), &bins).unwrap();
    assert_abs_diff_eq!(average_length(&f, &mu).unwrap(), (u[0] * u[0] - u[1] * u[1]).sqrt(), epsilon = 1e-12);
    let empty = CausalPath::new(&f, vec![v2(0.0, 0.0)]).unwrap();
    assert!(matches!(occupation_measure(&empty, &bins), Err(Error::EmptyPath)));
}

#[test]
fn invariance_defects() {
    let f = make_flat::<2>();
    let bins = DirectionBins::<2>::standard();
    let loop_mu = occupation_measure(&CausalPath::new(&f, vec![v2(0.0, 0.3), v2(1.0, 0.3)]).unwrap(), &bins).unwrap();
    let s = |x: &Vector<2>| (TAU * x[0]).sin() / TAU;
    assert!(invariance_defect(&loop_mu, s).abs() < 1e-6);
    assert_eq!(invariance_defect(&loop_mu, |_| 2.5), 0.0);
    for t in [10.0, 20.0, 40.0] {
        let u = v2(1.0, 0.3).normalize();
        let p = CausalPath::new(&f, vec![v2(0.13, 0.0), v2(0.13, 0.0) + u * t]).unwrap();
        let mu = occupation_measure(&p, &bins).unwrap();
        for g in [s, |x: &Vector<2>| (TAU * (x[0] + x[1])).cos() / (TAU * 2f64.sqrt())] {
            let d = invariance_defect(&mu, g);
            assert!(d.abs() <= 2.0 / t, "T {t}: {d}");
        }
    }
}

#[test]
fn flat_maximal_measure() {
    let f = make_flat::<2>();
    let o = GridOracle::new(&f, 0.02, 5);
    let h = v2(2.0, 1.0);
    let (mu, rep) = find_maximal_measure(&f, &o, &v2(0.0, 0.0), &h, 2.0).unwrap();
    assert_abs_diff_eq!(rotation_class(&mu), h, epsilon = 1e-12);
    assert_abs_diff_eq!(rep.average_length, 3f64.sqrt(), epsilon = 1e-6);
    assert!(rep.gap.abs() < 1e-6);
}

#[test]
fn hedlund_line_measures_are_disjoint() {
    let h = hedlund();
    let o = TubeOracle::new(&h, 0.01).with_exec(Exec::Sequential);
    let lam = h.lambdas();
    let mut mus = Vec::new();
    for i in 0..3 {
        let mut e = Vector::<3>::zeros();
        e[i] = 1.0;
        let (mu, rep) = find_maximal_measure(&h, &o, &family_shift(i), &e, 3.0).unwrap();
        assert_abs_diff_eq!(rep.average_length, lam[i], epsilon = 1e-9);
        assert!(rep.gap.abs() < 1e-9);
        mus.push(mu);
    }
    for i in 0..3 {
        for j in (i + 1)..3 {
            assert!(mus[i].disjoint(&mus[j]));
        }
    }
}

#[test]
fn measure_csv() {
    let f = make_flat::<2>();
    let mu = occupation_measure(&CausalPath::new(&f, vec![v2(0.0, 0.0), v2(1.0, 0.0)]).unwrap(), &DirectionBins::standard()).unwrap();
    let mut buf = Vec::new();
    mu.write_csv(&mut buf).unwrap();
    let s = String::from_utf8(buf).unwrap();
    assert_eq!(s.lines().next().unwrap(), "cell_id,x0,x1,v0,v1,weight");
    assert_eq!(s.lines().count(), mu.cells.len() + 1);
}
