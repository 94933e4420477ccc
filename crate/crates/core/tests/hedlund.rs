use lorentz_core::exec::Exec;
use lorentz_core::hedlund::*;
use lorentz_core::spacetime::*;
use lorentz_core::Error;
use std::time::Instant;

fn hedlund() -> Hedlund {
    make_hedlund(HedlundParams::new([0.5, 0.3, 0.2], 0.01).unwrap()).unwrap()
}

fn v3(a: f64, b: f64, c: f64) -> Vector<3> {
    Vector::<3>::new(a, b, c)
}

#[test]
fn line_system_geometry() {
    let ls = LineSystem::new(0.01);
    let (l, d) = ls.nearest(&v3(0.3, 0.001, 0.0));
    assert_eq!(l.family, 0);
    assert!((d - 0.001).abs() < 1e-15);
    let l2 = Line::nearest_of(1, &v3(0.0, 7.0, 0.4));
    assert!(l2.is_valid());
    assert_eq!(l2.offset, [0.0, 0.5]);
    let l3 = Line::nearest_of(2, &v3(0.4, 0.6, 3.0));
    assert_eq!(l3.offset, [0.5, 0.5]);
    // neighbouring lines are at least ½ apart
    let lines = [Line::nearest_of(0, &v3(0.0, 0.0, 0.0)), l2, l3, Line::new(0, [1.0, 0.0]), Line::new(1, [1.0, -0.5])];
    for a in &lines {
        for b in &lines {
            if !a.same(b) {
                let d = (-200..=200).map(|i| b.dist(&a.point(i as f64 * 0.01))).fold(f64::INFINITY, f64::min);
                assert!(d >= 0.5 - 1e-12, "{a:?} {b:?} {d}");
            }
        }
        assert!(b_proj_ok(a));
    }
    assert!(ls.component(&v3(0.25, 0.25, 0.25)).is_none());
}

fn b_proj_ok(l: &Line) -> bool {
    l.dist(&l.project(&v3(0.3, -0.2, 0.7))) < 1e-15
}

#[test]
fn five_segment_standard_path() {
    let h = hedlund();
    let p = Vector::<3>::zeros();
    let q = v3(3.0, 2.0, 2.5);
    let sp = standard_path(&h, &p, &q).unwrap();
    assert_eq!(sp.len(), 6);
    let an = count_tube_changes(&sp, h.eps());
    assert_eq!(an.changes, 2);
    assert_eq!(an.sequence.iter().map(|l| l.family).collect::<Vec<_>>(), vec![0, 2, 1]);
    assert!(check_f30(&sp, h.eps()) >= 0.0);
    assert!(check_l31(&h, &sp, &an).slack >= 0.0);
    let lam = h.lambdas();
    let lb: f64 = (0..3).map(|i| lam[i] * ((q - p)[i] - 1.0)).sum();
    assert!(sp.l_g >= lb, "{} < {lb}", sp.l_g);
    assert!(sp.l_g <= (0..3).map(|i| lam[i] * (q - p)[i]).sum::<f64>() + 4.0 * h.eps());
}

#[test]
fn three_segment_standard_path() {
    let h = hedlund();
    let sp = standard_path(&h, &Vector::<3>::zeros(), &v3(1.0, 1.0, 0.5)).unwrap();
    assert_eq!(sp.len(), 4);
    assert_eq!(count_tube_changes(&sp, h.eps()).changes, 1);
    assert!(check_f30(&sp, h.eps()) >= 0.0);
}

#[test]
fn standard_path_preconditions() {
    let h = hedlund();
    let p = Vector::<3>::zeros();
    assert!(matches!(standard_path(&h, &p, &v3(4.0, 0.0, 0.0)), Err(Error::NotConstructible(_))));
    assert!(matches!(standard_path(&h, &p, &v3(0.2, 1.0, 0.5)), Err(Error::NotConstructible(_))));
    assert!(matches!(standard_path(&h, &v3(0.1, 0.2, 0.3), &v3(3.0, 2.0, 2.5)), Err(Error::NotConstructible(_))));
}

#[test]
fn single_line_run() {
    let h = hedlund();
    let eps = h.eps();
    let t = 3.0;
    let run = CausalPath::new(&h, vec![v3(0.1, 0.0, 0.0), v3(0.1 + t, 0.0, 0.0)]).unwrap();
    assert!((check_f30(&run, eps) - (2.0 * (t + 4.0 * eps) - t)).abs() < 1e-12);
    let an = count_tube_changes(&run, eps);
    assert_eq!(an.changes, 0);
    assert!(an.a_set.is_empty());
    let l31 = check_l31(&h, &run, &an);
    assert_eq!(l31.lhs, 0.0);
    assert!(l31.slack >= 0.0);
    let line = Line::nearest_of(0, &run.vertices[0]);
    assert_eq!(tube_confinement_check(&run, &line, 0.5 * eps, 0.01), 0.0);
}

#[test]
fn standard_path_shadows_itself() {
    let h = hedlund();
    let sp = standard_path(&h, &Vector::<3>::zeros(), &v3(3.0, 2.0, 2.5)).unwrap();
    assert!(shadowing_check(&h, &sp, 0.01).unwrap() < 1e-12);
}

#[test]
fn connectability_examples() {
    let h = hedlund();
    let eps = h.eps();
    let p = Vector::<3>::zeros();
    let far = Vector::<3>::repeat(1.0 / eps + 2.0);
    match connectability_check(&h, &v3(0.2, 0.3, 0.1), &(v3(0.2, 0.3, 0.1) + far)) {
        Connectability::Reachable(c) => assert!(c.l_g > 0.0),
        other => panic!("{other:?}"),
    }
    assert!(matches!(connectability_check(&h, &p, &v3(-1.0, 0.0, 0.0)), Connectability::Unreachable));
    for n in [0.0025, 1.0, 17.5] {
        assert!(connectability_check(&h, &p, &v3(n, 0.0, 0.0)).is_reachable(), "N = {n}");
    }
}

#[test]
fn tube_dp_shadows_the_standard_path() {
    let h = hedlund();
    let o = TubeOracle::new(&h, 0.0025).with_exec(Exec::Sequential);
    let start = Instant::now();
    let (rep, path) = analyze_segment(&o, &Vector::<3>::zeros(), &v3(5.0, 3.0, 3.5)).unwrap();
    assert!(rep.shadowing <= 0.045, "{rep:?}");
    assert!(rep.pass(), "{rep:?}");
    assert!(path.l_g >= rep.guide_length - 1e-9);
    assert!(start.elapsed().as_secs() < 60);
}

#[test]
fn battery_is_admissible() {
    let b = segment_battery(24);
    assert_eq!(b.len(), 24);
    let h = hedlund();
    for (p, q) in &b {
        assert!(standard_path(&h, p, q).is_ok(), "{p:?} {q:?}");
    }
}

#[test]
fn heteroclinic_ordering_is_checked() {
    let h = hedlund();
    let o = TubeOracle::new(&h, 0.005);
    let l = Line::nearest_of(0, &Vector::<3>::zeros());
    let below = Line::new(1, [0.0, -0.5]);
    assert!(matches!(heteroclinic_experiment(&o, &l, &below, &[4], 0.005), Err(Error::NotConstructible(_))));
    let same = Line::new(0, [-1.0, 1.0]);
    assert!(matches!(heteroclinic_experiment(&o, &l, &same, &[4], 0.005), Err(Error::NotConstructible(_))));
}

#[test]
fn heteroclinic_tails_are_confined() {
    let h = hedlund();
    let o = TubeOracle::new(&h, 0.005).with_exec(Exec::Sequential);
    let l = Line::nearest_of(0, &Vector::<3>::zeros());
    let lp = Line::new(1, [1.0, 1.5]);
    let rep = heteroclinic_experiment(&o, &l, &lp, &[4, 8, 16], 0.5 * h.eps()).unwrap();
    assert!(rep.pass, "{:?}", rep.rungs);
    for r in &rep.rungs {
        assert!(r.length >= r.lower_bound, "{r:?}");
        assert!(r.tube_changes <= 6);
    }
}

#[test]
fn tube_constants() {
    let h = hedlund();
    let (ep, found) = epsilon_prime(&h, 0, 20, 24);
    assert!(found && ep > 0.0 && ep < h.eps());
    let e = eta(&h, 0, 0.5 * h.eps(), 50);
    assert!(e > 0.0 && e < h.lambdas()[0], "{e}");
}
