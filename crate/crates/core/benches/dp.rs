use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lorentz_core::exec::Exec;
use lorentz_core::hedlund::TubeOracle;
use lorentz_core::reach::{GridOracle, SeparationOracle};
use lorentz_core::spacetime::*;

fn modes() -> [(&'static str, Exec); 2] {
    [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)]
}

fn conformal_diamond(c: &mut Criterion) {
    let m = make_conformally_flat::<2>(1.0, vec![FourierMode { amp: 0.2, k: [1, 2], phase: 0.5 }]).unwrap();
    let (p, q) = (Vector::<2>::zeros(), Vector::<2>::new(2.0, 0.7));
    let mut g = c.benchmark_group("conformal_diamond_dx0.005");
    g.sample_size(10);
    for (name, exec) in modes() {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            let o = GridOracle::new(&m, 0.005, 3).with_exec(exec);
            b.iter(|| o.separation(&p, &q).unwrap().value)
        });
    }
    g.finish();
}

fn hedlund_tube(c: &mut Criterion) {
    let h = make_hedlund(HedlundParams::new([0.5, 0.3, 0.2], 0.01).unwrap()).unwrap();
    let (p, q) = (Vector::<3>::zeros(), Vector::<3>::new(3.0, 2.0, 2.5));
    let mut g = c.benchmark_group("hedlund_tube_dx0.005");
    g.sample_size(10);
    for (name, exec) in modes() {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            let o = TubeOracle::new(&h, 0.005).with_exec(exec);
            b.iter(|| o.separation(&p, &q).unwrap().value)
        });
    }
    g.finish();
}

criterion_group!(benches, conformal_diamond, hedlund_tube);
criterion_main!(benches);
