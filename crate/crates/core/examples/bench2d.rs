use std::time::Instant;
use persp::funcs::{FuncHandle, GridSpec, Norm};
use persp::perspective::{preperspective_eval, PerspectiveReport};
use persp::transform::{biconjugate_grid, dual_spec_settled};
use persp::Point;

fn run_pair(name: &str, phi: &FuncHandle, s: &FuncHandle, n: usize) {
    let spec = GridSpec::new(vec![-3.0, -1.5], vec![3.0, 3.0], vec![n, n]).unwrap();
    let report = PerspectiveReport::new(phi, s, None).unwrap();
    let mut values = Vec::with_capacity(spec.num_nodes());
    let mut coords = vec![0.0; 2];
    for i in 0..spec.num_nodes() {
        spec.node_into(i, &mut coords);
        values.push(preperspective_eval(phi, s, &Point::from(coords[0]), &Point::from(coords[1])).unwrap());
    }
    let samples = persp::GridFunction::new(spec.clone(), values).unwrap();
    let keep = |_: usize, c: &[f64]| -> bool {
        c[0].abs() <= 2.8 && c[1] >= -0.8 && c[1] <= 2.8
    };
    let t0 = Instant::now();
    let dual_b = dual_spec_settled(&samples, &[n, n], keep).unwrap();
    let bi = biconjugate_grid(&samples, &dual_b).unwrap();
    let el = t0.elapsed();
    let mut sup = 0.0f64; let mut mism = 0;
    for i in 0..spec.num_nodes() {
        spec.node_into(i, &mut coords);
        if !keep(i, &coords) { continue; }
        let p = report.perspective(&Point::from(coords[0]), &Point::from(coords[1])).unwrap();
        match (bi.grid.values[i], p) {
            (persp::ExtReal::Finite(a), persp::ExtReal::Finite(b)) => { sup = sup.max((a-b).abs()); }
            (a, b) if a == b => {}
            _ => mism += 1,
        }
    }
    println!("{name} n={n}: dualB x[{:.1},{:.1}] y[{:.1},{:.1}] sup={sup:.5} mism={mism} time={el:?}",
        dual_b.lower[0], dual_b.upper[0], dual_b.lower[1], dual_b.upper[1]);
}

fn main() {
    let phi1 = FuncHandle::huber(1, Norm::Euclidean, 1.0, 2.0).unwrap();
    let phi2 = FuncHandle::berhu(1, Norm::Euclidean, 1.0, 2.0).unwrap();
    let phi3 = FuncHandle::norm_power(1, Norm::Euclidean, 2.0, 1.0, 0.5).unwrap();
    let s = FuncHandle::clipped_quadratic(0.5).unwrap();
    for (name, phi) in [("pair1", &phi1), ("pair2", &phi2), ("pair3", &phi3)] {
        run_pair(name, phi, &s, 101);
        run_pair(name, phi, &s, 201);
    }
}
