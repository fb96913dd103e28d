use persp::funcs::{FuncHandle, GridSpec, Norm};
use persp::perspective::{preperspective_eval, PerspectiveReport};
use persp::transform::{biconjugate_grid, dual_spec_settled};
use persp::{ExtReal, Point};

fn region(c: &[f64]) -> bool {
    let (x, y) = (c[0], c[1]);
    x.abs() <= 2.8 && (-0.8..=2.8).contains(&y)
}

fn main() {
    let s = FuncHandle::clipped_quadratic(0.5).unwrap();
    let phis = [
        ("pair1", FuncHandle::huber(1, Norm::Euclidean, 1.0, 2.0).unwrap()),
        ("pair2", FuncHandle::berhu(1, Norm::Euclidean, 1.0, 2.0).unwrap()),
        ("pair3", FuncHandle::norm_power(1, Norm::Euclidean, 2.0, 1.0, 0.5).unwrap()),
    ];
    for n in [101usize, 201] {
        for (name, phi) in &phis {
            let report = PerspectiveReport::new(phi, &s, None).unwrap();
            let spec = GridSpec::new(vec![-3.0, -1.5], vec![3.0, 3.0], vec![n, n]).unwrap();
            let h = spec.max_spacing();
            let eps = h / 20.0;
            let mut values = Vec::new();
            let mut coords = vec![0.0; 2];
            for i in 0..spec.num_nodes() {
                spec.node_into(i, &mut coords);
                let v = preperspective_eval(&phi, &s, &Point::from(coords[0]), &Point::from(coords[1])).unwrap();
                // quadratic regularization pulls tangent contacts into the box
                values.push(match v {
                    ExtReal::Finite(v) => ExtReal::Finite(v + eps * (coords[0]*coords[0] + coords[1]*coords[1])),
                    other => other,
                });
            }
            let samples = persp::GridFunction::new(spec.clone(), values).unwrap();
            let keep = |_i: usize, c: &[f64]| region(c);
            let dual = dual_spec_settled(&samples, &[n, n], keep).unwrap();
            let bi = biconjugate_grid(&samples, &dual).unwrap();
            let mut sup: f64 = 0.0; let mut at = (0.0, 0.0);
            for i in 0..spec.num_nodes() {
                spec.node_into(i, &mut coords);
                if !region(&coords) { continue; }
                let p = report.perspective(&Point::from(coords[0]), &Point::from(coords[1])).unwrap().to_f64();
                let b = bi.grid.values[i].to_f64() - eps * (coords[0]*coords[0] + coords[1]*coords[1]);
                let d = (b - p).abs();
                if d > sup { sup = d; at = (coords[0], coords[1]); }
            }
            println!("{name} n={n} eps={eps:.5}: dual x[{:.2},{:.2}] y[{:.2},{:.2}] sup={sup:.5} at {at:?}",
                dual.lower[0], dual.upper[0], dual.lower[1], dual.upper[1]);
        }
    }
}
