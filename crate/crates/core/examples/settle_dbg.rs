use persp::funcs::{FuncHandle, GridSpec, Norm};
use persp::perspective::preperspective_eval;
use persp::transform::{biconjugate_grid, dual_spec_from_slopes_in};
use persp::Point;

fn main() {
    let phi = FuncHandle::berhu(1, Norm::Euclidean, 1.0, 2.0).unwrap();
    let s = FuncHandle::clipped_quadratic(0.5).unwrap();
    let n = 101usize;
    let spec = GridSpec::new(vec![-3.0, -1.5], vec![3.0, 3.0], vec![n, n]).unwrap();
    let mut values = Vec::new();
    let mut coords = vec![0.0; 2];
    for i in 0..spec.num_nodes() {
        spec.node_into(i, &mut coords);
        values.push(preperspective_eval(&phi, &s, &Point::from(coords[0]), &Point::from(coords[1])).unwrap());
    }
    let samples = persp::GridFunction::new(spec.clone(), values).unwrap();
    let keep = |_: usize, c: &[f64]| -> bool { c[0].abs() <= 2.8 && c[1] >= -0.8 && c[1] <= 2.8 };
    let coarse = vec![51usize, 51];
    let raw = dual_spec_from_slopes_in(&samples, &coarse, keep).unwrap();
    let mut lower = raw.lower.clone();
    let mut upper = raw.upper.clone();
    for it in 0..12 {
        let dual = GridSpec::new(lower.clone(), upper.clone(), coarse.clone()).unwrap();
        let bi = biconjugate_grid(&samples, &dual).unwrap();
        let ranges = bi.grid.slope_range(keep);
        println!("iter {it}: box x[{:.2},{:.2}] y[{:.2},{:.2}] observed {:?}",
            lower[0], upper[0], lower[1], upper[1], ranges);
        let mut changed = false;
        for axis in 0..2 {
            let (slo, shi) = match ranges[axis] { Some(r) => r, None => continue };
            let h = dual.spacing(axis);
            let half = 0.5 * (upper[axis] - lower[axis]);
            if shi > upper[axis] - 2.0 * h { upper[axis] += half; changed = true; }
            if slo < lower[axis] + 2.0 * h { lower[axis] -= half; changed = true; }
            if !changed {
                let span = (shi - slo).max(1e-6);
                let (nl, nh) = (slo - 0.1 * span, shi + 0.1 * span);
                if nh < upper[axis] - 2.0 * h || nl > lower[axis] + 2.0 * h {
                    lower[axis] = nl; upper[axis] = nh; changed = true;
                }
            }
        }
        if !changed { println!("settled"); break; }
    }
}
