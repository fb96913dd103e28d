use persp::funcs::{FuncHandle, GridSpec, Norm};
use persp::perspective::{preperspective_eval, PerspectiveReport};
use persp::transform::{biconjugate_grid};
use persp::Point;

fn main() {
    let phi = FuncHandle::berhu(1, Norm::Euclidean, 1.0, 2.0).unwrap();
    let s = FuncHandle::clipped_quadratic(0.5).unwrap();
    let report = PerspectiveReport::new(&phi, &s, None).unwrap();
    let n = 201usize;
    for (xm, ym_lo, ym_hi) in [(3.0, -1.5, 3.0), (8.0, -1.5, 8.0)] {
        let spec = GridSpec::new(vec![-xm, ym_lo], vec![xm, ym_hi], vec![n, n]).unwrap();
        let mut values = Vec::new();
        let mut coords = vec![0.0; 2];
        for i in 0..spec.num_nodes() {
            spec.node_into(i, &mut coords);
            values.push(preperspective_eval(&phi, &s, &Point::from(coords[0]), &Point::from(coords[1])).unwrap());
        }
        let samples = persp::GridFunction::new(spec.clone(), values).unwrap();
        // generous manual dual box
        let dual = GridSpec::new(vec![-16.0, -24.0], vec![16.0, 8.0], vec![321, 321]).unwrap();
        let bi = biconjugate_grid(&samples, &dual).unwrap();
        // check the corner value and overall sup on the pair-4 comparison region
        let mut sup: f64 = 0.0; let mut at = (0.0, 0.0);
        for i in 0..spec.num_nodes() {
            spec.node_into(i, &mut coords);
            if coords[0].abs() > 2.8 || coords[1] < -0.8 || coords[1] > 2.8 { continue; }
            let p = report.perspective(&Point::from(coords[0]), &Point::from(coords[1])).unwrap().to_f64();
            let b = bi.grid.values[i].to_f64();
            if (b - p).abs() > sup { sup = (b - p).abs(); at = (coords[0], coords[1]); }
        }
        println!("box x±{xm} y[{ym_lo},{ym_hi}]: sup={sup:.4} at {at:?}");
        let corner = spec.flatten(&[((2.8+xm)/(2.0*xm)*((n-1) as f64)) as usize, ((-0.8-ym_lo)/(ym_hi-ym_lo)*((n-1) as f64)) as usize]);
        println!("  corner node {:?}: biconj {:?} vs persp {:?}", spec.node(corner),
            bi.grid.values[corner],
            report.perspective(&Point::from(spec.node(corner)[0]), &Point::from(spec.node(corner)[1])).unwrap());
    }
}
