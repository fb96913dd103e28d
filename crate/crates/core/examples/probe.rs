use persp::funcs::{FuncHandle, GridSpec, Norm};
use persp::transform::oracle_convergence;

fn main() {
    let specs: Vec<GridSpec> = [101usize, 201, 401, 801]
        .iter().map(|&n| GridSpec::line(-3.0, 3.0, n).unwrap()).collect();
    for (name, f) in [
        ("square/2", FuncHandle::norm_power(1, Norm::Euclidean, 2.0, 1.0, 0.0).unwrap()),
        ("huber(1,2)", FuncHandle::huber(1, Norm::Euclidean, 1.0, 2.0).unwrap()),
        ("abs", FuncHandle::norm_power(1, Norm::Euclidean, 1.0, 1.0, 0.0).unwrap()),
    ] {
        let rep = oracle_convergence(&f, &specs).unwrap();
        println!("{name}: errors {:?} order {:?}", rep.sup_errors, rep.empirical_order);
    }
}
