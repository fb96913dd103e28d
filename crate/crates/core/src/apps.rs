//! Application functionals at desk scale: dynamic-transport integrand
//! surfaces, speed-constrained potentials, concave mobilities, mean scalings
//! and the generalized Fisher functional.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::extreal::{ExtReal, Finite, PosInf};
use crate::funcs::{BelowZero, FuncHandle, GridFunction, GridSpec, Norm, Point};
use crate::perspective::PerspectiveReport;

pub use crate::funcs::{geo_mean, log_mean};

/// Samples of a nonnegative density over a uniform 1D grid.
#[derive(Debug, Clone)]
pub struct DensityPath1D {
    pub spec: GridSpec,
    pub samples: Vec<f64>,
}

impl DensityPath1D {
    pub fn new(spec: GridSpec, samples: Vec<f64>) -> Result<Self> {
        if spec.dim() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: spec.dim(),
            });
        }
        if samples.len() != spec.num_nodes() {
            return Err(Error::InvalidGridSpec(format!(
                "sample count {} does not match node count {}",
                samples.len(),
                spec.num_nodes()
            )));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::NanValue);
        }
        Ok(DensityPath1D { spec, samples })
    }

    pub fn from_fn(lo: f64, hi: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let spec = GridSpec::line(lo, hi, n)?;
        let samples = (0..n).map(|i| f(spec.axis_coord(0, i))).collect();
        DensityPath1D::new(spec, samples)
    }

    pub fn spacing(&self) -> f64 {
        self.spec.spacing(0)
    }
}

/// Perspective surface of the transport integrand: phi = ||x||^p / p with the
/// mobility y^q (extended by -inf below zero). For q <= 1 this is the
/// direct-scaling formula with recession values on the zero level; q = 1 and
/// p = 2 is the classical kinetic-energy quotient.
pub fn transport_integrand_surface(
    p: f64,
    q: f64,
    norm: Norm,
    spec: &GridSpec,
) -> Result<GridFunction> {
    if !(p > 1.0) || !(q > 0.0) {
        return Err(Error::ParameterOutOfRange(format!(
            "need p > 1 and q > 0, got p={p}, q={q}"
        )));
    }
    if spec.dim() < 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: spec.dim(),
        });
    }
    let dx = spec.dim() - 1;
    let phi = FuncHandle::norm_power(dx, norm, p, 1.0, 0.0)?;
    let s = FuncHandle::power_scaling(q, BelowZero::NegInf)?;
    let report = PerspectiveReport::new(&phi, &s, None)?;
    sample_perspective(&report, dx, spec)
}

/// Perspective surface of the speed-constrained potential
/// `||x||^p/p + indicator(a <= ||x|| <= b) + penalty` under the mobility
/// y^q. A strictly positive inner radius makes the conjugate mixed-sign, so
/// the four-case formula drives the values.
pub fn constrained_speed_integrand(
    p: f64,
    q: f64,
    speed_interval: (f64, f64),
    penalty: f64,
    norm: Norm,
    spec: &GridSpec,
) -> Result<GridFunction> {
    let (a, b) = speed_interval;
    if !(p > 1.0) || !(q > 0.0) || !(0.0 < a && a <= b) || !b.is_finite() {
        return Err(Error::ParameterOutOfRange(format!(
            "need p > 1, q > 0, 0 < a <= b finite, got p={p}, q={q}, [{a}, {b}]"
        )));
    }
    if spec.dim() < 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: spec.dim(),
        });
    }
    let dx = spec.dim() - 1;
    let phi = FuncHandle::radial_indicator(dx, norm, a, b, p, 1.0, penalty)?;
    let s = FuncHandle::power_scaling(q, BelowZero::NegInf)?;
    let report = PerspectiveReport::new(&phi, &s, None)?;
    sample_perspective(&report, dx, spec)
}

fn sample_perspective(
    report: &PerspectiveReport,
    dx: usize,
    spec: &GridSpec,
) -> Result<GridFunction> {
    let mut values = Vec::with_capacity(spec.num_nodes());
    let mut coords = vec![0.0; spec.dim()];
    for i in 0..spec.num_nodes() {
        spec.node_into(i, &mut coords);
        let x = Point::new(coords[..dx].to_vec())?;
        let y = Point::new(coords[dx..].to_vec())?;
        values.push(report.perspective(&x, &y)?);
    }
    GridFunction::new(spec.clone(), values)
}

/// The generalized logarithm: (y^(1-gamma) - 1)/(1-gamma) for gamma < 1,
/// ln y at gamma = 1, -inf on the nonpositive axis.
pub fn ln_gamma(y: f64, gamma: f64) -> Result<ExtReal> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::GammaOutOfRange {
            gamma,
            p: f64::INFINITY,
        });
    }
    Ok(if y > 0.0 {
        if gamma == 1.0 {
            Finite(y.ln())
        } else {
            Finite((y.powf(1.0 - gamma) - 1.0) / (1.0 - gamma))
        }
    } else {
        ExtReal::NegInf
    })
}

/// Discretization of the generalized Fisher functional
/// `integral of y |grad ln_gamma y|^p over {y > 0}`, with central-difference
/// gradients on interior nodes, one-sided at the boundary, and trapezoid
/// quadrature. A negative sample makes the value +inf; a zero sample demands
/// a vanishing gradient (|difference quotient| <= spacing) and contributes
/// nothing.
pub fn fisher_functional(
    path: &DensityPath1D,
    gamma: f64,
    p: f64,
    norm: Norm,
) -> Result<ExtReal> {
    if !(p > 1.0) {
        return Err(Error::ParameterOutOfRange(format!("need p > 1, got {p}")));
    }
    if !(gamma > 1.0 / p && gamma <= 1.0) {
        return Err(Error::GammaOutOfRange { gamma, p });
    }
    let h = path.spacing();
    let n = path.samples.len();
    if path.samples.iter().any(|v| *v < 0.0) {
        return Ok(PosInf);
    }
    let grad = |i: usize| -> f64 {
        if i == 0 {
            (path.samples[1] - path.samples[0]) / h
        } else if i + 1 == n {
            (path.samples[n - 1] - path.samples[n - 2]) / h
        } else {
            (path.samples[i + 1] - path.samples[i - 1]) / (2.0 * h)
        }
    };
    let mut acc = 0.0;
    for i in 0..n {
        let y = path.samples[i];
        let g = grad(i).abs();
        let w = if i == 0 || i + 1 == n { 0.5 } else { 1.0 };
        if y == 0.0 {
            // Discrete shadow of the recession constraint: the gradient must
            // vanish where the density does.
            if g > h {
                return Ok(PosInf);
            }
            continue;
        }
        // y * |grad y / y^gamma|^p, with the 1D norm being the absolute
        // value for every supported norm.
        let _ = norm;
        let integrand = y * (g / y.powf(gamma)).powf(p);
        if !integrand.is_finite() {
            return Ok(PosInf);
        }
        acc += w * h * integrand;
    }
    Ok(Finite(acc))
}

/// JSON-facing summary of a Fisher evaluation, with an optional refinement
/// consistency check against a half-spacing path.
#[derive(Debug, Clone, Serialize)]
pub struct FisherReport {
    pub gamma: f64,
    pub p: f64,
    pub h: f64,
    pub value: ExtReal,
    pub refinement_check: Option<f64>,
}

pub fn fisher_report(
    path: &DensityPath1D,
    fine_path: Option<&DensityPath1D>,
    gamma: f64,
    p: f64,
    norm: Norm,
) -> Result<FisherReport> {
    let value = fisher_functional(path, gamma, p, norm)?;
    let refinement_check = match fine_path {
        Some(fine) => {
            let fv = fisher_functional(fine, gamma, p, norm)?;
            match (value, fv) {
                (Finite(a), Finite(b)) => Some((a - b).abs()),
                _ => None,
            }
        }
        None => None,
    };
    Ok(FisherReport {
        gamma,
        p,
        h: path.spacing(),
        value,
        refinement_check,
    })
}

/// The concave density mobility y(1-y)/(alpha(1-y) + beta y) on [0, 1].
pub fn brenier_mobility(alpha: f64, beta: f64) -> Result<FuncHandle> {
    FuncHandle::brenier_mobility(alpha, beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extreal::NegInf;

    #[test]
    fn transport_surface_classical_values() {
        let spec = GridSpec::new(vec![-2.0, -1.0], vec![2.0, 3.0], vec![5, 5]).unwrap();
        let g = transport_integrand_surface(2.0, 1.0, Norm::Euclidean, &spec).unwrap();
        // (x, y) = (1, 2): x^2/(2y) = 0.25.
        let idx = spec.flatten(&[3, 3]);
        assert_eq!(spec.node(idx), vec![1.0, 2.0]);
        assert_eq!(g.values[idx], Finite(0.25));
        // (1, 0): recession of a superlinear potential.
        let idx = spec.flatten(&[3, 1]);
        assert_eq!(spec.node(idx), vec![1.0, 0.0]);
        assert_eq!(g.values[idx], PosInf);
        // (0, 0): zero.
        let idx = spec.flatten(&[2, 1]);
        assert_eq!(g.values[idx], Finite(0.0));
        // y < 0: +inf.
        let idx = spec.flatten(&[2, 0]);
        assert_eq!(g.values[idx], PosInf);
    }

    #[test]
    fn transport_surface_sublinear_mobility() {
        let spec = GridSpec::new(vec![1.0, 4.0], vec![2.0, 5.0], vec![2, 2]).unwrap();
        let g = transport_integrand_surface(2.0, 0.5, Norm::Euclidean, &spec).unwrap();
        // (1, 4): sqrt(4) * (1/2)^2 / 2 = 0.25.
        let v = g.values[spec.flatten(&[0, 0])].as_finite().unwrap();
        assert!((v - 0.25).abs() < 1e-12);
    }

    #[test]
    fn constrained_speed_preperspective_and_domain() {
        let spec = GridSpec::new(vec![-3.0, -0.5], vec![3.0, 3.5], vec![25, 17]).unwrap();
        let g = constrained_speed_integrand(2.0, 0.5, (1.0, 2.0), 0.0, Norm::Euclidean, &spec)
            .unwrap();
        // All perspective values at y < 0 are +inf.
        for i in 0..spec.counts[0] {
            let idx = spec.flatten(&[i, 0]);
            assert_eq!(g.values[idx], PosInf);
        }
        // The surface stays below the preperspective where the latter is
        // finite: spot value at (x, y) = (1, 1): preperspective 0.5.
        let phi = FuncHandle::radial_indicator(1, Norm::Euclidean, 1.0, 2.0, 2.0, 1.0, 0.0)
            .unwrap();
        let s = FuncHandle::power_scaling(0.5, BelowZero::NegInf).unwrap();
        let pre = crate::perspective::preperspective_eval(
            &phi,
            &s,
            &Point::from(1.0),
            &Point::from(1.0),
        )
        .unwrap();
        assert_eq!(pre, Finite(0.5));
        let idx = spec.flatten(&[16, 6]);
        assert_eq!(spec.node(idx), vec![1.0, 1.0]);
        assert!(g.values[idx] <= pre);
    }

    #[test]
    fn ln_gamma_cases() {
        assert_eq!(ln_gamma(1.0, 1.0).unwrap(), Finite(0.0));
        assert_eq!(ln_gamma(-1.0, 0.7).unwrap(), NegInf);
        let v = ln_gamma(4.0, 0.5).unwrap().as_finite().unwrap();
        assert!((v - 2.0).abs() < 1e-12, "(4^0.5 - 1)/0.5 = 2");
        assert!(ln_gamma(1.0, 1.5).is_err());
    }

    #[test]
    fn fisher_constant_density_is_zero() {
        let path = DensityPath1D::from_fn(0.0, 1.0, 65, |_| 3.0).unwrap();
        let v = fisher_functional(&path, 1.0, 2.0, Norm::Euclidean).unwrap();
        assert_eq!(v, Finite(0.0));
    }

    #[test]
    fn fisher_negative_sample_is_plus_inf() {
        let mut path = DensityPath1D::from_fn(0.0, 1.0, 65, |_| 1.0).unwrap();
        path.samples[10] = -0.1;
        let v = fisher_functional(&path, 1.0, 2.0, Norm::Euclidean).unwrap();
        assert_eq!(v, PosInf);
    }

    #[test]
    fn fisher_zero_node_needs_flat_gradient() {
        // Zero plateau: fine. Zero with steep neighbors: +inf.
        let flat = DensityPath1D::from_fn(0.0, 1.0, 65, |x| if x < 0.5 { 0.0 } else { 0.0 })
            .unwrap();
        assert_eq!(
            fisher_functional(&flat, 1.0, 2.0, Norm::Euclidean).unwrap(),
            Finite(0.0)
        );
        // A zero node with an asymmetric neighborhood has a nonvanishing
        // difference quotient there: the recession constraint bites.
        let mut spiky = DensityPath1D::from_fn(0.0, 1.0, 65, |_| 1.0).unwrap();
        spiky.samples[31] = 0.5;
        spiky.samples[32] = 0.0;
        spiky.samples[33] = 1.5;
        assert_eq!(
            fisher_functional(&spiky, 1.0, 2.0, Norm::Euclidean).unwrap(),
            PosInf
        );
    }

    #[test]
    fn fisher_gamma_range_is_enforced() {
        let path = DensityPath1D::from_fn(0.0, 1.0, 17, |_| 1.0).unwrap();
        assert!(matches!(
            fisher_functional(&path, 0.4, 2.0, Norm::Euclidean),
            Err(Error::GammaOutOfRange { .. })
        ));
        assert!(fisher_functional(&path, 0.6, 2.0, Norm::Euclidean).is_ok());
    }

    #[test]
    fn mobility_values() {
        let m = brenier_mobility(1.0, 1.0).unwrap();
        assert_eq!(m.eval(&Point::from(0.0)).unwrap(), Finite(0.0));
        assert_eq!(m.eval(&Point::from(1.0)).unwrap(), Finite(0.0));
        assert_eq!(m.eval(&Point::from(0.5)).unwrap(), Finite(0.25));
        assert_eq!(m.eval(&Point::from(-0.2)).unwrap(), NegInf);
    }

    #[test]
    fn mean_scalings_sit_between_min_and_max() {
        for (a, b) in [(0.5, 2.0), (1.0, 1.0), (0.1, 9.0), (3.0, 0.2)] {
            for m in [log_mean(a, b), geo_mean(a, b)] {
                let v = m.as_finite().unwrap();
                assert!(v >= a.min(b) - 1e-12 && v <= a.max(b) + 1e-12);
            }
            assert_eq!(log_mean(a, b), log_mean(b, a));
            assert_eq!(geo_mean(a, b), geo_mean(b, a));
        }
    }
}
