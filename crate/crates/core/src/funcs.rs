//! Function handles: analytic families with exact closed forms, plus
//! grid-backed and opaque evaluators.
//!
//! A [`FuncHandle`] is an evaluable extended-real function on R^d (d <= 3)
//! carrying structural metadata (convex / lsc / proper tri-states and a family
//! tag). Analytic families know their own conjugates, recession functions and
//! gradients where closed forms exist; everything else falls back to the grid
//! oracle in [`crate::transform`].

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extreal::{ExtReal, Finite, NegInf, PosInf};

/// A point of R^d with finite coordinates, d in {1, 2, 3}.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() || coords.len() > 3 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: coords.len(),
            });
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NanValue);
        }
        Ok(Point { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coords
    }
}

impl From<f64> for Point {
    fn from(v: f64) -> Self {
        Point { coords: vec![v] }
    }
}

impl From<[f64; 2]> for Point {
    fn from(v: [f64; 2]) -> Self {
        Point { coords: v.to_vec() }
    }
}

impl From<[f64; 3]> for Point {
    fn from(v: [f64; 3]) -> Self {
        Point { coords: v.to_vec() }
    }
}

/// Tri-state structural flag. `Unknown` is never treated as `True`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TriState {
    True,
    False,
    Unknown,
}

impl TriState {
    pub fn is_true(self) -> bool {
        self == TriState::True
    }
}

/// Structural metadata attached to a handle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub is_convex: TriState,
    pub is_lsc: TriState,
    pub is_proper: TriState,
}

impl Meta {
    pub fn unknown() -> Self {
        Meta {
            is_convex: TriState::Unknown,
            is_lsc: TriState::Unknown,
            is_proper: TriState::Unknown,
        }
    }

    pub fn gamma0() -> Self {
        Meta {
            is_convex: TriState::True,
            is_lsc: TriState::True,
            is_proper: TriState::True,
        }
    }

    /// All three flags certified true: the closed-form envelope and
    /// perspective routes are only valid under this certificate.
    pub fn certified_gamma0(&self) -> bool {
        self.is_convex.is_true() && self.is_lsc.is_true() && self.is_proper.is_true()
    }
}

/// Norms with closed-form dual pairs: euclidean <-> euclidean, one <-> sup.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Norm {
    Euclidean,
    Sup,
    One,
}

impl Norm {
    pub fn eval(self, x: &[f64]) -> f64 {
        match self {
            Norm::Euclidean => {
                if x.len() == 1 {
                    x[0].abs()
                } else {
                    x.iter().map(|c| c * c).sum::<f64>().sqrt()
                }
            }
            Norm::Sup => x.iter().fold(0.0_f64, |m, c| m.max(c.abs())),
            Norm::One => x.iter().map(|c| c.abs()).sum(),
        }
    }

    pub fn dual(self) -> Norm {
        match self {
            Norm::Euclidean => Norm::Euclidean,
            Norm::Sup => Norm::One,
            Norm::One => Norm::Sup,
        }
    }
}

/// `r^p` with bitwise-stable special cases shared by every family, so that
/// algebraically identical formulas in different families evaluate to
/// identical floats.
#[inline]
pub fn pow_p(r: f64, p: f64) -> f64 {
    if p == 1.0 {
        r
    } else if p == 2.0 {
        r * r
    } else {
        r.powf(p)
    }
}

/// Holder exponent p* = p/(p-1).
#[inline]
pub fn conjugate_exponent(p: f64) -> f64 {
    p / (p - 1.0)
}

/// Convention for power scalings below zero: the two variants the scaling
/// formulas use are +inf (hard constraint) and -inf (concave extension).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BelowZero {
    PosInf,
    NegInf,
}

/// Analytic family tag. Parameter invariants are enforced by the
/// [`FuncHandle`] constructors.
#[derive(Clone)]
pub enum AnalyticFamily {
    /// x |-> mult * ||x||^p / p + shift, p >= 1 (p = 1 is the plain norm).
    NormPowerShifted {
        norm: Norm,
        p: f64,
        mult: f64,
        shift: f64,
    },
    /// x |-> base(x) + indicator of { lo <= ||x|| <= hi }. The base is a
    /// norm power (possibly the zero function via base_mult = 0).
    RadialIndicator {
        norm: Norm,
        lo: f64,
        hi: f64,
        base_p: f64,
        base_mult: f64,
        base_shift: f64,
    },
    /// The pth order Huber function with parameter alpha.
    Huber { norm: Norm, alpha: f64, p: f64 },
    /// The pth order Berhu (reversed Huber) function.
    Berhu { norm: Norm, alpha: f64, p: f64 },
    /// y |-> <slope, y> + intercept.
    Affine { slope: Vec<f64>, intercept: f64 },
    /// y |-> y^q on y >= 0 (q > 0); the value below zero is data.
    PowerScaling { q: f64, below: BelowZero },
    /// The piecewise scaling with quadratic well of width beta in [0, 1):
    /// y - (beta^2+1)/2 for y > 1, (y^2 - beta^2)/2 for -1 <= y <= 1,
    /// +inf for y < -1.
    ClippedQuadraticScaling { beta: f64 },
    /// y |-> max{0, y}.
    MaxZeroAffine,
    /// (y1, y2) |-> logarithmic mean on the closed positive quadrant,
    /// -inf outside.
    LogMeanScaling,
    /// (y1, y2) |-> sqrt(y1 y2) on the closed positive quadrant, -inf outside.
    GeoMeanScaling,
    /// y |-> y(1-y) / (alpha(1-y) + beta y) on [0, 1], -inf outside: the
    /// concave mobility weighting transport cost by density.
    BrenierMobility { alpha: f64, beta: f64 },
    /// x |-> max{inner(x), 0}; positive part of an analytic family.
    MaxWithZero { inner: Box<AnalyticFamily> },
    /// Multilinear interpolation of grid samples.
    GridBacked { grid: Arc<GridFunction> },
    /// User evaluator; no analytic structure.
    Opaque {
        label: String,
        f: Arc<dyn Fn(&[f64]) -> ExtReal + Send + Sync>,
    },
}

impl fmt::Debug for AnalyticFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalyticFamily::NormPowerShifted {
                norm,
                p,
                mult,
                shift,
            } => write!(f, "NormPowerShifted({norm:?}, p={p}, mult={mult}, shift={shift})"),
            AnalyticFamily::RadialIndicator {
                norm,
                lo,
                hi,
                base_p,
                base_mult,
                base_shift,
            } => write!(
                f,
                "RadialIndicator({norm:?}, [{lo}, {hi}], base: p={base_p}, mult={base_mult}, shift={base_shift})"
            ),
            AnalyticFamily::Huber { norm, alpha, p } => {
                write!(f, "Huber({norm:?}, alpha={alpha}, p={p})")
            }
            AnalyticFamily::Berhu { norm, alpha, p } => {
                write!(f, "Berhu({norm:?}, alpha={alpha}, p={p})")
            }
            AnalyticFamily::Affine { slope, intercept } => {
                write!(f, "Affine({slope:?}, {intercept})")
            }
            AnalyticFamily::PowerScaling { q, below } => {
                write!(f, "PowerScaling(q={q}, below={below:?})")
            }
            AnalyticFamily::ClippedQuadraticScaling { beta } => {
                write!(f, "ClippedQuadraticScaling(beta={beta})")
            }
            AnalyticFamily::MaxZeroAffine => write!(f, "MaxZeroAffine"),
            AnalyticFamily::LogMeanScaling => write!(f, "LogMeanScaling"),
            AnalyticFamily::GeoMeanScaling => write!(f, "GeoMeanScaling"),
            AnalyticFamily::BrenierMobility { alpha, beta } => {
                write!(f, "BrenierMobility(alpha={alpha}, beta={beta})")
            }
            AnalyticFamily::MaxWithZero { inner } => write!(f, "MaxWithZero({inner:?})"),
            AnalyticFamily::GridBacked { grid } => {
                write!(f, "GridBacked({} nodes)", grid.values.len())
            }
            AnalyticFamily::Opaque { label, .. } => write!(f, "Opaque({label})"),
        }
    }
}

/// An evaluable extended-real function on R^d with structural metadata.
#[derive(Debug, Clone)]
pub struct FuncHandle {
    dim: usize,
    pub meta: Meta,
    pub family: AnalyticFamily,
}

impl FuncHandle {
    pub fn dim(&self) -> usize {
        self.dim
    }

    // ---- constructors -----------------------------------------------------

    pub fn norm_power(dim: usize, norm: Norm, p: f64, mult: f64, shift: f64) -> Result<Self> {
        check_dim(dim)?;
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::ParameterOutOfRange(format!("p must be >= 1, got {p}")));
        }
        if !(mult >= 0.0) || !mult.is_finite() || !shift.is_finite() {
            return Err(Error::ParameterOutOfRange(format!(
                "mult must be >= 0 finite and shift finite, got mult={mult}, shift={shift}"
            )));
        }
        Ok(FuncHandle {
            dim,
            meta: Meta::gamma0(),
            family: AnalyticFamily::NormPowerShifted {
                norm,
                p,
                mult,
                shift,
            },
        })
    }

    pub fn constant(dim: usize, c: f64) -> Result<Self> {
        Self::norm_power(dim, Norm::Euclidean, 2.0, 0.0, c)
    }

    pub fn huber(dim: usize, norm: Norm, alpha: f64, p: f64) -> Result<Self> {
        check_dim(dim)?;
        check_huber_params(alpha, p)?;
        Ok(FuncHandle {
            dim,
            meta: Meta::gamma0(),
            family: AnalyticFamily::Huber { norm, alpha, p },
        })
    }

    pub fn berhu(dim: usize, norm: Norm, alpha: f64, p: f64) -> Result<Self> {
        check_dim(dim)?;
        check_huber_params(alpha, p)?;
        Ok(FuncHandle {
            dim,
            meta: Meta::gamma0(),
            family: AnalyticFamily::Berhu { norm, alpha, p },
        })
    }

    pub fn affine(slope: Vec<f64>, intercept: f64) -> Result<Self> {
        let dim = slope.len();
        check_dim(dim)?;
        if slope.iter().any(|c| !c.is_finite()) || !intercept.is_finite() {
            return Err(Error::ParameterOutOfRange("affine coefficients must be finite".into()));
        }
        Ok(FuncHandle {
            dim,
            meta: Meta::gamma0(),
            family: AnalyticFamily::Affine { slope, intercept },
        })
    }

    pub fn radial_indicator(
        dim: usize,
        norm: Norm,
        lo: f64,
        hi: f64,
        base_p: f64,
        base_mult: f64,
        base_shift: f64,
    ) -> Result<Self> {
        check_dim(dim)?;
        if !(0.0 <= lo && lo <= hi) || !lo.is_finite() {
            return Err(Error::ParameterOutOfRange(format!(
                "radial interval must satisfy 0 <= lo <= hi, got [{lo}, {hi}]"
            )));
        }
        if !(base_p >= 1.0) || !(base_mult >= 0.0) || !base_shift.is_finite() {
            return Err(Error::ParameterOutOfRange("bad radial indicator base".into()));
        }
        // The annulus { lo <= ||x|| <= hi } is convex only when lo = 0.
        let convex = if lo == 0.0 { TriState::True } else { TriState::False };
        Ok(FuncHandle {
            dim,
            meta: Meta {
                is_convex: convex,
                is_lsc: TriState::True,
                is_proper: TriState::True,
            },
            family: AnalyticFamily::RadialIndicator {
                norm,
                lo,
                hi,
                base_p,
                base_mult,
                base_shift,
            },
        })
    }

    pub fn power_scaling(q: f64, below: BelowZero) -> Result<Self> {
        if !(q > 0.0) || !q.is_finite() {
            return Err(Error::ParameterOutOfRange(format!("q must be > 0, got {q}")));
        }
        let meta = match below {
            BelowZero::PosInf => Meta {
                is_convex: if q >= 1.0 { TriState::True } else { TriState::False },
                is_lsc: TriState::True,
                is_proper: TriState::True,
            },
            BelowZero::NegInf => Meta {
                is_convex: TriState::False,
                is_lsc: TriState::False,
                is_proper: TriState::False,
            },
        };
        Ok(FuncHandle {
            dim: 1,
            meta,
            family: AnalyticFamily::PowerScaling { q, below },
        })
    }

    pub fn clipped_quadratic(beta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&beta) {
            return Err(Error::ParameterOutOfRange(format!(
                "beta must lie in [0, 1), got {beta}"
            )));
        }
        Ok(FuncHandle {
            dim: 1,
            meta: Meta::gamma0(),
            family: AnalyticFamily::ClippedQuadraticScaling { beta },
        })
    }

    pub fn max_zero_affine() -> Self {
        FuncHandle {
            dim: 1,
            meta: Meta::gamma0(),
            family: AnalyticFamily::MaxZeroAffine,
        }
    }

    pub fn log_mean() -> Self {
        FuncHandle {
            dim: 2,
            meta: Meta {
                is_convex: TriState::False,
                is_lsc: TriState::False,
                is_proper: TriState::False,
            },
            family: AnalyticFamily::LogMeanScaling,
        }
    }

    pub fn geo_mean() -> Self {
        FuncHandle {
            dim: 2,
            meta: Meta {
                is_convex: TriState::False,
                is_lsc: TriState::False,
                is_proper: TriState::False,
            },
            family: AnalyticFamily::GeoMeanScaling,
        }
    }

    pub fn brenier_mobility(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0) || !(beta > 0.0) || !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::ParameterOutOfRange(format!(
                "mobility parameters must be finite and > 0, got alpha={alpha}, beta={beta}"
            )));
        }
        Ok(FuncHandle {
            dim: 1,
            meta: Meta {
                is_convex: TriState::False,
                is_lsc: TriState::False,
                is_proper: TriState::False,
            },
            family: AnalyticFamily::BrenierMobility { alpha, beta },
        })
    }

    pub fn max_with_zero(inner: FuncHandle) -> Self {
        let meta = Meta {
            is_convex: inner.meta.is_convex,
            is_lsc: inner.meta.is_lsc,
            is_proper: TriState::True,
        };
        FuncHandle {
            dim: inner.dim,
            meta,
            family: AnalyticFamily::MaxWithZero {
                inner: Box::new(inner.family),
            },
        }
    }

    pub fn grid_backed(grid: Arc<GridFunction>, meta: Meta) -> Self {
        FuncHandle {
            dim: grid.spec.dim(),
            meta,
            family: AnalyticFamily::GridBacked { grid },
        }
    }

    pub fn opaque<F>(dim: usize, meta: Meta, label: impl Into<String>, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> ExtReal + Send + Sync + 'static,
    {
        check_dim(dim)?;
        Ok(FuncHandle {
            dim,
            meta,
            family: AnalyticFamily::Opaque {
                label: label.into(),
                f: Arc::new(f),
            },
        })
    }

    // ---- evaluation -------------------------------------------------------

    /// Evaluates the function. The only error is a dimension mismatch; the
    /// value itself is total (never NaN).
    pub fn eval(&self, x: &Point) -> Result<ExtReal> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.dim(),
            });
        }
        Ok(self.eval_slice(x.as_slice()))
    }

    /// Evaluation on a raw coordinate slice; the caller guarantees the length.
    pub fn eval_slice(&self, x: &[f64]) -> ExtReal {
        eval_family(&self.family, x)
    }

    /// Pointwise samples over a grid.
    pub fn sample(&self, spec: &GridSpec) -> Result<GridFunction> {
        if spec.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: spec.dim(),
            });
        }
        let mut values = Vec::with_capacity(spec.num_nodes());
        let mut coords = vec![0.0; spec.dim()];
        for i in 0..spec.num_nodes() {
            spec.node_into(i, &mut coords);
            values.push(self.eval_slice(&coords));
        }
        Ok(GridFunction {
            spec: spec.clone(),
            values,
        })
    }

    // ---- analytic structure ----------------------------------------------

    /// Exact conjugate for families that store one; `None` otherwise.
    pub fn conjugate_analytic(&self) -> Option<FuncHandle> {
        conjugate_family(&self.family, self.dim)
    }

    /// Recession function of the lsc convex hull, where a closed form exists.
    pub fn recession_analytic(&self) -> Option<FuncHandle> {
        recession_family(&self.family, self.dim)
    }

    /// Gradient at a smooth point of the family, where one is exposed.
    pub fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        gradient_family(&self.family, x)
    }

    /// Infimum of the function where derivable from the family.
    pub fn analytic_infimum(&self) -> Option<ExtReal> {
        infimum_family(&self.family)
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if (1..=3).contains(&dim) {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: 3,
            got: dim,
        })
    }
}

fn check_huber_params(alpha: f64, p: f64) -> Result<()> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::ParameterOutOfRange(format!("alpha must be > 0, got {alpha}")));
    }
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::ParameterOutOfRange(format!("p must be > 1, got {p}")));
    }
    Ok(())
}

// ---- family evaluation ----------------------------------------------------

fn eval_family(family: &AnalyticFamily, x: &[f64]) -> ExtReal {
    match family {
        AnalyticFamily::NormPowerShifted {
            norm,
            p,
            mult,
            shift,
        } => {
            let r = norm.eval(x);
            Finite(*mult * pow_p(r, *p) / *p + *shift)
        }
        AnalyticFamily::RadialIndicator {
            norm,
            lo,
            hi,
            base_p,
            base_mult,
            base_shift,
        } => {
            let r = norm.eval(x);
            if r < *lo || r > *hi {
                PosInf
            } else {
                Finite(*base_mult * pow_p(r, *base_p) / *base_p + *base_shift)
            }
        }
        AnalyticFamily::Huber { norm, alpha, p } => {
            let r = norm.eval(x);
            let knot = alpha.powf(1.0 / (p - 1.0));
            if r > knot {
                Finite(*alpha * r)
            } else {
                let ps = conjugate_exponent(*p);
                Finite(pow_p(r, *p) / *p + pow_p(*alpha, ps) / ps)
            }
        }
        AnalyticFamily::Berhu { norm, alpha, p } => {
            let r = norm.eval(x);
            let knot = alpha.powf(1.0 / (p - 1.0));
            if r > knot {
                let ps = conjugate_exponent(*p);
                Finite(pow_p(r, *p) / *p + pow_p(*alpha, ps) / ps)
            } else {
                Finite(*alpha * r)
            }
        }
        AnalyticFamily::Affine { slope, intercept } => {
            Finite(dot(slope, x) + intercept)
        }
        AnalyticFamily::PowerScaling { q, below } => {
            let y = x[0];
            if y >= 0.0 {
                Finite(pow_q(y, *q))
            } else {
                match below {
                    BelowZero::PosInf => PosInf,
                    BelowZero::NegInf => NegInf,
                }
            }
        }
        AnalyticFamily::ClippedQuadraticScaling { beta } => {
            let y = x[0];
            if y > 1.0 {
                Finite(y - (beta * beta + 1.0) / 2.0)
            } else if y >= -1.0 {
                Finite((y * y - beta * beta) / 2.0)
            } else {
                PosInf
            }
        }
        AnalyticFamily::MaxZeroAffine => Finite(x[0].max(0.0)),
        AnalyticFamily::LogMeanScaling => log_mean(x[0], x[1]),
        AnalyticFamily::GeoMeanScaling => geo_mean(x[0], x[1]),
        AnalyticFamily::BrenierMobility { alpha, beta } => {
            let y = x[0];
            if (0.0..=1.0).contains(&y) {
                Finite(y * (1.0 - y) / (alpha * (1.0 - y) + beta * y))
            } else {
                NegInf
            }
        }
        AnalyticFamily::MaxWithZero { inner } => {
            match eval_family(inner, x) {
                PosInf => PosInf,
                NegInf => Finite(0.0),
                Finite(v) => Finite(v.max(0.0)),
            }
        }
        AnalyticFamily::GridBacked { grid } => grid.interpolate(x),
        AnalyticFamily::Opaque { f, .. } => f(x),
    }
}

/// y^q for y >= 0 with stable integer cases.
#[inline]
fn pow_q(y: f64, q: f64) -> f64 {
    if q == 1.0 {
        y
    } else if q == 2.0 {
        y * y
    } else if q == 0.5 {
        y.sqrt()
    } else {
        y.powf(q)
    }
}

/// The logarithmic mean with its diagonal and zero-edge cases.
pub fn log_mean(y1: f64, y2: f64) -> ExtReal {
    if (y1 == 0.0 && y2 >= 0.0) || (y1 > 0.0 && y2 == 0.0) {
        Finite(0.0)
    } else if y1 > 0.0 && y2 > 0.0 {
        // Removable singularity on the diagonal.
        if (y1 - y2).abs() < 1e-12 * y1.abs().max(y2.abs()) {
            Finite(y1)
        } else {
            Finite((y2 - y1) / (y2.ln() - y1.ln()))
        }
    } else {
        NegInf
    }
}

/// The geometric mean, -inf off the closed positive quadrant.
pub fn geo_mean(y1: f64, y2: f64) -> ExtReal {
    if y1 >= 0.0 && y2 >= 0.0 {
        Finite((y1 * y2).sqrt())
    } else {
        NegInf
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

// ---- conjugates -----------------------------------------------------------

fn conjugate_family(family: &AnalyticFamily, dim: usize) -> Option<FuncHandle> {
    match family {
        AnalyticFamily::NormPowerShifted {
            norm,
            p,
            mult,
            shift,
        } => {
            if *mult == 0.0 {
                // Constant shift: conjugate is the indicator of {0} minus shift.
                return Some(
                    FuncHandle::radial_indicator(dim, norm.dual(), 0.0, 0.0, 2.0, 0.0, -shift)
                        .unwrap(),
                );
            }
            if *p == 1.0 {
                // mult * ||.|| + shift: conjugate is the dual-norm ball
                // indicator of radius mult, minus shift.
                return Some(
                    FuncHandle::radial_indicator(dim, norm.dual(), 0.0, *mult, 2.0, 0.0, -shift)
                        .unwrap(),
                );
            }
            let ps = conjugate_exponent(*p);
            let dual_mult = mult.powf(1.0 - ps);
            Some(FuncHandle::norm_power(dim, norm.dual(), ps, dual_mult, -shift).unwrap())
        }
        AnalyticFamily::Huber { norm, alpha, p } => {
            // Conjugate of the pth order Huber: the shifted dual norm power
            // restricted to the dual ball of radius alpha.
            let ps = conjugate_exponent(*p);
            let c = pow_p(*alpha, ps) / ps;
            Some(
                FuncHandle::radial_indicator(dim, norm.dual(), 0.0, *alpha, ps, 1.0, -c).unwrap(),
            )
        }
        AnalyticFamily::Berhu { norm, alpha, p } => {
            // Conjugate of the pth order Berhu: the positive part of the
            // shifted dual norm power.
            let ps = conjugate_exponent(*p);
            let c = pow_p(*alpha, ps) / ps;
            let inner = FuncHandle::norm_power(dim, norm.dual(), ps, 1.0, -c).unwrap();
            Some(FuncHandle::max_with_zero(inner))
        }
        AnalyticFamily::Affine { slope, intercept } => {
            let w = slope.clone();
            let b = *intercept;
            let meta = Meta::gamma0();
            Some(
                FuncHandle::opaque(dim, meta, "point-indicator", move |xi| {
                    if xi.iter().zip(&w).all(|(a, b)| a == b) {
                        Finite(-b)
                    } else {
                        PosInf
                    }
                })
                .unwrap(),
            )
        }
        AnalyticFamily::RadialIndicator {
            norm,
            lo,
            hi,
            base_p,
            base_mult,
            base_shift,
        } => {
            // sup over lo <= r <= hi of r * ||xi||_dual - base(r); the
            // objective is concave in r, maximized at the clamped critical
            // radius. Exact for every dimension because the norm pairing
            // attains r * ||xi||_dual on each sphere.
            let (norm, lo, hi, bp, bm, bs) = (*norm, *lo, *hi, *base_p, *base_mult, *base_shift);
            let dual = norm.dual();
            Some(
                FuncHandle::opaque(dim, Meta::gamma0(), "radial-indicator-conjugate", move |xi| {
                    let c = dual.eval(xi);
                    let r = critical_radius(c, bp, bm, lo, hi);
                    if !r.is_finite() {
                        return PosInf;
                    }
                    Finite(c * r - (bm * pow_p(r, bp) / bp + bs))
                })
                .unwrap(),
            )
        }
        AnalyticFamily::MaxWithZero { inner } => {
            // Only the Berhu pattern is reconstructed: max{||.||^p/p - c, 0}
            // with c > 0 conjugates back to the Berhu function.
            if let AnalyticFamily::NormPowerShifted {
                norm,
                p,
                mult,
                shift,
            } = inner.as_ref()
            {
                if *shift < 0.0 && *mult == 1.0 && *p > 1.0 {
                    let ps = conjugate_exponent(*p);
                    // shift = -alpha^p/p in this parameterization.
                    let alpha = (-shift * *p).powf(1.0 / *p);
                    return Some(FuncHandle::berhu(dim, norm.dual(), alpha, ps).unwrap());
                }
            }
            None
        }
        _ => None,
    }
}

/// argmax over [lo, hi] of r |-> c*r - bm*r^bp/bp (c >= 0). Returns +inf when
/// the sup diverges (hi = +inf with unbounded gain).
fn critical_radius(c: f64, bp: f64, bm: f64, lo: f64, hi: f64) -> f64 {
    if bm == 0.0 || bp == 1.0 {
        // Linear objective: endpoint by slope sign.
        let slope = c - if bp == 1.0 { bm } else { 0.0 };
        return if slope > 0.0 { hi } else { lo };
    }
    // Strictly concave: critical point (c/bm)^(1/(bp-1)).
    let r = (c / bm).powf(1.0 / (bp - 1.0));
    r.clamp(lo, hi)
}

// ---- recession functions ----------------------------------------------------

fn recession_family(family: &AnalyticFamily, dim: usize) -> Option<FuncHandle> {
    match family {
        AnalyticFamily::NormPowerShifted { norm, p, mult, .. } => {
            if *mult == 0.0 {
                Some(FuncHandle::constant(dim, 0.0).unwrap())
            } else if *p == 1.0 {
                Some(FuncHandle::norm_power(dim, *norm, 1.0, *mult, 0.0).unwrap())
            } else {
                Some(indicator_origin(dim))
            }
        }
        AnalyticFamily::Huber { norm, alpha, .. } => {
            Some(FuncHandle::norm_power(dim, *norm, 1.0, *alpha, 0.0).unwrap())
        }
        AnalyticFamily::Berhu { .. } => Some(indicator_origin(dim)),
        AnalyticFamily::Affine { slope, .. } => {
            Some(FuncHandle::affine(slope.clone(), 0.0).unwrap())
        }
        AnalyticFamily::RadialIndicator {
            norm,
            hi,
            base_p,
            base_mult,
            ..
        } => {
            // Recession of the lsc convex hull.
            if hi.is_finite() {
                Some(indicator_origin(dim))
            } else if *base_mult > 0.0 && *base_p > 1.0 {
                Some(indicator_origin(dim))
            } else {
                Some(FuncHandle::norm_power(dim, *norm, 1.0, *base_mult, 0.0).unwrap())
            }
        }
        AnalyticFamily::MaxWithZero { inner } => {
            let rec_inner = recession_family(inner, dim)?;
            Some(FuncHandle::max_with_zero(rec_inner))
        }
        AnalyticFamily::PowerScaling { q, below } => {
            if *below == BelowZero::NegInf {
                return None;
            }
            if *q > 1.0 {
                Some(indicator_origin(1))
            } else if *q == 1.0 {
                Some(half_line_identity())
            } else {
                None
            }
        }
        AnalyticFamily::ClippedQuadraticScaling { .. } => Some(half_line_identity()),
        AnalyticFamily::MaxZeroAffine => Some(FuncHandle::max_zero_affine()),
        _ => None,
    }
}

/// Indicator of {0}: 0 at the origin, +inf elsewhere.
pub fn indicator_origin(dim: usize) -> FuncHandle {
    FuncHandle::radial_indicator(dim, Norm::Euclidean, 0.0, 0.0, 2.0, 0.0, 0.0).unwrap()
}

/// y + indicator of { y >= 0 }.
fn half_line_identity() -> FuncHandle {
    FuncHandle::opaque(1, Meta::gamma0(), "identity-on-halfline", |x| {
        if x[0] >= 0.0 {
            Finite(x[0])
        } else {
            PosInf
        }
    })
    .unwrap()
}

// ---- gradients --------------------------------------------------------------

fn gradient_family(family: &AnalyticFamily, x: &[f64]) -> Option<Vec<f64>> {
    match family {
        AnalyticFamily::NormPowerShifted {
            norm: Norm::Euclidean,
            p,
            mult,
            ..
        } => {
            let r = Norm::Euclidean.eval(x);
            if *p == 1.0 || (r == 0.0 && *p < 2.0) {
                if r == 0.0 {
                    return None;
                }
                return Some(x.iter().map(|c| mult * c / r).collect());
            }
            if r == 0.0 {
                return Some(vec![0.0; x.len()]);
            }
            let factor = mult * pow_p(r, *p - 2.0);
            Some(x.iter().map(|c| factor * c).collect())
        }
        AnalyticFamily::Huber {
            norm: Norm::Euclidean,
            alpha,
            p,
        } => {
            let r = Norm::Euclidean.eval(x);
            let knot = alpha.powf(1.0 / (p - 1.0));
            if r > knot {
                Some(x.iter().map(|c| alpha * c / r).collect())
            } else if r == 0.0 {
                if *p >= 2.0 {
                    Some(vec![0.0; x.len()])
                } else {
                    None
                }
            } else {
                let factor = pow_p(r, *p - 2.0);
                Some(x.iter().map(|c| factor * c).collect())
            }
        }
        AnalyticFamily::Berhu {
            norm: Norm::Euclidean,
            alpha,
            p,
        } => {
            let r = Norm::Euclidean.eval(x);
            let knot = alpha.powf(1.0 / (p - 1.0));
            if r == 0.0 {
                None
            } else if r > knot {
                let factor = pow_p(r, *p - 2.0);
                Some(x.iter().map(|c| factor * c).collect())
            } else {
                Some(x.iter().map(|c| alpha * c / r).collect())
            }
        }
        AnalyticFamily::Affine { slope, .. } => Some(slope.clone()),
        _ => None,
    }
}

// ---- infima -----------------------------------------------------------------

fn infimum_family(family: &AnalyticFamily) -> Option<ExtReal> {
    match family {
        AnalyticFamily::NormPowerShifted { shift, .. } => Some(Finite(*shift)),
        AnalyticFamily::RadialIndicator {
            lo,
            base_p,
            base_mult,
            base_shift,
            ..
        } => Some(Finite(base_mult * pow_p(*lo, *base_p) / base_p + base_shift)),
        AnalyticFamily::Huber { alpha, p, .. } => {
            let ps = conjugate_exponent(*p);
            Some(Finite(pow_p(*alpha, ps) / ps))
        }
        AnalyticFamily::Berhu { .. } => Some(Finite(0.0)),
        AnalyticFamily::Affine { slope, intercept } => {
            if slope.iter().all(|c| *c == 0.0) {
                Some(Finite(*intercept))
            } else {
                Some(NegInf)
            }
        }
        AnalyticFamily::PowerScaling { below, .. } => match below {
            BelowZero::PosInf => Some(Finite(0.0)),
            BelowZero::NegInf => Some(NegInf),
        },
        AnalyticFamily::ClippedQuadraticScaling { beta } => {
            Some(Finite(-(beta * beta) / 2.0))
        }
        AnalyticFamily::MaxZeroAffine => Some(Finite(0.0)),
        AnalyticFamily::BrenierMobility { .. } => Some(NegInf),
        AnalyticFamily::MaxWithZero { inner } => {
            let inner_inf = infimum_family(inner)?;
            Some(inner_inf.max(Finite(0.0)))
        }
        _ => None,
    }
}

// ---- grids ------------------------------------------------------------------

/// A uniform box grid: per-axis bounds and node counts (>= 2 per axis).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub counts: Vec<usize>,
}

impl GridSpec {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, counts: Vec<usize>) -> Result<Self> {
        let d = lower.len();
        if d == 0 || d > 3 || upper.len() != d || counts.len() != d {
            return Err(Error::InvalidGridSpec(format!(
                "inconsistent axis counts: {d}/{}/{}",
                upper.len(),
                counts.len()
            )));
        }
        for i in 0..d {
            if !(lower[i] < upper[i]) || !lower[i].is_finite() || !upper[i].is_finite() {
                return Err(Error::InvalidGridSpec(format!(
                    "axis {i}: need finite lower < upper, got [{}, {}]",
                    lower[i], upper[i]
                )));
            }
            if counts[i] < 2 {
                return Err(Error::InvalidGridSpec(format!(
                    "axis {i}: need at least 2 nodes, got {}",
                    counts[i]
                )));
            }
        }
        Ok(GridSpec {
            lower,
            upper,
            counts,
        })
    }

    pub fn line(lo: f64, hi: f64, n: usize) -> Result<Self> {
        Self::new(vec![lo], vec![hi], vec![n])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn num_nodes(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        (self.upper[axis] - self.lower[axis]) / (self.counts[axis] - 1) as f64
    }

    /// Largest per-axis spacing; the resolution number used in reports.
    pub fn max_spacing(&self) -> f64 {
        (0..self.dim()).map(|a| self.spacing(a)).fold(0.0, f64::max)
    }

    pub fn axis_coord(&self, axis: usize, i: usize) -> f64 {
        if i + 1 == self.counts[axis] {
            self.upper[axis]
        } else {
            self.lower[axis] + i as f64 * self.spacing(axis)
        }
    }

    /// Multi-index of a flat node index (row-major, axis 0 slowest).
    pub fn unflatten(&self, mut idx: usize) -> Vec<usize> {
        let d = self.dim();
        let mut out = vec![0; d];
        for axis in (0..d).rev() {
            out[axis] = idx % self.counts[axis];
            idx /= self.counts[axis];
        }
        out
    }

    pub fn flatten(&self, multi: &[usize]) -> usize {
        let mut idx = 0;
        for (axis, &i) in multi.iter().enumerate() {
            idx = idx * self.counts[axis] + i;
        }
        idx
    }

    pub fn node(&self, idx: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.node_into(idx, &mut out);
        out
    }

    pub fn node_into(&self, idx: usize, out: &mut [f64]) {
        let multi = self.unflatten(idx);
        for (axis, &i) in multi.iter().enumerate() {
            out[axis] = self.axis_coord(axis, i);
        }
    }

    /// Per-axis coordinate tables, the fast path for full-grid sweeps.
    pub fn axis_coords(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|a| (0..self.counts[a]).map(|i| self.axis_coord(a, i)).collect())
            .collect()
    }

    /// Same box, each axis count mapped by `f` (used for refinement sweeps).
    pub fn with_counts(&self, f: impl Fn(usize) -> usize) -> Result<GridSpec> {
        GridSpec::new(
            self.lower.clone(),
            self.upper.clone(),
            self.counts.iter().map(|&c| f(c)).collect(),
        )
    }
}

/// Extended-real samples of a function over a uniform box grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub spec: GridSpec,
    pub values: Vec<ExtReal>,
}

impl GridFunction {
    pub fn new(spec: GridSpec, values: Vec<ExtReal>) -> Result<Self> {
        if values.len() != spec.num_nodes() {
            return Err(Error::InvalidGridSpec(format!(
                "value count {} does not match node count {}",
                values.len(),
                spec.num_nodes()
            )));
        }
        Ok(GridFunction { spec, values })
    }

    pub fn value(&self, idx: usize) -> ExtReal {
        self.values[idx]
    }

    /// Multilinear interpolation; any infinite corner propagates (with +inf
    /// winning over -inf). Queries outside the box return +inf.
    pub fn interpolate(&self, x: &[f64]) -> ExtReal {
        let d = self.spec.dim();
        debug_assert_eq!(x.len(), d);
        let mut base = vec![0usize; d];
        let mut frac = vec![0.0f64; d];
        for a in 0..d {
            let lo = self.spec.lower[a];
            let hi = self.spec.upper[a];
            if x[a] < lo - 1e-12 || x[a] > hi + 1e-12 {
                return PosInf;
            }
            let h = self.spec.spacing(a);
            let t = ((x[a] - lo) / h).clamp(0.0, (self.spec.counts[a] - 1) as f64);
            let i = (t.floor() as usize).min(self.spec.counts[a] - 2);
            base[a] = i;
            frac[a] = t - i as f64;
        }
        let corners = 1usize << d;
        let mut acc = 0.0;
        let mut saw_pos = false;
        let mut saw_neg = false;
        for c in 0..corners {
            let mut idx = 0;
            let mut w = 1.0;
            for a in 0..d {
                let bit = (c >> a) & 1;
                let i = base[a] + bit;
                idx = idx * self.spec.counts[a] + i;
                w *= if bit == 1 { frac[a] } else { 1.0 - frac[a] };
            }
            if w == 0.0 {
                continue;
            }
            match self.values[idx] {
                PosInf => saw_pos = true,
                NegInf => saw_neg = true,
                Finite(v) => acc += w * v,
            }
        }
        if saw_pos {
            PosInf
        } else if saw_neg {
            NegInf
        } else {
            Finite(acc)
        }
    }

    /// CSV rendering: one row per node, "coords..., value".
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let d = self.spec.dim();
        for a in 0..d {
            out.push_str(&format!("x{a},"));
        }
        out.push_str("value\n");
        let mut coords = vec![0.0; d];
        for i in 0..self.spec.num_nodes() {
            self.spec.node_into(i, &mut coords);
            for c in &coords {
                out.push_str(&format!("{c},"));
            }
            out.push_str(&format!("{}\n", self.values[i]));
        }
        out
    }

    /// Per-axis finite-difference slope range over adjacent finite nodes,
    /// restricted to nodes selected by `keep` (by flat index).
    pub fn slope_range(&self, keep: impl Fn(usize, &[f64]) -> bool) -> Vec<Option<(f64, f64)>> {
        let d = self.spec.dim();
        let mut out = vec![None; d];
        let mut coords = vec![0.0; d];
        for idx in 0..self.spec.num_nodes() {
            self.spec.node_into(idx, &mut coords);
            if !keep(idx, &coords) {
                continue;
            }
            let multi = self.spec.unflatten(idx);
            for axis in 0..d {
                if multi[axis] + 1 >= self.spec.counts[axis] {
                    continue;
                }
                let mut next = multi.clone();
                next[axis] += 1;
                let jdx = self.spec.flatten(&next);
                let mut next_coords = coords.clone();
                next_coords[axis] = self.spec.axis_coord(axis, multi[axis] + 1);
                if !keep(jdx, &next_coords) {
                    continue;
                }
                if let (Finite(a), Finite(b)) = (self.values[idx], self.values[jdx]) {
                    let s = (b - a) / self.spec.spacing(axis);
                    let e = out[axis].get_or_insert((s, s));
                    e.0 = e.0.min(s);
                    e.1 = e.1.max(s);
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extreal::Finite;

    fn p(v: f64) -> Point {
        Point::from(v)
    }

    #[test]
    fn huber_branches() {
        let h = FuncHandle::huber(1, Norm::Euclidean, 1.0, 2.0).unwrap();
        assert_eq!(h.eval(&p(2.0)).unwrap(), Finite(2.0));
        assert_eq!(h.eval(&p(0.0)).unwrap(), Finite(0.5));
        // Continuity at the knot alpha^(1/(p-1)) = 1: both branches give 1.
        assert_eq!(h.eval(&p(1.0)).unwrap(), Finite(1.0));
    }

    #[test]
    fn berhu_branches() {
        let b = FuncHandle::berhu(1, Norm::Euclidean, 1.0, 2.0).unwrap();
        assert_eq!(b.eval(&p(0.5)).unwrap(), Finite(0.5));
        assert_eq!(b.eval(&p(2.0)).unwrap(), Finite(2.5));
        assert_eq!(b.eval(&p(1.0)).unwrap(), Finite(1.0));
    }

    #[test]
    fn power_scaling_below_conventions() {
        let s = FuncHandle::power_scaling(0.5, BelowZero::PosInf).unwrap();
        assert_eq!(s.eval(&p(-1.0)).unwrap(), PosInf);
        assert_eq!(s.eval(&p(4.0)).unwrap(), Finite(2.0));
        let s = FuncHandle::power_scaling(0.5, BelowZero::NegInf).unwrap();
        assert_eq!(s.eval(&p(-1.0)).unwrap(), NegInf);
    }

    #[test]
    fn dimension_mismatch_is_caught() {
        let h = FuncHandle::huber(2, Norm::Euclidean, 1.0, 2.0).unwrap();
        assert!(matches!(
            h.eval(&p(1.0)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn sampling_matches_pointwise_eval() {
        let sq = FuncHandle::norm_power(1, Norm::Euclidean, 2.0, 2.0, 0.0).unwrap(); // x^2
        let g = sq.sample(&GridSpec::line(-1.0, 1.0, 3).unwrap()).unwrap();
        assert_eq!(g.values, vec![Finite(1.0), Finite(0.0), Finite(1.0)]);

        let ind = FuncHandle::radial_indicator(1, Norm::Euclidean, 0.0, 1.0, 2.0, 0.0, 0.0)
            .unwrap();
        // Indicator of [-1,1] sampled on [-1,1]: but shifted window: sample on
        // [-1, 1] is all zero; sample the [0,1]-radius indicator on [-2, 2].
        let g = ind.sample(&GridSpec::line(-2.0, 2.0, 5).unwrap()).unwrap();
        assert_eq!(
            g.values,
            vec![PosInf, Finite(0.0), Finite(0.0), Finite(0.0), PosInf]
        );

        let h = FuncHandle::huber(1, Norm::Euclidean, 1.0, 2.0).unwrap();
        let g = h.sample(&GridSpec::line(-2.0, 2.0, 5).unwrap()).unwrap();
        assert_eq!(
            g.values,
            vec![
                Finite(2.0),
                Finite(1.0),
                Finite(0.5),
                Finite(1.0),
                Finite(2.0)
            ]
        );
    }

    #[test]
    fn norm_power_conjugate_is_in_family() {
        // x^2/2 + 1/2 conjugates to xi^2/2 - 1/2.
        let f = FuncHandle::norm_power(1, Norm::Euclidean, 2.0, 1.0, 0.5).unwrap();
        let fs = f.conjugate_analytic().unwrap();
        assert_eq!(fs.eval(&p(0.0)).unwrap(), Finite(-0.5));
        assert_eq!(fs.eval(&p(2.0)).unwrap(), Finite(1.5));
    }

    #[test]
    fn huber_conjugate_matches_ball_restricted_power() {
        let h = FuncHandle::huber(1, Norm::Euclidean, 1.0, 2.0).unwrap();
        let hs = h.conjugate_analytic().unwrap();
        assert_eq!(hs.eval(&p(0.0)).unwrap(), Finite(-0.5));
        assert_eq!(hs.eval(&p(1.0)).unwrap(), Finite(0.0));
        assert_eq!(hs.eval(&p(1.5)).unwrap(), PosInf);
    }

    #[test]
    fn berhu_conjugate_round_trips() {
        let b = FuncHandle::berhu(1, Norm::Euclidean, 1.0, 2.0).unwrap();
        let bs = b.conjugate_analytic().unwrap();
        assert_eq!(bs.eval(&p(0.5)).unwrap(), Finite(0.0));
        assert_eq!(bs.eval(&p(2.0)).unwrap(), Finite(1.5));
        let back = bs.conjugate_analytic().unwrap();
        for v in [-2.0, -0.5, 0.0, 0.7, 1.0, 3.0] {
            assert_eq!(back.eval(&p(v)).unwrap(), b.eval(&p(v)).unwrap());
        }
    }

    #[test]
    fn affine_conjugate_is_point_indicator() {
        let a = FuncHandle::affine(vec![2.0], 3.0).unwrap();
        let c = a.conjugate_analytic().unwrap();
        assert_eq!(c.eval(&p(2.0)).unwrap(), Finite(-3.0));
        assert_eq!(c.eval(&p(1.0)).unwrap(), PosInf);
    }

    #[test]
    fn radial_indicator_conjugate_closed_form() {
        // x^2/2 restricted to 1 <= |x| <= 2.
        let f = FuncHandle::radial_indicator(1, Norm::Euclidean, 1.0, 2.0, 2.0, 1.0, 0.0)
            .unwrap();
        let fs = f.conjugate_analytic().unwrap();
        // |xi| <= 1: boundary max at r = 1: |xi| - 1/2.
        assert_eq!(fs.eval(&p(0.0)).unwrap(), Finite(-0.5));
        assert_eq!(fs.eval(&p(0.5)).unwrap(), Finite(0.0));
        // 1 <= |xi| <= 2: interior max: xi^2/2.
        assert_eq!(fs.eval(&p(1.5)).unwrap(), Finite(1.125));
        // |xi| > 2: r = 2: 2|xi| - 2.
        assert_eq!(fs.eval(&p(3.0)).unwrap(), Finite(4.0));
    }

    #[test]
    fn recession_handles() {
        let h = FuncHandle::huber(1, Norm::Euclidean, 1.0, 2.0).unwrap();
        let r = h.recession_analytic().unwrap();
        assert_eq!(r.eval(&p(-3.0)).unwrap(), Finite(3.0));

        let f = FuncHandle::norm_power(2, Norm::Euclidean, 2.0, 1.0, 0.0).unwrap();
        let r = f.recession_analytic().unwrap();
        assert_eq!(r.eval(&Point::from([0.0, 0.0])).unwrap(), Finite(0.0));
        assert_eq!(r.eval(&Point::from([1.0, 0.0])).unwrap(), PosInf);
    }

    #[test]
    fn log_mean_cases() {
        assert_eq!(log_mean(1.0, 1.0), Finite(1.0));
        let e = std::f64::consts::E;
        let v = log_mean(1.0, e).as_finite().unwrap();
        assert!((v - (e - 1.0)).abs() < 1e-12);
        assert_eq!(log_mean(0.0, 5.0), Finite(0.0));
        assert_eq!(geo_mean(-1.0, 1.0), NegInf);
    }

    #[test]
    fn grid_indexing_round_trips() {
        let spec = GridSpec::new(vec![0.0, -1.0], vec![1.0, 1.0], vec![3, 5]).unwrap();
        for idx in 0..spec.num_nodes() {
            let multi = spec.unflatten(idx);
            assert_eq!(spec.flatten(&multi), idx);
        }
        assert_eq!(spec.node(0), vec![0.0, -1.0]);
        assert_eq!(spec.node(spec.num_nodes() - 1), vec![1.0, 1.0]);
    }

    #[test]
    fn interpolation_is_exact_on_nodes_and_propagates_inf() {
        let f = FuncHandle::radial_indicator(1, Norm::Euclidean, 0.0, 1.0, 2.0, 1.0, 0.0)
            .unwrap();
        let g = Arc::new(f.sample(&GridSpec::line(-2.0, 2.0, 9).unwrap()).unwrap());
        let gb = FuncHandle::grid_backed(g.clone(), Meta::gamma0());
        for i in 0..9 {
            let x = g.spec.axis_coord(0, i);
            assert_eq!(gb.eval(&p(x)).unwrap(), g.values[i]);
        }
        // Between a finite node and a +inf node the interpolant is +inf.
        assert_eq!(gb.eval(&p(1.25)).unwrap(), PosInf);
    }
}
