//! One-sided envelopes: the biconjugate of a function restricted to its
//! strictly negative (resp. strictly positive) values, with closed forms on
//! certified convex-lsc-proper inputs and the grid oracle everywhere else.
//!
//! The down-envelope of a certified input is the function plus the indicator
//! of its zero-sublevel set; the up-envelope is its positive part plus the
//! indicator of the closed convex hull of its strict positivity region. The
//! Huber and Berhu functions arise as the conjugates of the two envelopes of
//! a shifted norm power's conjugate, and any such function decomposes as the
//! max of that pair.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::extreal::{ExtReal, Finite, NegInf, PosInf};
use crate::funcs::{
    conjugate_exponent, pow_p, AnalyticFamily, FuncHandle, GridSpec, Meta, Norm, Point, TriState,
};
use crate::transform::{
    biconjugate_grid, dual_spec_from_slopes, hull_of_positive_set, HullSet, HullSet1D, HullSet2D,
};

/// Which computation produced an envelope.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvelopeRoute {
    ClosedFormGamma0,
    OracleBiconjugate,
}

/// An envelope together with its provenance. `cam_empty` marks the
/// degenerate identically -inf outcome (no continuous affine minorant of the
/// restriction).
#[derive(Debug, Clone)]
pub struct EnvelopeResult {
    pub handle: FuncHandle,
    pub route: EnvelopeRoute,
    pub cam_empty: bool,
}

/// Pointwise restriction to strictly negative finite values; +inf elsewhere.
pub fn restrict_down(f: &FuncHandle) -> FuncHandle {
    let inner = f.clone();
    FuncHandle::opaque(f.dim(), Meta::unknown(), "restrict-down", move |x| {
        match inner.eval_slice(x) {
            Finite(v) if v < 0.0 => Finite(v),
            _ => PosInf,
        }
    })
    .expect("dimension already validated")
}

/// Pointwise restriction to strictly positive finite values; +inf elsewhere.
pub fn restrict_up(f: &FuncHandle) -> FuncHandle {
    let inner = f.clone();
    FuncHandle::opaque(f.dim(), Meta::unknown(), "restrict-up", move |x| {
        match inner.eval_slice(x) {
            Finite(v) if v > 0.0 => Finite(v),
            _ => PosInf,
        }
    })
    .expect("dimension already validated")
}

fn constant_handle(dim: usize, v: ExtReal, label: &str) -> FuncHandle {
    FuncHandle::opaque(dim, Meta::unknown(), label, move |_| v).expect("valid dim")
}

/// Whether the function takes a strictly negative value, from the family
/// infimum when available, else by scanning `grid`.
fn has_negative_value(f: &FuncHandle, grid: Option<&GridSpec>) -> Result<bool> {
    if let Some(inf) = f.analytic_infimum() {
        return Ok(inf < Finite(0.0));
    }
    let spec = grid.ok_or(Error::GridRequired)?;
    let samples = f.sample(spec)?;
    Ok(samples
        .values
        .iter()
        .any(|v| matches!(v, Finite(x) if *x < 0.0) || v.is_neg_inf()))
}

/// Whether the function takes a strictly positive finite value.
fn has_positive_value(f: &FuncHandle, grid: Option<&GridSpec>) -> Result<bool> {
    match &f.family {
        AnalyticFamily::NormPowerShifted { mult, shift, .. } => {
            return Ok(*mult > 0.0 || *shift > 0.0)
        }
        AnalyticFamily::Huber { .. } | AnalyticFamily::Berhu { .. } => return Ok(true),
        AnalyticFamily::Affine { slope, intercept } => {
            return Ok(slope.iter().any(|c| *c != 0.0) || *intercept > 0.0)
        }
        AnalyticFamily::PowerScaling { .. }
        | AnalyticFamily::ClippedQuadraticScaling { .. }
        | AnalyticFamily::MaxZeroAffine
        | AnalyticFamily::LogMeanScaling
        | AnalyticFamily::GeoMeanScaling
        | AnalyticFamily::BrenierMobility { .. } => return Ok(true),
        AnalyticFamily::RadialIndicator {
            hi,
            base_p,
            base_mult,
            base_shift,
            ..
        } => {
            let top = base_mult * pow_p(*hi, *base_p) / base_p + base_shift;
            return Ok(top > 0.0 || (*base_mult > 0.0 && !hi.is_finite()));
        }
        _ => {}
    }
    let spec = grid.ok_or(Error::GridRequired)?;
    let samples = f.sample(spec)?;
    Ok(samples
        .values
        .iter()
        .any(|v| matches!(v, Finite(x) if *x > 0.0)))
}

/// Closed convex hull of the strict positivity region, from the family when
/// it exposes one.
pub fn positive_set_hull_analytic(f: &FuncHandle) -> Option<HullSet> {
    let whole = |dim: usize| -> HullSet {
        if dim == 1 {
            HullSet::One(HullSet1D::new(0.0, 0.0, true, true))
        } else {
            HullSet::Two(HullSet2D {
                vertices: vec![[0.0, 0.0]],
                rays: vec![[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]],
            })
        }
    };
    match &f.family {
        AnalyticFamily::NormPowerShifted { mult, shift, .. } => {
            if *mult > 0.0 || *shift > 0.0 {
                Some(whole(f.dim()))
            } else {
                None
            }
        }
        AnalyticFamily::Huber { .. } | AnalyticFamily::Berhu { .. } => Some(whole(f.dim())),
        AnalyticFamily::Affine { slope, intercept } => {
            if slope.iter().all(|c| *c == 0.0) {
                return if *intercept > 0.0 { Some(whole(f.dim())) } else { None };
            }
            if f.dim() == 1 {
                let w = slope[0];
                let root = -intercept / w;
                Some(HullSet::One(if w > 0.0 {
                    HullSet1D::new(root, root, false, true)
                } else {
                    HullSet1D::new(root, root, true, false)
                }))
            } else if f.dim() == 2 {
                // Halfspace <w, y> >= -intercept: anchor point plus the
                // perpendicular directions and the inward normal as rays.
                let w = [slope[0], slope[1]];
                let n2 = w[0] * w[0] + w[1] * w[1];
                let p0 = [-intercept * w[0] / n2, -intercept * w[1] / n2];
                let len = n2.sqrt();
                let what = [w[0] / len, w[1] / len];
                Some(HullSet::Two(HullSet2D {
                    vertices: vec![p0],
                    rays: vec![[what[1], -what[0]], [-what[1], what[0]], what],
                }))
            } else {
                None
            }
        }
        AnalyticFamily::PowerScaling { .. } | AnalyticFamily::MaxZeroAffine => {
            Some(HullSet::One(HullSet1D::new(0.0, 0.0, false, true)))
        }
        AnalyticFamily::ClippedQuadraticScaling { .. } => {
            Some(HullSet::One(HullSet1D::new(-1.0, -1.0, false, true)))
        }
        AnalyticFamily::LogMeanScaling | AnalyticFamily::GeoMeanScaling => {
            Some(HullSet::Two(HullSet2D {
                vertices: vec![[0.0, 0.0]],
                rays: vec![[1.0, 0.0], [0.0, 1.0]],
            }))
        }
        AnalyticFamily::BrenierMobility { .. } => {
            Some(HullSet::One(HullSet1D::new(0.0, 1.0, false, false)))
        }
        AnalyticFamily::RadialIndicator {
            lo,
            hi,
            base_p,
            base_mult,
            base_shift,
            ..
        } => {
            if f.dim() != 1 || *lo != 0.0 {
                return None;
            }
            // Positive region of an increasing radial base inside [0, hi].
            let top = base_mult * pow_p(*hi, *base_p) / base_p + base_shift;
            if top <= 0.0 {
                return None;
            }
            Some(HullSet::One(HullSet1D::new(-hi, *hi, false, false)))
        }
        _ => None,
    }
}

/// The down-envelope: biconjugate of the strictly-negative restriction.
///
/// Certified convex+lsc+proper inputs take the closed form `f` plus the
/// indicator of its zero-sublevel set; anything else goes through the grid
/// oracle (requiring `grid`). An empty negativity region returns the
/// identically +inf degenerate rather than an error.
pub fn envelope_down(f: &FuncHandle, grid: Option<&GridSpec>) -> Result<EnvelopeResult> {
    if f.meta.certified_gamma0() {
        if !has_negative_value(f, grid)? {
            return Ok(EnvelopeResult {
                handle: constant_handle(f.dim(), PosInf, "down-envelope-degenerate"),
                route: EnvelopeRoute::ClosedFormGamma0,
                cam_empty: false,
            });
        }
        let inner = f.clone();
        let handle = FuncHandle::opaque(
            f.dim(),
            Meta::gamma0(),
            "down-envelope",
            move |x| match inner.eval_slice(x) {
                Finite(v) if v <= 0.0 => Finite(v),
                _ => PosInf,
            },
        )?;
        return Ok(EnvelopeResult {
            handle,
            route: EnvelopeRoute::ClosedFormGamma0,
            cam_empty: false,
        });
    }
    oracle_envelope(&restrict_down(f), grid)
}

/// The up-envelope: biconjugate of the strictly-positive restriction.
///
/// Certified inputs take max{f, 0} plus the indicator of the closed convex
/// hull of the positivity region (analytic hull when the family exposes one,
/// sampled hull otherwise). Errors with `EmptyPositiveSet` when f never
/// exceeds zero.
pub fn envelope_up(f: &FuncHandle, grid: Option<&GridSpec>) -> Result<EnvelopeResult> {
    if !has_positive_value(f, grid)? {
        return Err(Error::EmptyPositiveSet);
    }
    if f.meta.certified_gamma0() {
        let hull = match positive_set_hull_analytic(f) {
            Some(h) => h,
            None => {
                let spec = grid.ok_or(Error::GridRequired)?;
                hull_of_positive_set(f, spec)?
            }
        };
        let inner = f.clone();
        let hull = Arc::new(hull);
        let hull_for_eval = hull.clone();
        let handle = FuncHandle::opaque(f.dim(), Meta::gamma0(), "up-envelope", move |x| {
            if !hull_for_eval.contains(x) {
                return PosInf;
            }
            match inner.eval_slice(x) {
                PosInf => PosInf,
                NegInf => Finite(0.0),
                Finite(v) => Finite(v.max(0.0)),
            }
        })?;
        return Ok(EnvelopeResult {
            handle,
            route: EnvelopeRoute::ClosedFormGamma0,
            cam_empty: false,
        });
    }
    oracle_envelope(&restrict_up(f), grid)
}

/// Grid-oracle envelope of an already-restricted function.
fn oracle_envelope(restricted: &FuncHandle, grid: Option<&GridSpec>) -> Result<EnvelopeResult> {
    let spec = grid.ok_or(Error::GridRequired)?;
    let samples = restricted.sample(spec)?;
    if samples.values.iter().all(|v| v.is_pos_inf()) {
        return Ok(EnvelopeResult {
            handle: constant_handle(restricted.dim(), PosInf, "envelope-degenerate"),
            route: EnvelopeRoute::OracleBiconjugate,
            cam_empty: false,
        });
    }
    let dual = dual_spec_from_slopes(&samples, &spec.counts)?;
    let bi = biconjugate_grid(&samples, &dual)?;
    let meta = Meta {
        is_convex: TriState::True,
        is_lsc: TriState::True,
        is_proper: TriState::Unknown,
    };
    Ok(EnvelopeResult {
        handle: FuncHandle::grid_backed(Arc::new(bi.grid), meta),
        route: EnvelopeRoute::OracleBiconjugate,
        cam_empty: bi.poisoned,
    })
}

/// The pth order Huber function.
pub fn huber(dim: usize, norm: Norm, alpha: f64, p: f64) -> Result<FuncHandle> {
    FuncHandle::huber(dim, norm, alpha, p)
}

/// The pth order Berhu (reversed Huber) function.
pub fn berhu(dim: usize, norm: Norm, alpha: f64, p: f64) -> Result<FuncHandle> {
    FuncHandle::berhu(dim, norm, alpha, p)
}

/// The conjugates of the two envelopes of f*, together with their recession
/// functions: `(lower, upper, rec_lower, rec_upper)` where `lower` has
/// nonpositive conjugate (Huber-type) and `upper` nonnegative conjugate
/// (Berhu-type), and `f = max{lower, upper}` holds whenever f* takes a
/// strictly negative value.
///
/// Closed forms exist for shifted norm powers (the Huber/Berhu pair) and for
/// radial indicators (guarded 1D concave maximization, exact to 1e-12).
pub fn mixed_envelope_pair(
    f: &FuncHandle,
) -> Option<(FuncHandle, FuncHandle, FuncHandle, FuncHandle)> {
    match &f.family {
        AnalyticFamily::NormPowerShifted {
            norm,
            p,
            mult,
            shift,
        } => {
            if !(*shift > 0.0) || !(*mult > 0.0) || !(*p > 1.0) {
                return None;
            }
            let ps = conjugate_exponent(*p);
            // shift = alpha^p* / (p* mult^(p*-1)) solves for the Huber knob.
            let alpha = (shift * ps * mult.powf(ps - 1.0)).powf(1.0 / ps);
            if *mult == 1.0 {
                let lower = FuncHandle::huber(f.dim(), *norm, alpha, *p).ok()?;
                let upper = FuncHandle::berhu(f.dim(), *norm, alpha, *p).ok()?;
                let rec_lower = lower.recession_analytic()?;
                let rec_upper = upper.recession_analytic()?;
                return Some((lower, upper, rec_lower, rec_upper));
            }
            let m = *mult;
            let hub = FuncHandle::huber(f.dim(), *norm, alpha / m.powf(1.0 / (*p - 1.0)), *p)
                .ok()?;
            // Scaled pair: mult * huber_(alpha', p)(x) with alpha' chosen so
            // mult*(|x|^p/p + c') = mult |x|^p/p + shift.
            let hub2 = hub.clone();
            let ber = FuncHandle::berhu(f.dim(), *norm, alpha / m.powf(1.0 / (*p - 1.0)), *p)
                .ok()?;
            let ber2 = ber.clone();
            let lower = FuncHandle::opaque(f.dim(), Meta::gamma0(), "scaled-huber", move |x| {
                match hub2.eval_slice(x) {
                    Finite(v) => Finite(m * v),
                    other => other,
                }
            })
            .ok()?;
            let upper = FuncHandle::opaque(f.dim(), Meta::gamma0(), "scaled-berhu", move |x| {
                match ber2.eval_slice(x) {
                    Finite(v) => Finite(m * v),
                    other => other,
                }
            })
            .ok()?;
            let rec_lower = FuncHandle::norm_power(f.dim(), *norm, 1.0, alpha, 0.0).ok()?;
            let rec_upper = crate::funcs::indicator_origin(f.dim());
            Some((lower, upper, rec_lower, rec_upper))
        }
        AnalyticFamily::RadialIndicator {
            norm,
            lo,
            hi,
            base_p,
            base_mult,
            base_shift,
        } => {
            if !(*lo > 0.0) || !hi.is_finite() {
                return None;
            }
            let base_at = {
                let (bp, bm, bs) = (*base_p, *base_mult, *base_shift);
                move |r: f64| bm * pow_p(r, bp) / bp + bs
            };
            if base_at(*lo) <= 0.0 {
                // The conjugate never dips below zero; not a mixed pair.
                return None;
            }
            let conj = f.conjugate_analytic()?;
            let dim = f.dim();
            let dual_norm = norm.dual();
            let conj_rad = {
                let conj = conj.clone();
                move |u: f64| -> f64 {
                    let mut x = vec![0.0; dim];
                    x[0] = u;
                    // The conjugate is radial in the dual norm; the first
                    // axis realizes every radius for the three norms.
                    conj.eval_slice(&x).to_f64()
                }
            };
            // Radius where the conjugate crosses zero (it starts negative at
            // the origin and grows at least linearly with slope lo).
            let mut ulo = 0.0;
            let mut uhi = (base_at(*hi).abs() + 1.0) / lo + 1.0;
            for _ in 0..200 {
                let mid = 0.5 * (ulo + uhi);
                if conj_rad(mid) <= 0.0 {
                    ulo = mid;
                } else {
                    uhi = mid;
                }
            }
            let u_zero = 0.5 * (ulo + uhi);

            let primal = *norm;
            let conj_l = conj_rad.clone();
            let lower = FuncHandle::opaque(dim, Meta::gamma0(), "radial-mixed-lower", move |x| {
                let r = primal.eval(x);
                Finite(concave_max(|u| u * r - conj_l(u), 0.0, u_zero))
            })
            .ok()?;
            let conj_u = conj_rad.clone();
            let (hi_r, top) = (*hi, base_at(*hi));
            let upper = FuncHandle::opaque(dim, Meta::gamma0(), "radial-mixed-upper", move |x| {
                let r = primal.eval(x);
                if r > hi_r {
                    return PosInf;
                }
                if (r - hi_r).abs() < 1e-12 {
                    return Finite(top);
                }
                // Doubling scan for a bracket, then concave max.
                let mut hi_u = u_zero.max(1.0);
                while hi_u < 1e12 {
                    let g = |u: f64| u * r - conj_u(u).max(0.0);
                    if g(2.0 * hi_u) <= g(hi_u) {
                        break;
                    }
                    hi_u *= 2.0;
                }
                Finite(concave_max(|u| u * r - conj_u(u).max(0.0), 0.0, 2.0 * hi_u))
            })
            .ok()?;
            let rec_lower = FuncHandle::norm_power(dim, *norm, 1.0, u_zero, 0.0).ok()?;
            let rec_upper = crate::funcs::indicator_origin(dim);
            let _ = dual_norm;
            Some((lower, upper, rec_lower, rec_upper))
        }
        _ => None,
    }
}

/// Ternary search for the max of a concave function on [lo, hi].
fn concave_max(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if g(m1) < g(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    let mid = 0.5 * (lo + hi);
    g(mid)
}

/// One row of a max-decomposition check.
#[derive(Debug, Clone)]
pub struct MaxDecompositionRow {
    pub point: Point,
    pub f_value: ExtReal,
    pub max_value: ExtReal,
    pub gap: f64,
}

#[derive(Debug, Clone)]
pub struct MaxDecompositionReport {
    pub rows: Vec<MaxDecompositionRow>,
    pub max_gap: f64,
    pub analytic: bool,
}

/// Checks `f = max{(f*-down-envelope)*, (f*-up-envelope)*}` at the given test
/// points. Requires f certified with a conjugate taking a strictly negative
/// value, which for certified f is equivalent to f(0) > 0.
pub fn max_decomposition_check(
    f: &FuncHandle,
    test_points: &[Point],
) -> Result<MaxDecompositionReport> {
    if !f.meta.certified_gamma0() {
        return Err(Error::HypothesisViolated(
            "max decomposition needs a certified convex lsc proper input".into(),
        ));
    }
    let origin = Point::new(vec![0.0; f.dim()])?;
    let f0 = f.eval(&origin)?;
    if !(f0 > Finite(0.0)) {
        return Err(Error::HypothesisViolated(format!(
            "conjugate infimum -f(0) = {} is not negative",
            f0.neg()
        )));
    }
    let (lower, upper, _, _) = mixed_envelope_pair(f).ok_or(Error::UnknownConjugate)?;
    let mut rows = Vec::with_capacity(test_points.len());
    let mut max_gap = 0.0f64;
    for pt in test_points {
        let fv = f.eval(pt)?;
        let mv = lower.eval(pt)?.max(upper.eval(pt)?);
        let gap = match (fv, mv) {
            (Finite(a), Finite(b)) => (a - b).abs(),
            (a, b) if a == b => 0.0,
            _ => f64::INFINITY,
        };
        max_gap = max_gap.max(gap);
        rows.push(MaxDecompositionRow {
            point: pt.clone(),
            f_value: fv,
            max_value: mv,
            gap,
        });
    }
    Ok(MaxDecompositionReport {
        rows,
        max_gap,
        analytic: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcs::Norm;

    fn p(v: f64) -> Point {
        Point::from(v)
    }

    #[test]
    fn restriction_windows() {
        let f = FuncHandle::norm_power(1, Norm::Euclidean, 2.0, 2.0, -1.0).unwrap(); // x^2 - 1
        let down = restrict_down(&f);
        assert_eq!(down.eval(&p(0.0)).unwrap(), Finite(-1.0));
        assert_eq!(down.eval(&p(2.0)).unwrap(), PosInf);
        let up = restrict_up(&f);
        assert_eq!(up.eval(&p(2.0)).unwrap(), Finite(3.0));
        assert_eq!(up.eval(&p(0.0)).unwrap(), PosInf);
        assert_eq!(up.eval(&p(1.0)).unwrap(), PosInf, "zero is cut");
    }

    #[test]
    fn down_envelope_of_conjugate_power() {
        // f* = (xi^2 - 1)/2: the down-envelope keeps it on [-1, 1].
        let fs = FuncHandle::norm_power(1, Norm::Euclidean, 2.0, 1.0, -0.5).unwrap();
        let env = envelope_down(&fs, None).unwrap();
        assert_eq!(env.route, EnvelopeRoute::ClosedFormGamma0);
        assert_eq!(env.handle.eval(&p(0.5)).unwrap(), Finite(-0.375));
        assert_eq!(env.handle.eval(&p(1.0)).unwrap(), Finite(0.0));
        assert_eq!(env.handle.eval(&p(1.5)).unwrap(), PosInf);
    }

    #[test]
    fn up_envelope_of_conjugate_power() {
        let fs = FuncHandle::norm_power(1, Norm::Euclidean, 2.0, 1.0, -0.5).unwrap();
        let env = envelope_up(&fs, None).unwrap();
        assert_eq!(env.handle.eval(&p(0.5)).unwrap(), Finite(0.0));
        assert_eq!(env.handle.eval(&p(2.0)).unwrap(), Finite(1.5));
    }

    #[test]
    fn up_envelope_of_positive_function_is_itself() {
        let f = FuncHandle::norm_power(1, Norm::Euclidean, 2.0, 2.0, 1.0).unwrap(); // 1 + x^2
        let env = envelope_up(&f, None).unwrap();
        for v in [-2.0, 0.0, 1.3] {
            assert_eq!(env.handle.eval(&p(v)).unwrap(), f.eval(&p(v)).unwrap());
        }
    }

    #[test]
    fn down_envelope_degenerates_when_never_negative() {
        let f = FuncHandle::norm_power(1, Norm::Euclidean, 2.0, 2.0, 0.0).unwrap(); // x^2
        let env = envelope_down(&f, None).unwrap();
        assert!(!env.cam_empty);
        assert_eq!(env.handle.eval(&p(0.0)).unwrap(), PosInf);
    }

    #[test]
    fn up_envelope_errors_when_never_positive() {
        let f = FuncHandle::constant(1, -1.0).unwrap();
        assert!(matches!(envelope_up(&f, None), Err(Error::EmptyPositiveSet)));
    }

    #[test]
    fn clipped_quadratic_up_envelope_has_plateau() {
        let s = FuncHandle::clipped_quadratic(0.5).unwrap();
        let env = envelope_up(&s, None).unwrap();
        let e = |y: f64| env.handle.eval(&p(y)).unwrap();
        assert_eq!(e(0.25), Finite(0.0), "plateau on [-beta, beta]");
        assert_eq!(e(-0.5), Finite(0.0));
        assert_eq!(e(0.75), Finite((0.5625 - 0.25) / 2.0));
        assert_eq!(e(2.0), Finite(2.0 - 0.625));
        assert_eq!(e(-0.75), Finite((0.5625 - 0.25) / 2.0));
        assert_eq!(e(-1.5), PosInf);
        assert_eq!(e(-1.0), Finite((1.0 - 0.25) / 2.0));
    }

    #[test]
    fn abs_shifted_down_envelope() {
        // f = |x| - 1: down-envelope is |x| - 1 on [-1, 1], +inf outside.
        let f = FuncHandle::norm_power(1, Norm::Euclidean, 1.0, 1.0, -1.0).unwrap();
        let env = envelope_down(&f, None).unwrap();
        assert_eq!(env.handle.eval(&p(0.5)).unwrap(), Finite(-0.5));
        assert_eq!(env.handle.eval(&p(1.0)).unwrap(), Finite(0.0));
        assert_eq!(env.handle.eval(&p(1.01)).unwrap(), PosInf);
    }

    #[test]
    fn huber_berhu_are_the_envelope_conjugates() {
        // For f = x^2/2 + 1/2, the mixed pair is exactly Huber/Berhu(1, 2).
        let f = FuncHandle::norm_power(1, Norm::Euclidean, 2.0, 1.0, 0.5).unwrap();
        let (lower, upper, rec_lower, _) = mixed_envelope_pair(&f).unwrap();
        let h = huber(1, Norm::Euclidean, 1.0, 2.0).unwrap();
        let b = berhu(1, Norm::Euclidean, 1.0, 2.0).unwrap();
        for v in [-3.0, -1.0, -0.3, 0.0, 0.5, 1.0, 2.7] {
            assert_eq!(lower.eval(&p(v)).unwrap(), h.eval(&p(v)).unwrap());
            assert_eq!(upper.eval(&p(v)).unwrap(), b.eval(&p(v)).unwrap());
        }
        assert_eq!(rec_lower.eval(&p(-2.0)).unwrap(), Finite(2.0));
    }

    #[test]
    fn max_decomposition_reconstructs_f() {
        let f = FuncHandle::norm_power(2, Norm::Euclidean, 2.0, 1.0, 0.5).unwrap();
        let pts: Vec<Point> = vec![
            Point::from([2.0, 0.0]),
            Point::from([0.0, 0.0]),
            Point::from([0.3, -0.4]),
            Point::from([-1.2, 0.9]),
        ];
        let rep = max_decomposition_check(&f, &pts).unwrap();
        assert!(rep.max_gap <= 1e-15, "gap {}", rep.max_gap);
        // ||x|| = 2 sits on the Berhu branch: 2^2/2 + 1/2 = 2.5.
        assert_eq!(rep.rows[0].max_value, Finite(2.5));
        assert_eq!(rep.rows[1].max_value, Finite(0.5));
    }

    #[test]
    fn max_decomposition_hypothesis_fails_for_nonpositive_origin() {
        let f = FuncHandle::norm_power(1, Norm::Euclidean, 2.0, 2.0, 0.0).unwrap(); // x^2
        let pts = vec![p(1.0)];
        assert!(matches!(
            max_decomposition_check(&f, &pts),
            Err(Error::HypothesisViolated(_))
        ));
    }

    #[test]
    fn envelopes_match_oracle_on_radial_indicator() {
        // Nonconvex input goes through the oracle route.
        let f = FuncHandle::radial_indicator(1, Norm::Euclidean, 1.0, 2.0, 2.0, 1.0, -1.0)
            .unwrap();
        let grid = GridSpec::line(-4.0, 4.0, 801).unwrap();
        let env = envelope_down(&f, Some(&grid)).unwrap();
        assert_eq!(env.route, EnvelopeRoute::OracleBiconjugate);
        // Negative region of f: base r^2/2 - 1 < 0 on [1, sqrt(2)); envelope
        // is the convex hull of the symmetric pair of arcs: chords between
        // (-r, v) and (r, v) pass through zero level at r = 1: value -1/2.
        let v = env.handle.eval(&p(0.0)).unwrap().as_finite().unwrap();
        assert!((v - (-0.5)).abs() < 2e-2, "hull value at 0: {v}");
    }

    #[test]
    fn radial_mixed_pair_matches_hand_computation() {
        // phi = x^2/2 restricted to 1 <= |x| <= 2: the lower envelope
        // conjugate is 1/2 + max{0, (|x|-1)/2}.
        let f = FuncHandle::radial_indicator(1, Norm::Euclidean, 1.0, 2.0, 2.0, 1.0, 0.0)
            .unwrap();
        let (lower, upper, rec_lower, _) = mixed_envelope_pair(&f).unwrap();
        for (x, want) in [(0.0, 0.5), (1.0, 0.5), (2.0, 1.0), (-3.0, 1.5)] {
            let got = lower.eval(&p(x)).unwrap().as_finite().unwrap();
            assert!((got - want).abs() < 1e-9, "lower({x}) = {got}, want {want}");
        }
        // rec of the lower envelope has slope u_zero = 1/2.
        let r = rec_lower.eval(&p(2.0)).unwrap().as_finite().unwrap();
        assert!((r - 1.0).abs() < 1e-9);
        // Upper envelope at the domain edge equals the base value.
        let got = upper.eval(&p(2.0)).unwrap().as_finite().unwrap();
        assert!((got - 2.0).abs() < 1e-9, "upper(2) = {got}");
        assert_eq!(upper.eval(&p(2.5)).unwrap(), PosInf);
    }
}
