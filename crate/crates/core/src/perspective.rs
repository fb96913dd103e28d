//! Preperspective and perspective evaluation.
//!
//! The preperspective of `phi` with scaling `s` is
//! `(x, y) |-> s(y) phi(x / s(y))` when `0 < s(y) < +inf` and `+inf`
//! elsewhere. Its largest lsc convex minorant, the perspective, has closed
//! forms dispatched on the sign range of `phi*` and on whether the
//! strictly-negative restriction of `-s` admits a continuous affine
//! minorant. This module classifies, dispatches, and evaluates those forms,
//! along with the conjugate of the preperspective.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::envelopes::{envelope_down, envelope_up, mixed_envelope_pair, positive_set_hull_analytic};
use crate::error::{Error, Result};
use crate::extreal::{ExtReal, Finite, NegInf, PosInf};
use crate::funcs::{
    conjugate_exponent, pow_p, AnalyticFamily, BelowZero, FuncHandle, GridSpec, Meta, Point,
    TriState,
};
use crate::transform::{
    biconjugate_grid, conjugate_grid, dual_spec_from_slopes, hull_of_positive_set, HullSet,
    HullSet1D, HullSet2D,
};

// ---- sign classification ------------------------------------------------------

/// Sign range of the conjugate of phi over its domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SignClass {
    /// Values in ]-inf, 0] with a strictly negative value somewhere.
    NonPositive,
    /// Values in {0} only (phi equals its recession function).
    ZeroInfty,
    /// Values in [0, +inf[ with a strictly positive value somewhere.
    NonNegative,
    /// Strictly negative and strictly positive values both occur.
    Mixed,
}

/// Classification of phi* with certified witnesses.
#[derive(Debug, Clone, Serialize)]
pub struct ConjugateSignClass {
    pub class: SignClass,
    /// Dual point with phi* < 0, when one exists.
    pub negative_witness: Option<Vec<f64>>,
    /// Dual point with 0 < phi* < +inf, when one exists.
    pub positive_witness: Option<Vec<f64>>,
    pub zero_attained: TriState,
}

/// Whether the strictly-negative restriction of -s admits a continuous
/// affine minorant. Certified analytically per scaling family; `Undetermined`
/// forces the oracle route.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CamStatus {
    NonEmpty,
    Empty,
    Undetermined,
}

/// Theorem branch selected for a (phi, s) pair. Serialized tags are part of
/// the CSV/JSON interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Affine scaling: the classical three-case formula.
    AffineScaling,
    /// phi above its recession function, convex lsc scaling.
    ScalingDirect,
    /// Positively homogeneous phi: phi(x) plus the scaling-hull indicator.
    HomogeneousIndicator,
    /// phi(0) <= 0 with concave upper-semicontinuous scaling.
    ConcaveDirect,
    /// Nonpositive conjugate: scaling up-envelope formula.
    NegConjUpEnvelope,
    /// Conjugate in {0, +inf}: recession plus hull indicator.
    ZeroConjIndicator,
    /// Nonnegative conjugate, no affine minorant on the negated scaling:
    /// zero-level support plus hull indicator.
    PosConjSupport,
    /// Nonnegative conjugate with affine minorant: negated-scaling
    /// down-envelope formula.
    PosConjDownEnvelope,
    /// Mixed conjugate, no affine minorant: up-envelope formula on the
    /// Huber-type minorant.
    MixedUpEnvelope,
    /// Mixed conjugate with affine minorant: four-case max formula.
    MixedFourCase,
    /// The ruled-out pathology: empty positivity set or no affine minorant
    /// anywhere; the perspective is identically +inf or {-inf, +inf}-valued.
    Degenerate,
    /// No analytic certificate; evaluation through the grid biconjugate.
    OracleOnly,
}

impl Branch {
    /// Wire tag used in reports, CSV and JSON.
    pub fn tag(&self) -> &'static str {
        match self {
            Branch::AffineScaling => "Affine_Ex51",
            Branch::ScalingDirect => "C305_i",
            Branch::HomogeneousIndicator => "C305_ii",
            Branch::ConcaveDirect => "C305_iii",
            Branch::NegConjUpEnvelope => "T55_i",
            Branch::ZeroConjIndicator => "T55_ii",
            Branch::PosConjSupport => "T55_iiia",
            Branch::PosConjDownEnvelope => "T55_iiib",
            Branch::MixedUpEnvelope => "T55_va",
            Branch::MixedFourCase => "T55_vb",
            Branch::Degenerate => "degenerate",
            Branch::OracleOnly => "oracle",
        }
    }
}

// ---- scaling analysis -----------------------------------------------------------

/// Everything the dispatcher needs to know about a scaling function: its two
/// one-sided envelopes with their conjugates, affine-minorant status of the
/// negated restriction, the positivity hull, and structural certificates.
#[derive(Debug, Clone)]
pub struct ScalingAnalysis {
    /// The up-envelope of s.
    pub s_up: FuncHandle,
    /// The down-envelope of -s.
    pub neg_s_down: FuncHandle,
    /// Conjugate of the strictly-positive restriction of s.
    pub s_up_conj: Option<FuncHandle>,
    /// Conjugate of the strictly-negative restriction of -s.
    pub neg_s_down_conj: Option<FuncHandle>,
    pub cam_neg_s_down: CamStatus,
    /// Closed convex hull of the strict positivity set.
    pub hull: HullSet,
    pub s_gamma0: TriState,
    pub neg_s_gamma0: TriState,
    /// Slope and intercept when the scaling is affine.
    pub affine: Option<(Vec<f64>, f64)>,
    pub positive_set_nonempty: bool,
    /// Strict positivity set is convex (needed by one convexity condition).
    pub positive_set_convex: TriState,
}

fn opaque1(label: &str, f: impl Fn(f64) -> ExtReal + Send + Sync + 'static) -> FuncHandle {
    FuncHandle::opaque(1, Meta::unknown(), label, move |x| f(x[0])).expect("dim 1")
}

fn opaque_n(
    dim: usize,
    label: &str,
    f: impl Fn(&[f64]) -> ExtReal + Send + Sync + 'static,
) -> FuncHandle {
    FuncHandle::opaque(dim, Meta::unknown(), label, f).expect("valid dim")
}

/// Analyzes a scaling function. Analytic families are handled exactly;
/// opaque or grid scalings need `grid` for the hull and envelopes and leave
/// the affine-minorant status undetermined unless certified by metadata.
pub fn scaling_analysis(s: &FuncHandle, grid: Option<&GridSpec>) -> Result<ScalingAnalysis> {
    let dim = s.dim();
    match &s.family {
        AnalyticFamily::ClippedQuadraticScaling { beta } => {
            let b = *beta;
            let env = envelope_up(s, None)?;
            let c_down = (3.0 - b * b) / 2.0;
            let neg_s_down = opaque1("clipped-neg-down-envelope", move |y| {
                if y >= -1.0 {
                    Finite(-y - c_down)
                } else {
                    PosInf
                }
            });
            let s_up_conj = opaque1("clipped-up-restriction-conjugate", move |u| {
                // Max over the three pieces of the strictly-positive
                // restriction, each a clamped concave 1D maximization.
                let piece_quad = |ylo: f64, yhi: f64| {
                    let y = u.clamp(ylo, yhi);
                    y * u - (y * y - b * b) / 2.0
                };
                let p1 = piece_quad(-1.0, -b);
                let p2 = piece_quad(b, 1.0);
                if u > 1.0 {
                    return PosInf;
                }
                let p3 = u - (1.0 - b * b) / 2.0;
                Finite(p1.max(p2).max(p3))
            });
            let neg_s_down_conj = opaque1("clipped-neg-down-conjugate", move |u| {
                if u <= -1.0 {
                    Finite(-(u + 1.0) + c_down)
                } else {
                    PosInf
                }
            });
            Ok(ScalingAnalysis {
                s_up: env.handle,
                neg_s_down,
                s_up_conj: Some(s_up_conj),
                neg_s_down_conj: Some(neg_s_down_conj),
                cam_neg_s_down: CamStatus::NonEmpty,
                hull: HullSet::One(HullSet1D::new(-1.0, -1.0, false, true)),
                s_gamma0: TriState::True,
                neg_s_gamma0: TriState::False,
                affine: None,
                positive_set_nonempty: true,
                positive_set_convex: TriState::False,
            })
        }
        AnalyticFamily::PowerScaling { q, .. } => {
            let q = *q;
            let s_up = if q < 1.0 {
                opaque1("power-up-envelope", |y| {
                    if y >= 0.0 {
                        Finite(0.0)
                    } else {
                        PosInf
                    }
                })
            } else {
                FuncHandle::power_scaling(q, BelowZero::PosInf)?
            };
            let (neg_s_down, cam) = if q > 1.0 {
                (
                    opaque1("power-neg-down-degenerate", |_| NegInf),
                    CamStatus::Empty,
                )
            } else {
                (
                    opaque1("power-neg-down-envelope", move |y| {
                        if y >= 0.0 {
                            Finite(-pow_q_pub(y, q))
                        } else {
                            PosInf
                        }
                    }),
                    CamStatus::NonEmpty,
                )
            };
            let s_up_conj = opaque1("power-up-restriction-conjugate", move |u| {
                if q > 1.0 {
                    if u <= 0.0 {
                        Finite(0.0)
                    } else {
                        Finite((q - 1.0) * (u / q).powf(q / (q - 1.0)))
                    }
                } else if q == 1.0 {
                    if u <= 1.0 {
                        Finite(0.0)
                    } else {
                        PosInf
                    }
                } else if u <= 0.0 {
                    Finite(0.0)
                } else {
                    PosInf
                }
            });
            let neg_s_down_conj = opaque1("power-neg-down-conjugate", move |u| {
                if q > 1.0 {
                    PosInf
                } else if q == 1.0 {
                    if u <= -1.0 {
                        Finite(0.0)
                    } else {
                        PosInf
                    }
                } else if u < 0.0 {
                    Finite((1.0 - q) * (q / -u).powf(q / (1.0 - q)))
                } else {
                    PosInf
                }
            });
            Ok(ScalingAnalysis {
                s_up,
                neg_s_down,
                s_up_conj: Some(s_up_conj),
                neg_s_down_conj: Some(neg_s_down_conj),
                cam_neg_s_down: cam,
                hull: HullSet::One(HullSet1D::new(0.0, 0.0, false, true)),
                s_gamma0: if matches!(s.family, AnalyticFamily::PowerScaling { below: BelowZero::PosInf, .. })
                    && q >= 1.0
                {
                    TriState::True
                } else {
                    TriState::False
                },
                neg_s_gamma0: if matches!(s.family, AnalyticFamily::PowerScaling { below: BelowZero::NegInf, .. })
                    && q <= 1.0
                {
                    TriState::True
                } else {
                    TriState::False
                },
                affine: None,
                positive_set_nonempty: true,
                positive_set_convex: TriState::True,
            })
        }
        AnalyticFamily::MaxZeroAffine => {
            let s_up = opaque1("maxzero-up-envelope", |y| {
                if y >= 0.0 {
                    Finite(y)
                } else {
                    PosInf
                }
            });
            let neg_s_down = opaque1("maxzero-neg-down-envelope", |y| {
                if y >= 0.0 {
                    Finite(-y)
                } else {
                    PosInf
                }
            });
            let s_up_conj = opaque1("maxzero-up-restriction-conjugate", |u| {
                if u <= 1.0 {
                    Finite(0.0)
                } else {
                    PosInf
                }
            });
            let neg_s_down_conj = opaque1("maxzero-neg-down-conjugate", |u| {
                if u <= -1.0 {
                    Finite(0.0)
                } else {
                    PosInf
                }
            });
            Ok(ScalingAnalysis {
                s_up,
                neg_s_down,
                s_up_conj: Some(s_up_conj),
                neg_s_down_conj: Some(neg_s_down_conj),
                cam_neg_s_down: CamStatus::NonEmpty,
                hull: HullSet::One(HullSet1D::new(0.0, 0.0, false, true)),
                s_gamma0: TriState::True,
                neg_s_gamma0: TriState::False,
                affine: None,
                positive_set_nonempty: true,
                positive_set_convex: TriState::True,
            })
        }
        AnalyticFamily::Affine { slope, intercept } => {
            let (w, b) = (slope.clone(), *intercept);
            let nonempty = w.iter().any(|c| *c != 0.0) || b > 0.0;
            if !nonempty {
                return Err(Error::EmptyPositiveSet);
            }
            let hull = positive_set_hull_analytic(s).ok_or(Error::EmptyPositiveSet)?;
            let (w1, b1) = (w.clone(), b);
            let s_up = opaque_n(dim, "affine-up-envelope", move |y| {
                let v: f64 = w1.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() + b1;
                if v >= 0.0 {
                    Finite(v)
                } else {
                    PosInf
                }
            });
            let (w2, b2) = (w.clone(), b);
            let neg_s_down = opaque_n(dim, "affine-neg-down-envelope", move |y| {
                let v: f64 = w2.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() + b2;
                if v >= 0.0 {
                    Finite(-v)
                } else {
                    PosInf
                }
            });
            Ok(ScalingAnalysis {
                s_up,
                neg_s_down,
                s_up_conj: None,
                neg_s_down_conj: None,
                cam_neg_s_down: CamStatus::NonEmpty,
                hull,
                s_gamma0: TriState::True,
                neg_s_gamma0: TriState::True,
                affine: Some((w, b)),
                positive_set_nonempty: true,
                positive_set_convex: TriState::True,
            })
        }
        AnalyticFamily::LogMeanScaling | AnalyticFamily::GeoMeanScaling => {
            let is_geo = matches!(s.family, AnalyticFamily::GeoMeanScaling);
            let s_up = opaque_n(2, "mean-up-envelope", |y| {
                if y[0] >= 0.0 && y[1] >= 0.0 {
                    Finite(0.0)
                } else {
                    PosInf
                }
            });
            let sc = s.clone();
            let neg_s_down = opaque_n(2, "mean-neg-down-envelope", move |y| {
                if y[0] >= 0.0 && y[1] >= 0.0 {
                    sc.eval_slice(y).neg()
                } else {
                    PosInf
                }
            });
            let s_up_conj = opaque_n(2, "mean-up-restriction-conjugate", |u| {
                if u[0] <= 0.0 && u[1] <= 0.0 {
                    Finite(0.0)
                } else {
                    PosInf
                }
            });
            let sc2 = s.clone();
            let neg_s_down_conj = opaque_n(2, "mean-neg-down-conjugate", move |u| {
                if is_geo {
                    return if u[0] < 0.0 && u[1] < 0.0 && u[0] * u[1] >= 0.25 {
                        Finite(0.0)
                    } else {
                        PosInf
                    };
                }
                // Positively homogeneous scaling: the conjugate of the
                // restriction is the indicator of the slopes dominated by s
                // along every positive ray.
                if u[0] >= 0.0 || u[1] >= 0.0 {
                    return PosInf;
                }
                let g = |t: f64| u[0] * t + u[1] + sc2.eval_slice(&[t, 1.0]).to_f64();
                let mut hi = 1.0;
                while hi < 1e9 && g(hi * 2.0) > g(hi) {
                    hi *= 2.0;
                }
                let m = concave_max_1d(g, 0.0, 2.0 * hi);
                if m <= 1e-12 {
                    Finite(0.0)
                } else {
                    PosInf
                }
            });
            Ok(ScalingAnalysis {
                s_up,
                neg_s_down,
                s_up_conj: Some(s_up_conj),
                neg_s_down_conj: Some(neg_s_down_conj),
                cam_neg_s_down: CamStatus::NonEmpty,
                hull: HullSet::Two(HullSet2D {
                    vertices: vec![[0.0, 0.0]],
                    rays: vec![[1.0, 0.0], [0.0, 1.0]],
                }),
                s_gamma0: TriState::False,
                neg_s_gamma0: TriState::True,
                affine: None,
                positive_set_nonempty: true,
                positive_set_convex: TriState::True,
            })
        }
        AnalyticFamily::BrenierMobility { .. } => {
            // Concave bump vanishing at 0 and 1: the up-envelope is the
            // indicator of [0, 1], the negated down-envelope is -s there.
            let s_up = opaque1("mobility-up-envelope", |y| {
                if (0.0..=1.0).contains(&y) {
                    Finite(0.0)
                } else {
                    PosInf
                }
            });
            let sc = s.clone();
            let neg_s_down = opaque1("mobility-neg-down-envelope", move |y| {
                if (0.0..=1.0).contains(&y) {
                    sc.eval_slice(&[y]).neg()
                } else {
                    PosInf
                }
            });
            let s_up_conj = opaque1("mobility-up-restriction-conjugate", |u| {
                Finite(u.max(0.0))
            });
            let sc2 = s.clone();
            let neg_s_down_conj = opaque1("mobility-neg-down-conjugate", move |u| {
                let g = |y: f64| y * u + sc2.eval_slice(&[y]).to_f64();
                Finite(concave_max_1d(g, 0.0, 1.0))
            });
            Ok(ScalingAnalysis {
                s_up,
                neg_s_down,
                s_up_conj: Some(s_up_conj),
                neg_s_down_conj: Some(neg_s_down_conj),
                cam_neg_s_down: CamStatus::NonEmpty,
                hull: HullSet::One(HullSet1D::new(0.0, 1.0, false, false)),
                s_gamma0: TriState::False,
                neg_s_gamma0: TriState::True,
                affine: None,
                positive_set_nonempty: true,
                positive_set_convex: TriState::True,
            })
        }
        _ => {
            // Opaque or grid-backed scaling: oracle envelopes over the
            // supplied grid. The affine-minorant status stays undetermined
            // (emptiness is not grid-decidable), so only the oracle route
            // will run downstream.
            let spec = grid.ok_or(Error::GridRequired)?;
            let hull = hull_of_positive_set(s, spec)?;
            let sc = s.clone();
            let neg_s = FuncHandle::opaque(dim, Meta::unknown(), "negated-scaling", move |y| {
                sc.eval_slice(y).neg()
            })?;
            let env_up = envelope_up(s, Some(spec))?;
            let env_down = envelope_down(&neg_s, Some(spec))?;
            let cam = if env_down.cam_empty {
                CamStatus::Empty
            } else {
                CamStatus::Undetermined
            };
            Ok(ScalingAnalysis {
                s_up: env_up.handle,
                neg_s_down: env_down.handle,
                s_up_conj: None,
                neg_s_down_conj: None,
                cam_neg_s_down: cam,
                hull,
                s_gamma0: TriState::Unknown,
                neg_s_gamma0: TriState::Unknown,
                affine: None,
                positive_set_nonempty: true,
                positive_set_convex: TriState::Unknown,
            })
        }
    }
}

#[inline]
fn pow_q_pub(y: f64, q: f64) -> f64 {
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

fn concave_max_1d(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if g(m1) < g(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    g(0.5 * (lo + hi))
}

// ---- phi analysis ----------------------------------------------------------------

/// Grids for the oracle fallbacks of a report.
#[derive(Debug, Clone, Default)]
pub struct OracleGrids {
    /// Grid over the domain of phi (for its conjugate / hull when not
    /// analytic).
    pub phi: Option<GridSpec>,
    /// Grid over the domain of the scaling.
    pub scaling: Option<GridSpec>,
    /// Joint grid over (x, y) for the oracle perspective.
    pub joint: Option<GridSpec>,
}

/// Classifies the sign range of phi*. Analytic families are classified
/// exactly; otherwise the conjugate is scanned on a dual grid derived from
/// `grid`, counting a witness only when it clears ten times the oracle
/// tolerance at that spacing.
pub fn classify_phi_star(phi: &FuncHandle, grid: Option<&GridSpec>) -> Result<ConjugateSignClass> {
    if let Some(c) = classify_analytic(phi) {
        return Ok(c);
    }
    let spec = grid.ok_or(Error::UnknownConjugate)?;
    let samples = phi.sample(spec)?;
    if samples.values.iter().any(|v| v.is_neg_inf()) {
        return Err(Error::UnknownConjugate);
    }
    let dual = dual_spec_from_slopes(&samples, &spec.counts)?;
    // The discrete conjugate of a sampled function underestimates by at most
    // a curvature-times-spacing-squared quadrature gap at dual nodes whose
    // argmax is interior; a witness must clear ten times that.
    let h = spec.max_spacing();
    let mut curvature = 0.0f64;
    for idx in 0..spec.num_nodes() {
        let multi = spec.unflatten(idx);
        for axis in 0..spec.dim() {
            if multi[axis] == 0 || multi[axis] + 1 >= spec.counts[axis] {
                continue;
            }
            let mut l = multi.clone();
            let mut r = multi.clone();
            l[axis] -= 1;
            r[axis] += 1;
            if let (Finite(a), Finite(c), Finite(b)) = (
                samples.values[spec.flatten(&l)],
                samples.values[idx],
                samples.values[spec.flatten(&r)],
            ) {
                let ha = spec.spacing(axis);
                curvature = curvature.max((a - 2.0 * c + b).abs() / (ha * ha));
            }
        }
    }
    let margin = (10.0 * h * h * curvature.max(1.0)).max(1e-9);
    // Finite primal nodes with their flat coordinates; a conjugate value is
    // trusted only when its argmax is interior (values with boundary argmax
    // are truncation artifacts of the sampling box).
    let d = spec.dim();
    let mut coords = vec![0.0; d];
    let mut primal: Vec<(Vec<f64>, f64, bool)> = Vec::new();
    for (idx, v) in samples.values.iter().enumerate() {
        if let Finite(v) = v {
            spec.node_into(idx, &mut coords);
            let multi = spec.unflatten(idx);
            let interior = multi
                .iter()
                .zip(&spec.counts)
                .all(|(&i, &c)| i > 0 && i + 1 < c);
            primal.push((coords.clone(), *v, interior));
        }
    }
    if primal.is_empty() {
        return Err(Error::UnknownConjugate);
    }
    let mut neg: Option<Vec<f64>> = None;
    let mut pos: Option<Vec<f64>> = None;
    let mut zero = false;
    let mut xi = vec![0.0; d];
    for idx in 0..dual.num_nodes() {
        dual.node_into(idx, &mut xi);
        let mut best = f64::NEG_INFINITY;
        let mut best_interior = false;
        for (x, fv, interior) in &primal {
            let cand = x.iter().zip(&xi).map(|(a, b)| a * b).sum::<f64>() - fv;
            if cand > best {
                best = cand;
                best_interior = *interior;
            }
        }
        if !best_interior {
            continue;
        }
        if best < -margin && neg.is_none() {
            neg = Some(xi.clone());
        }
        if best > margin && pos.is_none() {
            pos = Some(xi.clone());
        }
        if best.abs() <= margin {
            zero = true;
        }
    }
    let class = match (&neg, &pos) {
        (Some(_), Some(_)) => SignClass::Mixed,
        (Some(_), None) => SignClass::NonPositive,
        (None, Some(_)) => SignClass::NonNegative,
        (None, None) => SignClass::ZeroInfty,
    };
    Ok(ConjugateSignClass {
        class,
        negative_witness: neg,
        positive_witness: pos,
        zero_attained: if zero { TriState::True } else { TriState::Unknown },
    })
}

fn classify_analytic(phi: &FuncHandle) -> Option<ConjugateSignClass> {
    let d = phi.dim();
    let origin = vec![0.0; d];
    let radial = |r: f64| {
        let mut x = vec![0.0; d];
        x[0] = r;
        x
    };
    match &phi.family {
        AnalyticFamily::NormPowerShifted { p, mult, shift, .. } => {
            if *mult == 0.0 || *p == 1.0 {
                // Constant or plain norm: conjugate is a shifted indicator.
                let c = -shift;
                return Some(if c < 0.0 {
                    ConjugateSignClass {
                        class: SignClass::NonPositive,
                        negative_witness: Some(origin),
                        positive_witness: None,
                        zero_attained: TriState::False,
                    }
                } else if c == 0.0 {
                    ConjugateSignClass {
                        class: SignClass::ZeroInfty,
                        negative_witness: None,
                        positive_witness: None,
                        zero_attained: TriState::True,
                    }
                } else {
                    ConjugateSignClass {
                        class: SignClass::NonNegative,
                        negative_witness: None,
                        positive_witness: Some(origin),
                        zero_attained: TriState::False,
                    }
                });
            }
            let ps = conjugate_exponent(*p);
            let scale = ps * mult.powf(ps - 1.0);
            Some(if *shift > 0.0 {
                // Conjugate range [-shift, +inf): mixed.
                let r_pos = (2.0 * shift * scale).powf(1.0 / ps);
                ConjugateSignClass {
                    class: SignClass::Mixed,
                    negative_witness: Some(origin),
                    positive_witness: Some(radial(r_pos)),
                    zero_attained: TriState::True,
                }
            } else if *shift == 0.0 {
                ConjugateSignClass {
                    class: SignClass::NonNegative,
                    negative_witness: None,
                    positive_witness: Some(radial(1.0)),
                    zero_attained: TriState::True,
                }
            } else {
                ConjugateSignClass {
                    class: SignClass::NonNegative,
                    negative_witness: None,
                    positive_witness: Some(origin),
                    zero_attained: TriState::False,
                }
            })
        }
        AnalyticFamily::Huber { .. } => Some(ConjugateSignClass {
            class: SignClass::NonPositive,
            negative_witness: Some(origin),
            positive_witness: None,
            zero_attained: TriState::True,
        }),
        AnalyticFamily::Berhu { alpha, p, .. } => {
            let ps = conjugate_exponent(*p);
            let r = (2.0f64).powf(1.0 / ps) * alpha;
            Some(ConjugateSignClass {
                class: SignClass::NonNegative,
                negative_witness: None,
                positive_witness: Some(radial(r)),
                zero_attained: TriState::True,
            })
        }
        AnalyticFamily::Affine { slope, intercept } => {
            let b = *intercept;
            Some(if b > 0.0 {
                ConjugateSignClass {
                    class: SignClass::NonPositive,
                    negative_witness: Some(slope.clone()),
                    positive_witness: None,
                    zero_attained: TriState::False,
                }
            } else if b == 0.0 {
                ConjugateSignClass {
                    class: SignClass::ZeroInfty,
                    negative_witness: None,
                    positive_witness: None,
                    zero_attained: TriState::True,
                }
            } else {
                ConjugateSignClass {
                    class: SignClass::NonNegative,
                    negative_witness: None,
                    positive_witness: Some(slope.clone()),
                    zero_attained: TriState::False,
                }
            })
        }
        AnalyticFamily::RadialIndicator {
            lo,
            hi,
            base_p,
            base_mult,
            base_shift,
            ..
        } => {
            if !hi.is_finite() {
                return None;
            }
            // The conjugate is finite everywhere with infimum minus the
            // chord level of the hull at the origin, which for an increasing
            // radial base is the base value at the inner radius.
            let val0 = base_mult * pow_p(*lo, *base_p) / base_p + base_shift;
            let conj = phi.conjugate_analytic()?;
            // Positive witness: march outward until the conjugate clears 1.
            let mut r = hi.max(1.0);
            let mut pos = None;
            for _ in 0..200 {
                let v = conj.eval_slice(&radial(r));
                if let Finite(v) = v {
                    if v > 1.0 {
                        pos = Some(radial(r));
                        break;
                    }
                }
                r *= 2.0;
            }
            let pos = pos?;
            Some(if val0 > 0.0 {
                ConjugateSignClass {
                    class: SignClass::Mixed,
                    negative_witness: Some(origin),
                    positive_witness: Some(pos),
                    zero_attained: TriState::True,
                }
            } else if val0 == 0.0 {
                ConjugateSignClass {
                    class: SignClass::NonNegative,
                    negative_witness: None,
                    positive_witness: Some(pos),
                    zero_attained: TriState::True,
                }
            } else {
                ConjugateSignClass {
                    class: SignClass::NonNegative,
                    negative_witness: None,
                    positive_witness: Some(pos),
                    zero_attained: TriState::False,
                }
            })
        }
        AnalyticFamily::MaxWithZero { inner } => {
            // Positive part of a norm power with negative shift (the
            // Berhu-conjugate pattern): conjugate is the Berhu function.
            if let AnalyticFamily::NormPowerShifted { p, mult, shift, .. } = inner.as_ref() {
                if *shift < 0.0 && *mult == 1.0 && *p > 1.0 {
                    let ps = conjugate_exponent(*p);
                    let alpha = (-shift * *p).powf(1.0 / *p);
                    let knot = alpha.powf(1.0 / (ps - 1.0));
                    return Some(ConjugateSignClass {
                        class: SignClass::NonNegative,
                        negative_witness: None,
                        positive_witness: Some(radial(2.0 * knot)),
                        zero_attained: TriState::True,
                    });
                }
            }
            None
        }
        _ => None,
    }
}

// ---- preperspective --------------------------------------------------------------

/// The raw construction: s(y) phi(x / s(y)) when 0 < s(y) < +inf, +inf
/// elsewhere.
pub fn preperspective_eval(
    phi: &FuncHandle,
    s: &FuncHandle,
    x: &Point,
    y: &Point,
) -> Result<ExtReal> {
    let sy = s.eval(y)?;
    match sy {
        Finite(v) if v > 0.0 && v.is_finite() => {
            let scaled: Vec<f64> = x.coords.iter().map(|c| c / v).collect();
            let inner = phi.eval(&Point::new(scaled)?)?;
            ExtReal::scale(v, inner)
        }
        _ => Ok(PosInf),
    }
}

/// The preperspective is proper iff phi is proper and the scaling takes a
/// strictly positive finite value.
pub fn preperspective_properness(phi: &FuncHandle, s: &FuncHandle) -> bool {
    let phi_proper = match phi.meta.is_proper {
        TriState::True => true,
        TriState::False => false,
        TriState::Unknown => probe_proper(phi),
    };
    phi_proper && probe_positive(s)
}

fn probe_proper(f: &FuncHandle) -> bool {
    let mut saw_finite = false;
    for x in probe_points(f.dim()) {
        match f.eval_slice(&x) {
            NegInf => return false,
            Finite(_) => saw_finite = true,
            PosInf => {}
        }
    }
    saw_finite
}

fn probe_positive(s: &FuncHandle) -> bool {
    if let Some(inf) = s.analytic_infimum() {
        // A scaling without analytic supremum info still answers through
        // probing below.
        let _ = inf;
    }
    match crate::envelopes::positive_set_hull_analytic(s) {
        Some(_) => return true,
        None => {}
    }
    probe_points(s.dim())
        .into_iter()
        .any(|y| matches!(s.eval_slice(&y), Finite(v) if v > 0.0))
}

fn probe_points(dim: usize) -> Vec<Vec<f64>> {
    let line: Vec<f64> = (-40..=40).map(|i| i as f64 * 0.2).collect();
    match dim {
        1 => line.iter().map(|&v| vec![v]).collect(),
        2 => {
            let mut out = Vec::new();
            for &a in line.iter().step_by(4) {
                for &b in line.iter().step_by(4) {
                    out.push(vec![a, b]);
                }
            }
            out
        }
        _ => {
            let mut out = Vec::new();
            for &a in line.iter().step_by(8) {
                for &b in line.iter().step_by(8) {
                    for &c in line.iter().step_by(8) {
                        out.push(vec![a, b, c]);
                    }
                }
            }
            out
        }
    }
}

// ---- convexity conditions --------------------------------------------------------

/// The three sufficient conditions for convexity of the preperspective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvexityConditions {
    /// Subhomogeneous phi with proper convex scaling and convex positivity
    /// set.
    pub p30_iii: TriState,
    /// phi(0) <= 0 with proper convex negated scaling.
    pub p30_ii: TriState,
    /// Affine scaling.
    pub p30_i: TriState,
}

/// Checks each sufficient convexity condition from structure; unknown
/// metadata yields `Unknown`, never a false positive. The subhomogeneity of
/// phi is decided through the sign range of its conjugate when available and
/// refuted by sampling otherwise.
pub fn convexity_conditions(phi: &FuncHandle, s: &FuncHandle) -> ConvexityConditions {
    let p30_i = match &s.family {
        AnalyticFamily::Affine { .. } => TriState::True,
        AnalyticFamily::Opaque { .. } | AnalyticFamily::GridBacked { .. } => TriState::Unknown,
        _ => TriState::False,
    };

    let phi0 = {
        let origin = Point::new(vec![0.0; phi.dim()]).expect("valid dim");
        phi.eval(&origin).ok()
    };
    let neg_s_convex_proper = match &s.family {
        AnalyticFamily::Affine { .. } => TriState::True,
        AnalyticFamily::LogMeanScaling | AnalyticFamily::GeoMeanScaling => TriState::True,
        AnalyticFamily::PowerScaling { q, below } => {
            if *below == BelowZero::NegInf && *q <= 1.0 {
                TriState::True
            } else {
                TriState::False
            }
        }
        AnalyticFamily::BrenierMobility { .. } => TriState::True,
        AnalyticFamily::Opaque { .. } | AnalyticFamily::GridBacked { .. } => TriState::Unknown,
        _ => TriState::False,
    };
    let p30_ii = match (phi0, neg_s_convex_proper) {
        (Some(v), TriState::True) if v <= Finite(0.0) => TriState::True,
        (Some(v), _) if v > Finite(0.0) => TriState::False,
        (_, TriState::False) => TriState::False,
        _ => TriState::Unknown,
    };

    let subhom = match classify_phi_star(phi, None) {
        Ok(c) => match c.class {
            SignClass::NonPositive | SignClass::ZeroInfty => TriState::True,
            SignClass::NonNegative | SignClass::Mixed => TriState::False,
        },
        Err(_) => sampled_subhomogeneity(phi),
    };
    let s_convex_proper = match &s.family {
        AnalyticFamily::Affine { .. }
        | AnalyticFamily::ClippedQuadraticScaling { .. }
        | AnalyticFamily::MaxZeroAffine => TriState::True,
        AnalyticFamily::PowerScaling { q, below } => {
            if *below == BelowZero::PosInf && *q >= 1.0 {
                TriState::True
            } else {
                TriState::False
            }
        }
        AnalyticFamily::Opaque { .. } | AnalyticFamily::GridBacked { .. } => TriState::Unknown,
        _ => TriState::False,
    };
    let s_pos_convex = match &s.family {
        AnalyticFamily::ClippedQuadraticScaling { .. } => TriState::False,
        AnalyticFamily::Affine { .. }
        | AnalyticFamily::PowerScaling { .. }
        | AnalyticFamily::MaxZeroAffine
        | AnalyticFamily::LogMeanScaling
        | AnalyticFamily::GeoMeanScaling
        | AnalyticFamily::BrenierMobility { .. } => TriState::True,
        _ => TriState::Unknown,
    };
    let p30_iii = and3(subhom, s_convex_proper, s_pos_convex);

    ConvexityConditions {
        p30_iii,
        p30_ii,
        p30_i,
    }
}

fn and3(a: TriState, b: TriState, c: TriState) -> TriState {
    let vals = [a, b, c];
    if vals.iter().any(|v| *v == TriState::False) {
        TriState::False
    } else if vals.iter().all(|v| *v == TriState::True) {
        TriState::True
    } else {
        TriState::Unknown
    }
}

/// Sampled refutation of subhomogeneity: phi(lambda x) <= lambda phi(x) on
/// 1000 random pairs. Can only refute (`False`) or stay `Unknown`.
fn sampled_subhomogeneity(phi: &FuncHandle) -> TriState {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_1001);
    let d = phi.dim();
    for _ in 0..1000 {
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let lambda: f64 = rng.gen_range(1.0001..20.0);
        let fx = phi.eval_slice(&x);
        if let Finite(v) = fx {
            let lx: Vec<f64> = x.iter().map(|c| c * lambda).collect();
            match phi.eval_slice(&lx) {
                Finite(vl) => {
                    if vl > lambda * v + 1e-9 {
                        return TriState::False;
                    }
                }
                PosInf => return TriState::False,
                NegInf => {}
            }
        }
    }
    TriState::Unknown
}

// ---- the report ---------------------------------------------------------------

/// One recorded hypothesis check.
#[derive(Debug, Clone, Serialize)]
pub struct HypothesisCheck {
    pub name: String,
    pub pass: bool,
    pub witness: Option<String>,
}

#[derive(Debug, Clone)]
struct MixedParts {
    lower: FuncHandle,
    upper: FuncHandle,
    rec_lower: FuncHandle,
    rec_upper: FuncHandle,
}

/// Classification plus evaluators for a (phi, s) pair.
#[derive(Debug, Clone)]
pub struct PerspectiveReport {
    pub branch: Branch,
    pub sign_class: ConjugateSignClass,
    pub cam_nonempty: bool,
    /// The positivity set of the scaling is nonempty (otherwise everything
    /// is +inf).
    pub positive_set_nonempty: bool,
    pub scaling: ScalingAnalysis,
    pub hypotheses: Vec<HypothesisCheck>,
    phi: FuncHandle,
    s: FuncHandle,
    phi_breve: FuncHandle,
    rec_phi_breve: FuncHandle,
    phi_conj: Option<FuncHandle>,
    zero_support: Option<FuncHandle>,
    mixed: Option<MixedParts>,
    oracle_persp: Option<FuncHandle>,
}

impl PerspectiveReport {
    /// Builds the full classification for a pair. `grids` backs the oracle
    /// fallbacks for non-analytic inputs.
    pub fn new(phi: &FuncHandle, s: &FuncHandle, grids: Option<&OracleGrids>) -> Result<Self> {
        let empty = OracleGrids::default();
        let grids = grids.unwrap_or(&empty);
        let mut hypotheses = Vec::new();

        if !preperspective_properness(phi, s) {
            // Improper pair: the perspective is identically +-inf.
            hypotheses.push(HypothesisCheck {
                name: "preperspective proper".into(),
                pass: false,
                witness: None,
            });
            let scaling = scaling_analysis(s, grids.scaling.as_ref()).unwrap_or(ScalingAnalysis {
                s_up: opaque_n(s.dim(), "unknown", |_| PosInf),
                neg_s_down: opaque_n(s.dim(), "unknown", |_| PosInf),
                s_up_conj: None,
                neg_s_down_conj: None,
                cam_neg_s_down: CamStatus::Undetermined,
                hull: HullSet::One(HullSet1D::new(0.0, 0.0, false, false)),
                s_gamma0: TriState::Unknown,
                neg_s_gamma0: TriState::Unknown,
                affine: None,
                positive_set_nonempty: false,
                positive_set_convex: TriState::Unknown,
            });
            let sign_class = ConjugateSignClass {
                class: SignClass::ZeroInfty,
                negative_witness: None,
                positive_witness: None,
                zero_attained: TriState::Unknown,
            };
            return Ok(PerspectiveReport {
                branch: Branch::Degenerate,
                sign_class,
                cam_nonempty: false,
                positive_set_nonempty: false,
                scaling,
                hypotheses,
                phi: phi.clone(),
                s: s.clone(),
                phi_breve: phi.clone(),
                rec_phi_breve: opaque_n(phi.dim(), "unknown-recession", |_| PosInf),
                phi_conj: None,
                zero_support: None,
                mixed: None,
                oracle_persp: None,
            });
        }
        hypotheses.push(HypothesisCheck {
            name: "preperspective proper".into(),
            pass: true,
            witness: None,
        });

        let scaling = scaling_analysis(s, grids.scaling.as_ref())?;
        let sign_class = classify_phi_star(phi, grids.phi.as_ref())?;
        hypotheses.push(HypothesisCheck {
            name: "conjugate sign class".into(),
            pass: true,
            witness: Some(format!("{:?}", sign_class.class)),
        });

        // Affine-minorant disjunction for the preperspective.
        let first_disjunct = matches!(
            sign_class.class,
            SignClass::NonPositive | SignClass::ZeroInfty | SignClass::Mixed
        ) || sign_class.zero_attained == TriState::True;
        let cam_nonempty = first_disjunct
            || matches!(scaling.cam_neg_s_down, CamStatus::NonEmpty);
        hypotheses.push(HypothesisCheck {
            name: "affine minorant exists".into(),
            pass: cam_nonempty,
            witness: Some(format!(
                "conjugate reaches ]-inf,0]: {first_disjunct}; scaling minorant: {:?}",
                scaling.cam_neg_s_down
            )),
        });

        let degenerate = !first_disjunct && matches!(scaling.cam_neg_s_down, CamStatus::Empty);

        // Branch dispatch, most specific first.
        let phi_certified = phi.meta.certified_gamma0();
        let branch = if degenerate {
            Branch::Degenerate
        } else if scaling.affine.is_some() {
            Branch::AffineScaling
        } else {
            match sign_class.class {
                SignClass::NonPositive => {
                    if phi_certified && scaling.s_gamma0.is_true() {
                        Branch::ScalingDirect
                    } else {
                        Branch::NegConjUpEnvelope
                    }
                }
                SignClass::ZeroInfty => {
                    if phi_certified {
                        Branch::HomogeneousIndicator
                    } else {
                        Branch::ZeroConjIndicator
                    }
                }
                SignClass::NonNegative => {
                    if phi_certified && scaling.neg_s_gamma0.is_true() {
                        Branch::ConcaveDirect
                    } else {
                        match scaling.cam_neg_s_down {
                            CamStatus::NonEmpty => Branch::PosConjDownEnvelope,
                            CamStatus::Empty => Branch::PosConjSupport,
                            CamStatus::Undetermined => Branch::OracleOnly,
                        }
                    }
                }
                SignClass::Mixed => match scaling.cam_neg_s_down {
                    CamStatus::Empty => Branch::MixedUpEnvelope,
                    CamStatus::NonEmpty => Branch::MixedFourCase,
                    CamStatus::Undetermined => Branch::OracleOnly,
                },
            }
        };
        hypotheses.push(HypothesisCheck {
            name: "branch".into(),
            pass: !degenerate,
            witness: Some(branch.tag().into()),
        });

        // Build only the pieces the dispatched branch evaluates.
        let needs_breve = matches!(
            branch,
            Branch::AffineScaling
                | Branch::ScalingDirect
                | Branch::ConcaveDirect
                | Branch::NegConjUpEnvelope
                | Branch::PosConjDownEnvelope
        );
        let needs_rec = needs_breve
            || matches!(
                branch,
                Branch::HomogeneousIndicator | Branch::ZeroConjIndicator | Branch::MixedFourCase
            );
        let (phi_breve, phi_conj, mixed) = build_phi_parts(phi, &sign_class, grids, needs_breve)?;
        let rec_phi_breve = if needs_rec {
            build_recession(phi, &phi_breve, grids)?
        } else {
            opaque_n(phi.dim(), "unused-recession", |_| PosInf)
        };

        // Supports and oracle fallback by branch.
        let zero_support = if branch == Branch::PosConjSupport {
            Some(zero_level_support(phi, &sign_class)?)
        } else {
            None
        };
        let mixed = if matches!(branch, Branch::MixedUpEnvelope | Branch::MixedFourCase) {
            Some(mixed.ok_or(Error::UnknownConjugate)?)
        } else {
            None
        };
        let oracle_persp = if branch == Branch::OracleOnly {
            match grids.joint.as_ref() {
                Some(spec) => Some(build_oracle_perspective(phi, s, spec)?),
                None => None,
            }
        } else {
            None
        };

        Ok(PerspectiveReport {
            branch,
            sign_class,
            cam_nonempty,
            positive_set_nonempty: true,
            scaling,
            hypotheses,
            phi: phi.clone(),
            s: s.clone(),
            phi_breve,
            rec_phi_breve,
            phi_conj,
            zero_support,
            mixed,
            oracle_persp,
        })
    }

    pub fn branch_tag(&self) -> &'static str {
        self.branch.tag()
    }

    /// The raw preperspective at (x, y).
    pub fn preperspective(&self, x: &Point, y: &Point) -> Result<ExtReal> {
        preperspective_eval(&self.phi, &self.s, x, y)
    }

    /// The perspective (largest lsc convex minorant of the preperspective)
    /// at (x, y), through the dispatched closed form.
    pub fn perspective(&self, x: &Point, y: &Point) -> Result<ExtReal> {
        if !self.positive_set_nonempty {
            return Ok(PosInf);
        }
        match self.branch {
            Branch::Degenerate => {
                // No affine minorant: values in {-inf, +inf}, -inf exactly on
                // the closed hull of the scaling's positivity set (times the
                // hull of dom phi, which is full for every family reaching
                // this branch).
                Ok(if self.scaling.hull.contains(y.as_slice()) {
                    NegInf
                } else {
                    PosInf
                })
            }
            Branch::OracleOnly => match &self.oracle_persp {
                Some(h) => {
                    let joint: Vec<f64> = x
                        .coords
                        .iter()
                        .chain(&y.coords)
                        .copied()
                        .collect();
                    Ok(h.eval_slice(&joint))
                }
                None => Err(Error::GridRequired),
            },
            Branch::AffineScaling => {
                let t = match self.s.eval(y)? {
                    Finite(v) => v,
                    PosInf => return Ok(PosInf),
                    NegInf => return Ok(PosInf),
                };
                if t > 0.0 {
                    self.scaled_breve(t, x)
                } else if t == 0.0 {
                    self.rec_phi_breve.eval(x)
                } else {
                    Ok(PosInf)
                }
            }
            Branch::ScalingDirect => {
                let sy = self.s.eval(y)?;
                match sy {
                    Finite(v) if v > 0.0 => self.scaled_breve(v, x),
                    PosInf => Ok(PosInf),
                    _ => {
                        if self.scaling.hull.contains(y.as_slice()) {
                            self.rec_phi_breve.eval(x)
                        } else {
                            Ok(PosInf)
                        }
                    }
                }
            }
            Branch::HomogeneousIndicator | Branch::ZeroConjIndicator => {
                if self.scaling.hull.contains(y.as_slice()) {
                    self.rec_phi_breve.eval(x)
                } else {
                    Ok(PosInf)
                }
            }
            Branch::ConcaveDirect => {
                let sy = self.s.eval(y)?;
                match sy {
                    Finite(v) if v > 0.0 => self.scaled_breve(v, x),
                    Finite(v) if v == 0.0 => self.rec_phi_breve.eval(x),
                    _ => Ok(PosInf),
                }
            }
            Branch::NegConjUpEnvelope => {
                let su = self.scaling.s_up.eval(y)?;
                match su {
                    Finite(v) if v > 0.0 => self.scaled_breve(v, x),
                    Finite(_) => self.rec_phi_breve.eval(x),
                    _ => Ok(PosInf),
                }
            }
            Branch::PosConjSupport => {
                if self.scaling.hull.contains(y.as_slice()) {
                    self.zero_support
                        .as_ref()
                        .ok_or(Error::UnknownConjugate)?
                        .eval(x)
                } else {
                    Ok(PosInf)
                }
            }
            Branch::PosConjDownEnvelope => {
                let nd = self.scaling.neg_s_down.eval(y)?;
                match nd {
                    Finite(v) if v < 0.0 => self.scaled_breve(-v, x),
                    Finite(_) => self.rec_phi_breve.eval(x),
                    NegInf => Ok(PosInf),
                    PosInf => Ok(PosInf),
                }
            }
            Branch::MixedUpEnvelope => {
                let m = self.mixed.as_ref().expect("mixed parts present");
                let su = self.scaling.s_up.eval(y)?;
                match su {
                    Finite(v) if v > 0.0 => scaled_eval(&m.lower, v, x),
                    Finite(_) => m.rec_lower.eval(x),
                    _ => Ok(PosInf),
                }
            }
            Branch::MixedFourCase => {
                let m = self.mixed.as_ref().expect("mixed parts present");
                let su = self.scaling.s_up.eval(y)?;
                let nd = self.scaling.neg_s_down.eval(y)?;
                match su {
                    Finite(v) if v > 0.0 => {
                        let first = scaled_eval(&m.lower, v, x)?;
                        let second = match nd {
                            Finite(w) if w < 0.0 => scaled_eval(&m.upper, -w, x)?,
                            Finite(_) => m.rec_upper.eval(x)?,
                            _ => NegInf,
                        };
                        Ok(first.max(second))
                    }
                    Finite(_) => match nd {
                        Finite(w) if w < 0.0 => {
                            let first = m.rec_lower.eval(x)?;
                            let second = scaled_eval(&m.upper, -w, x)?;
                            Ok(first.max(second))
                        }
                        Finite(_) => self.rec_phi_breve.eval(x),
                        _ => Ok(PosInf),
                    },
                    _ => Ok(PosInf),
                }
            }
        }
    }

    fn scaled_breve(&self, t: f64, x: &Point) -> Result<ExtReal> {
        scaled_eval(&self.phi_breve, t, x)
    }

    /// The conjugate of the preperspective at (x*, y*), dispatched on the
    /// sign of phi*(x*).
    pub fn preperspective_conjugate(&self, xstar: &Point, ystar: &Point) -> Result<ExtReal> {
        if !self.positive_set_nonempty {
            return Ok(NegInf);
        }
        let conj = self.phi_conj.as_ref().ok_or(Error::UnknownConjugate)?;
        let c = conj.eval(xstar)?;
        if let Some((w, b)) = &self.scaling.affine {
            // Affine scaling: the conjugate is an indicator over multiples of
            // the slope below -phi*(x*), offset by the anchor pairing.
            let c = match c {
                PosInf => return Ok(PosInf),
                NegInf => return Ok(NegInf),
                Finite(v) => v,
            };
            let ww: f64 = w.iter().map(|a| a * a).sum();
            let beta = w.iter().zip(&ystar.coords).map(|(a, b)| a * b).sum::<f64>() / ww;
            let aligned = ystar
                .coords
                .iter()
                .zip(w)
                .all(|(ys, wi)| (ys - beta * wi).abs() <= 1e-9 * (1.0 + ys.abs()));
            return Ok(if aligned && beta <= -c + 1e-12 {
                Finite(-beta * b)
            } else {
                PosInf
            });
        }
        match c {
            PosInf => Ok(PosInf),
            NegInf => Ok(NegInf),
            Finite(v) if v < 0.0 => {
                let g = self
                    .scaling
                    .s_up_conj
                    .as_ref()
                    .ok_or(Error::UnknownConjugate)?;
                let arg: Vec<f64> = ystar.coords.iter().map(|u| u / -v).collect();
                let inner = g.eval(&Point::new(arg)?)?;
                ExtReal::scale(-v, inner)
            }
            Finite(v) if v > 0.0 => {
                let g = self
                    .scaling
                    .neg_s_down_conj
                    .as_ref()
                    .ok_or(Error::UnknownConjugate)?;
                let arg: Vec<f64> = ystar.coords.iter().map(|u| u / v).collect();
                let inner = g.eval(&Point::new(arg)?)?;
                ExtReal::scale(v, inner)
            }
            Finite(_) => Ok(self.scaling.hull.support(ystar.as_slice())),
        }
    }

    /// JSON rendering of the classification.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "branch": self.branch.tag(),
            "sign_class": self.sign_class,
            "cam": self.cam_nonempty,
            "hypotheses_checked": self.hypotheses,
        })
    }
}

fn scaled_eval(f: &FuncHandle, t: f64, x: &Point) -> Result<ExtReal> {
    let scaled: Vec<f64> = x.coords.iter().map(|c| c / t).collect();
    let inner = f.eval(&Point::new(scaled)?)?;
    ExtReal::scale(t, inner)
}

/// phi-breve (the lsc convex hull), the conjugate handle, and the mixed
/// envelope pair when phi* takes both signs.
fn build_phi_parts(
    phi: &FuncHandle,
    sign: &ConjugateSignClass,
    grids: &OracleGrids,
    needs_breve: bool,
) -> Result<(FuncHandle, Option<FuncHandle>, Option<MixedParts>)> {
    let analytic_conj = phi.conjugate_analytic();
    let mixed = mixed_envelope_pair(phi).map(|(lower, upper, rec_lower, rec_upper)| MixedParts {
        lower,
        upper,
        rec_lower,
        rec_upper,
    });

    let phi_breve = if phi.meta.certified_gamma0() || !needs_breve {
        phi.clone()
    } else if let Some(m) = &mixed {
        // The hull of a function whose conjugate takes negative values is
        // the max of the conjugates of the two envelopes of its conjugate.
        if sign.negative_witness.is_some() {
            let (lo, up) = (m.lower.clone(), m.upper.clone());
            FuncHandle::opaque(phi.dim(), Meta::gamma0(), "hull-via-envelope-max", move |x| {
                lo.eval_slice(x).max(up.eval_slice(x))
            })?
        } else {
            oracle_hull(phi, grids)?
        }
    } else {
        oracle_hull(phi, grids)?
    };

    let conj = match analytic_conj {
        Some(c) => Some(c),
        None => match grids.phi.as_ref() {
            Some(spec) => {
                let samples = phi.sample(spec)?;
                let dual = dual_spec_from_slopes(&samples, &spec.counts)?;
                let out = conjugate_grid(&samples, &dual)?;
                Some(FuncHandle::grid_backed(
                    Arc::new(out.grid),
                    Meta::gamma0(),
                ))
            }
            None => None,
        },
    };
    Ok((phi_breve, conj, mixed))
}

fn oracle_hull(phi: &FuncHandle, grids: &OracleGrids) -> Result<FuncHandle> {
    let spec = grids.phi.as_ref().ok_or(Error::GridRequired)?;
    let samples = phi.sample(spec)?;
    let dual = dual_spec_from_slopes(&samples, &spec.counts)?;
    let bi = biconjugate_grid(&samples, &dual)?;
    Ok(FuncHandle::grid_backed(Arc::new(bi.grid), Meta::gamma0()))
}

/// Recession function of phi-breve: family closed form when available,
/// numeric ray limits otherwise.
fn build_recession(
    phi: &FuncHandle,
    phi_breve: &FuncHandle,
    _grids: &OracleGrids,
) -> Result<FuncHandle> {
    if let Some(r) = phi.recession_analytic() {
        return Ok(r);
    }
    let hull = phi_breve.clone();
    let dim = phi.dim();
    Ok(FuncHandle::opaque(
        dim,
        Meta::gamma0(),
        "numeric-recession",
        move |x| {
            let base = Point::new(vec![0.0; dim]).expect("dim ok");
            let dir = match Point::new(x.to_vec()) {
                Ok(p) => p,
                Err(_) => return PosInf,
            };
            crate::transform::recession_numeric(&hull, &dir, &base, 65536.0)
                .unwrap_or(PosInf)
        },
    )?)
}

/// Support function of the zero level set of phi*, for the nonnegative
/// conjugate branch without scaling minorant.
fn zero_level_support(phi: &FuncHandle, sign: &ConjugateSignClass) -> Result<FuncHandle> {
    if sign.zero_attained != TriState::True {
        return Err(Error::HypothesisViolated(
            "zero level of the conjugate not attained".into(),
        ));
    }
    match &phi.family {
        AnalyticFamily::NormPowerShifted { norm, p, mult, shift } => {
            if *shift == 0.0 && *mult > 0.0 && *p > 1.0 {
                // Conjugate vanishes only at the origin.
                return Ok(FuncHandle::constant(phi.dim(), 0.0)?);
            }
            let _ = norm;
            Err(Error::UnknownConjugate)
        }
        AnalyticFamily::Berhu { norm, alpha, .. } => {
            // Conjugate vanishes on the dual ball of radius alpha; its
            // support function is alpha times the primal norm.
            FuncHandle::norm_power(phi.dim(), *norm, 1.0, *alpha, 0.0)
        }
        AnalyticFamily::MaxWithZero { inner } => {
            if let AnalyticFamily::NormPowerShifted { .. } = inner.as_ref() {
                // Berhu-conjugate pattern: conjugate is a Berhu function,
                // vanishing only at the origin.
                return Ok(FuncHandle::constant(phi.dim(), 0.0)?);
            }
            Err(Error::UnknownConjugate)
        }
        AnalyticFamily::RadialIndicator { norm, .. } => {
            // Zero level of the conjugate is the dual ball through the
            // crossing radius; bisection as in the mixed pair.
            let conj = phi.conjugate_analytic().ok_or(Error::UnknownConjugate)?;
            let dim = phi.dim();
            let radial = |r: f64| {
                let mut x = vec![0.0; dim];
                x[0] = r;
                x
            };
            let mut lo = 0.0;
            let mut hi = 1.0;
            while conj.eval_slice(&radial(hi)) <= Finite(0.0) && hi < 1e12 {
                hi *= 2.0;
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if conj.eval_slice(&radial(mid)) <= Finite(0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            FuncHandle::norm_power(dim, *norm, 1.0, 0.5 * (lo + hi), 0.0)
        }
        _ => Err(Error::UnknownConjugate),
    }
}

/// Grid-backed perspective: biconjugate of the sampled preperspective over a
/// joint (x, y) grid.
fn build_oracle_perspective(
    phi: &FuncHandle,
    s: &FuncHandle,
    joint: &GridSpec,
) -> Result<FuncHandle> {
    let dx = phi.dim();
    let dy = s.dim();
    if joint.dim() != dx + dy {
        return Err(Error::DimensionMismatch {
            expected: dx + dy,
            got: joint.dim(),
        });
    }
    let mut values = Vec::with_capacity(joint.num_nodes());
    let mut coords = vec![0.0; joint.dim()];
    for i in 0..joint.num_nodes() {
        joint.node_into(i, &mut coords);
        let x = Point::new(coords[..dx].to_vec())?;
        let y = Point::new(coords[dx..].to_vec())?;
        values.push(preperspective_eval(phi, s, &x, &y)?);
    }
    let samples = crate::funcs::GridFunction::new(joint.clone(), values)?;
    let dual = dual_spec_from_slopes(&samples, &joint.counts)?;
    let bi = biconjugate_grid(&samples, &dual)?;
    Ok(FuncHandle::grid_backed(Arc::new(bi.grid), Meta::gamma0()))
}

// ---- free-function front ends -------------------------------------------------

/// Affine-minorant test for the preperspective: the conjugate of phi reaches
/// ]-inf, 0], or the negated scaling's restriction admits an affine
/// minorant.
pub fn cam_nonempty(phi: &FuncHandle, s: &FuncHandle, grids: Option<&OracleGrids>) -> Result<bool> {
    let empty = OracleGrids::default();
    let g = grids.unwrap_or(&empty);
    let sign = classify_phi_star(phi, g.phi.as_ref())?;
    let first = matches!(
        sign.class,
        SignClass::NonPositive | SignClass::ZeroInfty | SignClass::Mixed
    ) || sign.zero_attained == TriState::True;
    if first {
        return Ok(true);
    }
    let scaling = scaling_analysis(s, g.scaling.as_ref())?;
    match scaling.cam_neg_s_down {
        CamStatus::NonEmpty => Ok(true),
        CamStatus::Empty => Ok(false),
        CamStatus::Undetermined => Err(Error::UnknownConjugate),
    }
}

/// Perspective value via a fresh report (analytic routes only).
pub fn perspective_eval(
    phi: &FuncHandle,
    s: &FuncHandle,
    x: &Point,
    y: &Point,
) -> Result<ExtReal> {
    PerspectiveReport::new(phi, s, None)?.perspective(x, y)
}

/// Dispatched branch via a fresh report.
pub fn perspective_case(phi: &FuncHandle, s: &FuncHandle) -> Result<Branch> {
    Ok(PerspectiveReport::new(phi, s, None)?.branch)
}

/// Conjugate of the preperspective via a fresh report.
pub fn preperspective_conjugate_eval(
    phi: &FuncHandle,
    s: &FuncHandle,
    xstar: &Point,
    ystar: &Point,
) -> Result<ExtReal> {
    PerspectiveReport::new(phi, s, None)?.preperspective_conjugate(xstar, ystar)
}

// ---- Delta comparisons --------------------------------------------------------

/// Which classical construction to compare against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaVariant {
    /// Defined under: phi not its recession, phi(0) <= 0, negated scaling
    /// convex lsc proper. Equals the perspective there.
    DeltaOne,
    /// Defined under: phi above its recession (strictly somewhere), scaling
    /// convex lsc proper. A minorant of the perspective, strict where the
    /// scaling vanishes outside the positivity hull.
    DeltaTwo,
}

#[derive(Debug, Clone, Serialize)]
pub struct DeltaRow {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub delta: ExtReal,
    pub perspective: ExtReal,
    pub equal: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DeltaReport {
    pub variant: DeltaVariant,
    pub rows: Vec<DeltaRow>,
    /// Count of points where delta exceeds the perspective (must be zero).
    pub violations: usize,
    /// Count of points with a strict gap delta < perspective.
    pub strict_gaps: usize,
    /// The defining hypotheses of the variant hold for this pair.
    pub hypotheses_hold: bool,
}

/// Evaluates the classical scaled construction
/// (s(y) phi(x/s(y)) / recession at s(y) = 0 / +inf otherwise) against the
/// perspective at the given points, asserting the minorant relation.
pub fn delta_comparison(
    phi: &FuncHandle,
    s: &FuncHandle,
    points: &[(Point, Point)],
    variant: DeltaVariant,
) -> Result<DeltaReport> {
    let report = PerspectiveReport::new(phi, s, None)?;
    let rec = phi
        .recession_analytic()
        .ok_or(Error::UnknownConjugate)?;
    let sign = classify_phi_star(phi, None)?;
    let scaling = scaling_analysis(s, None)?;
    let hypotheses_hold = match variant {
        DeltaVariant::DeltaOne => {
            sign.class != SignClass::ZeroInfty
                && phi.eval(&Point::new(vec![0.0; phi.dim()])?)? <= Finite(0.0)
                && scaling.neg_s_gamma0.is_true()
        }
        DeltaVariant::DeltaTwo => {
            matches!(sign.class, SignClass::NonPositive) && scaling.s_gamma0.is_true()
        }
    };
    let mut rows = Vec::with_capacity(points.len());
    let mut violations = 0usize;
    let mut strict_gaps = 0usize;
    for (x, y) in points {
        let sy = s.eval(y)?;
        let delta = match sy {
            Finite(v) if v > 0.0 => scaled_eval(phi, v, x)?,
            Finite(v) if v == 0.0 => rec.eval(x)?,
            _ => PosInf,
        };
        let persp = report.perspective(x, y)?;
        let equal = delta == persp;
        if delta > persp {
            violations += 1;
        }
        if delta < persp {
            strict_gaps += 1;
        }
        rows.push(DeltaRow {
            x: x.coords.clone(),
            y: y.coords.clone(),
            delta,
            perspective: persp,
            equal,
        });
    }
    Ok(DeltaReport {
        variant,
        rows,
        violations,
        strict_gaps,
        hypotheses_hold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcs::Norm;

    fn pt(v: f64) -> Point {
        Point::from(v)
    }

    fn sq_half(dim: usize) -> FuncHandle {
        FuncHandle::norm_power(dim, Norm::Euclidean, 2.0, 1.0, 0.0).unwrap()
    }

    fn identity_scaling() -> FuncHandle {
        FuncHandle::affine(vec![1.0], 0.0).unwrap()
    }

    fn clipped() -> FuncHandle {
        FuncHandle::clipped_quadratic(0.5).unwrap()
    }

    fn phi1() -> FuncHandle {
        FuncHandle::huber(1, Norm::Euclidean, 1.0, 2.0).unwrap()
    }

    fn phi2() -> FuncHandle {
        FuncHandle::berhu(1, Norm::Euclidean, 1.0, 2.0).unwrap()
    }

    fn phi3() -> FuncHandle {
        FuncHandle::norm_power(1, Norm::Euclidean, 2.0, 1.0, 0.5).unwrap()
    }

    fn power(q: f64, below: BelowZero) -> FuncHandle {
        FuncHandle::power_scaling(q, below).unwrap()
    }

    #[test]
    fn preperspective_basic_values() {
        // Classical quotient: s = id, phi = x^2/2 at (2, 4).
        let v = preperspective_eval(&sq_half(1), &identity_scaling(), &pt(2.0), &pt(4.0)).unwrap();
        assert_eq!(v, Finite(0.5));
        // Nonpositive scaling value: +inf.
        let v = preperspective_eval(&sq_half(1), &identity_scaling(), &pt(2.0), &pt(0.0)).unwrap();
        assert_eq!(v, PosInf);
        let v = preperspective_eval(&sq_half(1), &identity_scaling(), &pt(2.0), &pt(-1.0)).unwrap();
        assert_eq!(v, PosInf);
        // Speed-constrained integrand: x/s(y) misses the annulus.
        let phi = FuncHandle::radial_indicator(1, Norm::Euclidean, 1.0, 2.0, 2.0, 1.0, 0.0).unwrap();
        let s = power(0.5, BelowZero::PosInf);
        let v = preperspective_eval(&phi, &s, &pt(1.0), &pt(4.0)).unwrap();
        assert_eq!(v, PosInf, "1/2 lies below the inner radius");
        let v = preperspective_eval(&phi, &s, &pt(3.0), &pt(4.0)).unwrap();
        assert_eq!(v, Finite(2.0 * (1.5 * 1.5) / 2.0));
    }

    #[test]
    fn properness_examples() {
        assert!(preperspective_properness(&sq_half(1), &identity_scaling()));
        let always_inf =
            FuncHandle::opaque(1, Meta::unknown(), "plus-inf", |_| PosInf).unwrap();
        assert!(!preperspective_properness(&always_inf, &identity_scaling()));
        let neg_one = FuncHandle::constant(1, -1.0).unwrap();
        assert!(!preperspective_properness(&sq_half(1), &neg_one));
    }

    #[test]
    fn classification_examples() {
        let c = classify_phi_star(&phi1(), None).unwrap();
        assert_eq!(c.class, SignClass::NonPositive);
        let w = c.negative_witness.unwrap();
        let conj = phi1().conjugate_analytic().unwrap();
        assert_eq!(conj.eval_slice(&w), Finite(-0.5));

        let norm = FuncHandle::norm_power(1, Norm::Euclidean, 1.0, 1.0, 0.0).unwrap();
        let c = classify_phi_star(&norm, None).unwrap();
        assert_eq!(c.class, SignClass::ZeroInfty);

        let c = classify_phi_star(&phi3(), None).unwrap();
        assert_eq!(c.class, SignClass::Mixed);
        assert_eq!(c.zero_attained, TriState::True);
        let conj = phi3().conjugate_analytic().unwrap();
        assert!(conj.eval_slice(&c.negative_witness.unwrap()) < Finite(0.0));
        assert!(conj.eval_slice(&c.positive_witness.unwrap()) > Finite(0.0));

        let c = classify_phi_star(&phi2(), None).unwrap();
        assert_eq!(c.class, SignClass::NonNegative);
        assert_eq!(c.zero_attained, TriState::True);
    }

    #[test]
    fn classification_on_grids_matches_analytic() {
        // Same classes through the dual-grid scan with sign margin.
        let spec = GridSpec::line(-6.0, 6.0, 601).unwrap();
        for (phi, class) in [
            (phi1(), SignClass::NonPositive),
            (phi3(), SignClass::Mixed),
            (sq_half(1), SignClass::NonNegative),
        ] {
            let wrapped = FuncHandle::opaque(1, Meta::gamma0(), "wrapped", move |x| {
                phi.eval_slice(x)
            })
            .unwrap();
            let c = classify_phi_star(&wrapped, Some(&spec)).unwrap();
            assert_eq!(c.class, class);
        }
    }

    #[test]
    fn cam_examples() {
        // First disjunct: conjugate of x^2/2 vanishes at 0.
        assert!(cam_nonempty(&sq_half(1), &power(2.0, BelowZero::PosInf), None).unwrap());
        // Positive value at the origin gives a strictly negative conjugate
        // value.
        assert!(cam_nonempty(&phi3(), &power(2.0, BelowZero::PosInf), None).unwrap());
        // Both disjuncts fail: conjugate strictly positive (shifted annulus)
        // and superlinear negated scaling.
        let shifted_annulus =
            FuncHandle::radial_indicator(1, Norm::Euclidean, 1.0, 3.0, 2.0, 1.0, -1.0).unwrap();
        assert!(!cam_nonempty(&shifted_annulus, &power(2.0, BelowZero::PosInf), None).unwrap());
        // Same pair with a benign scaling: true again.
        assert!(cam_nonempty(&shifted_annulus, &power(0.5, BelowZero::PosInf), None).unwrap());
    }

    #[test]
    fn branch_dispatch_table() {
        let s62 = clipped();
        assert_eq!(perspective_case(&phi1(), &s62).unwrap(), Branch::ScalingDirect);
        assert_eq!(
            perspective_case(&phi2(), &s62).unwrap(),
            Branch::PosConjDownEnvelope
        );
        assert_eq!(perspective_case(&phi3(), &s62).unwrap(), Branch::MixedFourCase);
        assert_eq!(
            perspective_case(&phi3(), &power(0.5, BelowZero::PosInf)).unwrap(),
            Branch::MixedFourCase
        );
        assert_eq!(
            perspective_case(&phi3(), &power(2.0, BelowZero::PosInf)).unwrap(),
            Branch::MixedUpEnvelope
        );
        assert_eq!(
            perspective_case(&sq_half(1), &power(2.0, BelowZero::PosInf)).unwrap(),
            Branch::PosConjSupport
        );
        assert_eq!(
            perspective_case(&phi1(), &power(0.5, BelowZero::PosInf)).unwrap(),
            Branch::NegConjUpEnvelope
        );
        let norm = FuncHandle::norm_power(1, Norm::Euclidean, 1.0, 1.0, 0.0).unwrap();
        assert_eq!(
            perspective_case(&norm, &power(0.5, BelowZero::PosInf)).unwrap(),
            Branch::HomogeneousIndicator
        );
        assert_eq!(
            perspective_case(&sq_half(1), &power(0.5, BelowZero::NegInf)).unwrap(),
            Branch::ConcaveDirect
        );
        assert_eq!(
            perspective_case(&sq_half(1), &identity_scaling()).unwrap(),
            Branch::AffineScaling
        );
        assert_eq!(
            perspective_case(&sq_half(1), &FuncHandle::max_zero_affine()).unwrap(),
            Branch::PosConjDownEnvelope
        );
        // Degenerate pair: strictly positive conjugate, superlinear negated
        // scaling.
        let shifted_annulus =
            FuncHandle::radial_indicator(1, Norm::Euclidean, 1.0, 3.0, 2.0, 1.0, -1.0).unwrap();
        assert_eq!(
            perspective_case(&shifted_annulus, &power(2.0, BelowZero::PosInf)).unwrap(),
            Branch::Degenerate
        );
    }

    #[test]
    fn classical_perspective_formula() {
        // s = id: x^2/(2y) for y > 0, recession at y = 0, +inf below.
        let report = PerspectiveReport::new(&sq_half(1), &identity_scaling(), None).unwrap();
        let v = report.perspective(&pt(2.0), &pt(4.0)).unwrap();
        assert_eq!(v, Finite(0.5));
        assert_eq!(report.perspective(&pt(0.0), &pt(0.0)).unwrap(), Finite(0.0));
        assert_eq!(report.perspective(&pt(1.0), &pt(0.0)).unwrap(), PosInf);
        assert_eq!(report.perspective(&pt(1.0), &pt(-0.5)).unwrap(), PosInf);
    }

    #[test]
    fn clipped_pairs_match_closed_forms() {
        let s62 = clipped();
        let beta = 0.5;
        // Pair 1: at the plateau the value is the recession of the Huber
        // function, the primal norm.
        let r1 = PerspectiveReport::new(&phi1(), &s62, None).unwrap();
        for y in [-0.5, 0.0, 0.25, 0.5] {
            for x in [-2.0, -0.3, 0.0, 1.7] {
                let v = r1.perspective(&pt(x), &pt(y)).unwrap();
                assert_eq!(v, Finite(x.abs()), "plateau value at ({x}, {y})");
            }
        }
        // Outside the plateau the scaling acts directly.
        let y = 0.8f64;
        let t = (y * y - beta * beta) / 2.0;
        let v = r1.perspective(&pt(1.0), &pt(y)).unwrap();
        let expect = t * phi1().eval(&pt(1.0 / t)).unwrap().as_finite().unwrap();
        assert!((v.as_finite().unwrap() - expect).abs() < 1e-12);
        // Below the domain everything is +inf.
        assert_eq!(r1.perspective(&pt(0.0), &pt(-1.5)).unwrap(), PosInf);

        // Pair 2: the negated down-envelope drives the formula: the scale is
        // y + (3 - beta^2)/2 everywhere above y = -1.
        let r2 = PerspectiveReport::new(&phi2(), &s62, None).unwrap();
        let c = (3.0 - beta * beta) / 2.0;
        for (x, y) in [(2.0, -1.0), (0.0, 0.0), (1.0, 2.0), (-1.5, 0.3)] {
            let t: f64 = y + c;
            let expect = t * phi2().eval(&pt(x / t)).unwrap().as_finite().unwrap();
            let v = r2.perspective(&pt(x), &pt(y)).unwrap().as_finite().unwrap();
            assert!((v - expect).abs() < 1e-12, "({x}, {y}): {v} vs {expect}");
        }
        assert_eq!(r2.perspective(&pt(1.0), &pt(-1.1)).unwrap(), PosInf);
    }

    #[test]
    fn mixed_four_case_is_max_of_pair_perspectives() {
        let s62 = clipped();
        let r1 = PerspectiveReport::new(&phi1(), &s62, None).unwrap();
        let r2 = PerspectiveReport::new(&phi2(), &s62, None).unwrap();
        let r3 = PerspectiveReport::new(&phi3(), &s62, None).unwrap();
        for &x in &[-2.5, -1.0, 0.0, 0.4, 1.9] {
            for &y in &[-1.4, -1.0, -0.6, -0.3, 0.0, 0.5, 1.0, 2.2] {
                let a = r1.perspective(&pt(x), &pt(y)).unwrap();
                let b = r2.perspective(&pt(x), &pt(y)).unwrap();
                let c = r3.perspective(&pt(x), &pt(y)).unwrap();
                let m = a.max(b);
                match (c, m) {
                    (Finite(u), Finite(v)) => {
                        assert!((u - v).abs() <= 1e-12 * (1.0 + u.abs()), "({x},{y}): {u} vs {v}")
                    }
                    (u, v) => assert_eq!(u, v, "({x},{y})"),
                }
            }
        }
    }

    #[test]
    fn power_scaling_mixed_branches() {
        // q = 2: the up-envelope route; at y = 0 the value is the recession
        // of the Huber-type minorant, elsewhere y^2-scaled Huber.
        let r = PerspectiveReport::new(&phi3(), &power(2.0, BelowZero::PosInf), None).unwrap();
        assert_eq!(r.branch, Branch::MixedUpEnvelope);
        assert_eq!(r.perspective(&pt(1.5), &pt(0.0)).unwrap(), Finite(1.5));
        let v = r.perspective(&pt(1.0), &pt(2.0)).unwrap().as_finite().unwrap();
        let expect = 4.0 * phi1().eval(&pt(0.25)).unwrap().as_finite().unwrap();
        assert!((v - expect).abs() < 1e-12);
        assert_eq!(r.perspective(&pt(1.0), &pt(-0.1)).unwrap(), PosInf);

        // q = 1/2: the four-case formula; for y > 0 the max of the norm and
        // the sqrt-scaled Berhu, at y = 0 the recession of the hull.
        let r = PerspectiveReport::new(&phi3(), &power(0.5, BelowZero::PosInf), None).unwrap();
        assert_eq!(r.branch, Branch::MixedFourCase);
        let v = r.perspective(&pt(1.0), &pt(4.0)).unwrap().as_finite().unwrap();
        let expect = (2.0 * phi2().eval(&pt(0.5)).unwrap().as_finite().unwrap()).max(1.0);
        assert!((v - expect).abs() < 1e-12);
        assert_eq!(r.perspective(&pt(2.0), &pt(0.0)).unwrap(), PosInf);
        assert_eq!(r.perspective(&pt(0.0), &pt(0.0)).unwrap(), Finite(0.0));
    }

    #[test]
    fn support_branch_collapses_to_indicator() {
        // phi = x^2/2 with s = y^2: every convex minorant flattens to zero on
        // the halfline.
        let r = PerspectiveReport::new(&sq_half(1), &power(2.0, BelowZero::PosInf), None).unwrap();
        assert_eq!(r.branch, Branch::PosConjSupport);
        assert_eq!(r.perspective(&pt(3.0), &pt(5.0)).unwrap(), Finite(0.0));
        assert_eq!(r.perspective(&pt(3.0), &pt(0.0)).unwrap(), Finite(0.0));
        assert_eq!(r.perspective(&pt(3.0), &pt(-0.1)).unwrap(), PosInf);
    }

    #[test]
    fn perspective_minorizes_preperspective() {
        let pairs: Vec<(FuncHandle, FuncHandle)> = vec![
            (phi1(), clipped()),
            (phi2(), clipped()),
            (phi3(), clipped()),
            (phi3(), power(0.5, BelowZero::PosInf)),
            (phi3(), power(2.0, BelowZero::PosInf)),
            (sq_half(1), identity_scaling()),
            (sq_half(1), power(0.5, BelowZero::NegInf)),
            (sq_half(1), FuncHandle::max_zero_affine()),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for (phi, s) in &pairs {
            let report = PerspectiveReport::new(phi, s, None).unwrap();
            for _ in 0..500 {
                let x = pt(rng.gen_range(-3.0..3.0));
                let y = pt(rng.gen_range(-2.0..3.0));
                let pre = report.preperspective(&x, &y).unwrap();
                let per = report.perspective(&x, &y).unwrap();
                match (per, pre) {
                    (Finite(a), Finite(b)) => assert!(
                        a <= b + 1e-9,
                        "{:?}/{:?} at ({:?}, {:?}): {a} > {b}",
                        phi.family,
                        s.family,
                        x,
                        y
                    ),
                    (a, b) => assert!(a <= b, "{a:?} > {b:?}"),
                }
            }
        }
    }

    #[test]
    fn conjugate_of_identity_scaling_is_halfplane_indicator() {
        // s = id: the conjugate is the indicator of phi*(x*) + y* <= 0.
        let r = PerspectiveReport::new(&sq_half(1), &identity_scaling(), None).unwrap();
        assert_eq!(
            r.preperspective_conjugate(&pt(1.0), &pt(-0.5)).unwrap(),
            Finite(0.0)
        );
        assert_eq!(
            r.preperspective_conjugate(&pt(1.0), &pt(-0.4)).unwrap(),
            PosInf
        );
        assert_eq!(
            r.preperspective_conjugate(&pt(0.0), &pt(-0.1)).unwrap(),
            Finite(0.0)
        );
        assert_eq!(
            r.preperspective_conjugate(&pt(0.0), &pt(0.1)).unwrap(),
            PosInf
        );
    }

    #[test]
    fn conjugate_zero_case_is_hull_support() {
        // Dual points where the conjugate of phi vanishes contribute the
        // support of the positivity hull.
        let r = PerspectiveReport::new(&phi2(), &clipped(), None).unwrap();
        // Berhu conjugate vanishes on the unit ball; hull is [-1, +inf).
        assert_eq!(
            r.preperspective_conjugate(&pt(0.5), &pt(-2.0)).unwrap(),
            Finite(2.0)
        );
        assert_eq!(
            r.preperspective_conjugate(&pt(0.5), &pt(0.5)).unwrap(),
            PosInf
        );
    }

    #[test]
    fn delta_two_counterexample() {
        // s = max{0, y}: the scaled construction undercuts the perspective
        // strictly at (0, -1).
        let phi = sq_half(1);
        let s = FuncHandle::max_zero_affine();
        let points = vec![
            (pt(0.0), pt(-1.0)),
            (pt(0.0), pt(1.0)),
            (pt(2.0), pt(1.0)),
            (pt(1.0), pt(-2.0)),
        ];
        let rep = delta_comparison(&phi, &s, &points, DeltaVariant::DeltaTwo).unwrap();
        assert_eq!(rep.violations, 0);
        assert_eq!(rep.rows[0].delta, Finite(0.0));
        assert_eq!(rep.rows[0].perspective, PosInf);
        assert!(!rep.rows[0].equal);
        // On the positivity set the two coincide.
        assert!(rep.rows[1].equal);
        assert!(rep.rows[2].equal);
    }

    #[test]
    fn delta_one_equals_perspective_under_concave_scaling() {
        let phi = sq_half(1);
        let s = power(0.5, BelowZero::NegInf);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let points: Vec<(Point, Point)> = (0..200)
            .map(|_| (pt(rng.gen_range(-3.0..3.0)), pt(rng.gen_range(-1.0..3.0))))
            .collect();
        let rep = delta_comparison(&phi, &s, &points, DeltaVariant::DeltaOne).unwrap();
        assert!(rep.hypotheses_hold);
        assert_eq!(rep.violations, 0);
        assert_eq!(rep.strict_gaps, 0, "the two constructions agree everywhere");
    }

    #[test]
    fn convexity_condition_checks() {
        // Subhomogeneous phi via the conjugate route.
        let c = convexity_conditions(&phi1(), &clipped());
        assert_eq!(c.p30_iii, TriState::False, "positivity set of s not convex");
        assert_eq!(c.p30_i, TriState::False);
        let c = convexity_conditions(&phi1(), &power(2.0, BelowZero::PosInf));
        assert_eq!(c.p30_iii, TriState::True);
        // phi(0) <= 0 with concave scaling.
        let c = convexity_conditions(&sq_half(1), &power(0.5, BelowZero::NegInf));
        assert_eq!(c.p30_ii, TriState::True);
        // Affine scaling always.
        let c = convexity_conditions(&sq_half(1), &identity_scaling());
        assert_eq!(c.p30_i, TriState::True);
        // Mixed phi3 is not subhomogeneous.
        let c = convexity_conditions(&phi3(), &power(2.0, BelowZero::PosInf));
        assert_eq!(c.p30_iii, TriState::False);
    }

    #[test]
    fn report_json_has_interface_fields() {
        let r = PerspectiveReport::new(&phi3(), &clipped(), None).unwrap();
        let j = r.to_json();
        assert_eq!(j["branch"], "T55_vb");
        assert!(j["hypotheses_checked"].is_array());
        assert_eq!(j["cam"], true);
        assert_eq!(j["sign_class"]["class"], "mixed");
    }

    #[test]
    fn degenerate_pair_is_flagged_not_raised() {
        let shifted_annulus =
            FuncHandle::radial_indicator(1, Norm::Euclidean, 1.0, 3.0, 2.0, 1.0, -1.0).unwrap();
        let r =
            PerspectiveReport::new(&shifted_annulus, &power(2.0, BelowZero::PosInf), None).unwrap();
        assert_eq!(r.branch, Branch::Degenerate);
        assert!(!r.cam_nonempty);
        // Values are the two-valued pathology.
        assert_eq!(r.perspective(&pt(0.0), &pt(1.0)).unwrap(), NegInf);
        assert_eq!(r.perspective(&pt(0.0), &pt(-1.0)).unwrap(), PosInf);
    }

    #[test]
    fn brenier_mobility_routes_through_concave_branch() {
        let s = FuncHandle::brenier_mobility(1.0, 1.0).unwrap();
        assert_eq!(s.eval(&pt(0.0)).unwrap(), Finite(0.0));
        assert_eq!(s.eval(&pt(1.0)).unwrap(), Finite(0.0));
        assert_eq!(s.eval(&pt(0.5)).unwrap(), Finite(0.25));
        assert_eq!(s.eval(&pt(1.5)).unwrap(), NegInf);
        let r = PerspectiveReport::new(&sq_half(1), &s, None).unwrap();
        assert_eq!(r.branch, Branch::ConcaveDirect);
        // At the mobility peak: s = 1/4, value = x^2/(2 s).
        let v = r.perspective(&pt(0.5), &pt(0.5)).unwrap().as_finite().unwrap();
        assert!((v - 0.5).abs() < 1e-12);
        // At the edges the scaling vanishes: recession values.
        assert_eq!(r.perspective(&pt(0.0), &pt(1.0)).unwrap(), Finite(0.0));
        assert_eq!(r.perspective(&pt(0.3), &pt(1.0)).unwrap(), PosInf);
        assert_eq!(r.perspective(&pt(0.0), &pt(1.5)).unwrap(), PosInf);
    }
}
