//! The independent grid oracle: brute-force discrete Legendre-Fenchel
//! conjugation, biconjugation, numeric recession functions, positive-set
//! hulls and support functions.
//!
//! The double-loop conjugate is the correctness reference for every closed
//! form in the library. Per-dual-node suprema are independent, so the loops
//! parallelize without changing results (max is order-independent).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extreal::{ExtReal, Finite, NegInf, PosInf};
use crate::funcs::{FuncHandle, GridFunction, GridSpec, Point};

/// Result of a grid conjugation. `poisoned` is set when the input carried a
/// -inf node, which forces the conjugate to +inf identically.
#[derive(Debug, Clone)]
pub struct ConjugateOutcome {
    pub grid: GridFunction,
    pub poisoned: bool,
}

/// Result of a grid biconjugation. `delta` records the largest violation of
/// `biconjugate <= input` over shared nodes (discretization slack; exactly
/// zero in exact arithmetic).
#[derive(Debug, Clone)]
pub struct BiconjugateOutcome {
    pub grid: GridFunction,
    pub delta: f64,
    pub poisoned: bool,
}

/// Finite samples flattened for the inner sup loop.
struct FiniteNodes {
    dim: usize,
    coords: Vec<f64>,
    vals: Vec<f64>,
}

impl FiniteNodes {
    fn collect(f: &GridFunction) -> (Self, bool) {
        let d = f.spec.dim();
        let mut coords = Vec::new();
        let mut vals = Vec::new();
        let mut saw_neg_inf = false;
        let mut buf = vec![0.0; d];
        for (idx, v) in f.values.iter().enumerate() {
            match v {
                Finite(v) => {
                    f.spec.node_into(idx, &mut buf);
                    coords.extend_from_slice(&buf);
                    vals.push(*v);
                }
                NegInf => saw_neg_inf = true,
                PosInf => {}
            }
        }
        (
            FiniteNodes {
                dim: d,
                coords,
                vals,
            },
            saw_neg_inf,
        )
    }

    /// sup over stored nodes of <x, xi> - f(x).
    #[inline]
    fn sup_at(&self, xi: &[f64]) -> f64 {
        let mut best = f64::NEG_INFINITY;
        match self.dim {
            1 => {
                let a = xi[0];
                for (x, v) in self.coords.iter().zip(&self.vals) {
                    let cand = x * a - v;
                    if cand > best {
                        best = cand;
                    }
                }
            }
            2 => {
                let (a, b) = (xi[0], xi[1]);
                for (x, v) in self.coords.chunks_exact(2).zip(&self.vals) {
                    let cand = x[0] * a + x[1] * b - v;
                    if cand > best {
                        best = cand;
                    }
                }
            }
            _ => {
                let (a, b, c) = (xi[0], xi[1], xi[2]);
                for (x, v) in self.coords.chunks_exact(3).zip(&self.vals) {
                    let cand = x[0] * a + x[1] * b + x[2] * c - v;
                    if cand > best {
                        best = cand;
                    }
                }
            }
        }
        best
    }
}

/// Brute-force discrete conjugate: for each dual node xi, the max over primal
/// nodes x of <x, xi> - f(x). +inf primal nodes are excluded from the sup;
/// a -inf node poisons the whole conjugate to +inf (flagged).
pub fn conjugate_grid(f: &GridFunction, dual: &GridSpec) -> Result<ConjugateOutcome> {
    if dual.dim() != f.spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.spec.dim(),
            got: dual.dim(),
        });
    }
    let (nodes, poisoned) = FiniteNodes::collect(f);
    if poisoned {
        return Ok(ConjugateOutcome {
            grid: GridFunction::new(dual.clone(), vec![PosInf; dual.num_nodes()])?,
            poisoned: true,
        });
    }
    if nodes.vals.is_empty() {
        return Err(Error::AllInfinite);
    }
    let d = dual.dim();
    let values: Vec<ExtReal> = (0..dual.num_nodes())
        .into_par_iter()
        .map(|idx| {
            let mut xi = [0.0; 3];
            dual.node_into(idx, &mut xi[..d]);
            Finite(nodes.sup_at(&xi[..d]))
        })
        .collect();
    Ok(ConjugateOutcome {
        grid: GridFunction::new(dual.clone(), values)?,
        poisoned: false,
    })
}

/// Linear-time 1D conjugate for samples that are convex on their grid. Walks
/// the primal argmax monotonically with the dual node, evaluating the exact
/// same expression as the brute-force loop, so results agree bit for bit.
pub fn fast_conjugate_1d(f: &GridFunction, dual: &GridSpec) -> Result<ConjugateOutcome> {
    if f.spec.dim() != 1 || dual.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: f.spec.dim().max(dual.dim()),
        });
    }
    let (nodes, poisoned) = FiniteNodes::collect(f);
    if poisoned {
        return Ok(ConjugateOutcome {
            grid: GridFunction::new(dual.clone(), vec![PosInf; dual.num_nodes()])?,
            poisoned: true,
        });
    }
    let n = nodes.vals.len();
    if n == 0 {
        return Err(Error::AllInfinite);
    }
    let mut values = Vec::with_capacity(dual.num_nodes());
    let mut arg = 0usize;
    for j in 0..dual.counts[0] {
        let xi = dual.axis_coord(0, j);
        // The argmax of x*xi - f(x) is nondecreasing in xi for convex f.
        let mut best = nodes.coords[arg] * xi - nodes.vals[arg];
        while arg + 1 < n {
            let cand = nodes.coords[arg + 1] * xi - nodes.vals[arg + 1];
            if cand > best {
                best = cand;
                arg += 1;
            } else {
                break;
            }
        }
        values.push(Finite(best));
    }
    Ok(ConjugateOutcome {
        grid: GridFunction::new(dual.clone(), values)?,
        poisoned: false,
    })
}

/// Conjugate applied twice: down to `dual`, back onto the input grid.
pub fn biconjugate_grid(f: &GridFunction, dual: &GridSpec) -> Result<BiconjugateOutcome> {
    let conj = conjugate_grid(f, dual)?;
    if conj.poisoned {
        return Ok(BiconjugateOutcome {
            grid: GridFunction::new(f.spec.clone(), vec![NegInf; f.spec.num_nodes()])?,
            delta: 0.0,
            poisoned: true,
        });
    }
    let back = conjugate_grid(&conj.grid, &f.spec)?;
    let mut delta = 0.0f64;
    for (b, orig) in back.grid.values.iter().zip(&f.values) {
        if let (Finite(b), Finite(o)) = (b, orig) {
            delta = delta.max(b - o);
        }
    }
    Ok(BiconjugateOutcome {
        grid: back.grid,
        delta: delta.max(0.0),
        poisoned: false,
    })
}

/// Dual grid bounds chosen from the primal samples' finite-difference slope
/// range, padded by 10% of the span. The conjugate is only trustworthy on
/// slopes realized by the data, so this is the default dual box.
pub fn dual_spec_from_slopes(f: &GridFunction, counts: &[usize]) -> Result<GridSpec> {
    dual_spec_from_slopes_in(f, counts, |_, _| true)
}

/// Same as [`dual_spec_from_slopes`], with the slope scan restricted to nodes
/// selected by `keep`. Used when only a sub-region of the reconstruction is
/// of interest and boundary layers would inflate the slope range.
pub fn dual_spec_from_slopes_in(
    f: &GridFunction,
    counts: &[usize],
    keep: impl Fn(usize, &[f64]) -> bool,
) -> Result<GridSpec> {
    let d = f.spec.dim();
    if counts.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: counts.len(),
        });
    }
    let ranges = f.slope_range(keep);
    let mut lower = Vec::with_capacity(d);
    let mut upper = Vec::with_capacity(d);
    for (axis, r) in ranges.into_iter().enumerate() {
        let (mut lo, mut hi) = r.unwrap_or((-1.0, 1.0));
        if hi - lo < 1e-6 {
            lo -= 0.5;
            hi += 0.5;
        }
        // Pad by whole node steps (about 10% of the span) so the realized
        // slope extremes land exactly on dual nodes; piecewise-linear inputs
        // then reconstruct exactly.
        let n = counts[axis];
        let k = ((0.05 * (n - 1) as f64).round() as usize).max(1);
        let inner = n - 2 * k.min((n - 2) / 2);
        let h = (hi - lo) / (inner - 1) as f64;
        let k = (n - inner) / 2;
        lower.push(lo - k as f64 * h);
        upper.push(lo - k as f64 * h + (n - 1) as f64 * h);
    }
    GridSpec::new(lower, upper, counts.to_vec())
}

/// Self-settling dual box for biconjugating functions whose raw slope range
/// wildly overshoots their envelope's (preperspectives near a vanishing
/// scaling). Starts from the raw slope range over the kept region, then
/// repeatedly biconjugates at coarse resolution and re-derives the box from
/// the reconstruction's own slopes, expanding a side whenever the slopes
/// press against it and shrinking when they settle strictly inside. The
/// final box is snapped to spacing 1/k so that all small multiples of one
/// (the slopes of the piecewise-linear parts of these surfaces) are dual
/// nodes.
pub fn dual_spec_settled(
    f: &GridFunction,
    counts: &[usize],
    keep: impl Fn(usize, &[f64]) -> bool + Copy,
) -> Result<GridSpec> {
    let d = f.spec.dim();
    // Coarse working resolution for the settling loop; the box only grows,
    // one doubling per pressed side, so the loop cannot collapse.
    let coarse: Vec<usize> = counts.iter().map(|&c| (c / 2 + 1).max(33)).collect();
    let mut lower = vec![-1.0; d];
    let mut upper = vec![1.0; d];
    for _ in 0..40 {
        let dual = GridSpec::new(lower.clone(), upper.clone(), coarse.clone())?;
        let bi = biconjugate_grid(f, &dual)?;
        if bi.poisoned {
            break;
        }
        let ranges = bi.grid.slope_range(keep);
        let mut changed = false;
        for axis in 0..d {
            let (slo, shi) = match ranges[axis] {
                Some(r) => r,
                None => continue,
            };
            let h = dual.spacing(axis);
            let half = 0.5 * (upper[axis] - lower[axis]);
            if shi > upper[axis] - 2.0 * h {
                upper[axis] += half;
                changed = true;
            }
            if slo < lower[axis] + 2.0 * h {
                lower[axis] -= half;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    // Rational snap: spacing 1/k with bounds on multiples of 1/k, so that
    // small integer slopes (the linear pieces of these surfaces) land
    // exactly on dual nodes.
    let mut slo = Vec::with_capacity(d);
    let mut shi = Vec::with_capacity(d);
    for axis in 0..d {
        let span = (upper[axis] - lower[axis]).max(1e-6);
        let n = counts[axis];
        let k = (((n - 1) as f64) / (1.1 * span)).floor().max(1.0);
        let h = 1.0 / k;
        let lo = ((lower[axis] - 0.05 * span) * k).floor() / k;
        let hi = lo + (n - 1) as f64 * h;
        slo.push(lo);
        shi.push(hi);
    }
    GridSpec::new(slo, shi, counts.to_vec())
}

/// Monotone ray-limit estimate of the recession function along `direction`
/// from `basepoint`, over the doubling ladder t = 1, 2, 4, ..., t_max.
/// Declares +inf when the difference quotient exceeds 1e8 or is still growing
/// by more than 1% at the last rung.
pub fn recession_numeric(
    f: &FuncHandle,
    direction: &Point,
    basepoint: &Point,
    t_max: f64,
) -> Result<ExtReal> {
    let base_val = match f.eval(basepoint)? {
        Finite(v) => v,
        _ => return Err(Error::BasepointOutsideDomain),
    };
    let d = basepoint.dim();
    if direction.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: direction.dim(),
        });
    }
    if direction.coords.iter().all(|c| *c == 0.0) {
        return Ok(Finite(0.0));
    }

    const DIVERGENCE: f64 = 1e8;
    let mut t = 1.0f64;
    let mut prev: Option<f64> = None;
    let mut last = f64::NEG_INFINITY;
    while t <= t_max {
        let probe = Point::new(
            basepoint
                .coords
                .iter()
                .zip(&direction.coords)
                .map(|(b, d)| b + t * d)
                .collect(),
        )?;
        let q = match f.eval(&probe)? {
            PosInf => return Ok(PosInf),
            NegInf => return Ok(NegInf),
            Finite(v) => (v - base_val) / t,
        };
        if q > DIVERGENCE {
            return Ok(PosInf);
        }
        prev = Some(last);
        last = q;
        t *= 2.0;
    }
    if let Some(p) = prev {
        if p.is_finite() {
            let growth = last - p;
            if growth > 0.01 * p.abs().max(1e-12) {
                return Ok(PosInf);
            }
        }
    }
    Ok(Finite(last))
}

// ---- positive-set hulls -----------------------------------------------------

/// Closed interval hull with unboundedness flags on each end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullSet1D {
    pub lo: f64,
    pub hi: f64,
    pub lo_unbounded: bool,
    pub hi_unbounded: bool,
}

/// Convex polygon hull (counterclockwise, no three collinear vertices) plus
/// outward axis recession directions where positive nodes touch the grid
/// boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullSet2D {
    pub vertices: Vec<[f64; 2]>,
    pub rays: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum HullSet {
    One(HullSet1D),
    Two(HullSet2D),
}

impl HullSet1D {
    pub fn new(lo: f64, hi: f64, lo_unbounded: bool, hi_unbounded: bool) -> Self {
        HullSet1D {
            lo,
            hi,
            lo_unbounded,
            hi_unbounded,
        }
    }

    pub fn contains(&self, y: f64) -> bool {
        (self.lo_unbounded || y >= self.lo) && (self.hi_unbounded || y <= self.hi)
    }

    pub fn support(&self, x: f64) -> ExtReal {
        if x > 0.0 && self.hi_unbounded {
            return PosInf;
        }
        if x < 0.0 && self.lo_unbounded {
            return PosInf;
        }
        Finite((self.lo * x).max(self.hi * x))
    }
}

impl HullSet2D {
    /// Support function: +inf when a recession ray aligns with `x`, else the
    /// max over vertices.
    pub fn support(&self, x: &[f64]) -> ExtReal {
        for r in &self.rays {
            if r[0] * x[0] + r[1] * x[1] > 0.0 {
                return PosInf;
            }
        }
        let mut best = f64::NEG_INFINITY;
        for v in &self.vertices {
            best = best.max(v[0] * x[0] + v[1] * x[1]);
        }
        Finite(best)
    }

    /// Closed membership test for (polygon + cone spanned by rays), via the
    /// valid inequalities <y, u> <= sigma_polygon(u) over the facet normals of
    /// the sum: polygon edge normals lying in the polar cone of the rays, the
    /// perpendiculars of each ray that lie in the polar cone, and the polar
    /// cone's own boundary directions.
    pub fn contains(&self, y: &[f64]) -> bool {
        let scale = 1.0 + y[0].abs() + y[1].abs();
        let tol = 1e-9 * scale;
        let in_polar = |u: [f64; 2]| self.rays.iter().all(|r| r[0] * u[0] + r[1] * u[1] <= 1e-12);
        let mut dirs: Vec<[f64; 2]> = Vec::new();
        // Polygon edge normals (outward for a ccw polygon).
        let n = self.vertices.len();
        if n >= 2 {
            for i in 0..n {
                let a = self.vertices[i];
                let b = self.vertices[(i + 1) % n];
                if n == 2 && i == 1 {
                    break;
                }
                let e = [b[0] - a[0], b[1] - a[1]];
                let len = (e[0] * e[0] + e[1] * e[1]).sqrt();
                if len == 0.0 {
                    continue;
                }
                let out = [e[1] / len, -e[0] / len];
                dirs.push(out);
                if n == 2 {
                    dirs.push([-out[0], -out[1]]);
                }
            }
        }
        dirs.retain(|u| in_polar(*u));
        for r in &self.rays {
            for perp in [[r[1], -r[0]], [-r[1], r[0]]] {
                if in_polar(perp) {
                    dirs.push(perp);
                }
            }
        }
        // A point polygon with no usable direction: fall back to equality /
        // pure-cone membership through the support test along axis and
        // diagonal probes.
        if dirs.is_empty() {
            dirs.extend([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]]);
            dirs.retain(|u| in_polar(*u));
        }
        for u in dirs {
            let sigma = match self.support(&u) {
                PosInf => continue,
                Finite(v) => v,
                NegInf => return false,
            };
            if y[0] * u[0] + y[1] * u[1] > sigma + tol {
                return false;
            }
        }
        true
    }
}

impl HullSet {
    pub fn contains(&self, y: &[f64]) -> bool {
        match self {
            HullSet::One(h) => h.contains(y[0]),
            HullSet::Two(h) => h.contains(y),
        }
    }

    pub fn support(&self, x: &[f64]) -> ExtReal {
        match self {
            HullSet::One(h) => h.support(x[0]),
            HullSet::Two(h) => h.support(x),
        }
    }
}

/// Hull of the strict positivity set of `s` sampled over `spec`: interval
/// (1D) or convex polygon (2D) through the nodes where s > 0 finitely, grown
/// by the adjacent nodes where s = 0 (closure of the positivity region), with
/// unboundedness flags where positive nodes touch the grid boundary.
pub fn hull_of_positive_set(s: &FuncHandle, spec: &GridSpec) -> Result<HullSet> {
    let d = spec.dim();
    if d > 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: d });
    }
    let samples = s.sample(spec)?;
    let n = spec.num_nodes();
    let is_pos = |idx: usize| matches!(samples.values[idx], Finite(v) if v > 0.0);
    let is_zero = |idx: usize| matches!(samples.values[idx], Finite(v) if v == 0.0);

    let mut keep = vec![false; n];
    let mut any = false;
    for idx in 0..n {
        if is_pos(idx) {
            keep[idx] = true;
            any = true;
        }
    }
    if !any {
        return Err(Error::EmptyPositiveSet);
    }
    // Closure step: zero-valued nodes with a positive node in their full
    // neighborhood (including diagonals) are limit points of the positivity
    // region at grid resolution.
    let mut grown = keep.clone();
    for idx in 0..n {
        if !is_zero(idx) {
            continue;
        }
        let multi = spec.unflatten(idx);
        let mut offsets = vec![[-1isize, 0, 1]; d];
        offsets.truncate(d);
        let mut found = false;
        let total = 3usize.pow(d as u32);
        'neigh: for code in 0..total {
            let mut c = code;
            let mut m2 = multi.clone();
            let mut is_self = true;
            for (axis, m) in m2.iter_mut().enumerate() {
                let delta = offsets[axis][c % 3];
                c /= 3;
                if delta != 0 {
                    is_self = false;
                }
                let j = *m as isize + delta;
                if j < 0 || j as usize >= spec.counts[axis] {
                    continue 'neigh;
                }
                *m = j as usize;
            }
            if !is_self && keep[spec.flatten(&m2)] {
                found = true;
                break;
            }
        }
        if found {
            grown[idx] = true;
        }
    }

    if d == 1 {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut lo_edge = false;
        let mut hi_edge = false;
        for idx in 0..n {
            if !grown[idx] {
                continue;
            }
            let y = spec.axis_coord(0, idx);
            lo = lo.min(y);
            hi = hi.max(y);
            if is_pos(idx) {
                if idx == 0 {
                    lo_edge = true;
                }
                if idx == n - 1 {
                    hi_edge = true;
                }
            }
        }
        return Ok(HullSet::One(HullSet1D::new(lo, hi, lo_edge, hi_edge)));
    }

    let mut pts: Vec<[f64; 2]> = Vec::new();
    let mut rays: Vec<[f64; 2]> = Vec::new();
    let mut flag = [[false; 2]; 2];
    for idx in 0..n {
        if !grown[idx] {
            continue;
        }
        let multi = spec.unflatten(idx);
        let p = [
            spec.axis_coord(0, multi[0]),
            spec.axis_coord(1, multi[1]),
        ];
        pts.push(p);
        if is_pos(idx) {
            for axis in 0..2 {
                if multi[axis] == 0 {
                    flag[axis][0] = true;
                }
                if multi[axis] + 1 == spec.counts[axis] {
                    flag[axis][1] = true;
                }
            }
        }
    }
    for axis in 0..2 {
        for (side, sign) in [(0usize, -1.0), (1usize, 1.0)] {
            if flag[axis][side] {
                let mut r = [0.0; 2];
                r[axis] = sign;
                rays.push(r);
            }
        }
    }
    let vertices = convex_hull_2d(&mut pts);
    Ok(HullSet::Two(HullSet2D { vertices, rays }))
}

/// Support function of a hull; +inf when an unbounded flag aligns with `x`.
pub fn support_function(set: &HullSet, x: &Point) -> ExtReal {
    set.support(x.as_slice())
}

/// Andrew's monotone chain; returns ccw vertices with collinear points
/// dropped. Degenerate inputs yield a point or a segment.
fn convex_hull_2d(pts: &mut Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    let n = pts.len();
    if n <= 2 {
        return pts.clone();
    }
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| -> f64 {
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    let mut lower: Vec<[f64; 2]> = Vec::new();
    for &p in pts.iter() {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() < 2 {
        pts.clone()
    } else {
        lower
    }
}

// ---- convergence ------------------------------------------------------------

/// Refinement report for the oracle: successive biconjugate sup-errors on
/// common interior nodes and the empirical order of decay.
/// `empirical_order` is `None` when errors are at floating-point noise
/// (grid-exact inputs such as piecewise-linear functions).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub spacings: Vec<f64>,
    pub sup_errors: Vec<f64>,
    pub empirical_order: Option<f64>,
}

/// Runs biconjugation at each spec (auto dual boxes, matching counts) and
/// compares successive levels on the coarse grid's interior nodes.
pub fn oracle_convergence(f: &FuncHandle, specs: &[GridSpec]) -> Result<ConvergenceReport> {
    if specs.len() < 2 {
        return Err(Error::InvalidGridSpec(
            "convergence sweep needs at least two specs".into(),
        ));
    }
    for w in specs.windows(2) {
        if !(w[1].max_spacing() < w[0].max_spacing()) {
            return Err(Error::InvalidGridSpec(
                "convergence sweep spacings must strictly decrease".into(),
            ));
        }
    }
    let mut levels = Vec::new();
    for spec in specs {
        let samples = f.sample(spec)?;
        let dual = dual_spec_from_slopes(&samples, &spec.counts)?;
        levels.push(biconjugate_grid(&samples, &dual)?.grid);
    }
    let mut spacings = Vec::new();
    let mut sup_errors = Vec::new();
    for w in levels.windows(2) {
        let coarse = &w[0];
        let fine = &w[1];
        // Compare on the fine grid's interior nodes, reading the coarse level
        // through its interpolant. Evaluating only at shared nodes is
        // alignment-sensitive (primal/dual resonance), this is not.
        let mut sup = 0.0f64;
        let mut coords = vec![0.0; fine.spec.dim()];
        for idx in 0..fine.spec.num_nodes() {
            let multi = fine.spec.unflatten(idx);
            if multi
                .iter()
                .zip(&fine.spec.counts)
                .any(|(&i, &c)| i == 0 || i + 1 == c)
            {
                continue;
            }
            fine.spec.node_into(idx, &mut coords);
            let a = coarse.interpolate(&coords);
            let b = fine.values[idx];
            if let (Finite(a), Finite(b)) = (a, b) {
                sup = sup.max((a - b).abs());
            }
        }
        spacings.push(coarse.spec.max_spacing());
        sup_errors.push(sup);
    }
    let mut orders = Vec::new();
    for i in 0..sup_errors.len().saturating_sub(1) {
        let (e0, e1) = (sup_errors[i], sup_errors[i + 1]);
        let (h0, h1) = (spacings[i], spacings[i + 1]);
        if e0 > 1e-13 && e1 > 1e-13 && h0 > h1 {
            orders.push((e0 / e1).ln() / (h0 / h1).ln());
        }
    }
    // Mean decay exponent over usable pairs; None when the input is
    // grid-exact and errors sit at floating-point noise.
    let empirical_order = if orders.is_empty() {
        None
    } else {
        Some(orders.iter().sum::<f64>() / orders.len() as f64)
    };
    Ok(ConvergenceReport {
        spacings,
        sup_errors,
        empirical_order,
    })
}

/// Discrete midpoint convexity along every axis at interior nodes, within
/// `tol`. Extended values participate: a +inf neighbor makes the constraint
/// vacuous, a +inf center with finite neighbors is a violation.
pub fn is_grid_convex(g: &GridFunction, tol: f64) -> bool {
    let d = g.spec.dim();
    for idx in 0..g.spec.num_nodes() {
        let multi = g.spec.unflatten(idx);
        for axis in 0..d {
            if multi[axis] == 0 || multi[axis] + 1 == g.spec.counts[axis] {
                continue;
            }
            let mut l = multi.clone();
            let mut r = multi.clone();
            l[axis] -= 1;
            r[axis] += 1;
            let vl = g.values[g.spec.flatten(&l)];
            let vr = g.values[g.spec.flatten(&r)];
            let vc = g.values[idx];
            match (vl, vc, vr) {
                (_, NegInf, _) => {}
                (PosInf, _, _) | (_, _, PosInf) => {}
                // A -inf neighbor makes the midpoint constraint unbounded
                // below, so a finite or +inf center violates it.
                (NegInf, _, _) | (_, _, NegInf) => return false,
                (Finite(a), Finite(c), Finite(b)) => {
                    if 2.0 * c > a + b + tol {
                        return false;
                    }
                }
                (Finite(_), PosInf, Finite(_)) => return false,
            }
        }
    }
    true
}
