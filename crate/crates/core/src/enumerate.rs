//! Exact lattice point enumeration in Euclidean balls, region counting, and
//! minimum-height solutions of |Q(x)| < eps.
//!
//! The kernel LLL-reduces the basis and then runs a depth-first
//! branch-and-bound over integer coefficients with Fincke-Pohst interval
//! pruning on Gram-Schmidt coordinates. Bounds are exact (no heuristic
//! pruning), so the output is exactly the set of nonzero lattice vectors of
//! norm <= T, each visited once.
//!
//! Counting conventions: the zero vector is always excluded, matching the
//! Siegel transform's sum over nonzero lattice vectors; a point whose
//! computed norm is within 1e-9 of T counts as inside (closed ball).

use crate::error::{Error, Result};
use crate::forms::QuadraticForm;
use crate::lattice::{lll_reduce_with_transform, Lattice, DEFAULT_LLL_DELTA};
use crate::linalg;
use crate::region::{Region, BOUNDARY_TOL};
use crate::volume::ball_volume;

/// Hard cap on the predicted number of points of a single enumeration.
const MAX_PREDICTED_POINTS: f64 = 1e8;
/// Feasibility guard on T relative to the estimated shortest vector.
const MAX_RADIUS_RATIO: f64 = 1e7;

/// A nonzero lattice vector, carried with its integer coordinates in the
/// lattice's original basis.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticePoint {
    pub coeffs: Vec<i64>,
    pub vector: Vec<f64>,
    pub norm: f64,
}

/// All nonzero lattice vectors v with ||v|| <= t, sorted lexicographically by
/// integer coordinates with the last coordinate as the most significant key.
pub fn points_in_ball(lattice: &Lattice, t: f64) -> Result<Vec<LatticePoint>> {
    let mut points = Vec::new();
    for_each_point_in_ball(lattice, t, |p| points.push(p.clone()))?;
    points.sort_by(|a, b| {
        a.coeffs
            .iter()
            .rev()
            .cmp(b.coeffs.iter().rev())
    });
    Ok(points)
}

/// Streaming form of `points_in_ball`; visit order is the deterministic
/// depth-first order of the reduced-basis search tree.
pub fn for_each_point_in_ball(
    lattice: &Lattice,
    t: f64,
    mut visit: impl FnMut(&LatticePoint),
) -> Result<()> {
    if t <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "enumeration radius must be positive, got {t}"
        )));
    }
    let enumerator = Enumerator::prepare(lattice, t)?;
    enumerator.run(&mut visit);
    Ok(())
}

/// Number of nonzero lattice points inside the region.
pub fn count_region(lattice: &Lattice, region: &Region) -> Result<u64> {
    if lattice.dim() != region.dim() {
        return Err(Error::DimensionMismatch {
            expected: lattice.dim(),
            got: region.dim(),
        });
    }
    let mut count = 0u64;
    for_each_point_in_ball(lattice, region.bounding_radius(), |p| {
        if region.contains(&p.vector) {
            count += 1;
        }
    })?;
    Ok(count)
}

struct Enumerator {
    n: usize,
    reduced_cols: Vec<Vec<f64>>,
    transform: Vec<Vec<i64>>,
    mu: Vec<Vec<f64>>,
    bstar_sq: Vec<f64>,
    bound: f64,
    prune_sq: f64,
}

impl Enumerator {
    fn prepare(lattice: &Lattice, t: f64) -> Result<Enumerator> {
        let n = lattice.dim();
        let predicted = ball_volume(n, t);
        if predicted > MAX_PREDICTED_POINTS {
            return Err(Error::Infeasible(format!(
                "predicted point count {predicted:.3e} exceeds {MAX_PREDICTED_POINTS:.0e}"
            )));
        }
        let out = lll_reduce_with_transform(lattice.basis(), DEFAULT_LLL_DELTA)?;
        let reduced_cols = out.reduced.cols();
        let lambda_est = reduced_cols
            .iter()
            .map(|c| linalg::norm(c))
            .fold(f64::MAX, f64::min);
        if t / lambda_est > MAX_RADIUS_RATIO {
            return Err(Error::Infeasible(format!(
                "radius {t} too large relative to shortest basis vector {lambda_est:.3e}"
            )));
        }

        // Gram-Schmidt data of the reduced basis (re-orthogonalized pass).
        let mut ortho: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut mu = vec![vec![0.0; n]; n];
        let mut bstar_sq = vec![0.0; n];
        for i in 0..n {
            let mut b = reduced_cols[i].clone();
            for _pass in 0..2 {
                for j in 0..i {
                    let c = linalg::dot(&b, &ortho[j]) / bstar_sq[j];
                    for (bk, ok) in b.iter_mut().zip(&ortho[j]) {
                        *bk -= c * ok;
                    }
                }
            }
            for j in 0..i {
                mu[i][j] = linalg::dot(&reduced_cols[i], &ortho[j]) / bstar_sq[j];
            }
            bstar_sq[i] = linalg::dot(&b, &b);
            if bstar_sq[i] <= 0.0 {
                return Err(Error::Numerical("degenerate basis in enumeration".into()));
            }
            ortho.push(b);
        }

        let bound = t + BOUNDARY_TOL;
        // slightly inflated pruning radius so floating-point Gram-Schmidt
        // error cannot drop a boundary point before the exact leaf check
        let prune = bound * (1.0 + 1e-12) + 1e-12;
        Ok(Enumerator {
            n,
            reduced_cols,
            transform: out.transform,
            mu,
            bstar_sq,
            bound,
            prune_sq: prune * prune,
        })
    }

    fn run(&self, visit: &mut impl FnMut(&LatticePoint)) {
        let n = self.n;
        let mut state = SearchState {
            coeffs: vec![0i64; n],
            sigma: vec![vec![0.0; n]; n + 1],
            partial: vec![0.0; n + 1],
            partial_vec: vec![vec![0.0; n]; n + 1],
            partial_orig: vec![vec![0i64; n]; n + 1],
            point: LatticePoint {
                coeffs: vec![0; n],
                vector: vec![0.0; n],
                norm: 0.0,
            },
        };
        self.descend(n - 1, &mut state, visit);
    }

    fn descend(
        &self,
        level: usize,
        state: &mut SearchState,
        visit: &mut impl FnMut(&LatticePoint),
    ) {
        let center = state.sigma[level + 1][level];
        let remaining = self.prune_sq - state.partial[level + 1];
        if remaining < 0.0 {
            return;
        }
        let radius = (remaining / self.bstar_sq[level]).sqrt();
        let lo = (-center - radius).ceil() as i64;
        let hi = (-center + radius).floor() as i64;
        for c in lo..=hi {
            let offset = c as f64 + center;
            let term = offset * offset * self.bstar_sq[level];
            if term > remaining {
                continue;
            }
            state.coeffs[level] = c;
            if level == 0 {
                self.emit(c, state, visit);
            } else {
                state.partial[level] = state.partial[level + 1] + term;
                let cf = c as f64;
                let (rows, parent) = state.sigma.split_at_mut(level + 1);
                for j in 0..level {
                    rows[level][j] = parent[0][j] + self.mu[level][j] * cf;
                }
                let (rows, parent) = state.partial_vec.split_at_mut(level + 1);
                for (v, (prev, b)) in rows[level]
                    .iter_mut()
                    .zip(parent[0].iter().zip(&self.reduced_cols[level]))
                {
                    *v = prev + cf * b;
                }
                let (rows, parent) = state.partial_orig.split_at_mut(level + 1);
                for (o, (prev, u)) in rows[level]
                    .iter_mut()
                    .zip(parent[0].iter().zip(&self.transform[level]))
                {
                    *o = prev + c * u;
                }
                self.descend(level - 1, state, visit);
            }
        }
        state.coeffs[level] = 0;
    }

    #[inline]
    fn emit(&self, c0: i64, state: &mut SearchState, visit: &mut impl FnMut(&LatticePoint)) {
        if c0 == 0 && state.coeffs[1..].iter().all(|&c| c == 0) {
            return;
        }
        let cf = c0 as f64;
        let mut norm_sq = 0.0;
        for (pv, (prev, b)) in state.point.vector.iter_mut().zip(
            state.partial_vec[1]
                .iter()
                .zip(&self.reduced_cols[0]),
        ) {
            let v = prev + cf * b;
            *pv = v;
            norm_sq += v * v;
        }
        let norm = norm_sq.sqrt();
        if norm > self.bound {
            return;
        }
        state.point.norm = norm;
        for (po, (prev, u)) in state
            .point
            .coeffs
            .iter_mut()
            .zip(state.partial_orig[1].iter().zip(&self.transform[0]))
        {
            *po = prev + c0 * u;
        }
        visit(&state.point);
    }
}

struct SearchState {
    coeffs: Vec<i64>,
    /// sigma[k][j] = sum_{i > k} mu[i][j] * c_i (valid for j < k)
    sigma: Vec<Vec<f64>>,
    /// partial[k] = squared Gram-Schmidt norm contributed by levels >= k
    partial: Vec<f64>,
    /// partial_vec[k] = sum_{i >= k} c_i * b_i
    partial_vec: Vec<Vec<f64>>,
    /// partial_orig[k] = sum_{i >= k} c_i * U_i (original-basis coordinates)
    partial_orig: Vec<Vec<i64>>,
    /// reusable output slot so the hot loop never allocates
    point: LatticePoint,
}

/// Two search modes for small values of an indefinite form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    /// |Q(x)| < eps
    TwoSided,
    /// 0 < Q(x) < eps
    PositiveSide,
}

impl SearchMode {
    pub fn parse(s: &str) -> Result<SearchMode> {
        match s {
            "two_sided" => Ok(SearchMode::TwoSided),
            "positive_side" => Ok(SearchMode::PositiveSide),
            other => Err(Error::InvalidParameter(format!(
                "unknown search mode '{other}' (expected two_sided or positive_side)"
            ))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            SearchMode::TwoSided => "two_sided",
            SearchMode::PositiveSide => "positive_side",
        }
    }

    #[inline]
    fn accepts(&self, value: f64, eps: f64) -> bool {
        match self {
            SearchMode::TwoSided => value.abs() < eps,
            SearchMode::PositiveSide => 0.0 < value && value < eps,
        }
    }
}

/// A small-value witness: the integer vector, its Euclidean norm, and Q(x).
#[derive(Debug, Clone, PartialEq)]
pub struct SmallValue {
    pub x: Vec<i64>,
    pub height: f64,
    pub value: f64,
}

/// The nonzero x in Z^n of minimum Euclidean norm with |Q(x)| < eps
/// (or 0 < Q(x) < eps), searching annuli outward up to `t_max`. Ties at equal
/// norm break lexicographically on coordinates. `None` when no solution
/// exists within `t_max`.
pub fn min_height_solution(
    form: &QuadraticForm,
    eps: f64,
    mode: SearchMode,
    t_max: f64,
) -> Result<Option<SmallValue>> {
    min_height_solution_above(form, eps, mode, 0, t_max)
}

/// Annulus search over { x : lo_sq < ||x||^2 <= t_max^2 }, for callers that
/// already know no solution has squared norm <= lo_sq (heights are monotone
/// in eps). Unit-width rings are swept in geometric batches: each batch
/// enumerates one ball and scans the annulus above the previous bound, so the
/// total tree work stays proportional to the final ball instead of the sum
/// over all rings. The result — minimum norm, lexicographic tie-break — is
/// identical to a width-1 ring sweep.
pub(crate) fn min_height_solution_above(
    form: &QuadraticForm,
    eps: f64,
    mode: SearchMode,
    lo_sq: i64,
    t_max: f64,
) -> Result<Option<SmallValue>> {
    if !form.is_indefinite() {
        let (p, q) = form.signature();
        return Err(Error::DefiniteForm { p, q });
    }
    if eps <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "eps must be positive, got {eps}"
        )));
    }
    if t_max <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "t_max must be positive, got {t_max}"
        )));
    }
    let lattice = Lattice::standard(form.dim());
    let mut lo_sq = lo_sq.max(0);
    let mut hi = ((lo_sq as f64).sqrt() * 1.5).max(2.0).min(t_max);
    loop {
        let mut best: Option<(i64, Vec<i64>, f64)> = None;
        for_each_point_in_ball(&lattice, hi, |p| {
            // integer coordinates of Z^n: norm^2 is exact in i64
            let norm_sq: i64 = p.coeffs.iter().map(|&c| c * c).sum();
            if norm_sq <= lo_sq || (norm_sq as f64) > t_max * t_max {
                return;
            }
            if let Some((bn, _, _)) = &best {
                if norm_sq > *bn {
                    return;
                }
            }
            let value = form.evaluate_unchecked(&p.vector);
            if !mode.accepts(value, eps) {
                return;
            }
            let better = match &best {
                None => true,
                Some((bn, bc, _)) => norm_sq < *bn || (norm_sq == *bn && p.coeffs < *bc),
            };
            if better {
                best = Some((norm_sq, p.coeffs.clone(), value));
            }
        })?;
        if let Some((norm_sq, x, value)) = best {
            return Ok(Some(SmallValue {
                height: (norm_sq as f64).sqrt(),
                x,
                value,
            }));
        }
        if hi >= t_max {
            return Ok(None);
        }
        lo_sq = (hi * hi).floor() as i64;
        hi = (hi * 1.5).min(t_max);
    }
}
