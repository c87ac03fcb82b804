//! The four counting experiments, each a pure function of its configuration
//! and master seed: small-values height growth, the quantitative counting
//! error term, dilate counting for a.e. lattices, and counting along a
//! sequence of regions.
//!
//! Records are (parameter, observed, reference, residual, seed) rows with
//! residual = observed - reference exactly; rerunning a configuration yields
//! byte-identical CSV, independent of worker-thread count.

use crate::enumerate::{self, SearchMode};
use crate::error::{Error, Result};
use crate::forms::QuadraticForm;
use crate::lattice::{Lattice, LatticeSampler};
use crate::region::Region;
use crate::seeding::derive_seed;
use crate::volume::mc_volume;
use rayon::prelude::*;
use serde::Serialize;

/// One row of experiment output.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ExperimentRecord {
    pub parameter: f64,
    pub observed: f64,
    pub reference: f64,
    pub residual: f64,
    pub seed: u64,
}

impl ExperimentRecord {
    fn new(parameter: f64, observed: f64, reference: f64, seed: u64) -> ExperimentRecord {
        ExperimentRecord {
            parameter,
            observed,
            reference,
            residual: observed - reference,
            seed,
        }
    }
}

/// Renders records as CSV: `.` decimals, LF line endings, mandatory header.
pub fn records_to_csv(records: &[ExperimentRecord]) -> String {
    let mut out = String::from("parameter,observed,reference,residual,seed\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.parameter, r.observed, r.reference, r.residual, r.seed
        ));
    }
    out
}

/// Ordinary least squares fit on (log x, log y).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points_used: usize,
}

pub fn fit_loglog(pairs: &[(f64, f64)]) -> Result<FitResult> {
    if pairs.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "log-log fit needs at least 3 points, got {}",
            pairs.len()
        )));
    }
    if pairs.iter().any(|&(x, y)| x <= 0.0 || y <= 0.0) {
        return Err(Error::InvalidParameter(
            "log-log fit requires strictly positive data".into(),
        ));
    }
    let logs: Vec<(f64, f64)> = pairs.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let mean_x = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    if sxx < 1e-300 {
        return Err(Error::InvalidParameter(
            "log-log fit requires nonconstant abscissae".into(),
        ));
    }
    let sxy: f64 = logs
        .iter()
        .map(|p| (p.0 - mean_x) * (p.1 - mean_y))
        .sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = logs
        .iter()
        .map(|p| (p.1 - (intercept + slope * p.0)).powi(2))
        .sum();
    let ss_tot: f64 = logs.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let r_squared = if ss_tot < 1e-300 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    Ok(FitResult {
        slope,
        intercept,
        r_squared,
        points_used: logs.len(),
    })
}

/// Outcome of a small-values height sweep for one form.
#[derive(Debug, Clone, Serialize)]
pub struct SmallValuesOutcome {
    pub records: Vec<ExperimentRecord>,
    /// j levels where the search exhausted t_max; excluded from the fit.
    pub censored: Vec<u32>,
    /// Fit of log(height) against log(1/eps); `None` with fewer than 3
    /// uncensored levels.
    pub fit: Option<FitResult>,
}

/// For eps_j = 2^-j, j = 1..j_max, finds the minimum height of a nonzero
/// integer solution of |Q(x)| < eps_j (or the one-sided variant) and fits the
/// height growth exponent. The theory predicts slope 1/(n-2) + delta
/// eventually, as an upper bound.
///
/// Heights are non-decreasing in j, so each level resumes the ring search
/// from the previous height.
pub fn small_values_experiment(
    form: &QuadraticForm,
    j_max: u32,
    mode: SearchMode,
    t_max: f64,
    record_seed: u64,
) -> Result<SmallValuesOutcome> {
    if j_max < 6 {
        return Err(Error::InvalidParameter(format!(
            "small-values sweep needs j_max >= 6, got {j_max}"
        )));
    }
    if !form.is_indefinite() {
        let (p, q) = form.signature();
        return Err(Error::DefiniteForm { p, q });
    }
    let exponent = 1.0 / (form.dim() as f64 - 2.0);
    let mut records = Vec::new();
    let mut censored = Vec::new();
    let mut pairs = Vec::new();
    let mut lo_sq = 0i64;
    for j in 1..=j_max {
        let eps = 2f64.powi(-(j as i32));
        let sol = enumerate::min_height_solution_above(form, eps, mode, lo_sq, t_max)?;
        match sol {
            Some(s) => {
                let reference = eps.powf(-exponent);
                records.push(ExperimentRecord::new(eps, s.height, reference, record_seed));
                pairs.push((1.0 / eps, s.height));
                // heights are non-decreasing, and ties are possible, so the
                // next level resumes just below this squared norm
                lo_sq = (s.height * s.height).round() as i64 - 1;
            }
            None => {
                // solution sets shrink with eps: every later level is
                // censored as well
                censored.extend(j..=j_max);
                break;
            }
        }
    }
    let fit = if pairs.len() >= 3 {
        Some(fit_loglog(&pairs)?)
    } else {
        None
    };
    Ok(SmallValuesOutcome {
        records,
        censored,
        fit,
    })
}

/// Outcome of an error-term sweep for one form on Z^n.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorTermOutcome {
    pub records: Vec<ExperimentRecord>,
    /// Growth fit of |residual| against T (zero residuals dropped); `None`
    /// with fewer than 3 nonzero residuals.
    pub residual_fit: Option<FitResult>,
    /// observed / reference at the largest T.
    pub main_term_ratio_at_max: f64,
}

/// Counts N(Q, a, b, T) = #{ x in Z^n nonzero : a < Q(x) < b, ||x|| <= T }
/// over the grid against the main term c_Q (b-a) T^(n-2) and fits the growth
/// exponent of the absolute residual.
pub fn error_term_experiment(
    form: &QuadraticForm,
    a: f64,
    b: f64,
    t_grid: &[f64],
    c_q: f64,
    record_seed: u64,
) -> Result<ErrorTermOutcome> {
    if a >= b {
        return Err(Error::InvalidParameter(format!(
            "need a < b, got ({a}, {b})"
        )));
    }
    if t_grid.len() < 6 {
        return Err(Error::InvalidParameter(format!(
            "error-term sweep needs at least 6 grid points, got {}",
            t_grid.len()
        )));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) || t_grid[0] <= 0.0 {
        return Err(Error::InvalidParameter(
            "T grid must be positive and strictly increasing".into(),
        ));
    }
    let n = form.dim();
    let lattice = Lattice::standard(n);
    let t_max = *t_grid.last().unwrap();

    // one streaming enumeration at the largest radius; points are bucketed by
    // the smallest grid radius containing them (same closed-ball convention
    // as count_region)
    let mut buckets = vec![0u64; t_grid.len()];
    enumerate::for_each_point_in_ball(&lattice, t_max, |p| {
        let v = form.evaluate_unchecked(&p.vector);
        if !(a < v && v < b) {
            return;
        }
        let idx = t_grid.partition_point(|&t| t + 1e-9 < p.norm);
        if idx < buckets.len() {
            buckets[idx] += 1;
        }
    })?;
    let mut records = Vec::with_capacity(t_grid.len());
    let mut cumulative = 0u64;
    for (i, &t) in t_grid.iter().enumerate() {
        cumulative += buckets[i];
        let reference = c_q * (b - a) * t.powi(n as i32 - 2);
        records.push(ExperimentRecord::new(
            t,
            cumulative as f64,
            reference,
            record_seed,
        ));
    }
    let pairs: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.residual != 0.0)
        .map(|r| (r.parameter, r.residual.abs()))
        .collect();
    let residual_fit = if pairs.len() >= 3 {
        Some(fit_loglog(&pairs)?)
    } else {
        None
    };
    let last = records.last().unwrap();
    Ok(ErrorTermOutcome {
        main_term_ratio_at_max: last.observed / last.reference,
        records,
        residual_fit,
    })
}

/// Pass/fail verdict for one sampled lattice.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LatticeCheck {
    pub seed: u64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DilatesOutcome {
    pub records: Vec<ExperimentRecord>,
    pub lattice_checks: Vec<LatticeCheck>,
    pub pass_fraction: f64,
}

/// For each sampled lattice counts N(Lambda, tA) over the dilate grid and
/// checks |N - t^n| < t^(2n/3 + delta) on the upper half of the grid.
/// Requires n >= 4 and |A| = 1 within 1%.
pub fn dilates_experiment(
    sampler: &LatticeSampler,
    region: &Region,
    t_grid: &[f64],
    delta: f64,
    lattices: u64,
    master_seed: u64,
) -> Result<DilatesOutcome> {
    let n = sampler.n();
    if n < 4 {
        return Err(Error::InvalidParameter(format!(
            "dilate counting requires n >= 4, got {n}"
        )));
    }
    if region.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: region.dim(),
        });
    }
    if delta <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "delta must be positive, got {delta}"
        )));
    }
    if t_grid.is_empty() || t_grid[0] <= 0.0 || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "t grid must be positive and strictly increasing".into(),
        ));
    }
    if lattices == 0 {
        return Err(Error::InvalidParameter("need at least one lattice".into()));
    }
    // |A| = 1 within 1 percent, Monte Carlo verified when no volume is known
    let (vol, vol_err) = match region.volume() {
        Some(v) => (v, region.volume_std_error()),
        None => {
            let est = mc_volume(region, 1_000_000, derive_seed(master_seed, u64::MAX));
            (est.value, est.std_error)
        }
    };
    if (vol - 1.0).abs() > 0.01 + 3.0 * vol_err {
        return Err(Error::InvalidParameter(format!(
            "dilate experiment requires |A| = 1 +- 1%, measured {vol}"
        )));
    }

    let r_a = region.bounding_radius();
    let t_max = *t_grid.last().unwrap();
    let exponent = 2.0 * n as f64 / 3.0 + delta;
    let upper_start = t_grid.len() / 2;

    let per_lattice: Vec<(Vec<ExperimentRecord>, LatticeCheck)> = (0..lattices)
        .into_par_iter()
        .map(|i| -> Result<(Vec<ExperimentRecord>, LatticeCheck)> {
            let seed = derive_seed(master_seed, i);
            let lattice = sampler.sample(seed)?;
            let mut counts = vec![0u64; t_grid.len()];
            let mut scratch = vec![0.0f64; n];
            enumerate::for_each_point_in_ball(&lattice, t_max * r_a, |p| {
                // a point can only lie in tA when t r_A covers its norm
                let start = t_grid.partition_point(|&t| t * r_a + 1e-6 < p.norm);
                for (idx, &t) in t_grid.iter().enumerate().skip(start) {
                    for (s, v) in scratch.iter_mut().zip(&p.vector) {
                        *s = v / t;
                    }
                    if region.contains(&scratch) {
                        counts[idx] += 1;
                    }
                }
            })?;
            let mut records = Vec::with_capacity(t_grid.len());
            let mut passed = true;
            for (idx, &t) in t_grid.iter().enumerate() {
                let reference = t.powi(n as i32);
                let rec = ExperimentRecord::new(t, counts[idx] as f64, reference, seed);
                if idx >= upper_start && rec.residual.abs() >= t.powf(exponent) {
                    passed = false;
                }
                records.push(rec);
            }
            Ok((records, LatticeCheck { seed, passed }))
        })
        .collect::<Result<_>>()?;

    let mut records = Vec::new();
    let mut lattice_checks = Vec::new();
    for (recs, check) in per_lattice {
        records.extend(recs);
        lattice_checks.push(check);
    }
    let pass_fraction =
        lattice_checks.iter().filter(|c| c.passed).count() as f64 / lattices as f64;
    Ok(DilatesOutcome {
        records,
        lattice_checks,
        pass_fraction,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SequencesOutcome {
    pub records: Vec<ExperimentRecord>,
    /// (lattice seed, largest violating k; 0 when no violation occurred)
    pub last_violation: Vec<(u64, u32)>,
}

impl SequencesOutcome {
    /// Fraction of lattices with no violation at any k >= k0.
    pub fn fraction_clean_from(&self, k0: u32) -> f64 {
        let clean = self
            .last_violation
            .iter()
            .filter(|(_, last)| *last < k0)
            .count();
        clean as f64 / self.last_violation.len().max(1) as f64
    }
}

/// For each sampled lattice checks |N(Lambda, B_k) - |B_k|| < |B_k|^(1/2) f(k)
/// for k = 1..k_max and records the largest violating k. The weight function
/// must be square-summable (sum f(k)^-2 < infinity); a dyadic block-decay
/// check rejects weights, such as constants, that clearly are not.
pub fn sequences_experiment(
    sampler: &LatticeSampler,
    region_for_k: &(dyn Fn(u32) -> Region + Sync),
    f: &(dyn Fn(u32) -> f64 + Sync),
    k_max: u32,
    lattices: u64,
    master_seed: u64,
) -> Result<SequencesOutcome> {
    let n = sampler.n();
    if n < 3 {
        return Err(Error::InvalidParameter(format!(
            "sequence counting requires n >= 3, got {n}"
        )));
    }
    if k_max == 0 || lattices == 0 {
        return Err(Error::InvalidParameter(
            "need k_max >= 1 and at least one lattice".into(),
        ));
    }
    check_square_summable(f, k_max)?;

    let regions: Vec<Region> = (1..=k_max).map(region_for_k).collect();
    for (k, region) in regions.iter().enumerate() {
        if region.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: region.dim(),
            });
        }
        if region.volume().is_none() {
            return Err(Error::InvalidParameter(format!(
                "region B_{} needs a known or estimated volume",
                k + 1
            )));
        }
    }
    let radii: Vec<f64> = regions.iter().map(|r| r.bounding_radius()).collect();
    let r_max = radii.iter().cloned().fold(0.0, f64::max);

    let per_lattice: Vec<(Vec<ExperimentRecord>, (u64, u32))> = (0..lattices)
        .into_par_iter()
        .map(|i| -> Result<(Vec<ExperimentRecord>, (u64, u32))> {
            let seed = derive_seed(master_seed, i);
            let lattice = sampler.sample(seed)?;
            let mut counts = vec![0u64; regions.len()];
            enumerate::for_each_point_in_ball(&lattice, r_max, |p| {
                for (idx, region) in regions.iter().enumerate() {
                    if p.norm <= radii[idx] + 1e-6 && region.contains(&p.vector) {
                        counts[idx] += 1;
                    }
                }
            })?;
            let mut records = Vec::with_capacity(regions.len());
            let mut last_violation = 0u32;
            for (idx, region) in regions.iter().enumerate() {
                let k = idx as u32 + 1;
                let volume = region.volume().unwrap();
                let rec = ExperimentRecord::new(k as f64, counts[idx] as f64, volume, seed);
                if rec.residual.abs() >= volume.sqrt() * f(k) {
                    last_violation = k;
                }
                records.push(rec);
            }
            Ok((records, (seed, last_violation)))
        })
        .collect::<Result<_>>()?;

    let mut records = Vec::new();
    let mut last_violation = Vec::new();
    for (recs, lv) in per_lattice {
        records.extend(recs);
        last_violation.push(lv);
    }
    Ok(SequencesOutcome {
        records,
        last_violation,
    })
}

/// Finite proxy for sum f(k)^-2 < infinity: the dyadic block sums
/// sum_{K<k<=2K} f(k)^-2 must decay. A constant weight has ratio 2 and is
/// rejected; f(k) = k has ratio 1/2 and passes.
fn check_square_summable(f: &(dyn Fn(u32) -> f64 + Sync), k_max: u32) -> Result<()> {
    let block = |from: u32, to: u32| -> Result<f64> {
        let mut s = 0.0;
        for k in from..=to {
            let v = f(k);
            if v <= 0.0 || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "weight f({k}) = {v} must be positive and finite"
                )));
            }
            s += 1.0 / (v * v);
        }
        Ok(s)
    };
    let base = k_max.max(8);
    let b1 = block(base + 1, 2 * base)?;
    let b2 = block(2 * base + 1, 4 * base)?;
    if b2 > 0.9 * b1 {
        return Err(Error::InvalidParameter(
            "weight function fails the square-summability decay check (sum f(k)^-2 must converge)"
                .into(),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::rng_from_seed;
    use rand::Rng;

    #[test]
    fn fit_exact_square_law() {
        let pairs: Vec<(f64, f64)> = [1.0, 2.0, 4.0, 8.0].iter().map(|&x| (x, x * x)).collect();
        let fit = fit_loglog(&pairs).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert_eq!(fit.points_used, 4);
    }

    #[test]
    fn fit_constant_has_zero_slope() {
        let pairs = vec![(1.0, 3.0), (2.0, 3.0), (4.0, 3.0)];
        let fit = fit_loglog(&pairs).unwrap();
        assert!(fit.slope.abs() < 1e-12);
    }

    #[test]
    fn fit_noisy_power_law() {
        let mut rng = rng_from_seed(2);
        let pairs: Vec<(f64, f64)> = (1..=20)
            .map(|i| {
                let x = 1.5f64.powi(i);
                let noise = 1.0 + rng.random_range(-0.01..0.01);
                (x, 3.0 * x.powf(1.5) * noise)
            })
            .collect();
        let fit = fit_loglog(&pairs).unwrap();
        assert!(fit.slope > 1.45 && fit.slope < 1.55, "slope {}", fit.slope);
    }

    #[test]
    fn fit_rejects_bad_input() {
        assert!(fit_loglog(&[(1.0, 1.0), (2.0, 2.0)]).is_err());
        assert!(fit_loglog(&[(1.0, 1.0), (2.0, -2.0), (3.0, 3.0)]).is_err());
        assert!(fit_loglog(&[(2.0, 1.0), (2.0, 2.0), (2.0, 3.0)]).is_err());
    }

    #[test]
    fn csv_is_stable() {
        let records = vec![
            ExperimentRecord::new(0.5, 2.0, 1.75, 42),
            ExperimentRecord::new(0.25, 3.0, 3.5, 42),
        ];
        let csv = records_to_csv(&records);
        assert_eq!(
            csv,
            "parameter,observed,reference,residual,seed\n0.5,2,1.75,0.25,42\n0.25,3,3.5,-0.5,42\n"
        );
        assert_eq!(csv, records_to_csv(&records));
    }

    #[test]
    fn residuals_recompute_exactly() {
        let rec = ExperimentRecord::new(10.0, 123.0, 120.7, 7);
        assert_eq!(rec.residual, 123.0 - 120.7);
    }

    #[test]
    fn square_summability_check() {
        assert!(check_square_summable(&|k| k as f64, 40).is_ok());
        assert!(check_square_summable(&|_| 3.0, 40).is_err());
        assert!(check_square_summable(&|k| (k as f64).sqrt(), 40).is_err());
        assert!(check_square_summable(&|_| -1.0, 40).is_err());
    }
}
