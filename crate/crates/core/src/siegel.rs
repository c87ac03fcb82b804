//! Monte Carlo statistics of the lattice-point count over random unimodular
//! lattices: mean, variance, hole probability and concentration tails,
//! together with the constant C_n = 8 zeta(n-1) / zeta(n) that bounds them.
//!
//! For an indicator function the transform counts nonzero lattice vectors in
//! the region; its expectation over the Haar measure is the region's volume
//! and its variance is at most C_n * |A|, with equality of second moments for
//! balls. Trials are independent streams derived from the master seed and are
//! reduced in trial order, so the statistics do not depend on how many worker
//! threads ran.

use crate::enumerate;
use crate::error::{Error, Result};
use crate::lattice::{Lattice, LatticeSampler};
use crate::region::Region;
use crate::seeding::derive_seed;
use crate::volume::unit_ball_volume;
use crate::zeta::zeta_int;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::Mutex;
use std::sync::OnceLock;

/// C_n = 8 zeta(n-1) / zeta(n), for n >= 3 (the series diverges at n = 2).
pub fn c_n(n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!(
            "C_n requires n >= 3, got {n}"
        )));
    }
    static CACHE: OnceLock<Mutex<HashMap<usize, f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(&v) = cache.lock().unwrap().get(&n) {
        return Ok(v);
    }
    let v = 8.0 * zeta_int(n as u32 - 1) / zeta_int(n as u32);
    cache.lock().unwrap().insert(n, v);
    Ok(v)
}

/// Dimension-indexed constants bundle.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Constants {
    pub n: usize,
    pub c_n: f64,
}

impl Constants {
    pub fn for_dim(n: usize) -> Result<Constants> {
        Ok(Constants { n, c_n: c_n(n)? })
    }
}

/// Radius of the centered ball with volume a in R^n (the spherical
/// symmetrization radius).
pub fn symmetrization_radius(a: f64, n: usize) -> f64 {
    assert!(a > 0.0, "volume must be positive");
    (a / unit_ball_volume(n)).powf(1.0 / n as f64)
}

/// Summary statistics of a Monte Carlo ensemble of counts.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SampleStats {
    pub trials: u64,
    pub mean: f64,
    /// unbiased sample variance
    pub variance: f64,
    pub std_error: f64,
    pub min: f64,
    pub max: f64,
}

impl SampleStats {
    /// Single-pass Welford reduction over counts in trial order.
    pub fn from_counts(counts: &[u64]) -> SampleStats {
        assert!(!counts.is_empty(), "need at least one count");
        let mut mean = 0.0f64;
        let mut m2 = 0.0f64;
        let mut min = f64::MAX;
        let mut max = f64::MIN;
        for (i, &c) in counts.iter().enumerate() {
            let x = c as f64;
            let delta = x - mean;
            mean += delta / (i as f64 + 1.0);
            m2 += delta * (x - mean);
            min = min.min(x);
            max = max.max(x);
        }
        let n = counts.len() as u64;
        let variance = if n > 1 { m2 / (n as f64 - 1.0) } else { 0.0 };
        SampleStats {
            trials: n,
            mean,
            variance,
            std_error: (variance / n as f64).sqrt(),
            min,
            max,
        }
    }

    /// Empirical second moment (1/n) sum x^2.
    pub fn second_moment(&self) -> f64 {
        let n = self.trials as f64;
        self.mean * self.mean + self.variance * (n - 1.0) / n
    }
}

/// The count of nonzero lattice vectors in the region: the transform of the
/// region's indicator function, an alias of `count_region`.
pub fn siegel_transform(lattice: &Lattice, region: &Region) -> Result<u64> {
    enumerate::count_region(lattice, region)
}

/// Per-trial counts: trial i samples a lattice on the stream
/// derive_seed(master_seed, i) and counts the region. Returned in trial
/// order as (trial_seed, count).
pub fn sample_counts(
    sampler: &LatticeSampler,
    region: &Region,
    trials: u64,
    master_seed: u64,
) -> Result<Vec<(u64, u64)>> {
    if sampler.n() != region.dim() {
        return Err(Error::DimensionMismatch {
            expected: sampler.n(),
            got: region.dim(),
        });
    }
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let seed = derive_seed(master_seed, i);
            let lattice = sampler.sample(seed)?;
            let count = enumerate::count_region(&lattice, region)?;
            Ok((seed, count))
        })
        .collect()
}

/// Mean/variance statistics of the count over `trials` independent lattices.
/// The region must carry a volume (closed form or attached Monte Carlo
/// estimate) since the contract targets mean ~ |A| and variance <= C_n |A|.
pub fn mean_variance(
    sampler: &LatticeSampler,
    region: &Region,
    trials: u64,
    master_seed: u64,
) -> Result<SampleStats> {
    if trials < 2 {
        return Err(Error::InvalidParameter(format!(
            "mean_variance requires trials >= 2, got {trials}"
        )));
    }
    if region.volume().is_none() {
        return Err(Error::InvalidParameter(
            "region needs a known or estimated volume; attach one with with_volume_estimate"
                .into(),
        ));
    }
    let counts: Vec<u64> = sample_counts(sampler, region, trials, master_seed)?
        .into_iter()
        .map(|(_, c)| c)
        .collect();
    Ok(SampleStats::from_counts(&counts))
}

/// Fraction of sampled lattices that miss the region entirely.
/// The Haar-measure bound is C_n / |A|.
pub fn hole_probability(
    sampler: &LatticeSampler,
    region: &Region,
    trials: u64,
    master_seed: u64,
) -> Result<f64> {
    if trials < 100 {
        return Err(Error::InvalidParameter(format!(
            "hole_probability requires trials >= 100, got {trials}"
        )));
    }
    let counts = sample_counts(sampler, region, trials, master_seed)?;
    let holes = counts.iter().filter(|(_, c)| *c == 0).count();
    Ok(holes as f64 / trials as f64)
}

/// Empirical fraction of trials with |count - |A|| > M |A|^(1/2); Chebyshev
/// with the variance bound gives the Haar-measure bound C_n M^-2.
pub fn concentration_tail(
    sampler: &LatticeSampler,
    region: &Region,
    m: f64,
    trials: u64,
    master_seed: u64,
) -> Result<f64> {
    if m <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "concentration threshold M must be positive, got {m}"
        )));
    }
    if trials < 2 {
        return Err(Error::InvalidParameter(format!(
            "concentration_tail requires trials >= 2, got {trials}"
        )));
    }
    let volume = region.volume().ok_or_else(|| {
        Error::InvalidParameter("concentration_tail requires a region with known volume".into())
    })?;
    let threshold = m * volume.sqrt();
    let counts = sample_counts(sampler, region, trials, master_seed)?;
    let exceed = counts
        .iter()
        .filter(|(_, c)| (*c as f64 - volume).abs() > threshold)
        .count();
    Ok(exceed as f64 / trials as f64)
}
