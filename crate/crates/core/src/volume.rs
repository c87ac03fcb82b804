//! Lebesgue volumes: closed-form balls, Monte Carlo region volumes, the
//! counting constant c_Q of quadratic shells, and the thin-shell estimator of
//! the surface integral over { P = 0 }.

use crate::error::{Error, Result};
use crate::forms::QuadraticForm;
use crate::linalg::norm;
use crate::region::Region;
use crate::seeding::{derive_seed, rng_from_seed};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const MC_BATCH: u64 = 65_536;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VolumeMethod {
    ClosedForm,
    MonteCarlo,
    ThinShell,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct VolumeEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
    pub method: VolumeMethod,
}

impl VolumeEstimate {
    pub fn closed_form(value: f64) -> VolumeEstimate {
        VolumeEstimate {
            value,
            std_error: 0.0,
            samples: 0,
            method: VolumeMethod::ClosedForm,
        }
    }
}

/// Volume of the n-ball of radius r: pi^(n/2) r^n / Gamma(n/2 + 1).
pub fn ball_volume(n: usize, r: f64) -> f64 {
    assert!(r >= 0.0, "ball radius must be nonnegative");
    unit_ball_volume(n) * r.powi(n as i32)
}

/// Volume of the unit n-ball. Gamma(n/2 + 1) is built by the recurrence
/// Gamma(x+1) = x Gamma(x) starting from Gamma(1) = 1 or Gamma(1/2) = sqrt(pi),
/// so the constant is exact to rounding for every integer dimension.
pub fn unit_ball_volume(n: usize) -> f64 {
    let pi = std::f64::consts::PI;
    let mut gamma = if n.is_multiple_of(2) { 1.0 } else { pi.sqrt() };
    let mut x = if n.is_multiple_of(2) { 1.0 } else { 0.5 };
    while x < n as f64 / 2.0 + 0.5 {
        gamma *= x;
        x += 1.0;
    }
    pi.powf(n as f64 / 2.0) / gamma
}

/// Monte Carlo volume by uniform sampling in the bounding ball (Gaussian
/// direction, radius u^(1/n) R). Deterministic given the seed and independent
/// of worker-thread count: fixed 65536-sample batches, batch b on its own
/// stream derived from (seed, b), hit counts summed in index order.
pub fn mc_volume(region: &Region, samples: u64, seed: u64) -> VolumeEstimate {
    assert!(samples >= 10_000, "mc_volume needs at least 10^4 samples");
    let n = region.dim();
    let r = region.bounding_radius();
    let ball = ball_volume(n, r);

    let batches = samples.div_ceil(MC_BATCH);
    let hits: u64 = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = rng_from_seed(derive_seed(seed, b));
            let count = if b == batches - 1 {
                samples - b * MC_BATCH
            } else {
                MC_BATCH
            };
            let mut hits = 0u64;
            let mut x = vec![0.0f64; n];
            for _ in 0..count {
                loop {
                    for xi in x.iter_mut() {
                        *xi = rng.sample(StandardNormal);
                    }
                    let len = norm(&x);
                    if len > 1e-300 {
                        let u: f64 = rng.random_range(0.0..1.0);
                        let scale = r * u.powf(1.0 / n as f64) / len;
                        x.iter_mut().for_each(|v| *v *= scale);
                        break;
                    }
                }
                if region.contains(&x) {
                    hits += 1;
                }
            }
            hits
        })
        .collect::<Vec<u64>>()
        .into_iter()
        .sum();

    let p = hits as f64 / samples as f64;
    VolumeEstimate {
        value: p * ball,
        std_error: ball * (p * (1.0 - p) / samples as f64).sqrt(),
        samples,
        method: VolumeMethod::MonteCarlo,
    }
}

/// One grid point of a c_Q estimate.
#[derive(Debug, Clone, Serialize)]
pub struct CqPoint {
    pub t: f64,
    pub volume: f64,
    pub std_error: f64,
    /// volume / ((b-a) T^(n-2))
    pub normalized: f64,
    /// normalized - c_q
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CqEstimate {
    pub c_q: f64,
    pub points: Vec<CqPoint>,
}

/// Estimates the shell-volume constant c_Q defined by
/// |Q^-1(a,b) cap B(0,T)| ~ c_Q (b-a) T^(n-2): Monte Carlo volumes over the
/// T grid, normalized by (b-a) T^(n-2); c_Q is the mean of the normalized
/// values over the top half of the grid (the closest-to-asymptotic part),
/// with per-T residuals reported rather than hidden.
pub fn c_q_estimate(
    form: &QuadraticForm,
    a: f64,
    b: f64,
    t_grid: &[f64],
    samples_per_t: u64,
    seed: u64,
) -> Result<CqEstimate> {
    if a >= b {
        return Err(Error::InvalidParameter(format!(
            "need a < b, got ({a}, {b})"
        )));
    }
    if t_grid.len() < 4 {
        return Err(Error::InvalidParameter(format!(
            "T grid needs at least 4 points, got {}",
            t_grid.len()
        )));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) || t_grid[0] <= 0.0 {
        return Err(Error::InvalidParameter(
            "T grid must be positive and strictly increasing".into(),
        ));
    }
    let n = form.dim();
    let mut points: Vec<CqPoint> = Vec::with_capacity(t_grid.len());
    for (idx, &t) in t_grid.iter().enumerate() {
        let region = Region::quad_shell(form, a, b, t)?;
        let est = mc_volume(&region, samples_per_t, derive_seed(seed, idx as u64));
        let scale = (b - a) * t.powi(n as i32 - 2);
        points.push(CqPoint {
            t,
            volume: est.value,
            std_error: est.std_error,
            normalized: est.value / scale,
            residual: 0.0,
        });
    }
    let top = &points[t_grid.len() / 2..];
    let c_q = top.iter().map(|p| p.normalized).sum::<f64>() / top.len() as f64;
    for p in points.iter_mut() {
        p.residual = p.normalized - c_q;
    }
    Ok(CqEstimate { c_q, points })
}

/// Thin-shell estimator of the surface integral of 1/||grad P|| over
/// { P = 0 } cap B(0,1): vol{ |P| < eta } / (2 eta). Converges to the
/// surface integral as eta -> 0 by the co-area formula; the default
/// eta = 1e-3 keeps the Taylor bias far below Monte Carlo noise.
pub fn c_p_surface(
    form: &QuadraticForm,
    eta: f64,
    samples: u64,
    seed: u64,
) -> Result<VolumeEstimate> {
    if eta <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "thin-shell eta must be positive, got {eta}"
        )));
    }
    let f = form.clone();
    let region = Region::from_predicate(form.dim(), 1.0, None, format!("thin_shell(eta={eta})"), {
        move |x| norm(x) <= 1.0 + 1e-9 && f.evaluate_unchecked(x).abs() < eta
    });
    let est = mc_volume(&region, samples, seed);
    Ok(VolumeEstimate {
        value: est.value / (2.0 * eta),
        std_error: est.std_error / (2.0 * eta),
        samples,
        method: VolumeMethod::ThinShell,
    })
}

pub const DEFAULT_THIN_SHELL_ETA: f64 = 1e-3;
