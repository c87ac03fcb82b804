//! Measurable regions of R^n as membership predicates with a bounding radius
//! and, when available, a known Lebesgue volume.
//!
//! Boundary convention: ball-like constructors treat the norm constraint as a
//! closed ball with 1e-9 slack; value constraints such as a < Q(x) < b are
//! strict. Boundary sets have measure zero so the conventions cannot move any
//! of the statistics, they only make small deterministic counts reproducible.

use crate::error::{Error, Result};
use crate::forms::QuadraticForm;
use crate::linalg::norm;
use crate::volume::ball_volume;
use std::fmt;
use std::sync::Arc;

pub(crate) const BOUNDARY_TOL: f64 = 1e-9;

type Predicate = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;

#[derive(Clone)]
pub struct Region {
    dim: usize,
    bounding_radius: f64,
    volume: Option<f64>,
    volume_std_error: f64,
    label: String,
    predicate: Predicate,
}

impl fmt::Debug for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Region")
            .field("dim", &self.dim)
            .field("bounding_radius", &self.bounding_radius)
            .field("volume", &self.volume)
            .field("label", &self.label)
            .finish()
    }
}

impl Region {
    /// Closed Euclidean ball of the given radius centered at the origin.
    pub fn ball(dim: usize, radius: f64) -> Region {
        assert!(radius > 0.0, "ball radius must be positive");
        Region {
            dim,
            bounding_radius: radius,
            volume: Some(ball_volume(dim, radius)),
            volume_std_error: 0.0,
            label: format!("ball(r={radius})"),
            predicate: Arc::new(move |x| norm(x) <= radius + BOUNDARY_TOL),
        }
    }

    /// Centered ball with prescribed volume.
    pub fn ball_with_volume(dim: usize, volume: f64) -> Region {
        assert!(volume > 0.0, "ball volume must be positive");
        let radius = (volume / ball_volume(dim, 1.0)).powf(1.0 / dim as f64);
        let mut r = Region::ball(dim, radius);
        r.volume = Some(volume);
        r.label = format!("ball(vol={volume})");
        r
    }

    /// The shell { x : a < Q(x) < b, ||x|| <= t }.
    pub fn quad_shell(form: &QuadraticForm, a: f64, b: f64, t: f64) -> Result<Region> {
        if a >= b {
            return Err(Error::InvalidParameter(format!(
                "shell interval requires a < b, got ({a}, {b})"
            )));
        }
        if t <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "shell radius must be positive, got {t}"
            )));
        }
        let f = form.clone();
        Ok(Region {
            dim: form.dim(),
            bounding_radius: t,
            volume: None,
            volume_std_error: 0.0,
            label: format!("quad_shell(a={a}, b={b}, T={t})"),
            predicate: Arc::new(move |x| {
                if norm(x) > t + BOUNDARY_TOL {
                    return false;
                }
                let v = f.evaluate_unchecked(x);
                a < v && v < b
            }),
        })
    }

    /// Axis-aligned box with the given side lengths, centered at `center`.
    pub fn box_at(center: &[f64], sides: &[f64]) -> Result<Region> {
        let dim = sides.len();
        if center.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: center.len(),
            });
        }
        if sides.iter().any(|&s| s <= 0.0) {
            return Err(Error::InvalidParameter(
                "box side lengths must be positive".into(),
            ));
        }
        let half: Vec<f64> = sides.iter().map(|s| s / 2.0).collect();
        let bounding_radius = norm(center) + norm(&half);
        let volume = sides.iter().product();
        let c = center.to_vec();
        let h = half.clone();
        Ok(Region {
            dim,
            bounding_radius,
            volume: Some(volume),
            volume_std_error: 0.0,
            label: format!("box(sides={sides:?}, center={center:?})"),
            predicate: Arc::new(move |x| {
                x.iter()
                    .zip(&c)
                    .zip(&h)
                    .all(|((xi, ci), hi)| (xi - ci).abs() <= *hi + BOUNDARY_TOL)
            }),
        })
    }

    /// Centered axis-aligned box.
    pub fn centered_box(sides: &[f64]) -> Result<Region> {
        Region::box_at(&vec![0.0; sides.len()], sides)
    }

    /// Centered cube of unit volume.
    pub fn unit_cube(dim: usize) -> Region {
        Region::centered_box(&vec![1.0; dim]).expect("unit cube is always valid")
    }

    /// The dilate t * A = { t x : x in A }, t > 0.
    pub fn dilate(&self, t: f64) -> Region {
        assert!(t > 0.0, "dilation factor must be positive");
        let base = self.clone();
        Region {
            dim: self.dim,
            bounding_radius: t * self.bounding_radius,
            volume: self.volume.map(|v| v * t.powi(self.dim as i32)),
            volume_std_error: self.volume_std_error * t.powi(self.dim as i32),
            label: format!("dilate({}, t={t})", self.label),
            predicate: Arc::new(move |x| {
                let scaled: Vec<f64> = x.iter().map(|v| v / t).collect();
                base.contains(&scaled)
            }),
        }
    }

    /// Arbitrary membership predicate. The caller guarantees that the
    /// predicate is false outside the bounding radius.
    pub fn from_predicate(
        dim: usize,
        bounding_radius: f64,
        volume: Option<f64>,
        label: impl Into<String>,
        predicate: impl Fn(&[f64]) -> bool + Send + Sync + 'static,
    ) -> Region {
        assert!(bounding_radius > 0.0, "bounding radius must be positive");
        Region {
            dim,
            bounding_radius,
            volume,
            volume_std_error: 0.0,
            label: label.into(),
            predicate: Arc::new(predicate),
        }
    }

    /// Region with no points, volume zero.
    pub fn empty(dim: usize) -> Region {
        Region {
            dim,
            bounding_radius: 1.0,
            volume: Some(0.0),
            volume_std_error: 0.0,
            label: "empty".into(),
            predicate: Arc::new(|_| false),
        }
    }

    /// Attaches a Monte Carlo volume estimate (value and standard error) to a
    /// region whose volume is not known in closed form.
    pub fn with_volume_estimate(mut self, value: f64, std_error: f64) -> Region {
        self.volume = Some(value);
        self.volume_std_error = std_error;
        self
    }

    #[inline]
    pub fn contains(&self, x: &[f64]) -> bool {
        debug_assert_eq!(x.len(), self.dim);
        (self.predicate)(x)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn bounding_radius(&self) -> f64 {
        self.bounding_radius
    }

    #[inline]
    pub fn volume(&self) -> Option<f64> {
        self.volume
    }

    #[inline]
    pub fn volume_std_error(&self) -> f64 {
        self.volume_std_error
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}
