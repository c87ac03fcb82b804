//! Unimodular lattices gZ^n: construction, LLL reduction and two samplers.
//!
//! The basis matrix stores the basis vectors b_1..b_n as columns and must
//! have determinant 1 up to 1e-9. Two randomized constructions are provided:
//!
//! * `gaussian_unimodular` — a det-normalized Gaussian matrix. Absolutely
//!   continuous on the unimodular group, which is what "almost every lattice"
//!   statements need, but not Haar.
//! * `goldstein_mayer` — the q-ary family with columns
//!   {e_i + a_i e_n : i < n} and {q e_n}, scaled by q^(-1/n), a_i uniform in
//!   {0..q-1}. As q grows this family equidistributes toward the Haar
//!   probability measure, so it is the reference sampler for mean/variance
//!   statistics (default q = 1_000_003).

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::seeding::rng_from_seed;
use rand::Rng;
use serde::{Deserialize, Serialize};

const DET_TOL: f64 = 1e-9;
pub const DEFAULT_LLL_DELTA: f64 = 0.99;
const SIZE_REDUCTION_THRESHOLD: f64 = 0.5001;
pub const DEFAULT_GM_MODULUS: u64 = 1_000_003;

#[derive(Debug, Clone)]
pub struct Lattice {
    dim: usize,
    basis: Matrix,
}

/// Wire format: `{ "dim": n, "basis": [n*n doubles, row-major] }`.
#[derive(Serialize, Deserialize)]
struct LatticeWire {
    dim: usize,
    basis: Vec<f64>,
}

impl Lattice {
    /// The standard integer lattice Z^n.
    pub fn standard(n: usize) -> Lattice {
        Lattice {
            dim: n,
            basis: Matrix::identity(n),
        }
    }

    /// Wraps a basis matrix. With `normalize` the matrix is scaled by
    /// |det|^(-1/n) (and a column is flipped if det < 0); otherwise the
    /// determinant must already be 1 within 1e-9.
    pub fn from_basis(m: Matrix, normalize: bool) -> Result<Lattice> {
        let n = m.n();
        if n < 2 {
            return Err(Error::InvalidParameter(format!(
                "lattices require n >= 2, got {n}"
            )));
        }
        let det = m.det();
        if det.abs() < 1e-12 {
            return Err(Error::SingularMatrix { det });
        }
        let basis = if normalize {
            let mut m = m;
            if det < 0.0 {
                for i in 0..n {
                    let v = m.get(i, 0);
                    m.set(i, 0, -v);
                }
            }
            m.scale(det.abs().powf(-1.0 / n as f64))
        } else {
            m
        };
        let det = basis.det();
        if (det - 1.0).abs() > DET_TOL {
            return Err(Error::NotUnimodular { det });
        }
        Ok(Lattice { dim: n, basis })
    }

    /// Det-normalized Gaussian basis; deterministic given the seed.
    pub fn gaussian_unimodular(n: usize, seed: u64) -> Result<Lattice> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!(
                "lattices require n >= 2, got {n}"
            )));
        }
        let mut rng = rng_from_seed(seed);
        let m = linalg::random_unimodular(n, &mut rng, 100)?;
        Lattice::from_basis(m, false)
    }

    /// q-ary lattice with uniformly random congruence coefficients,
    /// scaled to determinant 1. Requires a prime q >= 101.
    pub fn goldstein_mayer(n: usize, q: u64, seed: u64) -> Result<Lattice> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!(
                "lattices require n >= 2, got {n}"
            )));
        }
        if q < 101 || !is_prime(q) {
            return Err(Error::BadModulus { q });
        }
        let mut rng = rng_from_seed(seed);
        let coeffs: Vec<u64> = (0..n - 1).map(|_| rng.random_range(0..q)).collect();
        Ok(Self::goldstein_mayer_with_coeffs(n, q, &coeffs))
    }

    /// The q-ary basis for explicit congruence coefficients a_1..a_{n-1}.
    pub fn goldstein_mayer_with_coeffs(n: usize, q: u64, coeffs: &[u64]) -> Lattice {
        assert_eq!(coeffs.len(), n - 1, "need n-1 congruence coefficients");
        let scale = (q as f64).powf(-1.0 / n as f64);
        let mut m = Matrix::zeros(n);
        for i in 0..n - 1 {
            m.set(i, i, scale);
            m.set(n - 1, i, coeffs[i] as f64 * scale);
        }
        m.set(n - 1, n - 1, q as f64 * scale);
        Lattice { dim: n, basis: m }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn det(&self) -> f64 {
        self.basis.det()
    }

    /// Same lattice with a Lovász-reduced basis. The change of basis is
    /// verified to be integral with determinant +-1.
    pub fn lll_reduced(&self, delta: f64) -> Result<Lattice> {
        let out = lll_reduce_with_transform(&self.basis, delta)?;
        Ok(Lattice {
            dim: self.dim,
            basis: out.reduced,
        })
    }

    pub fn to_json(&self) -> String {
        let wire = LatticeWire {
            dim: self.dim,
            basis: self.basis.as_flat().to_vec(),
        };
        serde_json::to_string(&wire).expect("lattice serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Lattice> {
        let wire: LatticeWire = serde_json::from_str(s)
            .map_err(|e| Error::InvalidParameter(format!("bad lattice JSON: {e}")))?;
        let basis = Matrix::from_flat(wire.dim, &wire.basis)?;
        Lattice::from_basis(basis, false)
    }
}

/// Sampler specification shared by the statistics and experiment drivers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LatticeSampler {
    Gaussian { n: usize },
    GoldsteinMayer { n: usize, q: u64 },
}

impl LatticeSampler {
    pub fn goldstein_mayer_default(n: usize) -> LatticeSampler {
        LatticeSampler::GoldsteinMayer {
            n,
            q: DEFAULT_GM_MODULUS,
        }
    }

    pub fn n(&self) -> usize {
        match self {
            LatticeSampler::Gaussian { n } => *n,
            LatticeSampler::GoldsteinMayer { n, .. } => *n,
        }
    }

    pub fn sample(&self, seed: u64) -> Result<Lattice> {
        match self {
            LatticeSampler::Gaussian { n } => Lattice::gaussian_unimodular(*n, seed),
            LatticeSampler::GoldsteinMayer { n, q } => Lattice::goldstein_mayer(*n, *q, seed),
        }
    }
}

fn is_prime(q: u64) -> bool {
    if q < 2 {
        return false;
    }
    if q.is_multiple_of(2) {
        return q == 2;
    }
    let mut d = 3u64;
    while d * d <= q {
        if q.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

pub(crate) struct LllOutput {
    /// Reduced basis, columns are the new basis vectors.
    pub reduced: Matrix,
    /// Integer change of basis U with reduced = basis * U, column-major:
    /// transform[k] holds the original-basis coefficients of reduced column k.
    pub transform: Vec<Vec<i64>>,
}

/// Floating-point LLL with delta in (0.25, 1), size-reduction threshold
/// 0.5001 and twice-through Gram-Schmidt per vector.
pub(crate) fn lll_reduce_with_transform(basis: &Matrix, delta: f64) -> Result<LllOutput> {
    if delta <= 0.25 || delta >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "LLL delta must lie in (0.25, 1), got {delta}"
        )));
    }
    let n = basis.n();
    let mut cols: Vec<Vec<f64>> = basis.cols();
    let mut u: Vec<Vec<i64>> = (0..n)
        .map(|k| (0..n).map(|i| i64::from(i == k)).collect())
        .collect();

    let mut ortho = vec![vec![0.0; n]; n];
    let mut mu = vec![vec![0.0; n]; n];
    let mut bstar_sq = vec![0.0; n];

    // Gram-Schmidt for columns start.. with one re-orthogonalization pass.
    let gso = |cols: &[Vec<f64>],
               ortho: &mut Vec<Vec<f64>>,
               mu: &mut Vec<Vec<f64>>,
               bstar_sq: &mut Vec<f64>,
               start: usize|
     -> Result<()> {
        for i in start..n {
            let mut b = cols[i].clone();
            for _pass in 0..2 {
                for j in 0..i {
                    let c = linalg::dot(&b, &ortho[j]) / bstar_sq[j];
                    for (bk, ok) in b.iter_mut().zip(&ortho[j]) {
                        *bk -= c * ok;
                    }
                }
            }
            for j in 0..i {
                mu[i][j] = linalg::dot(&cols[i], &ortho[j]) / bstar_sq[j];
            }
            bstar_sq[i] = linalg::dot(&b, &b);
            if bstar_sq[i] <= 0.0 || !bstar_sq[i].is_finite() {
                return Err(Error::Numerical(
                    "Gram-Schmidt norm collapsed during LLL".into(),
                ));
            }
            ortho[i] = b;
        }
        Ok(())
    };

    gso(&cols, &mut ortho, &mut mu, &mut bstar_sq, 0)?;

    let mut k = 1;
    let mut steps = 0usize;
    let max_steps = 10_000 * n * n;
    while k < n {
        steps += 1;
        if steps > max_steps {
            return Err(Error::Numerical("LLL failed to converge".into()));
        }
        // size-reduce column k against columns k-1 .. 0
        for j in (0..k).rev() {
            if mu[k][j].abs() > SIZE_REDUCTION_THRESHOLD {
                let r = mu[k][j].round();
                let ri = r as i64;
                for i in 0..n {
                    let sub = r * cols[j][i];
                    cols[k][i] -= sub;
                    u[k][i] -= ri * u[j][i];
                }
                for i in 0..j {
                    mu[k][i] -= r * mu[j][i];
                }
                mu[k][j] -= r;
            }
        }
        let lovasz_ok =
            bstar_sq[k] >= (delta - mu[k][k - 1] * mu[k][k - 1]) * bstar_sq[k - 1];
        if lovasz_ok {
            k += 1;
        } else {
            cols.swap(k, k - 1);
            u.swap(k, k - 1);
            gso(&cols, &mut ortho, &mut mu, &mut bstar_sq, k - 1)?;
            k = (k - 1).max(1);
        }
    }

    let cond = {
        let max = bstar_sq.iter().cloned().fold(f64::MIN, f64::max);
        let min = bstar_sq.iter().cloned().fold(f64::MAX, f64::min);
        (max / min).sqrt()
    };
    if cond > 1e12 {
        return Err(Error::Numerical(format!(
            "reduced basis still pathologically conditioned ({cond:e})"
        )));
    }

    // verify the change of basis is integral unimodular
    let udet = int_matrix_det(&u);
    if udet.abs() != 1 {
        return Err(Error::Numerical(format!(
            "LLL change of basis has determinant {udet}, expected +-1"
        )));
    }
    debug_assert!({
        let ucols: Vec<Vec<f64>> = u
            .iter()
            .map(|c| c.iter().map(|&v| v as f64).collect())
            .collect();
        let um = Matrix::from_cols(&ucols).unwrap();
        let prod = basis.mul(&um);
        let reduced = Matrix::from_cols(&cols).unwrap();
        let mut max_err = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                max_err = max_err.max((prod.get(i, j) - reduced.get(i, j)).abs());
            }
        }
        max_err < 1e-6 * basis.max_abs().max(1.0)
    });

    Ok(LllOutput {
        reduced: Matrix::from_cols(&cols)?,
        transform: u,
    })
}

/// Exact determinant of a small integer matrix (column-major) by the
/// fraction-free Bareiss elimination in i128.
fn int_matrix_det(cols: &[Vec<i64>]) -> i64 {
    let n = cols.len();
    let mut a: Vec<Vec<i128>> = (0..n)
        .map(|i| (0..n).map(|j| cols[j][i] as i128).collect())
        .collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if a[k][k] == 0 {
            let Some(swap) = (k + 1..n).find(|&i| a[i][k] != 0) else {
                return 0;
            };
            a.swap(k, swap);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    (sign * a[n - 1][n - 1]) as i64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm;
    use crate::seeding::derive_seed;

    #[test]
    fn standard_lattice_from_identity() {
        let l = Lattice::from_basis(Matrix::identity(3), false).unwrap();
        assert_eq!(l.basis().as_flat(), Matrix::identity(3).as_flat());
    }

    #[test]
    fn normalization_rescales_to_unit_det() {
        let l = Lattice::from_basis(Matrix::identity(3).scale(2.0), true).unwrap();
        for i in 0..3 {
            assert!((l.basis().get(i, i) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_basis_rejected() {
        let m = Matrix::from_rows(&[
            vec![1.0, 2.0, 3.0],
            vec![2.0, 4.0, 6.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        assert!(Lattice::from_basis(m, true).is_err());
    }

    #[test]
    fn gaussian_sampler_det_and_determinism() {
        for seed in [0u64, 1, 42, 123456] {
            let l = Lattice::gaussian_unimodular(3, seed).unwrap();
            assert!((l.det() - 1.0).abs() <= 1e-9);
            let l2 = Lattice::gaussian_unimodular(3, seed).unwrap();
            assert_eq!(l.basis().as_flat(), l2.basis().as_flat());
        }
    }

    #[test]
    fn goldstein_mayer_construction() {
        // zero coefficients: diagonal with the q corner, so q^(-1/n) e_1 is a
        // basis vector and q^((n-1)/n) e_n is always present.
        let q = 101u64;
        let l = Lattice::goldstein_mayer_with_coeffs(3, q, &[0, 0]);
        let s = (q as f64).powf(-1.0 / 3.0);
        assert!((l.basis().get(0, 0) - s).abs() < 1e-12);
        assert!((l.basis().get(2, 2) - (q as f64).powf(2.0 / 3.0)).abs() < 1e-9);
        assert!((l.det() - 1.0).abs() <= 1e-9);

        for seed in [7u64, 8, 9] {
            let l = Lattice::goldstein_mayer(3, 1_000_003, seed).unwrap();
            assert!((l.det() - 1.0).abs() <= 1e-9);
            // the forced long basis vector q^((n-1)/n) e_n
            let col = l.basis().col(2);
            assert!((col[2] - (1_000_003f64).powf(2.0 / 3.0)).abs() < 1e-6);
            assert_eq!(col[0], 0.0);
            assert_eq!(col[1], 0.0);
        }
    }

    #[test]
    fn goldstein_mayer_rejects_bad_modulus() {
        assert!(Lattice::goldstein_mayer(3, 100, 0).is_err()); // too small & composite
        assert!(Lattice::goldstein_mayer(3, 1_000_000, 0).is_err()); // composite
        assert!(Lattice::goldstein_mayer(3, 97, 0).is_err()); // prime but < 101
    }

    #[test]
    fn lll_identity_fixed_point() {
        let l = Lattice::standard(3);
        let red = l.lll_reduced(DEFAULT_LLL_DELTA).unwrap();
        assert_eq!(red.basis().as_flat(), Matrix::identity(3).as_flat());
    }

    #[test]
    fn lll_shortens_skewed_basis() {
        // columns (e1 + 10 e2, e2, e3)
        let m = Matrix::from_cols(&[
            vec![1.0, 10.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        let l = Lattice::from_basis(m.clone(), false).unwrap();
        let red = l.lll_reduced(DEFAULT_LLL_DELTA).unwrap();
        let orig_max = m.cols().iter().map(|c| norm(c)).fold(0.0, f64::max);
        let red_max = red
            .basis()
            .cols()
            .iter()
            .map(|c| norm(c))
            .fold(0.0, f64::max);
        assert!(red_max <= orig_max + 1e-12);
        assert!((red.det().abs() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn lll_preserves_det_on_random_lattices() {
        for i in 0..100u64 {
            let l = Lattice::gaussian_unimodular(4, derive_seed(500, i)).unwrap();
            let red = l.lll_reduced(DEFAULT_LLL_DELTA).unwrap();
            assert!((red.det().abs() - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn lll_transform_is_integral_unimodular() {
        let l = Lattice::goldstein_mayer(4, 1009, 3).unwrap();
        let out = lll_reduce_with_transform(l.basis(), DEFAULT_LLL_DELTA).unwrap();
        assert_eq!(int_matrix_det(&out.transform).abs(), 1);
    }

    #[test]
    fn json_roundtrip() {
        let l = Lattice::gaussian_unimodular(3, 5).unwrap();
        let back = Lattice::from_json(&l.to_json()).unwrap();
        assert_eq!(l.basis().as_flat(), back.basis().as_flat());
    }

    #[test]
    fn primality() {
        assert!(is_prime(101));
        assert!(is_prime(1_000_003));
        assert!(!is_prime(1_000_001)); // 101 * 9901
        assert!(!is_prime(1));
    }
}
