//! Real quadratic forms of signature (p, q): construction, evaluation and
//! unimodular deformation.
//!
//! A form is stored as its symmetric Gram matrix G, with Q(x) = x^T G x.
//! Construction validates symmetry (1e-12 per entry), rejects degenerate
//! forms (an eigenvalue below 1e-9 * max|G|), and caches the eigenvalue sign
//! counts as the signature.

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::seeding::rng_from_seed;
use serde::{Deserialize, Serialize};

const SYMMETRY_TOL: f64 = 1e-12;
const UNIMODULAR_TOL: f64 = 1e-9;
const DEGENERACY_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct QuadraticForm {
    dim: usize,
    gram: Matrix,
    signature: (usize, usize),
}

/// Wire format: `{ "dim": n, "gram": [n*n doubles, row-major] }`.
#[derive(Serialize, Deserialize)]
struct FormWire {
    dim: usize,
    gram: Vec<f64>,
}

impl QuadraticForm {
    /// Validates symmetry and nondegeneracy, computes the signature.
    pub fn new(gram: Matrix) -> Result<Self> {
        let n = gram.n();
        if n < 3 {
            return Err(Error::InvalidParameter(format!(
                "quadratic forms require n >= 3 variables, got {n}"
            )));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let delta = (gram.get(i, j) - gram.get(j, i)).abs();
                if delta > SYMMETRY_TOL {
                    return Err(Error::NotSymmetric {
                        row: i,
                        col: j,
                        delta,
                        tol: SYMMETRY_TOL,
                    });
                }
            }
        }
        let threshold = DEGENERACY_REL_TOL * gram.max_abs();
        let eig = gram.symmetric_eigenvalues();
        let mut p = 0;
        let mut q = 0;
        for &lambda in &eig {
            if lambda.abs() <= threshold {
                return Err(Error::DegenerateForm {
                    value: lambda,
                    threshold,
                });
            }
            if lambda > 0.0 {
                p += 1;
            } else {
                q += 1;
            }
        }
        Ok(QuadraticForm {
            dim: n,
            gram,
            signature: (p, q),
        })
    }

    /// The diagonal form Q0 = diag(+1 x p, -1 x q). Requires p, q >= 1
    /// (indefinite) and p + q >= 3.
    pub fn standard(p: usize, q: usize) -> Result<Self> {
        if p == 0 || q == 0 {
            return Err(Error::BadSignature {
                p,
                q,
                reason: "definite signature; an indefinite form requires p >= 1 and q >= 1",
            });
        }
        if p + q < 3 {
            return Err(Error::BadSignature {
                p,
                q,
                reason: "need p + q >= 3 variables",
            });
        }
        let entries: Vec<f64> = (0..p)
            .map(|_| 1.0)
            .chain((0..q).map(|_| -1.0))
            .collect();
        QuadraticForm::new(Matrix::diagonal(&entries))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn gram(&self) -> &Matrix {
        &self.gram
    }

    #[inline]
    pub fn signature(&self) -> (usize, usize) {
        self.signature
    }

    pub fn is_indefinite(&self) -> bool {
        self.signature.0 >= 1 && self.signature.1 >= 1
    }

    /// Q(x) = x^T G x.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(self.evaluate_unchecked(x))
    }

    /// Evaluation without the length check, for validated hot paths.
    #[inline]
    pub fn evaluate_unchecked(&self, x: &[f64]) -> f64 {
        let n = self.dim;
        let mut acc = 0.0;
        for i in 0..n {
            let xi = x[i];
            if xi == 0.0 {
                continue;
            }
            let mut row = 0.0;
            for j in 0..n {
                row += self.gram.get(i, j) * x[j];
            }
            acc += xi * row;
        }
        acc
    }

    /// grad Q(x) = 2 G x; satisfies <grad Q(x), x> = 2 Q(x).
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(self.gram.matvec(x).iter().map(|v| 2.0 * v).collect())
    }

    /// The pullback Q o g with gram g^T G g, for unimodular g
    /// (|det g - 1| <= 1e-9). Signature is preserved (Sylvester) and
    /// re-verified by reconstruction.
    pub fn deform(&self, g: &Matrix) -> Result<QuadraticForm> {
        if g.n() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: g.n(),
            });
        }
        let det = g.det();
        if (det - 1.0).abs() > UNIMODULAR_TOL {
            return Err(Error::NotUnimodular { det });
        }
        let gram = g.transpose().mul(&self.gram).mul(g);
        // force exact symmetry against rounding drift in the triple product
        let mut sym = gram.clone();
        for i in 0..self.dim {
            for j in 0..self.dim {
                sym.set(i, j, 0.5 * (gram.get(i, j) + gram.get(j, i)));
            }
        }
        let out = QuadraticForm::new(sym)?;
        debug_assert_eq!(out.signature, self.signature);
        Ok(out)
    }

    /// A random deformation of the standard (p, q) form by a Gaussian draw on
    /// the unimodular matrices. Deterministic given the seed; the resulting
    /// form is irrational with probability one (not certified).
    pub fn random(p: usize, q: usize, seed: u64) -> Result<QuadraticForm> {
        let base = QuadraticForm::standard(p, q)?;
        let mut rng = rng_from_seed(seed);
        let g = linalg::random_unimodular(p + q, &mut rng, 100)?;
        base.deform(&g)
    }

    pub fn to_json(&self) -> String {
        let wire = FormWire {
            dim: self.dim,
            gram: self.gram.as_flat().to_vec(),
        };
        serde_json::to_string(&wire).expect("form serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<QuadraticForm> {
        let wire: FormWire = serde_json::from_str(s)
            .map_err(|e| Error::InvalidParameter(format!("bad form JSON: {e}")))?;
        let gram = Matrix::from_flat(wire.dim, &wire.gram)?;
        QuadraticForm::new(gram)
    }

    /// Gram matrix as CSV rows for plotting.
    pub fn gram_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|j| format!("{}", self.gram.get(i, j)))
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_unimodular;

    fn diag(entries: &[f64]) -> QuadraticForm {
        QuadraticForm::new(Matrix::diagonal(entries)).unwrap()
    }

    #[test]
    fn evaluate_diagonal_forms() {
        let q = diag(&[1.0, 1.0, -1.0]);
        assert_eq!(q.evaluate(&[1.0, 1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(q.evaluate(&[0.0, 0.0, 0.0]).unwrap(), 0.0);
        let q4 = diag(&[1.0, 2.0, -1.0, -2.0]);
        assert_eq!(q4.evaluate(&[1.0, 1.0, 1.0, 1.0]).unwrap(), 0.0);
    }

    #[test]
    fn evaluate_rejects_dimension_mismatch() {
        let q = diag(&[1.0, 1.0, -1.0]);
        assert!(q.evaluate(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn evaluate_scales_quadratically_and_is_even() {
        let q = QuadraticForm::random(2, 1, 5).unwrap();
        let x = [0.3, -1.2, 2.5];
        let qx = q.evaluate(&x).unwrap();
        let x2: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        assert!((q.evaluate(&x2).unwrap() - 4.0 * qx).abs() < 1e-10);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((q.evaluate(&neg).unwrap() - qx).abs() < 1e-12);
    }

    #[test]
    fn gradient_examples() {
        let q = diag(&[1.0, 1.0, -1.0]);
        assert_eq!(q.gradient(&[1.0, 0.0, 0.0]).unwrap(), vec![2.0, 0.0, 0.0]);
        assert_eq!(q.gradient(&[1.0, 1.0, 1.0]).unwrap(), vec![2.0, 2.0, -2.0]);
    }

    #[test]
    fn gradient_matches_central_differences() {
        // Central differences are exact for quadratics up to rounding.
        let q = QuadraticForm::random(2, 2, 11).unwrap();
        let x = [0.7, -0.4, 1.1, 0.2];
        let grad = q.gradient(&x).unwrap();
        let h = 1e-5;
        for i in 0..4 {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[i] += h;
            xm[i] -= h;
            let fd = (q.evaluate(&xp).unwrap() - q.evaluate(&xm).unwrap()) / (2.0 * h);
            assert!(
                (fd - grad[i]).abs() < 1e-6,
                "component {i}: fd={fd} grad={}",
                grad[i]
            );
        }
    }

    #[test]
    fn gradient_euler_identity() {
        let q = QuadraticForm::random(3, 1, 23).unwrap();
        let x = [1.5, -0.3, 0.8, -2.1];
        let g = q.gradient(&x).unwrap();
        let lhs = linalg::dot(&g, &x);
        assert!((lhs - 2.0 * q.evaluate(&x).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn standard_forms() {
        let q = QuadraticForm::standard(2, 1).unwrap();
        assert_eq!(q.signature(), (2, 1));
        assert_eq!(q.gram().get(0, 0), 1.0);
        assert_eq!(q.gram().get(2, 2), -1.0);
        assert_eq!(QuadraticForm::standard(2, 2).unwrap().signature(), (2, 2));
        assert_eq!(QuadraticForm::standard(3, 1).unwrap().signature(), (3, 1));
        assert!(QuadraticForm::standard(3, 0).is_err());
        assert!(QuadraticForm::standard(0, 3).is_err());
    }

    #[test]
    fn deform_identity_is_noop() {
        let q0 = QuadraticForm::standard(2, 1).unwrap();
        let q = q0.deform(&Matrix::identity(3)).unwrap();
        assert_eq!(q.gram().as_flat(), q0.gram().as_flat());
    }

    #[test]
    fn deform_rejects_non_unimodular() {
        let q0 = QuadraticForm::standard(2, 1).unwrap();
        assert!(q0.deform(&Matrix::identity(3).scale(1.1)).is_err());
    }

    #[test]
    fn deform_transfer_identity() {
        // evaluate(Q0 o g, x) = evaluate(Q0, g x) on random pairs.
        let q0 = QuadraticForm::standard(2, 1).unwrap();
        let mut rng = rng_from_seed(99);
        for _ in 0..100 {
            let g = random_unimodular(3, &mut rng, 100).unwrap();
            let q = q0.deform(&g).unwrap();
            let x: Vec<f64> = (0..3)
                .map(|_| rand::Rng::random_range(&mut rng, -2.0..2.0))
                .collect();
            let lhs = q.evaluate(&x).unwrap();
            let rhs = q0.evaluate(&g.matvec(&x)).unwrap();
            let scale = lhs.abs().max(rhs.abs()).max(1e-6);
            assert!((lhs - rhs).abs() / scale < 1e-10);
        }
    }

    #[test]
    fn deform_composition() {
        let q0 = QuadraticForm::standard(2, 2).unwrap();
        let mut rng = rng_from_seed(3);
        let g = random_unimodular(4, &mut rng, 100).unwrap();
        let h = random_unimodular(4, &mut rng, 100).unwrap();
        let lhs = q0.deform(&g).unwrap().deform(&h).unwrap();
        let rhs = q0.deform(&g.mul(&h)).unwrap();
        let scale = rhs.gram().max_abs();
        for i in 0..4 {
            for j in 0..4 {
                assert!(
                    (lhs.gram().get(i, j) - rhs.gram().get(i, j)).abs() / scale < 1e-10
                );
            }
        }
    }

    #[test]
    fn signature_invariance_under_deformation() {
        let q0 = QuadraticForm::standard(2, 1).unwrap();
        let mut rng = rng_from_seed(17);
        for _ in 0..100 {
            let g = random_unimodular(3, &mut rng, 100).unwrap();
            assert_eq!(q0.deform(&g).unwrap().signature(), (2, 1));
        }
    }

    #[test]
    fn random_form_is_deterministic_with_correct_signature() {
        let a = QuadraticForm::random(2, 1, 1234).unwrap();
        let b = QuadraticForm::random(2, 1, 1234).unwrap();
        assert_eq!(a.gram().as_flat(), b.gram().as_flat());
        assert_eq!(a.signature(), (2, 1));
        let c = QuadraticForm::random(2, 1, 1235).unwrap();
        assert_ne!(a.gram().as_flat(), c.gram().as_flat());
    }

    #[test]
    fn random_form_has_no_small_exact_zeros() {
        // Irrationality proxy: no integer vector in the ||x|| <= 5 box is an
        // exact zero of a Gaussian-deformed form.
        for seed in 0..20u64 {
            let q = QuadraticForm::random(2, 1, seed).unwrap();
            for x0 in -5i64..=5 {
                for x1 in -5i64..=5 {
                    for x2 in -5i64..=5 {
                        if x0 == 0 && x1 == 0 && x2 == 0 {
                            continue;
                        }
                        let v = [x0 as f64, x1 as f64, x2 as f64];
                        if v.iter().map(|t| t * t).sum::<f64>() > 25.0 {
                            continue;
                        }
                        assert_ne!(q.evaluate(&v).unwrap(), 0.0, "seed {seed}, x {v:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_asymmetric_and_degenerate_grams() {
        let mut m = Matrix::identity(3);
        m.set(0, 1, 1e-6);
        assert!(QuadraticForm::new(m).is_err());
        assert!(QuadraticForm::new(Matrix::diagonal(&[1.0, 1.0, 0.0])).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let q = QuadraticForm::random(2, 1, 7).unwrap();
        let back = QuadraticForm::from_json(&q.to_json()).unwrap();
        assert_eq!(q.gram().as_flat(), back.gram().as_flat());
        assert_eq!(back.signature(), (2, 1));
    }

    #[test]
    fn gram_csv_layout() {
        let q = diag(&[1.0, 2.0, -1.0]);
        assert_eq!(q.gram_csv(), "1,0,0\n0,2,0\n0,0,-1\n");
    }
}
