//! Brute-force counting oracles, independent of the enumeration kernel.
//!
//! These scan an explicit integer coefficient box derived from the inverse
//! basis, with no reduction and no pruning. They exist only to check the
//! branch-and-bound enumerator and are compiled for tests (or behind the
//! `oracles` feature for downstream test suites).

use crate::linalg::{norm, Matrix};
use crate::region::Region;

const BOUNDARY_TOL: f64 = 1e-9;

/// Every nonzero integer combination c of the basis columns with
/// ||B c|| <= t + 1e-9, found by scanning the full coefficient box
/// |c_i| <= ||row_i(B^-1)|| * t. Sorted lexicographically by coefficients
/// with the last coordinate most significant, like `points_in_ball`.
pub fn brute_force_points_in_ball(basis: Matrix, t: f64) -> Vec<(Vec<i64>, Vec<f64>)> {
    let n = basis.n();
    let inv = basis.inverse().expect("oracle requires a nonsingular basis");
    let bound = t + BOUNDARY_TOL;
    let limits: Vec<i64> = (0..n)
        .map(|i| {
            let row: Vec<f64> = (0..n).map(|j| inv.get(i, j)).collect();
            (norm(&row) * bound).floor() as i64
        })
        .collect();

    let cols = basis.cols();
    let mut out = Vec::new();
    let mut c = vec![0i64; n];
    // odometer over the box, most significant digit last to match the
    // enumeration ordering contract
    for i in 0..n {
        c[i] = -limits[i];
    }
    loop {
        if c.iter().any(|&v| v != 0) {
            let mut v = vec![0.0; n];
            for (k, &ck) in c.iter().enumerate() {
                if ck != 0 {
                    for (vi, bi) in v.iter_mut().zip(&cols[k]) {
                        *vi += ck as f64 * bi;
                    }
                }
            }
            if norm(&v) <= bound {
                out.push((c.clone(), v));
            }
        }
        // increment
        let mut i = 0;
        loop {
            if i == n {
                out.sort_by(|a, b| a.0.iter().rev().cmp(b.0.iter().rev()));
                return out;
            }
            if c[i] < limits[i] {
                c[i] += 1;
                break;
            }
            c[i] = -limits[i];
            i += 1;
        }
    }
}

/// Region count over the same brute-force scan.
pub fn brute_force_count_region(basis: Matrix, region: &Region) -> u64 {
    brute_force_points_in_ball(basis, region.bounding_radius())
        .iter()
        .filter(|(_, v)| region.contains(v))
        .count() as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z2_unit_ball() {
        let pts = brute_force_points_in_ball(Matrix::identity(2), 1.0);
        assert_eq!(pts.len(), 4);
    }

    #[test]
    fn z3_shell_counts() {
        // r3(k) for k = 1..6: 6, 12, 8, 6, 24, 24
        let pts = brute_force_points_in_ball(Matrix::identity(3), 6f64.sqrt());
        assert_eq!(pts.len(), 6 + 12 + 8 + 6 + 24 + 24);
    }
}
