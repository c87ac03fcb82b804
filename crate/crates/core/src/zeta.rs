//! Riemann zeta at integer arguments s >= 2, by direct series summation.
//!
//! The series is summed in reverse (small terms first) up to K = 10^7 and
//! closed with the Euler-Maclaurin tail
//!     K^(1-s)/(s-1) + K^(-s)/2 + s K^(-s-1)/12,
//! whose truncation error is O(K^(-s-3)) — far below 1e-13 for every s >= 2.

const CUTOFF: u64 = 10_000_000;

/// zeta(s) for integer s >= 2.
pub fn zeta_int(s: u32) -> f64 {
    assert!(s >= 2, "zeta series requires s >= 2");
    let mut sum = 0.0f64;
    let neg_s = -(s as i32);
    let mut k = CUTOFF;
    while k >= 1 {
        sum += (k as f64).powi(neg_s);
        k -= 1;
    }
    let kf = CUTOFF as f64;
    let sf = s as f64;
    // tail: sum_{k > K} k^(-s)
    let tail = kf.powi(1 - s as i32) / (sf - 1.0) - 0.5 * kf.powi(neg_s)
        + sf / 12.0 * kf.powi(neg_s - 1);
    sum + tail
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn matches_closed_forms() {
        assert!((zeta_int(2) - PI * PI / 6.0).abs() < 1e-12);
        assert!((zeta_int(4) - PI.powi(4) / 90.0).abs() < 1e-12);
        assert!((zeta_int(6) - PI.powi(6) / 945.0).abs() < 1e-12);
    }

    #[test]
    fn matches_apery() {
        assert!((zeta_int(3) - 1.202_056_903_159_594_3).abs() < 1e-12);
    }

    #[test]
    fn tends_to_one() {
        assert!(zeta_int(50) > 1.0);
        assert!(zeta_int(50) - 1.0 < 1e-14);
    }
}
