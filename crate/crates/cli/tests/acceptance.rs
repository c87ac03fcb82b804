//! Acceptance suite: one test per criterion, each printing a pass line with
//! the measured values. Statistical criteria run the q-ary reference sampler
//! with fixed seeds, so every run is reproducible.
//!
//! Run with: cargo test -p randlat-cli --test acceptance -- --nocapture

use randlat_core::oracles;
use randlat_core::*;
use std::time::Instant;

fn median(mut xs: Vec<f64>) -> f64 {
    assert!(!xs.is_empty());
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs[xs.len() / 2]
}

fn gm3() -> LatticeSampler {
    LatticeSampler::goldstein_mayer_default(3)
}

#[test]
fn criterion_01_siegel_mean() {
    let start = Instant::now();
    let region = Region::ball_with_volume(3, 20.0);
    let stats = mean_variance(&gm3(), &region, 2000, 42).unwrap();
    let elapsed = start.elapsed();
    assert!(
        (stats.mean - 20.0).abs() <= 1.5,
        "mean {} outside 20 +- 1.5",
        stats.mean
    );
    assert!(
        elapsed.as_secs_f64() < 120.0,
        "runtime {elapsed:?} above the 2 minute target"
    );
    println!(
        "[PASS] criterion 1 (Siegel mean): mean = {:.4} in 20 +- 1.5, {} trials in {:.2?}",
        stats.mean, stats.trials, elapsed
    );
}

#[test]
fn criterion_02_rogers_variance() {
    // C_3 must itself match the zeta expression to 1e-12
    let c3 = c_n(3).unwrap();
    let zeta2 = std::f64::consts::PI.powi(2) / 6.0;
    let zeta3 = 1.202_056_903_159_594_3; // Apery's constant
    assert!(
        (c3 - 8.0 * zeta2 / zeta3).abs() < 1e-12,
        "C_3 = {c3} drifted from 8 zeta(2)/zeta(3)"
    );
    let region = Region::ball_with_volume(3, 20.0);
    let stats = mean_variance(&gm3(), &region, 2000, 42).unwrap();
    let bound = 1.25 * c3 * 20.0;
    assert!(
        stats.variance <= bound,
        "variance {} above bound {bound}",
        stats.variance
    );
    println!(
        "[PASS] criterion 2 (Rogers variance): variance = {:.3} <= 1.25 * C_3 * 20 = {:.3} (C_3 = {:.6})",
        stats.variance, bound, c3
    );
}

#[test]
fn criterion_03_random_minkowski() {
    let volume = 50.0;
    let trials = 1000u64;
    let region = Region::ball_with_volume(3, volume);
    let hole = hole_probability(&gm3(), &region, trials, 7).unwrap();
    let stderr = (hole * (1.0 - hole) / trials as f64).sqrt();
    let bound = c_n(3).unwrap() / volume + 3.0 * stderr;
    assert!(hole <= bound, "hole fraction {hole} above {bound}");
    println!(
        "[PASS] criterion 3 (Random Minkowski): hole fraction = {:.4} <= C_3/50 + 3se = {:.4}",
        hole, bound
    );
}

#[test]
fn criterion_04_chebyshev_concentration() {
    let region = Region::ball_with_volume(3, 20.0);
    let trials = 2000u64;
    let m = 10.0;
    let tail = concentration_tail(&gm3(), &region, m, trials, 42).unwrap();
    let stderr = (tail * (1.0 - tail) / trials as f64).sqrt();
    let bound = c_n(3).unwrap() / (m * m) + 3.0 * stderr;
    assert!(tail <= bound, "tail fraction {tail} above {bound}");
    println!(
        "[PASS] criterion 4 (Chebyshev concentration): tail fraction = {:.4} <= C_3/100 + 3se = {:.4}",
        tail, bound
    );
}

#[test]
fn criterion_05_height_exponents() {
    let start = Instant::now();
    // n = 4, eps down to 2^-12
    let mut slopes4 = Vec::new();
    for i in 0..10u64 {
        let seed = derive_seed(888, i);
        let form = QuadraticForm::random(2, 2, seed).unwrap();
        let out = small_values_experiment(&form, 12, SearchMode::TwoSided, 60.0, seed).unwrap();
        if let Some(fit) = out.fit {
            slopes4.push(fit.slope);
        }
    }
    let median4 = median(slopes4);
    assert!(median4 <= 0.7, "n=4 median slope {median4} above 0.7");

    // n = 3, eps down to 2^-10
    let mut slopes3 = Vec::new();
    for i in 0..10u64 {
        let seed = derive_seed(777, i);
        let form = QuadraticForm::random(2, 1, seed).unwrap();
        let out = small_values_experiment(&form, 10, SearchMode::TwoSided, 256.0, seed).unwrap();
        if let Some(fit) = out.fit {
            slopes3.push(fit.slope);
        }
    }
    let median3 = median(slopes3);
    assert!(median3 <= 1.2, "n=3 median slope {median3} above 1.2");

    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 600.0,
        "runtime {elapsed:?} above the 10 minute target"
    );
    println!(
        "[PASS] criterion 5 (height exponents): n=4 median slope = {:.3} <= 0.7, n=3 median slope = {:.3} <= 1.2, total {:.2?}",
        median4, median3, elapsed
    );
}

fn error_grid() -> Vec<f64> {
    (0..6)
        .map(|i| 10.0 * 8f64.powf(i as f64 / 5.0))
        .collect()
}

#[test]
fn criterion_06_counting_main_term() {
    let grid = error_grid();
    let mut ratios = Vec::new();
    for i in 0..5u64 {
        let seed = derive_seed(4242, i);
        let form = QuadraticForm::random(2, 1, seed).unwrap();
        let cq = c_q_estimate(&form, 0.0, 1.0, &grid, 1_000_000, derive_seed(seed, 1)).unwrap();
        let out = error_term_experiment(&form, 0.0, 1.0, &grid, cq.c_q, seed).unwrap();
        ratios.push(out.main_term_ratio_at_max);
    }
    let med = median(ratios.clone());
    assert!(
        (0.8..=1.2).contains(&med),
        "median N/(c_Q T) at T=80 is {med}, ratios {ratios:?}"
    );
    println!(
        "[PASS] criterion 6 (counting main term): median N/(c_Q (b-a) T) at T=80 = {:.4} in [0.8, 1.2]",
        med
    );
}

#[test]
fn criterion_07_error_term_exponent() {
    let grid = error_grid();
    let mut exponents = Vec::new();
    for i in 0..10u64 {
        let seed = derive_seed(4242, i);
        let form = QuadraticForm::random(2, 1, seed).unwrap();
        let cq = c_q_estimate(&form, 0.0, 1.0, &grid, 1_000_000, derive_seed(seed, 1)).unwrap();
        let out = error_term_experiment(&form, 0.0, 1.0, &grid, cq.c_q, seed).unwrap();
        if let Some(fit) = out.residual_fit {
            exponents.push(fit.slope);
        }
    }
    assert!(exponents.len() >= 6, "need most forms to yield a residual fit");
    let med = median(exponents);
    assert!(med <= 1.5, "median residual exponent {med} above 1.5");
    println!(
        "[PASS] criterion 7 (error-term exponent): median |residual| growth exponent = {:.3} <= 1.5",
        med
    );
}

#[test]
fn criterion_08_dilates() {
    let sampler = LatticeSampler::Gaussian { n: 4 };
    let cube = Region::unit_cube(4);
    let grid: Vec<f64> = (0..11).map(|i| 5.0 + 2.0 * i as f64).collect(); // 5..25
    let out = dilates_experiment(&sampler, &cube, &grid, 0.5, 100, 99).unwrap();
    assert!(
        out.pass_fraction >= 0.9,
        "pass fraction {} below 0.9",
        out.pass_fraction
    );
    println!(
        "[PASS] criterion 8 (dilates): {:.0}% of 100 lattices satisfy |N - t^4| < t^(8/3+0.5) on t in [15, 25]",
        100.0 * out.pass_fraction
    );
}

#[test]
fn criterion_09_oracle_equivalence() {
    // branch-and-bound equals the brute-force coefficient box on 50 random
    // lattices, as exact ordered sets
    let mut points_checked = 0usize;
    for i in 0..50u64 {
        let n = 3 + (i % 3) as usize;
        let lattice = Lattice::gaussian_unimodular(n, derive_seed(0xACCE97, i)).unwrap();
        let t = 1.5 + (i % 6) as f64 * 0.5;
        let fast = points_in_ball(&lattice, t).unwrap();
        let brute = oracles::brute_force_points_in_ball(lattice.basis().clone(), t);
        assert_eq!(fast.len(), brute.len(), "count mismatch on lattice {i}");
        for (p, (bc, _)) in fast.iter().zip(&brute) {
            assert_eq!(&p.coeffs, bc, "set mismatch on lattice {i}");
        }
        points_checked += fast.len();
    }
    // the cone-shell count on Z^3
    let q = QuadraticForm::standard(2, 1).unwrap();
    let shell = Region::quad_shell(&q, -0.5, 0.5, 2.5).unwrap();
    let direct = count_region(&Lattice::standard(3), &shell).unwrap();
    let brute = oracles::brute_force_count_region(Matrix::identity(3), &shell);
    assert_eq!(direct, 8);
    assert_eq!(brute, 8);
    println!(
        "[PASS] criterion 9 (oracle equivalence): {points_checked} points matched exactly on 50 lattices; Z^3 cone shell count = 8"
    );
}

#[test]
fn criterion_10_determinism() {
    let bin = env!("CARGO_BIN_EXE_randlat");
    let base = std::env::temp_dir().join(format!("randlat-acc10-{}", std::process::id()));
    std::fs::create_dir_all(&base).unwrap();
    let run = |label: &str, threads: &str| -> String {
        let dir = base.join(label);
        let out = std::process::Command::new(bin)
            .args([
                "error-term-exp",
                "--n",
                "3",
                "--forms",
                "2",
                "--a",
                "0",
                "--b",
                "1",
                "--tgrid",
                "10,14,20,28,40,56",
                "--samples",
                "200000",
                "--seed",
                "31",
                "--threads",
                threads,
                "--output",
                dir.to_str().unwrap(),
            ])
            .output()
            .expect("binary runs");
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        std::fs::read_to_string(dir.join("records.csv")).unwrap()
    };
    let first = run("a", "1");
    let second = run("b", "1"); // identical rerun
    let third = run("c", "4"); // different worker count
    assert_eq!(first, second, "rerun changed records.csv");
    assert_eq!(first, third, "thread count changed records.csv");
    std::fs::remove_dir_all(&base).ok();
    println!(
        "[PASS] criterion 10 (determinism): records.csv byte-identical across reruns and --threads 1/4 ({} bytes)",
        first.len()
    );
}
