//! Subcommand implementations. Every command validates its numeric flags
//! before any computation starts, writes complete output files only (temp
//! file + atomic rename), and echoes its resolved configuration into
//! summary.json.

use crate::args::{CliError, CliResult, ParsedArgs};
use randlat_core::*;
use serde_json::json;
use std::path::{Path, PathBuf};

pub fn dispatch(args: &ParsedArgs) -> CliResult<()> {
    match args.command.as_str() {
        "sample-lattice" => sample_lattice(args),
        "count" => count(args),
        "small-values" => small_values(args),
        "volume" => volume_cmd(args),
        "cq" => cq(args),
        "siegel-stats" => siegel_stats(args),
        "minkowski" => minkowski(args),
        "chebyshev" => chebyshev(args),
        "small-values-exp" => small_values_exp(args),
        "error-term-exp" => error_term_exp(args),
        "dilates-exp" => dilates_exp(args),
        "sequences-exp" => sequences_exp(args),
        "help" | "--help" | "-h" => {
            print_usage();
            Ok(())
        }
        other => Err(CliError::Validation(format!(
            "unknown subcommand '{other}'; run 'randlat help' for usage"
        ))),
    }
}

pub fn print_usage() {
    println!(
        "randlat — lattice point statistics and quadratic form value experiments

subcommands:
  sample-lattice   --n N --sampler gm|gaussian [--q Q] --seed S [--output FILE]
  count            --basis-file F --region ball|shell|box --T R
                   [--form-file F --a A --b B] [--sides s1,s2,.. --center c1,c2,..]
  small-values     --form-file F --eps E --mode two_sided|positive_side --tmax T
  volume           --region ball|shell|box ... --samples N --seed S
  cq               --form-file F --a A --b B --tgrid t1,t2,.. [--samples N] [--seed S]
  siegel-stats     --n N --volume V --trials T --seed S [--sampler gm|gaussian] [--q Q]
  minkowski        --n N --volume V --trials T --seed S [...]
  chebyshev        --n N --volume V --M M --trials T --seed S [...]
  small-values-exp --n N [--signature p,q] --jmax J --tmax T --seeds K --seed S
                   [--mode two_sided|positive_side] [--delta D]
  error-term-exp   --n N [--signature p,q] --a A --b B --forms K --seed S
                   [--tgrid ..] [--samples N] [--delta D]
  dilates-exp      --n N --lattices K --seed S [--delta D] [--tgrid ..] [--sampler ..]
  sequences-exp    --n N --kmax K --lattices L --seed S [--fpow P] [--sampler ..]

common flags: --output DIR --format csv|json --threads N --config FILE"
    );
}

// ---------------------------------------------------------------- helpers

fn write_atomic(path: &Path, content: &str) -> CliResult<()> {
    let tmp = path.with_extension(format!("tmp.{}", std::process::id()));
    std::fs::write(&tmp, content)
        .map_err(|e| CliError::Compute(format!("cannot write {}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path)
        .map_err(|e| CliError::Compute(format!("cannot finalize {}: {e}", path.display())))?;
    Ok(())
}

fn out_dir(args: &ParsedArgs) -> CliResult<PathBuf> {
    let dir = PathBuf::from(args.get("output").unwrap_or("."));
    std::fs::create_dir_all(&dir)
        .map_err(|e| CliError::Compute(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}

fn load_form(args: &ParsedArgs, flag: &str) -> CliResult<QuadraticForm> {
    let path = args.require(flag)?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read --{flag} {path}: {e}")))?;
    Ok(QuadraticForm::from_json(&text)?)
}

fn load_lattice(args: &ParsedArgs, flag: &str) -> CliResult<Lattice> {
    let path = args.require(flag)?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read --{flag} {path}: {e}")))?;
    Ok(Lattice::from_json(&text)?)
}

fn require_dim(args: &ParsedArgs, min: usize) -> CliResult<usize> {
    let n = args.require_usize("n")?;
    if n < min {
        return Err(CliError::Validation(format!(
            "--n must be at least {min} for {}, got {n}",
            args.command
        )));
    }
    Ok(n)
}

fn sampler_from_flags(args: &ParsedArgs, n: usize) -> CliResult<LatticeSampler> {
    match args.get("sampler").unwrap_or("gm") {
        "gm" => {
            let q = args.get_u64("q", DEFAULT_GM_MODULUS)?;
            Ok(LatticeSampler::GoldsteinMayer { n, q })
        }
        "gaussian" => Ok(LatticeSampler::Gaussian { n }),
        other => Err(CliError::Validation(format!(
            "--sampler must be 'gm' or 'gaussian', got '{other}'"
        ))),
    }
}

/// Region from --region {ball,shell,box} and its shape flags.
fn region_from_flags(args: &ParsedArgs, dim_hint: Option<usize>) -> CliResult<Region> {
    match args.require("region")? {
        "ball" => {
            let t = args.require_f64("T")?;
            if t <= 0.0 {
                return Err(CliError::Validation("--T must be positive".into()));
            }
            let dim = match dim_hint {
                Some(d) => d,
                None => args.require_usize("n")?,
            };
            Ok(Region::ball(dim, t))
        }
        "shell" => {
            let form = load_form(args, "form-file")?;
            let a = args.require_f64("a")?;
            let b = args.require_f64("b")?;
            let t = args.require_f64("T")?;
            if let Some(d) = dim_hint {
                if d != form.dim() {
                    return Err(CliError::Validation(format!(
                        "form dimension {} does not match lattice dimension {d}",
                        form.dim()
                    )));
                }
            }
            Ok(Region::quad_shell(&form, a, b, t)?)
        }
        "box" => {
            let sides = args
                .get_f64_list("sides")?
                .ok_or_else(|| CliError::Validation("missing required flag --sides".into()))?;
            let center = args
                .get_f64_list("center")?
                .unwrap_or_else(|| vec![0.0; sides.len()]);
            if let Some(d) = dim_hint {
                if d != sides.len() {
                    return Err(CliError::Validation(format!(
                        "--sides lists {} lengths but the lattice has dimension {d}",
                        sides.len()
                    )));
                }
            }
            Ok(Region::box_at(&center, &sides)?)
        }
        other => Err(CliError::Validation(format!(
            "--region must be ball, shell or box, got '{other}'"
        ))),
    }
}

fn counts_csv(counts: &[(u64, u64)]) -> String {
    let mut out = String::from("trial_index,seed,count\n");
    for (i, (seed, count)) in counts.iter().enumerate() {
        out.push_str(&format!("{i},{seed},{count}\n"));
    }
    out
}

/// Stdout print that tolerates a closed pipe; output files are already on
/// disk by the time anything is printed.
fn print_stdout(s: &str) {
    use std::io::Write;
    let _ = std::io::stdout().write_all(s.as_bytes());
}

fn emit_summary(args: &ParsedArgs, dir: &Path, summary: &serde_json::Value, csv: &str) -> CliResult<()> {
    let mut summary = summary.clone();
    if let Some(map) = summary.as_object_mut() {
        map.insert(
            "version".into(),
            serde_json::Value::String(format!("randlat {}", env!("CARGO_PKG_VERSION"))),
        );
    }
    let pretty = serde_json::to_string_pretty(&summary).expect("summary serialization");
    write_atomic(&dir.join("summary.json"), &(pretty.clone() + "\n"))?;
    match args.get("format").unwrap_or("json") {
        "csv" => print_stdout(csv),
        "json" => print_stdout(&format!("{pretty}\n")),
        other => {
            return Err(CliError::Validation(format!(
                "--format must be csv or json, got '{other}'"
            )))
        }
    }
    Ok(())
}

fn median(mut xs: Vec<f64>) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Some(xs[xs.len() / 2])
}

// ------------------------------------------------------------- subcommands

fn sample_lattice(args: &ParsedArgs) -> CliResult<()> {
    let n = require_dim(args, 2)?;
    let seed = args.require_u64("seed")?;
    let sampler = sampler_from_flags(args, n)?;
    let lattice = sampler.sample(seed)?;
    let payload = lattice.to_json();
    match args.get("output") {
        Some(path) => write_atomic(Path::new(path), &(payload + "\n"))?,
        None => print_stdout(&format!("{payload}\n")),
    }
    Ok(())
}

/// Simple query commands print to stdout; with --output they also record the
/// result and the resolved config in DIR/summary.json.
fn emit_query_summary(args: &ParsedArgs, result: serde_json::Value) -> CliResult<()> {
    if args.get("output").is_some() {
        let dir = out_dir(args)?;
        let summary = json!({
            "config": args.config_echo(),
            "result": result,
            "version": format!("randlat {}", env!("CARGO_PKG_VERSION")),
        });
        let pretty = serde_json::to_string_pretty(&summary).expect("summary serialization");
        write_atomic(&dir.join("summary.json"), &(pretty + "\n"))?;
    }
    Ok(())
}

fn count(args: &ParsedArgs) -> CliResult<()> {
    let lattice = load_lattice(args, "basis-file")?;
    let region = region_from_flags(args, Some(lattice.dim()))?;
    let n = count_region(&lattice, &region)?;
    print_stdout(&format!("{n}\n"));
    emit_query_summary(args, json!(n))
}

fn small_values(args: &ParsedArgs) -> CliResult<()> {
    let form = load_form(args, "form-file")?;
    let eps = args.require_f64("eps")?;
    let mode = SearchMode::parse(args.get("mode").unwrap_or("two_sided"))?;
    let t_max = args.require_f64("tmax")?;
    let sol = min_height_solution(&form, eps, mode, t_max)?;
    let payload = match sol {
        Some(s) => json!({ "x": s.x, "height": s.height, "value": s.value }),
        None => serde_json::Value::Null,
    };
    print_stdout(&format!("{}\n", serde_json::to_string(&payload).unwrap()));
    emit_query_summary(args, payload)
}

fn volume_cmd(args: &ParsedArgs) -> CliResult<()> {
    let region = region_from_flags(args, None)?;
    let samples = args.get_u64("samples", 1_000_000)?;
    if samples < 10_000 {
        return Err(CliError::Validation(
            "--samples must be at least 10000".into(),
        ));
    }
    let seed = args.get_u64("seed", 0)?;
    let est = mc_volume(&region, samples, seed);
    print_stdout(&format!("{}\n", serde_json::to_string(&est).unwrap()));
    emit_query_summary(args, serde_json::to_value(est).unwrap())
}

fn cq(args: &ParsedArgs) -> CliResult<()> {
    let form = load_form(args, "form-file")?;
    let a = args.require_f64("a")?;
    let b = args.require_f64("b")?;
    let grid = args
        .get_f64_list("tgrid")?
        .ok_or_else(|| CliError::Validation("missing required flag --tgrid".into()))?;
    let samples = args.get_u64("samples", 1_000_000)?;
    let seed = args.get_u64("seed", 0)?;
    let est = c_q_estimate(&form, a, b, &grid, samples, seed)?;

    let dir = out_dir(args)?;
    let mut csv = String::from("T,volume,std_error,normalized\n");
    for p in &est.points {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            p.t, p.volume, p.std_error, p.normalized
        ));
    }
    write_atomic(&dir.join("cq.csv"), &csv)?;
    let summary = json!({
        "config": args.config_echo(),
        "c_q": est.c_q,
        "points": est.points,
    });
    emit_summary(args, &dir, &summary, &csv)
}

fn siegel_stats(args: &ParsedArgs) -> CliResult<()> {
    let n = require_dim(args, 3)?;
    let volume = args.require_f64("volume")?;
    if volume <= 0.0 {
        return Err(CliError::Validation("--volume must be positive".into()));
    }
    let trials = args.require_u64("trials")?;
    if trials < 2 {
        return Err(CliError::Validation("--trials must be at least 2".into()));
    }
    let seed = args.require_u64("seed")?;
    let sampler = sampler_from_flags(args, n)?;
    let region = Region::ball_with_volume(n, volume);

    let counts = sample_counts(&sampler, &region, trials, seed)?;
    let stats = SampleStats::from_counts(
        &counts.iter().map(|(_, c)| *c).collect::<Vec<_>>(),
    );
    let cn = c_n(n)?;
    let mean_tolerance = 3.0 * (cn * volume / trials as f64).sqrt();
    let variance_bound = 1.25 * cn * volume;
    let summary = json!({
        "config": args.config_echo(),
        "stats": stats,
        "volume": volume,
        "c_n": cn,
        "mean_tolerance": mean_tolerance,
        "mean_ok": (stats.mean - volume).abs() <= mean_tolerance,
        "variance_bound": variance_bound,
        "variance_ok": stats.variance <= variance_bound,
        // observational only: for balls the second moment over exact Haar
        // measure equals |A|^2 + C_n |A|; the empirical value converges
        // slowly because the count distribution is heavy-tailed
        "second_moment": stats.second_moment(),
        "ball_second_moment_reference": volume * volume + cn * volume,
    });
    let dir = out_dir(args)?;
    write_atomic(&dir.join("counts.csv"), &counts_csv(&counts))?;
    emit_summary(args, &dir, &summary, &counts_csv(&counts))
}

fn minkowski(args: &ParsedArgs) -> CliResult<()> {
    let n = require_dim(args, 3)?;
    let volume = args.require_f64("volume")?;
    if volume <= 0.0 {
        return Err(CliError::Validation("--volume must be positive".into()));
    }
    let trials = args.require_u64("trials")?;
    if trials < 100 {
        return Err(CliError::Validation(
            "--trials must be at least 100 for hole estimation".into(),
        ));
    }
    let seed = args.require_u64("seed")?;
    let sampler = sampler_from_flags(args, n)?;
    let region = Region::ball_with_volume(n, volume);
    let counts = sample_counts(&sampler, &region, trials, seed)?;
    let holes = counts.iter().filter(|(_, c)| *c == 0).count() as f64;
    let hole_fraction = holes / trials as f64;
    let stderr = (hole_fraction * (1.0 - hole_fraction) / trials as f64).sqrt();
    let bound = c_n(n)? / volume;
    let summary = json!({
        "config": args.config_echo(),
        "hole_fraction": hole_fraction,
        "std_error": stderr,
        "bound": bound,
        "bound_ok": hole_fraction <= bound + 3.0 * stderr,
    });
    let dir = out_dir(args)?;
    write_atomic(&dir.join("counts.csv"), &counts_csv(&counts))?;
    emit_summary(args, &dir, &summary, &counts_csv(&counts))
}

fn chebyshev(args: &ParsedArgs) -> CliResult<()> {
    let n = require_dim(args, 3)?;
    let volume = args.require_f64("volume")?;
    if volume <= 0.0 {
        return Err(CliError::Validation("--volume must be positive".into()));
    }
    let m = args.require_f64("M")?;
    if m <= 0.0 {
        return Err(CliError::Validation("--M must be positive".into()));
    }
    let trials = args.require_u64("trials")?;
    if trials < 2 {
        return Err(CliError::Validation("--trials must be at least 2".into()));
    }
    let seed = args.require_u64("seed")?;
    let sampler = sampler_from_flags(args, n)?;
    let region = Region::ball_with_volume(n, volume);
    let counts = sample_counts(&sampler, &region, trials, seed)?;
    let threshold = m * volume.sqrt();
    let exceed = counts
        .iter()
        .filter(|(_, c)| (*c as f64 - volume).abs() > threshold)
        .count() as f64;
    let tail_fraction = exceed / trials as f64;
    let stderr = (tail_fraction * (1.0 - tail_fraction) / trials as f64).sqrt();
    let bound = c_n(n)? / (m * m);
    let summary = json!({
        "config": args.config_echo(),
        "tail_fraction": tail_fraction,
        "std_error": stderr,
        "bound": bound,
        "bound_ok": tail_fraction <= bound + 3.0 * stderr,
    });
    let dir = out_dir(args)?;
    write_atomic(&dir.join("counts.csv"), &counts_csv(&counts))?;
    emit_summary(args, &dir, &summary, &counts_csv(&counts))
}

fn small_values_exp(args: &ParsedArgs) -> CliResult<()> {
    let n = require_dim(args, 3)?;
    let (p, q) = args.get_signature((n - 1, 1))?;
    if p + q != n {
        return Err(CliError::Validation(format!(
            "--signature {p},{q} does not sum to --n {n}"
        )));
    }
    let j_max = args.require_u64("jmax")? as u32;
    if j_max < 6 {
        return Err(CliError::Validation("--jmax must be at least 6".into()));
    }
    let t_max = args.require_f64("tmax")?;
    let mode = SearchMode::parse(args.get("mode").unwrap_or("two_sided"))?;
    let seeds = args.require_u64("seeds")?;
    if seeds == 0 {
        return Err(CliError::Validation("--seeds must be at least 1".into()));
    }
    let master = args.require_u64("seed")?;
    let delta = args.get_f64("delta", 0.5)?;

    let mut all_records = Vec::new();
    let mut per_seed = Vec::new();
    let mut slopes = Vec::new();
    for i in 0..seeds {
        let seed = derive_seed(master, i);
        let form = QuadraticForm::random(p, q, seed)?;
        let out = small_values_experiment(&form, j_max, mode, t_max, seed)?;
        if let Some(fit) = &out.fit {
            slopes.push(fit.slope);
        }
        per_seed.push(json!({
            "seed": seed,
            "fit": out.fit,
            "censored": out.censored,
        }));
        all_records.extend(out.records);
    }
    let threshold = 1.0 / (n as f64 - 2.0) + delta;
    let median_slope = median(slopes);
    let summary = json!({
        "config": args.config_echo(),
        "median_slope": median_slope,
        "slope_threshold": threshold,
        "pass": median_slope.map(|m| m <= threshold),
        "per_seed": per_seed,
    });
    let csv = records_to_csv(&all_records);
    let dir = out_dir(args)?;
    write_atomic(&dir.join("records.csv"), &csv)?;
    emit_summary(args, &dir, &summary, &csv)
}

fn default_error_grid() -> Vec<f64> {
    // six geometric points from 10 to 80
    (0..6)
        .map(|i| 10.0 * 8f64.powf(i as f64 / 5.0))
        .collect()
}

fn error_term_exp(args: &ParsedArgs) -> CliResult<()> {
    let n = require_dim(args, 3)?;
    let (p, q) = args.get_signature((n - 1, 1))?;
    if p + q != n {
        return Err(CliError::Validation(format!(
            "--signature {p},{q} does not sum to --n {n}"
        )));
    }
    let a = args.require_f64("a")?;
    let b = args.require_f64("b")?;
    if a >= b {
        return Err(CliError::Validation(format!(
            "--a must be below --b, got ({a}, {b})"
        )));
    }
    let grid = args
        .get_f64_list("tgrid")?
        .unwrap_or_else(default_error_grid);
    let forms = args.require_u64("forms")?;
    if forms == 0 {
        return Err(CliError::Validation("--forms must be at least 1".into()));
    }
    let samples = args.get_u64("samples", 1_000_000)?;
    let master = args.require_u64("seed")?;
    let delta = args.get_f64("delta", 0.5)?;

    let mut all_records = Vec::new();
    let mut per_form = Vec::new();
    let mut exponents = Vec::new();
    let mut ratios = Vec::new();
    for i in 0..forms {
        let seed = derive_seed(master, i);
        let form = QuadraticForm::random(p, q, seed)?;
        let cq = c_q_estimate(&form, a, b, &grid, samples, derive_seed(seed, 1))?;
        let out = error_term_experiment(&form, a, b, &grid, cq.c_q, seed)?;
        if let Some(fit) = &out.residual_fit {
            exponents.push(fit.slope);
        }
        ratios.push(out.main_term_ratio_at_max);
        per_form.push(json!({
            "seed": seed,
            "c_q": cq.c_q,
            "main_term_ratio": out.main_term_ratio_at_max,
            "residual_fit": out.residual_fit,
        }));
        all_records.extend(out.records);
    }
    let threshold = (n as f64 - 1.0) / 2.0 + delta;
    let median_exponent = median(exponents);
    let summary = json!({
        "config": args.config_echo(),
        "median_residual_exponent": median_exponent,
        "exponent_threshold": threshold,
        "pass": median_exponent.map(|m| m <= threshold),
        "median_main_term_ratio": median(ratios),
        "per_form": per_form,
    });
    let csv = records_to_csv(&all_records);
    let dir = out_dir(args)?;
    write_atomic(&dir.join("records.csv"), &csv)?;
    emit_summary(args, &dir, &summary, &csv)
}

fn dilates_exp(args: &ParsedArgs) -> CliResult<()> {
    let n = require_dim(args, 4)?;
    let delta = args.get_f64("delta", 0.5)?;
    if delta <= 0.0 {
        return Err(CliError::Validation("--delta must be positive".into()));
    }
    let grid = args
        .get_f64_list("tgrid")?
        .unwrap_or_else(|| (0..11).map(|i| 5.0 + 2.0 * i as f64).collect());
    let lattices = args.require_u64("lattices")?;
    if lattices == 0 {
        return Err(CliError::Validation("--lattices must be at least 1".into()));
    }
    let master = args.require_u64("seed")?;
    let sampler = match args.get("sampler").unwrap_or("gaussian") {
        "gaussian" => LatticeSampler::Gaussian { n },
        "gm" => LatticeSampler::GoldsteinMayer {
            n,
            q: args.get_u64("q", DEFAULT_GM_MODULUS)?,
        },
        other => {
            return Err(CliError::Validation(format!(
                "--sampler must be 'gm' or 'gaussian', got '{other}'"
            )))
        }
    };
    let cube = Region::unit_cube(n);
    let out = dilates_experiment(&sampler, &cube, &grid, delta, lattices, master)?;
    let summary = json!({
        "config": args.config_echo(),
        "pass_fraction": out.pass_fraction,
        "pass_threshold": 0.9,
        "pass": out.pass_fraction >= 0.9,
        "lattice_checks": out.lattice_checks,
    });
    let csv = records_to_csv(&out.records);
    let dir = out_dir(args)?;
    write_atomic(&dir.join("records.csv"), &csv)?;
    emit_summary(args, &dir, &summary, &csv)
}

fn sequences_exp(args: &ParsedArgs) -> CliResult<()> {
    let n = require_dim(args, 3)?;
    let k_max = args.require_u64("kmax")? as u32;
    if k_max == 0 {
        return Err(CliError::Validation("--kmax must be at least 1".into()));
    }
    let lattices = args.require_u64("lattices")?;
    if lattices == 0 {
        return Err(CliError::Validation("--lattices must be at least 1".into()));
    }
    let master = args.require_u64("seed")?;
    let fpow = args.get_f64("fpow", 1.0)?;
    let sampler = sampler_from_flags(args, n)?;
    let out = sequences_experiment(
        &sampler,
        &move |k| Region::ball_with_volume(n, k as f64),
        &move |k| (k as f64).powf(fpow),
        k_max,
        lattices,
        master,
    )?;
    let clean10 = out.fraction_clean_from(10);
    let summary = json!({
        "config": args.config_echo(),
        "fraction_clean_from_k10": clean10,
        "pass_threshold": 0.95,
        "pass": clean10 >= 0.95,
        "last_violation": out.last_violation,
    });
    let csv = records_to_csv(&out.records);
    let dir = out_dir(args)?;
    write_atomic(&dir.join("records.csv"), &csv)?;
    emit_summary(args, &dir, &summary, &csv)
}
