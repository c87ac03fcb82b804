//! Flag parsing and the flat key = value config file.
//!
//! Flags are `--key value` or `--key=value`. A `--config FILE` loads defaults
//! first; command-line flags override file entries. Validation failures exit
//! with code 1 and a single-line diagnostic naming the offending flag.

use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// bad flags or precondition violations — exit 1
    Validation(String),
    /// failures during computation or output writing — exit 2
    Compute(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) | CliError::Compute(m) => write!(f, "{m}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Compute(_) => 2,
        }
    }
}

impl From<randlat_core::Error> for CliError {
    fn from(e: randlat_core::Error) -> CliError {
        use randlat_core::Error::*;
        match e {
            DimensionMismatch { .. } | NotSymmetric { .. } | DegenerateForm { .. }
            | BadSignature { .. } | DefiniteForm { .. } | BadModulus { .. }
            | InvalidParameter(_) => CliError::Validation(e.to_string()),
            SingularMatrix { .. } | NotUnimodular { .. } | SamplerExhausted { .. }
            | Infeasible(_) | Numerical(_) => CliError::Compute(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Clone)]
pub struct ParsedArgs {
    pub command: String,
    flags: BTreeMap<String, String>,
}

impl ParsedArgs {
    pub fn parse(argv: &[String]) -> CliResult<ParsedArgs> {
        if argv.is_empty() {
            return Err(CliError::Validation(
                "missing subcommand; run with 'help' for usage".into(),
            ));
        }
        let command = argv[0].clone();
        let mut flags = BTreeMap::new();
        let mut i = 1;
        while i < argv.len() {
            let arg = &argv[i];
            let Some(stripped) = arg.strip_prefix("--") else {
                return Err(CliError::Validation(format!(
                    "unexpected positional argument '{arg}'"
                )));
            };
            let (key, value) = if let Some((k, v)) = stripped.split_once('=') {
                (k.to_string(), v.to_string())
            } else {
                let Some(v) = argv.get(i + 1) else {
                    return Err(CliError::Validation(format!(
                        "flag --{stripped} is missing a value"
                    )));
                };
                i += 1;
                (stripped.to_string(), v.clone())
            };
            flags.insert(key, value);
            i += 1;
        }
        // config file provides defaults; explicit flags win
        if let Some(path) = flags.get("config").cloned() {
            let text = std::fs::read_to_string(&path).map_err(|e| {
                CliError::Validation(format!("cannot read config file {path}: {e}"))
            })?;
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let Some((k, v)) = line.split_once('=') else {
                    return Err(CliError::Validation(format!(
                        "{path}:{}: expected 'key = value'",
                        lineno + 1
                    )));
                };
                let key = k.trim().to_string();
                flags.entry(key).or_insert_with(|| v.trim().to_string());
            }
        }
        Ok(ParsedArgs { command, flags })
    }

    /// Resolved configuration for the summary echo.
    pub fn config_echo(&self) -> serde_json::Value {
        let mut map = serde_json::Map::new();
        map.insert(
            "command".into(),
            serde_json::Value::String(self.command.clone()),
        );
        for (k, v) in &self.flags {
            map.insert(k.clone(), serde_json::Value::String(v.clone()));
        }
        serde_json::Value::Object(map)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.flags.get(key).map(|s| s.as_str())
    }

    pub fn require(&self, key: &str) -> CliResult<&str> {
        self.get(key)
            .ok_or_else(|| CliError::Validation(format!("missing required flag --{key}")))
    }

    pub fn get_u64(&self, key: &str, default: u64) -> CliResult<u64> {
        match self.get(key) {
            None => Ok(default),
            Some(s) => s.parse().map_err(|_| {
                CliError::Validation(format!("--{key} expects an integer, got '{s}'"))
            }),
        }
    }

    pub fn require_u64(&self, key: &str) -> CliResult<u64> {
        self.require(key)?.parse().map_err(|_| {
            CliError::Validation(format!(
                "--{key} expects an integer, got '{}'",
                self.get(key).unwrap()
            ))
        })
    }

    pub fn get_f64(&self, key: &str, default: f64) -> CliResult<f64> {
        match self.get(key) {
            None => Ok(default),
            Some(s) => s.parse().map_err(|_| {
                CliError::Validation(format!("--{key} expects a number, got '{s}'"))
            }),
        }
    }

    pub fn require_f64(&self, key: &str) -> CliResult<f64> {
        self.require(key)?.parse().map_err(|_| {
            CliError::Validation(format!(
                "--{key} expects a number, got '{}'",
                self.get(key).unwrap()
            ))
        })
    }

    pub fn require_usize(&self, key: &str) -> CliResult<usize> {
        Ok(self.require_u64(key)? as usize)
    }

    /// Comma-separated list of numbers, e.g. --tgrid 10,20,40,80.
    pub fn get_f64_list(&self, key: &str) -> CliResult<Option<Vec<f64>>> {
        match self.get(key) {
            None => Ok(None),
            Some(s) => {
                let parsed: Result<Vec<f64>, _> =
                    s.split(',').map(|p| p.trim().parse::<f64>()).collect();
                parsed.map(Some).map_err(|_| {
                    CliError::Validation(format!(
                        "--{key} expects comma-separated numbers, got '{s}'"
                    ))
                })
            }
        }
    }

    /// Signature flag `--signature p,q`.
    pub fn get_signature(&self, default: (usize, usize)) -> CliResult<(usize, usize)> {
        match self.get("signature") {
            None => Ok(default),
            Some(s) => {
                let parts: Vec<&str> = s.split(',').map(|p| p.trim()).collect();
                if parts.len() != 2 {
                    return Err(CliError::Validation(format!(
                        "--signature expects 'p,q', got '{s}'"
                    )));
                }
                let p = parts[0].parse().map_err(|_| {
                    CliError::Validation(format!("--signature expects integers, got '{s}'"))
                })?;
                let q = parts[1].parse().map_err(|_| {
                    CliError::Validation(format!("--signature expects integers, got '{s}'"))
                })?;
                Ok((p, q))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> CliResult<ParsedArgs> {
        let argv: Vec<String> = args.iter().map(|s| s.to_string()).collect();
        ParsedArgs::parse(&argv)
    }

    #[test]
    fn parses_flags_in_both_forms() {
        let a = parse(&["count", "--T", "2.5", "--region=ball"]).unwrap();
        assert_eq!(a.command, "count");
        assert_eq!(a.get("T"), Some("2.5"));
        assert_eq!(a.get("region"), Some("ball"));
    }

    #[test]
    fn missing_value_is_a_validation_error() {
        let err = parse(&["count", "--T"]).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(err.to_string().contains("--T"));
    }

    #[test]
    fn missing_required_flag_names_it() {
        let a = parse(&["count"]).unwrap();
        let err = a.require("basis-file").unwrap_err();
        assert!(err.to_string().contains("--basis-file"));
    }

    #[test]
    fn config_file_provides_defaults_only() {
        let dir = std::env::temp_dir().join(format!("randlat-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.conf");
        std::fs::write(&path, "# comment\ntrials = 500\nseed = 7\n").unwrap();
        let a = parse(&[
            "siegel-stats",
            "--config",
            path.to_str().unwrap(),
            "--seed",
            "99",
        ])
        .unwrap();
        assert_eq!(a.get_u64("trials", 0).unwrap(), 500);
        assert_eq!(a.get_u64("seed", 0).unwrap(), 99); // flag overrides file
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn lists_and_signatures() {
        let a = parse(&["cq", "--tgrid", "10, 20,40", "--signature", "2,2"]).unwrap();
        assert_eq!(a.get_f64_list("tgrid").unwrap().unwrap(), vec![10.0, 20.0, 40.0]);
        assert_eq!(a.get_signature((2, 1)).unwrap(), (2, 2));
    }
}
