//! Run configuration: compiled-in defaults, overridden by a flat key=value
//! config file, overridden by command-line flags; the `PROJSUPER_SEED`
//! environment variable takes precedence for the seed. The seed is recorded
//! in every output artifact.

use std::fs;
use std::path::Path;

use projsuper_core::algebra::Thresholds;
use projsuper_core::rng::DEFAULT_SEED;

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub seed: u64,
    /// Phase-space samples per fit.
    pub samples: usize,
    /// Window points per residual check.
    pub check_points: usize,
    /// Generic potential parameters (c1, c2, c3, c4).
    pub c: [f64; 4],
    pub thresholds: Thresholds,
    /// Normalized Poisson-bracket tolerance for verification.
    pub bracket_tol: f64,
    /// Absolute quadrature tolerance for scalar potentials.
    pub quad_tol: f64,
    /// Residual tolerance for metrizability / Bertrand-Darboux checks.
    pub residual_tol: f64,
    /// Tolerance for the projective-class comparison.
    pub class_tol: f64,
    /// Worker threads for the sphere scan (0 = all available).
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: DEFAULT_SEED,
            samples: 200,
            check_points: 100,
            c: [1.0, 0.5, 1.0 / 3.0, 0.0],
            thresholds: Thresholds::default(),
            bracket_tol: 1e-9,
            quad_tol: 1e-11,
            residual_tol: 1e-9,
            class_tol: 1e-7,
            threads: 0,
        }
    }
}

#[derive(Debug)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ConfigError {}

impl RunConfig {
    /// Parse a flat `key = value` file (with `#` comments).
    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = fs::read_to_string(path).map_err(|e| ConfigError {
            line: 0,
            message: e.to_string(),
        })?;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError {
                line: idx + 1,
                message: format!("expected `key = value`, found `{line}`"),
            })?;
            self.apply_key(key.trim(), value.trim())
                .map_err(|message| ConfigError {
                    line: idx + 1,
                    message,
                })?;
        }
        Ok(())
    }

    pub fn apply_key(&mut self, key: &str, value: &str) -> Result<(), String> {
        let parse_f64 = |v: &str| v.parse::<f64>().map_err(|_| format!("bad number `{v}`"));
        match key {
            "seed" => {
                self.seed = value.parse().map_err(|_| format!("bad seed `{value}`"))?;
            }
            "samples" => {
                self.samples = value
                    .parse()
                    .map_err(|_| format!("bad sample count `{value}`"))?;
            }
            "check_points" => {
                self.check_points = value.parse().map_err(|_| format!("bad count `{value}`"))?;
            }
            "eps_coeff" => self.thresholds.eps_coeff = parse_f64(value)?,
            "eps_disc" => self.thresholds.eps_disc = parse_f64(value)?,
            "ambiguity_band" => self.thresholds.ambiguity_band = parse_f64(value)?,
            "max_fit_residual" => self.thresholds.max_fit_residual = parse_f64(value)?,
            "bracket_tol" => self.bracket_tol = parse_f64(value)?,
            "quad_tol" => self.quad_tol = parse_f64(value)?,
            "residual_tol" => self.residual_tol = parse_f64(value)?,
            "class_tol" => self.class_tol = parse_f64(value)?,
            "threads" => {
                self.threads = value
                    .parse()
                    .map_err(|_| format!("bad thread count `{value}`"))?;
            }
            "c1" => self.c[0] = parse_f64(value)?,
            "c2" => self.c[1] = parse_f64(value)?,
            "c3" => self.c[2] = parse_f64(value)?,
            "c4" => self.c[3] = parse_f64(value)?,
            other => return Err(format!("unknown key `{other}`")),
        }
        self.validate()
    }

    /// Environment seed override.
    pub fn apply_env(&mut self) -> Result<(), String> {
        if let Ok(v) = std::env::var("PROJSUPER_SEED") {
            self.seed = v
                .parse()
                .map_err(|_| format!("PROJSUPER_SEED is not an integer: `{v}`"))?;
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), String> {
        for (name, v) in [
            ("eps_coeff", self.thresholds.eps_coeff),
            ("eps_disc", self.thresholds.eps_disc),
            ("bracket_tol", self.bracket_tol),
            ("quad_tol", self.quad_tol),
            ("residual_tol", self.residual_tol),
            ("class_tol", self.class_tol),
        ] {
            #[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must fail too
            if !(v > 0.0) {
                return Err(format!("{name} must be positive, got {v}"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn file_then_key_overrides() {
        let mut cfg = RunConfig::default();
        let mut tmp = tempfileish();
        writeln!(tmp.1, "# comment\nseed = 42\neps_coeff = 1e-5\n").unwrap();
        cfg.apply_file(&tmp.0).unwrap();
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.thresholds.eps_coeff, 1e-5);
        cfg.apply_key("seed", "7").unwrap();
        assert_eq!(cfg.seed, 7);
        std::fs::remove_file(&tmp.0).ok();
    }

    #[test]
    fn rejects_nonpositive_tolerances() {
        let mut cfg = RunConfig::default();
        assert!(cfg.apply_key("bracket_tol", "-1").is_err());
        assert!(cfg.apply_key("bracket_tol", "0").is_err());
    }

    fn tempfileish() -> (std::path::PathBuf, std::fs::File) {
        let path =
            std::env::temp_dir().join(format!("projsuper-config-test-{}.txt", std::process::id()));
        let f = std::fs::File::create(&path).unwrap();
        (path, f)
    }
}
