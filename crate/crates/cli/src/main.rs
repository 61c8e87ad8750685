use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};

use projsuper::config::RunConfig;
use projsuper::jsonio::SystemDefinition;
use projsuper::pipeline::{self, PipelineError};
use projsuper::scan;
use projsuper_core::catalog;

/// Symbolic-numeric toolkit for projectively equivalent 2D superintegrable
/// systems: verify catalog systems, transport potentials across a projective
/// class, classify points of the classification sphere, and scan it.
#[derive(Parser)]
#[command(name = "projsuper", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Flat key=value configuration file; flags override file entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// RNG seed (PROJSUPER_SEED overrides this flag).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Phase-space samples per fit.
    #[arg(long, global = true)]
    samples: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run metrizability, Bertrand-Darboux, bracket and independence checks
    /// on a catalog system or a system-definition JSON file.
    Verify {
        /// Catalog name (see catalog-list) or path to a JSON file.
        system: String,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Classify the sphere point (theta, phi) and print the JSON report.
    Classify {
        #[arg(long)]
        theta: f64,
        #[arg(long)]
        phi: f64,
        /// Potential parameters c1,c2,c3,c4.
        #[arg(long, value_delimiter = ',', num_args = 4)]
        c: Option<Vec<f64>>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Classify every cell of an Ntheta x Nphi grid and write a CSV report.
    ScanSphere {
        /// Grid size as NthetaxNphi, e.g. 64x32.
        #[arg(long)]
        grid: String,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (default: all available).
        #[arg(long)]
        threads: Option<usize>,
        /// Omit the timestamp header (byte-identical reruns).
        #[arg(long)]
        no_timestamp: bool,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Transport the potential of one system onto the metric of another
    /// (both must share a projective class).
    Transport {
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// List the built-in systems.
    CatalogList,
    /// Export the built-in systems as system-definition JSON files.
    CatalogExport {
        #[arg(long)]
        dir: PathBuf,
    },
}

fn build_config(common: &CommonOpts) -> Result<RunConfig, String> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &common.config {
        cfg.apply_file(path).map_err(|e| e.to_string())?;
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(samples) = common.samples {
        cfg.samples = samples;
    }
    cfg.apply_env()?;
    Ok(cfg)
}

fn emit(text: &str, out: Option<&PathBuf>) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

/// Exit codes: 0 pass, 1 fail (a check or classification decision), 2 error.
fn run() -> Result<ExitCode, String> {
    let cli = Cli::parse();
    match cli.command {
        Command::Verify { system, common } => {
            let cfg = build_config(&common)?;
            let report = pipeline::verify(&system, &cfg).map_err(display_error)?;
            for check in &report.checks {
                println!(
                    "{} {} ({})",
                    if check.passed { "PASS" } else { "FAIL" },
                    check.name,
                    check.detail
                );
            }
            if report.passed {
                println!("PASS {}", report.system);
                Ok(ExitCode::SUCCESS)
            } else {
                let first = report.first_failure().expect("some check failed");
                println!("FAIL {} at {}", report.system, first.name);
                Ok(ExitCode::from(1))
            }
        }
        Command::Classify {
            theta,
            phi,
            c,
            out,
            common,
        } => {
            let mut cfg = build_config(&common)?;
            if let Some(c) = c {
                cfg.c = [c[0], c[1], c[2], c[3]];
            }
            let report = pipeline::classify_point(theta, phi, &cfg).map_err(display_error)?;
            let text = serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?;
            emit(&text, out.as_ref()).map_err(|e| e.to_string())?;
            Ok(if report.label.is_some() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::ScanSphere {
            grid,
            out,
            threads,
            no_timestamp,
            common,
        } => {
            let mut cfg = build_config(&common)?;
            if let Some(t) = threads {
                cfg.threads = t;
            }
            let (n_theta, n_phi) = parse_grid(&grid)?;
            let rows = scan::scan_sphere(n_theta, n_phi, &cfg).map_err(display_error)?;
            let mut buffer = Vec::new();
            let ts = if no_timestamp {
                None
            } else {
                Some(
                    SystemTime::now()
                        .duration_since(UNIX_EPOCH)
                        .map(|d| d.as_secs())
                        .unwrap_or(0),
                )
            };
            scan::write_csv(&mut buffer, &rows, n_theta, n_phi, &cfg, ts)
                .map_err(|e| e.to_string())?;
            std::fs::write(&out, &buffer).map_err(|e| e.to_string())?;
            let unclassified = rows.iter().filter(|r| r.report.label.is_none()).count();
            println!(
                "scanned {} cells ({} unclassifiable) -> {}",
                rows.len(),
                unclassified,
                out.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Transport {
            from,
            to,
            out,
            common,
        } => {
            let cfg = build_config(&common)?;
            match pipeline::transport(&from, &to, &cfg) {
                Ok(report) => {
                    let text = serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?;
                    emit(&text, out.as_ref()).map_err(|e| e.to_string())?;
                    Ok(ExitCode::SUCCESS)
                }
                Err(PipelineError::ClassMismatch { deviation }) => {
                    eprintln!(
                        "transport rejected: metrics are not projectively equivalent (max deviation {deviation:.3e})"
                    );
                    Ok(ExitCode::from(1))
                }
                Err(e) => Err(display_error(e)),
            }
        }
        Command::CatalogList => {
            for entry in catalog::entries() {
                println!(
                    "{:28} {}{}",
                    entry.name,
                    entry.notes,
                    entry
                        .expected_label
                        .map(|l| format!(" [known type {l}]"))
                        .unwrap_or_default()
                );
            }
            println!("(darboux-koenigs-N-minus variants are loadable by name)");
            Ok(ExitCode::SUCCESS)
        }
        Command::CatalogExport { dir } => {
            std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
            for entry in catalog::entries() {
                let def = SystemDefinition::from_entry(&entry);
                let text = serde_json::to_string_pretty(&def).map_err(|e| e.to_string())?;
                let path = dir.join(format!("{}.json", entry.name));
                std::fs::write(&path, text + "\n").map_err(|e| e.to_string())?;
                println!("wrote {}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn parse_grid(text: &str) -> Result<(usize, usize), String> {
    let (a, b) = text
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("grid must look like 64x32, got `{text}`"))?;
    let n_theta: usize = a.parse().map_err(|_| format!("bad grid `{text}`"))?;
    let n_phi: usize = b.parse().map_err(|_| format!("bad grid `{text}`"))?;
    if n_theta < 8 || n_phi < 8 {
        return Err("grid must be at least 8x8".into());
    }
    Ok((n_theta, n_phi))
}

fn display_error(e: PipelineError) -> String {
    e.to_string()
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
