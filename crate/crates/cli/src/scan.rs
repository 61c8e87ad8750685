//! Parallel classification scan over the sphere and its CSV report.
//!
//! Grid cells are distributed over worker threads with no shared mutable
//! state and merged by cell index, so the output is deterministic for a
//! given configuration and seed. Floats are printed with 17 significant
//! digits; reruns are byte-identical except for the timestamp header line.

use std::io::Write;
use std::sync::atomic::{AtomicUsize, Ordering};

use projsuper_core::catalog;

use crate::config::RunConfig;
use crate::jsonio::ClassificationReport;
use crate::pipeline::{classify_point, PipelineError};

#[derive(Debug, Clone)]
pub struct ScanRow {
    pub theta_index: usize,
    pub phi_index: usize,
    pub report: ClassificationReport,
}

/// Cell centers of the `n_theta x n_phi` grid (theta in (-pi/2, pi/2), phi
/// in (0, 2 pi)).
pub fn grid_centers(n_theta: usize, n_phi: usize) -> Vec<(usize, usize, f64, f64)> {
    let mut cells = Vec::with_capacity(n_theta * n_phi);
    for i in 0..n_theta {
        let theta =
            -std::f64::consts::FRAC_PI_2 + (i as f64 + 0.5) * std::f64::consts::PI / n_theta as f64;
        for j in 0..n_phi {
            let phi = (j as f64 + 0.5) * 2.0 * std::f64::consts::PI / n_phi as f64;
            cells.push((i, j, theta, phi));
        }
    }
    cells
}

/// Classify every grid cell, in parallel. Cells that fail to classify are
/// reported as rows with `label: None`, never dropped.
pub fn scan_sphere(
    n_theta: usize,
    n_phi: usize,
    cfg: &RunConfig,
) -> Result<Vec<ScanRow>, PipelineError> {
    assert!(n_theta >= 8 && n_phi >= 8, "grid must be at least 8x8");
    let cells = grid_centers(n_theta, n_phi);
    let threads = if cfg.threads == 0 {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    } else {
        cfg.threads
    };
    let next = AtomicUsize::new(0);
    let mut rows: Vec<Option<ScanRow>> = vec![None; cells.len()];
    let slots: Vec<std::sync::Mutex<Option<ScanRow>>> =
        rows.iter().map(|_| std::sync::Mutex::new(None)).collect();

    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                if idx >= cells.len() {
                    break;
                }
                let (i, j, theta, phi) = cells[idx];
                let report = match classify_point(theta, phi, cfg) {
                    Ok(r) => r,
                    Err(e) => ClassificationReport {
                        theta,
                        phi,
                        label: None,
                        candidates: Vec::new(),
                        margins: vec![crate::jsonio::MarginJson {
                            check: e.to_string(),
                            clearance: f64::NAN,
                        }],
                        residual_rms: f64::NAN,
                        condition: f64::NAN,
                        seed: cfg.seed,
                    },
                };
                *slots[idx].lock().unwrap() = Some(ScanRow {
                    theta_index: i,
                    phi_index: j,
                    report,
                });
            });
        }
    });

    for (slot, row) in slots.into_iter().zip(rows.iter_mut()) {
        *row = slot.into_inner().unwrap();
    }
    Ok(rows
        .into_iter()
        .map(|r| r.expect("all cells visited"))
        .collect())
}

fn fmt17(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v:.16e}")
    }
}

/// Write the CSV report. The timestamp header is the only line that varies
/// between reruns with the same configuration.
pub fn write_csv(
    out: &mut impl Write,
    rows: &[ScanRow],
    n_theta: usize,
    n_phi: usize,
    cfg: &RunConfig,
    timestamp: Option<u64>,
) -> std::io::Result<()> {
    writeln!(out, "# projsuper scan-sphere")?;
    writeln!(
        out,
        "# seed={} grid={}x{} samples={} c=[{},{},{},{}] eps_coeff={} eps_disc={}",
        cfg.seed,
        n_theta,
        n_phi,
        cfg.samples,
        fmt17(cfg.c[0]),
        fmt17(cfg.c[1]),
        fmt17(cfg.c[2]),
        fmt17(cfg.c[3]),
        fmt17(cfg.thresholds.eps_coeff),
        fmt17(cfg.thresholds.eps_disc),
    )?;
    if let Some(ts) = timestamp {
        writeln!(out, "# generated_unix={ts}")?;
    }
    writeln!(
        out,
        "theta_index,phi_index,theta,phi,label,min_clearance,residual_rel,condition"
    )?;
    for row in rows {
        let r = &row.report;
        let label = match (&r.label, r.candidates.is_empty()) {
            (Some(l), _) => l.clone(),
            (None, false) => format!("unclassifiable({}|{})", r.candidates[0], r.candidates[1]),
            (None, true) => "error".to_string(),
        };
        let min_clearance = r
            .margins
            .iter()
            .map(|m| m.clearance)
            .fold(f64::INFINITY, f64::min);
        // Labels contain commas, so the field is quoted.
        writeln!(
            out,
            "{},{},{},{},\"{}\",{},{},{}",
            row.theta_index,
            row.phi_index,
            fmt17(r.theta),
            fmt17(r.phi),
            label,
            fmt17(if min_clearance.is_finite() {
                min_clearance
            } else {
                f64::NAN
            }),
            fmt17(r.residual_rms),
            fmt17(r.condition),
        )?;
    }
    Ok(())
}

/// Distance from `(theta, phi)` to the off-equator degeneration curve,
/// measured in the (theta, phi) plane with phi wrapped mod 2 pi.
pub fn distance_to_degeneration_curve(theta: f64, phi: f64) -> f64 {
    let mut best = f64::INFINITY;
    let n = 4096;
    for k in 0..n {
        let p = (k as f64 + 0.5) * 2.0 * std::f64::consts::PI / n as f64;
        let t = catalog::degeneration_curve_theta(p);
        let mut dphi = (phi - p).abs();
        if dphi > std::f64::consts::PI {
            dphi = 2.0 * std::f64::consts::PI - dphi;
        }
        let d = ((theta - t) * (theta - t) + dphi * dphi).sqrt();
        best = best.min(d);
    }
    best
}
