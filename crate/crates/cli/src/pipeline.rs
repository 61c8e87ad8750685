//! Verification, classification and transport drivers shared by the
//! command-line front end and the acceptance suite.

use std::path::Path;

use projsuper_core::algebra::{
    bracket_value, classify_staeckel, fit_r_squared_values, functional_independence,
    sample_phase_points, ClassifyError, CubicModel, PhaseGradient, StaeckelLabel,
};
use projsuper_core::catalog::{self, CatalogEntry, SphereSystem};
use projsuper_core::expr::{Bindings, Expr, Var};
use projsuper_core::geometry::{projective_connection, same_projective_class, Sym2};
use projsuper_core::metrization::{beta_of_metric, metrizability_residuals};
use projsuper_core::rng::Rng;
use projsuper_core::systems::{
    bertrand_darboux_residual, killing_part_from_betas, projective_potential, scalar_potential,
    transport_potential_oneform, QuadraticIntegral,
};

use crate::config::RunConfig;
use crate::jsonio::{
    ClassificationReport, JsonError, MarginJson, MetricJson, SystemDefinition, TransportReport,
};

#[derive(Debug)]
pub enum PipelineError {
    UnknownSystem(String),
    Json(JsonError),
    Core(String),
    ClassMismatch { deviation: f64 },
}

impl std::fmt::Display for PipelineError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PipelineError::UnknownSystem(name) => {
                write!(f, "no catalog entry or readable file named `{name}`")
            }
            PipelineError::Json(e) => write!(f, "{e}"),
            PipelineError::Core(e) => write!(f, "{e}"),
            PipelineError::ClassMismatch { deviation } => write!(
                f,
                "metrics do not share a projective class (max deviation {deviation:.3e})"
            ),
        }
    }
}

impl std::error::Error for PipelineError {}

impl From<JsonError> for PipelineError {
    fn from(e: JsonError) -> Self {
        PipelineError::Json(e)
    }
}

fn core_err(e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Core(e.to_string())
}

// ---------------------------------------------------------------------------
// Classification
// ---------------------------------------------------------------------------

fn report_from_model(
    theta: f64,
    phi: f64,
    model: &CubicModel,
    cfg: &RunConfig,
) -> ClassificationReport {
    match classify_staeckel(model, &cfg.thresholds) {
        Ok(label) => ClassificationReport {
            theta,
            phi,
            label: Some(label.label.as_str().to_string()),
            candidates: Vec::new(),
            margins: label
                .margins
                .iter()
                .map(|m| MarginJson {
                    check: m.check.to_string(),
                    clearance: m.clearance,
                })
                .collect(),
            residual_rms: model.residual_rel,
            condition: model.condition,
            seed: cfg.seed,
        },
        Err(ClassifyError::Ambiguous {
            candidates,
            check,
            clearance,
        }) => ClassificationReport {
            theta,
            phi,
            label: None,
            candidates: vec![
                candidates.0.as_str().to_string(),
                candidates.1.as_str().to_string(),
            ],
            margins: vec![MarginJson {
                check: check.to_string(),
                clearance,
            }],
            residual_rms: model.residual_rel,
            condition: model.condition,
            seed: cfg.seed,
        },
        Err(other) => ClassificationReport {
            theta,
            phi,
            label: None,
            candidates: Vec::new(),
            margins: vec![MarginJson {
                check: other.to_string(),
                clearance: f64::NAN,
            }],
            residual_rms: model.residual_rel,
            condition: model.condition,
            seed: cfg.seed,
        },
    }
}

/// Fit the quadratic-algebra model of a pencil system.
pub fn fit_system(sys: &SphereSystem, cfg: &RunConfig) -> Result<CubicModel, PipelineError> {
    let params = sys.entry.params();
    let mut rng = Rng::new(cfg.seed);
    let pts = sample_phase_points(
        &sys.entry.system.metric.window,
        cfg.samples,
        &mut rng,
        &params,
    )
    .map_err(core_err)?;
    let i1g = PhaseGradient::of_integral(&sys.integral_one);
    let i2g = PhaseGradient::of_integral(&sys.integral_two);
    let mut h = Vec::with_capacity(pts.len());
    let mut i1 = Vec::with_capacity(pts.len());
    let mut i2 = Vec::with_capacity(pts.len());
    let mut r2 = Vec::with_capacity(pts.len());
    for pt in &pts {
        let b = pt.bindings().with_params_from(&params);
        h.push(sys.hamiltonian.eval(&b).map_err(core_err)?);
        i1.push(
            sys.integral_one
                .value(pt.x, pt.y, pt.p1, pt.p2, &params, cfg.quad_tol)
                .map_err(core_err)?,
        );
        i2.push(
            sys.integral_two
                .value(pt.x, pt.y, pt.p1, pt.p2, &params, cfg.quad_tol)
                .map_err(core_err)?,
        );
        let r = bracket_value(&i1g, &i2g, &b).map_err(core_err)?;
        r2.push(r * r);
    }
    fit_r_squared_values(&h, &i1, &i2, &r2).map_err(core_err)
}

/// Classify the sphere point `(theta, phi)`.
pub fn classify_point(
    theta: f64,
    phi: f64,
    cfg: &RunConfig,
) -> Result<ClassificationReport, PipelineError> {
    let sys = catalog::sphere_system(theta, phi, cfg.c).map_err(core_err)?;
    let model = fit_system(&sys, cfg)?;
    Ok(report_from_model(theta, phi, &model, cfg))
}

/// Classify one of the three exceptional (generator) systems.
pub fn classify_generator(
    i: usize,
    cfg: &RunConfig,
) -> Result<ClassificationReport, PipelineError> {
    let sys = catalog::generator_exceptional_system(i, cfg.c).map_err(core_err)?;
    let model = fit_system(&sys, cfg)?;
    Ok(report_from_model(sys.theta, sys.phi, &model, cfg))
}

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, serde::Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct VerifyReport {
    pub system: String,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

impl VerifyReport {
    pub fn first_failure(&self) -> Option<&CheckResult> {
        self.checks.iter().find(|c| !c.passed)
    }
}

struct VerifyTarget {
    name: String,
    system: projsuper_core::systems::NaturalHamiltonian,
    params: Bindings,
    killing_covariant: Vec<Sym2>,
    integrals: Vec<QuadraticIntegral>,
    expect_rank3: bool,
}

/// Covariant form of a contravariant symmetric tensor.
fn lower(g: &projsuper_core::geometry::Metric2, k: &Sym2) -> Sym2 {
    let c = &g.components;
    let comp = |i: usize, j: usize| {
        let mut terms = Vec::new();
        for a in 1..=2usize {
            for b in 1..=2usize {
                terms.push(c.get(i, a).clone() * c.get(j, b).clone() * k.get(a, b).clone());
            }
        }
        Expr::sum(terms).simplify()
    };
    Sym2::new(comp(1, 1), comp(1, 2), comp(2, 2))
}

/// The scalar 1-form of the integral attached to a covariant Killing tensor:
/// `dW_i = K_{ia} g^{ab} V_b`.
fn integral_oneform(
    g: &projsuper_core::geometry::Metric2,
    k_cov: &Sym2,
    v: &Expr,
) -> Result<[Expr; 2], PipelineError> {
    let grad = projsuper_core::systems::gradient(g, v).map_err(core_err)?;
    Ok([
        (k_cov.a11.clone() * grad[0].clone() + k_cov.a12.clone() * grad[1].clone()).simplify(),
        (k_cov.a12.clone() * grad[0].clone() + k_cov.a22.clone() * grad[1].clone()).simplify(),
    ])
}

fn catalog_target(entry: &CatalogEntry) -> Result<VerifyTarget, PipelineError> {
    let params = entry.params();
    let g = &entry.system.metric;
    let v = &entry.system.potential;
    let mut killing_covariant: Vec<Sym2> = Vec::new();
    let mut integrals: Vec<QuadraticIntegral> = Vec::new();
    let mut expect_rank3 = false;

    match entry.class {
        Some("essential-projective") => {
            let idx: usize = entry
                .name
                .trim_start_matches("generator-")
                .parse()
                .unwrap_or(1);
            let betas = catalog::generator_betas();
            let beta_g = &betas[idx - 1];
            for j in 1..=3usize {
                if j == idx {
                    continue;
                }
                let k = killing_part_from_betas(beta_g, &betas[j - 1]);
                killing_covariant.push(lower(g, &k));
                let w = catalog::generator_potential(j);
                let dw = [w.diff(Var::X).simplify(), w.diff(Var::Y).simplify()];
                integrals.push(QuadraticIntegral {
                    k,
                    dw,
                    basepoint: entry.basepoint,
                    w_closed: Some(w),
                });
            }
            expect_rank3 = true;
        }
        Some("constant-curvature-pair") => {
            let flat = catalog::flat_generic().system.metric;
            let bases = if entry.name == "flat-oscillator" {
                vec![
                    catalog::oscillator_killing(),
                    Sym2::new(Expr::one(), Expr::zero(), Expr::zero()),
                    Sym2::new(Expr::zero(), Expr::zero(), Expr::one()),
                ]
            } else {
                vec![
                    catalog::generic_killing_family([1.0, 0.0, 0.0]),
                    catalog::generic_killing_family([0.0, 1.0, 0.0]),
                    catalog::generic_killing_family([0.0, 0.0, 1.0]),
                ]
            };
            for k_flat in bases {
                let k_cov = if entry.name == "curved-generic" {
                    projsuper_core::systems::transport_killing_covariant(&flat, &k_flat, g)
                        .map_err(core_err)?
                } else {
                    k_flat
                };
                killing_covariant.push(k_cov);
            }
            // Integrals from the first two tensors of the family.
            for k_cov in killing_covariant.iter().take(2) {
                let inv = g.inverse().map_err(core_err)?;
                let k = inv.sandwich(k_cov).simplify();
                let dw = integral_oneform(g, k_cov, v)?;
                integrals.push(QuadraticIntegral {
                    k,
                    dw,
                    basepoint: entry.basepoint,
                    w_closed: None,
                });
            }
            expect_rank3 = true;
        }
        _ => {
            // Darboux-Koenigs families: the metric depends on x only, so
            // dy^2 is Killing and p2^2 is an integral.
            let k_cov = Sym2::new(Expr::zero(), Expr::zero(), Expr::one());
            killing_covariant.push(k_cov);
            integrals.push(QuadraticIntegral {
                k: Sym2::new(Expr::zero(), Expr::zero(), Expr::one()),
                dw: [Expr::zero(), Expr::zero()],
                basepoint: entry.basepoint,
                w_closed: Some(Expr::zero()),
            });
        }
    }

    Ok(VerifyTarget {
        name: entry.name.clone(),
        system: entry.system.clone(),
        params,
        killing_covariant,
        integrals,
        expect_rank3,
    })
}

fn json_target(path: &Path) -> Result<VerifyTarget, PipelineError> {
    let def = SystemDefinition::load(path)?;
    let system = def.to_system()?;
    let killing_covariant = def.killing_tensors()?;
    let mut integrals = Vec::new();
    for k_cov in &killing_covariant {
        let inv = system.metric.inverse().map_err(core_err)?;
        let k = inv.sandwich(k_cov).simplify();
        let dw = integral_oneform(&system.metric, k_cov, &system.potential)?;
        integrals.push(QuadraticIntegral {
            k,
            dw,
            basepoint: (def.basepoint[0], def.basepoint[1]),
            w_closed: None,
        });
    }
    Ok(VerifyTarget {
        name: def.name.clone(),
        params: def.bindings(),
        system,
        killing_covariant,
        integrals,
        expect_rank3: false,
    })
}

/// Resolve a verification target: catalog name first, then a JSON path.
fn resolve_target(name: &str) -> Result<VerifyTarget, PipelineError> {
    if let Some(entry) = catalog::entry(name) {
        return catalog_target(&entry);
    }
    let path = Path::new(name);
    if path.exists() {
        return json_target(path);
    }
    Err(PipelineError::UnknownSystem(name.to_string()))
}

/// Run the verification checks: metrizability of the system's own solution
/// tensor, Bertrand-Darboux against the known Killing tensors, Poisson
/// brackets of the known integrals, and functional independence where a full
/// triple exists.
pub fn verify(name: &str, cfg: &RunConfig) -> Result<VerifyReport, PipelineError> {
    let target = resolve_target(name)?;
    let g = &target.system.metric;
    let v = &target.system.potential;
    let params = &target.params;
    let mut checks = Vec::new();
    let mut rng = Rng::new(cfg.seed);

    // Nondegeneracy.
    match g.check_nondegenerate(params) {
        Ok(()) => checks.push(CheckResult {
            name: "nondegenerate-metric".into(),
            passed: true,
            detail: "det g != 0 at sampled points".into(),
        }),
        Err(e) => {
            checks.push(CheckResult {
                name: "nondegenerate-metric".into(),
                passed: false,
                detail: e.to_string(),
            });
            return Ok(finish(target.name, cfg.seed, checks));
        }
    }

    // Metrizability self-check. Residual expressions lose accuracy near the
    // guard loci, so sampling stays well inside them.
    let residual_window = g.window.widened(8.0);
    let beta = beta_of_metric(g).map_err(core_err)?;
    let f = projective_connection(g).map_err(core_err)?;
    let residuals = metrizability_residuals(&beta, &f);
    let mut max_res = 0.0f64;
    for _ in 0..cfg.check_points {
        let (x, y) = residual_window.sample(&mut rng, params).map_err(core_err)?;
        let b = Bindings::point(x, y).with_params_from(params);
        for r in &residuals {
            max_res = max_res.max(r.eval(&b).map_err(core_err)?.abs());
        }
    }
    checks.push(CheckResult {
        name: "metrizability".into(),
        passed: max_res < cfg.residual_tol,
        detail: format!("max residual {max_res:.3e}"),
    });

    // Bertrand-Darboux against every known Killing tensor.
    let mut bd_max = 0.0f64;
    for k_cov in &target.killing_covariant {
        let r = bertrand_darboux_residual(g, k_cov, v).map_err(core_err)?;
        for _ in 0..cfg.check_points {
            let (x, y) = residual_window.sample(&mut rng, params).map_err(core_err)?;
            let b = Bindings::point(x, y).with_params_from(params);
            bd_max = bd_max.max(r.eval(&b).map_err(core_err)?.abs());
        }
    }
    if !target.killing_covariant.is_empty() {
        checks.push(CheckResult {
            name: "bertrand-darboux".into(),
            passed: bd_max < cfg.residual_tol.max(1e-9),
            detail: format!(
                "max residual {bd_max:.3e} over {} tensors",
                target.killing_covariant.len()
            ),
        });
    }

    // Poisson brackets of the known integrals.
    if !target.integrals.is_empty() && checks.iter().all(|c| c.passed) {
        let h = target.system.phase_expr().map_err(core_err)?;
        let h_grad = PhaseGradient::of_expr(&h);
        let mut worst = 0.0f64;
        let pts =
            sample_phase_points(&g.window, cfg.check_points, &mut rng, params).map_err(core_err)?;
        for integral in &target.integrals {
            let i_grad = PhaseGradient::of_integral(integral);
            for pt in &pts {
                let b = pt.bindings().with_params_from(params);
                let br = bracket_value(&h_grad, &i_grad, &b).map_err(core_err)?;
                let hv = h.eval(&b).map_err(core_err)?;
                let iv = integral.quadratic_expr().eval(&b).map_err(core_err)?;
                worst = worst.max(br.abs() / (1.0 + hv.abs() * iv.abs()));
            }
        }
        checks.push(CheckResult {
            name: "poisson-bracket".into(),
            passed: worst < cfg.bracket_tol,
            detail: format!("max normalized bracket {worst:.3e}"),
        });

        // Functional independence.
        if target.integrals.len() >= 2 {
            let grads = [
                h_grad,
                PhaseGradient::of_integral(&target.integrals[0]),
                PhaseGradient::of_integral(&target.integrals[1]),
            ];
            let mut min_rank = 3usize;
            for pt in pts.iter().take(20) {
                min_rank =
                    min_rank.min(functional_independence(&grads, pt, params).map_err(core_err)?);
            }
            let wanted = if target.expect_rank3 { 3 } else { 2 };
            checks.push(CheckResult {
                name: "functional-independence".into(),
                passed: min_rank >= wanted,
                detail: format!("min rank {min_rank} (expected >= {wanted})"),
            });
        }
    }

    Ok(finish(target.name, cfg.seed, checks))
}

fn finish(system: String, seed: u64, checks: Vec<CheckResult>) -> VerifyReport {
    let passed = checks.iter().all(|c| c.passed);
    VerifyReport {
        system,
        seed,
        checks,
        passed,
    }
}

// ---------------------------------------------------------------------------
// Transport
// ---------------------------------------------------------------------------

fn load_system(
    name: &str,
) -> Result<
    (
        String,
        projsuper_core::systems::NaturalHamiltonian,
        Bindings,
    ),
    PipelineError,
> {
    if let Some(entry) = catalog::entry(name) {
        let params = entry.params();
        return Ok((entry.name, entry.system, params));
    }
    let path = Path::new(name);
    if path.exists() {
        let def = SystemDefinition::load(path)?;
        let system = def.to_system()?;
        let params = def.bindings();
        return Ok((def.name, system, params));
    }
    Err(PipelineError::UnknownSystem(name.to_string()))
}

/// Transport the potential of `from` onto the metric of `to` through the
/// shared projective vector potential; emits the destination differential
/// and quadrature values of the scalar potential on a grid.
pub fn transport(from: &str, to: &str, cfg: &RunConfig) -> Result<TransportReport, PipelineError> {
    let (from_name, src, src_params) = load_system(from)?;
    let (to_name, dst, dst_params) = load_system(to)?;
    let mut rng = Rng::new(cfg.seed);
    let params = src_params.clone().with_params_from(&dst_params);

    let class = same_projective_class(
        &src.metric,
        &dst.metric,
        cfg.check_points.max(20),
        cfg.class_tol,
        &mut rng,
        &params,
    )
    .map_err(core_err)?;
    if !class.same {
        return Err(PipelineError::ClassMismatch {
            deviation: class.max_deviation,
        });
    }

    let v_src = src.potential.bind_params(&src_params);
    let u = projective_potential(&src.metric, &v_src).map_err(core_err)?;
    let beta_dst = beta_of_metric(&dst.metric).map_err(core_err)?;
    let dv = transport_potential_oneform(&beta_dst, &u);

    // Scalar potential on a 5x5 grid of the shared window.
    let window = src
        .metric
        .window
        .intersect(&dst.metric.window)
        .map_err(core_err)?;
    let basepoint = (
        0.5 * (window.x.0 + window.x.1),
        0.5 * (window.y.0 + window.y.1),
    );
    let mut v_grid = Vec::new();
    for i in 0..5 {
        for j in 0..5 {
            let x = window.x.0 + (i as f64 + 0.5) / 5.0 * (window.x.1 - window.x.0);
            let y = window.y.0 + (j as f64 + 0.5) / 5.0 * (window.y.1 - window.y.0);
            if !window.contains(x, y, &params) {
                continue;
            }
            let value = scalar_potential(&dv, basepoint, (x, y), &params, cfg.quad_tol)
                .map_err(core_err)?;
            v_grid.push([x, y, value]);
        }
    }

    Ok(TransportReport {
        from: from_name,
        to: to_name,
        metric: MetricJson {
            g11: dst.metric.components.a11.to_string(),
            g12: dst.metric.components.a12.to_string(),
            g22: dst.metric.components.a22.to_string(),
        },
        dv: [dv[0].to_string(), dv[1].to_string()],
        v_grid,
        basepoint: [basepoint.0, basepoint.1],
        seed: cfg.seed,
    })
}

/// The three labels the scan prints specially.
pub fn label_name(label: StaeckelLabel) -> &'static str {
    label.as_str()
}
