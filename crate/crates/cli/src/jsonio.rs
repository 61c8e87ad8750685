//! JSON formats: system definitions (loadable and exportable), the
//! classification report, and the transport report. Expressions travel as
//! strings in the expression grammar.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use projsuper_core::catalog::CatalogEntry;
use projsuper_core::expr::{parse_with_params, Bindings, Expr, ParseError};
use projsuper_core::geometry::{Metric2, Sym2, Window};
use projsuper_core::systems::NaturalHamiltonian;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricJson {
    pub g11: String,
    pub g12: String,
    pub g22: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GuardJson {
    pub expr: String,
    pub margin: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DomainJson {
    pub x: [f64; 2],
    pub y: [f64; 2],
    #[serde(default)]
    pub guards: Vec<GuardJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KillingJson {
    pub k11: String,
    pub k12: String,
    pub k22: String,
}

/// The system-definition format:
/// `{ name, metric, potential, parameters, domain, basepoint }` with
/// expression strings, plus optional covariant Killing tensors used by the
/// verification checks.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemDefinition {
    pub name: String,
    pub metric: MetricJson,
    pub potential: String,
    #[serde(default)]
    pub parameters: BTreeMap<String, f64>,
    pub domain: DomainJson,
    pub basepoint: [f64; 2],
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub killing_tensors: Vec<KillingJson>,
}

#[derive(Debug)]
pub enum JsonError {
    Io(std::io::Error),
    Format(serde_json::Error),
    Expr(ParseError),
}

impl std::fmt::Display for JsonError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            JsonError::Io(e) => write!(f, "{e}"),
            JsonError::Format(e) => write!(f, "{e}"),
            JsonError::Expr(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for JsonError {}

impl From<std::io::Error> for JsonError {
    fn from(e: std::io::Error) -> Self {
        JsonError::Io(e)
    }
}

impl From<serde_json::Error> for JsonError {
    fn from(e: serde_json::Error) -> Self {
        JsonError::Format(e)
    }
}

impl From<ParseError> for JsonError {
    fn from(e: ParseError) -> Self {
        JsonError::Expr(e)
    }
}

impl SystemDefinition {
    pub fn load(path: &Path) -> Result<SystemDefinition, JsonError> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    fn param_names(&self) -> Vec<&str> {
        self.parameters.keys().map(|s| s.as_str()).collect()
    }

    fn parse_expr(&self, text: &str) -> Result<Expr, JsonError> {
        Ok(parse_with_params(text, &self.param_names())?)
    }

    /// Materialize the system (metric, potential, window).
    pub fn to_system(&self) -> Result<NaturalHamiltonian, JsonError> {
        let mut window = Window::rect(
            (self.domain.x[0], self.domain.x[1]),
            (self.domain.y[0], self.domain.y[1]),
        );
        for g in &self.domain.guards {
            window = window.with_guard(self.parse_expr(&g.expr)?, g.margin);
        }
        let metric = Metric2::new(
            self.parse_expr(&self.metric.g11)?,
            self.parse_expr(&self.metric.g12)?,
            self.parse_expr(&self.metric.g22)?,
            window,
        );
        let potential = self.parse_expr(&self.potential)?;
        Ok(NaturalHamiltonian::new(metric, potential))
    }

    pub fn killing_tensors(&self) -> Result<Vec<Sym2>, JsonError> {
        self.killing_tensors
            .iter()
            .map(|k| {
                Ok(Sym2::new(
                    self.parse_expr(&k.k11)?,
                    self.parse_expr(&k.k12)?,
                    self.parse_expr(&k.k22)?,
                ))
            })
            .collect()
    }

    pub fn bindings(&self) -> Bindings {
        let mut b = Bindings::new();
        for (name, value) in &self.parameters {
            b.set_param(name, *value);
        }
        b
    }

    /// Serialize a catalog entry into the interchange format.
    pub fn from_entry(entry: &CatalogEntry) -> SystemDefinition {
        let metric = &entry.system.metric;
        SystemDefinition {
            name: entry.name.clone(),
            metric: MetricJson {
                g11: metric.components.a11.to_string(),
                g12: metric.components.a12.to_string(),
                g22: metric.components.a22.to_string(),
            },
            potential: entry.system.potential.to_string(),
            parameters: entry
                .parameters
                .iter()
                .map(|(k, v)| (k.to_string(), *v))
                .collect(),
            domain: DomainJson {
                x: [metric.window.x.0, metric.window.x.1],
                y: [metric.window.y.0, metric.window.y.1],
                guards: metric
                    .window
                    .guards
                    .iter()
                    .map(|g| GuardJson {
                        expr: g.expr.to_string(),
                        margin: g.margin,
                    })
                    .collect(),
            },
            basepoint: [entry.basepoint.0, entry.basepoint.1],
            killing_tensors: Vec::new(),
        }
    }
}

/// One margin entry in a report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarginJson {
    pub check: String,
    pub clearance: f64,
}

/// Classification report: `{ theta, phi, label, margins, residual_rms, seed }`.
/// Unclassifiable points carry `label: null` and the two candidates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub theta: f64,
    pub phi: f64,
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub candidates: Vec<String>,
    pub margins: Vec<MarginJson>,
    pub residual_rms: f64,
    pub condition: f64,
    pub seed: u64,
}

/// Transport output: destination metric, the transported potential
/// differential, and scalar-potential values on a coordinate grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransportReport {
    pub from: String,
    pub to: String,
    pub metric: MetricJson,
    pub dv: [String; 2],
    /// Rows `[x, y, V(x, y)]` with `V` vanishing at the basepoint.
    pub v_grid: Vec<[f64; 3]>,
    pub basepoint: [f64; 2],
    pub seed: u64,
}
