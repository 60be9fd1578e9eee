//! System description files: JSON with explicit matrices, row-major.
//!
//! Top-level keys: `n`, `m`, `r`, `tau`, `a_atoms`, `a_density`, `b`,
//! `c_atoms`, `c_density`, `nonlinearity`. A formal schema ships in
//! `docs/system-schema.json`.

use crate::error::{Error, Result};
use crate::expr::parse_expression;
use crate::mat::RMat;
use crate::measure::DelayMeasure;
use crate::nonlin::{NonlinKind, Nonlinearity};
use crate::system::DelaySystem;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct AtomSpec {
    theta: f64,
    /// Row-major entries of the weight matrix.
    matrix: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct DensitySpec {
    /// `[lower, upper]` subinterval of `[-tau, 0]`.
    interval: [f64; 2],
    /// Row-major coefficient matrices, lowest degree first.
    coeffs: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct LipschitzSpec {
    lambda: f64,
    incremental: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NonlinSpec {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    params: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sector: Option<[f64; 2]>,
    /// Marks the sector as incremental (N2) rather than pointwise (N1).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sector_incremental: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lipschitz: Option<LipschitzSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemSpec {
    n: usize,
    m: usize,
    r: usize,
    tau: f64,
    #[serde(default)]
    a_atoms: Vec<AtomSpec>,
    #[serde(default)]
    a_density: Vec<DensitySpec>,
    b: Vec<f64>,
    #[serde(default)]
    c_atoms: Vec<AtomSpec>,
    #[serde(default)]
    c_density: Vec<DensitySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    nonlinearity: Option<NonlinSpec>,
}

fn measure_from_spec(
    rows: usize,
    cols: usize,
    tau: f64,
    atoms: &[AtomSpec],
    density: &[DensitySpec],
) -> Result<DelayMeasure> {
    let mut mu = DelayMeasure::empty(rows, cols, tau)?;
    for a in atoms {
        mu = mu.with_atom(a.theta, RMat::from_rows(rows, cols, a.matrix.clone())?)?;
    }
    for d in density {
        let coeffs = d
            .coeffs
            .iter()
            .map(|c| RMat::from_rows(rows, cols, c.clone()))
            .collect::<Result<Vec<_>>>()?;
        mu = mu.with_density(d.interval[0], d.interval[1], coeffs)?;
    }
    Ok(mu)
}

fn nonlin_from_spec(spec: &NonlinSpec) -> Result<Nonlinearity> {
    let mut nl = match spec.kind.as_str() {
        "goodwin" => {
            let rho = spec
                .params
                .as_ref()
                .and_then(|p| p.get("rho"))
                .and_then(|v| v.as_f64())
                .unwrap_or(0.0);
            Nonlinearity::goodwin(rho)?
        }
        "linear-gain" => {
            let params = spec
                .params
                .as_ref()
                .ok_or_else(|| Error::Config("linear-gain needs params.matrix".into()))?;
            let rows = params
                .get("rows")
                .and_then(|v| v.as_u64())
                .ok_or_else(|| Error::Config("linear-gain needs params.rows".into()))?
                as usize;
            let cols = params
                .get("cols")
                .and_then(|v| v.as_u64())
                .ok_or_else(|| Error::Config("linear-gain needs params.cols".into()))?
                as usize;
            let entries: Vec<f64> = params
                .get("matrix")
                .and_then(|v| v.as_array())
                .ok_or_else(|| Error::Config("linear-gain needs params.matrix".into()))?
                .iter()
                .map(|v| v.as_f64().ok_or_else(|| Error::Config("non-numeric gain entry".into())))
                .collect::<Result<Vec<_>>>()?;
            Nonlinearity::linear_gain(RMat::from_rows(rows, cols, entries)?)
        }
        "expression" => {
            let text = spec
                .params
                .as_ref()
                .and_then(|p| p.get("text"))
                .and_then(|v| v.as_str())
                .ok_or_else(|| Error::Config("expression needs params.text".into()))?;
            Nonlinearity::expression(parse_expression(text)?)
        }
        other => {
            return Err(Error::Config(format!(
                "unknown nonlinearity kind '{other}' (expected goodwin, linear-gain, expression)"
            )))
        }
    };
    if let Some([k1, k2]) = spec.sector {
        nl = nl.with_sector(k1, k2, spec.sector_incremental.unwrap_or(false))?;
    }
    if let Some(lb) = &spec.lipschitz {
        nl = nl.with_lipschitz(lb.lambda, lb.incremental)?;
    }
    Ok(nl)
}

/// Parse a system description from JSON text.
pub fn system_from_json(text: &str) -> Result<(DelaySystem, Option<Nonlinearity>)> {
    let spec: SystemSpec = serde_json::from_str(text)?;
    let a = measure_from_spec(spec.n, spec.n, spec.tau, &spec.a_atoms, &spec.a_density)?;
    let c = measure_from_spec(spec.r, spec.n, spec.tau, &spec.c_atoms, &spec.c_density)?;
    let b = RMat::from_rows(spec.n, spec.m, spec.b.clone())?;
    let sys = DelaySystem::new(spec.tau, a, b, c)?;
    let nl = spec.nonlinearity.as_ref().map(nonlin_from_spec).transpose()?;
    Ok((sys, nl))
}

/// Serialize a system (and optional nonlinearity) back to JSON text.
pub fn system_to_json(sys: &DelaySystem, nl: Option<&Nonlinearity>) -> Result<String> {
    let atoms_of = |mu: &DelayMeasure| -> Vec<AtomSpec> {
        mu.atoms()
            .iter()
            .map(|a| AtomSpec {
                theta: a.theta,
                matrix: a.matrix.data.clone(),
            })
            .collect()
    };
    let density_of = |mu: &DelayMeasure| -> Vec<DensitySpec> {
        mu.density()
            .iter()
            .map(|d| DensitySpec {
                interval: [d.lower, d.upper],
                coeffs: d.coeffs.iter().map(|c| c.data.clone()).collect(),
            })
            .collect()
    };
    let nonlinearity = nl.map(|nl| {
        let (kind, params) = match &nl.kind {
            NonlinKind::Goodwin { rho } => (
                "goodwin".to_string(),
                Some(serde_json::json!({ "rho": rho })),
            ),
            NonlinKind::LinearGain(k) => (
                "linear-gain".to_string(),
                Some(serde_json::json!({
                    "rows": k.rows,
                    "cols": k.cols,
                    "matrix": k.data,
                })),
            ),
            NonlinKind::Expression(tree) => (
                "expression".to_string(),
                Some(serde_json::json!({ "text": tree.to_string() })),
            ),
        };
        NonlinSpec {
            kind,
            params,
            sector: nl.sector.map(|s| [s.k1, s.k2]),
            sector_incremental: nl.sector.map(|s| s.incremental),
            lipschitz: nl.lipschitz.map(|l| LipschitzSpec {
                lambda: l.lambda,
                incremental: l.incremental,
            }),
        }
    });
    let spec = SystemSpec {
        n: sys.n,
        m: sys.m,
        r: sys.r,
        tau: sys.tau,
        a_atoms: atoms_of(&sys.a),
        a_density: density_of(&sys.a),
        b: sys.b.data.clone(),
        c_atoms: atoms_of(&sys.c),
        c_density: density_of(&sys.c),
        nonlinearity,
    };
    Ok(serde_json::to_string_pretty(&spec)?)
}

/// Load a system description from a file.
pub fn load_system(path: &Path) -> Result<(DelaySystem, Option<Nonlinearity>)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    system_from_json(&text)
}
