//! The `design` subcommand: weights that make a target the dominant
//! eigenvector of the recommendation covariance.

use prefdyn_core::design::{design_self_aligned, maximize_eigengap, EigengapOptions};
use prefdyn_core::{ItemCatalog, UnitVector};
use serde_json::{json, Value};

use crate::config::{unit_vector, CatalogSpec};
use crate::error::{HarnessError, Result};
use crate::scenarios::randomized_design_summary;

/// Parses a catalog file: a JSON array of item vectors or a
/// `"random:N:seed"` string (which then needs `dimension`).
pub fn load_catalog(text: &str, dimension: Option<usize>) -> Result<ItemCatalog> {
    let spec: CatalogSpec = serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
    let d = match (&spec, dimension) {
        (_, Some(d)) => d,
        (CatalogSpec::Explicit(rows), None) => rows.first().map(Vec::len).unwrap_or(0),
        (CatalogSpec::Random { .. }, None) => {
            return Err(HarnessError::Config("a random catalog needs --dimension".into()))
        }
    };
    if d < 2 {
        return Err(HarnessError::Config(format!("dimension must be at least 2, got {d}")));
    }
    spec.build(d)
}

/// Target given as comma-separated coordinates or as a catalog index.
pub fn parse_target(text: &str, catalog: &ItemCatalog) -> Result<UnitVector> {
    let text = text.trim();
    if let Ok(index) = text.parse::<usize>() {
        return Ok(catalog.get(index).map_err(|e| HarnessError::Config(e.to_string()))?.clone());
    }
    let coords = text
        .trim_matches(|c| c == '[' || c == ']')
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| HarnessError::Config(format!("target {text:?}: {e}")))?;
    unit_vector(&coords, catalog.dim(), "target")
}

pub fn run_design(catalog: &ItemCatalog, target: &UnitVector, threshold: Option<f64>, seed: u64) -> Result<Value> {
    let options = EigengapOptions {
        seed,
        ..EigengapOptions::default()
    };
    let design = match threshold {
        Some(th) => design_self_aligned(catalog, target, th, &options)?,
        None => maximize_eigengap(catalog, target, &options)?,
    };
    Ok(json!({
        "target": target.as_slice(),
        "threshold": threshold,
        "design": randomized_design_summary(&design),
    }))
}
