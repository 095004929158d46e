//! Browser bindings: a knot-count explorer, sphere rules and 2D sparse grids.
//! Every export returns a JSON string.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use symcube::smolyak::counts::{known_count, new_count, smolyak_count, CountSequence};
use symcube::smolyak::{combine, SmolyakPlan};
use symcube::sphere::{
    mysovskikh_deg5, mysovskikh_deg7, product_deg5_sphere, product_deg7_sphere, projected_smolyak_sphere,
    SimplexFrame,
};
use symcube::verify::{exactness, moller_bound};
use symcube::weights::{default_ladder, ladder_variant_n3};
use symcube::{CubatureFormula, ProductWeight, Target, Weight1D};

const MAX_DIM: usize = 200;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn parse_dims(dims: &str) -> Result<Vec<usize>, String> {
    let dims = dims
        .split([',', ' '])
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<usize>().map_err(|_| format!("not a dimension: {s:?}")))
        .collect::<Result<Vec<_>, _>>()?;
    if dims.is_empty() {
        return Err("no dimensions given".into());
    }
    if let Some(d) = dims.iter().find(|d| **d == 0 || **d > MAX_DIM) {
        return Err(format!("dimension {d} outside 1..={MAX_DIM}"));
    }
    Ok(dims)
}

fn opt(v: symcube::Result<u128>) -> Value {
    v.map(|n| json!(n.to_string())).unwrap_or(Value::Null)
}

/// Knot counts of degree `degree` for each dimension in `dims`.
pub fn count_rows_json(degree: usize, dims: &str) -> Result<String, String> {
    if degree % 2 == 0 || degree > 41 {
        return Err(format!("degree must be odd and at most 41, got {degree}"));
    }
    let rows: Vec<Value> = parse_dims(dims)?
        .into_iter()
        .map(|d| {
            json!({
                "d": d,
                "smolyak": opt(smolyak_count(&CountSequence::Standard, degree, d)),
                "variant": opt(smolyak_count(&CountSequence::Variant, degree, d)),
                "known": opt(known_count(degree, d)),
                "new": opt(new_count(degree, d)),
                "moller": opt(moller_bound(degree, d)),
            })
        })
        .collect();
    Ok(Value::Array(rows).to_string())
}

fn rule_json(rule: &CubatureFormula, degree: usize) -> Result<Value, String> {
    let report = exactness(rule, rule.target(), degree, 1e-9).map_err(err)?;
    Ok(json!({
        "dim": rule.dim(),
        "count": rule.counts().merged,
        "nonzero": rule.len(),
        "points": rule.points().collect::<Vec<_>>(),
        "weights": rule.weights(),
        "max_rel_error": report.max_rel_error,
        "exact": report.pass,
    }))
}

/// A degree 5 or 7 rule for the unit sphere in dimension `dim`.
/// `source` is `simplex`, `product` or `projected`.
pub fn sphere_rule_json(degree: usize, dim: usize, source: &str) -> Result<String, String> {
    if dim > 16 {
        return Err("dimension limited to 16 in the browser".into());
    }
    let rule = match (source, degree) {
        ("simplex", 5) => mysovskikh_deg5(dim, &SimplexFrame::aligned(dim).map_err(err)?),
        ("simplex", 7) => mysovskikh_deg7(dim, &SimplexFrame::aligned(dim).map_err(err)?),
        ("product", 5) => product_deg5_sphere(dim),
        ("product", 7) => product_deg7_sphere(dim),
        ("projected", 5 | 7) => projected_smolyak_sphere(dim, (degree - 1) / 2, 1.0),
        (_, 5 | 7) => return Err(format!("unknown source {source:?}")),
        _ => return Err(format!("degree must be 5 or 7, got {degree}")),
    }
    .map_err(err)?;
    Ok(rule_json(&rule, degree)?.to_string())
}

/// The Smolyak rule A(2 + k, 2) for `lebesgue` or `gaussian`, on the
/// standard ladder or the one with n_3 = 3.
pub fn sparse_grid_json(k: usize, weight: &str, variant: bool) -> Result<String, String> {
    if k > 8 {
        return Err("k limited to 8".into());
    }
    let w = match weight {
        "lebesgue" => Weight1D::lebesgue(),
        "gaussian" => Weight1D::gaussian(),
        _ => return Err(format!("unknown weight {weight:?}")),
    };
    let ladder = if variant {
        ladder_variant_n3(&w, k + 1)
    } else {
        let c = if w.half_width().is_finite() { 0.5 } else { 1.0 };
        default_ladder(&w, k + 1, c)
    }
    .map_err(err)?;
    let plan = SmolyakPlan::shared(2 + k, 2, ladder).map_err(err)?;
    let pw = ProductWeight::uniform(w, 2);
    let rule = combine(&plan, &pw).map_err(err)?;
    let target = Target::Product(pw);
    let report = exactness(&rule, &target, 2 * k + 1, 1e-9).map_err(err)?;
    let mut v = rule_json(&rule, 2 * k + 1)?;
    v["exact"] = json!(report.pass);
    Ok(v.to_string())
}

#[wasm_bindgen]
pub fn count_rows(degree: usize, dims: &str) -> Result<String, JsError> {
    count_rows_json(degree, dims).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn sphere_rule(degree: usize, dim: usize, source: &str) -> Result<String, JsError> {
    sphere_rule_json(degree, dim, source).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn sparse_grid(k: usize, weight: &str, variant: bool) -> Result<String, JsError> {
    sparse_grid_json(k, weight, variant).map_err(|e| JsError::new(&e))
}
