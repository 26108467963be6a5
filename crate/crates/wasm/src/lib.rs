//! Browser bindings: replication by butterflies, the truncated counterexample,
//! and dyadic approximation. Every entry point takes and returns JSON text so
//! the page needs no generated bindings beyond plain strings.

use serde::Deserialize;
use serde_json::{json, Value};
use span_lattice::closure::freudenthal_approx;
use span_lattice::lab::{build_counterexample, obstruction_certificate, row_limit_residuals};
use span_lattice::sigma::sigma_of;
use span_lattice::spanning::replicate;
use span_lattice::{Exact, LatticeElement, LatticeError, Payoff, Scalar, StateSpace};
use wasm_bindgen::prelude::*;

#[derive(Deserialize)]
struct ClaimInput {
    underlying: Vec<f64>,
    claim: Vec<f64>,
    #[serde(default)]
    levels: Option<usize>,
}

fn error(msg: impl std::fmt::Display) -> Value {
    json!({ "ok": false, "error": msg.to_string() })
}

fn payoffs(input: &str) -> Result<(ClaimInput, Payoff, Payoff), Value> {
    let input: ClaimInput = serde_json::from_str(input).map_err(error)?;
    if input.underlying.len() != input.claim.len() {
        return Err(error("underlying and claim must have the same length"));
    }
    let space = StateSpace::uniform(input.underlying.len()).map_err(error)?;
    let f = Payoff::new(space.clone(), input.underlying.clone()).map_err(error)?;
    let g = Payoff::new(space, input.claim.clone()).map_err(error)?;
    Ok((input, f, g))
}

pub fn replicate_json(input: &str) -> Value {
    let (_, f, g) = match payoffs(input) {
        Ok(p) => p,
        Err(e) => return e,
    };
    match replicate(&g, &f) {
        Ok(portfolio) => {
            let value = portfolio.evaluate();
            json!({
                "ok": true,
                "positions": portfolio.positions().iter().map(|p| json!({
                    "kind": p.instrument.kind.as_str(),
                    "strike": p.instrument.strike,
                    "weight": p.weight,
                })).collect::<Vec<_>>(),
                "replicated": value.values(),
                "residual": value.minus(&g).map(|d| d.sup_norm()).unwrap_or(f64::NAN),
            })
        }
        Err(LatticeError::SpanningFailure {
            residual,
            block,
            best_approximation,
        }) => json!({
            "ok": false,
            "error": format!("states {block:?} share a value of the underlying but not of the claim"),
            "block": block,
            "residual": residual,
            "best_approximation": best_approximation,
        }),
        Err(e) => error(e),
    }
}

/// Largest array side the page may request; exact arithmetic past this gets slow.
pub const MAX_SIDE: usize = 24;

/// Computed with rationals and converted for display. Float evaluation loses
/// the row-limit law once the strike gaps fall under rounding error.
pub fn counterexample_json(rows: usize, cols: usize, j: usize) -> Value {
    if rows > MAX_SIDE || cols > MAX_SIDE {
        return error(format!("rows and cols are limited to {MAX_SIDE}"));
    }
    let cx = match build_counterexample::<Exact>(rows, cols) {
        Ok(cx) => cx,
        Err(e) => return error(e),
    };
    let j = j.clamp(1, cx.max_j());
    let y = match cx.yj(j) {
        Ok(y) => y,
        Err(e) => return error(e),
    };
    let mut obstruction = Vec::with_capacity(rows);
    for m in 1..=rows {
        match obstruction_certificate(&y, m) {
            Ok(c) => obstruction.push(json!({
                "m": m,
                "holds": c.holds,
                "bound": c.bound.to_f64_lossy(),
                "sup_norm": c.sup_norm.to_f64_lossy(),
            })),
            Err(e) => return error(e),
        }
    }
    let distance = match y.minus(&cx.e) {
        Ok(d) => d.sup_norm().to_f64_lossy(),
        Err(e) => return error(e),
    };
    let residuals: Vec<f64> = row_limit_residuals(&y).iter().map(Scalar::to_f64_lossy).collect();
    let y = y.to_f64();
    let table: Vec<Vec<f64>> = (1..=rows)
        .map(|m| y.row(m).iter().copied().chain([*y.limit(m)]).collect())
        .collect();
    json!({
        "ok": true,
        "j": j,
        "max_j": cx.max_j(),
        "y": table,
        "row_limit_residuals": residuals,
        "distance_to_e": distance,
        "obstruction": obstruction,
    })
}

pub fn freudenthal_json(input: &str) -> Value {
    let (input, f, g) = match payoffs(input) {
        Ok(p) => p,
        Err(e) => return e,
    };
    let part = match sigma_of(&[f]) {
        Ok(p) => p,
        Err(e) => return error(e),
    };
    match freudenthal_approx(&g, &part, input.levels.unwrap_or(4)) {
        Ok(r) => json!({
            "ok": true,
            "stages": r.stages.iter().map(|s| s.values().to_vec()).collect::<Vec<_>>(),
            "errors": r.errors,
        }),
        Err(e) => error(e),
    }
}

#[wasm_bindgen]
pub fn replicate_claim(input: &str) -> String {
    replicate_json(input).to_string()
}

#[wasm_bindgen]
pub fn counterexample_stage(rows: usize, cols: usize, j: usize) -> String {
    counterexample_json(rows, cols, j).to_string()
}

#[wasm_bindgen]
pub fn dyadic_stages(input: &str) -> String {
    freudenthal_json(input).to_string()
}
