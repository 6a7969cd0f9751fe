//! WebAssembly bindings behind `www/index.html`.
//!
//! Every export takes and returns JSON text so the page needs no glue
//! beyond `JSON.parse`. The `*_json` functions are the same operations as
//! plain Rust, for native tests.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use mqsp_core::conditions::{check_conditions, forced_zero_trace, Variant, Which};
use mqsp_core::counterexample::{insufficiency_pipeline, SearchSpec};
use mqsp_core::protocol::{build, PolyPair, UnitPhase};
use mqsp_core::scalar::{Backend, Coeff};
use mqsp_core::torus::{max_unitarity_deviation, sample_grid};
use mqsp_core::wire::{self, AnyProtocol};
use mqsp_core::DEFAULT_TOL;

/// Largest grid the page may request.
pub const MAX_RESOLUTION: u32 = 256;

fn torus_payload<S: Coeff>(pair: &PolyPair<S>, resolution: usize) -> Value {
    let rows = sample_grid(pair, resolution);
    let report = check_conditions(pair, Variant::Revised, DEFAULT_TOL);
    json!({
        "pair": wire::pair_to_json(pair),
        "report": wire::report_to_json(&report),
        "resolution": resolution,
        "abs_p2": rows.iter().map(|r| r.abs_p2).collect::<Vec<_>>(),
        "sum": rows.iter().map(|r| r.sum).collect::<Vec<_>>(),
        "max_deviation": max_unitarity_deviation(&rows),
    })
}

/// Build a protocol and sample `|P|²` on a `resolution × resolution` torus
/// grid, `θ_a` along rows. Exact phases stay exact unless an angle appears.
pub fn torus_map_json(protocol: &str, resolution: u32) -> Result<String, String> {
    if !(2..=MAX_RESOLUTION).contains(&resolution) {
        return Err(format!("resolution must be between 2 and {MAX_RESOLUTION}"));
    }
    let prot = wire::parse_protocol(protocol, Backend::Exact)
        .or_else(|e| wire::parse_protocol(protocol, Backend::Float).map_err(|_| e))
        .map_err(|e| e.to_string())?;
    let payload = match prot {
        AnyProtocol::Exact(p) => torus_payload(&build(&p), resolution as usize),
        AnyProtocol::Float(p) => torus_payload(&build(&p), resolution as usize),
    };
    Ok(payload.to_string())
}

/// The forced-zero deduction laid out on the coefficient box: for each of
/// `P` and `Q`, rows `j = m … -m`, columns `k = -(n-m) … n-m`, each cell
/// `"parity"`, the 1-based step that zeroed it, or `"alive"`.
pub fn forced_zero_json(n: u32, m: u32) -> Result<String, String> {
    let trace = forced_zero_trace(n, m).map_err(|e| e.to_string())?;
    let (da, db) = (m as i32, (n - m) as i32);
    let cell = |which: Which, e: (i32, i32)| -> Value {
        if trace.parity_excluded.contains(&(which, e)) {
            return json!("parity");
        }
        match trace
            .steps
            .iter()
            .position(|s| s.poly == which && s.zeroed.contains(&e))
        {
            Some(i) => json!(i + 1),
            None => json!("alive"),
        }
    };
    let grid = |which| -> Vec<Vec<Value>> {
        (-da..=da)
            .rev()
            .map(|j| (-db..=db).map(|k| cell(which, (j, k))).collect())
            .collect()
    };
    Ok(json!({
        "trace": wire::forced_zero_to_json(&trace),
        "grid": { "P": grid(Which::P), "Q": grid(Which::Q) },
    })
    .to_string())
}

/// Run the insufficiency pipeline for `n = 4, m = 2`.
pub fn insufficiency_json(seed: u64, lift_angle: f64, budget: usize) -> Result<String, String> {
    if !lift_angle.is_finite() {
        return Err("lift angle must be finite".into());
    }
    let spec = SearchSpec {
        seed,
        budget,
        ..SearchSpec::default()
    };
    let report = insufficiency_pipeline(&spec, &UnitPhase::from_angle(lift_angle), 1e-9)
        .map_err(|e| e.to_string())?;
    Ok(wire::insufficiency_to_json(&report).to_string())
}

#[wasm_bindgen]
pub fn torus_map(protocol: &str, resolution: u32) -> Result<String, JsValue> {
    torus_map_json(protocol, resolution).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn forced_zero(n: u32, m: u32) -> Result<String, JsValue> {
    forced_zero_json(n, m).map_err(|e| JsValue::from_str(&e))
}

/// `seed` arrives as a JS number; integers up to 2^53 are exact.
#[wasm_bindgen]
pub fn insufficiency(seed: f64, lift_angle: f64, budget: u32) -> Result<String, JsValue> {
    if !(seed >= 0.0 && seed.fract() == 0.0 && seed <= 9_007_199_254_740_992.0) {
        return Err(JsValue::from_str("seed must be a non-negative integer"));
    }
    insufficiency_json(seed as u64, lift_angle, budget as usize).map_err(|e| JsValue::from_str(&e))
}
