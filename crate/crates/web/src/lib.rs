//! Browser bindings. Every export returns a JSON string, or throws a message string.

use flowtm::beltrami::{lift, Poly2};
use flowtm::field::{FieldParams, FieldSpec};
use flowtm::flow::{simulate_input, HaltingSetSpec, IntegratorConfig, Unperturbed};
use flowtm::machine::presets;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn field(machine: &str, inputs: usize, heights: usize) -> Result<FieldSpec, String> {
    let m = presets::by_name(machine).ok_or_else(|| format!("unknown machine `{machine}`"))?;
    let p = FieldParams { inputs, heights, ..Default::default() };
    FieldSpec::compile(&m, &p).map_err(|e| e.to_string())
}

/// Core curve of every band, sampled in the plane, plus the box centres.
pub fn curves_json(machine: &str, inputs: usize, heights: usize) -> Result<String, String> {
    let fs = field(machine, inputs, heights)?;
    let mut bands = Vec::new();
    for chart in fs.charts() {
        let fam = chart.family();
        let n = (fam.u_max() * 40.0).ceil() as usize;
        let pts = (0..=n)
            .map(|k| chart.param_to_plane(fam.u_max() * k as f64 / n as f64, 0.0).map(|(x, y)| [x, y]))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?;
        let anchors: Vec<[f64; 2]> = (0..=fam.budget()).map(|l| [fam.anchor_x(l), l as f64]).collect();
        bands.push(json!({ "band": fam.band(), "points": pts, "anchors": anchors }));
    }
    Ok(json!({ "machine": fs.machine().name, "lambda": fs.lambda(), "bands": bands }).to_string())
}

/// One unperturbed run: verdict and the trajectory mapped to the plane.
pub fn simulate_json(
    machine: &str,
    inputs: usize,
    heights: usize,
    band: usize,
    target: &str,
) -> Result<String, String> {
    let fs = field(machine, inputs, heights)?;
    if band >= fs.bands() {
        return Err(format!("band {band} out of range (0..{})", fs.bands()));
    }
    let digits = target
        .chars()
        .map(|c| c.to_digit(10).map(|d| d as u8))
        .collect::<Option<Vec<_>>>()
        .ok_or("target must be decimal digits")?;
    let t = HaltingSetSpec::new(digits).map_err(|e| e.to_string())?;
    let cfg = IntegratorConfig { lmax: heights.saturating_sub(1), record_trajectory: true, ..Default::default() };
    let o = simulate_input(&fs, band, &t, &Unperturbed, &cfg).map_err(|e| e.to_string())?;
    let chart = fs.chart(band).map_err(|e| e.to_string())?;
    let pts: Vec<Value> = o
        .trajectory
        .iter()
        .filter_map(|s| chart.param_to_plane(s.u, s.rho.to_f64()).ok())
        .map(|(x, y)| json!([x, y]))
        .collect();
    let rho: Vec<Value> = o.trajectory.iter().map(|s| json!([s.u, s.rho.ln_abs()])).collect();
    Ok(json!({ "verdict": o.verdict.to_string(), "hit": o.hit, "points": pts, "ln_rho": rho }).to_string())
}

/// Horizontal slice z = const of the Beltrami lift of `datum` on [-1, 1]².
pub fn beltrami_slice_json(datum: &str, lambda: f64, order: usize, z: f64, n: usize) -> Result<String, String> {
    let f = match datum {
        "0" => Poly2::zero(),
        "x" => Poly2::x(),
        "y" => Poly2::y(),
        "xy" => Poly2::x().mul(&Poly2::y()),
        "x2-y2" => Poly2::from_terms(&[(2, 0, 1, 1), (0, 2, -1, 1)]),
        other => return Err(format!("unknown datum `{other}`")),
    };
    let n = n.clamp(2, 64);
    let (_, u, rep) = lift(&f, lambda, order).map_err(|e| e.to_string())?;
    let ev = u.evaluator();
    let mut rows = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let x = -1.0 + 2.0 * i as f64 / (n - 1) as f64;
            let y = -1.0 + 2.0 * j as f64 / (n - 1) as f64;
            let v = ev.eval(x, y, z);
            rows.push(json!([x, y, v[0], v[1], v[2]]));
        }
    }
    Ok(json!({ "ok": rep.ok(), "checked_through": rep.checked_through, "samples": rows }).to_string())
}

#[wasm_bindgen]
pub fn curves(machine: &str, inputs: usize, heights: usize) -> Result<String, JsValue> {
    curves_json(machine, inputs, heights).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn simulate(machine: &str, inputs: usize, heights: usize, band: usize, target: &str) -> Result<String, JsValue> {
    simulate_json(machine, inputs, heights, band, target).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn beltrami_slice(datum: &str, lambda: f64, order: usize, z: f64, n: usize) -> Result<String, JsValue> {
    beltrami_slice_json(datum, lambda, order, z, n).map_err(|e| JsValue::from_str(&e))
}
