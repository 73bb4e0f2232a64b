use crate::error::Error;
use crate::field::FieldParams;
use crate::flow::IntegratorConfig;
use std::collections::BTreeMap;
use std::str::FromStr;

/// Parse `key = value` lines. `#` starts a comment; blank lines are skipped.
pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>, Error> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) =
            line.split_once('=').ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", n + 1)))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", n + 1)));
        }
        if out.insert(k.to_string(), v.trim().to_string()).is_some() {
            return Err(Error::Config(format!("line {}: duplicate key `{k}`", n + 1)));
        }
    }
    Ok(out)
}

/// Every tunable of a run. Defaults: Λ = Λ₀/2, ε = 1/100, ε₀ = 1/10,
/// L_max = 20, window N = 25, K = 20, five inputs.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub machine: String,
    pub inputs: usize,
    pub lmax: usize,
    pub window: f64,
    pub seed: u64,
    pub eps0: f64,
    pub lambda_frac: f64,
    pub eps: f64,
    pub ext_width: f64,
    pub quad_tol: f64,
    pub rtol: f64,
    pub atol: f64,
    pub max_du: f64,
    pub crossing_tol: f64,
    pub trials: usize,
    pub order: usize,
    pub c_const: f64,
    pub sb: f64,
    pub delta_frac: f64,
    pub damping_radius: f64,
    pub fit_degree: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let f = FieldParams::default();
        let i = IntegratorConfig::default();
        RunConfig {
            machine: "countdown".into(),
            inputs: f.inputs,
            lmax: i.lmax,
            window: i.window,
            seed: 0,
            eps0: 0.1,
            lambda_frac: f.lambda_frac,
            eps: f.eps,
            ext_width: f.ext_width,
            quad_tol: f.quad_tol,
            rtol: i.rtol,
            atol: i.atol,
            max_du: i.max_du,
            crossing_tol: i.crossing_tol,
            trials: 20,
            order: 20,
            c_const: 1.0,
            sb: 5.0,
            delta_frac: 0.5,
            damping_radius: 64.0,
            fit_degree: 4,
        }
    }
}

fn num<T: FromStr>(key: &str, v: &str) -> Result<T, Error> {
    v.parse().map_err(|_| Error::Config(format!("bad value `{v}` for `{key}`")))
}

impl RunConfig {
    pub const KEYS: [&'static str; 21] = [
        "machine",
        "inputs",
        "lmax",
        "window",
        "seed",
        "eps0",
        "lambda_frac",
        "eps",
        "ext_width",
        "quad_tol",
        "rtol",
        "atol",
        "max_du",
        "crossing_tol",
        "trials",
        "order",
        "c",
        "sb",
        "delta_frac",
        "damping_radius",
        "fit_degree",
    ];

    /// Set one key; `-` and `_` are interchangeable.
    pub fn set(&mut self, key: &str, v: &str) -> Result<(), Error> {
        match key.replace('-', "_").as_str() {
            "machine" => self.machine = v.to_string(),
            "inputs" => self.inputs = num(key, v)?,
            "lmax" => self.lmax = num(key, v)?,
            "window" => self.window = num(key, v)?,
            "seed" => self.seed = num(key, v)?,
            "eps0" => self.eps0 = num(key, v)?,
            "lambda_frac" => self.lambda_frac = num(key, v)?,
            "eps" => self.eps = num(key, v)?,
            "ext_width" => self.ext_width = num(key, v)?,
            "quad_tol" => self.quad_tol = num(key, v)?,
            "rtol" => self.rtol = num(key, v)?,
            "atol" => self.atol = num(key, v)?,
            "max_du" => self.max_du = num(key, v)?,
            "crossing_tol" => self.crossing_tol = num(key, v)?,
            "trials" => self.trials = num(key, v)?,
            "order" => self.order = num(key, v)?,
            "c" => self.c_const = num(key, v)?,
            "sb" => self.sb = num(key, v)?,
            "delta_frac" => self.delta_frac = num(key, v)?,
            "damping_radius" => self.damping_radius = num(key, v)?,
            "fit_degree" => self.fit_degree = num(key, v)?,
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn apply(&mut self, kv: &BTreeMap<String, String>) -> Result<(), Error> {
        for (k, v) in kv {
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self, Error> {
        let mut c = RunConfig::default();
        c.apply(&parse_kv(text)?)?;
        Ok(c)
    }

    /// Inverse of [`from_text`](Self::from_text), keys in [`KEYS`](Self::KEYS) order.
    pub fn to_text(&self) -> String {
        Self::KEYS.iter().map(|k| format!("{k} = {}\n", self.get(k))).collect()
    }

    fn get(&self, key: &str) -> String {
        match key {
            "machine" => self.machine.clone(),
            "inputs" => self.inputs.to_string(),
            "lmax" => self.lmax.to_string(),
            "window" => self.window.to_string(),
            "seed" => self.seed.to_string(),
            "eps0" => self.eps0.to_string(),
            "lambda_frac" => self.lambda_frac.to_string(),
            "eps" => self.eps.to_string(),
            "ext_width" => self.ext_width.to_string(),
            "quad_tol" => self.quad_tol.to_string(),
            "rtol" => self.rtol.to_string(),
            "atol" => self.atol.to_string(),
            "max_du" => self.max_du.to_string(),
            "crossing_tol" => self.crossing_tol.to_string(),
            "trials" => self.trials.to_string(),
            "order" => self.order.to_string(),
            "c" => self.c_const.to_string(),
            "sb" => self.sb.to_string(),
            "delta_frac" => self.delta_frac.to_string(),
            "damping_radius" => self.damping_radius.to_string(),
            "fit_degree" => self.fit_degree.to_string(),
            _ => unreachable!("not a config key"),
        }
    }

    /// Field parameters; heights cover both `L_max` and the window radius,
    /// plus one spare anchor.
    pub fn field_params(&self) -> FieldParams {
        FieldParams {
            lambda_frac: self.lambda_frac,
            eps: self.eps,
            inputs: self.inputs,
            heights: self.lmax.max(self.window.max(0.0).ceil() as usize) + 1,
            ext_width: self.ext_width,
            rho0: None,
            quad_tol: self.quad_tol,
            seed: self.seed,
        }
    }

    pub fn integrator(&self) -> IntegratorConfig {
        IntegratorConfig {
            rtol: self.rtol,
            atol: self.atol,
            max_du: self.max_du,
            crossing_tol: self.crossing_tol,
            lmax: self.lmax,
            window: self.window,
            ..IntegratorConfig::default()
        }
    }
}
