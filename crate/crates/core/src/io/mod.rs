//! Plain-text artifacts: CSV tables, trajectory plots, run manifests and the
//! flat `key = value` config format.

mod config;
mod manifest;
mod svg;

pub use config::{parse_kv, RunConfig};
pub use manifest::{machine_digest, RunManifest};
pub use svg::trajectory_svg;

use crate::error::Error;
use crate::field::FieldSpec;
use crate::flow::{Classification, EventRecord, FlowState, SimulationVerdict};
use crate::sphere::Iterate;
use std::io::Write;

pub const CURVE_HEADER: &str = "s,x,y,kappa";
pub const FIELD_HEADER: &str = "x,y,Xx,Xy";
pub const TRAJECTORY_HEADER: &str = "t,s,rho_sign,ln_abs_rho,band,l_next";
pub const EVENTS_HEADER: &str = "band,l,classification,q,r,s,t";
pub const ROBUSTNESS_HEADER: &str = "machine,input,seed,verdict,hit,agrees_with_unperturbed";
pub const GRID_HEADER: &str = "x,y,z,ux,uy,uz";
pub const SPHERE_HEADER: &str = "n,t,X3d_x,X3d_y,X3d_z";
pub const SHADOW_HEADER: &str = "n,x,y";

/// Curve `γ_band` sampled `per_unit` times per unit of height parameter.
pub fn write_curve<W: Write>(w: &mut W, fs: &FieldSpec, band: usize, per_unit: usize) -> Result<(), Error> {
    let chart = fs.chart(band)?;
    let fam = chart.family();
    writeln!(w, "{CURVE_HEADER}")?;
    let n = (fam.u_max() * per_unit.max(1) as f64).floor() as usize;
    for k in 0..=n {
        let u = k as f64 / per_unit.max(1) as f64;
        let (x, y) = chart.param_to_plane(u, 0.0)?;
        writeln!(w, "{},{x},{y},{}", fam.arc_length(u)?, fam.curvature(u)?)?;
    }
    Ok(())
}

/// Planar field on an `n × n` grid over `[x0, x1] × [y0, y1]`.
pub fn write_field_grid<W: Write>(w: &mut W, fs: &FieldSpec, rect: [f64; 4], n: usize) -> Result<(), Error> {
    let [x0, x1, y0, y1] = rect;
    let n = n.max(2);
    writeln!(w, "{FIELD_HEADER}")?;
    for a in 0..n {
        let y = y0 + (y1 - y0) * a as f64 / (n - 1) as f64;
        for b in 0..n {
            let x = x0 + (x1 - x0) * b as f64 / (n - 1) as f64;
            let v = fs.field_eval_plane(x, y);
            writeln!(w, "{x},{y},{},{}", v[0], v[1])?;
        }
    }
    Ok(())
}

pub fn write_trajectory<W: Write>(w: &mut W, fs: &FieldSpec, band: usize, pts: &[FlowState]) -> Result<(), Error> {
    let fam = fs.chart(band)?.family();
    writeln!(w, "{TRAJECTORY_HEADER}")?;
    for p in pts {
        let l_next = (p.u.floor() + 1.0).max(1.0) as i64;
        writeln!(w, "{},{},{},{},{band},{l_next}", p.t, fam.arc_length(p.u)?, p.rho.sign(), p.rho.ln_abs())?;
    }
    Ok(())
}

pub fn write_events<W: Write>(w: &mut W, events: &[EventRecord]) -> Result<(), Error> {
    writeln!(w, "{EVENTS_HEADER}")?;
    for e in events {
        match &e.class {
            Classification::InsideBox(p) => {
                writeln!(w, "{},{},INSIDE,{},{},{},{}", e.band, e.height, p.q, p.r, p.s, e.t)?
            }
            Classification::Miss => writeln!(w, "{},{},MISS,,,,{}", e.band, e.height, e.t)?,
        }
    }
    Ok(())
}

/// One `band verdict` line.
pub fn verdict_line(band: usize, verdict: &SimulationVerdict) -> String {
    format!("{band} {verdict}")
}

#[derive(Clone, Debug, PartialEq)]
pub struct RobustnessRow {
    pub machine: String,
    pub input: usize,
    pub seed: u64,
    pub verdict: String,
    pub hit: bool,
    pub agrees_with_unperturbed: bool,
}

pub fn write_robustness<W: Write>(w: &mut W, rows: &[RobustnessRow]) -> Result<(), Error> {
    writeln!(w, "{ROBUSTNESS_HEADER}")?;
    for r in rows {
        writeln!(w, "{},{},{},{},{},{}", r.machine, r.input, r.seed, r.verdict, r.hit, r.agrees_with_unperturbed)?;
    }
    Ok(())
}

/// Rows `[x, y, z, ux, uy, uz]` of a 3D field sample.
pub fn write_grid<W: Write>(w: &mut W, rows: &[[f64; 6]]) -> Result<(), Error> {
    writeln!(w, "{GRID_HEADER}")?;
    for r in rows {
        writeln!(w, "{},{},{},{},{},{}", r[0], r[1], r[2], r[3], r[4], r[5])?;
    }
    Ok(())
}

pub fn write_sphere_orbit<W: Write>(w: &mut W, its: &[Iterate]) -> Result<(), Error> {
    writeln!(w, "{SPHERE_HEADER}")?;
    for it in its {
        let p = it.on_sphere();
        writeln!(w, "{},{},{},{},{}", it.n, it.t, p[0], p[1], p[2])?;
    }
    Ok(())
}

pub fn write_shadow<W: Write>(w: &mut W, its: &[Iterate]) -> Result<(), Error> {
    writeln!(w, "{SHADOW_HEADER}")?;
    for it in its {
        writeln!(w, "{},{},{}", it.n, it.x, it.y)?;
    }
    Ok(())
}

/// Checks that every line of a CSV text has as many fields as its header,
/// and that the header is `expected`.
pub fn check_schema(text: &str, expected: &str) -> Result<usize, Error> {
    let mut lines = text.lines();
    let head = lines.next().ok_or_else(|| Error::Config("empty table".into()))?;
    if head != expected {
        return Err(Error::Config(format!("header `{head}` is not `{expected}`")));
    }
    let width = expected.split(',').count();
    let mut rows = 0;
    for (k, line) in lines.enumerate() {
        if line.split(',').count() != width {
            return Err(Error::Config(format!("row {} has the wrong number of fields", k + 1)));
        }
        rows += 1;
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldParams;
    use crate::flow::{simulate_input, HaltingSetSpec, IntegratorConfig, Unperturbed};
    use crate::machine::{presets, Configuration};

    fn small() -> FieldSpec {
        let p = FieldParams { inputs: 2, heights: 4, ..FieldParams::default() };
        FieldSpec::compile(&presets::countdown(), &p).unwrap()
    }

    #[test]
    fn tables_match_schemas() {
        let fs = small();
        let mut buf = Vec::new();
        write_curve(&mut buf, &fs, 1, 50).unwrap();
        let n = check_schema(std::str::from_utf8(&buf).unwrap(), CURVE_HEADER).unwrap();
        assert!(n > 150);

        let mut buf = Vec::new();
        write_field_grid(&mut buf, &fs, [-0.5, 0.5, 0.0, 1.0], 5).unwrap();
        assert_eq!(check_schema(std::str::from_utf8(&buf).unwrap(), FIELD_HEADER).unwrap(), 25);

        let cfg = IntegratorConfig { lmax: 3, record_trajectory: true, ..IntegratorConfig::default() };
        let target = HaltingSetSpec::around(&Configuration::blank(fs.machine().halt()), 1);
        let out = simulate_input(&fs, 1, &target, &Unperturbed, &cfg).unwrap();
        let mut buf = Vec::new();
        write_trajectory(&mut buf, &fs, 1, &out.trajectory).unwrap();
        assert!(check_schema(std::str::from_utf8(&buf).unwrap(), TRAJECTORY_HEADER).unwrap() > 0);
        let mut buf = Vec::new();
        write_events(&mut buf, &out.events).unwrap();
        assert_eq!(check_schema(std::str::from_utf8(&buf).unwrap(), EVENTS_HEADER).unwrap(), out.events.len());
    }

    #[test]
    fn schema_check_rejects_ragged_rows() {
        assert!(check_schema("a,b\n1,2\n3\n", "a,b").is_err());
        assert!(check_schema("a,c\n", "a,b").is_err());
        assert_eq!(check_schema("a,b\n1,2\n", "a,b").unwrap(), 1);
    }
}
