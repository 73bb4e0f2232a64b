use crate::error::Error;
use crate::field::FieldSpec;
use crate::flow::FlowState;
use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 800.0;
const PAD: f64 = 40.0;
// boxes narrower than this many pixels are widened so they stay visible
const MIN_BOX_PX: f64 = 3.0;

/// Self-contained SVG of one trajectory over its curve, with the encoded
/// interval boxes `I × (l - ε/2, l + ε/2)` drawn at heights `1..=heights`.
/// An empty trajectory draws the start point and the first box.
pub fn trajectory_svg(fs: &FieldSpec, band: usize, pts: &[FlowState], heights: usize) -> Result<String, Error> {
    let chart = fs.chart(band)?;
    let fam = chart.family();
    let top = heights.max(1).min(fam.budget());
    let eps = fs.eps();

    let mut curve = Vec::new();
    let steps = 40 * (top + 1);
    for k in 0..=steps {
        let u = -0.25 + (top as f64 + 0.5) * k as f64 / steps as f64;
        curve.push(chart.param_to_plane(u.min(fam.u_max()), 0.0)?);
    }
    let mut path = Vec::new();
    for p in pts {
        path.push(chart.param_to_plane(p.u, p.rho.to_f64())?);
    }
    if path.is_empty() {
        path.push(chart.param_to_plane(0.0, 0.0)?);
    }
    let boxes: Vec<(f64, f64, f64)> =
        (1..=top).filter_map(|l| fam.point(l).map(|p| (p.center(band), p.ln_half_width().value(), l as f64))).collect();

    let xs = curve.iter().chain(&path).map(|p| p.0).chain(boxes.iter().flat_map(|b| [b.0 - b.1, b.0 + b.1]));
    let (mut x0, mut x1) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if x1 - x0 < 1e-3 {
        x0 -= 0.05;
        x1 += 0.05;
    }
    let (y0, y1) = (-0.25, top as f64 + 0.5);
    let sx = (W - 2.0 * PAD) / (x1 - x0);
    let sy = (H - 2.0 * PAD) / (y1 - y0);
    let px = |x: f64| PAD + (x - x0) * sx;
    let py = |y: f64| H - PAD - (y - y0) * sy;

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{PAD}" y="20" font-family="monospace" font-size="12">{} band {band}, x in [{x0:.4}, {x1:.4}]</text>"#,
        fs.machine().name
    );
    for &(c, hw, l) in &boxes {
        let w = (2.0 * hw * sx).max(MIN_BOX_PX);
        let _ = writeln!(
            s,
            r#"<rect class="box" x="{:.3}" y="{:.3}" width="{w:.3}" height="{:.3}" fill="none" stroke="crimson"/>"#,
            px(c) - w / 2.0,
            py(l + eps / 2.0),
            eps * sy
        );
    }
    let _ = writeln!(s, r#"<polyline class="curve" fill="none" stroke="grey" points="{}"/>"#, points(&curve, &px, &py));
    let _ = writeln!(
        s,
        r#"<polyline class="trajectory" fill="none" stroke="navy" stroke-width="1.5" points="{}"/>"#,
        points(&path, &px, &py)
    );
    let (a, b) = path[0];
    let _ = writeln!(s, r#"<circle class="start" cx="{:.3}" cy="{:.3}" r="4" fill="navy"/>"#, px(a), py(b));
    s.push_str("</svg>\n");
    Ok(s)
}

fn points(p: &[(f64, f64)], px: &dyn Fn(f64) -> f64, py: &dyn Fn(f64) -> f64) -> String {
    p.iter().map(|&(x, y)| format!("{:.3},{:.3}", px(x), py(y))).collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldParams;
    use crate::machine::presets;

    #[test]
    fn empty_trajectory_has_start_and_first_box() {
        let p = FieldParams { inputs: 1, heights: 2, ..FieldParams::default() };
        let fs = FieldSpec::compile(&presets::instant(), &p).unwrap();
        let svg = trajectory_svg(&fs, 0, &[], 0).unwrap();
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches(r#"class="box""#).count(), 1);
        assert_eq!(svg.matches(r#"class="start""#).count(), 1);
    }
}
