//! Extension of a planar gradient field to a Beltrami field on `ℝ³` by a
//! power series in `z`, with exact rational coefficients.

mod fit;
mod poly;
mod series;

pub use fit::{fit_gradient, fit_window_polynomial, FitDifference, Window, WindowFit, WindowFitReport};
pub use poly::{rat, Poly2, Poly2F};
pub use series::{
    assemble_beltrami, cauchy_data, extend_series, lambda_exact, residuals, Offending, PolyVec, ResidualReport,
    SeriesEval, SeriesField3D,
};

use crate::error::Error;
use crate::field::FieldSpec;

/// The input point `(c_i + 2i, 0, 0)`; the plane `z = 0` is invariant, so its
/// orbit is the planar one.
pub fn input_point_3d(fs: &FieldSpec, band: usize) -> Result<[f64; 3], Error> {
    let x = fs.chart(band)?.family().anchor_x(0);
    Ok([x, 0.0, 0.0])
}

/// Full pipeline for a datum `F`: data, series of order `K`, `u`, residuals.
pub fn lift(f: &Poly2, lambda: f64, order: usize) -> Result<(SeriesField3D, SeriesField3D, ResidualReport), Error> {
    let lam = lambda_exact(lambda)?;
    let v = extend_series(&cauchy_data(f, &lam)?, &lam, order)?;
    let u = assemble_beltrami(&v);
    let rep = residuals(&u, &v, f);
    Ok((v, u, rep))
}
