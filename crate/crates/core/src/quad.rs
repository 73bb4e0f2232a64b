//! Gauss–Kronrod (7, 15) quadrature.

use crate::error::QuadError;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];

// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, center).
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_64, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// One G7/K15 panel: `(kronrod, |kronrod - gauss|)`.
pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive bisection on G7/K15 panels until the summed error estimate is
/// below `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<(f64, f64), QuadError> {
    const MAX_PANELS: usize = 20_000;
    if a == b {
        return Ok((0.0, 0.0));
    }
    let mut panels = vec![(a, b, gk15(&f, a, b))];
    loop {
        let err: f64 = panels.iter().map(|p| p.2 .1).sum();
        if err <= tol {
            let val = panels.iter().map(|p| p.2 .0).sum();
            return Ok((val, err));
        }
        if panels.len() >= MAX_PANELS {
            return Err(QuadError::NoConvergence { a, b, err, tol });
        }
        let (idx, _) = panels.iter().enumerate().max_by(|x, y| x.1 .2 .1.total_cmp(&y.1 .2 .1)).expect("non-empty");
        let (pa, pb, _) = panels.swap_remove(idx);
        let m = 0.5 * (pa + pb);
        if m <= pa || m >= pb {
            return Err(QuadError::NoConvergence { a, b, err, tol });
        }
        panels.push((pa, m, gk15(&f, pa, m)));
        panels.push((m, pb, gk15(&f, m, pb)));
    }
}

/// Composite K15 rule on `n` equal panels. Smooth in the endpoints, which
/// keeps finite differences of the result clean.
pub fn composite<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    (0..n)
        .map(|k| {
            let lo = a + h * k as f64;
            gk15(&f, lo, lo + h).0
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let (v, _) = gk15(&|x: f64| x.powi(10), 0.0, 1.0);
        assert!((v - 1.0 / 11.0).abs() < 1e-15);
    }

    #[test]
    fn adaptive_peaked() {
        let (v, e) = integrate(|x: f64| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-12).unwrap();
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!((v - exact).abs() < 1e-9 * exact, "{v} vs {exact}, err {e}");
    }

    #[test]
    fn composite_matches_sin() {
        let v = composite(f64::sin, 0.0, std::f64::consts::PI, 4);
        assert!((v - 2.0).abs() < 1e-14);
    }
}
