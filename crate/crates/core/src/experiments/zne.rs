//! Zero-noise extrapolation fits: exponential `a b^r + c` and a natural
//! cubic interpolating spline, both extrapolated to the zero-noise point
//! `r = 0`.

use serde::Serialize;

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ExpFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub extrapolated: f64,
    pub sse: f64,
}

/// Least-squares fit of `y = a b^x + c` over a decay-rate grid with golden
/// refinement; for fixed `b` the model is linear in `(a, c)`.
pub fn fit_exponential(xs: &[f64], ys: &[f64]) -> Result<ExpFit> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(Error::FitFailed("need at least 3 points".into()));
    }
    let spread = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - ys.iter().cloned().fold(f64::INFINITY, f64::min);
    if spread < 1e-13 {
        // flat data: the extrapolation is the common value
        return Ok(ExpFit {
            a: 0.0,
            b: 1.0,
            c: ys[0],
            extrapolated: ys[0],
            sse: 0.0,
        });
    }

    let sse_for = |b: f64| -> Option<(f64, f64, f64)> {
        // linear LS in (a, c): columns (b^x, 1)
        let (mut s_pp, mut s_p1, mut s_11) = (0.0, 0.0, 0.0);
        let (mut s_py, mut s_1y) = (0.0, 0.0);
        for (&x, &y) in xs.iter().zip(ys) {
            let p = b.powf(x);
            s_pp += p * p;
            s_p1 += p;
            s_11 += 1.0;
            s_py += p * y;
            s_1y += y;
        }
        let det = s_pp * s_11 - s_p1 * s_p1;
        // b -> 1 makes the columns collinear and the extrapolation explode
        if det < 1e-10 * s_pp * s_11 {
            return None;
        }
        let a = (s_py * s_11 - s_p1 * s_1y) / det;
        let c = (s_pp * s_1y - s_p1 * s_py) / det;
        let sse: f64 = xs
            .iter()
            .zip(ys)
            .map(|(&x, &y)| {
                let r = a * b.powf(x) + c - y;
                r * r
            })
            .sum();
        Some((a, c, sse))
    };

    // decay family only: b in (0, 1); attenuation cannot grow with scale
    let grid: Vec<f64> = (1..400).map(|k| 0.0025 * k as f64).collect();
    let mut best: Option<(f64, f64, f64, f64)> = None;
    for &b in &grid {
        if let Some((a, c, sse)) = sse_for(b) {
            if best.map_or(true, |(_, _, _, s)| sse < s) {
                best = Some((b, a, c, sse));
            }
        }
    }
    let (b0, _, _, _) = best.ok_or_else(|| Error::FitFailed("degenerate design matrix".into()))?;

    // golden-section refinement around the best grid cell
    let (mut lo, mut hi) = ((b0 - 0.0025).max(1e-6), (b0 + 0.0025).min(0.999));
    let phi = (5.0f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let m1 = hi - phi * (hi - lo);
        let m2 = lo + phi * (hi - lo);
        let s1 = sse_for(m1).map(|t| t.2).unwrap_or(f64::INFINITY);
        let s2 = sse_for(m2).map(|t| t.2).unwrap_or(f64::INFINITY);
        if s1 <= s2 {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let b = 0.5 * (lo + hi);
    let (a, c, sse) = sse_for(b).ok_or_else(|| Error::FitFailed("refinement collapsed".into()))?;
    Ok(ExpFit {
        a,
        b,
        c,
        extrapolated: a + c, // b^0 = 1
        sse,
    })
}

/// Natural cubic interpolating spline through `(xs, ys)`, evaluated at `x`.
/// Outside the knot range the boundary cubic is extended.
pub fn natural_cubic_spline_eval(xs: &[f64], ys: &[f64], x: f64) -> Result<f64> {
    let n = xs.len();
    if n != ys.len() || n < 3 {
        return Err(Error::FitFailed("need at least 3 points".into()));
    }
    for w in xs.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::FitFailed("knots must be strictly increasing".into()));
        }
    }
    // Solve for second derivatives m[1..n-1]; natural ends m[0]=m[n-1]=0.
    let mut m = vec![0.0f64; n];
    if n > 2 {
        let sys = n - 2;
        let mut diag = vec![0.0f64; sys];
        let mut upper = vec![0.0f64; sys];
        let mut rhs = vec![0.0f64; sys];
        for i in 0..sys {
            let h0 = xs[i + 1] - xs[i];
            let h1 = xs[i + 2] - xs[i + 1];
            diag[i] = 2.0 * (h0 + h1);
            upper[i] = h1;
            rhs[i] = 6.0 * ((ys[i + 2] - ys[i + 1]) / h1 - (ys[i + 1] - ys[i]) / h0);
        }
        // Thomas algorithm (lower diagonal mirrors `upper` of the previous row).
        for i in 1..sys {
            let h0 = xs[i + 1] - xs[i];
            let w = h0 / diag[i - 1];
            diag[i] -= w * upper[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        m[sys] = rhs[sys - 1] / diag[sys - 1];
        for i in (1..sys).rev() {
            m[i] = (rhs[i - 1] - upper[i - 1] * m[i + 1]) / diag[i - 1];
        }
    }

    // locate the segment (clamped to the boundary pieces for extrapolation)
    let seg = if x <= xs[0] {
        0
    } else if x >= xs[n - 1] {
        n - 2
    } else {
        xs.windows(2).position(|w| x >= w[0] && x <= w[1]).unwrap()
    };
    let h = xs[seg + 1] - xs[seg];
    let d0 = xs[seg + 1] - x;
    let d1 = x - xs[seg];
    let v = m[seg] * d0.powi(3) / (6.0 * h)
        + m[seg + 1] * d1.powi(3) / (6.0 * h)
        + (ys[seg] / h - m[seg] * h / 6.0) * d0
        + (ys[seg + 1] / h - m[seg + 1] * h / 6.0) * d1;
    Ok(v)
}

/// Convenience: both extrapolations on one dataset.
pub fn extrapolate_both(xs: &[f64], ys: &[f64]) -> (Result<ExpFit>, Result<f64>) {
    (
        fit_exponential(xs, ys),
        natural_cubic_spline_eval(xs, ys, 0.0),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_fit_recovers_planted_model() {
        let (a, b, c) = (0.8f64, 0.6f64, 0.15f64);
        let xs: Vec<f64> = (1..=5).map(|r| r as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| a * b.powf(x) + c).collect();
        let fit = fit_exponential(&xs, &ys).unwrap();
        assert!((fit.b - b).abs() < 1e-4, "b {}", fit.b);
        assert!((fit.extrapolated - (a + c)).abs() < 1e-4);
        assert!(fit.sse < 1e-10);
    }

    #[test]
    fn exponential_fit_flat_data_returns_common_value() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [0.42; 4];
        let fit = fit_exponential(&xs, &ys).unwrap();
        assert_eq!(fit.extrapolated, 0.42);
    }

    #[test]
    fn spline_interpolates_and_extrapolates() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
        // exactly cubic-friendly data: a straight line
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        for (&x, &y) in xs.iter().zip(&ys) {
            assert!((natural_cubic_spline_eval(&xs, &ys, x).unwrap() - y).abs() < 1e-10);
        }
        // a line extrapolates exactly (all second derivatives vanish)
        assert!((natural_cubic_spline_eval(&xs, &ys, 0.0).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn spline_matches_quadratic_near_data() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
        let ys: Vec<f64> = xs.iter().map(|x| 0.3 * x * x - x + 2.0).collect();
        // interior interpolation is exact at the knots
        for (&x, &y) in xs.iter().zip(&ys) {
            assert!((natural_cubic_spline_eval(&xs, &ys, x).unwrap() - y).abs() < 1e-10);
        }
    }
}
