//! Small numerical helpers shared by the analytic paths.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Uniform one-dimensional grid `start + i * step`, `i = 0..points`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    pub start: f64,
    pub step: f64,
    pub points: usize,
}

impl UniformGrid {
    /// Grid with `points` nodes spanning `[start, stop]` inclusive.
    pub fn spanning(start: f64, stop: f64, points: usize) -> Result<Self> {
        if !(start.is_finite() && stop.is_finite()) || stop <= start {
            return Err(invalid(format!("grid bounds [{start}, {stop}] are empty")));
        }
        if points < 2 {
            return Err(invalid("grid needs at least 2 points"));
        }
        Ok(Self { start, step: (stop - start) / (points - 1) as f64, points })
    }

    pub fn with_step(start: f64, step: f64, points: usize) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) || !start.is_finite() {
            return Err(invalid(format!("grid step {step} must be positive")));
        }
        if points < 2 {
            return Err(invalid("grid needs at least 2 points"));
        }
        Ok(Self { start, step, points })
    }

    /// Parses `"min,max,points"`.
    pub fn parse(spec: &str) -> Result<Self> {
        let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(invalid(format!("grid spec {spec:?} is not \"min,max,points\"")));
        }
        let lo: f64 = parts[0].parse().map_err(|_| invalid(format!("bad grid min {:?}", parts[0])))?;
        let hi: f64 = parts[1].parse().map_err(|_| invalid(format!("bad grid max {:?}", parts[1])))?;
        let n: usize = parts[2].parse().map_err(|_| invalid(format!("bad grid points {:?}", parts[2])))?;
        Self::spanning(lo, hi, n)
    }

    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn end(&self) -> f64 {
        self.coord(self.points - 1)
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.coord(i)).collect()
    }

    pub fn trapezoid(&self, values: &[f64]) -> f64 {
        trapezoid(values, self.step)
    }
}

/// Trapezoid rule on uniformly spaced samples.
pub fn trapezoid(values: &[f64], step: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => {
            let inner: f64 = values[1..n - 1].iter().sum();
            step * (inner + 0.5 * (values[0] + values[n - 1]))
        }
    }
}

#[inline]
pub(crate) fn trapezoid_weight(i: usize, len: usize) -> f64 {
    if i == 0 || i + 1 == len {
        0.5
    } else {
        1.0
    }
}

/// Mean and variance of a nonnegative density sampled on a uniform grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Moments {
    pub mass: f64,
    pub mean: f64,
    pub variance: f64,
}

pub fn density_moments(grid: &UniformGrid, density: &[f64]) -> Moments {
    let mass = grid.trapezoid(density);
    let first: Vec<f64> = density.iter().enumerate().map(|(i, d)| d * grid.coord(i)).collect();
    let mean = grid.trapezoid(&first) / mass;
    let second: Vec<f64> = density
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let dx = grid.coord(i) - mean;
            d * dx * dx
        })
        .collect();
    Moments { mass, mean, variance: grid.trapezoid(&second) / mass }
}

/// Adaptive Simpson quadrature of a smooth scalar function.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    if b <= a {
        return 0.0;
    }
    // Pre-split so narrow features are not skipped by the first estimate.
    const PANELS: usize = 16;
    let h = (b - a) / PANELS as f64;
    (0..PANELS)
        .map(|p| {
            let lo = a + p as f64 * h;
            let hi = lo + h;
            let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
            let whole = h / 6.0 * (fa + 4.0 * fm + fb);
            recurse(f, lo, hi, fa, fm, fb, whole, tol / PANELS as f64, 40)
        })
        .sum()
}

/// Shortest round-trip decimal for `v`, optionally rounded to `digits`
/// significant digits first. Very small or large magnitudes use exponent
/// notation.
pub fn format_float(v: f64, digits: usize) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    let v = if digits >= 17 || digits == 0 { v } else { format!("{:.*e}", digits - 1, v).parse().unwrap_or(v) };
    let mag = v.abs();
    if mag != 0.0 && !(1e-5..1e16).contains(&mag) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_of_linear_is_exact() {
        let g = UniformGrid::spanning(0.0, 2.0, 11).unwrap();
        let v: Vec<f64> = g.coords().iter().map(|x| 3.0 * x + 1.0).collect();
        assert!((g.trapezoid(&v) - 8.0).abs() < 1e-14);
    }

    #[test]
    fn grid_parse() {
        let g = UniformGrid::parse("-1, 1, 5").unwrap();
        assert_eq!(g.points, 5);
        assert_eq!(g.step, 0.5);
        assert!(UniformGrid::parse("1,0,5").is_err());
        assert!(UniformGrid::parse("0,1").is_err());
    }

    #[test]
    fn simpson_gaussian() {
        let v = adaptive_simpson(&|x: f64| (-x * x).exp(), -10.0, 10.0, 1e-13);
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn float_format_precision() {
        assert_eq!(format_float(0.1, 17), "0.1");
        assert_eq!(format_float(1.0 / 3.0, 3), "0.333");
        assert_eq!(format_float(2.0, 17), "2");
        assert_eq!(format_float(6.5e-11, 17), "6.5e-11");
        assert_eq!(format_float(1.23456e-9, 2), "1.2e-9");
        assert_eq!(format_float(1e20, 17), "1e20");
    }
}
