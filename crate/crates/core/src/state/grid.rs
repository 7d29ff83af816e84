use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::PhotonCount;
use crate::error::{invalid, Error, Result};

/// Tolerance for the grid symmetry and normalization invariants.
pub const GRID_TOLERANCE: f64 = 1e-9;

/// Largest photon number a lattice state may carry.
pub const GRID_MAX_N: usize = 3;

/// Amplitudes on the lattice `x_min + i * dx` per axis, stored row-major
/// with axis 0 slowest. Normalized as `sum |psi|^2 dx^n = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridState {
    n: PhotonCount,
    x_min: f64,
    dx: f64,
    points: usize,
    amplitudes: Vec<C64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct GridDoc {
    x_min: f64,
    dx: f64,
    points: usize,
    /// Row-major `[re, im]` pairs.
    values: Vec<C64>,
}

impl GridState {
    /// Validates symmetry and normalization.
    pub fn new(n: PhotonCount, x_min: f64, dx: f64, points: usize, amplitudes: Vec<C64>) -> Result<Self> {
        let g = Self::unchecked(n, x_min, dx, points, amplitudes)?;
        g.validate()?;
        Ok(g)
    }

    /// Rescales to unit norm, then validates.
    pub fn normalized(n: PhotonCount, x_min: f64, dx: f64, points: usize, amplitudes: Vec<C64>) -> Result<Self> {
        let mut g = Self::unchecked(n, x_min, dx, points, amplitudes)?;
        let norm = g.norm();
        if !(norm > 0.0) {
            return Err(Error::ZeroEnvelope(norm));
        }
        let scale = norm.sqrt().recip();
        g.amplitudes.iter_mut().for_each(|a| *a *= scale);
        g.validate()?;
        Ok(g)
    }

    fn unchecked(n: PhotonCount, x_min: f64, dx: f64, points: usize, amplitudes: Vec<C64>) -> Result<Self> {
        if n.get() > GRID_MAX_N {
            return Err(invalid(format!("grid states support n <= {GRID_MAX_N}, got {}", n.get())));
        }
        if !(dx.is_finite() && dx > 0.0) || !x_min.is_finite() {
            return Err(invalid(format!("grid spacing must be > 0, got {dx}")));
        }
        if points < 2 {
            return Err(invalid("grid needs at least 2 points per axis"));
        }
        let expected = points.pow(n.get() as u32);
        if amplitudes.len() != expected {
            return Err(Error::DimensionMismatch { expected, got: amplitudes.len() });
        }
        Ok(Self { n, x_min, dx, points, amplitudes })
    }

    pub fn validate(&self) -> Result<()> {
        if self.amplitudes.iter().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return Err(invalid("grid amplitudes must be finite"));
        }
        let asym = self.max_asymmetry();
        if asym > GRID_TOLERANCE {
            return Err(invalid(format!("grid amplitudes are not exchange-symmetric (max deviation {asym:e})")));
        }
        let norm = self.norm();
        if (norm - 1.0).abs() > GRID_TOLERANCE {
            return Err(invalid(format!("grid amplitudes are not normalized (norm {norm})")));
        }
        Ok(())
    }

    pub fn n(&self) -> PhotonCount {
        self.n
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx
    }

    pub fn cell_volume(&self) -> f64 {
        self.dx.powi(self.n.get() as i32)
    }

    /// `sum |psi|^2 dx^n`.
    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.cell_volume()
    }

    /// Decodes a flat index into per-axis indices.
    pub fn unflatten(&self, mut flat: usize) -> [usize; GRID_MAX_N] {
        let mut idx = [0; GRID_MAX_N];
        for axis in (0..self.n.get()).rev() {
            idx[axis] = flat % self.points;
            flat /= self.points;
        }
        idx
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.points + i)
    }

    /// Index of the diagonal point `(i, i, ..., i)`.
    pub fn diagonal_index(&self, i: usize) -> usize {
        self.flatten(&vec![i; self.n.get()])
    }

    fn max_asymmetry(&self) -> f64 {
        let n = self.n.get();
        if n == 1 {
            return 0.0;
        }
        let perms: &[&[usize]] =
            if n == 2 { &[&[1, 0]] } else { &[&[1, 0, 2], &[0, 2, 1], &[2, 1, 0], &[1, 2, 0], &[2, 0, 1]] };
        (0..self.amplitudes.len())
            .into_par_iter()
            .map(|flat| {
                let idx = self.unflatten(flat);
                let a = self.amplitudes[flat];
                perms
                    .iter()
                    .map(|p| {
                        let permuted: Vec<usize> = p.iter().map(|&axis| idx[axis]).collect();
                        (self.amplitudes[self.flatten(&permuted)] - a).norm()
                    })
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }

    /// Lattice index of `x`, or `None` when `x` is off the lattice.
    pub fn lattice_index(&self, x: f64) -> Option<usize> {
        let t = (x - self.x_min) / self.dx;
        let i = t.round();
        if (t - i).abs() > GRID_TOLERANCE * t.abs().max(1.0) || i < 0.0 || i as usize >= self.points {
            return None;
        }
        Some(i as usize)
    }

    /// Exact lattice query; no interpolation.
    pub fn value_at(&self, x: &[f64]) -> Result<C64> {
        let mut idx = Vec::with_capacity(x.len());
        for &xi in x {
            idx.push(self.lattice_index(xi).ok_or(Error::OutOfGrid { coordinate: xi })?);
        }
        Ok(self.amplitudes[self.flatten(&idx)])
    }

    /// `phi(k) = sum psi(x) exp(-i k.x) dx^n / (2 pi)^(n/2)`.
    pub fn momentum_amplitude(&self, k: &[f64]) -> C64 {
        let n = self.n.get();
        let phases: Vec<Vec<C64>> =
            k.iter().map(|&ki| (0..self.points).map(|i| C64::cis(-ki * self.coord(i))).collect()).collect();
        let sum: C64 = self
            .amplitudes
            .par_iter()
            .enumerate()
            .map(|(flat, a)| {
                let idx = self.unflatten(flat);
                (0..n).fold(*a, |acc, axis| acc * phases[axis][idx[axis]])
            })
            .collect::<Vec<_>>()
            .into_iter()
            .sum();
        sum * self.cell_volume() / (2.0 * PI).powf(n as f64 / 2.0)
    }

    pub(crate) fn from_doc(n: usize, doc: GridDoc) -> Result<Self> {
        Self::new(PhotonCount::new(n)?, doc.x_min, doc.dx, doc.points, doc.values)
    }

    pub(crate) fn to_doc(&self) -> GridDoc {
        GridDoc { x_min: self.x_min, dx: self.dx, points: self.points, values: self.amplitudes.clone() }
    }
}
