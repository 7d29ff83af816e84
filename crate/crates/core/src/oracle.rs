//! Brute-force reference values on dense lattices for `n <= 3`.
//!
//! Nothing here calls the analytic evaluation paths: envelopes are evaluated
//! from their parameters, transforms are explicit k-quadratures, and every
//! observable is a trapezoid sum over the lattice.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::observables::{
    conditional_width, marginal_width, relative_spread_with, total_absorption_rate, MonteCarloConfig,
};
use crate::soliton::uql_convergence_metric;
use crate::state::{GridState, PhotonCount, SolitonParams, SpectralEnvelope, StateSpec};

pub const MIN_AXIS_POINTS: usize = 64;
pub const MAX_CELLS: usize = 1 << 27;
pub const MAX_TAIL: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, points: usize) -> Result<Self> {
        let g = Self { x_min, x_max, points };
        g.validate(1)?;
        Ok(g)
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.x_min.is_finite() && self.x_max.is_finite() && self.x_max > self.x_min) {
            return Err(invalid(format!("oracle grid [{}, {}] is empty", self.x_min, self.x_max)));
        }
        if self.points < MIN_AXIS_POINTS {
            return Err(invalid(format!("oracle grid needs >= {MIN_AXIS_POINTS} points per axis")));
        }
        let cells = (self.points as u128).pow(n as u32);
        if cells > MAX_CELLS as u128 {
            return Err(invalid(format!("oracle grid has {cells} cells, above the limit of {MAX_CELLS}")));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.points - 1) as f64
    }

    fn coord(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }
}

/// Sum in a fixed binary-tree order.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 32 {
        let mut s = 0.0;
        for x in v {
            s += x;
        }
        return s;
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

const CHUNK: usize = 1 << 12;

/// `sum_{i < len} f(i)`, parallel over fixed chunks and reduced pairwise so
/// the result does not depend on the thread count.
fn det_sum<F: Fn(usize) -> f64 + Sync>(len: usize, f: F) -> f64 {
    let partials: Vec<f64> = (0..len.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let local: Vec<f64> = (c * CHUNK..((c + 1) * CHUNK).min(len)).map(&f).collect();
            pairwise_sum(&local)
        })
        .collect();
    pairwise_sum(&partials)
}

fn trap_weight(i: usize, points: usize) -> f64 {
    if i == 0 || i + 1 == points {
        0.5
    } else {
        1.0
    }
}

/// `G(k)` from the envelope parameters.
fn envelope_at(env: &SpectralEnvelope, k: f64) -> Result<C64> {
    match env {
        SpectralEnvelope::Gaussian { kappa, chirp } => {
            let amp = (PI * kappa * kappa).powf(-0.25) * (-k * k / (2.0 * kappa * kappa)).exp();
            Ok(C64::from_polar(amp, chirp * k * k))
        }
        SpectralEnvelope::Sampled(_) | SpectralEnvelope::DualDelta { .. } => {
            Err(invalid("pointwise oracle evaluation is only defined for Gaussian envelopes"))
        }
    }
}

/// Quadrature nodes `(k, weight * G(k))` for `int dk G(k) ...`, with an
/// extra phase `exp(i extra_chirp k^2)`.
fn envelope_nodes(env: &SpectralEnvelope, extra_chirp: f64, max_y: f64) -> Result<Vec<(f64, C64)>> {
    let raw: Vec<(f64, C64)> = match env {
        SpectralEnvelope::Gaussian { kappa, chirp } => {
            let half = 12.0 * kappa;
            // resolve exp(i k y) out to |y| = max_y and the chirp phase
            let max_rate = max_y + 2.0 * (chirp + extra_chirp).abs() * half;
            let points = ((2.0 * half * max_rate / (2.0 * PI)) * 16.0).ceil().max(2049.0) as usize | 1;
            let dk = 2.0 * half / (points - 1) as f64;
            (0..points)
                .map(|j| {
                    let k = -half + j as f64 * dk;
                    envelope_at(env, k).map(|g| (k, g * trap_weight(j, points) * dk))
                })
                .collect::<Result<_>>()?
        }
        SpectralEnvelope::Sampled(s) => {
            let len = s.values.len();
            s.values
                .iter()
                .enumerate()
                .map(|(j, v)| {
                    let k = s.k_min + j as f64 * s.dk;
                    (k, v * trap_weight(j, len) * s.dk)
                })
                .collect()
        }
        SpectralEnvelope::DualDelta { .. } => return Err(Error::DistributionalState),
    };
    Ok(raw.into_iter().map(|(k, w)| (k, w * C64::cis(extra_chirp * k * k))).collect())
}

/// `int dk/sqrt(2 pi) G(k) exp(i extra k^2) exp(i k y)` at each `y`.
fn transform_at(nodes: &[(f64, C64)], ys: &[f64]) -> Vec<C64> {
    let norm = (2.0 * PI).sqrt().recip();
    ys.par_iter()
        .map(|&y| {
            let mut re = Vec::with_capacity(nodes.len());
            let mut im = Vec::with_capacity(nodes.len());
            for (k, w) in nodes {
                let v = w * C64::cis(k * y);
                re.push(v.re);
                im.push(v.im);
            }
            C64::new(pairwise_sum(&re), pairwise_sum(&im)) * norm
        })
        .collect()
}

/// Lattice state with the power that fell outside the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Rasterized {
    pub state: GridState,
    pub tail: f64,
}

pub fn rasterize(state: &StateSpec, grid: &GridSpec) -> Result<Rasterized> {
    let n = state.n().get();
    if n > 3 {
        return Err(invalid(format!("oracle supports n <= 3, got {n}")));
    }
    grid.validate(n)?;
    let p = grid.points;
    let dx = grid.dx();
    let xs: Vec<f64> = (0..p).map(|i| grid.coord(i)).collect();
    let cells = p.pow(n as u32);
    let index = |mut flat: usize| -> [usize; 3] {
        let mut idx = [0; 3];
        for axis in (0..n).rev() {
            idx[axis] = flat % p;
            flat /= p;
        }
        idx
    };
    let amplitudes: Vec<C64> = match state {
        StateSpec::Grid(g) => return Ok(Rasterized { state: g.clone(), tail: 0.0 }),
        StateSpec::Coincident { .. } => {
            return Err(Error::UnsupportedVariant { op: "rasterize", variant: state.variant() })
        }
        StateSpec::Product { envelope, .. } => {
            let max_y = grid.x_min.abs().max(grid.x_max.abs());
            let f = transform_at(&envelope_nodes(envelope, 0.0, max_y)?, &xs);
            (0..cells)
                .into_par_iter()
                .map(|flat| {
                    let idx = index(flat);
                    idx[..n].iter().fold(C64::new(1.0, 0.0), |acc, &i| acc * f[i])
                })
                .collect()
        }
        StateSpec::Soliton { envelope, params, .. } => soliton_lattice(n, envelope, params, grid, &xs)?,
    };
    let norm = lattice_integral(p, n, dx, |idx| amplitudes[idx.iter().fold(0, |acc, &i| acc * p + i)].norm_sqr());
    let tail = 1.0 - norm;
    if tail > MAX_TAIL {
        return Err(Error::TailTooHeavy { tail });
    }
    let count = PhotonCount::new(n)?;
    let state = GridState::normalized(count, grid.x_min, dx, p, amplitudes)?;
    Ok(Rasterized { state, tail: tail.max(0.0) })
}

fn soliton_lattice(
    n: usize,
    envelope: &SpectralEnvelope,
    params: &SolitonParams,
    grid: &GridSpec,
    xs: &[f64],
) -> Result<Vec<C64>> {
    let p = grid.points;
    let nf = n as f64;
    let r = params.ratio.abs();
    let factorial: f64 = (1..n).map(|k| k as f64).product();
    let c = (factorial * r.powi(n as i32 - 1) / (2.0 * PI)).sqrt();
    // X = x_min + s dx / n for index sums s = 0 .. n (p - 1)
    let sums = n * (p - 1) + 1;
    let ys: Vec<f64> = (0..sums).map(|s| nf * grid.x_min + s as f64 * grid.dx()).collect();
    let max_y = ys.iter().fold(0.0f64, |m, y| m.max(y.abs()));
    let com = transform_at(&envelope_nodes(envelope, -nf * params.b_integral, max_y)?, &ys);
    let scale = c * (2.0 * PI).sqrt();
    let cells = p.pow(n as u32);
    Ok((0..cells)
        .into_par_iter()
        .map(|mut flat| {
            let mut idx = [0usize; 3];
            for axis in (0..n).rev() {
                idx[axis] = flat % p;
                flat /= p;
            }
            let mut pair = 0.0;
            for i in 0..n {
                for j in i + 1..n {
                    pair += (xs[idx[i]] - xs[idx[j]]).abs();
                }
            }
            let s: usize = idx[..n].iter().sum();
            com[s] * (scale * (-0.5 * r * pair).exp())
        })
        .collect())
}

/// Default lattice: eleven center-of-mass RMS widths per axis, plus the
/// relative-coordinate reach for solitons.
pub fn default_grid(state: &StateSpec) -> Result<GridSpec> {
    let n = state.n().get();
    let points = if n <= 2 { 513 } else { 193 };
    let reach = 8.0 * 2f64.sqrt();
    let half = match state {
        StateSpec::Product { envelope, .. } => reach * axis_sigma(envelope, 0.0)?,
        StateSpec::Soliton { envelope, params, .. } => {
            let nf = n as f64;
            let com = axis_sigma(envelope, -nf * params.b_integral)? / nf;
            // relative tails fall off as exp(-n r |xi|)
            reach * com + 12.0 / (nf * params.ratio.abs())
        }
        StateSpec::Grid(g) => {
            let lo = g.x_min();
            return GridSpec::new(lo, lo + g.dx() * (g.points() - 1) as f64, g.points().max(MIN_AXIS_POINTS));
        }
        StateSpec::Coincident { .. } => {
            return Err(Error::UnsupportedVariant { op: "rasterize", variant: state.variant() })
        }
    };
    GridSpec::new(-half, half, points)
}

/// RMS of `|g(y)|^2` for the chirped envelope, by quadrature on a wide grid.
fn axis_sigma(env: &SpectralEnvelope, extra_chirp: f64) -> Result<f64> {
    let reach = match env {
        SpectralEnvelope::Gaussian { kappa, chirp } => {
            let c = chirp + extra_chirp;
            20.0 * (0.5 / (kappa * kappa) + 2.0 * kappa * kappa * c * c).sqrt()
        }
        SpectralEnvelope::Sampled(s) => PI / s.dk,
        SpectralEnvelope::DualDelta { .. } => return Err(Error::DistributionalState),
    };
    let ys: Vec<f64> = (0..4097).map(|i| -reach + 2.0 * reach * i as f64 / 4096.0).collect();
    let g = transform_at(&envelope_nodes(env, extra_chirp, reach)?, &ys);
    let d: Vec<f64> = g.iter().map(|v| v.norm_sqr()).collect();
    let mass = pairwise_sum(&d);
    let mean = pairwise_sum(&d.iter().zip(&ys).map(|(a, y)| a * y).collect::<Vec<_>>()) / mass;
    let var = pairwise_sum(&d.iter().zip(&ys).map(|(a, y)| a * (y - mean).powi(2)).collect::<Vec<_>>()) / mass;
    Ok(var.sqrt())
}

fn lattice_index(points: usize, n: usize, mut flat: usize) -> [usize; 3] {
    let mut idx = [0; 3];
    for axis in (0..n).rev() {
        idx[axis] = flat % points;
        flat /= points;
    }
    idx
}

/// Trapezoid sum of `f` over the sublattice of every `stride`-th node.
fn strided_sum<F>(points: usize, n: usize, h: f64, stride: usize, f: &F) -> f64
where
    F: Fn(&[usize]) -> f64 + Sync,
{
    let sub = (points - 1) / stride + 1;
    let total = sub.pow(n as u32);
    det_sum(total, |flat| {
        let coarse = lattice_index(sub, n, flat);
        let mut idx = [0usize; 3];
        let mut w = 1.0;
        for axis in 0..n {
            idx[axis] = coarse[axis] * stride;
            w *= trap_weight(coarse[axis], sub);
        }
        w * f(&idx[..n])
    }) * (stride as f64 * h).powi(n as i32)
}

/// Trapezoid sum with one Richardson step against the stride-2 sublattice.
///
/// Kinks of the integrand lie on lattice diagonals, which are nodes of
/// both lattices, so the error expands in even powers of the spacing.
fn lattice_integral<F>(points: usize, n: usize, h: f64, f: F) -> f64
where
    F: Fn(&[usize]) -> f64 + Sync,
{
    let fine = strided_sum(points, n, h, 1, &f);
    if !(points - 1).is_multiple_of(2) {
        return fine;
    }
    let coarse = strided_sum(points, n, h, 2, &f);
    (4.0 * fine - coarse) / 3.0
}

fn grid_integral<F>(g: &GridState, f: F) -> f64
where
    F: Fn(&[usize]) -> f64 + Sync,
{
    lattice_integral(g.points(), g.n().get(), g.dx(), f)
}

fn flat_of(g: &GridState, idx: &[usize]) -> usize {
    idx.iter().fold(0, |acc, &i| acc * g.points() + i)
}

/// Mean and variance of `q(x)` under `|psi|^2`.
fn lattice_moments<Q>(g: &GridState, q: Q) -> (f64, f64)
where
    Q: Fn(&[f64]) -> f64 + Sync,
{
    let amps = g.amplitudes();
    let value = |idx: &[usize]| {
        let x: Vec<f64> = idx.iter().map(|&i| g.coord(i)).collect();
        q(&x)
    };
    let density = |idx: &[usize]| amps[flat_of(g, idx)].norm_sqr();
    let mass = grid_integral(g, density);
    let mean = grid_integral(g, |idx| density(idx) * value(idx)) / mass;
    let var = grid_integral(g, |idx| density(idx) * (value(idx) - mean).powi(2)) / mass;
    (mean, var)
}

/// RMS spread of `X = mean(x_i)` over the whole lattice.
pub fn oracle_marginal_width(g: &GridState) -> f64 {
    lattice_moments(g, |x| x.iter().sum::<f64>() / x.len() as f64).1.sqrt()
}

/// RMS spread of `xi_1 = x_1 - X`.
pub fn oracle_relative_width(g: &GridState) -> f64 {
    lattice_moments(g, |x| x[0] - x.iter().sum::<f64>() / x.len() as f64).1.sqrt()
}

/// `|psi(x, ..., x)|^2` along the lattice diagonal.
fn diagonal(g: &GridState) -> Vec<f64> {
    let n = g.n().get();
    let p = g.points();
    let stride: usize = (0..n).map(|a| p.pow(a as u32)).sum();
    (0..p).map(|i| g.amplitudes()[i * stride].norm_sqr()).collect()
}

fn diagonal_integral<F: Fn(usize) -> f64 + Sync>(g: &GridState, f: F) -> f64 {
    lattice_integral(g.points(), 1, g.dx(), |idx| f(idx[0]))
}

/// Normalized diagonal profile `(x, |psi(x, ..., x)|^2 / rate)`.
pub fn oracle_pattern(g: &GridState) -> Result<(Vec<f64>, Vec<f64>)> {
    let d = diagonal(g);
    let mass = diagonal_integral(g, |i| d[i]);
    if !(mass > 0.0) {
        return Err(Error::ZeroSlice);
    }
    Ok(((0..g.points()).map(|i| g.coord(i)).collect(), d.into_iter().map(|v| v / mass).collect()))
}

/// Integral of the diagonal slice of the unit-norm state.
pub fn oracle_rate(g: &GridState) -> Result<f64> {
    let d = diagonal(g);
    let rate = diagonal_integral(g, |i| d[i]);
    if !(rate > 0.0) {
        return Err(Error::ZeroSlice);
    }
    let amps = g.amplitudes();
    let norm = grid_integral(g, |idx| amps[flat_of(g, idx)].norm_sqr());
    Ok(rate / norm)
}

pub fn oracle_conditional_width(g: &GridState) -> Result<f64> {
    let d = diagonal(g);
    let mass = diagonal_integral(g, |i| d[i]);
    if !(mass > 0.0) {
        return Err(Error::ZeroSlice);
    }
    let mean = diagonal_integral(g, |i| d[i] * g.coord(i)) / mass;
    Ok((diagonal_integral(g, |i| d[i] * (g.coord(i) - mean).powi(2)) / mass).sqrt())
}

/// Variance of photon 1's momentum from cell differences along axis 0.
///
/// Each difference spans one cell, which never straddles a kink, so the
/// cell sums carry the same even-power error expansion as the node sums.
pub fn oracle_photon_momentum_variance(g: &GridState) -> f64 {
    let n = g.n().get();
    let p = g.points();
    let h = g.dx();
    let amps = g.amplitudes();
    let cell_sums = |stride: usize| -> (f64, f64, f64) {
        let sub = (p - 1) / stride + 1;
        let rest = sub.pow(n as u32 - 1);
        let cells = (sub - 1) * rest;
        let term = |flat: usize, which: u8| -> f64 {
            let cell = flat / rest;
            let others = lattice_index(sub, n - 1, flat % rest);
            let mut lo = [0usize; 3];
            lo[0] = cell * stride;
            let mut w = 1.0;
            for axis in 1..n {
                lo[axis] = others[axis - 1] * stride;
                w *= trap_weight(others[axis - 1], sub);
            }
            let mut hi = lo;
            hi[0] += stride;
            let a = amps[flat_of(g, &lo[..n])];
            let b = amps[flat_of(g, &hi[..n])];
            let step = stride as f64 * h;
            match which {
                0 => w * 0.5 * (a.norm_sqr() + b.norm_sqr()),
                1 => w * (a.conj() * b).im / step,
                _ => w * (b - a).norm_sqr() / (step * step),
            }
        };
        let vol = (stride as f64 * h).powi(n as i32);
        (
            det_sum(cells, |f| term(f, 0)) * vol,
            det_sum(cells, |f| term(f, 1)) * vol,
            det_sum(cells, |f| term(f, 2)) * vol,
        )
    };
    let fine = cell_sums(1);
    let (mass, first, second) = if (p - 1).is_multiple_of(2) {
        let coarse = cell_sums(2);
        let r = |a: f64, b: f64| (4.0 * a - b) / 3.0;
        (r(fine.0, coarse.0), r(fine.1, coarse.1), r(fine.2, coarse.2))
    } else {
        fine
    };
    let mean = first / mass;
    second / mass - mean * mean
}

/// Variance of `k` under `|G|^2`, by trapezoid quadrature.
fn envelope_momentum_variance(env: &SpectralEnvelope) -> Result<f64> {
    let (ks, dens): (Vec<f64>, Vec<f64>) = match env {
        SpectralEnvelope::Gaussian { kappa, .. } => {
            let points = 4097;
            let half = 12.0 * kappa;
            (0..points)
                .map(|j| {
                    let k = -half + 2.0 * half * j as f64 / (points - 1) as f64;
                    envelope_at(env, k).map(|g| (k, g.norm_sqr() * trap_weight(j, points)))
                })
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .unzip()
        }
        SpectralEnvelope::Sampled(s) => {
            let len = s.values.len();
            s.values
                .iter()
                .enumerate()
                .map(|(j, v)| (s.k_min + j as f64 * s.dk, v.norm_sqr() * trap_weight(j, len)))
                .unzip()
        }
        SpectralEnvelope::DualDelta { .. } => return Err(Error::DistributionalState),
    };
    let mass = pairwise_sum(&dens);
    let mean = pairwise_sum(&dens.iter().zip(&ks).map(|(a, k)| a * k).collect::<Vec<_>>()) / mass;
    Ok(pairwise_sum(&dens.iter().zip(&ks).map(|(a, k)| a * (k - mean).powi(2)).collect::<Vec<_>>()) / mass)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleComparison {
    pub observable: String,
    pub analytic: f64,
    pub oracle: f64,
    pub abs_err: f64,
    pub rel_err: f64,
    pub pass: bool,
}

impl OracleComparison {
    pub fn new(observable: &str, analytic: f64, oracle: f64, rel_tol: f64) -> Self {
        let abs_err = (analytic - oracle).abs();
        let rel_err = if analytic != 0.0 { abs_err / analytic.abs() } else { abs_err };
        Self { observable: observable.to_string(), analytic, oracle, abs_err, rel_err, pass: rel_err <= rel_tol }
    }
}

pub const DEFAULT_REL_TOL: f64 = 1e-3;

/// Compares every analytic observable the state supports with its lattice
/// value.
pub fn compare(
    state: &StateSpec,
    grid: Option<GridSpec>,
    mc: &MonteCarloConfig,
    rel_tol: f64,
) -> Result<Vec<OracleComparison>> {
    let grid = match grid {
        Some(g) => g,
        None => default_grid(state)?,
    };
    let lattice = rasterize(state, &grid)?.state;
    let n = state.n().get();
    let mut out = vec![
        OracleComparison::new("marginal_width", marginal_width(state)?, oracle_marginal_width(&lattice), rel_tol),
        OracleComparison::new(
            "conditional_width",
            conditional_width(state)?,
            oracle_conditional_width(&lattice)?,
            rel_tol,
        ),
        OracleComparison::new(
            "total_rate",
            total_absorption_rate(state, None)?.total_rate,
            oracle_rate(&lattice)?,
            rel_tol,
        ),
    ];
    if n >= 2 {
        let spread = relative_spread_with(state, mc)?;
        out.push(OracleComparison::new("relative_width", spread.widths[0], oracle_relative_width(&lattice), rel_tol));
    }
    if let StateSpec::Soliton { envelope, params, .. } = state {
        if n == 2 && params.b_integral == 0.0 {
            let var_g = envelope_momentum_variance(envelope)?;
            let var_k = oracle_photon_momentum_variance(&lattice);
            out.push(OracleComparison::new(
                "uql_metric",
                uql_convergence_metric(state)?,
                (var_g / var_k).sqrt(),
                rel_tol,
            ));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_sum_is_exact_on_integers() {
        let v: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 499500.0);
    }

    #[test]
    fn grid_guards() {
        assert!(GridSpec::new(-1.0, 1.0, 32).is_err());
        assert!(GridSpec::new(1.0, 1.0, 64).is_err());
        let big = GridSpec { x_min: -1.0, x_max: 1.0, points: 1024 };
        assert!(big.validate(3).is_err());
        assert!(big.validate(2).is_ok());
    }

    #[test]
    fn coincident_not_rasterized() {
        let c = StateSpec::coincident(2, SpectralEnvelope::gaussian(1.0).unwrap()).unwrap();
        let g = GridSpec::new(-8.0, 8.0, 64).unwrap();
        assert!(matches!(rasterize(&c, &g), Err(Error::UnsupportedVariant { .. })));
    }

    #[test]
    fn narrow_grid_has_heavy_tail() {
        let p = StateSpec::product(2, SpectralEnvelope::gaussian(1.0).unwrap()).unwrap();
        let g = GridSpec::new(-1.0, 1.0, 64).unwrap();
        assert!(matches!(rasterize(&p, &g), Err(Error::TailTooHeavy { .. })));
    }

    #[test]
    fn product_gaussian_reference() {
        let p = StateSpec::product(2, SpectralEnvelope::gaussian(1.0).unwrap()).unwrap();
        let r = rasterize(&p, &GridSpec::new(-8.0, 8.0, 512).unwrap()).unwrap();
        assert!(r.tail < 1e-10);
        assert!((oracle_marginal_width(&r.state) - 0.5).abs() < 1e-4);
        assert!((oracle_conditional_width(&r.state).unwrap() - 0.5).abs() < 1e-4);
    }
}
