//! Displacement and lithographic widths, absorption patterns and rates.
//!
//! The marginal width is the RMS spread of the center of mass `X` over all
//! relative coordinates; the conditional width is the RMS spread of the
//! all-coincident slice `|psi'(X, 0, ..., 0)|^2`. Second moments are taken
//! about the mean, so every width is translation invariant.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numeric::{density_moments, UniformGrid};
use crate::state::{
    soliton_com_envelope, soliton_prefactor, GridState, PhotonCount, SolitonParams, SpectralEnvelope, StateSpec,
    ZERO_POWER,
};

/// `1 / (sqrt(2N) kappa)`: independent photons.
pub fn sql_width(n: PhotonCount, kappa: f64) -> f64 {
    1.0 / ((2.0 * n.as_f64()).sqrt() * kappa)
}

/// `1 / (sqrt(2) N kappa)`: coincident-momentum photons.
pub fn uql_width(n: PhotonCount, kappa: f64) -> f64 {
    1.0 / (2f64.sqrt() * n.as_f64() * kappa)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WidthReport {
    pub n: usize,
    pub marginal: f64,
    pub conditional: f64,
    /// Present when the state's envelope is Gaussian.
    pub sql_ref: Option<f64>,
    pub uql_ref: Option<f64>,
    /// The state factorizes into center-of-mass and relative parts.
    pub separable: bool,
}

pub fn width_report(state: &StateSpec) -> Result<WidthReport> {
    let n = state.n();
    let marginal = marginal_width(state)?;
    let conditional = conditional_width(state)?;
    let kappa = match state.envelope() {
        Some(SpectralEnvelope::Gaussian { kappa, .. }) => Some(*kappa),
        _ => None,
    };
    let separable = match state {
        StateSpec::Product { envelope, .. } => matches!(envelope, SpectralEnvelope::Gaussian { .. }) || n.get() == 1,
        StateSpec::Coincident { .. } | StateSpec::Soliton { .. } => true,
        StateSpec::Grid(_) => false,
    };
    Ok(WidthReport {
        n: n.get(),
        marginal,
        conditional,
        sql_ref: kappa.map(|k| sql_width(n, k)),
        uql_ref: kappa.map(|k| uql_width(n, k)),
        separable,
    })
}

/// RMS center-of-mass spread integrated over relative coordinates.
pub fn marginal_width(state: &StateSpec) -> Result<f64> {
    let n = state.n();
    match state {
        StateSpec::Product { envelope, .. } => {
            let (_, var) = envelope.position_moments()?;
            Ok((var / n.as_f64()).sqrt())
        }
        StateSpec::Coincident { envelope, .. } => {
            let (_, var) = envelope.position_moments()?;
            Ok(var.sqrt() / n.as_f64())
        }
        StateSpec::Soliton { envelope, params, .. } => {
            let (_, var) = soliton_com_envelope(n, envelope, params).position_moments()?;
            Ok(var.sqrt() / n.as_f64())
        }
        StateSpec::Grid(g) => Ok(grid_com_moments(g).1.sqrt()),
    }
}

/// RMS width of the normalized slice `|psi'(X, 0, ..., 0)|^2`.
pub fn conditional_width(state: &StateSpec) -> Result<f64> {
    let n = state.n();
    match state {
        StateSpec::Product { envelope: SpectralEnvelope::Gaussian { .. }, .. } => marginal_width(state),
        StateSpec::Coincident { .. } => marginal_width(state),
        StateSpec::Product { .. } | StateSpec::Soliton { .. } => {
            let grid = slice_grid(state)?;
            let density: Vec<f64> = slice_values(state, &grid)?.iter().map(|v| v.norm_sqr()).collect();
            let m = density_moments(&grid, &density);
            if !(m.mass >= ZERO_POWER) {
                return Err(Error::ZeroSlice);
            }
            Ok(m.variance.sqrt())
        }
        StateSpec::Grid(g) => {
            let grid = UniformGrid { start: g.x_min(), step: g.dx(), points: g.points() };
            let density: Vec<f64> = (0..g.points()).map(|i| g.amplitudes()[g.diagonal_index(i)].norm_sqr()).collect();
            let mass: f64 = density.iter().sum::<f64>() * g.dx();
            if !(mass >= ZERO_POWER) {
                return Err(Error::ZeroSlice);
            }
            let mean = density.iter().enumerate().map(|(i, d)| d * grid.coord(i)).sum::<f64>() * g.dx() / mass;
            let var = density.iter().enumerate().map(|(i, d)| d * (grid.coord(i) - mean).powi(2)).sum::<f64>() * g.dx()
                / mass;
            let _ = n;
            Ok(var.sqrt())
        }
    }
}

/// Mean and variance of `X` under a lattice state (Riemann sums).
fn grid_com_moments(g: &GridState) -> (f64, f64) {
    let n = g.n().get();
    let (mass, m1, m2) = g
        .amplitudes()
        .par_iter()
        .enumerate()
        .map(|(flat, a)| {
            let idx = g.unflatten(flat);
            let com = idx[..n].iter().map(|&i| g.coord(i)).sum::<f64>() / n as f64;
            let p = a.norm_sqr();
            (p, p * com, p * com * com)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((0.0, 0.0, 0.0), |acc, v| (acc.0 + v.0, acc.1 + v.1, acc.2 + v.2));
    let mean = m1 / mass;
    (mean, m2 / mass - mean * mean)
}

const SLICE_POINTS: usize = 4097;
const SLICE_HALF_WIDTH: f64 = 14.0;

/// Quadrature grid centered on the slice, sized from the moment estimate.
fn slice_grid(state: &StateSpec) -> Result<UniformGrid> {
    let n = state.n();
    let (center, sigma) = match state {
        StateSpec::Product { envelope, .. } => {
            let (mean, var) = envelope.position_moments()?;
            (mean, (var / n.as_f64()).sqrt())
        }
        StateSpec::Coincident { envelope, .. } => {
            let (mean, var) = envelope.position_moments()?;
            (mean / n.as_f64(), var.sqrt() / n.as_f64())
        }
        StateSpec::Soliton { envelope, params, .. } => {
            let (mean, var) = soliton_com_envelope(n, envelope, params).position_moments()?;
            (mean / n.as_f64(), var.sqrt() / n.as_f64())
        }
        StateSpec::Grid(g) => {
            return Ok(UniformGrid { start: g.x_min(), step: g.dx(), points: g.points() });
        }
    };
    UniformGrid::spanning(center - SLICE_HALF_WIDTH * sigma, center + SLICE_HALF_WIDTH * sigma, SLICE_POINTS)
}

/// `psi'(X, 0, ..., 0) = psi(X, ..., X)` on `grid`.
pub fn slice_values(state: &StateSpec, grid: &UniformGrid) -> Result<Vec<C64>> {
    let n = state.n();
    let xs = grid.coords();
    match state {
        StateSpec::Product { envelope, .. } => {
            Ok(envelope.transform_many(&xs).into_iter().map(|f| f.powu(n.get() as u32)).collect())
        }
        StateSpec::Coincident { envelope, .. } => {
            let ys: Vec<f64> = xs.iter().map(|x| n.as_f64() * x).collect();
            Ok(envelope.transform_many(&ys))
        }
        StateSpec::Soliton { envelope, params, .. } => {
            let ys: Vec<f64> = xs.iter().map(|x| n.as_f64() * x).collect();
            let c = soliton_prefactor(n, params.ratio) * (2.0 * PI).sqrt();
            Ok(soliton_com_envelope(n, envelope, params).transform_many(&ys).into_iter().map(|g| g * c).collect())
        }
        StateSpec::Grid(g) => xs
            .iter()
            .map(|&x| {
                let i = g.lattice_index(x).ok_or(Error::OutOfGrid { coordinate: x })?;
                Ok(g.amplitudes()[g.diagonal_index(i)])
            })
            .collect(),
    }
}

/// Sampled N-photon absorption profile, normalized to unit trapezoid integral.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternProfile {
    pub x_grid: UniformGrid,
    pub intensity: Vec<f64>,
    pub normalization: String,
}

impl PatternProfile {
    pub const UNIT_INTEGRAL: &'static str = "unit-integral";

    /// Normalizes a nonnegative profile to unit trapezoid integral.
    pub fn from_density(x_grid: UniformGrid, density: Vec<f64>) -> Result<Self> {
        if density.len() != x_grid.points {
            return Err(Error::DimensionMismatch { expected: x_grid.points, got: density.len() });
        }
        let mass = x_grid.trapezoid(&density);
        if !(mass >= ZERO_POWER) {
            return Err(Error::ZeroSlice);
        }
        Ok(Self {
            x_grid,
            intensity: density.into_iter().map(|d| d / mass).collect(),
            normalization: Self::UNIT_INTEGRAL.to_string(),
        })
    }

    pub fn xs(&self) -> Vec<f64> {
        self.x_grid.coords()
    }
}

/// `|psi(x, ..., x)|^2` on `x_grid`.
pub fn absorption_pattern(state: &StateSpec, x_grid: &UniformGrid) -> Result<PatternProfile> {
    let density = slice_values(state, x_grid)?.iter().map(|v| v.norm_sqr()).collect();
    PatternProfile::from_density(*x_grid, density)
}

/// Fringe period of a pattern from the first autocorrelation peak, or
/// `None` when the profile shows no oscillation. Each lag correlates the
/// overlapping segments after removing their own means and scales, which
/// keeps a finite window from biasing the peak.
pub fn fringe_period(profile: &PatternProfile) -> Option<f64> {
    let v = &profile.intensity;
    let len = v.len();
    let corr = |lag: usize| -> f64 {
        let (a, b) = (&v[..len - lag], &v[lag..]);
        let m = a.len() as f64;
        let (ma, mb) = (a.iter().sum::<f64>() / m, b.iter().sum::<f64>() / m);
        let (mut ab, mut aa, mut bb) = (0.0, 0.0, 0.0);
        for (x, y) in a.iter().zip(b) {
            let (dx, dy) = (x - ma, y - mb);
            ab += dx * dy;
            aa += dx * dx;
            bb += dy * dy;
        }
        let scale = (aa * bb).sqrt();
        if scale > 0.0 {
            ab / scale
        } else {
            0.0
        }
    };
    let max_lag = len / 2;
    let mut lag = 1;
    while lag < max_lag && corr(lag) > 0.0 {
        lag += 1;
    }
    if lag >= max_lag {
        return None;
    }
    let mut best = (lag, corr(lag));
    for l in lag..max_lag {
        let c = corr(l);
        if c > best.1 {
            best = (l, c);
        } else if best.1 > 0.0 && c < 0.0 {
            break;
        }
    }
    (best.1 > 0.0).then_some(best.0 as f64 * profile.x_grid.step)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    /// `int |psi'(X, 0, ..., 0)|^2 dX` with `psi` unit-normalized.
    pub total_rate: f64,
    pub reference_rate: Option<f64>,
    pub ratio: Option<f64>,
}

pub fn total_absorption_rate(state: &StateSpec, reference_rate: Option<f64>) -> Result<RateReport> {
    let n = state.n();
    let total_rate = match state {
        StateSpec::Product { envelope, .. } => match envelope {
            SpectralEnvelope::Gaussian { .. } => {
                let (_, var) = envelope.position_moments()?;
                let nf = n.as_f64();
                (2.0 * PI * var).powf((1.0 - nf) / 2.0) / nf.sqrt()
            }
            SpectralEnvelope::DualDelta { .. } => {
                return Err(Error::NonNormalizable("dual-delta product state has periodic photons".into()))
            }
            SpectralEnvelope::Sampled(_) => slice_integral(state)?,
        },
        StateSpec::Coincident { .. } => {
            return Err(Error::NonNormalizable("coincident-momentum state has unbounded relative coordinates".into()))
        }
        StateSpec::Soliton { params, .. } => {
            let c = soliton_prefactor(n, params.ratio);
            2.0 * PI * c * c / n.as_f64()
        }
        StateSpec::Grid(g) => {
            (0..g.points()).map(|i| g.amplitudes()[g.diagonal_index(i)].norm_sqr()).sum::<f64>() * g.dx()
        }
    };
    if !(total_rate >= ZERO_POWER) {
        return Err(Error::ZeroSlice);
    }
    let ratio = reference_rate.filter(|r| *r > 0.0).map(|r| total_rate / r);
    Ok(RateReport { total_rate, reference_rate, ratio })
}

fn slice_integral(state: &StateSpec) -> Result<f64> {
    let grid = slice_grid(state)?;
    let density: Vec<f64> = slice_values(state, &grid)?.iter().map(|v| v.norm_sqr()).collect();
    Ok(grid.trapezoid(&density))
}

/// Dilates the relative coordinates by `gamma`, leaving the center of mass
/// untouched and preserving the norm.
pub fn scale_relative(state: &StateSpec, gamma: f64) -> Result<StateSpec> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(invalid(format!("dilation factor must be > 0, got {gamma}")));
    }
    match state {
        StateSpec::Soliton { n, envelope, params } => Ok(StateSpec::Soliton {
            n: *n,
            envelope: envelope.clone(),
            params: SolitonParams { ratio: params.ratio / gamma, ..*params },
        }),
        StateSpec::Grid(g) => {
            if gamma == 1.0 {
                return Ok(state.clone());
            }
            Ok(StateSpec::Grid(dilate_grid(g, gamma)?))
        }
        _ => Err(Error::UnsupportedVariant { op: "scale_relative", variant: state.variant() }),
    }
}

/// `psi_new(x) ~ psi(X + (x - X) / gamma)`, multilinear interpolation on the
/// lattice, zero outside, then symmetrized and renormalized.
fn dilate_grid(g: &GridState, gamma: f64) -> Result<GridState> {
    let n = g.n().get();
    let points = g.points();
    let sample = |x: &[f64]| -> C64 {
        let mut base = [0usize; 3];
        let mut frac = [0.0; 3];
        for axis in 0..n {
            let t = (x[axis] - g.x_min()) / g.dx();
            if !(t >= 0.0 && t <= (points - 1) as f64) {
                return C64::new(0.0, 0.0);
            }
            let i = (t.floor() as usize).min(points - 2);
            base[axis] = i;
            frac[axis] = t - i as f64;
        }
        let mut acc = C64::new(0.0, 0.0);
        for corner in 0..(1usize << n) {
            let mut w = 1.0;
            let mut idx = [0usize; 3];
            for axis in 0..n {
                let up = (corner >> axis) & 1 == 1;
                idx[axis] = base[axis] + up as usize;
                w *= if up { frac[axis] } else { 1.0 - frac[axis] };
            }
            if w != 0.0 {
                acc += g.amplitudes()[g.flatten(&idx[..n])] * w;
            }
        }
        acc
    };
    let raw: Vec<C64> = (0..g.amplitudes().len())
        .into_par_iter()
        .map(|flat| {
            let idx = g.unflatten(flat);
            let x: Vec<f64> = idx[..n].iter().map(|&i| g.coord(i)).collect();
            let com = x.iter().sum::<f64>() / n as f64;
            let src: Vec<f64> = x.iter().map(|xi| com + (xi - com) / gamma).collect();
            sample(&src)
        })
        .collect();
    let symmetric = symmetrize(g, &raw);
    GridState::normalized(g.n(), g.x_min(), g.dx(), points, symmetric)
}

fn symmetrize(g: &GridState, raw: &[C64]) -> Vec<C64> {
    let n = g.n().get();
    let perms: &[&[usize]] = match n {
        1 => &[&[0]],
        2 => &[&[0, 1], &[1, 0]],
        _ => &[&[0, 1, 2], &[1, 0, 2], &[0, 2, 1], &[2, 1, 0], &[1, 2, 0], &[2, 0, 1]],
    };
    (0..raw.len())
        .map(|flat| {
            let idx = g.unflatten(flat);
            let sum: C64 = perms
                .iter()
                .map(|p| {
                    let permuted: Vec<usize> = p.iter().map(|&axis| idx[axis]).collect();
                    raw[g.flatten(&permuted)]
                })
                .sum();
            sum / perms.len() as f64
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloConfig {
    pub samples: usize,
    pub seed: u64,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        Self { samples: 1_000_000, seed: 42 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpreadMethod {
    ClosedForm,
    MonteCarlo,
    Quadrature,
}

/// RMS widths of the relative coordinates `xi_1 .. xi_{n-1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelativeSpread {
    pub widths: Vec<f64>,
    /// Standard errors of the widths for Monte Carlo estimates.
    pub std_errors: Option<Vec<f64>>,
    pub method: SpreadMethod,
}

impl RelativeSpread {
    /// Root mean square over the relative coordinates.
    pub fn rms(&self) -> f64 {
        (self.widths.iter().map(|w| w * w).sum::<f64>() / self.widths.len() as f64).sqrt()
    }
}

pub fn relative_spread(state: &StateSpec) -> Result<RelativeSpread> {
    relative_spread_with(state, &MonteCarloConfig::default())
}

pub fn relative_spread_with(state: &StateSpec, mc: &MonteCarloConfig) -> Result<RelativeSpread> {
    let n = state.n().get();
    if n < 2 {
        return Err(invalid("relative coordinates need n >= 2"));
    }
    match state {
        StateSpec::Coincident { .. } => {
            Err(Error::InfiniteMoment("relative positions of coincident-momentum photons are unbounded".into()))
        }
        StateSpec::Product { envelope, .. } => {
            let (_, var) = envelope.position_moments()?;
            let w = (var * (1.0 - 1.0 / n as f64)).sqrt();
            Ok(RelativeSpread { widths: vec![w; n - 1], std_errors: None, method: SpreadMethod::ClosedForm })
        }
        StateSpec::Soliton { params, .. } => {
            if n == 2 {
                // |psi_rel|^2 ~ exp(-2 r |xi_1|): Laplace law with variance 1/(2 r^2)
                let w = 1.0 / (2f64.sqrt() * params.binding());
                Ok(RelativeSpread { widths: vec![w], std_errors: None, method: SpreadMethod::ClosedForm })
            } else {
                soliton_spread_monte_carlo(n, params.binding(), mc)
            }
        }
        StateSpec::Grid(g) => Ok(grid_relative_spread(g)),
    }
}

/// Samples `|psi_rel|^2 ~ exp(-r sum_{i<j} |x_i - x_j|)` exactly: for sorted
/// positions the gaps are independent exponentials with rates
/// `r l (n - l)`, and every labeling of the sorted positions is equally
/// likely.
fn soliton_spread_monte_carlo(n: usize, binding: f64, mc: &MonteCarloConfig) -> Result<RelativeSpread> {
    if mc.samples < 2 {
        return Err(invalid("Monte Carlo needs at least 2 samples"));
    }
    let gaps: Vec<Exp<f64>> = (1..n)
        .map(|l| Exp::new(binding * (l * (n - l)) as f64).map_err(|e| invalid(e.to_string())))
        .collect::<Result<_>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(mc.seed);
    let mut sorted = vec![0.0; n];
    let mut labels: Vec<usize> = (0..n).collect();
    let mut sum = vec![0.0; n - 1];
    let mut sum_sq = vec![0.0; n - 1];
    let mut sum_quad = vec![0.0; n - 1];
    for _ in 0..mc.samples {
        for l in 1..n {
            sorted[l] = sorted[l - 1] + gaps[l - 1].sample(&mut rng);
        }
        for i in (1..n).rev() {
            let j = rng.random_range(0..=i);
            labels.swap(i, j);
        }
        let com = sorted.iter().sum::<f64>() / n as f64;
        for i in 0..n - 1 {
            let xi = sorted[labels[i]] - com;
            let sq = xi * xi;
            sum[i] += xi;
            sum_sq[i] += sq;
            sum_quad[i] += sq * sq;
        }
    }
    let m = mc.samples as f64;
    let mut widths = Vec::with_capacity(n - 1);
    let mut errors = Vec::with_capacity(n - 1);
    for i in 0..n - 1 {
        let mean = sum[i] / m;
        let second = sum_sq[i] / m;
        let var = second - mean * mean;
        let width = var.sqrt();
        // delta method on the second moment
        let var_of_sq = (sum_quad[i] / m - second * second).max(0.0);
        let se_var = (var_of_sq / (m - 1.0)).sqrt();
        widths.push(width);
        errors.push(se_var / (2.0 * width));
    }
    Ok(RelativeSpread { widths, std_errors: Some(errors), method: SpreadMethod::MonteCarlo })
}

fn grid_relative_spread(g: &GridState) -> RelativeSpread {
    let n = g.n().get();
    let partial = g
        .amplitudes()
        .par_iter()
        .enumerate()
        .map(|(flat, a)| {
            let idx = g.unflatten(flat);
            let x: Vec<f64> = idx[..n].iter().map(|&i| g.coord(i)).collect();
            let com = x.iter().sum::<f64>() / n as f64;
            let p = a.norm_sqr();
            let mut row = vec![p; 1 + 2 * (n - 1)];
            for i in 0..n - 1 {
                let xi = x[i] - com;
                row[1 + 2 * i] = p * xi;
                row[2 + 2 * i] = p * xi * xi;
            }
            row
        })
        .collect::<Vec<_>>();
    let mut acc = vec![0.0; 1 + 2 * (n - 1)];
    for row in partial {
        for (a, v) in acc.iter_mut().zip(row) {
            *a += v;
        }
    }
    let widths = (0..n - 1)
        .map(|i| {
            let mean = acc[1 + 2 * i] / acc[0];
            (acc[2 + 2 * i] / acc[0] - mean * mean).sqrt()
        })
        .collect();
    RelativeSpread { widths, std_errors: None, method: SpreadMethod::Quadrature }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::SpectralEnvelope;

    fn count(n: usize) -> PhotonCount {
        PhotonCount::new(n).unwrap()
    }

    fn gauss(kappa: f64) -> SpectralEnvelope {
        SpectralEnvelope::gaussian(kappa).unwrap()
    }

    #[test]
    fn reference_widths() {
        assert!((sql_width(count(1), 1.0) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((sql_width(count(4), 1.0) - 0.3535533905932738).abs() < 1e-15);
        assert!((uql_width(count(1), 1.0) - sql_width(count(1), 1.0)).abs() < 1e-16);
        assert!((uql_width(count(4), 1.0) - 0.1767766952966369).abs() < 1e-15);
        for n in 1..=16 {
            let r = uql_width(count(n), 1.0) / sql_width(count(n), 1.0);
            assert!((r - 1.0 / (n as f64).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn product_and_coincident_examples() {
        let p = StateSpec::product(3, gauss(1.0)).unwrap();
        assert!((marginal_width(&p).unwrap() - 1.0 / 6f64.sqrt()).abs() < 1e-12);
        let c = StateSpec::coincident(3, gauss(1.0)).unwrap();
        assert!((marginal_width(&c).unwrap() - 1.0 / (3.0 * 2f64.sqrt())).abs() < 1e-12);
        let p2 = StateSpec::product(2, gauss(1.0)).unwrap();
        assert!((conditional_width(&p2).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn dual_delta_widths_refused() {
        let c = StateSpec::coincident(2, SpectralEnvelope::dual_delta(1.0).unwrap()).unwrap();
        assert!(matches!(marginal_width(&c), Err(Error::InfiniteMoment(_))));
        assert!(matches!(conditional_width(&c), Err(Error::InfiniteMoment(_))));
        assert!(matches!(relative_spread(&c), Err(Error::InfiniteMoment(_))));
    }

    #[test]
    fn soliton_separability_and_rate() {
        for ratio in [-0.5, -2.0, -7.0] {
            let s = StateSpec::soliton(2, gauss(1.0), SolitonParams { ratio, b_integral: 0.0, q: 1.0 }).unwrap();
            let m = marginal_width(&s).unwrap();
            let c = conditional_width(&s).unwrap();
            assert!((m - c).abs() < 1e-9 * m, "{m} vs {c}");
        }
        let rate = |r: f64| {
            let s = StateSpec::soliton(2, gauss(1.0), SolitonParams { ratio: -r, b_integral: 0.0, q: 1.0 }).unwrap();
            total_absorption_rate(&s, None).unwrap().total_rate
        };
        assert!((rate(3.0) / rate(1.5) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn scale_relative_examples() {
        let s = StateSpec::soliton(3, gauss(1.0), SolitonParams { ratio: -2.0, b_integral: 0.0, q: 1.0 }).unwrap();
        assert_eq!(scale_relative(&s, 1.0).unwrap(), s);
        let StateSpec::Soliton { params, .. } = scale_relative(&s, 2.0).unwrap() else { panic!() };
        assert_eq!(params.ratio, -1.0);
        let p = StateSpec::product(2, gauss(1.0)).unwrap();
        assert!(matches!(scale_relative(&p, 2.0), Err(Error::UnsupportedVariant { .. })));
        let base = total_absorption_rate(&s, None).unwrap().total_rate;
        let r = total_absorption_rate(&scale_relative(&s, 2.0).unwrap(), Some(base)).unwrap();
        assert!((r.ratio.unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn rate_of_gaussian_product_by_quadrature() {
        // int |f(x)|^{2n} dx with |f|^2 = exp(-x^2) / sqrt(pi)
        let p = StateSpec::product(3, gauss(1.0)).unwrap();
        let got = total_absorption_rate(&p, None).unwrap().total_rate;
        let expected =
            crate::numeric::adaptive_simpson(&|x: f64| ((-x * x).exp() / PI.sqrt()).powi(3), -20.0, 20.0, 1e-14);
        assert!((got - expected).abs() < 1e-12);
    }

    #[test]
    fn coincident_rate_refused() {
        let c = StateSpec::coincident(2, gauss(1.0)).unwrap();
        assert!(matches!(total_absorption_rate(&c, None), Err(Error::NonNormalizable(_))));
    }

    #[test]
    fn single_photon_pattern_width() {
        let p = StateSpec::product(1, gauss(1.0)).unwrap();
        let grid = UniformGrid::spanning(-10.0, 10.0, 2001).unwrap();
        let profile = absorption_pattern(&p, &grid).unwrap();
        let m = density_moments(&grid, &profile.intensity);
        assert!((m.mass - 1.0).abs() < 1e-12);
        assert!((m.variance.sqrt() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-10);
    }

    #[test]
    fn cos_squared_pattern_period() {
        let c = StateSpec::coincident(2, SpectralEnvelope::dual_delta(1.0).unwrap()).unwrap();
        let grid = UniformGrid::spanning(0.0, 20.0, 4001).unwrap();
        let profile = absorption_pattern(&c, &grid).unwrap();
        for (x, v) in profile.xs().iter().zip(&profile.intensity) {
            // cos^2(2x) normalized over [0, 20]
            let expected = (2.0 * x).cos().powi(2);
            assert!(
                (v * grid.trapezoid(&grid.coords().iter().map(|x| (2.0 * x).cos().powi(2)).collect::<Vec<_>>())
                    - expected)
                    .abs()
                    < 1e-10
            );
        }
        let period = fringe_period(&profile).unwrap();
        assert!((period - PI / 2.0).abs() <= grid.step);
    }

    #[test]
    fn soliton_spread_closed_form_n2() {
        let s = StateSpec::soliton(2, gauss(1.0), SolitonParams { ratio: -2.0, b_integral: 0.0, q: 1.0 }).unwrap();
        let w = relative_spread(&s).unwrap().widths[0];
        assert!((w - 1.0 / (2.0 * 2f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn monte_carlo_is_seed_deterministic() {
        let s = StateSpec::soliton(3, gauss(1.0), SolitonParams { ratio: -1.0, b_integral: 0.0, q: 1.0 }).unwrap();
        let mc = MonteCarloConfig { samples: 20_000, seed: 7 };
        let a = relative_spread_with(&s, &mc).unwrap();
        let b = relative_spread_with(&s, &mc).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.widths.len(), 2);
        assert!(a.std_errors.is_some());
    }

    #[test]
    fn product_relative_spread() {
        let p = StateSpec::product(4, gauss(1.0)).unwrap();
        let s = relative_spread(&p).unwrap();
        assert_eq!(s.widths.len(), 3);
        assert!((s.widths[0] - (0.5f64 * 0.75).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn width_report_fields() {
        let r = width_report(&StateSpec::product(4, gauss(1.0)).unwrap()).unwrap();
        assert!((r.marginal - 0.353553).abs() < 1e-6);
        assert_eq!(r.sql_ref, Some(sql_width(count(4), 1.0)));
        assert!(r.separable);
    }
}
