//! Inverse design of coincident-momentum lithography: target pattern to
//! spectral envelope, and envelope ratio to Fourier-plane transfer function.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numeric::UniformGrid;
use crate::observables::{absorption_pattern, PatternProfile};
use crate::optics::{apply_modulation, Transfer, TransferFunction};
use crate::state::{BandLimit, PhotonCount, SampledEnvelope, SpectralEnvelope, StateSpec, ZERO_POWER};

/// Relative division guard for `solve_transfer`.
pub const DEFAULT_EPS: f64 = 1e-6;

/// Out-of-band power above which a target is flagged as sub-resolution.
pub const OUT_OF_BAND_WARNING: f64 = 1e-6;

/// Target power on masked points above which a design is flagged.
pub const MASKED_POWER_WARNING: f64 = 1e-12;

pub const SUB_RESOLUTION_WARNING: &str = "feature below λ/N limit";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", content = "values", rename_all = "kebab-case")]
pub enum PhasePolicy {
    ZeroPhase,
    SuppliedPhase(Vec<f64>),
}

/// Desired absorption pattern `|g(N X)|^2` on a uniform X grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetPattern {
    pub x_grid: UniformGrid,
    /// Normalized to unit trapezoid integral.
    pub intensity: Vec<f64>,
    pub phase_policy: PhasePolicy,
}

impl TargetPattern {
    pub fn new(x_grid: UniformGrid, intensity: Vec<f64>, phase_policy: PhasePolicy) -> Result<Self> {
        if intensity.len() != x_grid.points {
            return Err(Error::DimensionMismatch { expected: x_grid.points, got: intensity.len() });
        }
        if let PhasePolicy::SuppliedPhase(p) = &phase_policy {
            if p.len() != x_grid.points {
                return Err(Error::DimensionMismatch { expected: x_grid.points, got: p.len() });
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(invalid("target phase must be finite"));
            }
        }
        if intensity.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(invalid("target intensity must be finite and nonnegative"));
        }
        let mass = x_grid.trapezoid(&intensity);
        if !(mass > 0.0) {
            return Err(Error::EmptyTarget);
        }
        Ok(Self { x_grid, intensity: intensity.into_iter().map(|v| v / mass).collect(), phase_policy })
    }

    fn phase(&self, j: usize) -> f64 {
        match &self.phase_policy {
            PhasePolicy::ZeroPhase => 0.0,
            PhasePolicy::SuppliedPhase(p) => p[j],
        }
    }

    /// `g(N X) = sqrt(I) exp(i phi)` on the target grid.
    pub fn amplitude(&self) -> Vec<C64> {
        self.intensity.iter().enumerate().map(|(j, i)| C64::from_polar(i.sqrt(), self.phase(j))).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeDiagnostics {
    /// Fraction of the unclipped spectral power with `|k| > 2 pi / lambda`.
    pub out_of_band_power: f64,
    /// Relative L2 distance between the pattern of the clipped envelope and
    /// the target.
    pub residual: f64,
    pub warnings: Vec<String>,
}

/// Transforms the target amplitude onto the DFT-conjugate k-grid (with the
/// `y = N X` scaling), clips to the band and renormalizes.
pub fn pattern_to_envelope(
    target: &TargetPattern,
    n: PhotonCount,
    bl: &BandLimit,
) -> Result<(SpectralEnvelope, EnvelopeDiagnostics)> {
    let m = target.x_grid.points;
    let nf = n.as_f64();
    let dy = nf * target.x_grid.step;
    let y0 = nf * target.x_grid.start;
    let dk = 2.0 * PI / (m as f64 * dy);
    let m_lo = -((m / 2) as i64);

    let mut buf = target.amplitude();
    FftPlanner::<f64>::new().plan_fft_forward(m).process(&mut buf);
    let scale = dy / (2.0 * PI).sqrt();
    let mut values: Vec<C64> = (0..m)
        .map(|j| {
            let idx = m_lo + j as i64;
            let k = idx as f64 * dk;
            buf[idx.rem_euclid(m as i64) as usize] * C64::cis(-k * y0) * scale
        })
        .collect();

    let k_min = m_lo as f64 * dk;
    let k_max = bl.k_max();
    let total: f64 = values.iter().map(|v| v.norm_sqr()).sum();
    let mut clipped = 0.0;
    for (j, v) in values.iter_mut().enumerate() {
        if (k_min + j as f64 * dk).abs() > k_max {
            clipped += v.norm_sqr();
            *v = C64::new(0.0, 0.0);
        }
    }
    let out_of_band_power = if total > 0.0 { clipped / total } else { 0.0 };
    let sampled = SampledEnvelope::new(k_min, dk, values)?;
    if !(sampled.power() >= ZERO_POWER) {
        return Err(Error::ZeroEnvelope(sampled.power()));
    }
    let envelope = SpectralEnvelope::Sampled(sampled).normalize()?;

    let achieved = absorption_pattern(&StateSpec::Coincident { n, envelope: envelope.clone() }, &target.x_grid)?;
    let residual = relative_l2(&target.x_grid, &achieved.intensity, &target.intensity);
    let mut warnings = Vec::new();
    if out_of_band_power > OUT_OF_BAND_WARNING {
        warnings.push(format!("{SUB_RESOLUTION_WARNING}: {out_of_band_power:.3e} of the spectral power clipped"));
    }
    Ok((envelope, EnvelopeDiagnostics { out_of_band_power, residual, warnings }))
}

/// `||a - b|| / ||b||` in the trapezoid L2 norm.
pub fn relative_l2(grid: &UniformGrid, a: &[f64], b: &[f64]) -> f64 {
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).collect();
    let base: Vec<f64> = b.iter().map(|y| y * y).collect();
    (grid.trapezoid(&diff) / grid.trapezoid(&base)).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferSolution {
    pub transfer: TransferFunction,
    /// Grid indices where `|G_in| < eps max |G_in|`; `H` is zero there.
    pub masked: Vec<usize>,
}

/// `H = (G_target / G_in)^(1/n)`: real n-th root of the magnitude and the
/// phase unwrapped along the grid from the peak of `|G_in|`, divided by `n`.
pub fn solve_transfer(
    g_in: &SpectralEnvelope,
    g_target: &SpectralEnvelope,
    n: PhotonCount,
    eps: f64,
) -> Result<TransferSolution> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(invalid(format!("eps must be > 0, got {eps}")));
    }
    let (a, b) = common_grid(g_in, g_target)?;
    let len = a.values.len();
    let peak = a.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if !(peak > 0.0) {
        return Err(Error::ZeroEnvelope(0.0));
    }
    let floor = eps * peak;
    let ratios: Vec<Option<C64>> =
        a.values.par_iter().zip(&b.values).map(|(x, y)| (x.norm() >= floor).then(|| y / x)).collect();
    let masked: Vec<usize> = (0..len).filter(|&j| ratios[j].is_none()).collect();

    let seed =
        a.values.iter().enumerate().max_by(|p, q| p.1.norm().total_cmp(&q.1.norm())).map(|(j, _)| j).unwrap_or(0);
    let mut phase = vec![0.0; len];
    let unwrap_from = |order: &mut dyn Iterator<Item = usize>, phase: &mut Vec<f64>| {
        let mut prev: Option<(f64, f64)> = None;
        for j in order {
            let Some(r) = ratios[j] else { continue };
            let arg = r.arg();
            let value = match prev {
                None => arg,
                Some((prev_arg, prev_value)) => prev_value + wrap_phase(arg - prev_arg),
            };
            phase[j] = value;
            prev = Some((arg, value));
        }
    };
    unwrap_from(&mut (seed..len), &mut phase);
    unwrap_from(&mut (0..=seed).rev(), &mut phase);

    let inv = 1.0 / n.as_f64();
    let values: Vec<C64> = (0..len)
        .map(|j| match ratios[j] {
            Some(r) => C64::from_polar(r.norm().powf(inv), phase[j] * inv),
            None => C64::new(0.0, 0.0),
        })
        .collect();
    Ok(TransferSolution {
        transfer: TransferFunction::sampled(a.k_min, a.dk, values, format!("designed transfer, n = {}", n.get()))?,
        masked,
    })
}

/// Into `(-pi, pi]`.
fn wrap_phase(d: f64) -> f64 {
    let w = d - 2.0 * PI * (d / (2.0 * PI)).round();
    if w <= -PI {
        w + 2.0 * PI
    } else {
        w
    }
}

fn common_grid(g_in: &SpectralEnvelope, g_target: &SpectralEnvelope) -> Result<(SampledEnvelope, SampledEnvelope)> {
    match (g_in, g_target) {
        (SpectralEnvelope::Sampled(a), SpectralEnvelope::Sampled(b)) => {
            if !a.same_grid(b) {
                return Err(Error::GridMismatch(format!(
                    "input grid ({} points from {}, step {}) differs from target grid ({} points from {}, step {})",
                    a.values.len(),
                    a.k_min,
                    a.dk,
                    b.values.len(),
                    b.k_min,
                    b.dk
                )));
            }
            Ok((a.clone(), b.clone()))
        }
        (analytic, SpectralEnvelope::Sampled(b)) => Ok((analytic.sample_on(&b.grid())?, b.clone())),
        (SpectralEnvelope::Sampled(a), analytic) => Ok((a.clone(), analytic.sample_on(&a.grid())?)),
        _ => Err(Error::GridMismatch("neither envelope is sampled, so there is no common k-grid".into())),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignResult {
    pub n: usize,
    pub x_grid: UniformGrid,
    /// `g(N X)` on the target grid.
    pub g_target: Vec<C64>,
    pub envelope: SpectralEnvelope,
    pub transfer: TransferFunction,
    /// Pattern of the modulated input, through the forward model.
    pub achieved: PatternProfile,
    pub in_band_fraction: f64,
    pub residual: f64,
    pub max_abs_h: f64,
    pub masked_points: usize,
    pub warnings: Vec<String>,
}

pub fn design_report(
    target: &TargetPattern,
    n: PhotonCount,
    bl: &BandLimit,
    g_in: &SpectralEnvelope,
    eps: f64,
) -> Result<DesignResult> {
    let (envelope, diag) = pattern_to_envelope(target, n, bl)?;
    let solution = solve_transfer(g_in, &envelope, n, eps)?;
    let mut warnings = diag.warnings;

    let SpectralEnvelope::Sampled(gt) = &envelope else { unreachable!("designed envelopes are sampled") };
    let masked_power: f64 = solution.masked.iter().map(|&j| gt.values[j].norm_sqr() * gt.dk).sum();
    if masked_power > MASKED_POWER_WARNING {
        warnings.push(format!(
            "{} k-points masked where the input envelope is below eps; {masked_power:.3e} of the target power is unreachable",
            solution.masked.len()
        ));
    }

    let input = StateSpec::coincident(n.get(), g_in.clone())?;
    let modulated = apply_modulation(&input, &solution.transfer)?;
    let achieved = absorption_pattern(&modulated, &target.x_grid)?;
    let residual = relative_l2(&target.x_grid, &achieved.intensity, &target.intensity);
    let max_abs_h = match &solution.transfer.repr {
        Transfer::Sampled(_) => solution.transfer.max_abs(),
        Transfer::QuadraticPhase { .. } => 1.0,
    };
    Ok(DesignResult {
        n: n.get(),
        x_grid: target.x_grid,
        g_target: target.amplitude(),
        envelope,
        transfer: solution.transfer,
        achieved,
        in_band_fraction: 1.0 - diag.out_of_band_power,
        residual,
        max_abs_h,
        masked_points: solution.masked.len(),
        warnings,
    })
}
