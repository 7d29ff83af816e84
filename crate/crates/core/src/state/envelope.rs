use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numeric::{adaptive_simpson, trapezoid_weight, UniformGrid};

/// Total power below which an envelope counts as empty.
pub const ZERO_POWER: f64 = 1e-30;

/// Edge amplitude (relative to the peak) above which a sampled envelope is
/// treated as truncated, so its transform decays too slowly for a finite
/// second moment.
pub const TRUNCATION_EDGE: f64 = 1e-6;

/// One-dimensional momentum envelope `G(k)`.
///
/// `Gaussian` is implicitly unit-norm:
/// `G(k) = (pi kappa^2)^(-1/4) exp(-k^2 / (2 kappa^2) + i chirp k^2)`.
/// `DualDelta` is `w1 delta(k - k0) + w2 delta(k + k0)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SpectralEnvelope {
    Gaussian {
        kappa: f64,
        #[serde(default)]
        chirp: f64,
    },
    DualDelta {
        k0: f64,
        #[serde(default = "balanced_weights")]
        weights: [C64; 2],
    },
    Sampled(SampledEnvelope),
}

fn balanced_weights() -> [C64; 2] {
    let w = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    [w, w]
}

/// Envelope values on the uniform grid `k_min + j * dk`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledEnvelope {
    pub k_min: f64,
    pub dk: f64,
    pub values: Vec<C64>,
}

impl SampledEnvelope {
    pub const MIN_POINTS: usize = 8;

    pub fn new(k_min: f64, dk: f64, values: Vec<C64>) -> Result<Self> {
        let s = Self { k_min, dk, values };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dk.is_finite() && self.dk > 0.0) || !self.k_min.is_finite() {
            return Err(invalid(format!("sampled envelope needs dk > 0, got {}", self.dk)));
        }
        if self.values.len() < Self::MIN_POINTS {
            return Err(invalid(format!(
                "sampled envelope needs at least {} points, got {}",
                Self::MIN_POINTS,
                self.values.len()
            )));
        }
        if self.values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(invalid("sampled envelope has non-finite values"));
        }
        Ok(())
    }

    pub fn grid(&self) -> UniformGrid {
        UniformGrid { start: self.k_min, step: self.dk, points: self.values.len() }
    }

    #[inline]
    pub fn k(&self, j: usize) -> f64 {
        self.k_min + j as f64 * self.dk
    }

    pub fn k_max(&self) -> f64 {
        self.k(self.values.len() - 1)
    }

    pub fn power(&self) -> f64 {
        let len = self.values.len();
        self.dk * self.values.iter().enumerate().map(|(j, v)| trapezoid_weight(j, len) * v.norm_sqr()).sum::<f64>()
    }

    /// Linear interpolation, zero outside the sampled range.
    pub fn interpolate(&self, k: f64) -> C64 {
        let t = (k - self.k_min) / self.dk;
        let last = self.values.len() - 1;
        if !(t >= 0.0 && t <= last as f64) {
            return C64::new(0.0, 0.0);
        }
        let j = (t.floor() as usize).min(last);
        if j == last {
            return self.values[last];
        }
        let frac = t - j as f64;
        self.values[j] * (1.0 - frac) + self.values[j + 1] * frac
    }

    /// True when two envelopes share a k-grid to within rounding.
    pub fn same_grid(&self, other: &SampledEnvelope) -> bool {
        self.values.len() == other.values.len()
            && (self.dk - other.dk).abs() <= 1e-12 * self.dk
            && (self.k_min - other.k_min).abs() <= 1e-9 * self.dk
    }
}

impl SpectralEnvelope {
    pub fn gaussian(kappa: f64) -> Result<Self> {
        let env = SpectralEnvelope::Gaussian { kappa, chirp: 0.0 };
        env.validate()?;
        Ok(env)
    }

    /// Balanced two-arm envelope with weights `(1/sqrt 2, 1/sqrt 2)`.
    pub fn dual_delta(k0: f64) -> Result<Self> {
        let env = SpectralEnvelope::DualDelta { k0, weights: balanced_weights() };
        env.validate()?;
        Ok(env)
    }

    pub fn sampled(k_min: f64, dk: f64, values: Vec<C64>) -> Result<Self> {
        Ok(SpectralEnvelope::Sampled(SampledEnvelope::new(k_min, dk, values)?))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            SpectralEnvelope::Gaussian { .. } => "gaussian",
            SpectralEnvelope::DualDelta { .. } => "dual_delta",
            SpectralEnvelope::Sampled(_) => "sampled",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SpectralEnvelope::Gaussian { kappa, chirp } => {
                if !(kappa.is_finite() && *kappa > 0.0) {
                    return Err(invalid(format!("gaussian kappa must be > 0, got {kappa}")));
                }
                if !chirp.is_finite() {
                    return Err(invalid("gaussian chirp must be finite"));
                }
                Ok(())
            }
            SpectralEnvelope::DualDelta { k0, weights } => {
                if !(k0.is_finite() && *k0 > 0.0) {
                    return Err(invalid(format!("dual-delta k0 must be > 0, got {k0}")));
                }
                if weights.iter().any(|w| !(w.re.is_finite() && w.im.is_finite())) {
                    return Err(invalid("dual-delta weights must be finite"));
                }
                Ok(())
            }
            SpectralEnvelope::Sampled(s) => s.validate(),
        }
    }

    /// `int |G|^2 dk` (weight norm for `DualDelta`, trapezoid for `Sampled`).
    pub fn power(&self) -> f64 {
        match self {
            SpectralEnvelope::Gaussian { .. } => 1.0,
            SpectralEnvelope::DualDelta { weights, .. } => weights[0].norm_sqr() + weights[1].norm_sqr(),
            SpectralEnvelope::Sampled(s) => s.power(),
        }
    }

    /// Rescales to unit power without changing the phase of any value.
    pub fn normalize(&self) -> Result<Self> {
        self.validate()?;
        let power = self.power();
        if !(power >= ZERO_POWER) {
            return Err(Error::ZeroEnvelope(power));
        }
        let scale = power.sqrt().recip();
        Ok(match self {
            SpectralEnvelope::Gaussian { .. } => self.clone(),
            SpectralEnvelope::DualDelta { k0, weights } => {
                SpectralEnvelope::DualDelta { k0: *k0, weights: [weights[0] * scale, weights[1] * scale] }
            }
            SpectralEnvelope::Sampled(s) => SpectralEnvelope::Sampled(SampledEnvelope {
                k_min: s.k_min,
                dk: s.dk,
                values: s.values.iter().map(|v| v * scale).collect(),
            }),
        })
    }

    /// Pointwise value `G(k)`; delta envelopes have none.
    pub fn value(&self, k: f64) -> Result<C64> {
        match self {
            SpectralEnvelope::Gaussian { kappa, chirp } => Ok(gaussian_value(*kappa, *chirp, k)),
            SpectralEnvelope::DualDelta { .. } => Err(Error::DistributionalState),
            SpectralEnvelope::Sampled(s) => Ok(s.interpolate(k)),
        }
    }

    /// `g(y) = int dk/sqrt(2 pi) G(k) exp(i k y)`.
    pub fn transform(&self, y: f64) -> C64 {
        match self {
            SpectralEnvelope::Gaussian { kappa, chirp } => {
                let alpha = C64::new(0.5 / (kappa * kappa), -chirp);
                let norm = (PI * kappa * kappa).powf(-0.25) / (2.0 * PI).sqrt();
                (C64::from(PI) / alpha).sqrt() * (-(y * y) / (4.0 * alpha)).exp() * norm
            }
            SpectralEnvelope::DualDelta { k0, weights } => {
                (weights[0] * C64::cis(k0 * y) + weights[1] * C64::cis(-k0 * y)) / (2.0 * PI).sqrt()
            }
            SpectralEnvelope::Sampled(s) => {
                let len = s.values.len();
                let sum: C64 =
                    s.values.iter().enumerate().map(|(j, v)| v * C64::cis(s.k(j) * y) * trapezoid_weight(j, len)).sum();
                sum * (s.dk / (2.0 * PI).sqrt())
            }
        }
    }

    pub fn transform_many(&self, ys: &[f64]) -> Vec<C64> {
        match self {
            SpectralEnvelope::Sampled(_) => ys.par_iter().map(|&y| self.transform(y)).collect(),
            _ => ys.iter().map(|&y| self.transform(y)).collect(),
        }
    }

    /// Multiplies by `exp(i chirp k^2)`.
    pub fn with_chirp(&self, chirp: f64) -> Self {
        if chirp == 0.0 {
            return self.clone();
        }
        match self {
            SpectralEnvelope::Gaussian { kappa, chirp: c } => {
                SpectralEnvelope::Gaussian { kappa: *kappa, chirp: c + chirp }
            }
            SpectralEnvelope::DualDelta { k0, weights } => {
                let phase = C64::cis(chirp * k0 * k0);
                SpectralEnvelope::DualDelta { k0: *k0, weights: [weights[0] * phase, weights[1] * phase] }
            }
            SpectralEnvelope::Sampled(s) => SpectralEnvelope::Sampled(SampledEnvelope {
                k_min: s.k_min,
                dk: s.dk,
                values: s
                    .values
                    .iter()
                    .enumerate()
                    .map(|(j, v)| {
                        let k = s.k(j);
                        v * C64::cis(chirp * k * k)
                    })
                    .collect(),
            }),
        }
    }

    /// `G_out(k) = sqrt(m) G(m k)`: spatial demagnification by `m`.
    pub fn dilate(&self, m: f64) -> Result<Self> {
        if !(m.is_finite() && m > 0.0) {
            return Err(invalid(format!("magnification must be > 0, got {m}")));
        }
        Ok(match self {
            SpectralEnvelope::Gaussian { kappa, chirp } => {
                SpectralEnvelope::Gaussian { kappa: kappa / m, chirp: chirp * m * m }
            }
            SpectralEnvelope::DualDelta { k0, weights } => {
                SpectralEnvelope::DualDelta { k0: k0 / m, weights: *weights }
            }
            SpectralEnvelope::Sampled(s) => {
                let root = m.sqrt();
                SpectralEnvelope::Sampled(SampledEnvelope {
                    k_min: s.k_min / m,
                    dk: s.dk / m,
                    values: s.values.iter().map(|v| v * root).collect(),
                })
            }
        })
    }

    /// Samples the envelope on `grid`.
    pub fn sample_on(&self, grid: &UniformGrid) -> Result<SampledEnvelope> {
        if let SpectralEnvelope::DualDelta { .. } = self {
            return Err(Error::DistributionalState);
        }
        let values = (0..grid.points).map(|j| self.value(grid.coord(j))).collect::<Result<Vec<_>>>()?;
        SampledEnvelope::new(grid.start, grid.step, values)
    }

    /// Mean and variance of `k` under `|G|^2 / int |G|^2`.
    pub fn momentum_moments(&self) -> Result<(f64, f64)> {
        let power = self.power();
        if !(power >= ZERO_POWER) {
            return Err(Error::ZeroEnvelope(power));
        }
        Ok(match self {
            SpectralEnvelope::Gaussian { kappa, .. } => (0.0, 0.5 * kappa * kappa),
            SpectralEnvelope::DualDelta { k0, weights } => {
                let (p1, p2) = (weights[0].norm_sqr() / power, weights[1].norm_sqr() / power);
                let mean = k0 * (p1 - p2);
                (mean, k0 * k0 - mean * mean)
            }
            SpectralEnvelope::Sampled(s) => {
                let len = s.values.len();
                let (mut m1, mut m2) = (0.0, 0.0);
                for (j, v) in s.values.iter().enumerate() {
                    let w = trapezoid_weight(j, len) * v.norm_sqr() * s.dk;
                    let k = s.k(j);
                    m1 += w * k;
                    m2 += w * k * k;
                }
                let mean = m1 / power;
                (mean, m2 / power - mean * mean)
            }
        })
    }

    /// Mean and variance of `y` under `|g(y)|^2`, the transform's position
    /// distribution. Diverges for delta envelopes and truncated samples.
    pub fn position_moments(&self) -> Result<(f64, f64)> {
        match self {
            SpectralEnvelope::Gaussian { kappa, chirp } => {
                let k2 = kappa * kappa;
                Ok((0.0, 0.5 / k2 + 2.0 * k2 * chirp * chirp))
            }
            SpectralEnvelope::DualDelta { .. } => {
                Err(Error::InfiniteMoment("dual-delta envelope has a periodic, non-normalizable transform".into()))
            }
            SpectralEnvelope::Sampled(s) => sampled_position_moments(s),
        }
    }

    /// Fraction of `int |G|^2` inside `|k| <= k_max`.
    pub fn in_band_fraction(&self, k_max: f64) -> Result<f64> {
        let power = self.power();
        if !(power >= ZERO_POWER) {
            return Err(Error::ZeroEnvelope(power));
        }
        let fraction = match self {
            SpectralEnvelope::Gaussian { kappa, .. } => {
                let density = |k: f64| (-(k * k) / (kappa * kappa)).exp() / (PI.sqrt() * kappa);
                // density is below 1e-300 past 27 kappa
                let upper = k_max.min(27.0 * kappa);
                2.0 * adaptive_simpson(&density, 0.0, upper, 1e-15)
            }
            // both arms sit at |k| = k0
            SpectralEnvelope::DualDelta { k0, .. } => {
                if *k0 <= k_max {
                    1.0
                } else {
                    0.0
                }
            }
            SpectralEnvelope::Sampled(s) => sampled_power_between(s, -k_max, k_max) / power,
        };
        Ok(fraction.clamp(0.0, 1.0))
    }
}

fn gaussian_value(kappa: f64, chirp: f64, k: f64) -> C64 {
    let amp = (PI * kappa * kappa).powf(-0.25) * (-(k * k) / (2.0 * kappa * kappa)).exp();
    C64::from_polar(amp, chirp * k * k)
}

/// Power inside `[lo, hi]`, integrating the trapezoid-consistent piecewise
/// linear interpolant of `|G|^2` over partially covered cells.
fn sampled_power_between(s: &SampledEnvelope, lo: f64, hi: f64) -> f64 {
    let mut total = 0.0;
    for j in 0..s.values.len() - 1 {
        let (a, b) = (s.k(j), s.k(j + 1));
        let (ia, ib) = (a.max(lo), b.min(hi));
        if ib <= ia {
            continue;
        }
        let (pa, pb) = (s.values[j].norm_sqr(), s.values[j + 1].norm_sqr());
        let at = |k: f64| pa + (pb - pa) * (k - a) / (b - a);
        total += 0.5 * (at(ia) + at(ib)) * (ib - ia);
    }
    total
}

fn sampled_position_moments(s: &SampledEnvelope) -> Result<(f64, f64)> {
    let len = s.values.len();
    let peak = s.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if !(peak > 0.0) {
        return Err(Error::ZeroEnvelope(0.0));
    }
    let edge = s.values[0].norm().max(s.values[len - 1].norm());
    if edge > TRUNCATION_EDGE * peak {
        return Err(Error::InfiniteMoment(format!(
            "sampled envelope is truncated at the grid edge (edge/peak = {:e})",
            edge / peak
        )));
    }
    let at = |j: isize| -> C64 {
        if j < 0 || j as usize >= len {
            C64::new(0.0, 0.0)
        } else {
            s.values[j as usize]
        }
    };
    // fourth-order central difference, zero outside the grid
    let mut overlap = C64::new(0.0, 0.0);
    let mut slope_power = 0.0;
    for j in 0..len {
        let i = j as isize;
        let d = (at(i - 2) - at(i - 1) * 8.0 + at(i + 1) * 8.0 - at(i + 2)) / (12.0 * s.dk);
        let w = trapezoid_weight(j, len) * s.dk;
        overlap += s.values[j].conj() * d * w;
        slope_power += d.norm_sqr() * w;
    }
    let power = s.power();
    let mean = -overlap.im / power;
    Ok((mean, (slope_power / power - mean * mean).max(0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sampled_gaussian(kappa: f64, lo: f64, hi: f64, dk: f64) -> SpectralEnvelope {
        let points = ((hi - lo) / dk).round() as usize + 1;
        let values = (0..points)
            .map(|j| {
                let k = lo + j as f64 * dk;
                C64::new((-k * k / (2.0 * kappa * kappa)).exp(), 0.0)
            })
            .collect();
        SpectralEnvelope::sampled(lo, dk, values).unwrap()
    }

    #[test]
    fn gaussian_normalization_constant() {
        let g = SpectralEnvelope::gaussian(1.0).unwrap().normalize().unwrap();
        let v = g.value(0.0).unwrap();
        assert!((v.re - PI.powf(-0.25)).abs() < 1e-15);
        let norm = adaptive_simpson(&|k| g.value(k).unwrap().norm_sqr(), -20.0, 20.0, 1e-14);
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dual_delta_normalizes_weights() {
        let env = SpectralEnvelope::DualDelta { k0: 1.0, weights: [C64::new(1.0, 0.0); 2] };
        let SpectralEnvelope::DualDelta { weights, .. } = env.normalize().unwrap() else { unreachable!() };
        for w in weights {
            assert!((w.re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
            assert_eq!(w.im, 0.0);
        }
    }

    #[test]
    fn sampled_normalization_matches_trapezoid_oracle() {
        let env = sampled_gaussian(1.0, -6.0, 6.0, 0.01).normalize().unwrap();
        let SpectralEnvelope::Sampled(s) = &env else { unreachable!() };
        // independent trapezoid sum
        let n = s.values.len();
        let mut sum = 0.0;
        for (j, v) in s.values.iter().enumerate() {
            let w = if j == 0 || j == n - 1 { 0.5 } else { 1.0 };
            sum += w * v.norm_sqr();
        }
        assert!((sum * s.dk - 1.0).abs() < 1e-9);
    }

    #[test]
    fn normalize_keeps_phase() {
        let values: Vec<C64> = (0..10).map(|j| C64::from_polar(2.0 + j as f64, 0.3 * j as f64)).collect();
        let env = SpectralEnvelope::sampled(-1.0, 0.2, values.clone()).unwrap().normalize().unwrap();
        let SpectralEnvelope::Sampled(s) = env else { unreachable!() };
        for (a, b) in s.values.iter().zip(&values) {
            assert!((a.arg() - b.arg()).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_envelope_rejected() {
        let env = SpectralEnvelope::sampled(0.0, 1.0, vec![C64::new(0.0, 0.0); 8]).unwrap();
        assert!(matches!(env.normalize(), Err(Error::ZeroEnvelope(_))));
        let short = SpectralEnvelope::sampled(0.0, 1.0, vec![C64::new(1.0, 0.0); 7]);
        assert!(short.is_err());
    }

    #[test]
    fn gaussian_transform_is_normalized_gaussian() {
        let g = SpectralEnvelope::gaussian(2.0).unwrap();
        let expected = |y: f64| (4.0 / PI).powf(0.25) * (-2.0 * y * y).exp();
        for y in [0.0, 0.3, -1.1] {
            assert!((g.transform(y) - C64::from(expected(y))).norm() < 1e-14);
        }
    }

    #[test]
    fn sampled_transform_matches_analytic() {
        let s = sampled_gaussian(1.0, -10.0, 10.0, 0.01).normalize().unwrap();
        let g = SpectralEnvelope::gaussian(1.0).unwrap();
        for y in [0.0, 0.5, 2.0] {
            assert!((s.transform(y) - g.transform(y)).norm() < 1e-12);
        }
    }

    #[test]
    fn position_moments_sampled_vs_closed_form() {
        let s = sampled_gaussian(1.0, -10.0, 10.0, 0.01).normalize().unwrap();
        let chirped = s.with_chirp(0.7);
        let (m, v) = chirped.position_moments().unwrap();
        let expected = 0.5 + 2.0 * 0.49;
        assert!(m.abs() < 1e-12);
        assert!((v - expected).abs() < 1e-7, "{v} vs {expected}");
    }

    #[test]
    fn truncated_sampled_envelope_has_infinite_moment() {
        let env = SpectralEnvelope::sampled(-1.0, 0.25, vec![C64::new(1.0, 0.0); 9]).unwrap();
        assert!(matches!(env.position_moments(), Err(Error::InfiniteMoment(_))));
    }

    #[test]
    fn dilation_preserves_norm() {
        let s = sampled_gaussian(1.0, -10.0, 10.0, 0.01).normalize().unwrap();
        let d = s.dilate(0.5).unwrap();
        assert!((d.power() - 1.0).abs() < 1e-12);
        let g = SpectralEnvelope::gaussian(1.0).unwrap().dilate(0.5).unwrap();
        assert_eq!(g, SpectralEnvelope::Gaussian { kappa: 2.0, chirp: 0.0 });
    }
}
