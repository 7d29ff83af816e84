//! Kerr-soliton states, adiabatic expansion and quantum-dispersion
//! bookkeeping.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::observables::{conditional_width, marginal_width, relative_spread_with, MonteCarloConfig};
use crate::state::{PhotonCount, SolitonParams, SpectralEnvelope, StateSpec};

/// Compensation is considered complete below this residual `int b dt`.
pub const RESIDUAL_TOLERANCE: f64 = 1e-12;

/// Gaussian with `kappa = sqrt(n / (4 q)) |ratio|`.
pub fn soliton_initial_envelope(n: PhotonCount, ratio: f64, q: f64) -> Result<SpectralEnvelope> {
    SolitonParams { ratio, b_integral: 0.0, q }.validate()?;
    SpectralEnvelope::gaussian((n.as_f64() / (4.0 * q)).sqrt() * ratio.abs())
}

pub fn make_soliton(n: usize, ratio: f64, q: f64, b_integral: f64) -> Result<StateSpec> {
    let count = PhotonCount::new(n)?;
    let envelope = soliton_initial_envelope(count, ratio, q)?;
    StateSpec::soliton(n, envelope, SolitonParams { ratio, b_integral, q })
}

fn soliton_parts(state: &StateSpec, op: &'static str) -> Result<(PhotonCount, SpectralEnvelope, SolitonParams)> {
    match state {
        StateSpec::Soliton { n, envelope, params } => Ok((*n, envelope.clone(), *params)),
        other => Err(Error::UnsupportedVariant { op, variant: other.variant() }),
    }
}

/// Adds `delta` to the accumulated `int b dt`.
pub fn apply_dispersion(state: &StateSpec, delta: f64) -> Result<StateSpec> {
    shift_b_integral(state, delta, "apply_dispersion")
}

/// Adds the (normally negative) `int b' dt` of a compensating medium.
pub fn compensate_dispersion(state: &StateSpec, b_prime_integral: f64) -> Result<StateSpec> {
    shift_b_integral(state, b_prime_integral, "compensate_dispersion")
}

fn shift_b_integral(state: &StateSpec, delta: f64, op: &'static str) -> Result<StateSpec> {
    if !delta.is_finite() {
        return Err(invalid(format!("{op}: dispersion integral must be finite")));
    }
    let (n, envelope, params) = soliton_parts(state, op)?;
    Ok(StateSpec::Soliton { n, envelope, params: SolitonParams { b_integral: params.b_integral + delta, ..params } })
}

/// Ideal coincident width over the soliton's effective width, both taken
/// from per-photon momentum spreads.
///
/// Each photon momentum splits as `k_i = K/n + p_i`, with `K/n` distributed
/// by `|G|^2` and the relative momenta contributing
/// `Var(p_i) = ratio^2 (n^2 - 1) / 12`. The metric is
/// `sqrt(Var_G / (Var_G + Var(p_i)))`, which is 1 at `n = 1` and tends to 1
/// as the binding vanishes.
pub fn uql_convergence_metric(state: &StateSpec) -> Result<f64> {
    let (n, envelope, params) = soliton_parts(state, "uql_convergence_metric")?;
    if params.b_integral.abs() > RESIDUAL_TOLERANCE {
        return Err(Error::ResidualDispersion(params.b_integral));
    }
    let nf = n.as_f64();
    let (_, var_g) = envelope.momentum_moments()?;
    let var_p = params.ratio * params.ratio * (nf * nf - 1.0) / 12.0;
    Ok((var_g / (var_g + var_p)).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpansionSchedule {
    pub ratio_initial: f64,
    pub ratio_final: f64,
    pub steps: usize,
    /// One `[duration, b]` pair per step, or empty for no dispersion.
    #[serde(default)]
    pub b_profile: Vec<[f64; 2]>,
}

impl ExpansionSchedule {
    pub fn validate(&self) -> Result<()> {
        let mismatch = |m: String| Err(Error::ScheduleMismatch(m));
        if !(self.ratio_initial.is_finite() && self.ratio_initial < 0.0)
            || !(self.ratio_final.is_finite() && self.ratio_final < 0.0)
        {
            return mismatch("schedule ratios must be negative".into());
        }
        if self.ratio_final.abs() >= self.ratio_initial.abs() {
            return mismatch(format!(
                "|ratio_final| {} must be below |ratio_initial| {}",
                self.ratio_final.abs(),
                self.ratio_initial.abs()
            ));
        }
        if self.steps == 0 {
            return mismatch("schedule needs at least one step".into());
        }
        if !self.b_profile.is_empty() && self.b_profile.len() != self.steps {
            return mismatch(format!("b_profile has {} entries for {} steps", self.b_profile.len(), self.steps));
        }
        for [dt, b] in &self.b_profile {
            if !(dt.is_finite() && *dt >= 0.0) || !b.is_finite() {
                return mismatch(format!("b_profile entry [{dt}, {b}] is invalid"));
            }
        }
        Ok(())
    }

    /// Ratio after `step` of `steps` (1-based), geometric in `|ratio|`.
    pub fn ratio_at(&self, step: usize) -> f64 {
        if step >= self.steps {
            return self.ratio_final;
        }
        let t = step as f64 / self.steps as f64;
        self.ratio_initial * (self.ratio_final / self.ratio_initial).powf(t)
    }

    /// `int b dt` contributed by `step` (1-based).
    pub fn b_increment(&self, step: usize) -> f64 {
        self.b_profile.get(step - 1).map_or(0.0, |[dt, b]| dt * b)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Self = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }
}

/// Adiabatic parameter transport: one state per step, envelope untouched.
pub fn expand(state: &StateSpec, schedule: &ExpansionSchedule) -> Result<Vec<StateSpec>> {
    schedule.validate()?;
    let (n, envelope, params) = soliton_parts(state, "expand")?;
    let tol = 1e-12 * params.ratio.abs();
    if (schedule.ratio_initial - params.ratio).abs() > tol {
        return Err(Error::ScheduleMismatch(format!(
            "schedule starts at ratio {} but the state has {}",
            schedule.ratio_initial, params.ratio
        )));
    }
    // The dispersion integral is a prefix sum and is accumulated in order.
    let mut b_integral = params.b_integral;
    let mut out = Vec::with_capacity(schedule.steps);
    for step in 1..=schedule.steps {
        b_integral += schedule.b_increment(step);
        out.push(StateSpec::Soliton {
            n,
            envelope: envelope.clone(),
            params: SolitonParams { ratio: schedule.ratio_at(step), b_integral, q: params.q },
        });
    }
    Ok(out)
}

/// Running dispersion totals; the residual is their plain sum.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DispersionLedger {
    pub accumulated: f64,
    pub compensated: f64,
}

impl DispersionLedger {
    pub fn accumulate(&mut self, b_integral: f64) {
        self.accumulated += b_integral;
    }

    pub fn compensate(&mut self, b_prime_integral: f64) {
        self.compensated += b_prime_integral;
    }

    pub fn residual(&self) -> f64 {
        self.accumulated + self.compensated
    }
}

/// One row of the expansion table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionRow {
    pub step: usize,
    pub ratio: f64,
    pub b_integral: f64,
    pub marginal_width: f64,
    pub conditional_width: f64,
    pub delta_xi_rms: f64,
    /// Metric of the same step with its dispersion fully compensated.
    pub uql_metric: f64,
}

pub fn expansion_table(
    state: &StateSpec,
    schedule: &ExpansionSchedule,
    mc: &MonteCarloConfig,
) -> Result<Vec<ExpansionRow>> {
    let states = expand(state, schedule)?;
    states
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let (n, _, params) = soliton_parts(s, "expand")?;
            let delta_xi_rms = if n.get() < 2 { 0.0 } else { relative_spread_with(s, mc)?.rms() };
            let compensated = compensate_dispersion(s, -params.b_integral)?;
            Ok(ExpansionRow {
                step: i + 1,
                ratio: params.ratio,
                b_integral: params.b_integral,
                marginal_width: marginal_width(s)?,
                conditional_width: conditional_width(s)?,
                delta_xi_rms,
                uql_metric: uql_convergence_metric(&compensated)?,
            })
        })
        .collect()
}
