//! 4f imaging chain: Fourier-plane mapping, transfer-function modulation of
//! coincident-momentum states, quadratic-phase compensation and
//! demagnification. Everything operates on k-space envelopes.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numeric::UniformGrid;
use crate::soliton::{expand, DispersionLedger, ExpansionSchedule};
use crate::state::{BandLimit, PhotonCount, SampledEnvelope, SolitonParams, SpectralEnvelope, StateSpec, ZERO_POWER};

/// Coverage required of a sampled transfer grid over the envelope power.
pub const COVERAGE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LensPair {
    pub f1: f64,
    pub f2: f64,
    pub lambda: f64,
}

impl LensPair {
    pub fn new(f1: f64, f2: f64, lambda: f64) -> Result<Self> {
        let lens = Self { f1, f2, lambda };
        lens.validate()?;
        Ok(lens)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("f1", self.f1), ("f2", self.f2), ("lambda", self.lambda)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(format!("lens {name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Demagnification `m = f2 / f1`.
    pub fn magnification(&self) -> f64 {
        self.f2 / self.f1
    }

    /// Fourier-plane position per unit wavenumber, `lambda f1 / (2 pi)`.
    pub fn fourier_scale(&self) -> f64 {
        self.lambda * self.f1 / (2.0 * PI)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Transfer {
    /// Per-photon `H(k) = exp(i coefficient k^2)`.
    QuadraticPhase { coefficient: f64 },
    /// Samples of `H` on a uniform k-grid; zero outside.
    Sampled(SampledEnvelope),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferFunction {
    #[serde(flatten)]
    pub repr: Transfer,
    #[serde(default)]
    pub description: String,
}

pub fn quadratic_phase(coefficient: f64) -> TransferFunction {
    TransferFunction {
        repr: Transfer::QuadraticPhase { coefficient },
        description: format!("quadratic phase exp(i {coefficient} k^2)"),
    }
}

impl TransferFunction {
    pub fn sampled(k_min: f64, dk: f64, values: Vec<C64>, description: impl Into<String>) -> Result<Self> {
        Ok(Self { repr: Transfer::Sampled(SampledEnvelope::new(k_min, dk, values)?), description: description.into() })
    }

    pub fn validate(&self) -> Result<()> {
        match &self.repr {
            Transfer::QuadraticPhase { coefficient } if !coefficient.is_finite() => {
                Err(invalid("quadratic phase coefficient must be finite"))
            }
            Transfer::QuadraticPhase { .. } => Ok(()),
            Transfer::Sampled(s) => s.validate(),
        }
    }

    pub fn value(&self, k: f64) -> C64 {
        match &self.repr {
            Transfer::QuadraticPhase { coefficient } => C64::cis(coefficient * k * k),
            Transfer::Sampled(s) => s.interpolate(k),
        }
    }

    pub fn is_identity(&self) -> bool {
        match &self.repr {
            Transfer::QuadraticPhase { coefficient } => *coefficient == 0.0,
            Transfer::Sampled(s) => s.values.iter().all(|v| *v == C64::new(1.0, 0.0)),
        }
    }

    /// Largest `|H|` on its support.
    pub fn max_abs(&self) -> f64 {
        match &self.repr {
            Transfer::QuadraticPhase { .. } => 1.0,
            Transfer::Sampled(s) => s.values.iter().map(|v| v.norm()).fold(0.0, f64::max),
        }
    }

    /// Pointwise product; sampled factors must share a grid.
    pub fn compose(&self, other: &TransferFunction) -> Result<TransferFunction> {
        let repr = match (&self.repr, &other.repr) {
            (Transfer::QuadraticPhase { coefficient: a }, Transfer::QuadraticPhase { coefficient: b }) => {
                Transfer::QuadraticPhase { coefficient: a + b }
            }
            (Transfer::Sampled(s), q @ Transfer::QuadraticPhase { .. })
            | (q @ Transfer::QuadraticPhase { .. }, Transfer::Sampled(s)) => {
                let q = TransferFunction { repr: q.clone(), description: String::new() };
                let values = s.values.iter().enumerate().map(|(j, v)| v * q.value(s.k(j))).collect();
                Transfer::Sampled(SampledEnvelope { values, ..s.clone() })
            }
            (Transfer::Sampled(a), Transfer::Sampled(b)) => {
                if !a.same_grid(b) {
                    return Err(Error::GridMismatch("composed transfer functions use different k-grids".into()));
                }
                let values = a.values.iter().zip(&b.values).map(|(x, y)| x * y).collect();
                Transfer::Sampled(SampledEnvelope { values, ..a.clone() })
            }
        };
        Ok(TransferFunction { repr, description: format!("({}) * ({})", self.description, other.description) })
    }

    /// `H^n` pointwise.
    pub fn powu(&self, n: u32) -> TransferFunction {
        let repr = match &self.repr {
            Transfer::QuadraticPhase { coefficient } => {
                Transfer::QuadraticPhase { coefficient: coefficient * n as f64 }
            }
            Transfer::Sampled(s) => {
                Transfer::Sampled(SampledEnvelope { values: s.values.iter().map(|v| v.powu(n)).collect(), ..s.clone() })
            }
        };
        TransferFunction { repr, description: format!("({})^{n}", self.description) }
    }
}

/// Side information from one modulation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulationReport {
    /// `int |G H^n|^2 dk` for unit-power `G`.
    pub transmitted: f64,
    pub norm_loss: f64,
    pub max_abs_h: f64,
    /// `|H| > 1` somewhere: the filter adds power.
    pub non_passive: bool,
}

impl ModulationReport {
    fn lossless() -> Self {
        Self { transmitted: 1.0, norm_loss: 0.0, max_abs_h: 1.0, non_passive: false }
    }
}

pub fn apply_modulation(state: &StateSpec, h: &TransferFunction) -> Result<StateSpec> {
    apply_modulation_report(state, h).map(|(s, _)| s)
}

/// Coincident states acquire `G H^n` (renormalized). A quadratic phase on a
/// soliton advances its compensation: coefficient `B` cancels
/// `b_integral = B`.
pub fn apply_modulation_report(state: &StateSpec, h: &TransferFunction) -> Result<(StateSpec, ModulationReport)> {
    h.validate()?;
    match (state, &h.repr) {
        (StateSpec::Coincident { n, envelope }, _) => {
            if h.is_identity() {
                return Ok((state.clone(), ModulationReport::lossless()));
            }
            let (out, report) = modulate_envelope(envelope, h, *n)?;
            Ok((StateSpec::Coincident { n: *n, envelope: out }, report))
        }
        (StateSpec::Soliton { n, envelope, params }, Transfer::QuadraticPhase { coefficient }) => Ok((
            StateSpec::Soliton {
                n: *n,
                envelope: envelope.clone(),
                params: SolitonParams { b_integral: params.b_integral - coefficient, ..*params },
            },
            ModulationReport::lossless(),
        )),
        _ => Err(Error::UnsupportedVariant { op: "apply_modulation", variant: state.variant() }),
    }
}

fn modulate_envelope(
    envelope: &SpectralEnvelope,
    h: &TransferFunction,
    n: PhotonCount,
) -> Result<(SpectralEnvelope, ModulationReport)> {
    let power_in = envelope.power();
    match &h.repr {
        Transfer::QuadraticPhase { coefficient } => {
            Ok((envelope.with_chirp(coefficient * n.as_f64()), ModulationReport::lossless()))
        }
        Transfer::Sampled(hs) => {
            let g = envelope_on_grid(envelope, hs)?;
            let values: Vec<C64> = g.iter().zip(&hs.values).map(|(gv, hv)| gv * hv.powu(n.get() as u32)).collect();
            let out = SampledEnvelope::new(hs.k_min, hs.dk, values)?;
            let transmitted = out.power() / power_in;
            if !(out.power() >= ZERO_POWER) {
                return Err(Error::ZeroEnvelope(out.power()));
            }
            let max_abs_h = h.max_abs();
            let report = ModulationReport {
                transmitted,
                norm_loss: 1.0 - transmitted,
                max_abs_h,
                non_passive: max_abs_h > 1.0 + 1e-12,
            };
            Ok((SpectralEnvelope::Sampled(out).normalize()?, report))
        }
    }
}

/// Envelope samples on the transfer grid; the grid must hold the envelope's
/// power.
fn envelope_on_grid(envelope: &SpectralEnvelope, grid: &SampledEnvelope) -> Result<Vec<C64>> {
    if let SpectralEnvelope::Sampled(s) = envelope {
        if s.same_grid(grid) {
            return Ok(s.values.clone());
        }
    }
    let sampled = envelope.sample_on(&grid.grid())?;
    let covered = sampled.power() / envelope.power();
    if (1.0 - covered).abs() > COVERAGE_TOLERANCE.max(grid.dk * grid.dk * 1e-3) {
        return Err(Error::GridMismatch(format!(
            "transfer grid [{}, {}] holds only {covered} of the envelope power",
            grid.k_min,
            grid.k_max()
        )));
    }
    Ok(sampled.values)
}

/// `G_out(k) = sqrt(m) G(m k)` with `m = f2 / f1`.
pub fn demagnify(env: &SpectralEnvelope, lens: &LensPair) -> Result<SpectralEnvelope> {
    lens.validate()?;
    let m = lens.magnification();
    if m == 1.0 {
        return Ok(env.clone());
    }
    env.dilate(m)
}

/// Shrinks every spatial coordinate by `m`. Soliton binding and dispersion
/// rescale with the coordinates.
pub fn demagnify_state(state: &StateSpec, m: f64) -> Result<StateSpec> {
    if !(m.is_finite() && m > 0.0) {
        return Err(invalid(format!("magnification must be > 0, got {m}")));
    }
    if m == 1.0 {
        return Ok(state.clone());
    }
    Ok(match state {
        StateSpec::Product { n, envelope } => StateSpec::Product { n: *n, envelope: envelope.dilate(m)? },
        StateSpec::Coincident { n, envelope } => StateSpec::Coincident { n: *n, envelope: envelope.dilate(m)? },
        StateSpec::Soliton { n, envelope, params } => StateSpec::Soliton {
            n: *n,
            envelope: envelope.dilate(m)?,
            params: SolitonParams { ratio: params.ratio / m, b_integral: params.b_integral * m * m, q: params.q },
        },
        StateSpec::Grid(_) => return Err(Error::UnsupportedVariant { op: "demagnify", variant: state.variant() }),
    })
}

/// Field in the Fourier plane of the first lens.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FourierPlaneField {
    /// `u(x) = G(2 pi x / (lambda f1)) sqrt(2 pi / (lambda f1))`, unit norm in x.
    Field { x_grid: UniformGrid, values: Vec<C64> },
    /// Point spots of a delta-valued envelope.
    Spots { positions: Vec<f64>, weights: Vec<C64> },
}

pub const FOURIER_PLANE_POINTS: usize = 1025;

pub fn fourier_plane_map(env: &SpectralEnvelope, lens: &LensPair, points: usize) -> Result<FourierPlaneField> {
    lens.validate()?;
    let s = lens.fourier_scale();
    let (k_lo, k_hi) = match env {
        SpectralEnvelope::Gaussian { kappa, .. } => (-12.0 * kappa, 12.0 * kappa),
        SpectralEnvelope::Sampled(sm) => (sm.k_min, sm.k_max()),
        SpectralEnvelope::DualDelta { k0, weights } => {
            return Ok(FourierPlaneField::Spots { positions: vec![k0 * s, -k0 * s], weights: weights.to_vec() });
        }
    };
    let x_grid = UniformGrid::spanning(k_lo * s, k_hi * s, points)?;
    let jac = s.recip().sqrt();
    let values = x_grid.coords().iter().map(|x| env.value(x / s).map(|v| v * jac)).collect::<Result<_>>()?;
    Ok(FourierPlaneField::Field { x_grid, values })
}

/// One element of an imaging chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", content = "params", rename_all = "snake_case")]
pub enum ChainStep {
    /// Adiabatic soliton expansion; `to_uql` then takes the vanishing-binding
    /// limit, leaving a coincident-momentum state with the same envelope.
    Expand {
        schedule: ExpansionSchedule,
        #[serde(default)]
        to_uql: bool,
    },
    /// Adds `int b' dt`; absent means cancel the running residual.
    Compensate {
        #[serde(default)]
        b_prime_integral: Option<f64>,
    },
    Modulate {
        transfer: TransferFunction,
    },
    Demagnify {
        f1: f64,
        f2: f64,
    },
    /// Fourier-plane diagnostic; leaves the state unchanged.
    Map {
        lens: LensPair,
    },
}

impl ChainStep {
    pub fn name(&self) -> &'static str {
        match self {
            ChainStep::Expand { .. } => "expand",
            ChainStep::Compensate { .. } => "compensate",
            ChainStep::Modulate { .. } => "modulate",
            ChainStep::Demagnify { .. } => "demagnify",
            ChainStep::Map { .. } => "map",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub index: usize,
    pub op: String,
    pub variant: String,
    /// Envelope power after the step.
    pub norm: f64,
    /// Power removed by an amplitude mask before renormalization.
    pub norm_loss: f64,
    pub band_fraction: Option<f64>,
    pub residual: f64,
    pub non_passive: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainResult {
    pub state: StateSpec,
    pub ledger: DispersionLedger,
    pub audit: Vec<AuditEntry>,
}

pub fn chain(state: &StateSpec, steps: &[ChainStep], band: Option<&BandLimit>) -> Result<ChainResult> {
    let mut ledger = DispersionLedger::default();
    if let StateSpec::Soliton { params, .. } = state {
        ledger.accumulate(params.b_integral);
    }
    let mut current = state.clone();
    let mut audit = Vec::with_capacity(steps.len());
    for (index, step) in steps.iter().enumerate() {
        let (next, report) =
            run_step(&current, step, &mut ledger).map_err(|e| Error::ChainStep { index, source: Box::new(e) })?;
        current = next;
        let envelope = current.envelope();
        let band_fraction = match (band, envelope) {
            (Some(b), Some(env)) => {
                Some(env.in_band_fraction(b.k_max()).map_err(|e| Error::ChainStep { index, source: Box::new(e) })?)
            }
            _ => None,
        };
        audit.push(AuditEntry {
            index,
            op: step.name().to_string(),
            variant: current.variant().to_string(),
            norm: envelope.map_or(1.0, SpectralEnvelope::power),
            norm_loss: report.norm_loss,
            band_fraction,
            residual: ledger.residual(),
            non_passive: report.non_passive,
        });
    }
    Ok(ChainResult { state: current, ledger, audit })
}

fn run_step(
    state: &StateSpec,
    step: &ChainStep,
    ledger: &mut DispersionLedger,
) -> Result<(StateSpec, ModulationReport)> {
    let lossless = ModulationReport::lossless();
    match step {
        ChainStep::Expand { schedule, to_uql } => {
            let before = match state {
                StateSpec::Soliton { params, .. } => params.b_integral,
                _ => 0.0,
            };
            let last = expand(state, schedule)?.pop().ok_or_else(|| invalid("schedule produced no states"))?;
            let StateSpec::Soliton { n, envelope, params } = last else { unreachable!("expand yields solitons") };
            ledger.accumulate(params.b_integral - before);
            if *to_uql {
                let chirped = envelope.with_chirp(-n.as_f64() * params.b_integral);
                Ok((StateSpec::Coincident { n, envelope: chirped }, lossless))
            } else {
                Ok((StateSpec::Soliton { n, envelope, params }, lossless))
            }
        }
        ChainStep::Compensate { b_prime_integral } => {
            let b_prime = b_prime_integral.unwrap_or(-ledger.residual());
            if !b_prime.is_finite() {
                return Err(invalid("compensation integral must be finite"));
            }
            let next = match state {
                StateSpec::Soliton { .. } => crate::soliton::compensate_dispersion(state, b_prime)?,
                StateSpec::Coincident { n, envelope } => {
                    StateSpec::Coincident { n: *n, envelope: envelope.with_chirp(-n.as_f64() * b_prime) }
                }
                _ => return Err(Error::UnsupportedVariant { op: "compensate", variant: state.variant() }),
            };
            ledger.compensate(b_prime);
            Ok((next, lossless))
        }
        ChainStep::Modulate { transfer } => {
            let (next, report) = apply_modulation_report(state, transfer)?;
            if let (StateSpec::Soliton { .. }, Transfer::QuadraticPhase { coefficient }) = (state, &transfer.repr) {
                ledger.compensate(-coefficient);
            }
            Ok((next, report))
        }
        ChainStep::Demagnify { f1, f2 } => {
            if !(f1.is_finite() && *f1 > 0.0 && f2.is_finite() && *f2 > 0.0) {
                return Err(invalid(format!("focal lengths must be > 0, got f1={f1}, f2={f2}")));
            }
            let m = f2 / f1;
            let next = demagnify_state(state, m)?;
            // dispersion integrals rescale with the coordinates
            let m2 = m * m;
            *ledger = DispersionLedger { accumulated: ledger.accumulated * m2, compensated: ledger.compensated * m2 };
            Ok((next, lossless))
        }
        ChainStep::Map { lens } => {
            let env = state.envelope().ok_or(Error::UnsupportedVariant { op: "map", variant: state.variant() })?;
            fourier_plane_map(env, lens, FOURIER_PLANE_POINTS)?;
            Ok((state.clone(), lossless))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::marginal_width;

    fn gauss(kappa: f64) -> SpectralEnvelope {
        SpectralEnvelope::gaussian(kappa).unwrap()
    }

    fn mask(kmin: f64, kmax: f64, points: usize, f: impl Fn(f64) -> C64) -> TransferFunction {
        let dk = (kmax - kmin) / (points - 1) as f64;
        let values = (0..points).map(|j| f(kmin + j as f64 * dk)).collect();
        TransferFunction::sampled(kmin, dk, values, "mask").unwrap()
    }

    #[test]
    fn identity_filters() {
        let c = StateSpec::coincident(2, gauss(1.0)).unwrap();
        assert_eq!(apply_modulation(&c, &quadratic_phase(0.0)).unwrap(), c);
        assert_eq!(apply_modulation(&c, &mask(-12.0, 12.0, 101, |_| C64::new(1.0, 0.0))).unwrap(), c);
    }

    #[test]
    fn gaussian_mask_narrows_envelope() {
        let c = StateSpec::coincident(2, gauss(1.0)).unwrap();
        let h = mask(-14.0, 14.0, 4001, |k| C64::new((-k * k / 2.0).exp(), 0.0));
        let (out, report) = apply_modulation_report(&c, &h).unwrap();
        let expected = gauss(1.0 / 3f64.sqrt());
        for k in [0.0, 0.42, 1.4] {
            let got = out.envelope().unwrap().value(k).unwrap();
            assert!((got - expected.value(k).unwrap()).norm() < 1e-6, "{k}");
        }
        // int |G H^2|^2 = pi^{-1/2} int exp(-3 k^2) = 1/sqrt(3)
        assert!((report.transmitted - 1.0 / 3f64.sqrt()).abs() < 1e-9);
        assert!(!report.non_passive);
    }

    #[test]
    fn phase_only_preserves_power() {
        let c = StateSpec::coincident(3, gauss(1.0)).unwrap();
        let h = mask(-14.0, 14.0, 2001, |k| C64::cis(0.3 * k.powi(3)));
        let (_, report) = apply_modulation_report(&c, &h).unwrap();
        assert!(report.norm_loss.abs() < 1e-12);
    }

    #[test]
    fn exponent_law() {
        let c = StateSpec::coincident(2, gauss(1.0)).unwrap();
        let h = mask(-14.0, 14.0, 801, |k| C64::from_polar((-0.1 * k * k).exp(), 0.2 * k));
        let twice = apply_modulation(&apply_modulation(&c, &h).unwrap(), &h).unwrap();
        let once = apply_modulation(&c, &h.compose(&h).unwrap()).unwrap();
        let (SpectralEnvelope::Sampled(a), SpectralEnvelope::Sampled(b)) =
            (twice.envelope().unwrap(), once.envelope().unwrap())
        else {
            panic!()
        };
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn unsupported_variants() {
        let p = StateSpec::product(2, gauss(1.0)).unwrap();
        assert!(matches!(apply_modulation(&p, &quadratic_phase(1.0)), Err(Error::UnsupportedVariant { .. })));
        let s = crate::soliton::make_soliton(2, -1.0, 1.0, 0.0).unwrap();
        let h = mask(-5.0, 5.0, 11, |_| C64::new(1.0, 0.0));
        assert!(matches!(apply_modulation(&s, &h), Err(Error::UnsupportedVariant { .. })));
    }

    #[test]
    fn quadratic_phase_cancels_soliton_dispersion() {
        let s = crate::soliton::make_soliton(2, -1.0, 1.0, 0.0).unwrap();
        let dispersed = crate::soliton::apply_dispersion(&s, 1.0).unwrap();
        let restored = apply_modulation(&dispersed, &quadratic_phase(1.0)).unwrap();
        assert_eq!(marginal_width(&restored).unwrap(), marginal_width(&s).unwrap());
        let q = quadratic_phase(0.25).compose(&quadratic_phase(0.5)).unwrap();
        assert_eq!(q.repr, Transfer::QuadraticPhase { coefficient: 0.75 });
    }

    #[test]
    fn demagnify_gaussian() {
        let lens = LensPair::new(1.0, 0.5, 1.0).unwrap();
        let out = demagnify(&gauss(1.0), &lens).unwrap();
        assert_eq!(out, SpectralEnvelope::Gaussian { kappa: 2.0, chirp: 0.0 });
        assert!((out.power() - 1.0).abs() < 1e-15);
        let same = LensPair::new(2.0, 2.0, 1.0).unwrap();
        assert_eq!(demagnify(&gauss(1.3), &same).unwrap(), gauss(1.3));
    }

    #[test]
    fn fourier_plane_spots() {
        let lens = LensPair::new(2.0, 1.0, 0.5).unwrap();
        let FourierPlaneField::Spots { positions, .. } =
            fourier_plane_map(&SpectralEnvelope::dual_delta(3.0).unwrap(), &lens, 101).unwrap()
        else {
            panic!()
        };
        assert!((positions[0] - 3.0 / (2.0 * PI)).abs() < 1e-15);
        assert!((positions[1] + 3.0 / (2.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn empty_chain_is_identity() {
        let s = crate::soliton::make_soliton(3, -1.0, 1.0, 0.5).unwrap();
        let r = chain(&s, &[], None).unwrap();
        assert_eq!(r.state, s);
        assert!(r.audit.is_empty());
        assert_eq!(r.ledger.residual(), 0.5);
    }

    #[test]
    fn chain_errors_carry_index() {
        let p = StateSpec::product(2, gauss(1.0)).unwrap();
        let steps = [ChainStep::Demagnify { f1: 1.0, f2: 0.5 }, ChainStep::Compensate { b_prime_integral: None }];
        let err = chain(&p, &steps, None).unwrap_err();
        assert!(matches!(err, Error::ChainStep { index: 1, .. }));
        assert_eq!(err.kind(), "UnsupportedVariant");
    }

    #[test]
    fn chain_json_shape() {
        let json = r#"[{"op":"compensate","params":{}},{"op":"demagnify","params":{"f1":1,"f2":0.5}},
            {"op":"modulate","params":{"transfer":{"type":"quadratic_phase","coefficient":0.1}}}]"#;
        let steps: Vec<ChainStep> = serde_json::from_str(json).unwrap();
        assert_eq!(steps.len(), 3);
        assert_eq!(steps[0], ChainStep::Compensate { b_prime_integral: None });
    }
}
