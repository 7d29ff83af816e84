//! N-photon state representations and their amplitudes.
//!
//! Conventions: `psi(x) = int dk/sqrt(2 pi)^n phi(k) exp(i k.x)`, both unit
//! norm. The center-of-mass transform is `X = mean(x)`, `xi_i = x_i - X`
//! for `i < n`, with `xi_n = -sum(xi_i)` implied.

mod envelope;
mod grid;

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub use envelope::{SampledEnvelope, SpectralEnvelope, TRUNCATION_EDGE, ZERO_POWER};
pub use grid::GridState;

/// Photon number `N >= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct PhotonCount(usize);

impl PhotonCount {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("photon count must be >= 1"));
        }
        Ok(Self(n))
    }

    #[inline]
    pub fn get(self) -> usize {
        self.0
    }

    #[inline]
    pub fn as_f64(self) -> f64 {
        self.0 as f64
    }
}

impl TryFrom<usize> for PhotonCount {
    type Error = Error;
    fn try_from(n: usize) -> Result<Self> {
        Self::new(n)
    }
}

impl From<PhotonCount> for usize {
    fn from(n: PhotonCount) -> usize {
        n.0
    }
}

/// Propagating-wave cutoff `|k| <= 2 pi / lambda`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandLimit {
    pub lambda: f64,
}

impl BandLimit {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(invalid(format!("wavelength must be > 0, got {lambda}")));
        }
        Ok(Self { lambda })
    }

    pub fn k_max(&self) -> f64 {
        2.0 * PI / self.lambda
    }
}

/// Kerr soliton parameters. `ratio` is `c/b` (negative for a bound state),
/// `b_integral` the accumulated `int b dt` that sets the quantum-dispersion
/// chirp of the center-of-mass envelope.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolitonParams {
    pub ratio: f64,
    #[serde(default)]
    pub b_integral: f64,
    #[serde(default = "unit_q")]
    pub q: f64,
}

fn unit_q() -> f64 {
    1.0
}

impl SolitonParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.ratio.is_finite() && self.ratio < 0.0) {
            return Err(invalid(format!("soliton ratio c/b must be < 0, got {}", self.ratio)));
        }
        if !(self.q.is_finite() && self.q > 0.0) {
            return Err(invalid(format!("soliton q must be > 0, got {}", self.q)));
        }
        if !self.b_integral.is_finite() {
            return Err(invalid("soliton b_integral must be finite"));
        }
        Ok(())
    }

    /// `|c/b|`.
    #[inline]
    pub fn binding(&self) -> f64 {
        self.ratio.abs()
    }
}

/// Structured description of an N-photon state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateDoc", into = "StateDoc")]
pub enum StateSpec {
    /// Independent photons, `psi = prod f^(x_i)` with `f^` the transform of `envelope`.
    Product {
        n: PhotonCount,
        envelope: SpectralEnvelope,
    },
    /// `int dk G(k) |k,...,k>`; `psi' = g(N X)`.
    Coincident {
        n: PhotonCount,
        envelope: SpectralEnvelope,
    },
    Soliton {
        n: PhotonCount,
        envelope: SpectralEnvelope,
        params: SolitonParams,
    },
    Grid(GridState),
}

impl StateSpec {
    pub fn product(n: usize, envelope: SpectralEnvelope) -> Result<Self> {
        Ok(StateSpec::Product { n: PhotonCount::new(n)?, envelope: envelope.normalize()? })
    }

    pub fn coincident(n: usize, envelope: SpectralEnvelope) -> Result<Self> {
        Ok(StateSpec::Coincident { n: PhotonCount::new(n)?, envelope: envelope.normalize()? })
    }

    pub fn soliton(n: usize, envelope: SpectralEnvelope, params: SolitonParams) -> Result<Self> {
        params.validate()?;
        Ok(StateSpec::Soliton { n: PhotonCount::new(n)?, envelope: envelope.normalize()?, params })
    }

    pub fn n(&self) -> PhotonCount {
        match self {
            StateSpec::Product { n, .. } | StateSpec::Coincident { n, .. } | StateSpec::Soliton { n, .. } => *n,
            StateSpec::Grid(g) => g.n(),
        }
    }

    pub fn variant(&self) -> &'static str {
        match self {
            StateSpec::Product { .. } => "product",
            StateSpec::Coincident { .. } => "coincident",
            StateSpec::Soliton { .. } => "soliton",
            StateSpec::Grid(_) => "grid",
        }
    }

    pub fn envelope(&self) -> Option<&SpectralEnvelope> {
        match self {
            StateSpec::Product { envelope, .. }
            | StateSpec::Coincident { envelope, .. }
            | StateSpec::Soliton { envelope, .. } => Some(envelope),
            StateSpec::Grid(_) => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            StateSpec::Product { envelope, .. } | StateSpec::Coincident { envelope, .. } => envelope.validate(),
            StateSpec::Soliton { envelope, params, .. } => {
                envelope.validate()?;
                params.validate()
            }
            StateSpec::Grid(g) => g.validate(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Soliton amplitude prefactor `C = sqrt((N-1)! |c/b|^(N-1) / (2 pi))`.
pub fn soliton_prefactor(n: PhotonCount, ratio: f64) -> f64 {
    let n = n.get();
    let factorial: f64 = (1..n).map(|k| k as f64).product();
    (factorial * ratio.abs().powi(n as i32 - 1) / (2.0 * PI)).sqrt()
}

/// Center-of-mass coordinates of one configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct ComPoint {
    pub x_com: f64,
    /// Independent relative coordinates `xi_1 .. xi_{n-1}`.
    pub xi: Vec<f64>,
}

impl ComPoint {
    /// The dependent coordinate `xi_n = -sum(xi_i)`.
    pub fn xi_last(&self) -> f64 {
        -self.xi.iter().sum::<f64>()
    }
}

pub fn to_com(x: &[f64]) -> ComPoint {
    assert!(!x.is_empty(), "to_com needs at least one coordinate");
    let x_com = x.iter().sum::<f64>() / x.len() as f64;
    ComPoint { x_com, xi: x[..x.len() - 1].iter().map(|xi| xi - x_com).collect() }
}

pub fn from_com(p: &ComPoint, n: PhotonCount) -> Result<Vec<f64>> {
    if p.xi.len() + 1 != n.get() {
        return Err(Error::DimensionMismatch { expected: n.get() - 1, got: p.xi.len() });
    }
    let mut x: Vec<f64> = p.xi.iter().map(|xi| p.x_com + xi).collect();
    x.push(p.x_com + p.xi_last());
    Ok(x)
}

fn check_len(n: PhotonCount, got: usize) -> Result<()> {
    if got != n.get() {
        return Err(Error::DimensionMismatch { expected: n.get(), got });
    }
    Ok(())
}

/// Sum of pairwise distances `sum_{i<j} |x_i - x_j|`.
pub(crate) fn pair_distance_sum(x: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            s += (x[i] - x[j]).abs();
        }
    }
    s
}

/// Center-of-mass envelope of a soliton including its dispersion chirp
/// `exp(-i N k^2 int b dt)`.
pub(crate) fn soliton_com_envelope(
    n: PhotonCount,
    envelope: &SpectralEnvelope,
    params: &SolitonParams,
) -> SpectralEnvelope {
    envelope.with_chirp(-n.as_f64() * params.b_integral)
}

/// Unobservable binding-energy phase, `(c/b)^2 N (N^2 - 1) int b dt / 12`.
pub(crate) fn soliton_global_phase(n: PhotonCount, params: &SolitonParams) -> f64 {
    let nf = n.as_f64();
    params.ratio * params.ratio * nf * (nf * nf - 1.0) * params.b_integral / 12.0
}

/// Spatial amplitude `psi(x_1, ..., x_n)`.
pub fn eval_psi(state: &StateSpec, x: &[f64]) -> Result<C64> {
    let n = state.n();
    check_len(n, x.len())?;
    match state {
        StateSpec::Product { envelope, .. } => Ok(x.iter().map(|&xi| envelope.transform(xi)).product()),
        StateSpec::Coincident { envelope, .. } => {
            let com = x.iter().sum::<f64>() / n.as_f64();
            Ok(envelope.transform(n.as_f64() * com))
        }
        StateSpec::Soliton { envelope, params, .. } => {
            let com = x.iter().sum::<f64>() / n.as_f64();
            let g = soliton_com_envelope(n, envelope, params).transform(n.as_f64() * com);
            let rel = (params.ratio / 2.0 * pair_distance_sum(x)).exp();
            let c = soliton_prefactor(n, params.ratio) * (2.0 * PI).sqrt();
            Ok(g * rel * c * C64::cis(soliton_global_phase(n, params)))
        }
        StateSpec::Grid(g) => g.value_at(x),
    }
}

/// Largest photon number for which the soliton momentum amplitude is
/// summed over orderings.
pub const SOLITON_PHI_MAX_N: usize = 10;

/// Momentum amplitude `phi(k_1, ..., k_n)`.
pub fn eval_phi(state: &StateSpec, k: &[f64]) -> Result<C64> {
    let n = state.n();
    check_len(n, k.len())?;
    match state {
        StateSpec::Product { envelope, .. } => k.iter().map(|&ki| envelope.value(ki)).product::<Result<C64>>(),
        StateSpec::Coincident { .. } => Err(Error::DistributionalState),
        StateSpec::Soliton { envelope, params, .. } => soliton_phi(n, envelope, params, k),
        StateSpec::Grid(g) => Ok(g.momentum_amplitude(k)),
    }
}

/// The soliton factorizes into a center-of-mass part, transformed in closed
/// form, and the exponential relative part. Integrating the latter over
/// the zero-mean hyperplane splits into orderings of the photons: within
/// one ordering the gaps are independent exponentials, so each ordering
/// contributes a product of `1 / (a l (n - l) + i P_l)` with `P_l` the
/// momentum carried by the photons above gap `l`.
fn soliton_phi(n: PhotonCount, envelope: &SpectralEnvelope, params: &SolitonParams, k: &[f64]) -> Result<C64> {
    let nn = n.get();
    if nn > SOLITON_PHI_MAX_N {
        return Err(invalid(format!("soliton momentum amplitude is limited to n <= {SOLITON_PHI_MAX_N}")));
    }
    let nf = n.as_f64();
    let total: f64 = k.iter().sum();
    let k_com = total / nf;
    let rel: Vec<f64> = k.iter().map(|ki| ki - k_com).collect();
    let com_env = soliton_com_envelope(n, envelope, params);
    let g = com_env.value(k_com)?;

    let a = params.binding() / 2.0;
    let mut perm: Vec<usize> = (0..nn).collect();
    let mut ordering_sum = C64::new(0.0, 0.0);
    for_each_permutation(&mut perm, &mut |p| {
        let mut term = C64::new(1.0, 0.0);
        let mut above = 0.0;
        for l in (1..nn).rev() {
            above += rel[p[l]];
            let rate = a * (l * (nn - l)) as f64;
            term /= C64::new(rate, above);
        }
        ordering_sum += term;
    });
    let c = soliton_prefactor(n, params.ratio);
    let prefactor = (2.0 * PI).powf(1.0 - nf / 2.0) * c / nf;
    Ok(g * ordering_sum * prefactor * C64::cis(soliton_global_phase(n, params)))
}

/// Heap's algorithm.
fn for_each_permutation(items: &mut [usize], visit: &mut dyn FnMut(&[usize])) {
    let n = items.len();
    let mut c = vec![0usize; n];
    visit(items);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                items.swap(0, i);
            } else {
                items.swap(c[i], i);
            }
            visit(items);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BandReport {
    pub in_band_fraction: f64,
    pub pass: bool,
}

/// Out-of-band power allowed by [`band_limit_check`].
pub const BAND_TOLERANCE: f64 = 1e-6;

pub fn band_limit_check(env: &SpectralEnvelope, bl: &BandLimit) -> Result<BandReport> {
    let in_band_fraction = env.in_band_fraction(bl.k_max())?;
    Ok(BandReport { in_band_fraction, pass: 1.0 - in_band_fraction <= BAND_TOLERANCE })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum VariantTag {
    Product,
    Coincident,
    Soliton,
    Grid,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateDoc {
    variant: VariantTag,
    n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    envelope: Option<SpectralEnvelope>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    soliton: Option<SolitonParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    grid: Option<grid::GridDoc>,
}

impl TryFrom<StateDoc> for StateSpec {
    type Error = Error;

    fn try_from(doc: StateDoc) -> Result<Self> {
        let need_env = |env: Option<SpectralEnvelope>| env.ok_or_else(|| invalid("state needs an \"envelope\""));
        match doc.variant {
            VariantTag::Product => StateSpec::product(doc.n, need_env(doc.envelope)?),
            VariantTag::Coincident => StateSpec::coincident(doc.n, need_env(doc.envelope)?),
            VariantTag::Soliton => {
                let params = doc.soliton.ok_or_else(|| invalid("soliton state needs a \"soliton\" block"))?;
                params.validate()?;
                let envelope = match doc.envelope {
                    Some(env) => env,
                    None => crate::soliton::soliton_initial_envelope(PhotonCount::new(doc.n)?, params.ratio, params.q)?,
                };
                StateSpec::soliton(doc.n, envelope, params)
            }
            VariantTag::Grid => {
                let g = doc.grid.ok_or_else(|| invalid("grid state needs a \"grid\" block"))?;
                Ok(StateSpec::Grid(GridState::from_doc(doc.n, g)?))
            }
        }
    }
}

impl From<StateSpec> for StateDoc {
    fn from(s: StateSpec) -> Self {
        let n = s.n().get();
        match s {
            StateSpec::Product { envelope, .. } => {
                StateDoc { variant: VariantTag::Product, n, envelope: Some(envelope), soliton: None, grid: None }
            }
            StateSpec::Coincident { envelope, .. } => {
                StateDoc { variant: VariantTag::Coincident, n, envelope: Some(envelope), soliton: None, grid: None }
            }
            StateSpec::Soliton { envelope, params, .. } => StateDoc {
                variant: VariantTag::Soliton,
                n,
                envelope: Some(envelope),
                soliton: Some(params),
                grid: None,
            },
            StateSpec::Grid(g) => {
                StateDoc { variant: VariantTag::Grid, n, envelope: None, soliton: None, grid: Some(g.to_doc()) }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss(kappa: f64) -> SpectralEnvelope {
        SpectralEnvelope::gaussian(kappa).unwrap()
    }

    fn soliton(n: usize, ratio: f64, b: f64) -> StateSpec {
        StateSpec::soliton(n, gauss(1.0), SolitonParams { ratio, b_integral: b, q: 1.0 }).unwrap()
    }

    #[test]
    fn com_examples() {
        let p = to_com(&[1.0, 1.0, 1.0]);
        assert_eq!(p.x_com, 1.0);
        assert_eq!(p.xi, vec![0.0, 0.0]);
        let p = to_com(&[0.0, 2.0]);
        assert_eq!((p.x_com, p.xi.clone(), p.xi_last()), (1.0, vec![-1.0], 1.0));
        let n1 = PhotonCount::new(1).unwrap();
        assert_eq!(from_com(&ComPoint { x_com: 0.0, xi: vec![] }, n1).unwrap(), vec![0.0]);
        let n2 = PhotonCount::new(2).unwrap();
        assert_eq!(from_com(&ComPoint { x_com: 1.0, xi: vec![-1.0] }, n2).unwrap(), vec![0.0, 2.0]);
        assert!(matches!(from_com(&ComPoint { x_com: 1.0, xi: vec![] }, n2), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn product_peak_value() {
        let s = StateSpec::product(2, gauss(1.0)).unwrap();
        let v = eval_psi(&s, &[0.0, 0.0]).unwrap();
        assert!((v.norm() - 1.0 / PI.sqrt()).abs() < 1e-15);
        assert!(v.im.abs() < 1e-15 && v.re > 0.0);
    }

    #[test]
    fn soliton_prefactor_value() {
        let c = soliton_prefactor(PhotonCount::new(2).unwrap(), -2.0);
        assert!((c - (2.0 / (2.0 * PI)).sqrt()).abs() < 1e-15);
        assert!((c - 0.5641895835).abs() < 1e-9);
    }

    #[test]
    fn exchange_symmetry_all_variants() {
        let states = [
            StateSpec::product(3, gauss(1.3)).unwrap(),
            StateSpec::coincident(3, gauss(0.7)).unwrap(),
            StateSpec::coincident(3, SpectralEnvelope::dual_delta(1.0).unwrap()).unwrap(),
            soliton(3, -1.5, 0.4),
        ];
        let x = [0.31, -0.72, 0.05];
        for s in &states {
            let a = eval_psi(s, &x).unwrap();
            let b = eval_psi(s, &[x[2], x[0], x[1]]).unwrap();
            assert!((a - b).norm() < 1e-12, "{}", s.variant());
        }
        let k = [0.2, -0.4, 0.9];
        for s in [&states[0], &states[3]] {
            let a = eval_phi(s, &k).unwrap();
            let b = eval_phi(s, &[k[1], k[2], k[0]]).unwrap();
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn product_phi_at_origin() {
        for n in 1..5 {
            let s = StateSpec::product(n, gauss(1.0)).unwrap();
            let v = eval_phi(&s, &vec![0.0; n]).unwrap();
            assert!((v.re - PI.powf(-(n as f64) / 4.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn coincident_phi_is_distributional() {
        let s = StateSpec::coincident(2, gauss(1.0)).unwrap();
        assert!(matches!(eval_phi(&s, &[0.0, 0.0]), Err(Error::DistributionalState)));
    }

    #[test]
    fn soliton_phi_n2_closed_form() {
        // phi = G(K/2) * (r/2) / (r^2/4 + p^2) * C / 2 with p = (k1 - k2)/2
        let s = soliton(2, -2.0, 0.0);
        let (k1, k2) = (0.4, -0.1);
        let r = 2.0;
        let p = 0.5 * (k1 - k2);
        let c = soliton_prefactor(PhotonCount::new(2).unwrap(), -2.0);
        let g = gauss(1.0).value(0.5 * (k1 + k2)).unwrap();
        let expected = g * c * (r / 2.0) / (r * r / 4.0 + p * p);
        let got = eval_phi(&s, &[k1, k2]).unwrap();
        assert!((got - expected).norm() < 1e-14, "{got} vs {expected}");
    }

    #[test]
    fn single_photon_soliton_is_wavepacket() {
        let s = soliton(1, -2.0, 0.0);
        let p = StateSpec::product(1, gauss(1.0)).unwrap();
        for x in [0.0, 0.7, -1.4] {
            let a = eval_psi(&s, &[x]).unwrap();
            let b = eval_psi(&p, &[x]).unwrap();
            assert!((a - b).norm() < 1e-14);
        }
        let a = eval_phi(&s, &[0.3]).unwrap();
        assert!((a - gauss(1.0).value(0.3).unwrap()).norm() < 1e-14);
    }

    #[test]
    fn band_limit_examples() {
        let bl = BandLimit::new(1.0).unwrap();
        let km = bl.k_max();
        let r = band_limit_check(&gauss(km / 8.0), &bl).unwrap();
        assert!(r.pass);
        let r = band_limit_check(&SpectralEnvelope::dual_delta(1.5 * km).unwrap(), &bl).unwrap();
        assert_eq!(r.in_band_fraction, 0.0);
        assert!(!r.pass);
    }

    #[test]
    fn state_json_round_trip() {
        let s = soliton(3, -1.0, 0.25);
        let text = s.to_json().unwrap();
        let back = StateSpec::from_json(&text).unwrap();
        assert_eq!(s, back);
        let doc = r#"{"variant":"soliton","n":4,"soliton":{"ratio":-1.0}}"#;
        let s = StateSpec::from_json(doc).unwrap();
        let StateSpec::Soliton { envelope, .. } = s else { panic!() };
        assert_eq!(envelope, SpectralEnvelope::Gaussian { kappa: 1.0, chirp: 0.0 });
        assert!(
            StateSpec::from_json(r#"{"variant":"product","n":0,"envelope":{"type":"gaussian","kappa":1}}"#).is_err()
        );
        assert!(StateSpec::from_json(r#"{"variant":"soliton","n":2,"soliton":{"ratio":1.0}}"#).is_err());
    }
}
