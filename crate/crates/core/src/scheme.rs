//! Regimes, layer exponents, PAM constellations and the two encoders.
//!
//! Transmitter 1 splits its symbol into up to three PAM layers `v_c`, `v_m`,
//! `v_p`; the helper sends `u_c` and `u_p`, which arrive at receiver 2 with
//! the same coefficient as `v_c` and `v_m` respectively.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::ChannelParams;
use crate::{Error, Result};

pub const DEFAULT_GAMMA: f64 = 1.0 / 20.0;
pub const MAX_EPSILON: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Signal {
    #[serde(rename = "v_c")]
    Vc,
    #[serde(rename = "v_m")]
    Vm,
    #[serde(rename = "v_p")]
    Vp,
    #[serde(rename = "u_c")]
    Uc,
    #[serde(rename = "u_p")]
    Up,
}

impl Signal {
    pub const ALL: [Signal; 5] = [Signal::Vc, Signal::Vm, Signal::Vp, Signal::Uc, Signal::Up];
    pub const TX1: [Signal; 3] = [Signal::Vc, Signal::Vm, Signal::Vp];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_tx1(self) -> bool {
        matches!(self, Signal::Vc | Signal::Vm | Signal::Vp)
    }

    pub fn name(self) -> &'static str {
        match self {
            Signal::Vc => "v_c",
            Signal::Vm => "v_m",
            Signal::Vp => "v_p",
            Signal::Uc => "u_c",
            Signal::Up => "u_p",
        }
    }

    fn layer(self) -> Layer {
        match self {
            Signal::Vc | Signal::Uc => Layer::Common,
            Signal::Vm | Signal::Up => Layer::Middle,
            Signal::Vp => Layer::Private,
        }
    }
}

impl fmt::Display for Signal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Power level shared by a transmitter-1 layer and its aligned jamming layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Layer {
    Common,
    Middle,
    Private,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Regime {
    R1,
    R2,
    R3,
    R4,
    R5,
    R6,
    R7,
}

impl Regime {
    pub const ALL: [Regime; 7] = [
        Regime::R1,
        Regime::R2,
        Regime::R3,
        Regime::R4,
        Regime::R5,
        Regime::R6,
        Regime::R7,
    ];

    /// `(lo, hi)`; an `alpha` equal to `hi` belongs to this regime.
    pub fn interval(self) -> (f64, f64) {
        match self {
            Regime::R1 => (0.0, 0.5),
            Regime::R2 => (0.5, 0.75),
            Regime::R3 => (0.75, 5.0 / 6.0),
            Regime::R4 => (5.0 / 6.0, 1.0),
            Regime::R5 => (1.0, 4.0 / 3.0),
            Regime::R6 => (4.0 / 3.0, 2.0),
            Regime::R7 => (2.0, f64::INFINITY),
        }
    }

    pub fn has_scheme(self) -> bool {
        self != Regime::R7
    }

    pub fn label(self) -> &'static str {
        match self {
            Regime::R1 => "R1",
            Regime::R2 => "R2",
            Regime::R3 => "R3",
            Regime::R4 => "R4",
            Regime::R5 => "R5",
            Regime::R6 => "R6",
            Regime::R7 => "R7",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

pub fn regime_of(alpha: f64) -> Result<Regime> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(Error::param("alpha", format!("must be finite and >= 0, got {alpha}")));
    }
    Ok(Regime::ALL
        .into_iter()
        .find(|r| alpha <= r.interval().1)
        .unwrap_or(Regime::R7))
}

/// Layer exponents for one regime. A `None` power exponent means the layer
/// is not transmitted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeParams {
    pub regime: Regime,
    pub alpha: f64,
    pub beta_c: Option<f64>,
    pub beta_m: Option<f64>,
    pub beta_p: Option<f64>,
    pub lambda_c: f64,
    pub lambda_m: f64,
    pub lambda_p: f64,
    pub epsilon: f64,
    pub gamma: f64,
}

/// Power and rate exponents with `epsilon = 0`.
struct Table {
    beta: [Option<f64>; 3],
    lambda: [f64; 3],
}

fn table(regime: Regime, a: f64) -> Option<Table> {
    let t = |beta, lambda| Some(Table { beta, lambda });
    match regime {
        Regime::R1 => t([None, Some(0.0), Some(a)], [0.0, a, 1.0 - a]),
        Regime::R2 => t([None, Some(2.0 * a - 1.0), Some(a)], [0.0, 1.0 - a, 1.0 - a]),
        Regime::R3 => t(
            [Some(0.0), Some(2.0 * a - 1.0), Some(a)],
            [4.0 * a - 3.0, 1.0 - a, 1.0 - a],
        ),
        Regime::R4 => t(
            [Some(0.0), Some(2.0 * a - 1.0), Some(a)],
            [a - 0.5, 1.0 - a, 1.0 - a],
        ),
        Regime::R5 => t([Some(a - 1.0), None, None], [a / 2.0, 0.0, 0.0]),
        Regime::R6 => t([Some(a - 1.0), None, None], [2.0 - a, 0.0, 0.0]),
        Regime::R7 => None,
    }
}

/// Smallest epsilon-free rate exponent over the transmitted layers.
pub fn lambda_slack(alpha: f64) -> Result<f64> {
    let regime = regime_of(alpha)?;
    let t = table(regime, alpha).ok_or(Error::NoScheme(alpha))?;
    Ok((0..3)
        .filter(|&i| t.beta[i].is_some())
        .map(|i| t.lambda[i])
        .fold(f64::INFINITY, f64::min))
}

pub fn default_epsilon(alpha: f64) -> Result<f64> {
    Ok(MAX_EPSILON.min(lambda_slack(alpha)? / 2.0))
}

pub fn scheme_params(alpha: f64, epsilon: f64, gamma: f64) -> Result<SchemeParams> {
    let regime = regime_of(alpha)?;
    let t = table(regime, alpha).ok_or(Error::NoScheme(alpha))?;
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::param("epsilon", format!("must be > 0, got {epsilon}")));
    }
    if !(gamma > 0.0 && gamma <= DEFAULT_GAMMA) {
        return Err(Error::param("gamma", format!("must lie in (0, 1/20], got {gamma}")));
    }
    let mut lambda = [0.0; 3];
    for (i, signal) in Signal::TX1.into_iter().enumerate() {
        if t.beta[i].is_none() {
            continue;
        }
        let l = t.lambda[i] - epsilon;
        if l < -1e-12 {
            return Err(Error::NegativeRateExponent {
                signal,
                lambda: l,
                alpha,
                epsilon,
            });
        }
        lambda[i] = l.max(0.0);
    }
    Ok(SchemeParams {
        regime,
        alpha,
        beta_c: t.beta[0],
        beta_m: t.beta[1],
        beta_p: t.beta[2],
        lambda_c: lambda[0],
        lambda_m: lambda[1],
        lambda_p: lambda[2],
        epsilon,
        gamma,
    })
}

impl SchemeParams {
    pub fn beta(&self, s: Signal) -> Option<f64> {
        match s.layer() {
            Layer::Common => self.beta_c,
            Layer::Middle => self.beta_m,
            Layer::Private => self.beta_p,
        }
    }

    pub fn lambda(&self, s: Signal) -> f64 {
        match s.layer() {
            Layer::Common => self.lambda_c,
            Layer::Middle => self.lambda_m,
            Layer::Private => self.lambda_p,
        }
    }

    pub fn is_present(&self, s: Signal) -> bool {
        self.beta(s).is_some()
    }

    pub fn present(&self) -> impl Iterator<Item = Signal> + '_ {
        Signal::ALL.into_iter().filter(|&s| self.is_present(s))
    }

    /// Exponent of the helper's power scaling for `u_c` / `u_p`.
    pub fn helper_exponent(&self, s: Signal) -> Option<f64> {
        debug_assert!(!s.is_tx1());
        self.beta(s).map(|b| self.alpha - 1.0 - b)
    }
}

/// `{xi * a : a in Z, |a| <= q_max}`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PamSet {
    pub xi: f64,
    pub q_max: i128,
}

impl PamSet {
    pub fn value(&self, a: i128) -> f64 {
        self.xi * a as f64
    }

    pub fn cardinality(&self) -> i128 {
        2 * self.q_max + 1
    }

    pub fn max_magnitude(&self) -> f64 {
        self.xi * self.q_max as f64
    }

    pub fn indices(&self) -> impl Iterator<Item = i128> {
        -self.q_max..=self.q_max
    }

    /// `E[a^2]` for `a` uniform on the index range.
    pub fn mean_square_index(&self) -> f64 {
        let q = self.q_max as f64;
        q * (q + 1.0) / 3.0
    }

    pub fn entropy_bits(&self) -> f64 {
        (self.cardinality() as f64).log2()
    }
}

/// One optional constellation per [`Signal`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Constellations([Option<PamSet>; 5]);

impl Constellations {
    pub fn get(&self, s: Signal) -> Option<PamSet> {
        self.0[s.index()]
    }

    pub fn set(&mut self, s: Signal, pam: Option<PamSet>) {
        self.0[s.index()] = pam;
    }

    pub fn q_max(&self, s: Signal) -> Option<i128> {
        self.get(s).map(|c| c.q_max)
    }
}

/// `floor(P^(lambda/2))`, robust to `P^(lambda/2)` landing a hair below an integer.
pub fn half_range(p: f64, lambda: f64) -> i128 {
    (p.powf(lambda / 2.0) * (1.0 + 1e-12)).floor() as i128
}

pub fn build_constellations(sp: &SchemeParams, p: f64) -> Result<Constellations> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::param("p", format!("must be finite and >= 1, got {p}")));
    }
    let mut out = Constellations::default();
    for s in sp.present() {
        let q = half_range(p, sp.lambda(s));
        if q < 1 {
            return Err(Error::DegenerateConstellation { signal: s, p });
        }
        let span = match s.layer() {
            Layer::Common => 6.0,
            Layer::Middle => 2.0,
            Layer::Private => 1.0,
        };
        out.set(
            s,
            Some(PamSet {
                xi: span * sp.gamma / q as f64,
                q_max: q,
            }),
        );
    }
    Ok(out)
}

/// Integer indices of the five symbols; `None` for layers not transmitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct SymbolTuple {
    pub vc: Option<i128>,
    pub vm: Option<i128>,
    pub vp: Option<i128>,
    pub uc: Option<i128>,
    pub up: Option<i128>,
}

impl SymbolTuple {
    pub fn get(&self, s: Signal) -> Option<i128> {
        match s {
            Signal::Vc => self.vc,
            Signal::Vm => self.vm,
            Signal::Vp => self.vp,
            Signal::Uc => self.uc,
            Signal::Up => self.up,
        }
    }

    pub fn set(&mut self, s: Signal, v: Option<i128>) {
        match s {
            Signal::Vc => self.vc = v,
            Signal::Vm => self.vm = v,
            Signal::Vp => self.vp = v,
            Signal::Uc => self.uc = v,
            Signal::Up => self.up = v,
        }
    }

    /// Indices of the transmitter-1 layers, `0` for absent ones.
    pub fn tx1(&self) -> [i128; 3] {
        Signal::TX1.map(|s| self.get(s).unwrap_or(0))
    }
}

pub fn draw_symbols<R: Rng + ?Sized>(consts: &Constellations, rng: &mut R) -> SymbolTuple {
    let mut sym = SymbolTuple::default();
    for s in Signal::ALL {
        if let Some(c) = consts.get(s) {
            sym.set(s, Some(rng.random_range(-c.q_max..=c.q_max)));
        }
    }
    sym
}

/// `H(v)` in bits: the transmitter-1 layers are independent and uniform.
pub fn entropy_budget(consts: &Constellations) -> f64 {
    Signal::TX1
        .into_iter()
        .filter_map(|s| consts.get(s))
        .map(|c| c.entropy_bits())
        .sum()
}

/// Amplitude of `x1` per unit of the layer's symbol value (before `h22`).
pub fn tx1_gain(sp: &SchemeParams, p: f64, s: Signal) -> Option<f64> {
    sp.beta(s).map(|b| p.powf(-b).sqrt())
}

/// Amplitude of `x2` per unit of the layer's symbol value (before `h21`).
pub fn tx2_gain(sp: &SchemeParams, p: f64, s: Signal) -> Option<f64> {
    sp.helper_exponent(s).map(|e| p.powf(e).sqrt())
}

fn encode(
    sym: &SymbolTuple,
    consts: &Constellations,
    signals: &[Signal],
    gain: impl Fn(Signal) -> Option<f64>,
) -> f64 {
    signals
        .iter()
        .copied()
        .filter_map(|s| Some(gain(s)? * consts.get(s)?.value(sym.get(s)?)))
        .sum()
}

pub fn encode_tx1(
    sym: &SymbolTuple,
    sp: &SchemeParams,
    consts: &Constellations,
    params: &ChannelParams,
) -> f64 {
    params.h22 * encode(sym, consts, &Signal::TX1, |s| tx1_gain(sp, params.p, s))
}

pub fn encode_tx2(
    sym: &SymbolTuple,
    sp: &SchemeParams,
    consts: &Constellations,
    params: &ChannelParams,
) -> f64 {
    let x = encode(sym, consts, &[Signal::Uc, Signal::Up], |s| tx2_gain(sp, params.p, s));
    params.h21 * x
}

/// Exact `E|x1|^2` and `E|x2|^2` under uniform independent symbols.
pub fn analytic_power(sp: &SchemeParams, consts: &Constellations, params: &ChannelParams) -> (f64, f64) {
    let layer_power = |s: Signal, g: Option<f64>| match (g, consts.get(s)) {
        (Some(g), Some(c)) => g * g * c.xi * c.xi * c.mean_square_index(),
        _ => 0.0,
    };
    let p1: f64 = Signal::TX1
        .into_iter()
        .map(|s| layer_power(s, tx1_gain(sp, params.p, s)))
        .sum();
    let p2: f64 = [Signal::Uc, Signal::Up]
        .into_iter()
        .map(|s| layer_power(s, tx2_gain(sp, params.p, s)))
        .sum();
    (params.h22 * params.h22 * p1, params.h21 * params.h21 * p2)
}

/// Worst-case bound on `E|x1|^2` for gains up to 2: `(328/3) gamma^2`.
pub fn tx1_power_bound(gamma: f64) -> f64 {
    328.0 / 3.0 * gamma * gamma
}

#[derive(Debug, Clone, Serialize)]
pub struct SchemeDump {
    #[serde(flatten)]
    pub params: SchemeParams,
    pub p: f64,
    pub q_max: [Option<i128>; 5],
    pub xi: [Option<f64>; 5],
}

pub fn scheme_dump(sp: &SchemeParams, consts: &Constellations, p: f64) -> SchemeDump {
    SchemeDump {
        params: *sp,
        p,
        q_max: Signal::ALL.map(|s| consts.q_max(s)),
        xi: Signal::ALL.map(|s| consts.get(s).map(|c| c.xi)),
    }
}
