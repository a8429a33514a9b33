//! Legitimate-receiver decoding from `y1`.
//!
//! A [`Decoder`] runs a list of stages. A single-layer stage rounds the
//! residual to the nearest index of that layer; a joint stage finds the
//! nearest point of the stage's integer combination. Each stage treats
//! every layer below it as noise and its decisions are subtracted before
//! the next stage.

mod outage;
mod search;

use serde::{Deserialize, Serialize};

use crate::bounds::ChannelParams;
use crate::channel::{rx_coefficients, IndexCoefficients};
use crate::fixed::Fixed;
use crate::scheme::{half_range, Constellations, Regime, SchemeParams, Signal, SymbolTuple};
use crate::{Error, Result};

pub use outage::{
    draw_gains, estimate_outage_fraction, outage_samples, summarize_outage, OutageCase, OutageEstimate,
    OutageSample, OutageStudy,
};
use search::BoxSearch;

pub const DEFAULT_CAP: u64 = 100_000_000;

/// Exponent margin required between a layer's index spacing and
/// everything still undecoded beneath it.
const SEPARATION_TOL: f64 = 1e-9;

/// Per-layer view of `y1`: fixed-point amplitude per index, half-range and
/// the SNR exponents used to check separability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerTable {
    pub coef: [Fixed; 5],
    pub q_max: [Option<i128>; 5],
    /// Power exponent of the layer's peak amplitude at `y1`.
    pub exponent: [f64; 5],
    /// Power exponent of the spacing between adjacent indices at `y1`.
    pub spacing: [f64; 5],
}

impl LayerTable {
    pub fn new(params: &ChannelParams, sp: &SchemeParams, consts: &Constellations) -> Result<Self> {
        let idx = IndexCoefficients::new(&rx_coefficients(params, sp), consts)?;
        Ok(Self::from_parts(params, sp, consts, &idx))
    }

    pub fn from_parts(
        params: &ChannelParams,
        sp: &SchemeParams,
        consts: &Constellations,
        idx: &IndexCoefficients,
    ) -> Self {
        let mut t = LayerTable {
            coef: idx.y1,
            q_max: Signal::ALL.map(|s| consts.q_max(s)),
            exponent: [f64::NEG_INFINITY; 5],
            spacing: [f64::NEG_INFINITY; 5],
        };
        for s in sp.present() {
            let beta = sp.beta(s).unwrap_or(0.0);
            let e = if s.is_tx1() {
                params.alpha11 - beta
            } else {
                params.alpha12 + sp.alpha - 1.0 - beta
            };
            t.exponent[s.index()] = e;
            t.spacing[s.index()] = e - sp.lambda(s);
        }
        t
    }

    pub fn is_present(&self, s: Signal) -> bool {
        self.q_max[s.index()].is_some()
    }

    fn q(&self, s: Signal) -> i128 {
        self.q_max[s.index()].unwrap_or(0)
    }

    fn c(&self, s: Signal) -> Fixed {
        self.coef[s.index()]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stage {
    Single(Signal),
    Joint(Vec<Signal>),
}

impl Stage {
    pub fn signals(&self) -> &[Signal] {
        match self {
            Stage::Single(s) => std::slice::from_ref(s),
            Stage::Joint(v) => v,
        }
    }
}

/// Stage order for each regime. `u_p` is never decoded.
pub fn regime_stages(regime: Regime) -> Vec<Stage> {
    use Signal::*;
    use Stage::*;
    match regime {
        Regime::R1 | Regime::R2 => vec![Single(Vm), Single(Vp)],
        Regime::R3 => vec![Single(Vc), Single(Uc), Single(Vm), Single(Vp)],
        Regime::R4 => vec![Joint(vec![Vc, Uc, Vm]), Single(Vp)],
        Regime::R5 => vec![Joint(vec![Vc, Uc])],
        Regime::R6 => vec![Single(Uc), Single(Vc)],
        Regime::R7 => vec![],
    }
}

#[derive(Debug, Clone)]
pub struct Decoder {
    layers: LayerTable,
    stages: Vec<Stage>,
    searches: Vec<Option<BoxSearch>>,
    cap: u64,
}

impl Decoder {
    /// Checks that every single-layer stage is separable from the layers
    /// still undecoded beneath it and that joint searches fit under `cap`.
    pub fn new(layers: LayerTable, stages: Vec<Stage>, cap: u64) -> Result<Self> {
        let mut pending: Vec<Signal> = Signal::ALL
            .into_iter()
            .filter(|&s| layers.is_present(s))
            .collect();
        let mut searches = Vec::with_capacity(stages.len());
        for stage in &stages {
            for s in stage.signals() {
                if !layers.is_present(*s) {
                    return Err(Error::param("stages", format!("{s} is not transmitted")));
                }
                pending.retain(|p| p != s);
            }
            match stage {
                Stage::Single(s) => {
                    let interference = pending
                        .iter()
                        .map(|p| layers.exponent[p.index()])
                        .fold(0.0f64, f64::max);
                    let spacing = layers.spacing[s.index()];
                    if spacing <= interference + SEPARATION_TOL {
                        return Err(Error::SeparationViolated {
                            signal: *s,
                            spacing,
                            interference,
                        });
                    }
                    searches.push(None);
                }
                Stage::Joint(v) => {
                    let search = joint_search(&layers, v, 1)?;
                    let est = search.estimated_nodes();
                    if est > cap as f64 {
                        return Err(Error::CapExceeded { estimated: est, cap });
                    }
                    searches.push(Some(search));
                }
            }
        }
        Ok(Decoder {
            layers,
            stages,
            searches,
            cap,
        })
    }

    pub fn for_regime(layers: LayerTable, regime: Regime, cap: u64) -> Result<Self> {
        Self::new(layers, regime_stages(regime), cap)
    }

    /// Strongest-first single-layer stages.
    pub fn successive(layers: LayerTable, order: &[Signal]) -> Result<Self> {
        Self::new(layers, order.iter().map(|&s| Stage::Single(s)).collect(), DEFAULT_CAP)
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn layers(&self) -> &LayerTable {
        &self.layers
    }

    pub fn decode(&self, y1: Fixed) -> Result<SymbolTuple> {
        let mut r = y1;
        let mut out = SymbolTuple::default();
        for (stage, search) in self.stages.iter().zip(&self.searches) {
            match (stage, search) {
                (Stage::Single(s), _) => {
                    let c = self.layers.c(*s);
                    let q = self.layers.q(*s);
                    let x = r.div_round(c).clamp(-q, q);
                    r = r - c.times(x);
                    out.set(*s, Some(x));
                }
                (Stage::Joint(v), Some(search)) => {
                    let hit = search
                        .closest(r.0, false, self.cap)?
                        .expect("box contains the origin");
                    for (s, &x) in v.iter().zip(&hit.x) {
                        r = r - self.layers.c(*s).times(x);
                        out.set(*s, Some(x));
                    }
                }
                (Stage::Joint(_), None) => unreachable!("joint stage without search"),
            }
        }
        Ok(out)
    }

    /// Minimum distance, in `y1` units, between two distinct index vectors
    /// of a joint stage.
    pub fn stage_min_distance(&self, stage: usize) -> Result<MinDistResult> {
        let signals = self.stages[stage].signals();
        let search = joint_search(&self.layers, signals, 2)?;
        let est = search.estimated_nodes();
        if est > self.cap as f64 {
            return Err(Error::CapExceeded {
                estimated: est,
                cap: self.cap,
            });
        }
        let hit = search.closest(0, true, self.cap)?;
        Ok(match hit {
            Some(h) => MinDistResult {
                d_min: Fixed(h.dist).to_f64(),
                witness: h.x,
                nodes: h.nodes,
            },
            None => MinDistResult::degenerate(signals.len()),
        })
    }
}

/// Search over `x_s in [-span Q_s, span Q_s]`; `span = 2` covers differences.
fn joint_search(layers: &LayerTable, signals: &[Signal], span: i128) -> Result<BoxSearch> {
    let mut c = Vec::with_capacity(signals.len());
    let mut hi = Vec::with_capacity(signals.len());
    for s in signals {
        let cs = layers.c(*s);
        if cs.0 <= 0 {
            return Err(Error::param("layers", format!("{s} has a non-positive coefficient")));
        }
        c.push(cs.0);
        hi.push(span * layers.q(*s));
    }
    let lo: Vec<i128> = hi.iter().map(|h| -h).collect();
    Ok(BoxSearch::new(&c, &lo, &hi))
}

/// Strongest-first successive decoding of one observation.
pub fn decode_successive(y1: Fixed, layers: &LayerTable, order: &[Signal]) -> Result<SymbolTuple> {
    Decoder::successive(*layers, order)?.decode(y1)
}

/// Nearest-point decoding of the listed layers as one stage, then the
/// single-layer stages in `rest`.
pub fn decode_joint(
    y1: Fixed,
    layers: &LayerTable,
    joint: &[Signal],
    rest: &[Signal],
    cap: u64,
) -> Result<SymbolTuple> {
    let mut stages = vec![Stage::Joint(joint.to_vec())];
    stages.extend(rest.iter().map(|&s| Stage::Single(s)));
    Decoder::new(*layers, stages, cap)?.decode(y1)
}

/// One term `a g q` of an integer-weighted sum, `q in [-q_max, q_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SumTerm {
    pub a: u64,
    pub g: f64,
    pub q_max: i128,
}

/// `s = sum_k a_k g_k q_k`, terms listed as `q0, q1, q2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SumContext {
    pub terms: Vec<SumTerm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinDistResult {
    pub d_min: f64,
    /// Difference vector achieving `d_min`, in term order.
    pub witness: Vec<i128>,
    pub nodes: u64,
}

impl MinDistResult {
    /// No nonzero difference exists (every range is empty).
    fn degenerate(n: usize) -> Self {
        MinDistResult {
            d_min: f64::INFINITY,
            witness: vec![0; n],
            nodes: 0,
        }
    }
}

/// `g` is an f64 in `[1, 4]`, so `g * 2^52` is an integer.
const GAIN_SHIFT: i32 = 52;

impl SumContext {
    pub fn new(terms: Vec<SumTerm>) -> Result<Self> {
        if terms.is_empty() || terms.len() > search::MAX_LEVELS {
            return Err(Error::param("terms", "need between 1 and 6 terms"));
        }
        for t in &terms {
            if t.a == 0 {
                return Err(Error::param("a", "scaling integers must be >= 1"));
            }
            if !(t.g >= 1.0 && t.g <= 4.0) {
                return Err(Error::param("g", format!("gain must lie in [1, 4], got {}", t.g)));
            }
            if t.q_max < 0 {
                return Err(Error::param("q_max", "half-range must be >= 0"));
            }
        }
        let ctx = SumContext { terms };
        let span: f64 = ctx
            .terms
            .iter()
            .map(|t| t.a as f64 * t.g * 2.0f64.powi(GAIN_SHIFT) * 2.0 * t.q_max as f64)
            .sum();
        if span >= 2.0f64.powi(124) {
            return Err(Error::DynamicRange {
                magnitude: span / 2.0f64.powi(GAIN_SHIFT),
                limit: 2.0f64.powi(124 - GAIN_SHIFT),
            });
        }
        Ok(ctx)
    }

    /// Joint structure of the common and middle layers at `y1` when
    /// `5/6 <= alpha <= 1`: `g0 q0 + A1 g1 q1 + A2 g2 q2` with
    /// `A2 = 3 P^(1/4)`, `A1 = 3 P^(alpha - 3/4)`, `g0 = g2 = h11 h22`,
    /// `g1 = h12 h21`. Gains are `[h11, h12, h21, h22]`.
    pub fn triple(gains: [f64; 4], p: f64, alpha: f64, epsilon: f64) -> Result<Self> {
        let [h11, h12, h21, h22] = gains;
        let a2 = (3.0 * p.powf(0.25)).floor();
        let a1 = (3.0 * p.powf(alpha - 0.75)).floor();
        if a1 < 1.0 || a2 < a1 || a2 >= u64::MAX as f64 {
            return Err(Error::param(
                "alpha",
                format!("triple structure needs 1 <= A1 <= A2, got A1 = {a1}, A2 = {a2}"),
            ));
        }
        let q12 = half_range(p, alpha - 0.5 - epsilon);
        let q0 = half_range(p, 1.0 - alpha - epsilon);
        Self::new(vec![
            SumTerm { a: 1, g: h11 * h22, q_max: q0 },
            SumTerm { a: a1 as u64, g: h12 * h21, q_max: q12 },
            SumTerm { a: a2 as u64, g: h11 * h22, q_max: q12 },
        ])
    }

    /// Joint structure when `1 <= alpha <= 4/3`: `A0 g0 q0 + A1 g1 q1` with
    /// `A0 = P^(1 - 3 alpha / 4)`, `A1 = P^(alpha / 4)`.
    pub fn pair(gains: [f64; 4], p: f64, alpha: f64, epsilon: f64) -> Result<Self> {
        let [h11, h12, h21, h22] = gains;
        let a0 = p.powf(1.0 - 0.75 * alpha).floor();
        let a1 = p.powf(alpha / 4.0).floor();
        if a0 < 1.0 || a1 < 1.0 || a0.max(a1) >= u64::MAX as f64 {
            return Err(Error::param(
                "alpha",
                format!("pair structure needs A0, A1 >= 1, got {a0}, {a1}"),
            ));
        }
        let q = half_range(p, alpha / 2.0 - epsilon);
        Self::new(vec![
            SumTerm { a: a0 as u64, g: h11 * h22, q_max: q },
            SumTerm { a: a1 as u64, g: h12 * h21, q_max: q },
        ])
    }

    /// `|sum_k a_k g_k d_k|` evaluated in f64, term by term in order.
    pub fn eval(&self, delta: &[i128]) -> f64 {
        self.terms
            .iter()
            .zip(delta)
            .fold(0.0, |acc, (t, &d)| acc + t.a as f64 * t.g * d as f64)
            .abs()
    }

    /// Size of the full difference lattice `prod (4 Q_k + 1)`.
    pub fn lattice_size(&self) -> f64 {
        self.terms.iter().map(|t| 4.0 * t.q_max as f64 + 1.0).product()
    }
}

/// Exact minimum over nonzero differences `|d_k| <= 2 Q_k` of
/// `|sum_k a_k g_k d_k|`. The search runs on exact integers; the returned
/// distance is the witness evaluated with [`SumContext::eval`].
pub fn min_distance(ctx: &SumContext, cap: u64) -> Result<MinDistResult> {
    let scale = 2.0f64.powi(GAIN_SHIFT);
    let c: Vec<i128> = ctx
        .terms
        .iter()
        .map(|t| t.a as i128 * (t.g * scale) as i128)
        .collect();
    let hi: Vec<i128> = ctx.terms.iter().map(|t| 2 * t.q_max).collect();
    let lo: Vec<i128> = hi.iter().map(|h| -h).collect();
    let search = BoxSearch::new(&c, &lo, &hi);
    let est = search.estimated_nodes();
    if est > cap as f64 {
        return Err(Error::CapExceeded { estimated: est, cap });
    }
    Ok(match search.closest(0, true, cap)? {
        Some(hit) => MinDistResult {
            d_min: ctx.eval(&hit.x),
            witness: hit.x,
            nodes: hit.nodes,
        },
        None => MinDistResult::degenerate(ctx.terms.len()),
    })
}

/// Scan of the full difference lattice, for cross-checking.
pub fn min_distance_exhaustive(ctx: &SumContext, cap: u64) -> Result<MinDistResult> {
    let size = ctx.lattice_size();
    if size > cap as f64 {
        return Err(Error::CapExceeded { estimated: size, cap });
    }
    let n = ctx.terms.len();
    let hi: Vec<i128> = ctx.terms.iter().map(|t| 2 * t.q_max).collect();
    let mut d: Vec<i128> = hi.iter().map(|h| -h).collect();
    let mut best = MinDistResult::degenerate(n);
    loop {
        if d.iter().any(|&x| x != 0) {
            let v = ctx.eval(&d);
            if v < best.d_min {
                best.d_min = v;
                best.witness.clone_from(&d);
            }
        }
        best.nodes += 1;
        let mut k = 0;
        loop {
            if k == n {
                return Ok(best);
            }
            if d[k] < hi[k] {
                d[k] += 1;
                break;
            }
            d[k] = -hi[k];
            k += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::{build_constellations, scheme_params, DEFAULT_GAMMA};

    #[test]
    fn integer_collision_gives_zero() {
        let ctx = SumContext {
            terms: vec![
                SumTerm { a: 1, g: 1.0, q_max: 1 },
                SumTerm { a: 2, g: 1.0, q_max: 1 },
                SumTerm { a: 3, g: 1.0, q_max: 1 },
            ],
        };
        let r = min_distance(&ctx, DEFAULT_CAP).unwrap();
        assert_eq!(r.d_min, 0.0);
        assert_eq!(ctx.eval(&r.witness), 0.0);
        assert!(r.witness.iter().any(|&x| x != 0));
        assert_eq!(min_distance_exhaustive(&ctx, DEFAULT_CAP).unwrap().d_min, 0.0);
    }

    #[test]
    fn only_q0_free() {
        let ctx = SumContext::new(vec![
            SumTerm { a: 1, g: 1.7, q_max: 3 },
            SumTerm { a: 5, g: 1.2, q_max: 0 },
            SumTerm { a: 9, g: 1.7, q_max: 0 },
        ])
        .unwrap();
        let r = min_distance(&ctx, DEFAULT_CAP).unwrap();
        assert_eq!(r.d_min, 1.7);
        assert_eq!(r.witness[0].abs(), 1);
    }

    #[test]
    fn cap_rejects_large_lattice() {
        let ctx = SumContext::new(vec![
            SumTerm { a: 1, g: 1.5, q_max: 1000 },
            SumTerm { a: 1, g: 1.3, q_max: 1000 },
        ])
        .unwrap();
        assert!(matches!(
            min_distance_exhaustive(&ctx, 1000),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn triple_structure_scalings() {
        let ctx = SumContext::triple([1.5, 1.2, 1.3, 1.8], 1e8, 0.9, 0.05).unwrap();
        assert_eq!(ctx.terms[2].a, 300);
        assert_eq!(ctx.terms[1].a, (3.0 * 1e8f64.powf(0.15)).floor() as u64);
        assert_eq!(ctx.terms[0].a, 1);
        assert_eq!(ctx.terms[0].g, ctx.terms[2].g);
    }

    fn r1_layers(p: f64) -> LayerTable {
        let params = ChannelParams::symmetric(0.3, [1.3, 1.7, 1.2, 1.9], p).unwrap();
        let sp = scheme_params(0.3, 0.05, DEFAULT_GAMMA).unwrap();
        let consts = build_constellations(&sp, p).unwrap();
        LayerTable::new(&params, &sp, &consts).unwrap()
    }

    #[test]
    fn successive_needs_strongest_first() {
        let layers = r1_layers(1e4);
        assert!(Decoder::successive(layers, &[Signal::Vm, Signal::Vp]).is_ok());
        assert!(matches!(
            Decoder::successive(layers, &[Signal::Vp, Signal::Vm]),
            Err(Error::SeparationViolated { signal: Signal::Vp, .. })
        ));
    }

    #[test]
    fn noiseless_r1_recovery() {
        let layers = r1_layers(1e4);
        let dec = Decoder::for_regime(layers, Regime::R1, DEFAULT_CAP).unwrap();
        let (qm, qp) = (layers.q(Signal::Vm), layers.q(Signal::Vp));
        for vm in -qm..=qm {
            for vp in [-qp, -1, 0, 7, qp] {
                let y = layers.c(Signal::Vm).times(vm) + layers.c(Signal::Vp).times(vp);
                let got = dec.decode(y).unwrap();
                assert_eq!((got.vm, got.vp), (Some(vm), Some(vp)));
            }
        }
    }
}
