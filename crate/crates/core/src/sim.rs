//! Monte-Carlo harness: draw symbols, encode, pass through the channel,
//! decode at receiver 1, and turn the tallies into an achievable secure
//! rate.
//!
//! The secure rate is bounded below by
//! `(1 - pe) H(v) - 1 - L`, where `H(v)` is the entropy of the
//! transmitter-1 layers, `pe` the probability that any of them is decoded
//! wrongly and `L` an upper bound on the leakage to receiver 2.

use std::collections::HashMap;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{gdof_theorem1, ChannelParams};
use crate::channel::{rx_coefficients, IndexCoefficients, RngStream};
use crate::decode::{draw_gains, Decoder, LayerTable, OutageCase, Stage, SumContext, DEFAULT_CAP};
use crate::scheme::{
    build_constellations, default_epsilon, draw_symbols, entropy_budget, regime_of, scheme_params,
    Constellations, Regime, SchemeParams, Signal, SymbolTuple, DEFAULT_GAMMA,
};
use crate::{Error, Result};

pub const DEFAULT_DELTA: f64 = 0.01;
pub const DEFAULT_BIN_WIDTH: f64 = 0.1;
const MAX_REDRAWS: u32 = 1000;

/// Stream ids below `2^62` are trial streams; gain draws and MI samples use
/// disjoint ranges above.
const GAIN_STREAMS: u64 = 1 << 62;
const MI_STREAMS: u64 = 3 << 62;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub alpha: f64,
    pub p_grid: Vec<f64>,
    /// `None` picks the regime default.
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    pub n_trials: u64,
    pub seed: u64,
    /// `[h11, h12, h21, h22]`
    #[serde(default)]
    pub h_override: Option<[f64; 4]>,
    /// Redraw gains until the joint stage's normalized minimum distance
    /// reaches `delta`. With fixed gains the record is only flagged.
    #[serde(default)]
    pub outage_filter: bool,
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Fresh gains for every trial instead of one draw per SNR point.
    #[serde(default)]
    pub redraw_h_per_trial: bool,
    #[serde(default)]
    pub zero_noise: bool,
    #[serde(default = "default_cap")]
    pub cap: u64,
}

fn default_gamma() -> f64 {
    DEFAULT_GAMMA
}
fn default_delta() -> f64 {
    DEFAULT_DELTA
}
fn default_cap() -> u64 {
    DEFAULT_CAP
}

impl SimConfig {
    pub fn new(alpha: f64, p_grid: Vec<f64>, n_trials: u64, seed: u64) -> Self {
        SimConfig {
            alpha,
            p_grid,
            epsilon: None,
            gamma: DEFAULT_GAMMA,
            n_trials,
            seed,
            h_override: None,
            outage_filter: false,
            delta: DEFAULT_DELTA,
            redraw_h_per_trial: false,
            zero_noise: false,
            cap: DEFAULT_CAP,
        }
    }

    pub fn validate(&self) -> Result<()> {
        regime_of(self.alpha)?;
        if self.n_trials == 0 {
            return Err(Error::param("n_trials", "must be >= 1"));
        }
        if self.p_grid.is_empty() {
            return Err(Error::param("p_grid", "must not be empty"));
        }
        if self.p_grid.iter().any(|p| !(p.is_finite() && *p >= 1.0)) {
            return Err(Error::param("p_grid", "every P must be finite and >= 1"));
        }
        if self.p_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::param("p_grid", "must be strictly ascending"));
        }
        if let Some(h) = self.h_override {
            ChannelParams::symmetric(self.alpha, h, 1.0)?;
        }
        Ok(())
    }

    /// Scheme parameters, or `None` when `alpha > 2`.
    pub fn scheme(&self) -> Result<Option<SchemeParams>> {
        if !regime_of(self.alpha)?.has_scheme() {
            return Ok(None);
        }
        let eps = match self.epsilon {
            Some(e) => e,
            None => default_epsilon(self.alpha)?,
        };
        scheme_params(self.alpha, eps, self.gamma).map(Some)
    }
}

/// Decision errors per decoded layer. `u_p` is never decoded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ErrorCounts {
    pub v_c: u64,
    pub v_m: u64,
    pub v_p: u64,
    pub u_c: u64,
}

impl ErrorCounts {
    fn bump(&mut self, s: Signal) {
        match s {
            Signal::Vc => self.v_c += 1,
            Signal::Vm => self.v_m += 1,
            Signal::Vp => self.v_p += 1,
            Signal::Uc => self.u_c += 1,
            Signal::Up => {}
        }
    }

    fn merge(mut self, o: Self) -> Self {
        self.v_c += o.v_c;
        self.v_m += o.v_m;
        self.v_p += o.v_p;
        self.u_c += o.u_c;
        self
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    per_signal: ErrorCounts,
    joint: u64,
    redraws: u64,
    outage_trials: u64,
}

impl Tally {
    fn merge(self, o: Self) -> Self {
        Tally {
            per_signal: self.per_signal.merge(o.per_signal),
            joint: self.joint + o.joint,
            redraws: self.redraws + o.redraws,
            outage_trials: self.outage_trials + o.outage_trials,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub alpha: f64,
    pub p: f64,
    pub regime: Regime,
    pub epsilon: Option<f64>,
    pub gamma: f64,
    pub seed: u64,
    pub n_trials: u64,
    pub q_max: [Option<i128>; 5],
    /// Gains used at this point; `None` with per-trial redraws.
    pub h: Option<[f64; 4]>,
    pub errors: ErrorCounts,
    pub n_joint_errors: u64,
    pub pe: f64,
    pub entropy_bits: f64,
    pub leakage_ub_bits: f64,
    /// The leakage constant follows the single-pair recipe beyond the
    /// regime it was derived for.
    pub leakage_extrapolated: bool,
    /// Confusion-message rate: leakage bound plus `epsilon`.
    pub r0_bits: f64,
    pub rate_lb_bits: f64,
    /// `None` at `P = 1`.
    pub normalized_rate: Option<f64>,
    pub gdof_target: f64,
    /// Joint-stage minimum distance divided by the sum's amplitude in `y1`.
    pub d_min_normalized: Option<f64>,
    /// Joint regimes only: fixed gains below `delta`, or trials whose
    /// redraw budget ran out.
    pub outage: Option<bool>,
    pub gain_redraws: u64,
    /// Largest relative change from flooring the sum's integer scalings.
    pub a_floor_rel_error: Option<f64>,
    /// Peak sub-noise residual at `y1` in units of `sqrt(P^(1 - alpha))`,
    /// against the 3/5 budget.
    pub e_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub config: SimConfig,
    pub records: Vec<PointRecord>,
}

/// Upper bound on `I(v; y2)` in bits: one bit per aligned pair plus
/// `log2(sqrt(17))` for a sub-noise `v_p` term with `|h21 h22|^2 <= 16`.
pub fn leakage_penalty_ub(sp: &SchemeParams) -> f64 {
    let pairs = [sp.beta_c, sp.beta_m].iter().filter(|b| b.is_some()).count() as f64;
    let private = if sp.beta_p.is_some() {
        0.5 * 17f64.log2()
    } else {
        0.0
    };
    pairs + private
}

fn joint_stage(dec: &Decoder) -> Option<usize> {
    dec.stages().iter().position(|s| matches!(s, Stage::Joint(_)))
}

/// Amplitude in `y1` of one unit of the joint sum.
fn sum_scale(sp: &SchemeParams, p: f64) -> f64 {
    let eps = sp.epsilon;
    match sp.regime {
        Regime::R4 => p.powf(1.0 - sp.alpha + eps).sqrt() * 2.0 * sp.gamma,
        Regime::R5 => 6.0 * sp.gamma * p.powf(eps / 2.0),
        _ => 1.0,
    }
}

fn a_floor_rel_error(sp: &SchemeParams, p: f64) -> Option<f64> {
    let exact: Vec<f64> = match sp.regime {
        Regime::R4 => vec![3.0 * p.powf(0.25), 3.0 * p.powf(sp.alpha - 0.75)],
        Regime::R5 => vec![p.powf(1.0 - 0.75 * sp.alpha), p.powf(sp.alpha / 4.0)],
        _ => return None,
    };
    Some(exact.iter().map(|a| (a - a.floor()) / a).fold(0.0, f64::max))
}

/// Everything needed to run trials on one gain draw.
struct Link {
    h: [f64; 4],
    idx: IndexCoefficients,
    decoder: Decoder,
    d_min_normalized: Option<f64>,
}

struct Point<'a> {
    cfg: &'a SimConfig,
    sp: SchemeParams,
    consts: Constellations,
    p: f64,
}

impl Point<'_> {
    fn link(&self, h: [f64; 4]) -> Result<Link> {
        let params = ChannelParams::symmetric(self.cfg.alpha, h, self.p)?;
        let idx = IndexCoefficients::new(&rx_coefficients(&params, &self.sp), &self.consts)?;
        let layers = LayerTable::from_parts(&params, &self.sp, &self.consts, &idx);
        let decoder = Decoder::for_regime(layers, self.sp.regime, self.cfg.cap)?;
        let d_min_normalized = match joint_stage(&decoder) {
            Some(k) => Some(decoder.stage_min_distance(k)?.d_min / sum_scale(&self.sp, self.p)),
            None => None,
        };
        Ok(Link {
            h,
            idx,
            decoder,
            d_min_normalized,
        })
    }

    fn in_outage(&self, link: &Link) -> bool {
        link.d_min_normalized.is_some_and(|d| d < self.cfg.delta)
    }

    /// Draws gains from `stream`, redrawing while in outage when filtering.
    fn drawn_link(&self, stream: RngStream) -> Result<(Link, u64, bool)> {
        let mut rng = stream.rng();
        for attempt in 0..MAX_REDRAWS {
            let link = self.link(draw_gains(&mut rng))?;
            let outage = self.in_outage(&link);
            if !(self.cfg.outage_filter && outage) || attempt + 1 == MAX_REDRAWS {
                return Ok((link, attempt as u64, outage));
            }
        }
        unreachable!()
    }

    fn trial(&self, link: &Link, stream: RngStream) -> Result<Tally> {
        let mut rng = stream.rng();
        let sym = draw_symbols(&self.consts, &mut rng);
        let (z1, z2) = if self.cfg.zero_noise {
            (0.0, 0.0)
        } else {
            (rng.sample(StandardNormal), rng.sample(StandardNormal))
        };
        let (y1, _) = link.idx.observe(&sym, z1, z2);
        let est = link.decoder.decode(y1)?;
        Ok(score(&sym, &est))
    }
}

fn score(sym: &SymbolTuple, est: &SymbolTuple) -> Tally {
    let mut t = Tally::default();
    let mut joint = false;
    for s in Signal::ALL {
        if let Some(e) = est.get(s) {
            if sym.get(s) != Some(e) {
                t.per_signal.bump(s);
                joint |= s.is_tx1();
            }
        }
    }
    // A transmitted layer the plan never decodes counts as wrong.
    for s in Signal::TX1 {
        if sym.get(s).is_some() && est.get(s).is_none() {
            joint = true;
        }
    }
    t.joint = joint as u64;
    t
}

fn trial_stream(seed: u64, p_index: usize, trial: u64) -> RngStream {
    RngStream::new(seed, ((p_index as u64) << 40) | trial)
}

fn absent_record(cfg: &SimConfig, p: f64) -> PointRecord {
    PointRecord {
        alpha: cfg.alpha,
        p,
        regime: Regime::R7,
        epsilon: None,
        gamma: cfg.gamma,
        seed: cfg.seed,
        n_trials: 0,
        q_max: [None; 5],
        h: cfg.h_override,
        errors: ErrorCounts::default(),
        n_joint_errors: 0,
        pe: 0.0,
        entropy_bits: 0.0,
        leakage_ub_bits: 0.0,
        leakage_extrapolated: false,
        r0_bits: 0.0,
        rate_lb_bits: 0.0,
        normalized_rate: (p > 1.0).then_some(0.0),
        gdof_target: 0.0,
        d_min_normalized: None,
        outage: None,
        gain_redraws: 0,
        a_floor_rel_error: None,
        e_max: None,
    }
}

fn run_point(cfg: &SimConfig, sp: SchemeParams, p_index: usize, p: f64) -> Result<PointRecord> {
    let consts = build_constellations(&sp, p)?;
    let point = Point {
        cfg,
        sp,
        consts,
        p,
    };
    let gain_stream = |k: u64| RngStream::new(cfg.seed, GAIN_STREAMS | ((p_index as u64) << 40) | k);

    let (h, d_min_normalized, outage, tally) = if cfg.redraw_h_per_trial {
        let tally = (0..cfg.n_trials)
            .into_par_iter()
            .map(|t| {
                let (link, redraws, outage) = point.drawn_link(gain_stream(t))?;
                let mut tally = point.trial(&link, trial_stream(cfg.seed, p_index, t))?;
                tally.redraws = redraws;
                tally.outage_trials = outage as u64;
                Ok(tally)
            })
            .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))?;
        let outage = (sp.regime == Regime::R4 || sp.regime == Regime::R5).then_some(tally.outage_trials > 0);
        (None, None, outage, tally)
    } else {
        let (link, redraws, outage) = match cfg.h_override {
            Some(h) => {
                let link = point.link(h)?;
                let outage = point.in_outage(&link);
                (link, 0, outage)
            }
            None => point.drawn_link(gain_stream(0))?,
        };
        let mut tally = (0..cfg.n_trials)
            .into_par_iter()
            .map(|t| point.trial(&link, trial_stream(cfg.seed, p_index, t)))
            .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))?;
        tally.redraws = redraws;
        let outage = link.d_min_normalized.map(|_| outage);
        (Some(link.h), link.d_min_normalized, outage, tally)
    };

    let e_max = (sp.regime == Regime::R4).then(|| {
        let params = ChannelParams::symmetric(cfg.alpha, h.unwrap_or([2.0; 4]), p).expect("validated gains");
        let rx = rx_coefficients(&params, &sp);
        let peak: f64 = [Signal::Vp, Signal::Up]
            .iter()
            .filter_map(|&s| Some(rx.y1[s.index()] * point.consts.get(s)?.max_magnitude()))
            .sum();
        peak / p.powf(1.0 - cfg.alpha).sqrt()
    });

    let n = cfg.n_trials;
    let pe = tally.joint as f64 / n as f64;
    let entropy_bits = entropy_budget(&point.consts);
    let leakage_ub_bits = leakage_penalty_ub(&sp);
    let rate_lb_bits = (1.0 - pe) * entropy_bits - 1.0 - leakage_ub_bits;
    let half_log = 0.5 * p.log2();
    Ok(PointRecord {
        alpha: cfg.alpha,
        p,
        regime: sp.regime,
        epsilon: Some(sp.epsilon),
        gamma: sp.gamma,
        seed: cfg.seed,
        n_trials: n,
        q_max: Signal::ALL.map(|s| point.consts.q_max(s)),
        h,
        errors: tally.per_signal,
        n_joint_errors: tally.joint,
        pe,
        entropy_bits,
        leakage_ub_bits,
        leakage_extrapolated: sp.regime != Regime::R1,
        r0_bits: leakage_ub_bits + sp.epsilon,
        rate_lb_bits,
        normalized_rate: (half_log > 0.0).then(|| rate_lb_bits / half_log),
        gdof_target: gdof_theorem1(cfg.alpha)?,
        d_min_normalized,
        outage,
        gain_redraws: tally.redraws,
        a_floor_rel_error: a_floor_rel_error(&sp, p),
        e_max,
    })
}

pub fn run_trials(cfg: &SimConfig) -> Result<SimReport> {
    cfg.validate()?;
    let sp = cfg.scheme()?;
    let records = cfg
        .p_grid
        .iter()
        .enumerate()
        .map(|(i, &p)| match sp {
            Some(sp) => run_point(cfg, sp, i, p),
            None => Ok(absent_record(cfg, p)),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SimReport {
        config: cfg.clone(),
        records,
    })
}

impl SimReport {
    pub const CSV_HEADER: &'static str = "alpha,P,pe,H_v_bits,leakage_ub_bits,rate_lb_bits,normalized_rate,\
gdof_target,regime,seed,h11,h12,h21,h22,epsilon,n_trials,err_v_c,err_v_m,err_v_p,err_u_c,\
d_min_normalized,outage,leakage_extrapolated";

    pub fn to_csv(&self) -> String {
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            let h = r.h.map(|h| h.map(|x| x.to_string())).unwrap_or_default();
            let row = [
                r.alpha.to_string(),
                format!("{:e}", r.p),
                r.pe.to_string(),
                r.entropy_bits.to_string(),
                r.leakage_ub_bits.to_string(),
                r.rate_lb_bits.to_string(),
                opt(r.normalized_rate),
                r.gdof_target.to_string(),
                r.regime.to_string(),
                r.seed.to_string(),
                h[0].clone(),
                h[1].clone(),
                h[2].clone(),
                h[3].clone(),
                opt(r.epsilon),
                r.n_trials.to_string(),
                r.errors.v_c.to_string(),
                r.errors.v_m.to_string(),
                r.errors.v_p.to_string(),
                r.errors.u_c.to_string(),
                opt(r.d_min_normalized),
                r.outage.map(|o| o.to_string()).unwrap_or_default(),
                r.leakage_extrapolated.to_string(),
            ];
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Y2Source {
    Channel,
    /// Replace `y2` by an independent standard normal draw.
    FreshNoise,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MiOptions {
    /// Histogram bin width for `y2`, in noise standard deviations.
    pub bin_width: f64,
    pub jammer: bool,
    pub y2_source: Y2Source,
}

impl Default for MiOptions {
    fn default() -> Self {
        MiOptions {
            bin_width: DEFAULT_BIN_WIDTH,
            jammer: true,
            y2_source: Y2Source::Channel,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MiEstimate {
    /// Plug-in estimate of `I(v; y2)` in bits; biased upward.
    pub plugin_bits: f64,
    /// Plug-in plus the Miller-Madow corrections of the three entropies.
    pub miller_madow_bits: f64,
    pub entropy_bits: f64,
    pub n_samples: u64,
    pub v_cardinality: u64,
    pub occupied_v: u64,
    pub occupied_bins: u64,
    pub p: f64,
}

/// Plug-in estimate of `I(v; y2)` at the first grid SNR from `n_trials`
/// samples, with `y2` quantized into bins of `opts.bin_width`.
pub fn mi_plugin_estimate(cfg: &SimConfig, opts: MiOptions) -> Result<MiEstimate> {
    cfg.validate()?;
    if !(opts.bin_width > 0.0) {
        return Err(Error::param("bin_width", "must be > 0"));
    }
    let sp = cfg.scheme()?.ok_or(Error::NoScheme(cfg.alpha))?;
    let p = cfg.p_grid[0];
    let consts = build_constellations(&sp, p)?;
    let v_card: i128 = Signal::TX1
        .iter()
        .filter_map(|&s| consts.get(s))
        .map(|c| c.cardinality())
        .product();
    if v_card > 1000 {
        return Err(Error::param("p_grid", format!("|v| = {v_card} exceeds 1000")));
    }
    let v_card = v_card as u64;
    if cfg.n_trials < 100 * v_card {
        return Err(Error::param(
            "n_trials",
            format!("need at least {} samples for |v| = {v_card}", 100 * v_card),
        ));
    }
    let h = cfg
        .h_override
        .unwrap_or_else(|| draw_gains(&mut RngStream::new(cfg.seed, GAIN_STREAMS).rng()));
    let params = ChannelParams::symmetric(cfg.alpha, h, p)?;
    let idx = IndexCoefficients::new(&rx_coefficients(&params, &sp), &consts)?;

    let samples: Vec<(u64, i64)> = (0..cfg.n_trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = RngStream::new(cfg.seed, MI_STREAMS | i).rng();
            let mut sym = draw_symbols(&consts, &mut rng);
            if !opts.jammer {
                sym.uc = sym.uc.map(|_| 0);
                sym.up = sym.up.map(|_| 0);
            }
            let z2: f64 = if cfg.zero_noise { 0.0 } else { rng.sample(StandardNormal) };
            let y2 = match opts.y2_source {
                Y2Source::Channel => idx.observe(&sym, 0.0, z2).1.to_f64(),
                Y2Source::FreshNoise => rng.sample(StandardNormal),
            };
            let key = Signal::TX1.iter().fold(0u64, |acc, &s| match consts.get(s) {
                Some(c) => acc * c.cardinality() as u64 + (sym.get(s).unwrap_or(0) + c.q_max) as u64,
                None => acc,
            });
            (key, (y2 / opts.bin_width).floor() as i64)
        })
        .collect();

    let n = samples.len() as f64;
    let mut joint: HashMap<(u64, i64), u64> = HashMap::new();
    let mut pv: HashMap<u64, u64> = HashMap::new();
    let mut py: HashMap<i64, u64> = HashMap::new();
    for &(v, y) in &samples {
        *joint.entry((v, y)).or_default() += 1;
        *pv.entry(v).or_default() += 1;
        *py.entry(y).or_default() += 1;
    }
    let entropy = |counts: &mut dyn Iterator<Item = u64>| -> f64 {
        counts
            .map(|c| {
                let q = c as f64 / n;
                -q * q.log2()
            })
            .sum()
    };
    let hv = entropy(&mut pv.values().copied());
    let hy = entropy(&mut py.values().copied());
    let hvy = entropy(&mut joint.values().copied());
    let plugin = hv + hy - hvy;
    let mm = (pv.len() as f64 - 1.0 + py.len() as f64 - 1.0 - (joint.len() as f64 - 1.0))
        / (2.0 * n * std::f64::consts::LN_2);
    Ok(MiEstimate {
        plugin_bits: plugin,
        miller_madow_bits: plugin + mm,
        entropy_bits: entropy_budget(&consts),
        n_samples: cfg.n_trials,
        v_cardinality: v_card,
        occupied_v: pv.len() as u64,
        occupied_bins: py.len() as u64,
        p,
    })
}

/// Minimum distance of the joint sum for an outage-style check on the
/// current configuration's gains.
pub fn config_sum_context(cfg: &SimConfig, p: f64, h: [f64; 4]) -> Result<Option<SumContext>> {
    let Some(sp) = cfg.scheme()? else { return Ok(None) };
    let case = match sp.regime {
        Regime::R4 => OutageCase::Triple,
        Regime::R5 => OutageCase::Pair,
        _ => return Ok(None),
    };
    case.context(h, p, cfg.alpha, sp.epsilon).map(Some)
}

#[cfg(test)]
mod tests {
    use super::*;

    const H: [f64; 4] = [1.9372, 1.0843, 1.0517, 1.9618];

    #[test]
    fn leakage_constants() {
        let r1 = scheme_params(0.3, 0.05, DEFAULT_GAMMA).unwrap();
        assert!((leakage_penalty_ub(&r1) - (2.0 * 17f64.sqrt()).log2()).abs() < 1e-12);
        let r5 = scheme_params(1.2, 0.05, DEFAULT_GAMMA).unwrap();
        assert_eq!(leakage_penalty_ub(&r5), 1.0);
        let r4 = scheme_params(0.9, 0.05, DEFAULT_GAMMA).unwrap();
        assert!((leakage_penalty_ub(&r4) - 1.0 - (2.0 * 17f64.sqrt()).log2()).abs() < 1e-12);
    }

    #[test]
    fn zero_noise_single_trial() {
        let mut cfg = SimConfig::new(0.3, vec![1e8], 1, 5);
        cfg.zero_noise = true;
        cfg.h_override = Some(H);
        let r = &run_trials(&cfg).unwrap().records[0];
        assert_eq!(r.pe, 0.0);
        assert!((r.rate_lb_bits - (r.entropy_bits - 1.0 - r.leakage_ub_bits)).abs() < 1e-12);
    }

    #[test]
    fn beyond_two_has_no_scheme() {
        let cfg = SimConfig::new(2.5, vec![1e4, 1e6], 10, 5);
        let rep = run_trials(&cfg).unwrap();
        for r in &rep.records {
            assert_eq!((r.rate_lb_bits, r.gdof_target, r.regime), (0.0, 0.0, Regime::R7));
        }
    }

    #[test]
    fn unit_snr_leaves_normalization_empty() {
        let mut cfg = SimConfig::new(0.3, vec![1.0, 1e4], 20, 5);
        cfg.h_override = Some(H);
        let rep = run_trials(&cfg).unwrap();
        assert_eq!(rep.records[0].normalized_rate, None);
        let csv = rep.to_csv();
        let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(row[6], "");
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig::new(0.3, vec![1e6, 1e4], 10, 1).validate().is_err());
        assert!(SimConfig::new(0.3, vec![1e6], 0, 1).validate().is_err());
        assert!(SimConfig::new(-0.3, vec![1e6], 10, 1).validate().is_err());
    }

    #[test]
    fn mi_rejects_thin_sampling() {
        let mut cfg = SimConfig::new(0.3, vec![1e4], 50, 1);
        cfg.h_override = Some(H);
        assert!(mi_plugin_estimate(&cfg, MiOptions::default()).is_err());
    }
}
