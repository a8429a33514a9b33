//! Sampling the set of channel gains on which the joint sum has a small
//! minimum distance.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{min_distance, SumContext};
use crate::channel::RngStream;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutageCase {
    /// Three-term sum of the `5/6 < alpha <= 1` scheme.
    Triple,
    /// Two-term sum of the `1 < alpha <= 4/3` scheme.
    Pair,
}

impl OutageCase {
    pub fn constant(self) -> f64 {
        match self {
            OutageCase::Triple => 12096.0,
            OutageCase::Pair => 192.0,
        }
    }

    pub fn default_alpha(self) -> f64 {
        match self {
            OutageCase::Triple => 0.9,
            OutageCase::Pair => 1.2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            OutageCase::Triple => "triple",
            OutageCase::Pair => "pair",
        }
    }

    pub fn context(self, gains: [f64; 4], p: f64, alpha: f64, epsilon: f64) -> Result<SumContext> {
        match self {
            OutageCase::Triple => SumContext::triple(gains, p, alpha, epsilon),
            OutageCase::Pair => SumContext::pair(gains, p, alpha, epsilon),
        }
    }

    /// `C delta P^(-epsilon/2)`
    pub fn lemma_bound(self, delta: f64, p: f64, epsilon: f64) -> f64 {
        self.constant() * delta * p.powf(-epsilon / 2.0)
    }
}

impl std::str::FromStr for OutageCase {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "triple" => Ok(OutageCase::Triple),
            "pair" => Ok(OutageCase::Pair),
            other => Err(Error::param("case", format!("expected `triple` or `pair`, got `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutageStudy {
    pub case: OutageCase,
    pub alpha: f64,
    pub p: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub n_samples: u64,
    pub seed: u64,
    pub cap: u64,
}

impl OutageStudy {
    fn validate(&self) -> Result<()> {
        if !(self.delta >= 0.0 && self.delta <= 1.0) {
            return Err(Error::param("delta", format!("must lie in [0, 1], got {}", self.delta)));
        }
        if self.n_samples == 0 {
            return Err(Error::param("n_samples", "must be >= 1"));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::param("epsilon", "must be > 0"));
        }
        if !(self.p >= 1.0 && self.p.is_finite()) {
            return Err(Error::param("p", "must be finite and >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutageSample {
    pub h: [f64; 4],
    pub d_min: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutageEstimate {
    pub case: OutageCase,
    pub alpha: f64,
    pub p: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub n_samples: u64,
    pub n_outage: u64,
    pub sampled_fraction: f64,
    pub lemma_bound: f64,
    /// The bound is at least 1 and says nothing.
    pub vacuous: bool,
}

impl OutageEstimate {
    pub const CSV_HEADER: &'static str =
        "case,P,epsilon,delta,n_samples,fraction,lemma_bound,vacuous_flag";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:e},{},{},{},{},{},{}",
            self.case.name(),
            self.p,
            self.epsilon,
            self.delta,
            self.n_samples,
            self.sampled_fraction,
            self.lemma_bound,
            self.vacuous
        )
    }

    /// Binomial standard deviation of the fraction if the bound were the
    /// true outage probability.
    pub fn bound_sigma(&self) -> f64 {
        let b = self.lemma_bound.min(1.0);
        (b * (1.0 - b) / self.n_samples as f64).sqrt()
    }
}

/// Gains uniform on `(1, 2]^4`, ordered `[h11, h12, h21, h22]`.
pub fn draw_gains<R: Rng + ?Sized>(rng: &mut R) -> [f64; 4] {
    std::array::from_fn(|_| 2.0 - rng.random::<f64>())
}

/// One gain draw and minimum distance per sample; sample `i` uses stream `i`.
pub fn outage_samples(study: &OutageStudy) -> Result<Vec<OutageSample>> {
    study.validate()?;
    (0..study.n_samples)
        .into_par_iter()
        .map(|i| {
            let h = draw_gains(&mut RngStream::new(study.seed, i).rng());
            let ctx = study.case.context(h, study.p, study.alpha, study.epsilon)?;
            let d = min_distance(&ctx, study.cap)?;
            Ok(OutageSample { h, d_min: d.d_min })
        })
        .collect()
}

pub fn summarize_outage(study: &OutageStudy, samples: &[OutageSample]) -> OutageEstimate {
    let n_outage = samples.iter().filter(|s| s.d_min < study.delta).count() as u64;
    let lemma_bound = study.case.lemma_bound(study.delta, study.p, study.epsilon);
    OutageEstimate {
        case: study.case,
        alpha: study.alpha,
        p: study.p,
        epsilon: study.epsilon,
        delta: study.delta,
        n_samples: samples.len() as u64,
        n_outage,
        sampled_fraction: n_outage as f64 / samples.len().max(1) as f64,
        lemma_bound,
        vacuous: lemma_bound >= 1.0,
    }
}

pub fn estimate_outage_fraction(study: &OutageStudy) -> Result<OutageEstimate> {
    let samples = outage_samples(study)?;
    Ok(summarize_outage(study, &samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decode::DEFAULT_CAP;

    fn study(case: OutageCase, alpha: f64, p: f64, epsilon: f64, delta: f64) -> OutageStudy {
        OutageStudy {
            case,
            alpha,
            p,
            epsilon,
            delta,
            n_samples: 200,
            seed: 1,
            cap: DEFAULT_CAP,
        }
    }

    #[test]
    fn bound_arithmetic() {
        let b = OutageCase::Pair.lemma_bound(0.1, 1e6, 0.2);
        assert!((b - 192.0 * 0.1 * 10f64.powf(-0.6)).abs() < 1e-12);
        assert!((b - 4.82).abs() < 0.01);
        let b = OutageCase::Pair.lemma_bound(0.01, 1e10, 0.4);
        assert!((b - 0.0192).abs() < 1e-12);
    }

    #[test]
    fn zero_delta_never_in_outage() {
        let est = estimate_outage_fraction(&study(OutageCase::Pair, 1.2, 1e6, 0.2, 0.0)).unwrap();
        assert_eq!(est.sampled_fraction, 0.0);
    }

    #[test]
    fn vacuous_flag_at_small_snr() {
        let est = estimate_outage_fraction(&study(OutageCase::Triple, 0.9, 1e4, 0.05, 0.01)).unwrap();
        assert!(est.vacuous);
        let est = estimate_outage_fraction(&study(OutageCase::Pair, 1.2, 1e6, 0.2, 0.1)).unwrap();
        assert!(est.vacuous);
    }

    #[test]
    fn samples_are_reproducible() {
        let s = study(OutageCase::Pair, 1.2, 1e8, 0.2, 0.05);
        assert_eq!(outage_samples(&s).unwrap(), outage_samples(&s).unwrap());
        for x in outage_samples(&s).unwrap() {
            assert!(x.h.iter().all(|&h| h > 1.0 && h <= 2.0));
        }
    }
}
