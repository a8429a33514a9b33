//! The two-receiver Gaussian channel.
//!
//! `y_k = sqrt(P^a_k1) h_k1 x1 + sqrt(P^a_k2) h_k2 x2 + z_k`, `z_k ~ N(0, 1)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::bounds::ChannelParams;
use crate::fixed::{Fixed, LIMIT};
use crate::scheme::{tx1_gain, tx2_gain, Constellations, SchemeParams, Signal, SymbolTuple};
use crate::{Error, Result};

/// Identifies one reproducible random stream: `(seed, stream_id)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelSample {
    pub y1: f64,
    pub y2: f64,
}

#[inline]
fn link(p: f64, alpha: f64, h: f64) -> f64 {
    p.powf(alpha).sqrt() * h
}

pub fn transmit_noiseless(params: &ChannelParams, x1: f64, x2: f64) -> ChannelSample {
    let p = params.p;
    ChannelSample {
        y1: link(p, params.alpha11, params.h11) * x1 + link(p, params.alpha12, params.h12) * x2,
        y2: link(p, params.alpha21, params.h21) * x1 + link(p, params.alpha22, params.h22) * x2,
    }
}

/// Draws `z1` then `z2` from `rng`.
pub fn transmit<R: Rng + ?Sized>(params: &ChannelParams, x1: f64, x2: f64, rng: &mut R) -> ChannelSample {
    let clean = transmit_noiseless(params, x1, x2);
    let z1: f64 = rng.sample(StandardNormal);
    let z2: f64 = rng.sample(StandardNormal);
    ChannelSample {
        y1: clean.y1 + z1,
        y2: clean.y2 + z2,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Receiver {
    Rx1,
    Rx2,
}

/// Amplitude multiplying each signal's symbol value at each receiver:
/// encoder gain composed with the channel gain. Absent signals get 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RxCoefficients {
    pub y1: [f64; 5],
    pub y2: [f64; 5],
}

impl RxCoefficients {
    pub fn get(&self, rx: Receiver, s: Signal) -> f64 {
        match rx {
            Receiver::Rx1 => self.y1[s.index()],
            Receiver::Rx2 => self.y2[s.index()],
        }
    }
}

pub fn rx_coefficients(params: &ChannelParams, sp: &SchemeParams) -> RxCoefficients {
    let p = params.p;
    let mut out = RxCoefficients {
        y1: [0.0; 5],
        y2: [0.0; 5],
    };
    for s in sp.present() {
        let (g1, g2) = if s.is_tx1() {
            let enc = params.h22 * tx1_gain(sp, p, s).unwrap_or(0.0);
            (
                link(p, params.alpha11, params.h11) * enc,
                link(p, params.alpha21, params.h21) * enc,
            )
        } else {
            let enc = params.h21 * tx2_gain(sp, p, s).unwrap_or(0.0);
            (
                link(p, params.alpha12, params.h12) * enc,
                link(p, params.alpha22, params.h22) * enc,
            )
        };
        out.y1[s.index()] = g1;
        out.y2[s.index()] = g2;
    }
    out
}

/// Received amplitude per unit symbol index, in fixed point. The simulator
/// forms samples from these, so the decoder sees exactly the channel it
/// models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexCoefficients {
    pub y1: [Fixed; 5],
    pub y2: [Fixed; 5],
}

impl IndexCoefficients {
    pub fn new(rx: &RxCoefficients, consts: &Constellations) -> Result<Self> {
        let mut out = IndexCoefficients {
            y1: [Fixed::ZERO; 5],
            y2: [Fixed::ZERO; 5],
        };
        let mut span = [0.0f64; 2];
        for s in Signal::ALL {
            let Some(c) = consts.get(s) else { continue };
            let i = s.index();
            out.y1[i] = Fixed::from_f64(rx.y1[i] * c.xi)?;
            out.y2[i] = Fixed::from_f64(rx.y2[i] * c.xi)?;
            span[0] += (rx.y1[i] * c.xi).abs() * c.q_max as f64;
            span[1] += (rx.y2[i] * c.xi).abs() * c.q_max as f64;
        }
        let widest = span[0].max(span[1]);
        if widest >= LIMIT / 4.0 {
            return Err(Error::DynamicRange {
                magnitude: widest,
                limit: LIMIT / 4.0,
            });
        }
        Ok(out)
    }

    pub fn get(&self, rx: Receiver, s: Signal) -> Fixed {
        match rx {
            Receiver::Rx1 => self.y1[s.index()],
            Receiver::Rx2 => self.y2[s.index()],
        }
    }

    fn clean(coef: &[Fixed; 5], sym: &SymbolTuple) -> Fixed {
        Signal::ALL.into_iter().fold(Fixed::ZERO, |acc, s| {
            acc + coef[s.index()].times(sym.get(s).unwrap_or(0))
        })
    }

    /// `(y1, y2)` for the given symbols and noise realisation.
    pub fn observe(&self, sym: &SymbolTuple, z1: f64, z2: f64) -> (Fixed, Fixed) {
        let noise = |z: f64| Fixed::from_f64(z).expect("gaussian draw within range");
        (
            Self::clean(&self.y1, sym) + noise(z1),
            Self::clean(&self.y2, sym) + noise(z2),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::{build_constellations, scheme_params, DEFAULT_GAMMA};

    #[test]
    fn unit_snr_substitution() {
        let params = ChannelParams::symmetric(0.5, [2.0; 4], 1.0).unwrap();
        let s = transmit_noiseless(&params, 1.0, 0.0);
        assert_eq!((s.y1, s.y2), (2.0, 2.0));
    }

    #[test]
    fn mixed_exponents() {
        let params = ChannelParams::symmetric(0.5, [1.5, 1.25, 1.75, 1.1], 1e4).unwrap();
        let s = transmit_noiseless(&params, 1.0, 1.0);
        assert!((s.y1 - (100.0 * 1.5 + 10.0 * 1.25)).abs() < 1e-12);
    }

    #[test]
    fn noise_is_standard_and_reproducible() {
        let params = ChannelParams::symmetric(0.5, [1.5; 4], 1e4).unwrap();
        let mut rng = RngStream::new(11, 4).rng();
        let n = 100_000;
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let y = transmit(&params, 0.0, 0.0, &mut rng);
            s1 += y.y1 * y.y1;
            s2 += y.y2 * y.y2;
        }
        assert!((s1 / n as f64 - 1.0).abs() < 0.02);
        assert!((s2 / n as f64 - 1.0).abs() < 0.02);

        let a = transmit(&params, 0.1, 0.2, &mut RngStream::new(5, 9).rng());
        let b = transmit(&params, 0.1, 0.2, &mut RngStream::new(5, 9).rng());
        let c = transmit(&params, 0.1, 0.2, &mut RngStream::new(5, 10).rng());
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn aligned_pairs_at_eavesdropper() {
        let params = ChannelParams::symmetric(0.9, [1.3, 1.7, 1.2, 1.9], 1e6).unwrap();
        let sp = scheme_params(0.9, 0.05, DEFAULT_GAMMA).unwrap();
        let rx = rx_coefficients(&params, &sp);
        let (vc, uc) = (rx.get(Receiver::Rx2, Signal::Vc), rx.get(Receiver::Rx2, Signal::Uc));
        assert!((vc - uc).abs() <= 1e-12 * vc.abs());
        let want = 1e6f64.powf(0.9).sqrt() * 1.2 * 1.9;
        assert!((vc - want).abs() <= 1e-12 * want);

        let params = ChannelParams::symmetric(0.3, [1.3, 1.7, 1.2, 1.9], 1e6).unwrap();
        let sp = scheme_params(0.3, 0.05, DEFAULT_GAMMA).unwrap();
        let rx = rx_coefficients(&params, &sp);
        let want = 1e6f64.powf(0.3).sqrt() * 1.2 * 1.9;
        for s in [Signal::Vm, Signal::Up] {
            assert!((rx.get(Receiver::Rx2, s) - want).abs() <= 1e-12 * want);
        }
        for s in [Signal::Vc, Signal::Uc] {
            assert_eq!(rx.get(Receiver::Rx1, s), 0.0);
            assert_eq!(rx.get(Receiver::Rx2, s), 0.0);
        }
    }

    #[test]
    fn fixed_observation_matches_float_path() {
        let params = ChannelParams::symmetric(0.3, [1.3, 1.7, 1.2, 1.9], 1e8).unwrap();
        let sp = scheme_params(0.3, 0.05, DEFAULT_GAMMA).unwrap();
        let consts = build_constellations(&sp, params.p).unwrap();
        let idx = IndexCoefficients::new(&rx_coefficients(&params, &sp), &consts).unwrap();
        let sym = SymbolTuple {
            vm: Some(3),
            vp: Some(-40),
            up: Some(2),
            ..Default::default()
        };
        let x1 = crate::scheme::encode_tx1(&sym, &sp, &consts, &params);
        let x2 = crate::scheme::encode_tx2(&sym, &sp, &consts, &params);
        let f = transmit_noiseless(&params, x1, x2);
        let (y1, y2) = idx.observe(&sym, 0.0, 0.0);
        assert!((y1.to_f64() - f.y1).abs() < 1e-3);
        assert!((y2.to_f64() - f.y2).abs() < 1e-3);
    }
}
