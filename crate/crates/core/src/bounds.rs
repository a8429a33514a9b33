//! Closed-form GDoF characterization and finite-SNR rate bounds.
//!
//! All logarithms are base 2, so rates are in bits per channel use.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// `(x)^+`
#[inline]
pub fn pos(x: f64) -> f64 {
    x.max(0.0)
}

/// Link exponents, channel gains and SNR of the two-user channel.
///
/// `alpha_kl` is the exponent of the link from transmitter `l` to receiver `k`,
/// `h_kl` its gain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub alpha11: f64,
    pub alpha12: f64,
    pub alpha21: f64,
    pub alpha22: f64,
    pub h11: f64,
    pub h12: f64,
    pub h21: f64,
    pub h22: f64,
    pub p: f64,
}

impl ChannelParams {
    /// Gains are ordered `[h11, h12, h21, h22]`.
    pub fn new(alphas: [f64; 4], gains: [f64; 4], p: f64) -> Result<Self> {
        let [alpha11, alpha12, alpha21, alpha22] = alphas;
        let [h11, h12, h21, h22] = gains;
        let params = Self {
            alpha11,
            alpha12,
            alpha21,
            alpha22,
            h11,
            h12,
            h21,
            h22,
            p,
        };
        params.validate()?;
        Ok(params)
    }

    /// `alpha11 = alpha22 = 1`, `alpha12 = alpha21 = alpha`.
    pub fn symmetric(alpha: f64, gains: [f64; 4], p: f64) -> Result<Self> {
        Self::new([1.0, alpha, alpha, 1.0], gains, p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, a) in [
            ("alpha11", self.alpha11),
            ("alpha12", self.alpha12),
            ("alpha21", self.alpha21),
            ("alpha22", self.alpha22),
        ] {
            if !a.is_finite() || a < 0.0 {
                return Err(Error::param(name, format!("must be finite and >= 0, got {a}")));
            }
        }
        for (name, h) in [
            ("h11", self.h11),
            ("h12", self.h12),
            ("h21", self.h21),
            ("h22", self.h22),
        ] {
            if !(h > 1.0 && h <= 2.0) {
                return Err(Error::param(name, format!("must lie in (1, 2], got {h}")));
            }
        }
        if !(self.p.is_finite() && self.p >= 1.0) {
            return Err(Error::param("p", format!("must be finite and >= 1, got {}", self.p)));
        }
        Ok(())
    }

    pub fn gains(&self) -> [f64; 4] {
        [self.h11, self.h12, self.h21, self.h22]
    }

    pub fn is_symmetric(&self) -> bool {
        self.alpha11 == 1.0 && self.alpha22 == 1.0 && self.alpha12 == self.alpha21
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiTriple {
    pub phi1: f64,
    pub phi2: f64,
    pub phi3: f64,
}

pub fn compute_phi(params: &ChannelParams) -> PhiTriple {
    let phi1 = pos(params.alpha12 - pos(params.alpha22 - params.alpha21));
    let phi2 = pos(params.alpha11 - phi1);
    let phi3 = params.alpha21.min(params.alpha12).min(phi2);
    PhiTriple { phi1, phi2, phi3 }
}

/// The three GDoF upper bounds for general exponents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GdofBounds {
    pub bound1: f64,
    pub bound2: f64,
    pub bound3: f64,
}

impl GdofBounds {
    pub fn min(&self) -> f64 {
        self.bound1.min(self.bound2).min(self.bound3)
    }
}

pub fn gdof_bounds_general(params: &ChannelParams) -> GdofBounds {
    let PhiTriple { phi1, phi3, .. } = compute_phi(params);
    let (a11, a12, a21, a22) = (params.alpha11, params.alpha12, params.alpha21, params.alpha22);
    GdofBounds {
        bound1: phi1.max(pos(a11 - phi3)) + pos(phi3 - phi1),
        bound2: 0.5 * (pos(a11 - a21) + pos(a22 - a12) + a11.max(a12)),
        bound3: pos(a22 + a11 - a21),
    }
}

pub fn gdof_upper_general(params: &ChannelParams) -> f64 {
    gdof_bounds_general(params).min()
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha >= 0.0 {
        Ok(())
    } else {
        Err(Error::param("alpha", format!("must be finite and >= 0, got {alpha}")))
    }
}

/// Secure GDoF of the symmetric channel with a cooperative jamming helper.
pub fn gdof_theorem1(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let a = alpha;
    Ok(if a <= 0.5 {
        1.0
    } else if a <= 0.75 {
        2.0 - 2.0 * a
    } else if a <= 5.0 / 6.0 {
        2.0 * a - 1.0
    } else if a <= 1.0 {
        1.5 - a
    } else if a <= 4.0 / 3.0 {
        a / 2.0
    } else if a <= 2.0 {
        2.0 - a
    } else {
        0.0
    })
}

/// Upper bound at the symmetric point, from the symmetric forms of the three
/// bounds: `phi1 = (2 alpha - 1)^+`, `phi3 = min(alpha, 1 - phi1)`.
pub fn gdof_upper_symmetric(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let a = alpha;
    let phi1 = pos(2.0 * a - 1.0);
    let phi3 = a.min(pos(1.0 - phi1));
    let b1 = phi1.max(1.0 - phi3) + pos(phi3 - phi1);
    let b2 = pos(1.0 - a) + 0.5 * a.max(1.0);
    let b3 = pos(2.0 - a);
    Ok(b1.min(b2).min(b3))
}

/// Secure GDoF without the helper.
pub fn gdof_no_helper(params: &ChannelParams) -> f64 {
    pos(params.alpha11 - params.alpha21)
}

/// Achievable secure rate without the helper, in bits.
pub fn capacity_no_helper_lb(params: &ChannelParams) -> f64 {
    let p = params.p;
    0.5 * (1.0 + p.powf(params.alpha11) * params.h11 * params.h11).log2()
        - 0.5 * (1.0 + p.powf(params.alpha21) * params.h21 * params.h21).log2()
}

/// Finite-SNR secure-rate upper bounds in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateBoundsBits {
    pub bound_wt: f64,
    pub bound_half_sum: f64,
    pub bound_third: f64,
}

impl RateBoundsBits {
    pub fn min(&self) -> f64 {
        self.bound_wt.min(self.bound_half_sum).min(self.bound_third)
    }

    /// Each bound divided by `log2(P) / 2`; `None` at `P = 1`.
    pub fn normalized(&self, p: f64) -> Option<[f64; 3]> {
        let d = 0.5 * p.log2();
        (d > 0.0).then(|| [self.bound_wt / d, self.bound_half_sum / d, self.bound_third / d])
    }
}

pub fn rate_upper_finite(params: &ChannelParams) -> RateBoundsBits {
    let ChannelParams {
        alpha11: a11,
        alpha12: a12,
        alpha21: a21,
        alpha22: a22,
        h11,
        h12,
        h21,
        h22,
        p,
    } = *params;
    let PhiTriple { phi1, phi3, .. } = compute_phi(params);
    let half_log = |x: f64| 0.5 * x.log2();
    let sq = |x: f64| x * x;

    let bound_wt = half_log(
        1.0 + p.powf(a11 - phi3) * sq(h11) / sq(h21)
            + p.powf(a12 - pos(a22 - a21)) * sq(h12) / sq(h22),
    ) + half_log(1.0 + p.powf(phi3 - phi1) * sq(h22))
        + 7.3;

    let bound_half_sum = 0.5
        * (half_log(1.0 + p.powf(pos(a11 - a21)) / sq(h21))
            + half_log(1.0 + p.powf(pos(a22 - a12)) / sq(h12))
            + half_log(1.0 + p.powf(a11) * sq(h11) + p.powf(a12) * sq(h12))
            + 9f64.log2());

    let bound_third = half_log(
        1.0 + p.powf(a11 - a21) * sq(h11) / sq(h21)
            + p.powf(a22 + a11 - a21) * sq(h11) * sq(h22) / sq(h21),
    );

    RateBoundsBits {
        bound_wt,
        bound_half_sum,
        bound_third,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(alpha: f64) -> ChannelParams {
        ChannelParams::symmetric(alpha, [1.5; 4], 1.0).unwrap()
    }

    #[test]
    fn phi_examples() {
        let phi = compute_phi(&sym(0.6));
        assert!((phi.phi1 - 0.2).abs() < 1e-12);
        assert!((phi.phi2 - 0.8).abs() < 1e-12);
        assert!((phi.phi3 - 0.6).abs() < 1e-12);

        let phi = compute_phi(&sym(1.5));
        assert_eq!((phi.phi1, phi.phi2, phi.phi3), (1.5, 0.0, 0.0));
    }

    #[test]
    fn phi_asymmetric() {
        let p = ChannelParams::new([1.0, 0.3, 0.9, 0.5], [1.5; 4], 1.0).unwrap();
        let phi = compute_phi(&p);
        assert_eq!(phi.phi1, 0.3);
        assert!((phi.phi2 - 0.7).abs() < 1e-15);
        assert_eq!(phi.phi3, 0.3);
    }

    #[test]
    fn curve_breakpoints() {
        for (a, d) in [
            (0.0, 1.0),
            (0.3, 1.0),
            (0.5, 1.0),
            (0.7, 0.6),
            (0.75, 0.5),
            (0.8, 0.6),
            (0.9, 0.6),
            (1.0, 0.5),
            (1.2, 0.6),
            (1.5, 0.5),
            (2.0, 0.0),
            (2.5, 0.0),
        ] {
            let got = gdof_theorem1(a).unwrap();
            assert!((got - d).abs() < 1e-12, "alpha {a}: {got} vs {d}");
        }
        assert!(gdof_theorem1(-0.1).is_err());
        assert!(gdof_theorem1(f64::NAN).is_err());
    }

    #[test]
    fn symmetric_upper_matches_general() {
        for i in 0..=300 {
            let a = i as f64 / 100.0;
            let g = gdof_upper_general(&sym(a));
            let s = gdof_upper_symmetric(a).unwrap();
            assert!((g - s).abs() < 1e-12, "alpha {a}");
        }
    }

    #[test]
    fn no_helper_examples() {
        assert!((gdof_no_helper(&sym(0.3)) - 0.7).abs() < 1e-12);
        assert_eq!(gdof_no_helper(&sym(1.2)), 0.0);
    }

    #[test]
    fn finite_bounds_at_unit_snr() {
        // alpha = 1, P = 1, every gain 1.5
        let p = ChannelParams::symmetric(1.0, [1.5; 4], 1.0).unwrap();
        let b = rate_upper_finite(&p);
        let want1 = 0.5 * 3f64.log2() + 0.5 * 3.25f64.log2() + 7.3;
        assert!((b.bound_wt - want1).abs() < 1e-9, "{}", b.bound_wt);
        assert!(b.normalized(1.0).is_none());
    }

    #[test]
    fn finite_third_bound_small_gains() {
        let p = ChannelParams::symmetric(2.0, [1.01; 4], 1e4).unwrap();
        let b = rate_upper_finite(&p);
        // h11^2 h22^2 / h21^2 collapses to h^2 when every gain is equal
        let want = 0.5 * (1.0 + 1e-4 + 1.01f64 * 1.01).log2();
        assert!((b.bound_third - want).abs() < 1e-12);
    }

    #[test]
    fn no_helper_capacity_example() {
        let p = ChannelParams::symmetric(0.0, [2.0, 1.5, 1.5, 1.5], 100.0).unwrap();
        let want = 0.5 * 401f64.log2() - 0.5 * 3.25f64.log2();
        assert!((capacity_no_helper_lb(&p) - want).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(ChannelParams::symmetric(0.5, [1.0, 1.5, 1.5, 1.5], 1.0).is_err());
        assert!(ChannelParams::symmetric(0.5, [2.5, 1.5, 1.5, 1.5], 1.0).is_err());
        assert!(ChannelParams::symmetric(0.5, [1.5; 4], 0.5).is_err());
        assert!(ChannelParams::symmetric(-0.5, [1.5; 4], 1.0).is_err());
        assert!(ChannelParams::symmetric(0.5, [2.0; 4], 1.0).is_ok());
    }
}
