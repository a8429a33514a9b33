//! Binary fixed-point amplitudes.
//!
//! At the SNRs where the layered scheme separates, received samples reach
//! 1e30 while the weakest layer is spaced by a few units, far below f64
//! resolution. Received samples and per-index coefficients are held as
//! `i128` with [`FRAC_BITS`] fractional bits, so composing a sample from
//! integer symbol indices and subtracting decoded layers is exact.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const FRAC_BITS: u32 = 16;
const ONE: f64 = (1u64 << FRAC_BITS) as f64;

/// Largest magnitude any sample or coefficient may reach (about 8e31); the
/// remaining 5 bits are headroom for sums of a handful of such terms.
pub const LIMIT: f64 = (1u128 << 122) as f64 / ONE;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct Fixed(pub i128);

impl Fixed {
    pub const ZERO: Fixed = Fixed(0);

    pub fn from_f64(x: f64) -> Result<Self> {
        if !x.is_finite() || x.abs() >= LIMIT {
            return Err(Error::DynamicRange {
                magnitude: x.abs(),
                limit: LIMIT,
            });
        }
        Ok(Fixed((x * ONE).round() as i128))
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / ONE
    }

    pub fn abs(self) -> Self {
        Fixed(self.0.abs())
    }

    /// `self * n` for an integer symbol index.
    #[inline]
    pub fn times(self, n: i128) -> Self {
        Fixed(self.0 * n)
    }

    /// Nearest integer to `self / c`, ties toward positive infinity. `c` must be positive.
    #[inline]
    pub fn div_round(self, c: Fixed) -> i128 {
        debug_assert!(c.0 > 0);
        let q = self.0.div_euclid(c.0);
        let r = self.0.rem_euclid(c.0);
        if 2 * r >= c.0 {
            q + 1
        } else {
            q
        }
    }
}

impl Add for Fixed {
    type Output = Fixed;
    #[inline]
    fn add(self, o: Fixed) -> Fixed {
        Fixed(self.0 + o.0)
    }
}

impl Sub for Fixed {
    type Output = Fixed;
    #[inline]
    fn sub(self, o: Fixed) -> Fixed {
        Fixed(self.0 - o.0)
    }
}

impl Neg for Fixed {
    type Output = Fixed;
    #[inline]
    fn neg(self) -> Fixed {
        Fixed(-self.0)
    }
}

impl fmt::Display for Fixed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_exact_dyadic() {
        for x in [0.0, 1.5, -3.25, 1e20, -7.0 / 1024.0] {
            assert_eq!(Fixed::from_f64(x).unwrap().to_f64(), x);
        }
    }

    #[test]
    fn div_round_ties_and_signs() {
        let c = Fixed::from_f64(2.0).unwrap();
        let at = |x: f64| Fixed::from_f64(x).unwrap().div_round(c);
        assert_eq!(at(2.9), 1);
        assert_eq!(at(3.0), 2);
        assert_eq!(at(-2.9), -1);
        assert_eq!(at(-3.1), -2);
        assert_eq!(at(0.0), 0);
    }

    #[test]
    fn range_guard() {
        assert!(Fixed::from_f64(1e32).is_err());
        assert!(Fixed::from_f64(f64::NAN).is_err());
        assert!(Fixed::from_f64(1e31).is_ok());
    }
}
