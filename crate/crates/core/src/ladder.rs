//! Scale ladders: the finite stand-ins for the limits ε→0 and δ→0.
//!
//! Two representations are needed. Cover geometry (box counts, dilations) is
//! exact-rational so aligned scales like 3^{-k} count exactly; that is
//! [`ScaleLadder`]. Valuation extrapolation works on ln(1/δ) directly so
//! ladders can descend far past the smallest representable f64 δ; that is
//! [`DeltaLadder`].

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rat::ratio_to_f64;

/// Minimum ladder length for any exponent fit.
pub const MIN_POINTS: usize = 4;

/// Strictly decreasing sequence of exact scales in (0, 1].
#[derive(Debug, Clone)]
pub struct ScaleLadder {
    values: Vec<BigRational>,
}

impl ScaleLadder {
    /// Geometric ladder start, start·ratio, …, length `count`.
    pub fn geometric(start: BigRational, ratio: BigRational, count: usize) -> Result<Self> {
        if count < MIN_POINTS {
            return Err(Error::Domain(format!(
                "ladder needs at least {MIN_POINTS} points, got {count}"
            )));
        }
        let one = BigRational::one();
        if start <= BigRational::zero() || start > one {
            return Err(Error::Domain("ladder start must lie in (0, 1]".into()));
        }
        if ratio <= BigRational::zero() || ratio >= one {
            return Err(Error::Domain("ladder ratio must lie in (0, 1)".into()));
        }
        let mut values = Vec::with_capacity(count);
        let mut v = start;
        for _ in 0..count {
            values.push(v.clone());
            v *= &ratio;
        }
        Ok(Self { values })
    }

    /// Inverse powers base^{-k} for k in `first_depth..=last_depth`.
    pub fn inverse_powers(base: u32, first_depth: u32, last_depth: u32) -> Result<Self> {
        if base < 2 {
            return Err(Error::Domain("ladder base must be at least 2".into()));
        }
        if last_depth < first_depth {
            return Err(Error::Domain("ladder depth range is empty".into()));
        }
        let start = BigRational::new(BigInt::one(), BigInt::from(base).pow(first_depth));
        let ratio = BigRational::new(BigInt::one(), BigInt::from(base));
        Self::geometric(start, ratio, (last_depth - first_depth + 1) as usize)
    }

    pub fn values(&self) -> &[BigRational] {
        &self.values
    }

    pub fn f64_values(&self) -> Vec<f64> {
        self.values.iter().map(ratio_to_f64).collect()
    }

    pub fn min_value(&self) -> &BigRational {
        self.values.last().expect("ladder is never empty")
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Increasing sequence of ln(1/δ) values, δ descending toward 0.
#[derive(Debug, Clone)]
pub struct DeltaLadder {
    log_inv: Vec<f64>,
}

impl DeltaLadder {
    /// Decade ladder δ = 10^{hi}, …, 10^{lo} (exponents negative, hi > lo),
    /// e.g. `decades(-2, -9)` for δ from 1e-2 down to 1e-9.
    pub fn decades(hi_exp: i32, lo_exp: i32) -> Result<Self> {
        if hi_exp >= 0 || lo_exp >= hi_exp {
            return Err(Error::Domain(
                "decade ladder needs negative exponents with hi > lo".into(),
            ));
        }
        let ln10 = std::f64::consts::LN_10;
        let log_inv: Vec<f64> = (lo_exp..=hi_exp)
            .rev()
            .map(|e| -(e as f64) * ln10)
            .collect();
        Self::from_log_inv(log_inv)
    }

    /// Ladder from explicit ln(1/δ) values (must be increasing and positive).
    pub fn from_log_inv(log_inv: Vec<f64>) -> Result<Self> {
        if log_inv.len() < MIN_POINTS {
            return Err(Error::Domain(format!(
                "ladder needs at least {MIN_POINTS} points, got {}",
                log_inv.len()
            )));
        }
        if log_inv.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(Error::Domain("ln(1/delta) values must be positive and finite".into()));
        }
        if log_inv.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain("ln(1/delta) values must be strictly increasing".into()));
        }
        Ok(Self { log_inv })
    }

    /// Deep default used for sum-family sweeps: ln(1/δ) = 1e5 … 1e6 in ten
    /// steps, far below any f64-representable δ. Power-law families are
    /// evaluated in log space so this costs nothing in accuracy.
    pub fn deep() -> Self {
        let log_inv: Vec<f64> = (1..=10).map(|k| 1e5 * k as f64).collect();
        Self { log_inv }
    }

    /// ln(1/δ) per rung, increasing.
    pub fn log_inv_values(&self) -> &[f64] {
        &self.log_inv
    }

    pub fn len(&self) -> usize {
        self.log_inv.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_inv.is_empty()
    }
}
