//! The middle-thirds devil's staircase, evaluated exactly on rationals, plus
//! gap-constancy reports and the scale-invariant ODE residual.
//!
//! Evaluation is the ternary-to-binary digit map: expand t in base 3,
//! truncate at the first digit 1 (it becomes a binary 1), send 0→0 and 2→1,
//! and read the result in base 2. Long division with remainder-cycle
//! detection turns eventually periodic expansions into exact rationals, so
//! values like φ(1/4) = 1/3 come out exactly rather than to finite precision.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// A staircase evaluation with its digit trace.
#[derive(Debug, Clone)]
pub struct StaircaseValue {
    pub input: BigRational,
    pub value: BigRational,
    /// False only when the digit budget ran out before the expansion
    /// terminated or cycled; the value is then a truncation.
    pub exact: bool,
    /// Ternary digits consumed (up to the stopping point).
    pub ternary: Vec<u8>,
    /// Binary digits emitted.
    pub binary: Vec<u8>,
}

fn dyadic(num: BigInt, shift: usize) -> BigRational {
    BigRational::new(num, BigInt::one() << shift)
}

/// Evaluate the Cantor function at a rational t ∈ [0,1] with the given digit
/// budget.
pub fn devil_staircase(t: &BigRational, precision: usize) -> Result<StaircaseValue> {
    if precision == 0 {
        return Err(Error::Domain("precision must be at least 1 digit".into()));
    }
    if t.is_negative() || *t > BigRational::one() {
        return Err(Error::Domain(format!("staircase input {t} lies outside [0, 1]")));
    }
    if t.is_one() {
        return Ok(StaircaseValue {
            input: t.clone(),
            value: BigRational::one(),
            exact: true,
            ternary: vec![],
            binary: vec![],
        });
    }

    let den = t.denom().clone();
    let mut rem = t.numer().clone();
    let mut ternary: Vec<u8> = Vec::new();
    let mut binary: Vec<u8> = Vec::new();
    // prefix value accumulated as an integer over 2^k
    let mut prefix = BigInt::zero();
    let mut seen: HashMap<BigInt, usize> = HashMap::new();

    for step in 0..precision {
        if rem.is_zero() {
            // terminating ternary expansion: remaining digits are all 0
            return Ok(StaircaseValue {
                input: t.clone(),
                value: dyadic(prefix, step),
                exact: true,
                ternary,
                binary,
            });
        }
        if let Some(&start) = seen.get(&rem) {
            // remainder cycle: binary digits start..step repeat forever
            let cycle_len = step - start;
            let cycle_num: BigInt = binary[start..step]
                .iter()
                .fold(BigInt::zero(), |acc, &b| acc * 2 + b);
            // value = prefix_{start}/2^{start} + cycle/(2^{start}·(2^{len}−1))
            let prefix_start: BigInt = binary[..start]
                .iter()
                .fold(BigInt::zero(), |acc, &b| acc * 2 + b);
            let head = dyadic(prefix_start, start);
            let tail = BigRational::new(
                cycle_num,
                (BigInt::one() << start) * ((BigInt::one() << cycle_len) - BigInt::one()),
            );
            return Ok(StaircaseValue {
                input: t.clone(),
                value: head + tail,
                exact: true,
                ternary,
                binary,
            });
        }
        seen.insert(rem.clone(), step);

        rem *= 3;
        let digit = (&rem / &den)
            .try_into()
            .map(|d: u8| d)
            .expect("ternary digit is 0, 1, or 2");
        rem -= BigInt::from(digit) * &den;
        ternary.push(digit);
        match digit {
            0 => {
                binary.push(0);
                prefix *= 2;
            }
            2 => {
                binary.push(1);
                prefix = prefix * 2 + 1;
            }
            1 => {
                // inside a gap: emit binary 1 and stop
                binary.push(1);
                prefix = prefix * 2 + 1;
                return Ok(StaircaseValue {
                    input: t.clone(),
                    value: dyadic(prefix, step + 1),
                    exact: true,
                    ternary,
                    binary,
                });
            }
            _ => unreachable!(),
        }
    }

    Ok(StaircaseValue {
        input: t.clone(),
        value: dyadic(prefix, precision),
        exact: false,
        ternary,
        binary,
    })
}

/// f64 convenience wrapper (the input is converted to its exact dyadic
/// rational, so monotonicity survives the float boundary).
pub fn devil_staircase_f64(t: f64, precision: usize) -> Result<f64> {
    let exact = crate::rat::ratio_from_f64(t)?;
    let v = devil_staircase(&exact, precision)?;
    Ok(crate::rat::ratio_to_f64(&v.value))
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct GapConstancyReport {
    pub gaps_checked: usize,
    pub samples_per_gap: usize,
    /// Indices of gaps where some interior sample disagreed beyond
    /// 2^{-precision}.
    pub failures: Vec<usize>,
}

/// Sample each open gap at `samples` interior points and check that the
/// staircase is constant across them to 2^{-precision}.
pub fn gap_constancy_check(
    gaps: &[(BigRational, BigRational)],
    samples: usize,
    precision: usize,
) -> Result<GapConstancyReport> {
    if samples == 0 {
        return Err(Error::Domain("need at least one sample per gap".into()));
    }
    let tol = BigRational::new(BigInt::one(), BigInt::one() << precision);
    let mut failures = Vec::new();
    for (idx, (lo, hi)) in gaps.iter().enumerate() {
        if lo >= hi {
            return Err(Error::Domain(format!("gap ({lo}, {hi}) is empty or reversed")));
        }
        let width = hi - lo;
        let step = &width / BigRational::from_integer(BigInt::from(samples as i64 + 1));
        let mut reference: Option<BigRational> = None;
        for i in 1..=samples {
            let point = lo + &step * BigRational::from_integer(BigInt::from(i as i64));
            let value = devil_staircase(&point, precision)?.value;
            match &reference {
                None => reference = Some(value),
                Some(r) => {
                    if (&value - r).abs() > tol {
                        failures.push(idx);
                        break;
                    }
                }
            }
        }
    }
    Ok(GapConstancyReport {
        gaps_checked: gaps.len(),
        samples_per_gap: samples,
        failures,
    })
}

/// Residual |t·ψ'(t) − ψ(t)| of the scale-invariant equation at t, with a
/// central finite difference for ψ'.
pub fn ode_residual_of(psi: impl Fn(f64) -> f64, t: f64, step: f64) -> Result<f64> {
    if !step.is_finite() || step <= 0.0 {
        return Err(Error::Domain(format!("step must be positive, got {step}")));
    }
    if !t.is_finite() {
        return Err(Error::Domain("evaluation point must be finite".into()));
    }
    let derivative = (psi(t + step) - psi(t - step)) / (2.0 * step);
    Ok((t * derivative - psi(t)).abs())
}

/// Residual for the solution family ψ(t) = C·t at t = ln(1/x); this family
/// solves the equation exactly, so the residual is finite-difference noise.
pub fn ode_residual(c: f64, x: f64, step: f64) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Domain(format!("x must lie in (0, 1), got {x}")));
    }
    if !c.is_finite() {
        return Err(Error::Domain("coefficient must be finite".into()));
    }
    let t = (1.0 / x).ln();
    ode_residual_of(|u| c * u, t, step)
}
