//! Exact-rational helpers shared across modules.

use num_bigint::BigInt;
pub use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Parse a rational from `num/den` or plain integer form (`"1/3"`, `"7"`, `"-2/5"`).
pub fn parse_ratio(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let parse_int = |t: &str| -> Result<BigInt> {
        t.trim()
            .parse::<BigInt>()
            .map_err(|_| Error::Domain(format!("invalid rational component '{t}'")))
    };
    let r = match s.split_once('/') {
        Some((n, d)) => {
            let den = parse_int(d)?;
            if den.is_zero() {
                return Err(Error::Domain(format!("zero denominator in '{s}'")));
            }
            BigRational::new(parse_int(n)?, den)
        }
        None => BigRational::from_integer(parse_int(s)?),
    };
    Ok(r)
}

/// Convert to f64, robust against numerators/denominators wider than f64's
/// exponent range (plain `Ratio::to_f64` yields inf/inf = NaN there).
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    scaled_to_f64(r.numer(), r.denom())
}

/// `n/d` as f64 without constructing (or reducing) a rational.
pub fn scaled_to_f64(n: &BigInt, d: &BigInt) -> f64 {
    if n.is_zero() {
        return 0.0;
    }
    let nb = n.bits() as i64;
    let db = d.bits() as i64;
    let shift = (nb.min(db) - 96).max(0) as u64;
    let n = (n >> shift).to_f64().unwrap_or(f64::NAN);
    let d = (d >> shift).to_f64().unwrap_or(f64::NAN);
    n / d
}

/// Exact rational from an f64 (every finite f64 is a dyadic rational).
pub fn ratio_from_f64(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::Domain(format!("{x} is not finite")))
}

/// `r^n` for non-negative integer exponents.
pub fn pow_ratio(r: &BigRational, n: u32) -> BigRational {
    let mut acc = BigRational::from_integer(BigInt::from(1));
    for _ in 0..n {
        acc *= r;
    }
    acc
}

/// Render as `num/den` (or plain integer when the denominator is 1).
pub fn format_ratio(r: &BigRational) -> String {
    if r.denom() == &BigInt::from(1) {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Decimal rendering with the given number of fractional digits, exact
/// long division (no float round trip).
pub fn decimal_string(r: &BigRational, digits: usize) -> String {
    let neg = r.is_negative();
    let abs = r.abs();
    let int = abs.numer() / abs.denom();
    let mut rem = abs.numer() - &int * abs.denom();
    let mut frac = String::with_capacity(digits);
    let ten = BigInt::from(10);
    for _ in 0..digits {
        if rem.is_zero() {
            break;
        }
        rem *= &ten;
        let d = &rem / abs.denom();
        frac.push_str(&d.to_string());
        rem -= &d * abs.denom();
    }
    let sign = if neg { "-" } else { "" };
    if frac.is_empty() {
        format!("{sign}{int}")
    } else {
        format!("{sign}{int}.{frac}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fraction_and_integer() {
        assert_eq!(parse_ratio("1/3").unwrap(), BigRational::new(1.into(), 3.into()));
        assert_eq!(parse_ratio("7").unwrap(), BigRational::from_integer(7.into()));
        assert_eq!(parse_ratio("-2/5").unwrap(), BigRational::new((-2).into(), 5.into()));
        assert!(parse_ratio("1/0").is_err());
        assert!(parse_ratio("x").is_err());
    }

    #[test]
    fn f64_conversion_handles_wide_ratios() {
        // ~0.5 with ~2000-bit numerator and denominator
        let n = BigInt::from(1) << 1999;
        let d = BigInt::from(1) << 2000;
        let r = BigRational::new(n, d);
        assert!((ratio_to_f64(&r) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn decimal_rendering_is_exact() {
        let r = BigRational::new(1.into(), 8.into());
        assert_eq!(decimal_string(&r, 10), "0.125");
        let third = BigRational::new(1.into(), 3.into());
        assert_eq!(decimal_string(&third, 5), "0.33333");
    }
}
