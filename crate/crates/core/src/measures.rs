//! Exponent estimators on interval covers: box-counting dimension,
//! ε-neighborhood measure, fatness (exterior) exponent, and local measure
//! scaling. Covers stay exact; regression happens in f64 log-log space.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::cantor::{CantorApproximation, GapSchedule, Provenance};
use crate::error::{Error, Result};
use crate::fit::fit_line;
use crate::ladder::ScaleLadder;
use crate::rat::{pow_ratio, ratio_to_f64, scaled_to_f64};

/// Fits with R² below this are flagged invalid (kept, not rejected): slow
/// logarithmic corrections are expected for some of these quantities.
pub const DEFAULT_R2_THRESHOLD: f64 = 0.99;

#[derive(Debug, Clone, serde::Serialize)]
pub struct ExponentEstimate {
    pub exponent: f64,
    pub stderr: f64,
    pub r_squared: f64,
    /// (log scale, log quantity) pairs used by the fit.
    pub points: Vec<(f64, f64)>,
    /// True when r_squared clears [`DEFAULT_R2_THRESHOLD`].
    pub valid: bool,
}

impl ExponentEstimate {
    fn from_points(points: Vec<(f64, f64)>) -> Result<Self> {
        let fit = fit_line(&points)?;
        Ok(Self {
            exponent: fit.slope,
            stderr: fit.slope_stderr,
            r_squared: fit.r_squared,
            valid: fit.r_squared >= DEFAULT_R2_THRESHOLD,
            points,
        })
    }
}

/// Number of half-open grid boxes [kε, (k+1)ε) meeting the cover, exactly.
///
/// An interval meets a box iff their intersection has positive length or the
/// box contains the interval's left endpoint; a closed right endpoint sitting
/// exactly on a grid line does not drag in the next box.
pub fn box_count(approx: &CantorApproximation, eps: &BigRational) -> Result<u64> {
    if *eps <= BigRational::zero() {
        return Err(Error::Domain(format!("box size must be positive, got {eps}")));
    }
    let den = approx.den();
    let en = eps.numer();
    let ed = eps.denom();
    if let Some(count) = box_count_u128(approx, en, ed) {
        return Ok(count);
    }
    // general path: exact BigInt arithmetic
    let divisor = den * en;
    let mut count: u64 = 0;
    let mut last: Option<BigInt> = None;
    for (u, v) in approx.raw_endpoints() {
        let k_first = (u * ed) / &divisor;
        let k_last = (v * ed - BigInt::one()) / &divisor;
        let start = match &last {
            Some(l) if k_first <= *l => l + BigInt::one(),
            _ => k_first,
        };
        if start <= k_last {
            let n = (&k_last - &start + BigInt::one())
                .to_u64()
                .ok_or_else(|| Error::Precision("box count exceeds u64".into()))?;
            count += n;
            last = Some(k_last);
        }
    }
    Ok(count)
}

fn box_count_u128(approx: &CantorApproximation, en: &BigInt, ed: &BigInt) -> Option<u64> {
    let den = approx.den().to_u128()?;
    let en = en.to_u128()?;
    let ed = ed.to_u128()?;
    let divisor = den.checked_mul(en)?;
    // endpoints are bounded by den, so den*ed bounds every product below
    den.checked_mul(ed)?;
    let mut count: u64 = 0;
    let mut last: Option<u128> = None;
    for (u, v) in approx.raw_endpoints() {
        let u = u.to_u128()?;
        let v = v.to_u128()?;
        let k_first = (u * ed) / divisor;
        let k_last = (v * ed - 1) / divisor;
        let start = match last {
            Some(l) if k_first <= l => l + 1,
            _ => k_first,
        };
        if start <= k_last {
            count += (k_last - start + 1) as u64;
            last = Some(k_last);
        }
    }
    Some(count)
}

/// Least-squares slope of log N(ε) against log(1/ε) over the ladder.
pub fn box_count_dimension(
    approx: &CantorApproximation,
    ladder: &ScaleLadder,
) -> Result<ExponentEstimate> {
    if let Provenance::Thin(system) = approx.provenance() {
        if approx.level() > 0 && pow_ratio(system.ratio(), approx.level()) >= *ladder.min_value() {
            return Err(Error::Precision(format!(
                "cover level {} is too shallow for the ladder: interval length must drop below the smallest box",
                approx.level()
            )));
        }
    }
    let mut counts = Vec::with_capacity(ladder.len());
    for eps in ladder.values() {
        counts.push(box_count(approx, eps)?);
    }
    if counts.iter().all(|c| *c == counts[0]) {
        return Err(Error::Fit("box counts are constant across the ladder".into()));
    }
    let points: Vec<(f64, f64)> = ladder
        .values()
        .iter()
        .zip(&counts)
        .map(|(eps, n)| (-ratio_to_f64(eps).ln(), (*n as f64).ln()))
        .collect();
    ExponentEstimate::from_points(points)
}

/// Whether ε-dilations are intersected back with [0,1].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Clip {
    Unit,
    None,
}

/// Lebesgue measure of the ε-neighborhood of the cover, by interval dilation
/// and merging.
pub fn neighborhood_measure(
    approx: &CantorApproximation,
    eps: f64,
    clip: Clip,
) -> Result<f64> {
    if !eps.is_finite() || eps <= 0.0 {
        return Err(Error::Domain(format!("dilation radius must be positive, got {eps}")));
    }
    let den = approx.den();
    let clip_len = |l: f64, r: f64| -> f64 {
        match clip {
            Clip::Unit => (r.min(1.0) - l.max(0.0)).max(0.0),
            Clip::None => r - l,
        }
    };
    let mut total = 0.0;
    let mut cur: Option<(f64, f64)> = None;
    for (u, v) in approx.raw_endpoints() {
        let l = scaled_to_f64(u, den) - eps;
        let r = scaled_to_f64(v, den) + eps;
        cur = match cur {
            None => Some((l, r)),
            Some((cl, cr)) => {
                if l <= cr {
                    Some((cl, cr.max(r)))
                } else {
                    total += clip_len(cl, cr);
                    Some((l, r))
                }
            }
        };
    }
    if let Some((cl, cr)) = cur {
        total += clip_len(cl, cr);
    }
    Ok(total)
}

/// Lebesgue measure of the limit set: 0 for thin covers, the convergent
/// infinite product for fat schedules (certified by the exact tail bound).
pub fn limit_measure(approx: &CantorApproximation) -> f64 {
    match approx.provenance() {
        Provenance::Thin(_) => 0.0,
        Provenance::Fat(schedule) => match schedule {
            GapSchedule::Explicit { values } => {
                ratio_to_f64(&schedule.partial_product(values.len() as u32))
            }
            GapSchedule::Geometric { first } => {
                let first = ratio_to_f64(first);
                let mut product = 1.0;
                let mut term = first;
                let mut k = 0u32;
                while term > 1e-18 && k < 128 {
                    product *= 1.0 - term;
                    term *= 0.5;
                    k += 1;
                }
                product
            }
        },
    }
}

/// Slope of log(neighborhood_measure(ε) − m) against log ε, m the limit
/// measure. For a thin s-set this estimates the fatness exponent β = 1 − s.
/// Dilation is unclipped so the full-interval case degrades to excess = 2ε.
pub fn fatness_exponent(
    approx: &CantorApproximation,
    ladder: &ScaleLadder,
) -> Result<ExponentEstimate> {
    let m = limit_measure(approx);
    let mut points = Vec::with_capacity(ladder.len());
    for eps_exact in ladder.values() {
        let eps = ratio_to_f64(eps_exact);
        let excess = neighborhood_measure(approx, eps, Clip::None)? - m;
        if excess <= 0.0 {
            return Err(Error::Ladder(format!(
                "nonpositive excess measure at eps = {eps}; ladder descends below resolution"
            )));
        }
        points.push((eps.ln(), excess.ln()));
    }
    ExponentEstimate::from_points(points)
}

/// Slope of log m_proxy([0,x]) against log x for a thin cover, where
/// m_proxy weights each level-n interval by (a^n)^{s0} with s0 taken from
/// box counting. Partially covered intervals contribute their covered
/// fraction, which vanishes at ladders aligned to the construction.
pub fn local_measure_scaling(
    approx: &CantorApproximation,
    x_ladder: &ScaleLadder,
) -> Result<ExponentEstimate> {
    let system = match approx.provenance() {
        Provenance::Thin(system) => system,
        Provenance::Fat(_) => {
            return Err(Error::Domain("local measure scaling requires a thin cover".into()))
        }
    };
    let level = approx.level();
    let weight = if level == 0 {
        1.0
    } else {
        if level < 5 {
            return Err(Error::Precision(format!(
                "level {level} is too shallow to calibrate the dimension weight (need >= 5)"
            )));
        }
        let ratio = system.ratio().clone();
        let count = (level - 1).min(8);
        let calib = if ratio.numer() == &BigInt::one() {
            let base = ratio
                .denom()
                .to_u32()
                .ok_or_else(|| Error::Precision("ratio denominator too large for ladder".into()))?;
            ScaleLadder::inverse_powers(base, 1, count)?
        } else {
            ScaleLadder::geometric(ratio.clone(), ratio.clone(), count as usize)?
        };
        let s0 = box_count_dimension(approx, &calib)?.exponent;
        (s0 * level as f64 * ratio_to_f64(&ratio).ln()).exp()
    };

    let den = approx.den();
    let endpoints = approx.raw_endpoints();
    let mut points = Vec::with_capacity(x_ladder.len());
    for x in x_ladder.values() {
        let xn = x.numer();
        let xd = x.denom();
        let target = xn * den;
        // intervals fully inside [0, x]: v/den <= x
        let idx = endpoints.partition_point(|(_, v)| v * xd <= target);
        let mut mass = idx as f64;
        if let Some((u, v)) = endpoints.get(idx) {
            if u * xd < target {
                // straddling interval: covered fraction (x - u/den) / ((v - u)/den)
                let covered = &target - u * xd;
                let span = (v - u) * xd;
                mass += scaled_to_f64(&covered, &span);
            }
        }
        if mass <= 0.0 {
            return Err(Error::Ladder(format!(
                "no cover mass inside [0, {x}]; x-ladder descends below the first interval"
            )));
        }
        points.push((ratio_to_f64(x).ln(), (mass * weight).ln()));
    }
    ExponentEstimate::from_points(points)
}
