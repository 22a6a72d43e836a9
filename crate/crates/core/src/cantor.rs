//! Exact level-n interval covers of thin (two-map IFS) and fat
//! (variable-gap) Cantor sets.
//!
//! Endpoints are exact rationals held as integers over a per-level common
//! denominator, so nesting, gap/cover partition, and measure identities can
//! be checked with exact comparisons at every level. Floating point does not
//! enter this module.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Two-map iterated function system on [0,1]: f_i(x) = a·x + i·(1−a).
#[derive(Debug, Clone, PartialEq)]
pub struct IfsSystem {
    ratio: BigRational,
    gap: BigRational,
}

impl IfsSystem {
    /// Requires 0 < a < 1/2 (open set condition); the removed gap is c = 1 − 2a.
    pub fn new(ratio: BigRational) -> Result<Self> {
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        if ratio <= BigRational::zero() || ratio >= half {
            return Err(Error::Domain(format!(
                "contraction ratio must lie in (0, 1/2), got {ratio}"
            )));
        }
        let gap = BigRational::one() - BigRational::from_integer(BigInt::from(2)) * &ratio;
        Ok(Self { ratio, gap })
    }

    pub fn ratio(&self) -> &BigRational {
        &self.ratio
    }

    /// Gap fraction c with 2a + c = 1.
    pub fn gap(&self) -> &BigRational {
        &self.gap
    }

    /// Apply branch map f_0 or f_1 to a point.
    pub fn apply(&self, branch: u8, x: &BigRational) -> Result<BigRational> {
        if branch > 1 {
            return Err(Error::Domain(format!("branch must be 0 or 1, got {branch}")));
        }
        let shift = if branch == 0 {
            BigRational::zero()
        } else {
            BigRational::one() - &self.ratio
        };
        Ok(&self.ratio * x + shift)
    }
}

/// Build the two-map IFS for a contraction ratio in (0, 1/2).
pub fn build_ifs(ratio: BigRational) -> Result<IfsSystem> {
    IfsSystem::new(ratio)
}

/// Per-level gap fractions c_n for fat-set construction.
///
/// `Geometric { first }` is c_n = first · 2^{−n}; `Explicit` lists the first
/// values and is zero beyond the list (refinement past the list is a no-op),
/// which keeps every tail sum exact.
#[derive(Debug, Clone, PartialEq)]
pub enum GapSchedule {
    Geometric { first: BigRational },
    Explicit { values: Vec<BigRational> },
}

impl GapSchedule {
    pub fn geometric(first: BigRational) -> Result<Self> {
        if first <= BigRational::zero() || first >= BigRational::one() {
            return Err(Error::Domain("geometric schedule start must lie in (0, 1)".into()));
        }
        Ok(Self::Geometric { first })
    }

    pub fn explicit(values: Vec<BigRational>) -> Result<Self> {
        for v in &values {
            if *v <= BigRational::zero() || *v >= BigRational::one() {
                return Err(Error::Domain(format!(
                    "every gap fraction must lie in (0, 1), got {v}"
                )));
            }
        }
        Ok(Self::Explicit { values })
    }

    /// Gap fraction removed at level n (0 when the schedule is exhausted).
    pub fn gap(&self, n: u32) -> BigRational {
        match self {
            Self::Geometric { first } => {
                first / BigRational::from_integer(BigInt::one() << (n as usize))
            }
            Self::Explicit { values } => values
                .get(n as usize)
                .cloned()
                .unwrap_or_else(BigRational::zero),
        }
    }

    /// Exact upper bound (here: exact value) of Σ_{k ≥ n} c_k.
    pub fn tail_bound(&self, n: u32) -> BigRational {
        match self {
            // Σ_{k≥n} first·2^{-k} = first·2^{1-n}
            Self::Geometric { first } => {
                let two = BigRational::from_integer(BigInt::from(2));
                first * two / BigRational::from_integer(BigInt::one() << (n as usize))
            }
            Self::Explicit { values } => values
                .iter()
                .skip(n as usize)
                .fold(BigRational::zero(), |acc, v| acc + v),
        }
    }

    /// Exact partial product Π_{k < n} (1 − c_k): the Lebesgue measure of the
    /// level-n cover. This is the route to deep-level fat measures, where the
    /// 2^n-interval cover itself cannot be materialized.
    pub fn partial_product(&self, n: u32) -> BigRational {
        let mut acc = BigRational::one();
        for k in 0..n {
            acc *= BigRational::one() - self.gap(k);
        }
        acc
    }

    /// Σ c_n < ∞ holds for both representations; the product Π(1 − c_n)
    /// therefore converges to a positive value.
    pub fn is_summable(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    Thin(IfsSystem),
    Fat(GapSchedule),
}

/// Level-n closed-interval cover with exact rational endpoints.
///
/// Endpoints are stored as integers over a shared denominator; intervals are
/// sorted and pairwise disjoint by construction.
#[derive(Debug, Clone)]
pub struct CantorApproximation {
    level: u32,
    den: BigInt,
    endpoints: Vec<(BigInt, BigInt)>,
    provenance: Provenance,
}

impl CantorApproximation {
    /// Level-0 cover {[0,1]} of a thin IFS limit set.
    pub fn thin_root(system: IfsSystem) -> Self {
        Self {
            level: 0,
            den: BigInt::one(),
            endpoints: vec![(BigInt::zero(), BigInt::one())],
            provenance: Provenance::Thin(system),
        }
    }

    /// Level-0 cover {[0,1]} of a fat variable-gap set.
    pub fn fat_root(schedule: GapSchedule) -> Self {
        Self {
            level: 0,
            den: BigInt::one(),
            endpoints: vec![(BigInt::zero(), BigInt::one())],
            provenance: Provenance::Fat(schedule),
        }
    }

    /// The unit interval at every level: a fat set with an empty schedule.
    pub fn unit_interval() -> Self {
        Self::fat_root(GapSchedule::Explicit { values: Vec::new() })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn interval_count(&self) -> usize {
        self.endpoints.len()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Shared denominator of the scaled-integer endpoints.
    pub fn den(&self) -> &BigInt {
        &self.den
    }

    /// Scaled-integer endpoints (u, v): the interval is [u/den, v/den].
    pub fn raw_endpoints(&self) -> &[(BigInt, BigInt)] {
        &self.endpoints
    }

    /// Reduced rational endpoints.
    pub fn intervals(&self) -> Vec<(BigRational, BigRational)> {
        self.endpoints
            .iter()
            .map(|(u, v)| {
                (
                    BigRational::new(u.clone(), self.den.clone()),
                    BigRational::new(v.clone(), self.den.clone()),
                )
            })
            .collect()
    }

    /// One refinement step: thin covers split each [u,v] into
    /// [u, u+a(v−u)] and [v−a(v−u), v]; fat covers remove a centered open gap
    /// of relative length c_n (level-n gap fraction).
    pub fn refine(&self) -> CantorApproximation {
        match &self.provenance {
            Provenance::Thin(system) => {
                let na = system.ratio().numer().clone();
                let da = system.ratio().denom().clone();
                let mut endpoints = Vec::with_capacity(self.endpoints.len() * 2);
                for (u, v) in &self.endpoints {
                    let d = &na * (v - u);
                    let u_scaled = u * &da;
                    let v_scaled = v * &da;
                    endpoints.push((u_scaled.clone(), &u_scaled + &d));
                    endpoints.push((&v_scaled - &d, v_scaled));
                }
                CantorApproximation {
                    level: self.level + 1,
                    den: &self.den * &da,
                    endpoints,
                    provenance: self.provenance.clone(),
                }
            }
            Provenance::Fat(schedule) => {
                let c = schedule.gap(self.level);
                if c.is_zero() {
                    // schedule exhausted: the cover is unchanged
                    return CantorApproximation {
                        level: self.level + 1,
                        den: self.den.clone(),
                        endpoints: self.endpoints.clone(),
                        provenance: self.provenance.clone(),
                    };
                }
                let cn = c.numer().clone();
                let cd = c.denom().clone();
                let keep = &cd - &cn; // children keep (1 - c)/2 of the parent each
                let scale = BigInt::from(2) * &cd;
                let mut endpoints = Vec::with_capacity(self.endpoints.len() * 2);
                for (u, v) in &self.endpoints {
                    let half_keep = &keep * (v - u);
                    let u_scaled = u * &scale;
                    let v_scaled = v * &scale;
                    endpoints.push((u_scaled.clone(), &u_scaled + &half_keep));
                    endpoints.push((&v_scaled - &half_keep, v_scaled));
                }
                CantorApproximation {
                    level: self.level + 1,
                    den: &self.den * &scale,
                    endpoints,
                    provenance: self.provenance.clone(),
                }
            }
        }
    }

    /// Refine until the given level (no-op if already at or past it).
    pub fn refine_to(&self, level: u32) -> CantorApproximation {
        let mut cur = self.clone();
        while cur.level < level {
            cur = cur.refine();
        }
        cur
    }

    /// Open complement of the cover within [0,1], sorted.
    pub fn gaps(&self) -> Vec<(BigRational, BigRational)> {
        let mut out = Vec::new();
        let mut prev = BigInt::zero();
        for (u, v) in &self.endpoints {
            if *u > prev {
                out.push((
                    BigRational::new(prev.clone(), self.den.clone()),
                    BigRational::new(u.clone(), self.den.clone()),
                ));
            }
            prev = v.clone();
        }
        if prev < self.den {
            out.push((
                BigRational::new(prev, self.den.clone()),
                BigRational::one(),
            ));
        }
        out
    }

    /// Exact sum of interval lengths.
    pub fn lebesgue_measure(&self) -> BigRational {
        let total: BigInt = self.endpoints.iter().map(|(u, v)| v - u).sum();
        BigRational::new(total, self.den.clone())
    }

    /// Cover membership at this level (closed intervals, exact comparison).
    pub fn contains(&self, point: &BigRational) -> Result<bool> {
        if point.is_negative() || *point > BigRational::one() {
            return Err(Error::Domain(format!("point {point} lies outside [0, 1]")));
        }
        let pn = point.numer();
        let pd = point.denom();
        // scaled comparison: u/den <= pn/pd  <=>  u*pd <= pn*den
        let target = pn * &self.den;
        let idx = self
            .endpoints
            .partition_point(|(u, _)| u * pd <= target);
        if idx == 0 {
            return Ok(false);
        }
        let (_, v) = &self.endpoints[idx - 1];
        Ok(target <= v * pd)
    }
}
