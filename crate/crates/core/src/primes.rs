//! Prime sieve, Π and Chebyshev ψ, the valuation growth law v = x·Π(1/x),
//! prime-number-theorem deviations with a fitted decay exponent, the
//! conservation identities, the ψ-route deformation, and the prime-driven
//! inversion cascade.

use crate::error::{Error, Result};
use crate::fit::fit_line;
use crate::valuation::Deformed;

/// Sorted table of the primes up to `limit`.
#[derive(Debug, Clone)]
pub struct PrimeTable {
    limit: u64,
    primes: Vec<u64>,
    built_by: &'static str,
}

const SEGMENT_SPAN: u64 = 1 << 20;

fn simple_sieve(limit: u64) -> Vec<u64> {
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

/// Sieve of Eratosthenes, segmented above 2^20 so the working set stays
/// cache-sized for limits up to 10^9.
pub fn sieve(limit: u64) -> Result<PrimeTable> {
    if limit < 2 {
        return Err(Error::Domain(format!("sieve limit must be at least 2, got {limit}")));
    }
    if limit <= SEGMENT_SPAN {
        return Ok(PrimeTable {
            limit,
            primes: simple_sieve(limit),
            built_by: "simple-eratosthenes",
        });
    }
    let root = (limit as f64).sqrt() as u64 + 1;
    let base = simple_sieve(root.max(2));
    let mut primes = base.clone();
    let mut low = root.max(2) + 1;
    let mut composite = vec![false; SEGMENT_SPAN as usize];
    while low <= limit {
        let high = (low + SEGMENT_SPAN - 1).min(limit);
        let span = (high - low + 1) as usize;
        composite[..span].fill(false);
        for &p in &base {
            if p * p > high {
                break;
            }
            let mut start = low.div_ceil(p) * p;
            if start < p * p {
                start = p * p;
            }
            let mut j = start;
            while j <= high {
                composite[(j - low) as usize] = true;
                j += p;
            }
        }
        for (offset, &c) in composite[..span].iter().enumerate() {
            if !c {
                primes.push(low + offset as u64);
            }
        }
        low = high + 1;
    }
    Ok(PrimeTable { limit, primes, built_by: "segmented-eratosthenes" })
}

impl PrimeTable {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn built_by(&self) -> &'static str {
        self.built_by
    }

    fn check_coverage(&self, y: f64) -> Result<()> {
        if !y.is_finite() || y < 0.0 {
            return Err(Error::Domain(format!("bound must be finite and >= 0, got {y}")));
        }
        if y > self.limit as f64 {
            return Err(Error::TableTooSmall { needed: y.ceil() as u64, limit: self.limit });
        }
        Ok(())
    }

    /// Count of primes ≤ y.
    pub fn pi(&self, y: f64) -> Result<u64> {
        self.check_coverage(y)?;
        let bound = y.floor() as u64;
        Ok(self.primes.partition_point(|&p| p <= bound) as u64)
    }

    /// Count of primes strictly below y (Π(x⁻¹) = Σ_{p < x⁻¹} 1).
    pub fn count_below(&self, y: f64) -> Result<u64> {
        self.check_coverage(y)?;
        let bound = strict_bound(y);
        Ok(self.primes.partition_point(|&p| p <= bound) as u64)
    }
}

/// Largest integer strictly below y (0 when y ≤ 1).
fn strict_bound(y: f64) -> u64 {
    if y <= 1.0 {
        return 0;
    }
    if y.fract() == 0.0 {
        y as u64 - 1
    } else {
        y.floor() as u64
    }
}

/// Count of primes ≤ y.
pub fn prime_pi(y: f64, table: &PrimeTable) -> Result<u64> {
    table.pi(y)
}

fn psi_up_to(bound: u64, table: &PrimeTable) -> f64 {
    let mut sum = 0.0;
    for &p in table.primes() {
        if p > bound {
            break;
        }
        let mut k = 0u32;
        let mut pw = p as u128;
        while pw <= bound as u128 {
            k += 1;
            pw *= p as u128;
        }
        sum += k as f64 * (p as f64).ln();
    }
    sum
}

/// Chebyshev ψ(y) = Σ ln p over prime powers pⁿ ≤ y.
pub fn chebyshev_psi(y: f64, table: &PrimeTable) -> Result<f64> {
    table.check_coverage(y)?;
    Ok(psi_up_to(y.floor() as u64, table))
}

/// ψ restricted to prime powers strictly below y.
pub fn chebyshev_psi_below(y: f64, table: &PrimeTable) -> Result<f64> {
    table.check_coverage(y)?;
    Ok(psi_up_to(strict_bound(y), table))
}

/// Valuation growth v = x·Π(1/x) and the log-deformation logY = v·ln(1/x).
pub fn valuation_growth(x: f64, table: &PrimeTable) -> Result<(f64, f64)> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Domain(format!("x must lie in (0, 1), got {x}")));
    }
    let y = 1.0 / x;
    let count = table.count_below(y)? as f64;
    let v = x * count;
    Ok((v, v * y.ln()))
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct DeviationRow {
    pub y: f64,
    pub pi: u64,
    pub psi: f64,
    /// (ln y / y)·Π(y) − 1.
    pub dev_pi: f64,
    /// x·ψ(1/x) at x = 1/y, i.e. ψ(y)/y.
    pub psi_route: f64,
}

/// Standing caveat attached to every deviation report.
pub const ALPHA_CAVEAT: &str = "alpha_hat describes the empirical decay of (ln y / y)*pi(y) - 1 \
over the sampled range only; at these magnitudes the decay is close to logarithmic and the \
fitted exponent is reported, not asserted";

#[derive(Debug, Clone, serde::Serialize)]
pub struct DeviationTable {
    pub rows: Vec<DeviationRow>,
    /// Least-squares decay exponent of |dev_pi| against y (dev ~ y^{-alpha}).
    pub alpha_hat: f64,
    pub alpha_stderr: f64,
    pub r_squared: f64,
    /// Row indices excluded from the fit because the deviation was exactly 0.
    pub excluded_rows: Vec<usize>,
    pub caveat: &'static str,
}

/// Deviation table over a strictly increasing y-ladder, with the fitted
/// decay exponent of the Π-route deviation.
pub fn pnt_deviation(ladder: &[f64], table: &PrimeTable) -> Result<DeviationTable> {
    if ladder.len() < 2 {
        return Err(Error::Domain("deviation ladder needs at least 2 points".into()));
    }
    if ladder.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("deviation ladder must be strictly increasing".into()));
    }
    let mut rows = Vec::with_capacity(ladder.len());
    let mut fit_points = Vec::with_capacity(ladder.len());
    let mut excluded_rows = Vec::new();
    for (idx, &y) in ladder.iter().enumerate() {
        if y < 2.0 {
            return Err(Error::Domain(format!("ladder values must be >= 2, got {y}")));
        }
        let pi = table.pi(y)?;
        let psi = chebyshev_psi(y, table)?;
        let dev_pi = (y.ln() / y) * pi as f64 - 1.0;
        let psi_route = psi / y;
        if dev_pi == 0.0 {
            excluded_rows.push(idx);
        } else {
            fit_points.push((y.ln(), dev_pi.abs().ln()));
        }
        rows.push(DeviationRow { y, pi, psi, dev_pi, psi_route });
    }
    let fit = fit_line(&fit_points)?;
    Ok(DeviationTable {
        rows,
        alpha_hat: -fit.slope,
        alpha_stderr: fit.slope_stderr,
        r_squared: fit.r_squared,
        excluded_rows,
        caveat: ALPHA_CAVEAT,
    })
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ConservationSolution {
    /// s = ln(1/a)/ln(p), the local dimension; below 1 by the p > 1/a guard.
    pub s: f64,
    /// X = x^{-s}, the fattened variable.
    pub deformed: f64,
    /// |ln(a)·ln(1/x) + ln(p)·ln(X)|, zero up to rounding for every n.
    pub residual: f64,
}

/// Solve the conservation identity x = {x·a^{n·ln(1/x)}}·p^{n·ln X} for the
/// scaling law X = x^{-s}, s = ln(1/a)/ln(p). The identity holds for every n
/// at once, so the residual is n-independent.
pub fn conservation_solve(x: f64, a: f64, p: f64) -> Result<ConservationSolution> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Domain(format!("x must lie in (0, 1), got {x}")));
    }
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::Domain(format!("scaling factor a must lie in (0, 1), got {a}")));
    }
    if !p.is_finite() || p <= 1.0 / a {
        return Err(Error::Domain(format!(
            "scaling base p must exceed 1/a = {} (got {p}), otherwise s >= 1",
            1.0 / a
        )));
    }
    let s = (1.0 / a).ln() / p.ln();
    let deformed = (-s * x.ln()).exp();
    let residual = (a.ln() * (1.0 / x).ln() + p.ln() * deformed.ln()).abs();
    Ok(ConservationSolution { s, deformed, residual })
}

/// Residual |v·ln(1/x) − ln Y| of the valuation form of the conservation
/// identity; exactly zero when Y was produced by `deformed_variable` (the
/// log is carried, not recomputed) and `v = log_{1/x} Y` otherwise.
pub fn conservation_valuation_check(x: f64, v: f64, y: &Deformed) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Domain(format!("x must lie in (0, 1), got {x}")));
    }
    if !v.is_finite() || v < 0.0 {
        return Err(Error::Domain(format!("valuation must be >= 0, got {v}")));
    }
    Ok((v * (1.0 / x).ln() - y.log).abs())
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ChebyshevDeformation {
    /// log Y via the ψ route: x·ψ(1/x) (prime powers strictly below 1/x).
    pub log_y_psi: f64,
    /// log Y via the prime-counting route: x·ln(1/x)·Π(1/x).
    pub log_y_pi: f64,
    pub gap: f64,
}

/// Both deformation routes and their gap; the routes converge to 1 as x → 0.
pub fn chebyshev_deformation(x: f64, table: &PrimeTable) -> Result<ChebyshevDeformation> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Domain(format!("x must lie in (0, 1), got {x}")));
    }
    let y = 1.0 / x;
    let log_y_psi = x * chebyshev_psi_below(y, table)?;
    let log_y_pi = x * y.ln() * table.count_below(y)? as f64;
    Ok(ChebyshevDeformation { log_y_psi, log_y_pi, gap: (log_y_psi - log_y_pi).abs() })
}

/// Balance residual of the deformation identity for a given multiplier m:
/// with uniform component valuations x/n at scales p^{-n}, the schedule sum
/// telescopes to x·ψ(1/x), so the two exponentials cancel for every m.
/// Returns the residual of that cancellation against a supplied log Y.
pub fn deformation_balance_residual(x: f64, m: f64, log_y: f64, table: &PrimeTable) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Domain(format!("x must lie in (0, 1), got {x}")));
    }
    if !m.is_finite() || m <= 0.0 {
        return Err(Error::Domain(format!("multiplier must be positive, got {m}")));
    }
    let y = 1.0 / x;
    let schedule_sum = x * chebyshev_psi_below(y, table)? / y.ln();
    let balance = -m * schedule_sum + m * log_y / y.ln();
    Ok(balance.abs())
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct CascadeStep {
    pub prime: u64,
    /// Smallest n with p^n ≥ 1/x: the first p-adic scale at or below x.
    pub level: u32,
    /// δ = p^{-level}.
    pub scale: f64,
}

/// Trace of the prime-driven inversion cascade.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CascadeTrace {
    pub schedule: Vec<CascadeStep>,
    /// y₀ = x and the state after each inversion; each y_{k+1} = 1/(1+y_k),
    /// equivalently y_k = 1/y_{k+1} − 1, all within (0, 1].
    pub states: Vec<f64>,
    pub transitions: u64,
    /// x·(transitions + final state).
    pub accumulated: f64,
}

/// One inversion per prime strictly below 1/x, so the transition count is
/// Π(1/x) by construction.
pub fn inversion_cascade(x: f64, table: &PrimeTable) -> Result<CascadeTrace> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Domain(format!("x must lie in (0, 1), got {x}")));
    }
    let y = 1.0 / x;
    table.check_coverage(y)?;
    let bound = strict_bound(y);
    let mut schedule = Vec::new();
    let mut states = vec![x];
    let mut state = x;
    for &p in table.primes() {
        if p > bound {
            break;
        }
        let mut level = 1u32;
        let mut pw = p as u128;
        while (pw as f64) < y {
            pw *= p as u128;
            level += 1;
        }
        schedule.push(CascadeStep { prime: p, level, scale: (p as f64).powi(-(level as i32)) });
        state = 1.0 / (1.0 + state);
        states.push(state);
    }
    let transitions = schedule.len() as u64;
    Ok(CascadeTrace {
        schedule,
        states,
        transitions,
        accumulated: x * (transitions as f64 + state),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::valuation::deformed_variable;

    fn table_1e4() -> PrimeTable {
        sieve(10_000).unwrap()
    }

    #[test]
    fn small_sieves() {
        let t = sieve(10).unwrap();
        assert_eq!(t.primes(), &[2, 3, 5, 7]);
        let t = sieve(2).unwrap();
        assert_eq!(t.primes(), &[2]);
        assert!(sieve(1).is_err());
    }

    #[test]
    fn segmented_matches_simple() {
        let seg = sieve(3_000_000).unwrap();
        assert_eq!(seg.built_by(), "segmented-eratosthenes");
        let simple = simple_sieve(3_000_000);
        assert_eq!(seg.primes().len(), simple.len());
        assert_eq!(seg.primes(), &simple[..]);
    }

    #[test]
    fn pi_values() {
        let t = table_1e4();
        assert_eq!(t.pi(10.0).unwrap(), 4);
        assert_eq!(t.pi(1.0).unwrap(), 0);
        assert_eq!(t.pi(1000.0).unwrap(), 168);
        assert_eq!(t.pi(10_000.0).unwrap(), 1229);
        assert!(matches!(t.pi(20_000.0), Err(Error::TableTooSmall { .. })));
    }

    #[test]
    fn strict_counting() {
        let t = table_1e4();
        assert_eq!(t.count_below(2.0).unwrap(), 0);
        assert_eq!(t.count_below(3.0).unwrap(), 1);
        assert_eq!(t.count_below(7.5).unwrap(), 4);
        assert_eq!(t.count_below(1000.0).unwrap(), 168);
    }

    #[test]
    fn psi_at_ten() {
        let t = table_1e4();
        let expected = 3.0 * 2f64.ln() + 2.0 * 3f64.ln() + 5f64.ln() + 7f64.ln();
        assert!((chebyshev_psi(10.0, &t).unwrap() - expected).abs() < 1e-12);
        assert_eq!(chebyshev_psi(1.0, &t).unwrap(), 0.0);
        // strict form drops the prime power at the boundary
        let at8 = chebyshev_psi(8.0, &t).unwrap();
        let below8 = chebyshev_psi_below(8.0, &t).unwrap();
        assert!((at8 - below8 - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn valuation_growth_examples() {
        let t = table_1e4();
        let (v, log_y) = valuation_growth(1e-3, &t).unwrap();
        assert!((v - 0.168).abs() < 1e-12);
        assert!((log_y - 0.168 * 1000f64.ln()).abs() < 1e-12);
        let (v, log_y) = valuation_growth(0.5, &t).unwrap();
        assert_eq!(v, 0.0);
        assert_eq!(log_y, 0.0);
    }

    #[test]
    fn deviation_rows_and_fit() {
        let t = table_1e4();
        let table = pnt_deviation(&[100.0, 1000.0, 10_000.0], &t).unwrap();
        assert_eq!(table.rows.len(), 3);
        assert!((table.rows[1].dev_pi - 0.160502886869).abs() < 1e-9);
        assert!(table.alpha_hat.is_finite());
        assert!(table.excluded_rows.is_empty());
        assert!(!table.caveat.is_empty());
        assert!(pnt_deviation(&[1000.0, 100.0], &t).is_err());
    }

    #[test]
    fn conservation_solutions() {
        let sol = conservation_solve(0.01, 1.0 / 3.0, 9.0).unwrap();
        assert!((sol.s - 0.5).abs() < 1e-12);
        assert!((sol.deformed - 10.0).abs() < 1e-9);
        assert!(sol.residual < 1e-12);

        let sol = conservation_solve(0.04, 0.25, 16.0).unwrap();
        assert!((sol.s - 0.5).abs() < 1e-12);
        assert!((sol.deformed - 5.0).abs() < 1e-9);

        assert!(conservation_solve(0.01, 1.0 / 3.0, 3.0).is_err());
    }

    #[test]
    fn valuation_conservation_residuals() {
        let y = deformed_variable(0.01, 0.5).unwrap();
        assert_eq!(conservation_valuation_check(0.01, 0.5, &y).unwrap(), 0.0);

        let trivial = deformed_variable(0.37, 0.0).unwrap();
        assert_eq!(conservation_valuation_check(0.37, 0.0, &trivial).unwrap(), 0.0);

        let y9 = Deformed::from_value(9.0).unwrap();
        let r = conservation_valuation_check(0.01, 0.5, &y9).unwrap();
        assert!((r - 0.10536051565782634).abs() < 1e-12);
    }

    #[test]
    fn deformation_routes() {
        let t = table_1e4();
        let d = chebyshev_deformation(1e-3, &t).unwrap();
        assert!((d.log_y_psi - 1.0).abs() < 0.05, "psi route {}", d.log_y_psi);
        assert!((d.log_y_pi - 1.160502886793).abs() < 1e-9);
        let half = chebyshev_deformation(0.5, &t).unwrap();
        assert_eq!(half.log_y_psi, 0.0);
        assert_eq!(half.log_y_pi, 0.0);
    }

    #[test]
    fn balance_multiplier_cancels() {
        let t = table_1e4();
        let x = 1e-3;
        let log_y = x * chebyshev_psi_below(1.0 / x, &t).unwrap();
        for &m in &[1.0, 2.0, 5.0] {
            let r = deformation_balance_residual(x, m, log_y, &t).unwrap();
            assert!(r < 1e-12, "m = {m} residual {r}");
        }
    }

    #[test]
    fn cascade_counts_and_states() {
        let t = table_1e4();
        let trace = inversion_cascade(0.1, &t).unwrap();
        assert_eq!(trace.transitions, 4);
        assert_eq!(
            trace.schedule.iter().map(|s| s.prime).collect::<Vec<_>>(),
            vec![2, 3, 5, 7]
        );
        // p = 2 needs 2^4 = 16 ≥ 10
        assert_eq!(trace.schedule[0].level, 4);
        assert!((trace.schedule[0].scale - 1.0 / 16.0).abs() < 1e-15);
        // states obey the inversion relation y_k = 1/y_{k+1} − 1
        for w in trace.states.windows(2) {
            assert!((w[0] - (1.0 / w[1] - 1.0)).abs() < 1e-12);
            assert!(w[1] > 0.0 && w[1] <= 1.0);
        }
        let (v, _) = valuation_growth(0.1, &t).unwrap();
        assert!((trace.accumulated - v).abs() <= 0.1);

        let none = inversion_cascade(0.9, &t).unwrap();
        assert_eq!(none.transitions, 0);
        assert_eq!(none.states, vec![0.9]);
    }
}
