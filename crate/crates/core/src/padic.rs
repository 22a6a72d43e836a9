//! p-adic valuations and norms on the rationals, truncated p-adic digit
//! expansions, the Monna map onto Cantor-set points, and the rooted
//! ultrametric tree of valued components with its sup norm.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Deterministic primality by trial division; inputs here are parameters, not
/// bulk data.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

fn require_prime(p: u64) -> Result<()> {
    if !is_prime_u64(p) {
        return Err(Error::Domain(format!("{p} is not prime")));
    }
    Ok(())
}

/// Order and norm of a rational under p: norm = p^{-order}; zero has order
/// +∞ (None) and norm 0.
#[derive(Debug, Clone, PartialEq)]
pub struct PadicValuation {
    pub order: Option<i64>,
    pub norm: BigRational,
}

fn int_order(n: &BigInt, p: &BigInt) -> i64 {
    let mut order = 0i64;
    let mut cur = n.abs();
    loop {
        let (q, r) = cur.div_rem(p);
        if !r.is_zero() {
            return order;
        }
        order += 1;
        cur = q;
    }
}

/// p-adic valuation of a rational: order = ord_p(numerator) − ord_p(denominator).
pub fn padic_valuation(q: &BigRational, p: u64) -> Result<PadicValuation> {
    require_prime(p)?;
    if q.is_zero() {
        return Ok(PadicValuation { order: None, norm: BigRational::zero() });
    }
    let pb = BigInt::from(p);
    let order = int_order(q.numer(), &pb) - int_order(q.denom(), &pb);
    let norm = if order >= 0 {
        BigRational::new(BigInt::one(), pb.pow(order as u32))
    } else {
        BigRational::from_integer(pb.pow((-order) as u32))
    };
    Ok(PadicValuation { order: Some(order), norm })
}

/// Truncated p-adic number: q = p^order · (unit), unit digits LSB-first.
#[derive(Debug, Clone, PartialEq)]
pub struct PadicNumber {
    prime: u64,
    order: i64,
    digits: Vec<u64>,
    is_zero: bool,
}

impl PadicNumber {
    /// Expand a rational to `depth` unit digits. The denominator's p-free
    /// part is inverted modulo p^depth, so any rational is representable.
    pub fn from_rational(q: &BigRational, p: u64, depth: usize) -> Result<Self> {
        require_prime(p)?;
        if depth == 0 {
            return Err(Error::Domain("digit depth must be at least 1".into()));
        }
        if q.is_zero() {
            return Ok(Self { prime: p, order: 0, digits: vec![0; depth], is_zero: true });
        }
        let pb = BigInt::from(p);
        let ord_n = int_order(q.numer(), &pb);
        let ord_d = int_order(q.denom(), &pb);
        let order = ord_n - ord_d;
        let a = q.numer() / pb.pow(ord_n as u32);
        let b = q.denom() / pb.pow(ord_d as u32);
        let modulus = pb.pow(depth as u32);
        let gcd = b.extended_gcd(&modulus);
        debug_assert!(gcd.gcd.is_one(), "p-free denominator is invertible mod p^depth");
        let b_inv = gcd.x.mod_floor(&modulus);
        let mut residue = (a.mod_floor(&modulus) * b_inv).mod_floor(&modulus);
        let mut digits = Vec::with_capacity(depth);
        for _ in 0..depth {
            let (q, r) = residue.div_rem(&pb);
            digits.push(r.to_u64().expect("digit below p"));
            residue = q;
        }
        Ok(Self { prime: p, order, digits, is_zero: false })
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn order(&self) -> i64 {
        self.order
    }

    pub fn digits(&self) -> &[u64] {
        &self.digits
    }

    pub fn depth(&self) -> usize {
        self.digits.len()
    }

    pub fn is_zero(&self) -> bool {
        self.is_zero
    }

    /// Norm p^{-order} (0 for the zero element).
    pub fn norm(&self) -> BigRational {
        if self.is_zero {
            return BigRational::zero();
        }
        let pb = BigInt::from(self.prime);
        if self.order >= 0 {
            BigRational::new(BigInt::one(), pb.pow(self.order as u32))
        } else {
            BigRational::from_integer(pb.pow((-self.order) as u32))
        }
    }
}

/// Default embedding target ratio: the middle-thirds set for p = 2, and
/// a = 1/(p+1) in general (so that p·a < 1 keeps digit blocks disjoint).
pub fn monna_default_ratio(p: u64) -> BigRational {
    if p == 2 {
        BigRational::new(BigInt::one(), BigInt::from(3))
    } else {
        BigRational::new(BigInt::one(), BigInt::from(p + 1))
    }
}

/// Monna map ξ(Σ a_k p^k) = Σ a_k · (1−a)/(p−1) · a^k onto the Cantor set of
/// ratio a. With p = 2, a = 1/3 this is Σ 2·a_k·3^{-(k+1)}, landing on
/// level-n cover endpoints of the middle-thirds set for n digits.
pub fn monna_map(digits: &[u64], p: u64, ratio: &BigRational) -> Result<BigRational> {
    require_prime(p)?;
    if ratio <= &BigRational::zero()
        || ratio * BigRational::from_integer(BigInt::from(p)) > BigRational::one()
    {
        return Err(Error::Domain(format!(
            "target ratio must satisfy 0 < a <= 1/p, got {ratio} for p = {p}"
        )));
    }
    for &d in digits {
        if d >= p {
            return Err(Error::Domain(format!("digit {d} out of range for p = {p}")));
        }
    }
    let weight = (BigRational::one() - ratio)
        / BigRational::from_integer(BigInt::from(p - 1));
    let mut image = BigRational::zero();
    let mut power = BigRational::one();
    for &d in digits {
        if d != 0 {
            image += BigRational::from_integer(BigInt::from(d)) * &weight * &power;
        }
        power *= ratio;
    }
    Ok(image)
}

/// Node of the rooted ultrametric tree: the root fans out to one branch per
/// prime, ordered; payloads are the component valuations v(X̃_p).
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct TreeNode {
    /// Label path from the root (root: empty; prime nodes: [p]; digit
    /// expansion nodes extend the path further).
    pub label: Vec<u64>,
    pub payload: Option<f64>,
    pub children: Vec<TreeNode>,
}

impl TreeNode {
    /// Indented-text rendering, one node per line.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        self.render_text_into(&mut out, 0);
        out
    }

    fn render_text_into(&self, out: &mut String, depth: usize) {
        for _ in 0..depth {
            out.push_str("  ");
        }
        if self.label.is_empty() {
            out.push_str("root");
        } else {
            out.push_str(&self.label.last().unwrap().to_string());
        }
        if let Some(v) = self.payload {
            out.push_str(&format!(" v={v}"));
        }
        out.push('\n');
        for child in &self.children {
            child.render_text_into(out, depth + 1);
        }
    }

    /// Machine-readable nested-list rendering:
    /// `[label, payload, [children...]]` with `null` for missing parts.
    pub fn render_nested(&self) -> String {
        let mut out = String::new();
        self.render_nested_into(&mut out);
        out
    }

    fn render_nested_into(&self, out: &mut String) {
        out.push('[');
        match self.label.last() {
            Some(l) => out.push_str(&l.to_string()),
            None => out.push_str("null"),
        }
        out.push(',');
        match self.payload {
            Some(v) => out.push_str(&format!("{v}")),
            None => out.push_str("null"),
        }
        out.push_str(",[");
        for (i, child) in self.children.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            child.render_nested_into(out);
        }
        out.push_str("]]");
    }

    /// All (prime, payload) pairs in the tree, in traversal order.
    pub fn payload_multiset(&self) -> Vec<(u64, f64)> {
        let mut out = Vec::new();
        self.collect_payloads(&mut out);
        out
    }

    fn collect_payloads(&self, out: &mut Vec<(u64, f64)>) {
        if let (Some(&p), Some(v)) = (self.label.first(), self.payload) {
            out.push((p, v));
        }
        for c in &self.children {
            c.collect_payloads(out);
        }
    }
}

fn validate_components(components: &[(u64, f64)]) -> Result<()> {
    let mut seen = std::collections::BTreeSet::new();
    for &(p, v) in components {
        require_prime(p)?;
        if !v.is_finite() || v < 0.0 {
            return Err(Error::Domain(format!("component valuation must be >= 0, got {v}")));
        }
        if !seen.insert(p) {
            return Err(Error::Domain(format!("duplicate prime {p} in components")));
        }
    }
    Ok(())
}

/// Depth-1 rooted tree over the component primes, in increasing order.
pub fn build_tree(components: &[(u64, f64)]) -> Result<TreeNode> {
    build_tree_expanded(components, 0)
}

/// Like [`build_tree`], with each prime branch expanded into full digit-level
/// branching (children 0..p−1 per level) down to `digit_depth`. A node-count
/// guard keeps the expansion enumerable.
pub fn build_tree_expanded(components: &[(u64, f64)], digit_depth: u32) -> Result<TreeNode> {
    validate_components(components)?;
    if digit_depth > 0 {
        let nodes: u64 = components
            .iter()
            .map(|&(p, _)| p.saturating_pow(digit_depth))
            .sum();
        if nodes > 10_000 {
            return Err(Error::Domain(format!(
                "digit expansion would create ~{nodes} nodes; lower the depth"
            )));
        }
    }
    let mut sorted: Vec<(u64, f64)> = components.to_vec();
    sorted.sort_by_key(|&(p, _)| p);
    let children = sorted
        .into_iter()
        .map(|(p, v)| TreeNode {
            label: vec![p],
            payload: Some(v),
            children: digit_children(&[p], p, digit_depth),
        })
        .collect();
    Ok(TreeNode { label: vec![], payload: None, children })
}

fn digit_children(path: &[u64], p: u64, remaining: u32) -> Vec<TreeNode> {
    if remaining == 0 {
        return Vec::new();
    }
    (0..p)
        .map(|d| {
            let mut label = path.to_vec();
            label.push(d);
            let children = digit_children(&label, p, remaining - 1);
            TreeNode { label, payload: None, children }
        })
        .collect()
}

/// Tail behavior declared for the primes beyond the listed components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailPolicy {
    /// v(X̃_p) → 0 as p → ∞ (the convergence condition holds).
    Vanishing,
    /// v(X̃_p) = c for all larger p. Any c > 0 violates the convergence
    /// condition and is a convergence error.
    Constant(f64),
}

/// Sup norm of a component vector under ultrametricity, provided the
/// declared tail certifies convergence.
pub fn sup_norm(components: &[(u64, f64)], tail: TailPolicy) -> Result<f64> {
    validate_components(components)?;
    match tail {
        TailPolicy::Vanishing => {}
        TailPolicy::Constant(c) => {
            if !c.is_finite() || c < 0.0 {
                return Err(Error::Domain(format!("tail constant must be >= 0, got {c}")));
            }
            if c > 0.0 {
                return Err(Error::Convergence(format!(
                    "constant tail {c} never vanishes; the component sum is not well defined"
                )));
            }
        }
    }
    Ok(components.iter().map(|&(_, v)| v).fold(0.0, f64::max))
}
