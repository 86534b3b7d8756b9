//! Downward chains on the divisibility poset, their sub-invariance margins
//! against the weight families, and the adjoint upward chains.
//!
//! State spaces are predicates: nothing is materialised. Downward transitions
//! need the factorisation of the source, so sources must lie in the sieve.
//! Parent sums (over `m = n q`) are truncated at the context's `trunc_q` and
//! completed by a certified tail bound specific to each chain/weight pairing.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::OnceLock;

use crate::arith::FactorTable;
use crate::error::{domain, Error, Result};
use crate::kernels::{neg_zeta_log_deriv_bounded, KernelConfig, TruncatedLambda};
use crate::quadrature::TabulatedRule;
use crate::weights::{is_prime_trial, WeightEvaluator, WeightId};
use crate::EULER_GAMMA;

/// Residual below `-SUBINVARIANCE_TOL` in an adjoint row is reported as a violation.
pub const SUBINVARIANCE_TOL: f64 = 1e-8;

/// A set of odd primes for the odd Banks–Martin chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PrimeSet {
    Finite(BTreeSet<u64>),
    /// Every odd prime; parent sums are truncated and carry a tail bound.
    AllOdd,
}

impl PrimeSet {
    pub fn finite(primes: impl IntoIterator<Item = u64>) -> Self {
        PrimeSet::Finite(primes.into_iter().collect())
    }

    pub fn contains(&self, p: u64) -> bool {
        match self {
            PrimeSet::Finite(s) => s.contains(&p),
            PrimeSet::AllOdd => p % 2 == 1 && is_prime_trial(p),
        }
    }
}

impl fmt::Display for PrimeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrimeSet::AllOdd => write!(f, "odd"),
            PrimeSet::Finite(s) => {
                let parts: Vec<String> = s.iter().map(|p| p.to_string()).collect();
                write!(f, "{}", parts.join(","))
            }
        }
    }
}

/// The five downward chains.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChainId {
    /// `n ↦ n/p` for a uniformly chosen prime `p | n`.
    RandomPrime,
    /// `n ↦ n/P(n)`.
    Mertens,
    /// `n ↦ n/q` with probability `Λ(q)/log n`.
    VonMangoldt,
    /// von Mangoldt with prime powers redirected to stop at the prime; primes absorb.
    EpsModified,
    /// Divide by a prime `p` with probability `v_p(n) β_p log p / λ(n)`,
    /// `β_p = p/(p−2)`, on `N_{≥k}(Q)`; `N_k(Q)` absorbs.
    OddBanksMartin { k: u32, primes: PrimeSet },
}

impl ChainId {
    pub fn name(&self) -> &'static str {
        match self {
            ChainId::RandomPrime => "random_prime",
            ChainId::Mertens => "mertens",
            ChainId::VonMangoldt => "von_mangoldt",
            ChainId::EpsModified => "eps_modified",
            ChainId::OddBanksMartin { .. } => "odd_banks_martin",
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let ChainId::OddBanksMartin { k, primes } = self {
            if *k < 1 {
                return domain("odd_banks_martin needs k >= 1");
            }
            if let PrimeSet::Finite(s) = primes {
                if s.is_empty() {
                    return domain("odd_banks_martin needs a non-empty prime set");
                }
                if let Some(bad) = s.iter().find(|&&p| p == 2 || !is_prime_trial(p)) {
                    return domain(format!("{bad} is not an odd prime"));
                }
            }
        }
        Ok(())
    }

    /// Membership in the chain's state space; `n` must be sieved when the
    /// answer depends on its factorisation.
    pub fn in_state_space(&self, n: u64, t: &FactorTable) -> Result<bool> {
        match self {
            ChainId::RandomPrime | ChainId::Mertens | ChainId::VonMangoldt => Ok(n >= 1),
            ChainId::EpsModified => Ok(n >= 2),
            ChainId::OddBanksMartin { k, primes } => {
                if n < 2 {
                    return Ok(false);
                }
                let f = t.factorize(n)?;
                let omega: u32 = f.iter().map(|&(_, e)| e).sum();
                Ok(omega >= *k && f.iter().all(|&(p, _)| primes.contains(p)))
            }
        }
    }

    pub fn is_absorbing(&self, n: u64, t: &FactorTable) -> Result<bool> {
        if !self.in_state_space(n, t)? {
            return domain(format!("{n} is outside the {} state space", self.name()));
        }
        Ok(match self {
            ChainId::RandomPrime | ChainId::Mertens | ChainId::VonMangoldt => n == 1,
            ChainId::EpsModified => t.is_prime(n),
            ChainId::OddBanksMartin { k, .. } => t.big_omega(n)? == *k,
        })
    }

    /// Whether the set of parents `m = n q` of a state is infinite.
    fn has_infinite_parents(&self) -> bool {
        !matches!(self, ChainId::OddBanksMartin { primes: PrimeSet::Finite(_), .. })
    }
}

impl fmt::Display for ChainId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChainId::OddBanksMartin { k, primes } => write!(f, "odd_banks_martin(k={k};Q={primes})"),
            other => f.write_str(other.name()),
        }
    }
}

/// A transition target; upward chains may escape to ∞.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Target {
    State(u64),
    Infinity,
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::State(m) => write!(f, "{m}"),
            Target::Infinity => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub target: Target,
    pub prob: f64,
}

/// The law of one chain step from `source`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionList {
    pub source: u64,
    pub entries: Vec<Transition>,
    /// Set when parent enumeration was truncated and the omitted tail is
    /// folded into the ∞ entry.
    pub truncated: bool,
}

impl TransitionList {
    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.prob).sum()
    }

    pub fn prob_to(&self, target: Target) -> f64 {
        self.entries.iter().filter(|e| e.target == target).map(|e| e.prob).sum()
    }
}

/// Calls `f(m, P(n ↘ m))` for every transition out of `n`, self-loops of
/// absorbing states included. `n` must be in the state space.
pub(crate) fn for_each_child(c: &ChainId, n: u64, t: &FactorTable, mut f: impl FnMut(u64, f64)) -> Result<()> {
    if n > t.limit() {
        return domain(format!("state {n} exceeds sieve limit {}", t.limit()));
    }
    if !c.in_state_space(n, t)? {
        return domain(format!("{n} is outside the {} state space", c.name()));
    }
    if n == 1 {
        f(1, 1.0);
        return Ok(());
    }
    let fac = t.factorize_unchecked(n);
    match c {
        ChainId::RandomPrime => {
            let w = 1.0 / fac.len() as f64;
            for &(p, _) in fac.iter().rev() {
                f(n / p, w);
            }
        }
        ChainId::Mertens => {
            let &(p, _) = fac.last().expect("n >= 2");
            f(n / p, 1.0);
        }
        ChainId::VonMangoldt => {
            let ln_n = (n as f64).ln();
            for &(p, e) in &fac {
                let w = (p as f64).ln() / ln_n;
                let mut q = 1;
                for _ in 0..e {
                    q *= p;
                    f(n / q, w);
                }
            }
        }
        ChainId::EpsModified => {
            if fac.len() == 1 {
                let (p, k) = fac[0];
                if k == 1 {
                    f(n, 1.0);
                } else {
                    // q = p^j, j = 1..k−1; the j = k mass 1/k moves to j = k−1
                    let kf = k as f64;
                    let mut q = 1;
                    for j in 1..k {
                        q *= p;
                        f(n / q, if j == k - 1 { 2.0 / kf } else { 1.0 / kf });
                    }
                }
            } else {
                let ln_n = (n as f64).ln();
                for &(p, e) in &fac {
                    let w = (p as f64).ln() / ln_n;
                    let mut q = 1;
                    for _ in 0..e {
                        q *= p;
                        f(n / q, w);
                    }
                }
            }
        }
        ChainId::OddBanksMartin { k, .. } => {
            let omega: u32 = fac.iter().map(|&(_, e)| e).sum();
            if omega == *k {
                f(n, 1.0);
            } else {
                let terms: Vec<(u64, f64)> = fac.iter().map(|&(p, e)| (p, e as f64 * beta_log(p))).collect();
                let lambda: f64 = terms.iter().map(|&(_, x)| x).sum();
                for &(p, x) in &terms {
                    f(n / p, x / lambda);
                }
            }
        }
    }
    Ok(())
}

/// `β_p log p = p log p / (p − 2)`.
fn beta_log(p: u64) -> f64 {
    p as f64 * (p as f64).ln() / (p - 2) as f64
}

/// The downward transition law at `n`, targets in decreasing order.
pub fn transitions_down(c: &ChainId, n: u64, t: &FactorTable) -> Result<TransitionList> {
    c.validate()?;
    let mut entries = Vec::new();
    for_each_child(c, n, t, |m, prob| entries.push(Transition { target: Target::State(m), prob }))?;
    entries.sort_by(|a, b| b.target.cmp(&a.target));
    Ok(TransitionList { source: n, entries, truncated: false })
}

/// Bracket for `ν(n) − Σ_{q>1} ν(nq) P(nq ↘ n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubinvarianceReport {
    pub n: u64,
    pub lower: f64,
    pub upper: f64,
    pub truncation_q: u64,
}

/// A parent `m = n q` of `n` with `P(m ↘ n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Parent {
    pub m: u64,
    pub q: u64,
    /// Largest prime factor of `m` when it is known without factoring.
    pub largest_prime: Option<u64>,
    pub prob: f64,
}

/// Shared state for parent sums: weight evaluator, prime powers up to the
/// truncation point, and (lazily) the ν_Λ tail kernel.
pub struct ChainContext<'a> {
    ev: WeightEvaluator<'a>,
    lam: TruncatedLambda,
    trunc_q: u64,
    lambda_tail: OnceLock<std::result::Result<TabulatedRule, Error>>,
}

impl<'a> ChainContext<'a> {
    pub fn new(table: &'a FactorTable, kernels: KernelConfig, trunc_q: u64) -> Result<Self> {
        kernels.validate()?;
        if trunc_q < 2 || trunc_q > table.limit() {
            return domain(format!("truncation {trunc_q} must lie in [2, {}]", table.limit()));
        }
        Ok(Self {
            ev: WeightEvaluator::new(table, kernels)?,
            lam: TruncatedLambda::new(trunc_q, table)?,
            trunc_q,
            lambda_tail: OnceLock::new(),
        })
    }

    pub fn table(&self) -> &'a FactorTable {
        self.ev.table()
    }

    pub fn weights(&self) -> &WeightEvaluator<'a> {
        &self.ev
    }

    pub fn trunc_q(&self) -> u64 {
        self.trunc_q
    }

    /// Smallest prime allowed in multipliers: the shifted weight ν_p lives on
    /// p-rough integers, where the von Mangoldt chain is restricted.
    fn rough_floor(c: &ChainId, w: &WeightId) -> u64 {
        match (c, w) {
            (ChainId::VonMangoldt, WeightId::NuShifted { p }) => *p,
            _ => 2,
        }
    }

    fn check_state(&self, c: &ChainId, w: &WeightId, n: u64) -> Result<()> {
        c.validate()?;
        w.validate()?;
        if n > self.table().limit() {
            return domain(format!("state {n} exceeds sieve limit {}", self.table().limit()));
        }
        if !c.in_state_space(n, self.table())? || n < w.min_n() {
            return domain(format!("{n} is outside the state space of {c} with {}", w.name()));
        }
        let rough = Self::rough_floor(c, w);
        if rough > 2 && n > 1 && self.table().spf(n)? < rough {
            return domain(format!("{n} is not {rough}-rough"));
        }
        Ok(())
    }

    /// Parents `m = n q ≠ n` with `q ≤ trunc_q` (all of `Q` for a finite
    /// odd Banks–Martin prime set), restricted to the chain's state space.
    pub fn parents(&self, c: &ChainId, w: &WeightId, n: u64) -> Result<Vec<Parent>> {
        self.check_state(c, w, n)?;
        let t = self.table();
        let ln_n = (n as f64).ln();
        let primes_upto = |x: u64| t.primes().iter().copied().take_while(move |&p| p <= x);
        let mut out = Vec::new();
        let mut push = |m: Option<u64>, q: u64, largest_prime: Option<u64>, prob: f64| {
            if let Some(m) = m {
                if prob > 0.0 {
                    out.push(Parent { m, q, largest_prime, prob });
                }
            }
        };
        match c {
            ChainId::RandomPrime => {
                let omega = t.factorize(n)?.len() as u64;
                for p in primes_upto(self.trunc_q) {
                    let o = omega + u64::from(n % p != 0);
                    push(n.checked_mul(p), p, None, 1.0 / o as f64);
                }
            }
            ChainId::Mertens => {
                let big_p = t.largest_prime(n)?;
                for p in primes_upto(self.trunc_q).filter(|&p| p >= big_p) {
                    push(n.checked_mul(p), p, Some(p), 1.0);
                }
            }
            ChainId::VonMangoldt | ChainId::EpsModified => {
                let rough = Self::rough_floor(c, w);
                let n_is_prime = matches!(c, ChainId::EpsModified) && t.is_prime(n);
                for (pp, &lq) in self.lam.powers().iter().zip(self.lam.log_q()) {
                    if pp.p < rough {
                        continue;
                    }
                    let mut prob = pp.log_p / (ln_n + lq);
                    if n_is_prime && pp.p == n {
                        // n q = p^k with q = p^{k−1}
                        let k = (lq / pp.log_p).round() + 1.0;
                        prob += 1.0 / k;
                    }
                    push(n.checked_mul(pp.q), pp.q, None, prob);
                }
            }
            ChainId::OddBanksMartin { primes, .. } => {
                let fac = t.factorize(n)?;
                let lambda: f64 = fac.iter().map(|&(p, e)| e as f64 * beta_log(p)).sum();
                let vp = |p: u64| fac.iter().find(|&&(r, _)| r == p).map_or(0, |&(_, e)| e);
                let cand: Vec<u64> = match primes {
                    PrimeSet::Finite(s) => s.iter().copied().collect(),
                    PrimeSet::AllOdd => primes_upto(self.trunc_q).filter(|&p| p > 2).collect(),
                };
                for p in cand {
                    let x = beta_log(p);
                    let prob = (vp(p) + 1) as f64 * x / (lambda + x);
                    push(n.checked_mul(p), p, None, prob);
                }
            }
        }
        Ok(out)
    }

    fn weight_at(&self, w: &WeightId, m: u64, largest_prime: Option<u64>) -> Result<(f64, f64)> {
        match (w, largest_prime) {
            (WeightId::NuMertens, Some(p)) => {
                Ok((EULER_GAMMA.exp() / m as f64 * self.ev.mertens_product_below(p), 0.0))
            }
            (WeightId::NuMertens, None) if m > self.table().limit() => {
                domain(format!("Mertens weight at {m} needs a factorisation beyond the sieve"))
            }
            _ => {
                let b = self.ev.eval_bounded(w, m)?;
                Ok((b.value, b.error))
            }
        }
    }

    /// Certified bracket for the sub-invariance margin at `n`.
    pub fn margin(&self, c: &ChainId, w: &WeightId, n: u64) -> Result<SubinvarianceReport> {
        self.check_state(c, w, n)?;
        let (nu_n, nu_err) = self.weight_at(w, n, None)?;
        let parents = self.parents(c, w, n)?;
        let mut direct = 0.0;
        let mut err = nu_err;
        for par in parents.iter().rev() {
            let (v, e) = self.weight_at(w, par.m, par.largest_prime)?;
            direct += v * par.prob;
            err += e * par.prob;
        }
        let nf = n as f64;
        let (tail_lo, tail_hi) = match (c, w) {
            (ChainId::VonMangoldt, WeightId::Nu0) => (0.0, self.lam.shifted_tail_upper(nf, nf) / nf),
            (ChainId::VonMangoldt, WeightId::NuShifted { p }) => {
                (0.0, self.lam.shifted_tail_upper(nf, *p as f64 * nf) / nf)
            }
            (ChainId::EpsModified, WeightId::Nu0) => {
                let mut hi = self.lam.shifted_tail_upper(nf, nf) / nf;
                if self.table().is_prime(n) {
                    // redirected mass 1/(k² p^{k−1}) ν₀(p) for p^{k−1} > trunc_q
                    let mut pj = n as f64;
                    while pj <= self.trunc_q as f64 {
                        pj *= nf;
                    }
                    hi += nu_n * 2.0 / pj;
                }
                (0.0, hi)
            }
            (ChainId::OddBanksMartin { primes: PrimeSet::Finite(_), .. }, WeightId::Nu0) => (0.0, 0.0),
            (ChainId::OddBanksMartin { primes: PrimeSet::AllOdd, .. }, WeightId::Nu0) => {
                let fac = self.table().factorize(n)?;
                let big_p = fac.last().map_or(1, |&(p, _)| p);
                if big_p > self.trunc_q {
                    return domain(format!("truncation {} is below P({n}) = {big_p}", self.trunc_q));
                }
                let lambda: f64 = fac.iter().map(|&(p, e)| e as f64 * beta_log(p)).sum();
                // β_p ≤ β_{Q+1} beyond the cut, and λ + β_p log p ≥ log(e^λ p)
                let qf = self.trunc_q as f64;
                let beta_max = (qf + 1.0) / (qf - 1.0);
                (0.0, beta_max / nf * self.lam.shifted_tail_upper(nf, lambda.exp()))
            }
            (ChainId::Mertens, WeightId::NuMertens) => {
                let big_p = self.table().largest_prime(n)?;
                let exact = EULER_GAMMA.exp() / nf * self.ev.mertens_product_below((self.trunc_q + 1).max(big_p));
                (exact, exact)
            }
            (ChainId::VonMangoldt, WeightId::NuLambda { .. }) => {
                let t = self.lambda_tail_integral(n)?;
                (t.0 - t.1, t.0 + t.1)
            }
            _ => {
                return Err(Error::Unsupported(format!(
                    "no certified parent tail for {c} with {}",
                    w.name()
                )))
            }
        };
        let slop = 1e-13 * (nu_n.abs() + direct.abs()) + err;
        let base = nu_n - direct;
        Ok(SubinvarianceReport {
            n,
            lower: base - tail_hi - slop,
            upper: base - tail_lo + slop,
            truncation_q: self.trunc_q,
        })
    }

    /// `Σ_{q > Q} ν_Λ(nq) Λ(q)/log(nq) = ∫₀^∞ n^{−1−u} R_Q(1+u) / ζ(1+u) du`
    /// with `R_Q(s) = Σ_{q>Q} Λ(q) q^{−s}`; returns (value, error).
    fn lambda_tail_integral(&self, n: u64) -> Result<(f64, f64)> {
        const U_MAX: f64 = 20.0;
        let rule = self
            .lambda_tail
            .get_or_init(|| {
                let cfg = *self.ev.kernels();
                let breaks = TabulatedRule::geometric_breaks(1e-6, 1.2, U_MAX);
                TabulatedRule::new(&breaks, |u| {
                    let g = crate::kernels::inv_zeta(1.0 + u, &cfg)?;
                    let full = neg_zeta_log_deriv_bounded(1.0 + u, &cfg)?.value;
                    let r = (full - self.lam.dirichlet_partial(1.0 + u)).max(0.0);
                    Ok(g * r)
                })
            })
            .as_ref()
            .map_err(Clone::clone)?;
        let nf = n as f64;
        let l = nf.ln();
        let cut = if n > 1 { 40.0 / l } else { f64::INFINITY };
        let part = rule.integrate_weighted(|u| (-(1.0 + u) * l).exp(), cut);
        // beyond u0: R_Q(1+u) ≤ Q^{−u/2}·2/u and 1/ζ ≤ 1
        let u0 = part.stopped_at;
        let decay = l + 0.5 * (self.trunc_q as f64).ln();
        let tail = 2.0 / u0 / nf * (-u0 * decay).exp() / decay;
        Ok((part.value, part.error + tail + 1e-12 / nf))
    }

    /// Adjoint upward law at `n`: entries `(m, ν(m) P(m ↘ n)/ν(n))` for the
    /// enumerated parents, then `(∞, residual)`.
    pub fn adjoint(&self, c: &ChainId, w: &WeightId, n: u64) -> Result<TransitionList> {
        self.check_state(c, w, n)?;
        let (nu_n, _) = self.weight_at(w, n, None)?;
        let mut entries = Vec::new();
        let mut total = 0.0;
        for par in self.parents(c, w, n)? {
            let (v, _) = self.weight_at(w, par.m, par.largest_prime)?;
            let prob = v * par.prob / nu_n;
            total += prob;
            entries.push(Transition { target: Target::State(par.m), prob });
        }
        let residual = 1.0 - total;
        if residual < -SUBINVARIANCE_TOL {
            return Err(Error::SubinvarianceViolation { n, residual });
        }
        entries.sort_by(|a, b| a.target.cmp(&b.target));
        entries.push(Transition { target: Target::Infinity, prob: residual.max(0.0) });
        Ok(TransitionList { source: n, entries, truncated: c.has_infinite_parents() })
    }
}

/// One-shot form of [`ChainContext::margin`].
pub fn subinvariance_margin(
    c: &ChainId,
    w: &WeightId,
    n: u64,
    trunc_q: u64,
    t: &FactorTable,
    kernels: KernelConfig,
) -> Result<SubinvarianceReport> {
    ChainContext::new(t, kernels, trunc_q)?.margin(c, w, n)
}

/// One-shot form of [`ChainContext::adjoint`].
pub fn adjoint_transitions(
    c: &ChainId,
    w: &WeightId,
    n: u64,
    trunc_q: u64,
    t: &FactorTable,
    kernels: KernelConfig,
) -> Result<TransitionList> {
    ChainContext::new(t, kernels, trunc_q)?.adjoint(c, w, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(m: u64) -> Target {
        Target::State(m)
    }

    fn obm(k: u32, ps: &[u64]) -> ChainId {
        ChainId::OddBanksMartin { k, primes: PrimeSet::finite(ps.iter().copied()) }
    }

    #[test]
    fn worked_transition_examples() {
        let t = FactorTable::new(1000).unwrap();
        let l12 = 12f64.ln();
        let m = transitions_down(&ChainId::Mertens, 12, &t).unwrap();
        assert_eq!(m.entries, vec![Transition { target: st(4), prob: 1.0 }]);

        let v = transitions_down(&ChainId::VonMangoldt, 12, &t).unwrap();
        let targets: Vec<Target> = v.entries.iter().map(|e| e.target).collect();
        assert_eq!(targets, vec![st(6), st(4), st(3)]);
        assert!((v.prob_to(st(6)) - 2f64.ln() / l12).abs() < 1e-15);
        assert!((v.prob_to(st(4)) - 3f64.ln() / l12).abs() < 1e-15);
        assert!((v.prob_to(st(3)) - 2f64.ln() / l12).abs() < 1e-15);

        let e = transitions_down(&ChainId::EpsModified, 8, &t).unwrap();
        assert!((e.prob_to(st(4)) - 1.0 / 3.0).abs() < 1e-15);
        assert!((e.prob_to(st(2)) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(e.prob_to(st(1)), 0.0);
        let e4 = transitions_down(&ChainId::EpsModified, 4, &t).unwrap();
        assert_eq!(e4.entries, vec![Transition { target: st(2), prob: 1.0 }]);

        let b = transitions_down(&obm(1, &[3, 5]), 15, &t).unwrap();
        let lam = 3.0 * 3f64.ln() + 5.0 / 3.0 * 5f64.ln();
        assert!((b.prob_to(st(5)) - 3.0 * 3f64.ln() / lam).abs() < 1e-15);
        assert!((b.prob_to(st(3)) - 5.0 / 3.0 * 5f64.ln() / lam).abs() < 1e-15);
        assert!(transitions_down(&obm(1, &[3, 5]), 10, &t).is_err());
    }

    #[test]
    fn rows_sum_to_one_and_move_down() {
        let t = FactorTable::new(3000).unwrap();
        let chains = [
            ChainId::RandomPrime,
            ChainId::Mertens,
            ChainId::VonMangoldt,
            ChainId::EpsModified,
            obm(2, &[3, 5, 7, 11]),
        ];
        for c in &chains {
            for n in 1..=3000 {
                if !c.in_state_space(n, &t).unwrap() {
                    continue;
                }
                let tl = transitions_down(c, n, &t).unwrap();
                assert!((tl.total() - 1.0).abs() <= 1e-12, "{c} {n}");
                let absorbing = c.is_absorbing(n, &t).unwrap();
                for e in &tl.entries {
                    let Target::State(m) = e.target else { panic!() };
                    if absorbing {
                        assert_eq!(m, n);
                    } else {
                        assert!(m < n && n % m == 0);
                        assert!(c.in_state_space(m, &t).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn eps_matches_von_mangoldt_off_prime_powers() {
        let t = FactorTable::new(2000).unwrap();
        for n in 2..=2000u64 {
            if t.prime_power_base(n).unwrap().is_some() {
                continue;
            }
            let a = transitions_down(&ChainId::EpsModified, n, &t).unwrap();
            let b = transitions_down(&ChainId::VonMangoldt, n, &t).unwrap();
            assert_eq!(a.entries, b.entries);
        }
    }

    #[test]
    fn margins_for_invariant_and_subinvariant_pairs() {
        let t = FactorTable::new(200_000).unwrap();
        let ctx = ChainContext::new(&t, KernelConfig::default(), 100_000).unwrap();
        for n in [2u64, 3, 4, 6, 12, 30, 97, 1024, 5000] {
            let r = ctx.margin(&ChainId::VonMangoldt, &WeightId::Nu0, n).unwrap();
            assert!(r.lower >= -1e-9 && r.lower <= r.upper, "{n} {r:?}");
            let r = ctx.margin(&ChainId::VonMangoldt, &WeightId::NuShifted { p: 2 }, n).unwrap();
            assert!(r.lower >= -1e-9, "{n} {r:?}");
            let r = ctx.margin(&ChainId::Mertens, &WeightId::NuMertens, n).unwrap();
            assert!(r.lower <= 0.0 && r.upper >= 0.0, "{n} {r:?}");
            assert!(r.upper - r.lower < 1e-12);
            let r = ctx.margin(&ChainId::EpsModified, &WeightId::Nu0, n).unwrap();
            assert!(r.lower >= -1e-9, "{n} {r:?}");
        }
        let r = ctx.margin(&ChainId::Mertens, &WeightId::NuMertens, 1).unwrap();
        assert!(r.lower <= 0.0 && r.upper >= 0.0);
        assert!(matches!(
            ctx.margin(&ChainId::RandomPrime, &WeightId::Nu0, 6),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn odd_banks_martin_all_odd_primes() {
        let t = FactorTable::new(200_000).unwrap();
        let ctx = ChainContext::new(&t, KernelConfig::default(), 100_000).unwrap();
        let c = ChainId::OddBanksMartin { k: 1, primes: PrimeSet::AllOdd };
        for n in [3u64, 9, 15, 105, 3 * 3 * 3 * 7] {
            let r = ctx.margin(&c, &WeightId::Nu0, n).unwrap();
            assert!(r.lower >= -1e-9, "{n} {r:?}");
        }
    }

    #[test]
    fn nu_lambda_parent_sum_brackets_weight() {
        let t = FactorTable::new(100_000).unwrap();
        let ctx = ChainContext::new(&t, KernelConfig::default(), 1000).unwrap();
        for n in [1u64, 2, 6, 12, 97, 500] {
            let r = ctx.margin(&ChainId::VonMangoldt, &WeightId::nu_lambda(), n).unwrap();
            assert!(r.lower <= 0.0 && r.upper >= 0.0, "{n} {r:?}");
            assert!(r.upper - r.lower <= 1e-6);
        }
    }

    #[test]
    fn adjoint_detailed_balance_and_residuals() {
        let t = FactorTable::new(100_000).unwrap();
        let ctx = ChainContext::new(&t, KernelConfig::default(), 50_000).unwrap();
        let w = WeightId::Nu0;
        for n in [2u64, 6, 35] {
            let up = ctx.adjoint(&ChainId::VonMangoldt, &w, n).unwrap();
            assert!((up.total() - 1.0).abs() < 1e-12);
            assert!(up.truncated);
            for e in &up.entries {
                if let Target::State(m) = e.target {
                    if m > t.limit() {
                        continue;
                    }
                    let down = transitions_down(&ChainId::VonMangoldt, m, &t).unwrap();
                    let lhs = crate::weights::nu0(n).unwrap() * e.prob;
                    let rhs = crate::weights::nu0(m).unwrap() * down.prob_to(st(n));
                    assert!((lhs - rhs).abs() <= 1e-15 * rhs, "{n}->{m}");
                }
            }
        }
        // eps adjoint from a prime never lists 1
        let up = ctx.adjoint(&ChainId::EpsModified, &w, 7).unwrap();
        assert!(up.entries.iter().all(|e| e.target != st(1)));
        // the ν_Λ escape mass shrinks with the truncation
        let small = ChainContext::new(&t, KernelConfig::default(), 100).unwrap();
        let a = small.adjoint(&ChainId::VonMangoldt, &WeightId::nu_lambda(), 1).unwrap();
        let b = ctx.adjoint(&ChainId::VonMangoldt, &WeightId::nu_lambda(), 1).unwrap();
        assert!(b.prob_to(Target::Infinity) < a.prob_to(Target::Infinity));
        assert!(b.prob_to(Target::Infinity) < 0.2);
    }

    #[test]
    fn violation_is_reported() {
        // the von Mangoldt parents of 1 carry ν_M mass 1 − Π_{p ≤ Q}(1 − 1/p) from
        // primes alone, and prime powers push it past 1
        let t = FactorTable::new(10_000).unwrap();
        let ctx = ChainContext::new(&t, KernelConfig::default(), 10_000).unwrap();
        let r = ctx.adjoint(&ChainId::VonMangoldt, &WeightId::NuShifted { p: 2 }, 1);
        assert!(r.is_ok());
        let bad = ctx.adjoint(&ChainId::VonMangoldt, &WeightId::NuMertens, 1);
        assert!(matches!(bad, Err(Error::SubinvarianceViolation { n: 1, .. })), "{bad:?}");
    }
}
