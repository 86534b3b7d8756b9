//! Exact hitting-mass recursions on `[1, X]` and the quantities built from
//! them: the initial mass and bound for primitive sets in `[x, X]`, LYM
//! masses, cut capacities and the von Mangoldt flow divergence.
//!
//! Every parent of a state `n ≤ X` that can be reached from mass on `[1, X]`
//! also lies in `[1, X]`, so the recursions below carry no truncation error.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::Ratio;
use rayon::prelude::*;

use crate::arith::{for_each_prime_up_to, FactorTable};
use crate::chains::{for_each_child, ChainId};
use crate::error::{domain, Error, Result};
use crate::kernels::TruncatedLambda;
use crate::primitive::PrimitiveSet;
use crate::weights::{nu0, WeightEvaluator, WeightId};

/// Largest `X` for which a dense mass vector is allocated.
pub const MAX_DENSE_LIMIT: u64 = 50_000_000;

/// Nonnegative masses on `[0, X]`, stored densely (index 0 is always zero).
#[derive(Debug, Clone, PartialEq)]
pub struct MassVector {
    values: Vec<f64>,
}

impl MassVector {
    pub fn zeros(limit: u64) -> Result<Self> {
        if limit > MAX_DENSE_LIMIT {
            return Err(Error::Resource(format!(
                "mass vectors are dense; X = {limit} exceeds {MAX_DENSE_LIMIT}"
            )));
        }
        Ok(Self { values: vec![0.0; limit as usize + 1] })
    }

    /// Unit mass at `n`.
    pub fn unit(n: u64, limit: u64) -> Result<Self> {
        let mut b = Self::zeros(limit)?;
        b.set(n, 1.0)?;
        Ok(b)
    }

    /// Masses `f(n)` for `1 ≤ n ≤ limit`.
    pub fn from_fn(limit: u64, mut f: impl FnMut(u64) -> f64) -> Result<Self> {
        let mut b = Self::zeros(limit)?;
        for n in 1..=limit {
            b.set(n, f(n))?;
        }
        Ok(b)
    }

    pub fn limit(&self) -> u64 {
        self.values.len() as u64 - 1
    }

    pub fn get(&self, n: u64) -> f64 {
        self.values.get(n as usize).copied().unwrap_or(0.0)
    }

    pub fn set(&mut self, n: u64, v: f64) -> Result<()> {
        if n == 0 || n > self.limit() {
            return domain(format!("index {n} outside [1, {}]", self.limit()));
        }
        if !(v >= 0.0) || !v.is_finite() {
            return domain(format!("mass at {n} must be finite and nonnegative, got {v}"));
        }
        self.values[n as usize] = v;
        Ok(())
    }

    /// Values indexed by `n`, with a zero at index 0.
    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// `(n, value)` for the nonzero entries, ascending.
    pub fn nonzero(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.values.iter().enumerate().filter(|(_, &v)| v != 0.0).map(|(n, &v)| (n as u64, v))
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

fn check_support(c: &ChainId, b: &MassVector, t: &FactorTable) -> Result<()> {
    if b.limit() > t.limit() {
        return domain(format!("X = {} exceeds sieve limit {}", b.limit(), t.limit()));
    }
    for (n, _) in b.nonzero() {
        if !c.in_state_space(n, t)? {
            return domain(format!("initial mass at {n} lies outside the {} state space", c.name()));
        }
    }
    Ok(())
}

/// Downward hitting masses `h(n) = b(n) + Σ_{q ≥ 2, nq ≤ X} h(nq) P(nq ↘ n)`,
/// pushed from `X` down to 1. Absorbing states keep the mass that reaches them.
pub fn hitting_down(c: &ChainId, b: &MassVector, t: &FactorTable) -> Result<MassVector> {
    c.validate()?;
    check_support(c, b, t)?;
    let mut h = b.clone();
    for n in (1..=h.limit()).rev() {
        let hn = h.values[n as usize];
        if hn == 0.0 {
            continue;
        }
        for_each_child(c, n, t, |m, p| {
            if m != n {
                h.values[m as usize] += hn * p;
            }
        })?;
    }
    Ok(h)
}

/// Upward hitting masses for the adjoint chain of `(c, w)`:
/// `h(n) = b(n) + Σ_{d} h(d) ν(n) P(n ↘ d) / ν(d)` over downward targets
/// `d ≠ n`, computed from 1 up to `X`.
///
/// The upward mass leaving each `d` within `[1, X]` is accumulated and must
/// not exceed 1 + 1e-8; otherwise `w` is not sub-invariant for `c`.
pub fn hitting_up(c: &ChainId, w: &WeightId, b: &MassVector, ev: &WeightEvaluator<'_>) -> Result<MassVector> {
    c.validate()?;
    w.validate()?;
    let t = ev.table();
    check_support(c, b, t)?;
    let x = b.limit();
    let rough = match (c, w) {
        (ChainId::VonMangoldt, WeightId::NuShifted { p }) => *p,
        _ => 2,
    };
    let in_space = |n: u64| -> Result<bool> {
        Ok(n >= w.min_n() && c.in_state_space(n, t)? && (rough == 2 || n == 1 || t.spf(n)? >= rough))
    };
    for (n, _) in b.nonzero() {
        if !in_space(n)? {
            return domain(format!("initial mass at {n} lies outside the space of {c} with {}", w.name()));
        }
    }
    let nu = ev.dense(w, x)?;
    let mut h = b.clone();
    let mut outflow = vec![0.0f64; x as usize + 1];
    for n in 1..=x {
        if !in_space(n)? {
            continue;
        }
        let nu_n = nu[n as usize];
        let mut acc = 0.0;
        let mut bad = None;
        for_each_child(c, n, t, |d, p| {
            if d == n || d < w.min_n() || (rough > 2 && d > 1 && t.spf_unchecked(d) < rough) {
                return;
            }
            let up = nu_n * p / nu[d as usize];
            acc += h.values[d as usize] * up;
            outflow[d as usize] += up;
            if outflow[d as usize] > 1.0 + crate::chains::SUBINVARIANCE_TOL {
                bad.get_or_insert(d);
            }
        })?;
        if let Some(d) = bad {
            return Err(Error::SubinvarianceViolation { n: d, residual: 1.0 - outflow[d as usize] });
        }
        h.values[n as usize] += acc;
    }
    Ok(h)
}

/// Initial mass `b(n) = ν₀(n) − Σ_{2 ≤ q ≤ X/n} ν₀(nq) Λ(q)/log(nq)` on `[x, X]`.
pub fn mass_1196(x: u64, big_x: u64, t: &FactorTable) -> Result<MassVector> {
    if x < 2 || x > big_x || big_x > t.limit() {
        return domain(format!("need 2 <= x <= X <= {} (got x={x}, X={big_x})", t.limit()));
    }
    let pp = t.prime_powers(big_x / x)?;
    let vals: Vec<f64> = (x..=big_x)
        .into_par_iter()
        .map(|n| {
            let qmax = big_x / n;
            let nf = n as f64;
            let ln_n = nf.ln();
            let mut s = 0.0;
            for e in pp.iter().take_while(|e| e.q <= qmax) {
                let m = nf * e.q as f64;
                let lm = ln_n + (e.q as f64).ln();
                s += e.log_p / (m * lm * lm);
            }
            1.0 / (nf * ln_n) - s
        })
        .collect();
    let mut b = MassVector::zeros(big_x)?;
    for (n, v) in (x..=big_x).zip(vals) {
        if v < -1e-12 {
            return Err(Error::Internal(format!("initial mass at {n} is negative: {v:e}")));
        }
        b.values[n as usize] = v.max(0.0);
    }
    Ok(b)
}

/// `Σ_{x ≤ r ≤ X} (1/(r log² r)) Σ_{q | r, r/q < x} Λ(q)`, an upper bound for
/// `Σ_{a ∈ A} ν₀(a)` over primitive `A ⊆ [x, X]`.
pub fn bound_1196(x: u64, big_x: u64, t: &FactorTable) -> Result<f64> {
    if x < 2 || x > big_x || big_x > t.limit() {
        return domain(format!("need 2 <= x <= X <= {} (got x={x}, X={big_x})", t.limit()));
    }
    const CHUNK: u64 = 1 << 14;
    let chunks: Vec<(u64, u64)> = (x..=big_x)
        .step_by(CHUNK as usize)
        .map(|a| (a, (a + CHUNK - 1).min(big_x)))
        .collect();
    let partial: Vec<f64> = chunks
        .par_iter()
        .map(|&(a, b)| {
            let mut s = 0.0;
            for r in a..=b {
                let mut inner = 0.0;
                for (p, e) in t.factorize_unchecked(r) {
                    let lp = (p as f64).ln();
                    let mut q = 1;
                    for _ in 0..e {
                        q *= p;
                        if r / q < x {
                            inner += lp;
                        }
                    }
                }
                if inner > 0.0 {
                    let lr = (r as f64).ln();
                    s += inner / (r as f64 * lr * lr);
                }
            }
            s
        })
        .collect();
    Ok(partial.iter().sum())
}

/// `Σ_{a ∈ A} ν(a)`.
pub fn erdos_sum(a: &[u64], w: &WeightId, ev: &WeightEvaluator<'_>) -> Result<f64> {
    if a.contains(&1) || a.contains(&0) {
        return domain("Erdős sums are taken over integers >= 2");
    }
    a.iter().map(|&n| ev.eval(w, n)).sum()
}

/// `Σ_{p ≤ limit} 1/(p log p)` at each cutoff in `cutoffs` (ascending), with
/// compensated summation.
pub fn prime_erdos_sums(cutoffs: &[u64]) -> Result<Vec<f64>> {
    if cutoffs.windows(2).any(|w| w[0] > w[1]) {
        return domain("cutoffs must be ascending");
    }
    let Some(&last) = cutoffs.last() else { return Ok(Vec::new()) };
    let mut out = Vec::with_capacity(cutoffs.len());
    let mut next = 0;
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    let record = |upto: u64, sum: f64, out: &mut Vec<f64>, next: &mut usize| {
        while *next < cutoffs.len() && cutoffs[*next] < upto {
            out.push(sum);
            *next += 1;
        }
    };
    for_each_prime_up_to(last, |p| {
        record(p, sum + comp, &mut out, &mut next);
        let term = nu0(p).expect("p >= 2");
        // Neumaier summation
        let s = sum + term;
        comp += if sum.abs() >= term.abs() { (sum - s) + term } else { (term - s) + sum };
        sum = s;
    })?;
    record(u64::MAX, sum + comp, &mut out, &mut next);
    Ok(out)
}

/// Exact downward hitting masses of the random-prime chain started from unit
/// mass at the squarefree `n0`, on the divisors of `n0`.
pub fn lym_masses(n0: u64, t: &FactorTable) -> Result<BTreeMap<u64, Ratio<u128>>> {
    if n0 < 1 || n0 > t.limit() {
        return domain(format!("n0 = {n0} must lie in [1, {}]", t.limit()));
    }
    let f = t.factorize(n0)?;
    if f.iter().any(|&(_, e)| e > 1) {
        return domain(format!("{n0} is not squarefree"));
    }
    if f.len() > 12 {
        return domain("at most 12 prime factors are supported");
    }
    let primes: Vec<u64> = f.iter().map(|&(p, _)| p).collect();
    let nf = primes.len();
    // index divisors by bitmask of their prime factors
    let value = |mask: usize| -> u64 {
        (0..nf).filter(|i| mask >> i & 1 == 1).map(|i| primes[i]).product()
    };
    let full = (1usize << nf) - 1;
    let mut h = vec![Ratio::from_integer(0u128); 1 << nf];
    h[full] = Ratio::from_integer(1);
    let mut masks: Vec<usize> = (0..=full).collect();
    masks.sort_by_key(|m| std::cmp::Reverse(m.count_ones()));
    for &m in &masks {
        let k = m.count_ones() as u128;
        if k == 0 || h[m] == Ratio::from_integer(0) {
            continue;
        }
        let share = h[m] / Ratio::from_integer(k);
        for i in 0..nf {
            if m >> i & 1 == 1 {
                h[m & !(1 << i)] += share;
            }
        }
    }
    Ok((0..=full).map(|m| (value(m), h[m])).collect())
}

/// Number of middle-layer divisors `C(N, ⌊N/2⌋)` of a squarefree number with `N` prime factors.
pub fn sperner_bound(n_primes: u32) -> u128 {
    binomial(n_primes as u128, n_primes as u128 / 2)
}

pub(crate) fn binomial(n: u128, k: u128) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

/// `(lhs, rhs)` with `lhs = Σ_{n ∈ A ∩ S} ν(n)` and
/// `rhs = Σ_{n ∈ S} ν(n) Σ_{m ∉ S} P(n ↘ m)`; for sub-invariant `ν`, `lhs ≤ rhs`.
pub fn cut_capacity(
    c: &ChainId,
    w: &WeightId,
    s: &BTreeSet<u64>,
    a: &PrimitiveSet,
    ev: &WeightEvaluator<'_>,
) -> Result<(f64, f64)> {
    c.validate()?;
    let a = a.clone().certify()?;
    let t = ev.table();
    for &n in s {
        if n > t.limit() || !c.in_state_space(n, t)? || n < w.min_n() {
            return domain(format!("cut state {n} is outside the state space"));
        }
        if c.is_absorbing(n, t)? {
            return domain(format!("cut state {n} is absorbing"));
        }
    }
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for &n in s {
        let nu = ev.eval(w, n)?;
        if a.contains(n) {
            lhs += nu;
        }
        let mut leave = 0.0;
        for_each_child(c, n, t, |m, p| {
            if !s.contains(&m) {
                leave += p;
            }
        })?;
        rhs += nu * leave;
    }
    Ok((lhs, rhs))
}

/// Net flow of the von Mangoldt chain weighted by ν₀ at `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowDivergence {
    pub inflow_lower: f64,
    pub inflow_upper: f64,
    pub outflow: f64,
}

/// Outflow `Σ_{q | n} ν₀(n) Λ(q)/log n` and a bracket for the inflow
/// `Σ_q Λ(q)/(nq log²(nq))` (direct sum over `q ≤ Q` plus certified tail).
pub fn flow_divergence(n: u64, lam: &TruncatedLambda, t: &FactorTable) -> Result<FlowDivergence> {
    if n < 2 || n > t.limit() {
        return domain(format!("flow divergence needs 2 <= n <= {}", t.limit()));
    }
    let nu = nu0(n)?;
    let ln_n = (n as f64).ln();
    let mut outflow = 0.0;
    for_each_child(&ChainId::VonMangoldt, n, t, |_, p| outflow += nu * p)?;
    debug_assert!(outflow > 0.0 && ln_n > 0.0);
    let nf = n as f64;
    let direct = lam.shifted_partial(nf, nf) / nf;
    let tail_lo = lam.shifted_tail_lower(nf, nf) / nf;
    let tail_hi = lam.shifted_tail_upper(nf, nf) / nf;
    Ok(FlowDivergence {
        inflow_lower: (direct + tail_lo) * (1.0 - 1e-13),
        inflow_upper: (direct + tail_hi) * (1.0 + 1e-13),
        outflow,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chains::PrimeSet;
    use crate::kernels::KernelConfig;
    use crate::primitive::random_antichain;
    use proptest::prelude::*;

    fn table() -> FactorTable {
        FactorTable::new(20_000).unwrap()
    }

    #[test]
    fn single_start_examples() {
        let t = table();
        let b = MassVector::unit(12, 12).unwrap();
        let h = hitting_down(&ChainId::Mertens, &b, &t).unwrap();
        let support: Vec<(u64, f64)> = h.nonzero().collect();
        assert_eq!(support, vec![(1, 1.0), (2, 1.0), (4, 1.0), (12, 1.0)]);
        let h = hitting_down(&ChainId::VonMangoldt, &b, &t).unwrap();
        // 12 → 3 directly, or 12 → 6 → 3
        let direct = 2f64.ln() / 12f64.ln();
        assert!((h.get(3) - direct * (1.0 + 2f64.ln() / 6f64.ln())).abs() < 1e-15);
        let h = hitting_down(&ChainId::RandomPrime, &MassVector::unit(30, 30).unwrap(), &t).unwrap();
        for n in [1u64, 2, 3, 5, 6, 10, 15, 30] {
            let k = t.factorize(n).unwrap().len() as u128;
            assert!((h.get(n) - 1.0 / binomial(3, k) as f64).abs() < 1e-15, "{n}");
        }
    }

    #[test]
    fn mass_is_conserved_into_absorbing_states() {
        let t = table();
        let chains = [
            ChainId::RandomPrime,
            ChainId::Mertens,
            ChainId::VonMangoldt,
            ChainId::EpsModified,
            ChainId::OddBanksMartin { k: 2, primes: PrimeSet::finite([3, 5, 7]) },
        ];
        for c in &chains {
            let b = MassVector::from_fn(3000, |n| {
                if c.in_state_space(n, &t).unwrap() {
                    1.0 / n as f64
                } else {
                    0.0
                }
            })
            .unwrap();
            let h = hitting_down(c, &b, &t).unwrap();
            let absorbed: f64 = h.nonzero().filter(|&(n, _)| c.is_absorbing(n, &t).unwrap()).map(|(_, v)| v).sum();
            assert!((absorbed - b.total()).abs() <= 1e-9, "{c}");
        }
    }

    #[test]
    fn initial_mass_reproduces_nu0() {
        let t = table();
        let b = mass_1196(20, 2000, &t).unwrap();
        assert_eq!(b.get(19), 0.0);
        assert_eq!(b.get(1500), nu0(1500).unwrap());
        let h = hitting_down(&ChainId::VonMangoldt, &b, &t).unwrap();
        for n in 20..=2000 {
            assert!((h.get(n) - nu0(n).unwrap()).abs() <= 1e-12, "{n}");
        }
    }

    #[test]
    fn bound_against_double_sum() {
        let t = table();
        let (x, big_x) = (30u64, 5000u64);
        let mut oracle = 0.0;
        for r in x..=big_x {
            for q in 2..=r {
                if r % q == 0 && r / q < x {
                    oracle += t.lambda(q).unwrap() / (r as f64 * (r as f64).ln().powi(2));
                }
            }
        }
        let b = bound_1196(x, big_x, &t).unwrap();
        assert!((b - oracle).abs() < 1e-12, "{b} {oracle}");
        let single = bound_1196(97, 97, &t).unwrap();
        assert!((single - 97f64.ln() / (97.0 * 97f64.ln().powi(2))).abs() < 1e-15);
        let ev = WeightEvaluator::new(&t, KernelConfig::default()).unwrap();
        let n2: Vec<u64> = crate::primitive::generate_layer(2, big_x, None, &t)
            .unwrap()
            .iter()
            .filter(|&n| n >= x)
            .collect();
        assert!(erdos_sum(&n2, &WeightId::Nu0, &ev).unwrap() <= b);
    }

    #[test]
    fn erdos_sum_examples() {
        let t = table();
        let ev = WeightEvaluator::new(&t, KernelConfig::default()).unwrap();
        assert_eq!(erdos_sum(&[], &WeightId::Nu0, &ev).unwrap(), 0.0);
        assert_eq!(erdos_sum(&[2], &WeightId::Nu0, &ev).unwrap(), 1.0 / (2.0 * 2f64.ln()));
        assert!(erdos_sum(&[1, 2], &WeightId::Nu0, &ev).is_err());
        let s = prime_erdos_sums(&[10, 100, 1000]).unwrap();
        let direct: f64 = [2u64, 3, 5, 7].iter().map(|&p| nu0(p).unwrap()).sum();
        assert!((s[0] - direct).abs() < 1e-15);
        assert!(s[0] < s[1] && s[1] < s[2] && s[2] < 1.6366164);
    }

    #[test]
    fn lym_examples() {
        let t = table();
        let h = lym_masses(30, &t).unwrap();
        assert_eq!(h[&6], Ratio::new(1, 3));
        assert_eq!(h[&30], Ratio::from_integer(1));
        assert_eq!(h[&1], Ratio::from_integer(1));
        assert!(lym_masses(12, &t).is_err());
        assert_eq!(sperner_bound(6), 20);
    }

    #[test]
    fn adjoint_reproduces_weights() {
        let t = table();
        let ev = WeightEvaluator::new(&t, KernelConfig::default()).unwrap();
        let x = 3000;
        // primes carry ν₀ for the eps adjoint
        let b = MassVector::from_fn(x, |n| if t.is_prime(n) { nu0(n).unwrap() } else { 0.0 }).unwrap();
        let h = hitting_up(&ChainId::EpsModified, &WeightId::Nu0, &b, &ev).unwrap();
        for n in 2..=x {
            assert!((h.get(n) - nu0(n).unwrap()).abs() <= 1e-10, "{n}");
        }
        let w = WeightId::NuShifted { p: 3 };
        let mut b = MassVector::zeros(x).unwrap();
        b.set(1, ev.eval(&w, 1).unwrap()).unwrap();
        let h = hitting_up(&ChainId::VonMangoldt, &w, &b, &ev).unwrap();
        for n in 1..=x {
            let expect = if n == 1 || t.spf(n).unwrap() >= 3 { ev.eval(&w, n).unwrap() } else { 0.0 };
            assert!((h.get(n) - expect).abs() <= 1e-10, "{n}");
        }
        let bad = hitting_up(&ChainId::VonMangoldt, &WeightId::NuMertens, &MassVector::unit(1, 100).unwrap(), &ev);
        assert!(matches!(bad, Err(Error::SubinvarianceViolation { .. })));
    }

    #[test]
    fn flow_examples() {
        let t = table();
        let lam = TruncatedLambda::new(20_000, &t).unwrap();
        let f = flow_divergence(12, &lam, &t).unwrap();
        assert!((f.outflow - 1.0 / (12.0 * 12f64.ln())).abs() < 1e-16);
        // the bracket sits within 1/(n log² n) of the outflow at n = 2
        let f = flow_divergence(2, &lam, &t).unwrap();
        let window = 1.0 / (2.0 * 2f64.ln().powi(2));
        assert!(f.inflow_lower <= f.inflow_upper);
        assert!(f.outflow - f.inflow_lower <= window && f.inflow_upper - f.outflow <= window);
        // n·(outflow − inflow) → 0 along powers of two
        let mut prev = f64::INFINITY;
        for j in [2u32, 6, 10, 14] {
            let n = 1u64 << j;
            let f = flow_divergence(n, &lam, &t).unwrap();
            let worst = (f.inflow_upper - f.outflow).abs().max((f.outflow - f.inflow_lower).abs()) * n as f64;
            assert!(worst < prev, "{n}");
            prev = worst;
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn antichain_mass_bound(seed in 0u64..1000, density in 0.05f64..1.0) {
            let t = FactorTable::new(1500).unwrap();
            let a = random_antichain(1500, density, seed).unwrap();
            let b = MassVector::from_fn(1500, |n| if n >= 700 { 1.0 / n as f64 } else { 0.0 }).unwrap();
            let h = hitting_down(&ChainId::VonMangoldt, &b, &t).unwrap();
            let through: f64 = a.iter().map(|n| h.get(n)).sum();
            prop_assert!(through <= b.total() + 1e-10);
        }

        #[test]
        fn cut_capacity_holds(seed in 0u64..1000, lo in 2u64..400, width in 1u64..600) {
            let t = FactorTable::new(2000).unwrap();
            let ev = WeightEvaluator::new(&t, KernelConfig::default()).unwrap();
            let s: BTreeSet<u64> = (lo..lo + width).collect();
            let a = random_antichain(2000, 0.5, seed).unwrap();
            let (lhs, rhs) = cut_capacity(&ChainId::VonMangoldt, &WeightId::Nu0, &s, &a, &ev).unwrap();
            prop_assert!(lhs <= rhs + 1e-10);
        }
    }
}
