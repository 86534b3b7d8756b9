//! Sieve-backed arithmetic functions on `[1, X]`.
//!
//! A [`FactorTable`] stores the smallest prime factor of every `n ≤ X`; all
//! other queries (Λ, Ω, ω, v_p, the largest prime factor, divisors) are
//! answered by repeated division against it.

use std::collections::BTreeMap;

use crate::error::{domain, Error, Result};

/// Smallest-prime-factor table for `2 ≤ n ≤ limit`, plus the sorted primes.
#[derive(Debug, Clone)]
pub struct FactorTable {
    limit: u64,
    spf: Vec<u32>,
    primes: Vec<u64>,
}

/// Multiplicative data of a single integer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorStats {
    pub big_omega: u32,
    pub small_omega: u32,
    pub vp: BTreeMap<u64, u32>,
    pub largest_prime: u64,
}

/// Mertens partial sums over `p ≤ x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MertensSums {
    pub sum_logp_over_p: f64,
    pub sum_recip_p: f64,
    pub euler_product: f64,
}

/// A prime power `q = p^k` together with `Λ(q) = log p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimePower {
    pub q: u64,
    pub p: u64,
    pub log_p: f64,
}

/// Builds the sieve; see [`FactorTable::new`].
pub fn build_sieve(limit: u64) -> Result<FactorTable> {
    FactorTable::new(limit)
}

impl FactorTable {
    /// Linear sieve over `[2, limit]`.
    pub fn new(limit: u64) -> Result<Self> {
        if limit < 2 {
            return domain(format!("sieve limit must be at least 2, got {limit}"));
        }
        if limit > u32::MAX as u64 {
            return Err(Error::Resource(format!("sieve limit {limit} exceeds 2^32 - 1")));
        }
        let len = limit as usize + 1;
        let mut spf: Vec<u32> = Vec::new();
        spf.try_reserve_exact(len)
            .map_err(|e| Error::Resource(format!("cannot allocate sieve of {len} entries: {e}")))?;
        spf.resize(len, 0);
        let mut primes: Vec<u64> = Vec::new();
        for i in 2..len {
            if spf[i] == 0 {
                spf[i] = i as u32;
                primes.push(i as u64);
            }
            let si = spf[i] as u64;
            for &p in &primes {
                let m = p * i as u64;
                if p > si || m > limit {
                    break;
                }
                spf[m as usize] = p as u32;
            }
        }
        Ok(Self { limit, spf, primes })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// Primes `≤ limit` in increasing order.
    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    fn check(&self, n: u64, lo: u64) -> Result<()> {
        if n < lo || n > self.limit {
            return domain(format!("n = {n} outside [{lo}, {}]", self.limit));
        }
        Ok(())
    }

    pub fn spf(&self, n: u64) -> Result<u64> {
        self.check(n, 2)?;
        Ok(self.spf[n as usize] as u64)
    }

    pub fn is_prime(&self, n: u64) -> bool {
        n >= 2 && n <= self.limit && self.spf[n as usize] as u64 == n
    }

    /// Number of primes `≤ x` (for `x ≤ limit`).
    pub fn prime_count(&self, x: u64) -> usize {
        self.primes.partition_point(|&p| p <= x)
    }

    /// Prime factorisation as `(p, v_p(n))` pairs with increasing `p`; empty for `n = 1`.
    pub fn factorize(&self, n: u64) -> Result<Vec<(u64, u32)>> {
        self.check(n, 1)?;
        Ok(self.factorize_unchecked(n))
    }

    pub(crate) fn factorize_unchecked(&self, mut n: u64) -> Vec<(u64, u32)> {
        let mut out: Vec<(u64, u32)> = Vec::with_capacity(8);
        while n > 1 {
            let p = self.spf[n as usize] as u64;
            let mut k = 0;
            while n % p == 0 {
                n /= p;
                k += 1;
            }
            out.push((p, k));
        }
        out
    }

    /// von Mangoldt function: `log p` if `n = p^k`, else 0.
    pub fn lambda(&self, n: u64) -> Result<f64> {
        self.check(n, 2)?;
        let p = self.spf[n as usize] as u64;
        let mut m = n;
        while m % p == 0 {
            m /= p;
        }
        Ok(if m == 1 { (p as f64).ln() } else { 0.0 })
    }

    /// `Some((p, k))` when `n = p^k` with `k ≥ 1`.
    pub fn prime_power_base(&self, n: u64) -> Result<Option<(u64, u32)>> {
        self.check(n, 2)?;
        Ok(self.prime_power_base_unchecked(n))
    }

    pub(crate) fn prime_power_base_unchecked(&self, n: u64) -> Option<(u64, u32)> {
        let p = self.spf[n as usize] as u64;
        let mut m = n;
        let mut k = 0;
        while m % p == 0 {
            m /= p;
            k += 1;
        }
        (m == 1).then_some((p, k))
    }

    pub(crate) fn spf_unchecked(&self, n: u64) -> u64 {
        self.spf[n as usize] as u64
    }

    pub fn factor_stats(&self, n: u64) -> Result<FactorStats> {
        self.check(n, 2)?;
        let f = self.factorize_unchecked(n);
        Ok(FactorStats {
            big_omega: f.iter().map(|&(_, k)| k).sum(),
            small_omega: f.len() as u32,
            largest_prime: f.last().map(|&(p, _)| p).unwrap_or(1),
            vp: f.into_iter().collect(),
        })
    }

    /// Ω(n); zero for `n = 1`.
    pub fn big_omega(&self, n: u64) -> Result<u32> {
        self.check(n, 1)?;
        Ok(self.factorize_unchecked(n).iter().map(|&(_, k)| k).sum())
    }

    /// Largest prime factor, with `P(1) = 1`.
    pub fn largest_prime(&self, n: u64) -> Result<u64> {
        self.check(n, 1)?;
        Ok(self.factorize_unchecked(n).last().map(|&(p, _)| p).unwrap_or(1))
    }

    /// All divisors of `n`, ascending.
    pub fn divisors(&self, n: u64) -> Result<Vec<u64>> {
        self.check(n, 1)?;
        let mut divs = vec![1u64];
        for (p, k) in self.factorize_unchecked(n) {
            let len = divs.len();
            let mut pk = 1;
            for _ in 0..k {
                pk *= p;
                for i in 0..len {
                    divs.push(divs[i] * pk);
                }
            }
        }
        divs.sort_unstable();
        Ok(divs)
    }

    /// Mertens sums Σ log p / p, Σ 1/p and Π (1 − 1/p) over `p ≤ x`.
    pub fn mertens_sums(&self, x: u64) -> Result<MertensSums> {
        self.check(x, 2)?;
        let mut sums = MertensSums { sum_logp_over_p: 0.0, sum_recip_p: 0.0, euler_product: 1.0 };
        for &p in self.primes.iter().take_while(|&&p| p <= x) {
            let pf = p as f64;
            sums.sum_logp_over_p += pf.ln() / pf;
            sums.sum_recip_p += 1.0 / pf;
            sums.euler_product *= 1.0 - 1.0 / pf;
        }
        Ok(sums)
    }

    /// Prime powers `q ≤ q_max` in increasing order of `q`.
    pub fn prime_powers(&self, q_max: u64) -> Result<Vec<PrimePower>> {
        self.check(q_max, 2)?;
        let mut out = Vec::new();
        for &p in self.primes.iter().take_while(|&&p| p <= q_max) {
            let log_p = (p as f64).ln();
            let mut q = p;
            loop {
                out.push(PrimePower { q, p, log_p });
                match q.checked_mul(p) {
                    Some(next) if next <= q_max => q = next,
                    _ => break,
                }
            }
        }
        out.sort_unstable_by_key(|pp| pp.q);
        Ok(out)
    }

    /// Chebyshev ψ(x) = Σ_{q ≤ x} Λ(q).
    pub fn chebyshev_psi(&self, x: u64) -> Result<f64> {
        self.check(x, 1)?;
        let mut psi = 0.0;
        for &p in self.primes.iter().take_while(|&&p| p <= x) {
            let log_p = (p as f64).ln();
            let mut q = p;
            while q <= x {
                psi += log_p;
                match q.checked_mul(p) {
                    Some(next) => q = next,
                    None => break,
                }
            }
        }
        Ok(psi)
    }
}

/// Calls `f` on every prime `≤ limit` in increasing order.
///
/// Bit-packed odd-only sieve of Eratosthenes, for prime-only sweeps that are
/// too large for a [`FactorTable`] (up to a few times 10⁸).
pub fn for_each_prime_up_to(limit: u64, mut f: impl FnMut(u64)) -> Result<()> {
    if limit < 2 {
        return Ok(());
    }
    f(2);
    // bit i stands for 2i + 1
    let n_odd = limit.div_ceil(2) as usize;
    let words = n_odd.div_ceil(64);
    let mut composite: Vec<u64> = Vec::new();
    composite
        .try_reserve_exact(words)
        .map_err(|e| Error::Resource(format!("cannot allocate prime sieve: {e}")))?;
    composite.resize(words, 0);
    composite[0] |= 1; // 1 is not prime
    let mut i = 1usize;
    loop {
        let p = 2 * i as u64 + 1;
        if p * p > limit {
            break;
        }
        if composite[i / 64] >> (i % 64) & 1 == 0 {
            let mut j = (p * p / 2) as usize;
            while j < n_odd {
                composite[j / 64] |= 1 << (j % 64);
                j += p as usize;
            }
        }
        i += 1;
    }
    for (w, &word) in composite.iter().enumerate() {
        let mut free = !word;
        while free != 0 {
            let b = free.trailing_zeros() as usize;
            free &= free - 1;
            let idx = w * 64 + b;
            if idx >= n_odd {
                return Ok(());
            }
            let p = 2 * idx as u64 + 1;
            if p <= limit {
                f(p);
            }
        }
    }
    Ok(())
}
