use rand::Rng;
use rayon::prelude::*;

use super::{binomial_stderr, open_unit, stream};
use crate::arith::{for_each_prime_up_to, FactorTable};
use crate::error::{domain, Error, Result};
use crate::kernels::{zeta, KernelConfig};

/// Parameters of a truncated zeta-process draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaProcessConfig {
    pub s: f64,
    pub p_max: u64,
}

impl Default for ZetaProcessConfig {
    fn default() -> Self {
        Self { s: 2.0, p_max: 10_000 }
    }
}

impl ZetaProcessConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.s > 1.0) || !self.s.is_finite() {
            return domain(format!("zeta process needs s > 1, got {}", self.s));
        }
        if self.p_max < 2 {
            return domain("p_max must be at least 2");
        }
        Ok(())
    }

    /// Bound on the total-variation distance to the zeta distribution:
    /// `ℙ(some p > p_max has e_p ≥ 1) ≤ Σ_{n > P} n^{−s} ≤ P^{1−s}/(s − 1)`.
    pub fn bias_bound(&self) -> f64 {
        (self.p_max as f64).powf(1.0 - self.s) / (self.s - 1.0)
    }
}

/// Draws `Z_s` truncated to primes `≤ p_max`. Only primes with a nonzero
/// exponent are visited: the index of the next such prime is found by
/// inverting the cumulative product `Π (1 − p^{−s})`.
pub struct ZetaSampler {
    cfg: ZetaProcessConfig,
    primes: Vec<u64>,
    // cum[i] = Σ_{j<i} log(1 − p_j^{−s})
    cum: Vec<f64>,
}

impl ZetaSampler {
    pub fn new(cfg: ZetaProcessConfig) -> Result<Self> {
        cfg.validate()?;
        let mut primes = Vec::new();
        for_each_prime_up_to(cfg.p_max, |p| primes.push(p))?;
        let mut cum = Vec::with_capacity(primes.len() + 1);
        let mut acc = 0.0;
        cum.push(acc);
        for &p in &primes {
            acc += (-(p as f64).powf(-cfg.s)).ln_1p();
            cum.push(acc);
        }
        Ok(Self { cfg, primes, cum })
    }

    pub fn config(&self) -> &ZetaProcessConfig {
        &self.cfg
    }

    pub fn sample(&self, rng: &mut impl Rng) -> Result<u64> {
        let mut n: u64 = 1;
        let mut i = 0;
        while i < self.primes.len() {
            let target = self.cum[i] + open_unit(rng).ln();
            // first j ≥ i with cum[j + 1] < target
            let j = i + self.cum[i + 1..].partition_point(|&c| c >= target);
            if j >= self.primes.len() {
                break;
            }
            let p = self.primes[j];
            let e = 1 + (-open_unit(rng).ln() / (self.cfg.s * (p as f64).ln())).floor() as u32;
            n = p
                .checked_pow(e)
                .and_then(|pe| n.checked_mul(pe))
                .ok_or_else(|| Error::Resource("zeta-process draw overflows u64".into()))?;
            i = j + 1;
        }
        Ok(n)
    }

    /// One draw on stream `(seed, 0)`.
    pub fn sample_seeded(&self, seed: u64) -> Result<u64> {
        self.sample(&mut stream(seed, 0))
    }

    /// Counts of draws equal to each `n ≤ max_n`, over `draws` streams.
    pub fn histogram(&self, max_n: u64, draws: u64, seed: u64) -> Result<Vec<u64>> {
        (0..draws)
            .into_par_iter()
            .map(|i| self.sample(&mut stream(seed, i)))
            .try_fold(
                || vec![0u64; max_n as usize + 1],
                |mut h, z| {
                    let z = z?;
                    if z <= max_n {
                        h[z as usize] += 1;
                    }
                    Ok(h)
                },
            )
            .try_reduce(
                || vec![0u64; max_n as usize + 1],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    Ok(a)
                },
            )
    }
}

/// Frequency with which the coupled path `{Z_s : s > 1}` passes through `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaHitEstimate {
    pub hits: u64,
    pub trials: u64,
    pub freq: f64,
    pub stderr: f64,
    /// Bias from the floating-point evaluation of ζ.
    pub bias_bound: f64,
}

/// Estimates `ℙ(∃ s > 1 : Z_s = n)`.
///
/// With `n = Π p^{a_p}`, `Z_s = n` exactly for `s ∈ (max(L, M, 1), U]` where
/// `U = min_p min_{k ≤ a_p} E_{p,k}`, `L = max_p min_{k ≤ a_p + 1} E_{p,k}` and
/// `M = max_{q ∤ n} E_{q,1}`. Only the clocks `E_{p,k}` with `p | n`, `k ≤ a_p + 1`
/// are drawn; `M` enters through `ℙ(M < U) = 1/(ζ(U) Π_{p | n}(1 − p^{−U}))`.
pub fn zeta_process_hitting(
    n: u64,
    cfg: &ZetaProcessConfig,
    trials: u64,
    seed: u64,
    t: &FactorTable,
    kernels: &KernelConfig,
) -> Result<ZetaHitEstimate> {
    cfg.validate()?;
    kernels.validate()?;
    if n < 2 {
        return domain("zeta-process hitting needs n >= 2");
    }
    if trials == 0 {
        return domain("trials must be positive");
    }
    let fac = t.factorize(n)?;
    if let Some(&(p, _)) = fac.iter().find(|&&(p, _)| p > cfg.p_max) {
        return domain(format!("{n} has the prime factor {p} > p_max = {}", cfg.p_max));
    }
    let hits = (0..trials)
        .into_par_iter()
        .map(|i| -> Result<u64> {
            let mut rng = stream(seed, i);
            let mut upper = f64::INFINITY;
            let mut lower: f64 = 1.0;
            for &(p, a) in &fac {
                let lp = (p as f64).ln();
                let mut m = f64::INFINITY;
                for _ in 0..a {
                    m = m.min(-open_unit(&mut rng).ln() / lp);
                }
                upper = upper.min(m);
                lower = lower.max(m.min(-open_unit(&mut rng).ln() / lp));
            }
            let v = open_unit(&mut rng);
            if lower >= upper {
                return Ok(0);
            }
            let mut g = 1.0 / zeta(upper, kernels)?;
            for &(p, _) in &fac {
                g /= -(-upper * (p as f64).ln()).exp_m1();
            }
            Ok(u64::from(v <= g))
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(ZetaHitEstimate {
        hits,
        trials,
        freq: hits as f64 / trials as f64,
        stderr: binomial_stderr(hits, trials),
        bias_bound: kernels.target_tol,
    })
}
