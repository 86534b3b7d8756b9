//! Real-axis evaluation of ζ(s), η(s) and −ζ′(s)/ζ(s), and certified tails of
//! truncated von Mangoldt sums.
//!
//! η uses the Cohen–Rodriguez Villegas–Zagier acceleration of the alternating
//! series, whose error for a moment sequence of a positive measure is at most
//! `2 η(s) / (3 + √8)^n`. ζ is obtained from η for `s ≤ 3` and from
//! Euler–Maclaurin summation above; −ζ′/ζ always uses Euler–Maclaurin for both
//! ζ and ζ′.

use std::f64::consts::{LN_2, PI};
use std::sync::OnceLock;

use crate::arith::{FactorTable, PrimePower};
use crate::error::{domain, Result};

/// Rosser–Schoenfeld: ψ(x) < 1.03883 x for all x > 0.
pub const CHEBYSHEV_PSI_UPPER: f64 = 1.03883;

/// Evaluation budget shared by all kernels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConfig {
    /// Absolute error budget per evaluation.
    pub target_tol: f64,
    /// Number of Bernoulli correction terms in Euler–Maclaurin.
    pub euler_maclaurin_terms: usize,
    /// Number of directly summed terms before the Euler–Maclaurin remainder.
    pub series_cutoff: usize,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self { target_tol: 1e-9, euler_maclaurin_terms: 12, series_cutoff: 20 }
    }
}

impl KernelConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.target_tol > 0.0 && self.target_tol <= 1e-3) {
            return domain(format!("target_tol {} outside (0, 1e-3]", self.target_tol));
        }
        if self.euler_maclaurin_terms < 1 || self.euler_maclaurin_terms > MAX_EM_TERMS {
            return domain(format!("euler_maclaurin_terms must lie in [1, {MAX_EM_TERMS}]"));
        }
        if self.series_cutoff < 10 {
            return domain("series_cutoff must be at least 10");
        }
        Ok(())
    }
}

const MAX_EM_TERMS: usize = 30;

/// `B_{2j} / (2j)!` for `j = 1..=MAX_EM_TERMS + 1`, via `2 (−1)^{j+1} ζ(2j) / (2π)^{2j}`.
fn bernoulli_ratios() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        (1..=MAX_EM_TERMS + 1)
            .map(|j| {
                let e = 2 * j as i32;
                let zeta_even = match j {
                    1 => PI * PI / 6.0,
                    2 => PI.powi(4) / 90.0,
                    _ => {
                        // terms below 1e-19 beyond k = 2000 for 2j ≥ 6
                        let mut s = 0.0;
                        for k in (1..=2000).rev() {
                            s += (k as f64).powi(-e);
                        }
                        s
                    }
                };
                let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
                sign * 2.0 * zeta_even / (2.0 * PI).powi(e)
            })
            .collect()
    })
}

/// `1 − 2^{1−s}` without cancellation near `s = 1`.
fn eta_factor(s: f64) -> f64 {
    -((1.0 - s) * LN_2).exp_m1()
}

/// Dirichlet eta function η(s) for real `s > 0`.
pub fn eta(s: f64, cfg: &KernelConfig) -> Result<f64> {
    if !(s > 0.0) || !s.is_finite() {
        return domain(format!("eta requires finite s > 0, got {s}"));
    }
    Ok(eta_cvz(s, cfg.target_tol))
}

fn eta_cvz(s: f64, tol: f64) -> f64 {
    // 2 / (3 + √8)^n ≤ tol · 1e-3, since η(s) < 1
    let rate = (3.0 + 8f64.sqrt()).ln();
    let n = ((2e3 / tol).ln() / rate).ceil().clamp(8.0, 64.0) as i64;
    let mut d = (3.0 + 8f64.sqrt()).powi(n as i32);
    d = 0.5 * (d + 1.0 / d);
    let mut b = -1.0;
    let mut c = -d;
    let mut sum = 0.0;
    for k in 0..n {
        c = b - c;
        sum += c * (-(s * ((k + 1) as f64).ln())).exp();
        let kf = k as f64;
        let nf = n as f64;
        b *= (kf + nf) * (kf - nf) / ((kf + 0.5) * (kf + 1.0));
    }
    sum / d
}

/// Riemann zeta ζ(s) for real `s > 1`.
pub fn zeta(s: f64, cfg: &KernelConfig) -> Result<f64> {
    if !(s > 1.0) || !s.is_finite() {
        return domain(format!("zeta requires finite s > 1, got {s}"));
    }
    if s <= 3.0 {
        let f = eta_factor(s);
        Ok(eta_cvz(s, (cfg.target_tol * f).max(1e-300)) / f)
    } else {
        Ok(zeta_em(s, cfg)?.value)
    }
}

/// `1/ζ(s)` for `s > 1`, evaluated as `(1 − 2^{1−s}) / η(s)`; stable as `s → 1⁺`.
pub fn inv_zeta(s: f64, cfg: &KernelConfig) -> Result<f64> {
    if !(s > 1.0) {
        return domain(format!("inv_zeta requires s > 1, got {s}"));
    }
    if s > 40.0 {
        // ζ(s) − 1 < 2^{1−s}; η route loses nothing but this is cheaper
        return Ok(1.0 / zeta_em(s, cfg)?.value);
    }
    Ok(eta_factor(s) / eta_cvz(s, cfg.target_tol * 1e-3))
}

/// A value paired with an absolute error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounded {
    pub value: f64,
    pub error: f64,
}

/// Euler–Maclaurin evaluation of ζ(s) and ζ′(s) for `s > 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaPair {
    pub zeta: Bounded,
    pub zeta_prime: Bounded,
}

/// ζ(s) by Euler–Maclaurin; the error bound is the first omitted correction
/// term, which dominates the remainder for real `s`.
pub fn zeta_em(s: f64, cfg: &KernelConfig) -> Result<Bounded> {
    Ok(zeta_pair_em(s, cfg)?.zeta)
}

pub fn zeta_pair_em(s: f64, cfg: &KernelConfig) -> Result<ZetaPair> {
    if !(s > 1.0) || !s.is_finite() {
        return domain(format!("Euler-Maclaurin zeta requires finite s > 1, got {s}"));
    }
    cfg.validate()?;
    let n = cfg.series_cutoff;
    let m = cfg.euler_maclaurin_terms;
    let nf = n as f64;
    let ln_n = nf.ln();
    let mut z = 0.0;
    let mut zp = 0.0;
    for k in (1..n).rev() {
        let lk = (k as f64).ln();
        let t = (-s * lk).exp();
        z += t;
        zp -= lk * t;
    }
    let n_1ms = ((1.0 - s) * ln_n).exp();
    let sm1 = s - 1.0;
    z += n_1ms / sm1;
    zp -= n_1ms * (ln_n / sm1 + 1.0 / (sm1 * sm1));
    let n_ms = (-s * ln_n).exp();
    z += 0.5 * n_ms;
    zp -= 0.5 * ln_n * n_ms;

    let ratios = bernoulli_ratios();
    // term_j = B_{2j}/(2j)! · s(s+1)…(s+2j−2) · N^{−s−2j+1}
    let mut rising = s; // (s)_{2j−1}
    let mut rising_log_deriv = 1.0 / s; // Σ_{i<2j−1} 1/(s+i)
    let mut npow = n_ms / nf; // N^{−s−2j+1}
    let mut last_t = 0.0;
    let mut last_tp = 0.0;
    for j in 1..=m + 1 {
        let t = ratios[j - 1] * rising * npow;
        let tp = t * (rising_log_deriv - ln_n);
        if j <= m {
            z += t;
            zp += tp;
        } else {
            last_t = t;
            last_tp = tp;
        }
        let a = s + (2 * j - 1) as f64;
        let b = s + (2 * j) as f64;
        rising *= a * b;
        rising_log_deriv += 1.0 / a + 1.0 / b;
        npow /= nf * nf;
    }
    let round = 4.0 * f64::EPSILON;
    Ok(ZetaPair {
        zeta: Bounded { value: z, error: last_t.abs() + round * z.abs() },
        zeta_prime: Bounded { value: zp, error: 2.0 * last_tp.abs() + round * (zp.abs() + 1.0) },
    })
}

/// −ζ′(s)/ζ(s) = Σ_q Λ(q) q^{−s} for real `s > 1`.
pub fn neg_zeta_log_deriv(s: f64, cfg: &KernelConfig) -> Result<f64> {
    Ok(neg_zeta_log_deriv_bounded(s, cfg)?.value)
}

pub fn neg_zeta_log_deriv_bounded(s: f64, cfg: &KernelConfig) -> Result<Bounded> {
    let pair = zeta_pair_em(s, cfg)?;
    let z = pair.zeta.value;
    let zp = pair.zeta_prime.value;
    let value = -zp / z;
    let error = pair.zeta_prime.error / z + zp.abs() * pair.zeta.error / (z * z);
    Ok(Bounded { value, error })
}

/// Σ_{q > Q} Λ(q) / (q · log(a q) · log(b q)) is bounded above by partial
/// summation against ψ(t) < c t:
///
/// `(c Q − ψ(Q)) g(Q) + c ∫_Q^∞ g(t) dt`, `g(t) = 1 / (t log(a t) log(b t))`.
///
/// `psi_q` must not exceed ψ(Q); requires `a, b ≥ 1` and `Q ≥ 2`.
pub fn shifted_tail_upper(a: f64, b: f64, big_q: f64, psi_q: f64) -> f64 {
    let (g_q, integral) = shifted_tail_parts(a, b, big_q);
    let c = CHEBYSHEV_PSI_UPPER;
    let boundary = ((c * big_q - psi_q) * g_q).max(0.0);
    (boundary + c * integral) * (1.0 + 1e-12)
}

/// `(g(Q), ∫_Q^∞ g)` for `g(t) = 1 / (t log(a t) log(b t))`.
fn shifted_tail_parts(a: f64, b: f64, big_q: f64) -> (f64, f64) {
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    debug_assert!(a >= 1.0 && big_q >= 2.0);
    let la = (a * big_q).ln();
    let lb = (b * big_q).ln();
    let g_q = 1.0 / (big_q * la * lb);
    let d = (b / a).ln();
    let integral = if d < 1e-12 { 1.0 / la } else { (d / la).ln_1p() / d };
    (g_q, integral)
}

/// Lower bound for the same tail from ψ(t) ≥ θ(t) > t(1 − 1/log t), valid
/// for `t ≥ 41`; `psi_q` must be at least ψ(Q). Returns 0 for `Q < 41`.
pub fn shifted_tail_lower(a: f64, b: f64, big_q: f64, psi_q: f64) -> f64 {
    if big_q < 41.0 {
        return 0.0;
    }
    let (g_q, integral) = shifted_tail_parts(a, b, big_q);
    let c = 1.0 - 1.0 / big_q.ln();
    (((c * big_q - psi_q) * g_q + c * integral) * (1.0 - 1e-12)).max(0.0)
}

/// Certified upper bound for Σ_{q > Q} Λ(q) / (q log²(m q)).
///
/// ψ(Q) is taken from the table when `Q` is sieved; otherwise the bound falls
/// back to ψ(Q) ≥ 0.
pub fn lambda_tail_upper(m: u64, big_q: u64, table: Option<&FactorTable>) -> Result<f64> {
    if m < 1 || big_q < 2 {
        return domain(format!("lambda_tail_upper requires m >= 1, Q >= 2 (got m={m}, Q={big_q})"));
    }
    let psi = match table {
        Some(t) if big_q <= t.limit() => t.chebyshev_psi(big_q)? * (1.0 - 1e-12),
        _ => 0.0,
    };
    Ok(shifted_tail_upper(m as f64, m as f64, big_q as f64, psi))
}

/// Prime powers `q ≤ Q` with cached logarithms and ψ(Q), shared by every
/// truncated Dirichlet-type sum.
#[derive(Debug, Clone)]
pub struct TruncatedLambda {
    q_max: u64,
    powers: Vec<PrimePower>,
    log_q: Vec<f64>,
    psi: f64,
    psi_upper: f64,
}

impl TruncatedLambda {
    pub fn new(q_max: u64, table: &FactorTable) -> Result<Self> {
        if q_max > table.limit() {
            return domain(format!("truncation {q_max} exceeds sieve limit {}", table.limit()));
        }
        let powers = table.prime_powers(q_max)?;
        let log_q = powers.iter().map(|pp| (pp.q as f64).ln()).collect();
        let psi_exact = powers.iter().map(|pp| pp.log_p).sum::<f64>();
        let psi = psi_exact * (1.0 - 1e-12);
        let psi_upper = psi_exact * (1.0 + 1e-12);
        Ok(Self { q_max, powers, log_q, psi, psi_upper })
    }

    pub fn q_max(&self) -> u64 {
        self.q_max
    }

    pub fn powers(&self) -> &[PrimePower] {
        &self.powers
    }

    pub fn log_q(&self) -> &[f64] {
        &self.log_q
    }

    /// A lower bound for ψ(Q).
    pub fn psi_lower(&self) -> f64 {
        self.psi
    }

    /// Σ_{q ≤ Q} Λ(q) / (q log(a q) log(b q)).
    pub fn shifted_partial(&self, a: f64, b: f64) -> f64 {
        let la = a.ln();
        let lb = b.ln();
        let mut s = 0.0;
        for (pp, &lq) in self.powers.iter().zip(&self.log_q).rev() {
            s += pp.log_p / (pp.q as f64 * (la + lq) * (lb + lq));
        }
        s
    }

    pub fn shifted_tail_upper(&self, a: f64, b: f64) -> f64 {
        shifted_tail_upper(a, b, self.q_max as f64, self.psi)
    }

    pub fn shifted_tail_lower(&self, a: f64, b: f64) -> f64 {
        shifted_tail_lower(a, b, self.q_max as f64, self.psi_upper)
    }

    /// Σ_{q ≤ Q} Λ(q) q^{−s}.
    pub fn dirichlet_partial(&self, s: f64) -> f64 {
        let mut acc = 0.0;
        for (pp, &lq) in self.powers.iter().zip(&self.log_q).rev() {
            acc += pp.log_p * (-s * lq).exp();
        }
        acc
    }

    /// Σ_{q > Q} Λ(q) q^{−s} = −ζ′/ζ(s) − Σ_{q ≤ Q} Λ(q) q^{−s}.
    pub fn dirichlet_tail(&self, s: f64, cfg: &KernelConfig) -> Result<Bounded> {
        let full = neg_zeta_log_deriv_bounded(s, cfg)?;
        let part = self.dirichlet_partial(s);
        let err = full.error + 4.0 * f64::EPSILON * (full.value.abs() + part.abs());
        Ok(Bounded { value: (full.value - part).max(0.0), error: err })
    }
}
