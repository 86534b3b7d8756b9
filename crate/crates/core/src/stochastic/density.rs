use rand::Rng;
use rayon::prelude::*;

use super::stream;
use crate::arith::PrimePower;
use crate::error::{domain, Result};
use crate::weights::WeightEvaluator;

/// Per-threshold moments of `X_j = #{i : n_i ∈ A ∩ [1, x_j]} / log log x_j`
/// along upward von Mangoldt paths from 1.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityStats {
    pub x_list: Vec<u64>,
    pub mean: Vec<f64>,
    pub second_moment: Vec<f64>,
    pub stderr: Vec<f64>,
    pub trials: u64,
}

/// Upward ν_Λ-adjoint steps restricted to targets `≤ cap`; a jump beyond the
/// cap (or to ∞) ends the path. Paths increase, so the cap does not change
/// any count below it.
struct CappedLambdaWalk {
    nu: Vec<f64>,
    powers: Vec<PrimePower>,
    cap: u64,
}

impl CappedLambdaWalk {
    fn step(&self, n: u64, rng: &mut impl Rng) -> Option<u64> {
        let u: f64 = rng.random();
        let nu_n = self.nu[n as usize];
        let ln_n = (n as f64).ln();
        let qmax = self.cap / n;
        let mut acc = 0.0;
        for pp in self.powers.iter().take_while(|pp| pp.q <= qmax) {
            let m = n * pp.q;
            acc += self.nu[m as usize] * pp.log_p / ((ln_n + (pp.q as f64).ln()) * nu_n);
            if u < acc {
                return Some(m);
            }
        }
        None
    }
}

/// Moments of `X_j` over `trials` paths, with `A` given by `in_a`.
pub fn chain_density_stats(
    in_a: impl Fn(u64) -> bool + Sync,
    x_list: &[u64],
    trials: u64,
    trunc_x: u64,
    seed: u64,
    ev: &WeightEvaluator<'_>,
) -> Result<DensityStats> {
    if trials < 2 {
        return domain("need at least 2 trials");
    }
    if x_list.iter().any(|&x| x < 3 || x > trunc_x) {
        return domain(format!("thresholds must lie in [3, {trunc_x}]"));
    }
    if trunc_x > ev.table().limit() {
        return domain(format!("trunc_x = {trunc_x} exceeds sieve limit {}", ev.table().limit()));
    }
    let (nu, _) = ev.nu_lambda_table().dense(trunc_x)?;
    let walk = CappedLambdaWalk { nu, powers: ev.table().prime_powers(trunc_x)?, cap: trunc_x };
    let k = x_list.len();
    let scale: Vec<f64> = x_list.iter().map(|&x| 1.0 / (x as f64).ln().ln()).collect();
    let (sum, sum_sq) = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, i);
            let mut counts = vec![0u64; k];
            let mut n = 1;
            loop {
                if in_a(n) {
                    for (c, &x) in counts.iter_mut().zip(x_list) {
                        if n <= x {
                            *c += 1;
                        }
                    }
                }
                match walk.step(n, &mut rng) {
                    Some(m) => n = m,
                    None => break,
                }
            }
            counts
        })
        .fold(
            || (vec![0u64; k], vec![0u64; k]),
            |(mut s, mut s2), c| {
                for j in 0..k {
                    s[j] += c[j];
                    s2[j] += c[j] * c[j];
                }
                (s, s2)
            },
        )
        .reduce(
            || (vec![0u64; k], vec![0u64; k]),
            |(mut a, mut a2), (b, b2)| {
                for j in 0..k {
                    a[j] += b[j];
                    a2[j] += b2[j];
                }
                (a, a2)
            },
        );
    let nf = trials as f64;
    let mut mean = Vec::with_capacity(k);
    let mut second = Vec::with_capacity(k);
    let mut stderr = Vec::with_capacity(k);
    for j in 0..k {
        let m = sum[j] as f64 / nf * scale[j];
        let m2 = sum_sq[j] as f64 / nf * scale[j] * scale[j];
        let var = (m2 - m * m).max(0.0) * nf / (nf - 1.0);
        mean.push(m);
        second.push(m2);
        stderr.push((var / nf).sqrt());
    }
    Ok(DensityStats { x_list: x_list.to_vec(), mean, second_moment: second, stderr, trials })
}
