//! The weight families ν₀, ν_Mertens, ν_Λ and the shifted weights ν_p.
//!
//! ν_Λ(n) = ∫₀^∞ log n · n^{−1−u} / ζ(1+u) du has no closed form. Single
//! values go through adaptive Gauss–Kronrod; bulk evaluation uses
//! [`NuLambdaTable`], which tabulates 1/ζ(1+u) once on a fixed geometric panel
//! set and reuses it for every `n`.

use rayon::prelude::*;

use crate::arith::FactorTable;
use crate::error::{domain, Result};
use crate::kernels::{inv_zeta, Bounded, KernelConfig};
use crate::quadrature::{integrate, TabulatedRule};
use crate::EULER_GAMMA;

/// Default absolute tolerance for ν_Λ.
pub const DEFAULT_QUAD_TOL: f64 = 1e-10;

/// Which weight to evaluate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightId {
    /// ν₀(n) = 1/(n log n), `n ≥ 2`.
    Nu0,
    /// ν_Mertens(n) = (e^γ/n) Π_{p < P(n)} (1 − 1/p).
    NuMertens,
    /// The von Mangoldt weight, evaluated to absolute accuracy `quad_tol`.
    NuLambda { quad_tol: f64 },
    /// ν_p(n) = 1/(n log(p n)) for a prime `p`.
    NuShifted { p: u64 },
}

impl WeightId {
    pub fn nu_lambda() -> Self {
        WeightId::NuLambda { quad_tol: DEFAULT_QUAD_TOL }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            WeightId::NuLambda { quad_tol } if !(quad_tol > 0.0 && quad_tol <= 1e-4) => {
                domain(format!("quad_tol {quad_tol} outside (0, 1e-4]"))
            }
            WeightId::NuShifted { p } if !is_prime_trial(p) => domain(format!("shift {p} is not prime")),
            _ => Ok(()),
        }
    }

    /// Column name used in tabular output.
    pub fn name(&self) -> String {
        match self {
            WeightId::Nu0 => "nu0".into(),
            WeightId::NuMertens => "nu_mertens".into(),
            WeightId::NuLambda { .. } => "nu_lambda".into(),
            WeightId::NuShifted { p } => format!("nu_shifted_{p}"),
        }
    }

    /// Smallest `n` at which the weight is defined.
    pub fn min_n(&self) -> u64 {
        match self {
            WeightId::Nu0 => 2,
            _ => 1,
        }
    }
}

pub(crate) fn is_prime_trial(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub fn nu0(n: u64) -> Result<f64> {
    if n < 2 {
        return domain(format!("nu0 is defined for n >= 2, got {n}"));
    }
    let nf = n as f64;
    Ok(1.0 / (nf * nf.ln()))
}

pub fn nu_shifted(p: u64, n: u64) -> Result<f64> {
    if n < 1 {
        return domain("weights are defined for n >= 1");
    }
    let nf = n as f64;
    Ok(1.0 / (nf * (p as f64 * nf).ln()))
}

/// Evaluates a weight without any precomputed cache.
pub fn evaluate(w: &WeightId, n: u64, t: &FactorTable) -> Result<f64> {
    w.validate()?;
    if n == 0 {
        return domain("weights are defined for n >= 1");
    }
    match *w {
        WeightId::Nu0 => nu0(n),
        WeightId::NuShifted { p } => nu_shifted(p, n),
        WeightId::NuMertens => {
            let big_p = t.largest_prime(n)?;
            let prod: f64 = t.primes().iter().take_while(|&&p| p < big_p).map(|&p| 1.0 - 1.0 / p as f64).product();
            Ok(EULER_GAMMA.exp() / n as f64 * prod)
        }
        WeightId::NuLambda { quad_tol } => {
            if n == 1 {
                Ok(1.0)
            } else {
                Ok(nu_lambda_quadrature(n, quad_tol, &KernelConfig::default())?.value)
            }
        }
    }
}

/// ν_Λ(n) for `n ≥ 2` by adaptive Gauss–Kronrod in `v = u log n`.
///
/// The error bound adds the quadrature estimate, the analytic tail beyond
/// the cutoff `U = max(30, 30/log n)` in `u` (at most `n^{−1−U}` since
/// 1/ζ ≤ 1), and the propagated 1/ζ evaluation error.
pub fn nu_lambda_quadrature(n: u64, tol: f64, cfg: &KernelConfig) -> Result<Bounded> {
    if n < 2 {
        return domain(format!("nu_lambda quadrature needs n >= 2, got {n}"));
    }
    if !(tol > 0.0 && tol <= 1e-4) {
        return domain(format!("tol {tol} outside (0, 1e-4]"));
    }
    let nf = n as f64;
    let l = nf.ln();
    let big_u = (30.0 / l).max(30.0);
    let big_v = big_u * l;
    let tail = (-(1.0 + big_u) * l).exp();
    let kern_err = kernel_error(cfg);
    let budget = (0.5 * tol * nf).min(1e-11);
    let mut failed = None;
    let q = integrate(
        |v| {
            let u = v / l;
            if u <= 0.0 {
                return 0.0;
            }
            match inv_zeta(1.0 + u, cfg) {
                Ok(g) => (-v).exp() * g,
                Err(e) => {
                    failed.get_or_insert(e);
                    f64::NAN
                }
            }
        },
        0.0,
        big_v,
        budget,
        4000,
    );
    if let Some(e) = failed {
        return Err(e);
    }
    let value = q.value / nf;
    let error = q.error / nf + tail + kern_err / nf;
    if error > tol {
        return Err(crate::Error::Resource(format!(
            "nu_lambda({n}) quadrature reached error {error:e} above tolerance {tol:e}"
        )));
    }
    Ok(Bounded { value, error })
}

/// Absolute error of 1/ζ(1+u) as produced by [`inv_zeta`]: the η error
/// `δ` propagates as `δ/η² ≤ δ/log²2`.
fn kernel_error(cfg: &KernelConfig) -> f64 {
    let delta = cfg.target_tol * 1e-3;
    delta / (std::f64::consts::LN_2 * std::f64::consts::LN_2) + 1e-15
}

/// 1/ζ(1+u) tabulated on the Gauss–Kronrod nodes of a fixed geometric panel
/// set covering `[0, 44]`, for fast evaluation of ν_Λ at many `n`.
pub struct NuLambdaTable {
    rule: TabulatedRule,
    kern_err: f64,
}

impl NuLambdaTable {
    const U_MAX: f64 = 44.0;

    pub fn new(cfg: &KernelConfig) -> Result<Self> {
        cfg.validate()?;
        let breaks = TabulatedRule::geometric_breaks(1e-5, 1.2, Self::U_MAX);
        let rule = TabulatedRule::new(&breaks, |u| inv_zeta(1.0 + u, cfg))?;
        Ok(Self { rule, kern_err: kernel_error(cfg) })
    }

    /// ν_Λ(n) with an error bound; exact 1 at `n = 1`.
    pub fn value(&self, n: u64) -> Result<Bounded> {
        if n == 0 {
            return domain("weights are defined for n >= 1");
        }
        if n == 1 {
            return Ok(Bounded { value: 1.0, error: 0.0 });
        }
        let l = (n as f64).ln();
        let part = self.rule.integrate_weighted(|u| (-u * l).exp(), 40.0 / l);
        let inv_n = 1.0 / n as f64;
        let value = l * inv_n * part.value;
        // ∫_{u0}^∞ log n · n^{−1−u} du = n^{−1−u0}
        let tail = (-(1.0 + part.stopped_at) * l).exp();
        let error = l * inv_n * part.error + tail + self.kern_err * inv_n + 4.0 * f64::EPSILON * value;
        Ok(Bounded { value, error })
    }

    /// ν_Λ(1..=limit) in parallel; index 0 holds 0.
    pub fn dense(&self, limit: u64) -> Result<(Vec<f64>, f64)> {
        let vals: Vec<Bounded> = (0..=limit)
            .into_par_iter()
            .map(|n| if n == 0 { Ok(Bounded { value: 0.0, error: 0.0 }) } else { self.value(n) })
            .collect::<Result<_>>()?;
        let max_err = vals.iter().map(|b| b.error).fold(0.0, f64::max);
        Ok((vals.into_iter().map(|b| b.value).collect(), max_err))
    }
}

/// Evaluator with the Mertens prefix products and the ν_Λ table built once.
pub struct WeightEvaluator<'a> {
    table: &'a FactorTable,
    mertens_prefix: Vec<f64>,
    nu_lambda: NuLambdaTable,
    kernels: KernelConfig,
}

impl<'a> WeightEvaluator<'a> {
    pub fn new(table: &'a FactorTable, kernels: KernelConfig) -> Result<Self> {
        let mut mertens_prefix = Vec::with_capacity(table.primes().len() + 1);
        let mut acc = 1.0;
        mertens_prefix.push(acc);
        for &p in table.primes() {
            acc *= 1.0 - 1.0 / p as f64;
            mertens_prefix.push(acc);
        }
        Ok(Self { table, mertens_prefix, nu_lambda: NuLambdaTable::new(&kernels)?, kernels })
    }

    pub fn table(&self) -> &'a FactorTable {
        self.table
    }

    pub fn kernels(&self) -> &KernelConfig {
        &self.kernels
    }

    pub fn nu_lambda_table(&self) -> &NuLambdaTable {
        &self.nu_lambda
    }

    /// Π_{p < P} (1 − 1/p) for a prime (or 1) `big_p ≤ limit`.
    pub fn mertens_product_below(&self, big_p: u64) -> f64 {
        let idx = self.table.primes().partition_point(|&p| p < big_p);
        self.mertens_prefix[idx]
    }

    /// Π_{p ≤ x} (1 − 1/p) for `x ≤ limit`.
    pub fn mertens_product_upto(&self, x: u64) -> f64 {
        self.mertens_prefix[self.table.prime_count(x)]
    }

    pub fn eval(&self, w: &WeightId, n: u64) -> Result<f64> {
        Ok(self.eval_bounded(w, n)?.value)
    }

    /// The weight with an absolute error bound (zero except for ν_Λ).
    pub fn eval_bounded(&self, w: &WeightId, n: u64) -> Result<Bounded> {
        if n == 0 {
            return domain("weights are defined for n >= 1");
        }
        let exact = |value| Ok(Bounded { value, error: 0.0 });
        match *w {
            WeightId::Nu0 => exact(nu0(n)?),
            WeightId::NuShifted { p } => exact(nu_shifted(p, n)?),
            WeightId::NuMertens => {
                let big_p = self.table.largest_prime(n)?;
                exact(EULER_GAMMA.exp() / n as f64 * self.mertens_product_below(big_p))
            }
            WeightId::NuLambda { quad_tol } => {
                let b = self.nu_lambda.value(n)?;
                if b.error <= quad_tol {
                    Ok(b)
                } else {
                    nu_lambda_quadrature(n, quad_tol, &self.kernels)
                }
            }
        }
    }

    /// Weight values on `0..=limit`; entries below [`WeightId::min_n`] are 0.
    pub fn dense(&self, w: &WeightId, limit: u64) -> Result<Vec<f64>> {
        w.validate()?;
        if let WeightId::NuLambda { quad_tol } = *w {
            let (vals, err) = self.nu_lambda.dense(limit)?;
            if err > quad_tol {
                return Err(crate::Error::Resource(format!(
                    "tabulated nu_lambda error {err:e} exceeds quad_tol {quad_tol:e}"
                )));
            }
            return Ok(vals);
        }
        (0..=limit)
            .into_par_iter()
            .map(|n| if n < w.min_n() { Ok(0.0) } else { self.eval(w, n) })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn closed_forms() {
        let t = FactorTable::new(1000).unwrap();
        let ln2 = std::f64::consts::LN_2;
        assert_eq!(evaluate(&WeightId::Nu0, 2, &t).unwrap(), 1.0 / (2.0 * ln2));
        assert!((evaluate(&WeightId::NuMertens, 2, &t).unwrap() - EULER_GAMMA.exp() / 2.0).abs() < 1e-15);
        assert_eq!(evaluate(&WeightId::nu_lambda(), 1, &t).unwrap(), 1.0);
        assert!(evaluate(&WeightId::Nu0, 1, &t).is_err());
        assert!(evaluate(&WeightId::NuMertens, 0, &t).is_err());
        assert!(WeightId::NuShifted { p: 4 }.validate().is_err());
        let m12 = evaluate(&WeightId::NuMertens, 12, &t).unwrap();
        assert!((m12 - EULER_GAMMA.exp() / 12.0 * 0.5).abs() < 1e-15);
    }

    #[test]
    fn evaluator_matches_direct_route() {
        let t = FactorTable::new(5000).unwrap();
        let ev = WeightEvaluator::new(&t, KernelConfig::default()).unwrap();
        for n in [1u64, 2, 3, 12, 97, 1000, 4999] {
            for w in [WeightId::NuMertens, WeightId::NuShifted { p: 3 }, WeightId::nu_lambda()] {
                let a = ev.eval(&w, n).unwrap();
                let b = evaluate(&w, n, &t).unwrap();
                assert!((a - b).abs() <= 2e-10 * a.max(1e-3), "{w:?} {n}: {a} {b}");
            }
        }
    }

    #[test]
    fn nu_lambda_below_nu0_at_two() {
        let cfg = KernelConfig::default();
        let v = nu_lambda_quadrature(2, 1e-10, &cfg).unwrap();
        let r = v.value / nu0(2).unwrap();
        assert!(r > 0.0 && r < 1.0);
        assert!(v.error <= 1e-10);
    }

    #[test]
    fn nu_lambda_asymptotic_ratio() {
        let cfg = KernelConfig::default();
        let fine = KernelConfig { target_tol: 1e-11, euler_maclaurin_terms: 14, series_cutoff: 30 };
        for n in [1_000u64, 10_000, 100_000, 1_000_000] {
            let v = nu_lambda_quadrature(n, 1e-10, &cfg).unwrap().value;
            let oracle = nu_lambda_quadrature(n, 1e-11, &fine).unwrap().value;
            assert!((v - oracle).abs() < 1e-11);
            let l = (n as f64).ln();
            let ratio = v / nu0(n).unwrap();
            assert!((ratio - (1.0 - 2.0 * EULER_GAMMA / l)).abs() <= 5.0 / (l * l), "n={n} ratio={ratio}");
        }
    }

    #[test]
    fn table_agrees_with_adaptive() {
        let cfg = KernelConfig::default();
        let tab = NuLambdaTable::new(&cfg).unwrap();
        for n in [2u64, 3, 4, 6, 12, 100, 1_000, 65_536, 10_000_000, 100_000_000] {
            let a = tab.value(n).unwrap();
            let b = nu_lambda_quadrature(n, 1e-10, &cfg).unwrap();
            assert!(a.error < 5e-12, "n={n} err={}", a.error);
            assert!((a.value - b.value).abs() <= a.error + b.error, "n={n}");
        }
    }

    proptest! {
        #[test]
        fn nu0_decreasing_and_dilation(n in 2u64..1_000_000, d in 1u64..1000) {
            prop_assert!(nu0(n + 1).unwrap() < nu0(n).unwrap());
            prop_assert!(nu0(d * n).unwrap() <= nu0(n).unwrap() / d as f64 * (1.0 + 1e-15));
        }

        #[test]
        fn nu_lambda_between_zero_and_nu0(n in 2u64..10_000_000) {
            let tab = NuLambdaTable::new(&KernelConfig::default()).unwrap();
            let v = tab.value(n).unwrap().value;
            prop_assert!(v > 0.0 && v < nu0(n).unwrap());
        }
    }
}
