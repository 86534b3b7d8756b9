use std::f64::consts::LN_2;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::analytic::{analytic_point, enclose_constant_c};
use crate::arith::FactorTable;
use crate::error::{domain, Error, Result};
use crate::kernels::{eta, neg_zeta_log_deriv, KernelConfig, TruncatedLambda};

/// Differences `lhs − rhs` above this count as violations.
pub const GRID_TOL: f64 = 1e-9;

/// Truncation point for infinite sums over primes and prime powers.
pub const GRID_TRUNCATION: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GridId {
    /// `−ζ′/ζ(1+u) ≤ log 2/(2^u − 1) ≤ 1/u`.
    PhiIneq,
    /// η increasing, concave and log-concave.
    EtaMonotone,
    /// `log m Σ_q Λ(q)/(q log²(mq)) ≤ Σ_j x/(x+j)² ≤ x/(x+½) ≤ 1` at `m = 2^x`.
    Sharp,
    /// `Σ_q Λ(q)/(q log(mq) log(2mq)) ≤ 1/log(2m)` at `m = 2^x`.
    Sharp2,
    /// `u Σ_{p ≥ 3} log p/((p − 2) p^u) ≤ 1`.
    Om2,
    /// The two sides of the analytic inequality on `(0, 1/log 3]`.
    Analytic,
}

impl GridId {
    pub const ALL: [GridId; 6] =
        [GridId::PhiIneq, GridId::EtaMonotone, GridId::Sharp, GridId::Sharp2, GridId::Om2, GridId::Analytic];

    pub fn name(&self) -> &'static str {
        match self {
            GridId::PhiIneq => "phi_ineq",
            GridId::EtaMonotone => "eta_monotone",
            GridId::Sharp => "sharp",
            GridId::Sharp2 => "sharp2",
            GridId::Om2 => "om2",
            GridId::Analytic => "analytic",
        }
    }

    /// Figure names used by the command line.
    pub fn from_figure(name: &str) -> Result<GridId> {
        Ok(match name {
            "phi" => GridId::PhiIneq,
            "eta" => GridId::EtaMonotone,
            "mangoldt" => GridId::Sharp,
            "mangoldt2" => GridId::Sharp2,
            "primesum2" => GridId::Om2,
            "primesum3" => GridId::Analytic,
            _ => return domain(format!("unknown figure {name:?}")),
        })
    }

    /// The plotted range of each figure.
    pub fn default_grid(&self) -> GridSpec {
        let (lo, hi, points) = match self {
            GridId::PhiIneq => (1e-3, 5.0, 2000),
            GridId::EtaMonotone => (0.01, 10.0, 2000),
            GridId::Sharp | GridId::Sharp2 => (0.01, 4.99, 500),
            GridId::Om2 => (1e-3, 5.0, 2000),
            GridId::Analytic => (1e-3, 0.91, 1000),
        };
        GridSpec { lo, hi, points }
    }

    fn domain_ok(&self, g: &GridSpec) -> bool {
        match self {
            GridId::PhiIneq | GridId::EtaMonotone | GridId::Sharp | GridId::Sharp2 | GridId::Om2 => g.lo > 0.0,
            GridId::Analytic => g.lo > 0.0 && g.hi <= 1.0 / 3f64.ln(),
        }
    }
}

impl fmt::Display for GridId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GridId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        GridId::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| Error::Domain(format!("unknown inequality id {s:?}")))
    }
}

/// `points` equally spaced values from `lo` to `hi` inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.lo];
        }
        let step = (self.hi - self.lo) / (self.points - 1) as f64;
        (0..self.points).map(|i| if i + 1 == self.points { self.hi } else { self.lo + step * i as f64 }).collect()
    }
}

/// Parses `lo:hi:points`.
impl FromStr for GridSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("grid must be lo:hi:points, got {s:?}"));
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, n] = parts[..] else { return Err(bad()) };
        let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
        let points: usize = n.trim().parse().map_err(|_| bad())?;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) || points == 0 || (points == 1 && lo != hi) {
            return Err(Error::Domain(format!("degenerate grid {s:?}")));
        }
        Ok(GridSpec { lo, hi, points })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridReport {
    pub id: GridId,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
    /// Largest `lhs − rhs` over every inequality and grid point (≤ 0 when all hold).
    pub max_violation: f64,
    /// Number of comparisons with `lhs − rhs > GRID_TOL`.
    pub violations: usize,
}

/// One grid row plus the `lhs − rhs` gaps it checks.
type Row = (Vec<f64>, Vec<f64>);

/// Evaluates the inequality `id` in floating point at each grid point. Infinite
/// sums are truncated at `min(10⁶, t.limit())` and their tail upper bounds are
/// added to the left-hand side.
pub fn grid_check(id: GridId, grid: &GridSpec, t: &FactorTable, kernels: &KernelConfig) -> Result<GridReport> {
    kernels.validate()?;
    if !id.domain_ok(grid) {
        return domain(format!("grid [{}, {}] outside the domain of {id}", grid.lo, grid.hi));
    }
    let xs = grid.values();
    let (columns, rows): (Vec<&'static str>, Vec<Row>) = match id {
        GridId::PhiIneq => (
            vec!["u", "bound_2u", "bound_1u", "neg_zeta_ratio", "gap_2u", "gap_1u"],
            map_points(&xs, |u| {
                let nz = neg_zeta_log_deriv(1.0 + u, kernels)?;
                let b2 = LN_2 / (u.exp2() - 1.0);
                let b1 = 1.0 / u;
                Ok((vec![u, b2, b1, nz, b2 - nz, b1 - b2], vec![nz - b2, b2 - b1]))
            })?,
        ),
        GridId::EtaMonotone => eta_rows(&xs, kernels)?,
        GridId::Sharp => {
            let lam = truncation(t)?;
            (
                vec!["x", "lhs_upper", "series", "rational", "one"],
                map_points(&xs, |x| {
                    let m = x.exp2();
                    let lhs = m.ln() * (lam.shifted_partial(m, m) + lam.shifted_tail_upper(m, m));
                    let (s_lo, s_hi) = harmonic_square_series(x);
                    let rat = x / (x + 0.5);
                    Ok((vec![x, lhs, 0.5 * (s_lo + s_hi), rat, 1.0], vec![lhs - s_lo, s_hi - rat, rat - 1.0]))
                })?,
            )
        }
        GridId::Sharp2 => {
            let lam = truncation(t)?;
            (
                vec!["x", "lhs_upper", "rhs"],
                map_points(&xs, |x| {
                    let m = x.exp2();
                    let lhs = lam.shifted_partial(m, 2.0 * m) + lam.shifted_tail_upper(m, 2.0 * m);
                    let rhs = 1.0 / (2.0 * m).ln();
                    Ok((vec![x, lhs, rhs], vec![lhs - rhs]))
                })?,
            )
        }
        GridId::Om2 => {
            let q = GRID_TRUNCATION.min(t.limit());
            let sums = PrimeSums::new(q, t)?;
            (
                vec!["u", "lhs_upper", "rhs"],
                map_points(&xs, |u| {
                    let lhs = u * sums.om2_upper(u, kernels)?;
                    Ok((vec![u, lhs, 1.0], vec![lhs - 1.0]))
                })?,
            )
        }
        GridId::Analytic => {
            let c = enclose_constant_c(GRID_TRUNCATION.min(t.limit()), t)?;
            (
                vec!["u", "lhs", "rhs"],
                map_points(&xs, |u| {
                    let (l, r) = analytic_point(u, c.hi);
                    Ok((vec![u, l, r], vec![l - r]))
                })?,
            )
        }
    };
    let mut max_violation = f64::NEG_INFINITY;
    let mut violations = 0;
    let mut out = Vec::with_capacity(rows.len());
    for (row, gaps) in rows {
        for g in gaps {
            if g.is_nan() {
                return Err(Error::Internal(format!("{id}: NaN at grid row {row:?}")));
            }
            max_violation = max_violation.max(g);
            if g > GRID_TOL {
                violations += 1;
            }
        }
        out.push(row);
    }
    Ok(GridReport { id, columns, rows: out, max_violation, violations })
}

fn map_points(xs: &[f64], f: impl Fn(f64) -> Result<Row> + Sync) -> Result<Vec<Row>> {
    xs.par_iter().map(|&x| f(x)).collect()
}

fn truncation(t: &FactorTable) -> Result<TruncatedLambda> {
    if t.limit() < 1000 {
        return domain("grid checks need a sieve of at least 1000");
    }
    TruncatedLambda::new(GRID_TRUNCATION.min(t.limit()), t)
}

/// Bracket for `Σ_{j ≥ 1} x/(x + j)²`: direct sum to `J` plus the integral
/// bounds `x/(x + J + 1) < tail < x/(x + J)`.
fn harmonic_square_series(x: f64) -> (f64, f64) {
    const J: u32 = 100_000;
    let mut s = 0.0;
    for j in (1..=J).rev() {
        let d = x + j as f64;
        s += x / (d * d);
    }
    let jf = J as f64;
    (s + x / (x + jf + 1.0), s + x / (x + jf))
}

/// η values with first differences and second differences of η and log η.
/// Violations are decreases and positive second differences.
fn eta_rows(xs: &[f64], kernels: &KernelConfig) -> Result<(Vec<&'static str>, Vec<Row>)> {
    let vals: Vec<f64> = xs.par_iter().map(|&s| eta(s, kernels)).collect::<Result<_>>()?;
    let n = vals.len();
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let d1 = if i + 1 < n { vals[i + 1] - vals[i] } else { f64::NAN };
        let (d2, dl2) = if i > 0 && i + 1 < n {
            let (a, b, c) = (vals[i - 1], vals[i], vals[i + 1]);
            // spacing may be uneven only at the last point; rescale to a common step
            let h0 = xs[i] - xs[i - 1];
            let h1 = xs[i + 1] - xs[i];
            let second = |fa: f64, fb: f64, fc: f64| (fc - fb) * h0 / h1 - (fb - fa);
            (second(a, b, c), second(a.ln(), b.ln(), c.ln()))
        } else {
            (f64::NAN, f64::NAN)
        };
        let mut gaps = Vec::new();
        if !d1.is_nan() {
            gaps.push(-d1);
        }
        if !d2.is_nan() {
            gaps.push(d2);
            gaps.push(dl2);
        }
        rows.push((vec![xs[i], vals[i], d1, d2, dl2], gaps));
    }
    Ok((vec!["s", "eta", "diff1", "diff2", "diff2_log"], rows))
}

/// Prime sums feeding the upper bound for `Σ_{p ≥ 3} log p/((p − 2) p^u)`.
struct PrimeSums {
    big_p: f64,
    /// `(log p, p)` for `p ≤ P`.
    primes: Vec<(f64, f64)>,
}

impl PrimeSums {
    fn new(q: u64, t: &FactorTable) -> Result<Self> {
        if q < 1000 {
            return domain("grid checks need a sieve of at least 1000");
        }
        let primes = t.primes().iter().take_while(|&&p| p <= q).map(|&p| ((p as f64).ln(), p as f64)).collect();
        Ok(Self { big_p: q as f64, primes })
    }

    /// With `s = 1 + u` and `1/((p − 2) p^u) = p^{−s} + 2/((p − 2) p^s)`:
    ///
    /// `Σ_{p ≥ 3} log p p^{−s} ≤ −ζ′/ζ(s) − log 2 · 2^{−s} − Σ_{p ≤ P} Σ_{k ≥ 2} log p p^{−ks}`
    /// and `Σ_{p > P} 2 log p/((p − 2) p^s) ≤ 2 P/(P − 2) Σ_{n > P} log n/n² ≤ 2 P/(P − 2) (log P + 1)/P`.
    fn om2_upper(&self, u: f64, kernels: &KernelConfig) -> Result<f64> {
        let s = 1.0 + u;
        let mut powers = 0.0;
        let mut shifted = 0.0;
        for &(lp, p) in self.primes.iter().rev() {
            let ps = (-s * lp).exp();
            // Σ_{k ≥ 2} p^{−ks} = p^{−2s}/(1 − p^{−s})
            powers += lp * ps * ps / (1.0 - ps);
            if p > 2.0 {
                shifted += 2.0 * lp * ps / (p - 2.0);
            }
        }
        let big_p = self.big_p;
        let tail = 2.0 * big_p / (big_p - 2.0) * (big_p.ln() + 1.0) / big_p;
        let primes_part = neg_zeta_log_deriv(s, kernels)? - LN_2 * (-s * LN_2).exp() - powers;
        Ok(primes_part + shifted + tail)
    }
}

impl GridReport {
    pub fn ok(&self) -> bool {
        self.violations == 0
    }
}
