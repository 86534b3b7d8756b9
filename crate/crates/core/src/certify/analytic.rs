use std::fmt::{self, Write as _};
use std::str::FromStr;

use super::hexfloat::{from_hex, to_hex};
use super::interval::Interval;
use crate::arith::{for_each_prime_up_to, FactorTable};
use crate::error::{domain, Error, Result};

/// Rosser–Schoenfeld: θ(x) < 1.01624 x for x > 0.
const THETA_UPPER: f64 = 1.01624;

pub const DEFAULT_C_CUTOFF: u64 = 1_000_000;
pub const DEFAULT_MAX_DEPTH: u32 = 40;
pub const ANALYTIC_ID: &str = "analytic";

/// Encloses `C = Σ_{p > 7} log p / ((p − 1)(p − 2))` using the primes of `t`
/// up to `p_cut`.
pub fn enclose_constant_c(p_cut: u64, t: &FactorTable) -> Result<Interval> {
    if p_cut < 11 {
        return domain(format!("C enclosure needs P_cut >= 11, got {p_cut}"));
    }
    if p_cut > t.limit() {
        return domain(format!("P_cut = {p_cut} exceeds sieve limit {}", t.limit()));
    }
    let primes = t.primes().iter().copied().take_while(|&p| p <= p_cut);
    Ok(constant_c_from(primes, p_cut))
}

/// As [`enclose_constant_c`], sieving the primes on the fly.
pub fn enclose_constant_c_sieved(p_cut: u64) -> Result<Interval> {
    if p_cut < 11 {
        return domain(format!("C enclosure needs P_cut >= 11, got {p_cut}"));
    }
    let mut primes = Vec::new();
    for_each_prime_up_to(p_cut, |p| primes.push(p))?;
    Ok(constant_c_from(primes, p_cut))
}

/// Partial sum over `7 < p ≤ P` plus the tail `∫_P^∞ f dθ`, `f(t) = 1/((t−1)(t−2))`.
/// Integrating by parts, the tail is `−θ(P) f(P) + ∫_P^∞ θ(t) (−f′(t)) dt`, and
/// `∫_P^∞ t (−f′) = P f(P) + ∫_P^∞ f` with `∫_P^∞ f = log((P−1)/(P−2))`. The
/// bounds `t (1 − 1/log P) < θ(t) < 1.01624 t` for `t ≥ P ≥ 41` close it.
fn constant_c_from(primes: impl IntoIterator<Item = u64>, p_cut: u64) -> Interval {
    let mut sum = Interval::point(0.0);
    let mut theta = Interval::point(0.0);
    for p in primes {
        let lp = Interval::point(p as f64).ln().expect("p >= 2");
        theta = theta + lp;
        if p > 7 {
            let den = Interval::point((p - 1) as f64) * Interval::point((p - 2) as f64);
            sum = sum + (lp / den).expect("den > 0");
        }
    }
    let big_p = Interval::point(p_cut as f64);
    let pm1 = Interval::point((p_cut - 1) as f64);
    let pm2 = Interval::point((p_cut - 2) as f64);
    let f_p = (Interval::point(1.0) / (pm1 * pm2)).expect("P > 2");
    let int_f = (pm1 / pm2).expect("P > 2").ln().expect("ratio > 1");
    let moment = big_p * f_p + int_f;
    let boundary = theta * f_p;
    let upper = Interval::point(THETA_UPPER) * moment - boundary;
    let lower = if p_cut >= 41 {
        let c = Interval::point(1.0) - big_p.ln().expect("P > 1").recip().expect("log P > 0");
        c * moment - boundary
    } else {
        Interval::point(0.0)
    };
    let tail_lo = lower.lo.max(0.0);
    Interval { lo: (sum + Interval::point(tail_lo)).lo, hi: (sum + Interval::point(upper.hi)).hi }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Proved,
    Failed,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Proved => "proved",
            Verdict::Failed => "failed",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Verdict {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "proved" => Ok(Verdict::Proved),
            "failed" => Ok(Verdict::Failed),
            "inconclusive" => Ok(Verdict::Inconclusive),
            _ => Err(Error::Parse(format!("unknown verdict {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Leaf {
    pub range: Interval,
    pub lhs: Interval,
    pub rhs: Interval,
    pub verdict: Verdict,
}

/// Record of a bisection proof of `lhs(u) < rhs_scale · rhs(u)` on `range`.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub inequality_id: String,
    pub range: Interval,
    /// Upper end of the enclosure of `C` used on the left-hand side.
    pub c_upper: f64,
    pub rhs_scale: f64,
    pub max_depth: u32,
    pub leaves: Vec<Leaf>,
    pub verdict: Verdict,
}

/// The two sides of
/// `Σ_{p ∈ {3,5,7}} log p (2p^u − 1)/((p − 2) p^u (p^{1+u} − 1)) + C ≤ (½·2^{3u/4} + 2^{u/2}) log 2/(2^{1+u} − 1)`
/// over an interval of `u ≥ 0`.
fn analytic_sides(u: Interval, c_upper: f64, rhs_scale: f64) -> Result<(Interval, Interval)> {
    let one = Interval::point(1.0);
    let two = Interval::point(2.0);
    let mut lhs = Interval::point(c_upper);
    for p in [3.0, 5.0, 7.0] {
        let pp = Interval::point(p);
        let pu = u.pow_base(p)?;
        let num = pp.ln()? * (two * pu - one);
        let den = Interval::point(p - 2.0) * pu * (pp * pu - one);
        lhs = lhs + (num / den)?;
    }
    let half = Interval::point(0.5);
    let a = (u * Interval::point(0.75)).pow_base(2.0)?;
    let b = (u * half).pow_base(2.0)?;
    let den = two * u.pow_base(2.0)? - one;
    let rhs = ((half * a + b) * two.ln()? / den)? * Interval::point(rhs_scale);
    Ok((lhs, rhs))
}

fn leaf_at(range: Interval, c_upper: f64, rhs_scale: f64) -> Result<Leaf> {
    let (lhs, rhs) = analytic_sides(range, c_upper, rhs_scale)?;
    Ok(Leaf { range, lhs, rhs, verdict: judge(range, lhs, rhs, c_upper, rhs_scale)? })
}

/// Proved when the enclosures separate; failed when a point inside the leaf
/// provably violates the inequality; otherwise inconclusive.
fn judge(range: Interval, lhs: Interval, rhs: Interval, c_upper: f64, rhs_scale: f64) -> Result<Verdict> {
    if lhs.hi < rhs.lo {
        return Ok(Verdict::Proved);
    }
    let (l, r) = analytic_sides(Interval::point(range.mid()), c_upper, rhs_scale)?;
    if l.lo > r.hi {
        return Ok(Verdict::Failed);
    }
    Ok(Verdict::Inconclusive)
}

fn bisect(range: Interval, depth: u32, max_depth: u32, c_upper: f64, rhs_scale: f64) -> Result<Vec<Leaf>> {
    let leaf = leaf_at(range, c_upper, rhs_scale)?;
    let split = leaf.verdict == Verdict::Inconclusive && depth < max_depth && range.lo < range.mid();
    if !split {
        return Ok(vec![leaf]);
    }
    let (a, b) = range.split();
    let (left, right) = rayon::join(
        || bisect(a, depth + 1, max_depth, c_upper, rhs_scale),
        || bisect(b, depth + 1, max_depth, c_upper, rhs_scale),
    );
    let mut leaves = left?;
    leaves.extend(right?);
    Ok(leaves)
}

fn overall(leaves: &[Leaf]) -> Verdict {
    if leaves.iter().any(|l| l.verdict == Verdict::Failed) {
        Verdict::Failed
    } else if leaves.iter().any(|l| l.verdict == Verdict::Inconclusive) {
        Verdict::Inconclusive
    } else {
        Verdict::Proved
    }
}

/// Upper end of an enclosure of `1/log 3`.
fn inv_log3_upper() -> f64 {
    Interval::point(3.0).ln().and_then(Interval::recip).expect("log 3 > 0").hi
}

/// Certifies the analytic inequality on `[0, 1/log 3]` by bisection to at
/// most `max_depth` levels (the whole range is level 1), with `C ≤ c.hi`.
pub fn certify_analytic(max_depth: u32, c: &Interval) -> Result<Certificate> {
    certify_analytic_scaled(max_depth, c, 1.0)
}

/// As [`certify_analytic`] with the right-hand side multiplied by `rhs_scale`.
pub fn certify_analytic_scaled(max_depth: u32, c: &Interval, rhs_scale: f64) -> Result<Certificate> {
    if !(1..=60).contains(&max_depth) {
        return domain(format!("max_depth must lie in [1, 60], got {max_depth}"));
    }
    if !(rhs_scale > 0.0) || !rhs_scale.is_finite() {
        return domain(format!("rhs_scale must be positive, got {rhs_scale}"));
    }
    let range = Interval { lo: 0.0, hi: inv_log3_upper() };
    let leaves = bisect(range, 1, max_depth, c.hi, rhs_scale)?;
    let verdict = overall(&leaves);
    Ok(Certificate {
        inequality_id: ANALYTIC_ID.into(),
        range,
        c_upper: c.hi,
        rhs_scale,
        max_depth,
        leaves,
        verdict,
    })
}

/// Outcome of re-evaluating a stored certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct Replay {
    pub verdict: Verdict,
    /// Leaves whose recomputed enclosures or verdicts differ from the record.
    pub mismatches: Vec<usize>,
    /// Leaves tile `range` without gaps or overlaps.
    pub covers: bool,
}

impl Replay {
    pub fn ok(&self) -> bool {
        self.mismatches.is_empty() && self.covers
    }
}

impl Certificate {
    pub fn replay(&self) -> Result<Replay> {
        if self.inequality_id != ANALYTIC_ID {
            return domain(format!("unknown inequality {:?}", self.inequality_id));
        }
        let mut mismatches = Vec::new();
        for (i, leaf) in self.leaves.iter().enumerate() {
            let again = leaf_at(leaf.range, self.c_upper, self.rhs_scale)?;
            if again != *leaf {
                mismatches.push(i);
            }
        }
        let covers = !self.leaves.is_empty()
            && self.leaves[0].range.lo == self.range.lo
            && self.leaves[self.leaves.len() - 1].range.hi == self.range.hi
            && self.leaves.windows(2).all(|w| w[0].range.hi == w[1].range.lo);
        Ok(Replay { verdict: overall(&self.leaves), mismatches, covers })
    }

    /// Depth-first record, one line per leaf, endpoints as hexfloats.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let h = to_hex;
        let _ = writeln!(s, "certificate {}", self.inequality_id);
        let _ = writeln!(s, "range {} {}", h(self.range.lo), h(self.range.hi));
        let _ = writeln!(s, "c_upper {}", h(self.c_upper));
        let _ = writeln!(s, "rhs_scale {}", h(self.rhs_scale));
        let _ = writeln!(s, "max_depth {}", self.max_depth);
        let _ = writeln!(s, "verdict {}", self.verdict);
        let _ = writeln!(s, "leaves {}", self.leaves.len());
        for l in &self.leaves {
            let _ = writeln!(
                s,
                "leaf {} {} {} {} {} {} {}",
                h(l.range.lo),
                h(l.range.hi),
                h(l.lhs.lo),
                h(l.lhs.hi),
                h(l.rhs.lo),
                h(l.rhs.hi),
                l.verdict
            );
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let mut field = |key: &str| -> Result<Vec<String>> {
            let line = lines.next().ok_or_else(|| Error::Parse(format!("missing {key} line")))?;
            let mut parts = line.split_whitespace();
            if parts.next() != Some(key) {
                return Err(Error::Parse(format!("expected {key:?}, got {line:?}")));
            }
            Ok(parts.map(str::to_owned).collect())
        };
        let one = |v: Vec<String>, key: &str| -> Result<String> {
            match <[String; 1]>::try_from(v) {
                Ok([x]) => Ok(x),
                Err(_) => Err(Error::Parse(format!("{key} takes one value"))),
            }
        };
        let parse_int = |s: &str| s.parse::<u64>().map_err(|_| Error::Parse(format!("bad integer {s:?}")));
        let inequality_id = one(field("certificate")?, "certificate")?;
        let r = field("range")?;
        if r.len() != 2 {
            return Err(Error::Parse("range takes two values".into()));
        }
        let range = Interval::new(from_hex(&r[0])?, from_hex(&r[1])?)?;
        let c_upper = from_hex(&one(field("c_upper")?, "c_upper")?)?;
        let rhs_scale = from_hex(&one(field("rhs_scale")?, "rhs_scale")?)?;
        let max_depth = parse_int(&one(field("max_depth")?, "max_depth")?)? as u32;
        let verdict: Verdict = one(field("verdict")?, "verdict")?.parse()?;
        let count = parse_int(&one(field("leaves")?, "leaves")?)? as usize;
        let mut leaves = Vec::with_capacity(count);
        for _ in 0..count {
            let v = field("leaf")?;
            if v.len() != 7 {
                return Err(Error::Parse("leaf takes seven values".into()));
            }
            let x: Vec<f64> = v[..6].iter().map(|s| from_hex(s)).collect::<Result<_>>()?;
            leaves.push(Leaf {
                range: Interval::new(x[0], x[1])?,
                lhs: Interval::new(x[2], x[3])?,
                rhs: Interval::new(x[4], x[5])?,
                verdict: v[6].parse()?,
            });
        }
        if lines.next().is_some() {
            return Err(Error::Parse("trailing data after leaves".into()));
        }
        Ok(Certificate { inequality_id, range, c_upper, rhs_scale, max_depth, leaves, verdict })
    }
}

/// Floating-point sides of the analytic inequality at a single `u`, for plotting.
pub fn analytic_point(u: f64, c_upper: f64) -> (f64, f64) {
    let mut lhs = c_upper;
    for p in [3.0f64, 5.0, 7.0] {
        let pu = p.powf(u);
        lhs += p.ln() * (2.0 * pu - 1.0) / ((p - 2.0) * pu * (p * pu - 1.0));
    }
    let rhs = (0.5 * 2f64.powf(0.75 * u) + 2f64.powf(0.5 * u)) * std::f64::consts::LN_2 / (2f64.powf(1.0 + u) - 1.0);
    (lhs, rhs)
}
