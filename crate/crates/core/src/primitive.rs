//! Primitive sets (antichains of `(ℕ, |)`): validation, generation,
//! restriction to prime sets, and layer decomposition.

use std::collections::{BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::FactorTable;
use crate::error::{domain, Error, Result};

/// Largest `max(A)` for which primitivity is checked with a marking sieve.
const SIEVE_CHECK_LIMIT: u64 = 50_000_000;

/// A sorted set of integers ≥ 2, with a flag recording whether primitivity
/// has been checked.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimitiveSet {
    elements: Vec<u64>,
    certified: bool,
}

impl PrimitiveSet {
    /// Validates and certifies `elements` (duplicates are merged).
    pub fn new(elements: impl IntoIterator<Item = u64>) -> Result<Self> {
        let mut v: Vec<u64> = elements.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        if !is_primitive(&v)? {
            return domain("set is not primitive");
        }
        Ok(Self { elements: v, certified: true })
    }

    /// Wraps sorted, deduplicated elements without checking primitivity.
    pub fn uncertified(mut elements: Vec<u64>) -> Result<Self> {
        elements.sort_unstable();
        elements.dedup();
        if elements.first().is_some_and(|&a| a < 2) {
            return domain("primitive sets contain integers >= 2 only");
        }
        Ok(Self { elements, certified: false })
    }

    pub fn certified(&self) -> bool {
        self.certified
    }

    /// Checks primitivity if not yet done.
    pub fn certify(mut self) -> Result<Self> {
        if !self.certified {
            if !is_primitive(&self.elements)? {
                return domain("set is not primitive");
            }
            self.certified = true;
        }
        Ok(self)
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, n: u64) -> bool {
        self.elements.binary_search(&n).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.elements.iter().copied()
    }

    pub fn max(&self) -> Option<u64> {
        self.elements.last().copied()
    }

    /// Members whose prime factors all lie in `q`.
    pub fn restrict_q(&self, q: &BTreeSet<u64>, t: &FactorTable) -> Result<Self> {
        let mut out = Vec::new();
        for &a in &self.elements {
            if t.factorize(a)?.iter().all(|(p, _)| q.contains(p)) {
                out.push(a);
            }
        }
        Ok(Self { elements: out, certified: self.certified })
    }
}

/// True iff no element divides another distinct element.
pub fn is_primitive(a: &[u64]) -> Result<bool> {
    let mut v = a.to_vec();
    v.sort_unstable();
    v.dedup();
    if v.first().is_some_and(|&x| x < 2) {
        return domain("primitive sets exclude 0 and 1");
    }
    let Some(&max) = v.last() else { return Ok(true) };
    if max <= SIEVE_CHECK_LIMIT && max <= 64 * v.len() as u64 * v.len() as u64 {
        let mut mark = vec![false; max as usize + 1];
        for &x in &v {
            mark[x as usize] = true;
        }
        for &x in &v {
            let mut m = 2 * x;
            while m <= max {
                if mark[m as usize] {
                    return Ok(false);
                }
                m += x;
            }
        }
        Ok(true)
    } else {
        for (i, &x) in v.iter().enumerate() {
            if v[i + 1..].iter().any(|&y| y % x == 0) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// `{n ≤ X : Ω(n) = k}`, optionally restricted to integers composed of primes in `q`.
pub fn generate_layer(k: u32, x: u64, q: Option<&BTreeSet<u64>>, t: &FactorTable) -> Result<PrimitiveSet> {
    if x > t.limit() {
        return domain(format!("X = {x} exceeds sieve limit {}", t.limit()));
    }
    if k == 0 {
        // N_0 = {1}, which is excluded from primitive sets
        return Ok(PrimitiveSet { elements: Vec::new(), certified: true });
    }
    let mut out = Vec::new();
    for n in 2..=x {
        let f = t.factorize_unchecked(n);
        let omega: u32 = f.iter().map(|&(_, e)| e).sum();
        if omega == k && q.is_none_or(|q| f.iter().all(|(p, _)| q.contains(p))) {
            out.push(n);
        }
    }
    Ok(PrimitiveSet { elements: out, certified: true })
}

fn divisors_trial(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// Greedy random antichain in `[2, X]`: visit a seeded shuffle, keep each
/// candidate with probability `density`, and admit it when it is comparable
/// to nothing admitted so far.
pub fn random_antichain(x: u64, density: f64, seed: u64) -> Result<PrimitiveSet> {
    if x < 4 {
        return domain(format!("random_antichain needs X >= 4, got {x}"));
    }
    if !(density > 0.0 && density <= 1.0) {
        return domain(format!("density must lie in (0, 1], got {density}"));
    }
    if x > SIEVE_CHECK_LIMIT {
        return Err(Error::Resource(format!("X = {x} is too large for antichain generation")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<u64> = (2..=x).collect();
    order.shuffle(&mut rng);
    // below[n]: n is a multiple of an admitted element; above[n]: n divides one
    let mut below = vec![false; x as usize + 1];
    let mut above = vec![false; x as usize + 1];
    let mut out = Vec::new();
    for n in order {
        if density < 1.0 && !rng.random_bool(density) {
            continue;
        }
        if below[n as usize] || above[n as usize] {
            continue;
        }
        out.push(n);
        let mut m = n;
        while m <= x {
            below[m as usize] = true;
            m += n;
        }
        for d in divisors_trial(n) {
            above[d as usize] = true;
        }
    }
    out.sort_unstable();
    Ok(PrimitiveSet { elements: out, certified: true })
}

/// Splits `a` into layers of successive minimal elements. Element `a` lands
/// in layer `i` where `i` is the length of the longest chain in `A` ending at `a`.
pub fn peel_layers(a: &[u64]) -> Result<Vec<PrimitiveSet>> {
    let mut v = a.to_vec();
    v.sort_unstable();
    v.dedup();
    if v.first().is_some_and(|&x| x < 2) {
        return domain("peel_layers needs elements >= 2");
    }
    let mut depth: HashMap<u64, usize> = HashMap::with_capacity(v.len());
    let mut layers: Vec<Vec<u64>> = Vec::new();
    for &x in &v {
        let d = divisors_trial(x)
            .into_iter()
            .filter(|&d| d != x)
            .filter_map(|d| depth.get(&d).copied())
            .max()
            .unwrap_or(0);
        depth.insert(x, d + 1);
        if layers.len() <= d {
            layers.push(Vec::new());
        }
        layers[d].push(x);
    }
    Ok(layers.into_iter().map(|elements| PrimitiveSet { elements, certified: true }).collect())
}

/// Parses newline-delimited decimal integers; blank lines and `#` comments are skipped.
pub fn parse_set(text: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let s = line.split('#').next().unwrap_or("").trim();
        if s.is_empty() {
            continue;
        }
        let n = s.parse::<u64>().map_err(|e| Error::Parse(format!("line {}: {s:?}: {e}", i + 1)))?;
        out.push(n);
    }
    Ok(out)
}
