use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rayon::prelude::*;

use super::{binomial_stderr, stream};
use crate::arith::FactorTable;
use crate::chains::{for_each_child, ChainContext, ChainId, Target};
use crate::error::{domain, Result};
use crate::weights::WeightId;

/// A sampled path. Downward paths end at the first absorbing state; upward
/// paths end when the chain jumps past the cap or to ∞ (`escaped`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainPath {
    pub states: Vec<u64>,
    pub escaped: bool,
    pub seed: u64,
}

/// Frequency of paths visiting a target set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HitEstimate {
    pub hits: u64,
    pub trials: u64,
    pub p_hat: f64,
    pub stderr: f64,
}

/// Walks down from `n0`, calling `visit` on every state (absorbing state
/// included once) until it returns false or an absorbing state is reached.
fn walk_down(
    c: &ChainId,
    n0: u64,
    rng: &mut impl Rng,
    t: &FactorTable,
    mut visit: impl FnMut(u64) -> bool,
) -> Result<()> {
    let mut n = n0;
    let mut children: Vec<(u64, f64)> = Vec::new();
    loop {
        if !visit(n) {
            return Ok(());
        }
        children.clear();
        for_each_child(c, n, t, |m, p| children.push((m, p)))?;
        if children.len() == 1 && children[0].0 == n {
            return Ok(());
        }
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut next = children[children.len() - 1].0;
        for &(m, p) in &children {
            acc += p;
            if u < acc {
                next = m;
                break;
            }
        }
        n = next;
    }
}

/// One downward path from `n0` on stream `(seed, 0)`.
pub fn sample_down(c: &ChainId, n0: u64, seed: u64, t: &FactorTable) -> Result<ChainPath> {
    c.validate()?;
    let mut rng = stream(seed, 0);
    let mut states = Vec::new();
    walk_down(c, n0, &mut rng, t, |n| {
        states.push(n);
        true
    })?;
    Ok(ChainPath { states, escaped: false, seed })
}

/// Fraction of `trials` downward paths from `n0` that visit `target`.
pub fn estimate_hit(
    c: &ChainId,
    n0: u64,
    target: &BTreeSet<u64>,
    trials: u64,
    seed: u64,
    t: &FactorTable,
) -> Result<HitEstimate> {
    c.validate()?;
    if trials == 0 {
        return domain("trials must be positive");
    }
    if !c.in_state_space(n0, t)? {
        return domain(format!("{n0} is outside the {} state space", c.name()));
    }
    // targets that can ever be reached: divisors of n0
    let live: Vec<u64> = target.iter().copied().filter(|&d| d >= 1 && n0 % d == 0).collect();
    let hits: u64 = if live.is_empty() {
        0
    } else {
        (0..trials)
            .into_par_iter()
            .map(|i| -> Result<u64> {
                let mut rng = stream(seed, i);
                let mut hit = false;
                walk_down(c, n0, &mut rng, t, |n| {
                    hit = live.contains(&n);
                    !hit && live.iter().any(|&d| n % d == 0)
                })?;
                Ok(u64::from(hit))
            })
            .try_reduce(|| 0, |a, b| Ok(a + b))?
    };
    Ok(HitEstimate { hits, trials, p_hat: hits as f64 / trials as f64, stderr: binomial_stderr(hits, trials) })
}

/// Visit counts of every state over `trials` downward paths from `n0`
/// (each path visits a state at most once).
pub fn hit_counts(c: &ChainId, n0: u64, trials: u64, seed: u64, t: &FactorTable) -> Result<BTreeMap<u64, u64>> {
    c.validate()?;
    let merged = (0..trials)
        .into_par_iter()
        .map(|i| -> Result<BTreeMap<u64, u64>> {
            let mut rng = stream(seed, i);
            let mut m = BTreeMap::new();
            walk_down(c, n0, &mut rng, t, |n| {
                *m.entry(n).or_insert(0) += 1;
                true
            })?;
            Ok(m)
        })
        .try_reduce(BTreeMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            Ok(a)
        })?;
    Ok(merged)
}

/// One upward path of the adjoint chain of `(c, w)` from `n0`, stopped when
/// the chain jumps to ∞, beyond `cap`, or past `max_steps`.
pub fn sample_up(
    ctx: &ChainContext<'_>,
    c: &ChainId,
    w: &WeightId,
    n0: u64,
    cap: u64,
    max_steps: usize,
    seed: u64,
) -> Result<ChainPath> {
    let mut rng = stream(seed, 0);
    let mut states = vec![n0];
    let mut n = n0;
    for _ in 0..max_steps {
        if n > ctx.table().limit() {
            break;
        }
        let up = ctx.adjoint(c, w, n)?;
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut next = Target::Infinity;
        for e in &up.entries {
            acc += e.prob;
            if u < acc {
                next = e.target;
                break;
            }
        }
        match next {
            Target::State(m) if m <= cap => {
                states.push(m);
                n = m;
            }
            _ => return Ok(ChainPath { states, escaped: true, seed }),
        }
    }
    Ok(ChainPath { states, escaped: false, seed })
}
