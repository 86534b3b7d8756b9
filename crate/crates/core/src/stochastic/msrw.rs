use crate::arith::FactorTable;
use crate::chains::{Target, Transition, TransitionList};
use crate::error::{domain, Result};

/// Multiplier law of the multiplicative simple random walk.
#[derive(Debug, Clone, PartialEq)]
pub struct MsrwLaw {
    /// Entries `(p^j, p^{−js}/Z)` for `p ≤ x`, source 1.
    pub law: TransitionList,
    /// `Z = Σ_{p ≤ x} Σ_{j ≥ 1} p^{−js} = Σ_{p ≤ x} 1/(p^s − 1)`.
    pub z: f64,
    /// `Σ_{p ≤ x} Σ_{j ≥ 2} p^{−js} = Σ_{p ≤ x} 1/(p^s (p^s − 1))`.
    pub higher_powers: f64,
    /// Mass of the omitted high powers (relative to `Z`).
    pub truncated_mass: f64,
}

/// The exponent `s = 1 − 1/(10 log x)`.
pub fn msrw_exponent(x: u64) -> f64 {
    1.0 - 1.0 / (10.0 * (x as f64).ln())
}

/// Weights `w(p^j) = p^{−js}/Z` over primes `p ≤ x`, dropping powers whose
/// weight is below `1e-18` or which overflow `u64`.
pub fn msrw_transitions(x: u64, s: f64, t: &FactorTable) -> Result<MsrwLaw> {
    if x < 3 || x > t.limit() {
        return domain(format!("msrw needs 3 <= x <= {}", t.limit()));
    }
    if !(s > 0.0) || !s.is_finite() {
        return domain(format!("msrw needs s > 0, got {s}"));
    }
    let primes: Vec<u64> = t.primes().iter().copied().take_while(|&p| p <= x).collect();
    let mut z = 0.0;
    let mut higher = 0.0;
    for &p in &primes {
        let ps = (p as f64).powf(s);
        z += 1.0 / (ps - 1.0);
        higher += 1.0 / (ps * (ps - 1.0));
    }
    let mut entries = Vec::new();
    let mut listed = 0.0;
    for &p in &primes {
        let r = (p as f64).powf(-s);
        let mut w = r;
        let mut q = p;
        loop {
            let prob = w / z;
            if prob < 1e-18 {
                break;
            }
            entries.push(Transition { target: Target::State(q), prob });
            listed += prob;
            match q.checked_mul(p) {
                Some(next) => q = next,
                None => break,
            }
            w *= r;
        }
    }
    entries.sort_by(|a, b| a.target.cmp(&b.target));
    Ok(MsrwLaw {
        law: TransitionList { source: 1, entries, truncated: true },
        z,
        higher_powers: higher,
        truncated_mass: (1.0 - listed).max(0.0),
    })
}
