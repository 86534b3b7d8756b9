//! Monte Carlo samplers: downward and upward chain paths, the zeta process,
//! the multiplicative simple random walk, and density statistics of the
//! upward von Mangoldt chain.
//!
//! Trial `i` under seed `s` always draws from ChaCha8 stream `(s, i)`, so
//! estimates are bit-for-bit independent of thread count and scheduling.

mod density;
mod msrw;
mod paths;
mod zeta;

pub use density::{chain_density_stats, DensityStats};
pub use msrw::{msrw_transitions, msrw_exponent, MsrwLaw};
pub use paths::{estimate_hit, hit_counts, sample_down, sample_up, ChainPath, HitEstimate};
pub use zeta::{zeta_process_hitting, ZetaHitEstimate, ZetaProcessConfig, ZetaSampler};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The random stream for trial `index` under `seed`.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform on `(0, 1]`.
pub(crate) fn open_unit(rng: &mut impl Rng) -> f64 {
    1.0 - rng.random::<f64>()
}

/// Binomial standard error of a frequency.
pub(crate) fn binomial_stderr(hits: u64, trials: u64) -> f64 {
    let p = hits as f64 / trials as f64;
    (p * (1.0 - p) / trials as f64).sqrt()
}
