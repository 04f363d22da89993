//! Fixtures shared by the benchmarks.

use gridgame_core::resilience::build_payoff_matrix;
use gridgame_core::scenario::catalog_default;
use gridgame_core::{AhpWeights, NetworkState, PayoffMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Nominal matrix of the bundled feeder and catalog.
pub fn bundled_matrix() -> PayoffMatrix {
    build_payoff_matrix(&NetworkState::ieee33(), &catalog_default(), &AhpWeights::default())
        .expect("bundled inputs build")
}

/// Seeded `m × n` matrix with entries in `[0, 1)`.
pub fn random_matrix(seed: u64, m: usize, n: usize) -> PayoffMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..m).map(|_| (0..n).map(|_| rng.random::<f64>()).collect()).collect();
    PayoffMatrix::from_rows(rows).expect("rectangular")
}
