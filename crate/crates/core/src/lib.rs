//! Impact-point selection for scalar-on-function linear regression.
//!
//! Trajectories `X_i` observed on a grid are reduced to their values at a
//! few selected times. Points are chosen by greedily maximizing
//! `Q̂(T) = ĉ_Tᵀ Σ̂_T⁻¹ ĉ_T`, where `Σ̂_T` is the sample covariance of the
//! trajectory values at `T` and `ĉ_T` their sample covariance with the
//! response. The number of points is read off the elbow of the `Q̂max(p)`
//! series, and the final predictor is the least-squares fit on the chosen
//! points.
//!
//! | Module | Purpose |
//! |--------|---------|
//! | [`data`] | grids, datasets, CSV I/O, train/test split |
//! | [`processes`] | benchmark processes and regression models |
//! | [`estimators`] | sample and population moments |
//! | [`selector`] | `Q0`, its recursive gain, greedy and exhaustive search |
//! | [`order`] | estimating the number of points |
//! | [`regressor`] | fitting, prediction, relative error |
//! | [`metrics`] | Hausdorff distance and selection scores |
//! | [`bench`] | replicated experiments, selection reports, tables |
//!
//! ```
//! use impact_select::data::Grid;
//! use impact_select::estimators::PopulationMoments;
//! use impact_select::processes::{cov_kernel, ProcessSpec};
//! use impact_select::selector::{greedy_select, SelectionConstraints};
//!
//! let grid = Grid::equispaced(100).unwrap();
//! let moments = PopulationMoments::sparse_model(
//!     grid.times(),
//!     |s, t| cov_kernel(&ProcessSpec::Bm, s, t),
//!     &[0.2, 0.4, 0.9],
//!     &[2.0, -5.0, 1.0],
//! )
//! .unwrap();
//! let cons = SelectionConstraints::for_grid(&grid).with_max_p(3);
//! let path = greedy_select(&moments, &grid, &cons).unwrap();
//! assert!((path.qmax_after[2] - 4.5).abs() < 1e-9);
//! ```

pub mod bench;
pub mod data;
pub mod error;
pub mod estimators;
pub mod linalg;
pub mod metrics;
pub mod order;
pub mod processes;
pub mod regressor;
pub mod selector;

pub use error::{Error, ErrorKind, Result};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic generator used everywhere a seed is accepted.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent sub-seed for stream `stream` of `seed` (splitmix64 finalizer).
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
