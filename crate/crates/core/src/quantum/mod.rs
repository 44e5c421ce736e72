//! Ground-truth layer: distributions, density operators, pure states,
//! entropies, Schatten distances and instance generators.

pub mod distribution;
pub mod generate;
pub mod io;
pub mod state;

pub use distribution::{
    hermitian_schatten_norm, schatten_distance, shannon_entropy, spectrum_entropy, von_neumann_entropy,
    ClassicalDistribution, DensityOperator,
};
pub use generate::{generate, random_density, random_distribution, Distribution, InstanceKind};
pub use io::{distribution_to_json, load_distribution, parse_distribution, DistributionFile};
pub use state::{partial_trace, PureState};
