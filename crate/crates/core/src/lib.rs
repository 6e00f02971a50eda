pub mod cli;
pub mod critical;
pub mod energies;
pub mod error;
pub mod poisson;
pub mod problem;
pub mod manifolds;
pub mod radial;
pub mod roots;
pub mod solver;
pub mod sum;

pub use error::{Error, Result};
pub use problem::{Family, Manifold, Potential, ProblemSpec};
pub use radial::{RadialField, RadialGrid};
