pub mod disorder;
pub mod error;
pub mod estimators;
pub mod gibbs;
pub mod harness;
pub mod lattice;
pub mod model;
pub mod oracle;
pub mod paths;
pub mod quad;
pub mod rng;
pub mod spin;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
