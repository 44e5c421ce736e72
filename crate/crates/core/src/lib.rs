//! Classical simulation of quantum property testers for distributions and
//! density operators under purified query access.

pub mod ampest;
pub mod baselines;
pub mod encodings;
pub mod error;
pub mod linalg;
pub mod oracles;
pub mod parallel;
pub mod polyapprox;
pub mod quantum;
pub mod svt;
pub mod testers;

pub use error::{Error, Result};
