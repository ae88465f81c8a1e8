//! Weil representations of finite quadratic modules, twisted Shintani lifts
//! via cycle integrals, an explicit Rankin-Selberg L-function, and norms of
//! hauptmodul differences at CM points.

pub mod bqf;
pub mod cmvalues;
pub mod error;
pub mod fqm;
pub mod lfunc;
pub mod numtheory;
pub mod qexp;
pub mod shintani;

pub use error::{Error, Result};
pub mod mp;
pub mod special;
pub mod verify;
