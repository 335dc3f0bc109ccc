//! A numerical laboratory for the nonstationary Stokes problem with prescribed
//! divergence on the unit disc.

pub mod boundary;
pub mod counterexample;
pub mod divsolve;
pub mod elliptic;
pub mod error;
pub mod field;
pub mod grid;
pub mod localization;
pub mod manufactured;
pub mod norms;
pub mod ops;
pub mod quadrature;
pub mod stokes;
pub mod trace;

pub use error::{Error, Result};
pub use field::{DiscField, FieldFile, Rank, SpaceTimeField, SpaceTimeFile};
pub use grid::{DiscGrid, RadialGrid, SpaceTimeGrid};
pub use norms::{NormOrder, NormReport};
pub use trace::BoundaryTrace;
