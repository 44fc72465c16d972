//! Numerical toolkit for similarity solutions of the thin-film equation
//! u_t = −∇·(|u|ⁿ∇Δu) near n = 0.

pub mod branching;
pub mod error;
pub mod grid;
pub mod kernel;
pub mod multi_index;
pub mod ode;
pub mod polynomial;
pub mod profiles;
pub mod quad;
pub mod semigroup;
pub mod spectral;

pub use error::{Error, Result};
pub use grid::Grid;
pub use kernel::{KernelTable, SymbolQuadrature};
pub use multi_index::MultiIndex;
pub use quad::QuadConfig;
