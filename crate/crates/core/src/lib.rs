//! Numerical toolkit for J-normal projections in finite-dimensional Krein
//! spaces `C^p ⊕ C^q` with fundamental symmetry `J = diag(I_p, −I_q)`.

pub mod acceptance;
pub mod error;
pub mod fixed_range;
pub mod generate;
pub mod io;
pub mod krein;
pub mod linalg;
pub mod orbit;
pub mod projection;
pub mod subspace;
pub mod unitary;

pub use error::{KreinError, Result};
pub use krein::{Classification, KreinFrame};
pub use linalg::{Mat, C64};
pub use projection::NormalProjection;
pub use subspace::{Signature, SignatureProfile, Subspace};
pub use unitary::JUnitary;
