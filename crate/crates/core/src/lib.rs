//! Spectral dynamics of two self-similar groups acting on the binary tree.
//!
//! The infinite dihedral group `D∞ = ⟨a, t⟩` and the lamplighter group
//! `⟨a, b⟩` both admit operator recursions on the level-`n` Koopman
//! representations. A Schur-complement step turns the determinant of a
//! level-`n+1` pencil into the determinant of a level-`n` pencil evaluated at
//! a quadratic map of the coefficients, which gives the maps studied here:
//!
//! * [`dihedral`]: the map `F`, its semi-conjugacy `τ` to `T(z) = 2z² − 1`,
//!   closed-form iterates and the spectrum / Julia-set classifier.
//! * [`lamplighter`]: the maps `F` and `Q`, the `G_n` recurrence, the
//!   components of the extended indeterminacy set and the hyperplane `L`.
//! * [`selfsim`]: wreath-recursion parsing and dense level matrices, used as
//!   the independent check of both determinant recursions.
//! * [`cheb`]: Chebyshev iterates and polynomials with overflow-free values.
//! * [`projgeom`]: normalized points of `ℙ³` and homogeneous quadratic maps.
//!
//! [`render`] and [`verify`] hold the pixel-grid classification and the
//! property suites driven by the command-line tool.

pub mod cheb;
pub mod dihedral;
pub mod error;
pub mod lamplighter;
pub mod projgeom;
pub mod render;
pub mod rng;
pub mod scaled;
pub mod selfsim;
pub mod tol;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use projgeom::{HomogMap, MapImage, PencilPoint, ProjPoint};
pub use scaled::ScaledValue;
pub use tol::Tolerances;
