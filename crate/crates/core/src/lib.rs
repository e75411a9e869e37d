//! Exact computational algebra for coherent sheaves on the projective line
//! and for module sheaves on the two-point scheme of a local PID.
//!
//! The layers, from the bottom up:
//!
//! * [`exactlinear`] — exact scalar and polynomial-matrix arithmetic over the
//!   rationals and prime fields, Smith normal form, linear solving, and
//!   univariate factorization.
//! * [`fpmod`] — finitely presented modules over the chart coordinate rings,
//!   with decomposition, Hom, tensor, base change and splitting tests.
//! * [`sheafp1`] — coherent sheaves as glued chart modules, their morphisms,
//!   short exact sequences and Krull–Schmidt decomposition.
//! * [`homalg`] — Čech cohomology on the two-chart cover, global Hom, Ext¹
//!   and Euler characteristics.
//! * [`purity`] — categorical and geometric purity testers for short exact
//!   sequences plus a seeded extension sampler.
//! * [`kronecker`] — the tilting functor into Kronecker-quiver representations
//!   and the full decomposition of finite-dimensional representations.
//! * [`ziegler`] — the symbolic point catalog and closure operator of the
//!   Ziegler spectrum of quasicoherent sheaves on the line.
//! * [`twopoint`] — the symbolic engine for module sheaves on the two-point
//!   scheme, reproducing the seven-row spectrum table.
//! * [`descr`] — the text grammar for sheaves and spectrum descriptions shared
//!   with the command-line front end.

pub mod descr;
pub mod error;
pub mod exactlinear;
pub mod fpmod;
pub mod homalg;
pub mod kronecker;
pub mod purity;
pub mod samples;
pub mod sheafp1;
pub mod twopoint;
pub mod ziegler;

pub use error::Error;
