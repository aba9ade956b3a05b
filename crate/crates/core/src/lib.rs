//! Numerical verification of the anti-de Sitter volume bound
//! `Vol(M) >= pi^2 |chi|` through constant-mean-curvature slices.
//!
//! Each CMC slice of mean curvature `tau` is a closed surface carrying a
//! metric `g_tau` whose Gauss curvature satisfies `K_tau >= -(1 + tau^2)`.
//! On a slice the crate solves
//!
//! * the lapse equation `1/2 Delta l - (2 tau^2 + K + 2) l + 1 = 0`,
//! * the conformal equation `1/2 Delta log(sigma) = -K - (1 + tau^2) / sigma`
//!   for the factor `g_tau = sigma h_tau` to constant curvature `-(1 + tau^2)`,
//!
//! checks `l <= 1/(1+tau^2)`, `sigma >= 1` and `sigma l >= 1/(1+tau^2)`
//! pointwise, and integrates the slice volume densities over `tau` to
//! compare against `pi^2 |chi|`. The Fuchsian case, where every slice is
//! umbilic, is available in closed form as an oracle.
//!
//! Slices at different `tau` are generated independently from a prescribed
//! traceless density; the volume integral is therefore a slice-wise check of
//! the per-`tau` bound, not the volume of one particular spacetime.
//!
//! Module map:
//!
//! * [`mesh`]: genus-g hyperbolic meshes, cotan Laplacian, angle defects
//! * [`elliptic`]: SPD linear solves and damped Newton for semilinear problems
//! * [`fuchsian`]: closed-form umbilic foliation quantities
//! * [`slicegen`]: CMC slice data from the Gauss equation
//! * [`lapse`]: lapse equation and its maximum principle
//! * [`uniformize`]: conformal factor, Schwarz-Pick and product bounds
//! * [`volume`]: slice densities, quadrature over `tau`, the full check
//! * [`cli`]: the `adsvol` command line front end

pub mod cli;
pub mod elliptic;
pub mod error;
pub mod field;
pub mod fuchsian;
pub mod lapse;
pub mod mesh;
pub mod report;
pub mod slicegen;
pub mod sparse;
pub mod uniformize;
pub mod volume;

pub use error::{Error, Result};
pub use field::{MeshId, ScalarField};
