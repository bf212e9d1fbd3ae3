//! Field-mediated magnetic dipole-dipole couplings in free space and in a
//! periodic box, with brute-force numerical oracles for every closed form.
//!
//! Internally everything is in natural units, `mu0 / 4pi = hbar = c = 1`.
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the aliases
//! at the crate root fix it to `f64`.
//!
//! ```
//! use dipolekit::{classical_coupling, Dipole, Geometry, Vector3};
//!
//! let m = Dipole::permanent(Vector3::new(0.0, 0.0, 1.0)).unwrap();
//! let g = Geometry::from_separation(Vector3::new(0.0, 0.0, 1.0)).unwrap();
//! assert_eq!(classical_coupling(&m, &m, &g).reduced, -2.0);
//! ```

// `!(x > 0)` style checks are deliberate: they reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod error;
pub mod free_space;
mod model;
pub mod periodic;
pub mod quadrature;
mod scalar;
mod vector;

pub use error::{Error, Result};
pub use free_space::{
    classical_coupling, spectral_density, xi_permanent, xi_transition, Convergence, CouplingResult,
    SpectralPoint,
};
pub use model::{
    angular_factor, polarization_pair, si, transverse_factor, DipoleKind, DipoleVector,
    PairGeometry, TransitionSpec, UnitSystem,
};
pub use periodic::{BoxSpec, LatticeSumReport, SumStatus};
pub use quadrature::{KernelPoint, QuadratureSpec};
pub use scalar::Real;
pub use vector::Vec3;

pub type Vector3 = Vec3<f64>;
pub type Dipole = DipoleVector<f64>;
pub type Geometry = PairGeometry<f64>;
pub type Transition = TransitionSpec<f64>;
pub type Box3 = BoxSpec<f64>;
pub type Coupling = CouplingResult<f64>;
pub type Quadrature = QuadratureSpec<f64>;

pub type Vector3f = Vec3<f32>;
pub type Dipolef = DipoleVector<f32>;
pub type Geometryf = PairGeometry<f32>;
