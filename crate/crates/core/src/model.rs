//! Dipoles, pair geometry, unit handling and the two angular contractions.
//!
//! Every coupling in the crate factors into a geometric contraction of the
//! two moments times a power of the separation. The contractions live here:
//!
//! * [`angular_factor`]: `m1.m2 - 3 (m1.e)(m2.e)`, the static dipole tensor.
//! * [`transverse_factor`]: `m1.m2 - (m1.e)(m2.e)`, the projection onto the
//!   two transverse polarisations of a plane wave travelling along `e`.

use crate::error::{Error, Result};
use crate::scalar::{unit_tolerance, Real};
use crate::vector::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DipoleKind {
    /// Diagonal element on the excited level.
    PermanentE,
    /// Diagonal element on the ground level.
    PermanentG,
    /// Off-diagonal element, phase chosen so the moment is real.
    Transition,
}

impl DipoleKind {
    pub fn is_permanent(self) -> bool {
        matches!(self, DipoleKind::PermanentE | DipoleKind::PermanentG)
    }
}

/// Real magnetic moment tagged with the matrix element it came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipoleVector<T> {
    m: Vec3<T>,
    kind: DipoleKind,
}

impl<T: Real> DipoleVector<T> {
    pub fn new(m: Vec3<T>, kind: DipoleKind) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::invalid("dipole moment", "components must be finite"));
        }
        Ok(Self { m, kind })
    }

    pub fn permanent(m: Vec3<T>) -> Result<Self> {
        Self::new(m, DipoleKind::PermanentE)
    }

    pub fn transition(m: Vec3<T>) -> Result<Self> {
        Self::new(m, DipoleKind::Transition)
    }

    pub fn moment(&self) -> Vec3<T> {
        self.m
    }

    pub fn kind(&self) -> DipoleKind {
        self.kind
    }

    pub fn magnitude(&self) -> T {
        self.m.norm()
    }

    /// Same moment, different tag.
    pub fn with_kind(self, kind: DipoleKind) -> Self {
        Self { m: self.m, kind }
    }
}

/// Positions of the two dipoles and the derived separation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairGeometry<T> {
    x1: Vec3<T>,
    x2: Vec3<T>,
    r_vec: Vec3<T>,
    r: T,
    e_r: Vec3<T>,
}

impl<T: Real> PairGeometry<T> {
    pub fn new(x1: Vec3<T>, x2: Vec3<T>) -> Result<Self> {
        if !x1.is_finite() || !x2.is_finite() {
            return Err(Error::invalid("position", "components must be finite"));
        }
        let r_vec = x2 - x1;
        let r = r_vec.norm();
        if r == T::zero() {
            return Err(Error::CoincidentDipoles);
        }
        Ok(Self {
            x1,
            x2,
            r_vec,
            r,
            e_r: r_vec / r,
        })
    }

    /// Dipole 1 at the origin, dipole 2 at `r_vec`.
    pub fn from_separation(r_vec: Vec3<T>) -> Result<Self> {
        Self::new(Vec3::zero(), r_vec)
    }

    pub fn x1(&self) -> Vec3<T> {
        self.x1
    }

    pub fn x2(&self) -> Vec3<T> {
        self.x2
    }

    pub fn separation(&self) -> Vec3<T> {
        self.r_vec
    }

    pub fn distance(&self) -> T {
        self.r
    }

    pub fn direction(&self) -> Vec3<T> {
        self.e_r
    }

    /// Relabels the dipoles: `r_vec -> -r_vec`.
    pub fn swapped(&self) -> Self {
        Self {
            x1: self.x2,
            x2: self.x1,
            r_vec: -self.r_vec,
            r: self.r,
            e_r: -self.e_r,
        }
    }

    /// Shifts both dipoles by the same vector.
    pub fn translated(&self, shift: Vec3<T>) -> Result<Self> {
        Self::new(self.x1 + shift, self.x2 + shift)
    }
}

/// Unit convention used at the I/O boundary.
///
/// The library itself always works in natural units where
/// `mu0 / 4pi = hbar = c = 1`; lengths keep whatever unit the caller used and
/// time is measured in length / c. `Si` describes how to map SI inputs onto
/// that convention (lengths in metres, moments in A m^2, angular frequencies
/// in rad/s, energies in joules).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnitSystem {
    #[default]
    Natural,
    Si,
}

pub mod si {
    pub const MU0: f64 = 1.256_637_062_12e-6;
    pub const HBAR: f64 = 1.054_571_817e-34;
    pub const C: f64 = 299_792_458.0;
}

impl UnitSystem {
    pub fn mu0<T: Real>(self) -> T {
        match self {
            UnitSystem::Natural => T::lit(4.0) * T::PI(),
            UnitSystem::Si => T::lit(si::MU0),
        }
    }

    pub fn hbar<T: Real>(self) -> T {
        match self {
            UnitSystem::Natural => T::one(),
            UnitSystem::Si => T::lit(si::HBAR),
        }
    }

    pub fn speed_of_light<T: Real>(self) -> T {
        match self {
            UnitSystem::Natural => T::one(),
            UnitSystem::Si => T::lit(si::C),
        }
    }

    /// `mu0 / 4pi` in this system.
    pub fn coupling_prefactor<T: Real>(self) -> T {
        self.mu0::<T>() / (T::lit(4.0) * T::PI())
    }

    pub fn moment_to_natural<T: Real>(self, m: Vec3<T>) -> Vec3<T> {
        match self {
            UnitSystem::Natural => m,
            UnitSystem::Si => {
                m * T::lit((si::MU0 / (4.0 * std::f64::consts::PI * si::HBAR * si::C)).sqrt())
            }
        }
    }

    pub fn frequency_to_natural<T: Real>(self, omega: T) -> T {
        omega / self.speed_of_light::<T>()
    }

    pub fn time_to_natural<T: Real>(self, t: T) -> T {
        t * self.speed_of_light::<T>()
    }

    pub fn time_from_natural<T: Real>(self, t: T) -> T {
        t / self.speed_of_light::<T>()
    }

    pub fn energy_from_natural<T: Real>(self, e: T) -> T {
        e * self.hbar::<T>() * self.speed_of_light::<T>()
    }

    /// Spectral densities carry energy^2 x time.
    pub fn spectral_from_natural<T: Real>(self, j: T) -> T {
        let hc = self.hbar::<T>() * self.speed_of_light::<T>();
        j * hc * hc / self.speed_of_light::<T>()
    }

    /// Kernel values carry energy / time.
    pub fn rate_from_natural<T: Real>(self, k: T) -> T {
        k * self.hbar::<T>() * self.speed_of_light::<T>() * self.speed_of_light::<T>()
    }

    /// `xi * 4 pi r^3 / (mu0 |m1| |m2|)`, with every quantity in this system.
    pub fn reduce<T: Real>(self, xi: T, r: T, m1: T, m2: T) -> T {
        let scale = m1 * m2 * self.coupling_prefactor::<T>();
        if scale == T::zero() {
            return T::zero();
        }
        xi * r * r * r / scale
    }
}

/// Resonant transition frequency shared by both dipoles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionSpec<T> {
    omega: T,
}

impl<T: Real> TransitionSpec<T> {
    /// `omega` in natural units (radians per unit length, since c = 1).
    pub fn new(omega: T) -> Result<Self> {
        if !omega.is_finite() {
            return Err(Error::invalid("omega", "must be finite"));
        }
        if omega <= T::zero() {
            return Err(Error::NonPositive {
                field: "omega",
                value: omega.as_f64(),
            });
        }
        Ok(Self { omega })
    }

    /// Rejects pairs whose frequencies differ beyond rounding.
    pub fn resonant(omega1: T, omega2: T) -> Result<Self> {
        let tol = T::epsilon() * T::lit(16.0) * omega1.abs().max(omega2.abs());
        if (omega1 - omega2).abs() > tol {
            return Err(Error::Detuned {
                omega1: omega1.as_f64(),
                omega2: omega2.as_f64(),
            });
        }
        Self::new(omega1)
    }

    /// Picks Omega so that `Omega r / c` equals `x_omega` for the given distance.
    pub fn from_retardation(x_omega: T, r: T) -> Result<Self> {
        Self::new(x_omega / r)
    }

    pub fn omega(&self) -> T {
        self.omega
    }

    pub fn wavelength(&self) -> T {
        T::TAU() / self.omega
    }

    /// `x = Omega r / c = 2 pi r / lambda`.
    pub fn retardation(&self, r: T) -> T {
        self.omega * r
    }
}

fn check_unit<T: Real>(field: &'static str, e: Vec3<T>) -> Result<()> {
    let n = e.norm();
    if !n.is_finite() || (n - T::one()).abs() > unit_tolerance::<T>() {
        return Err(Error::NotUnit {
            field,
            norm: n.as_f64(),
        });
    }
    Ok(())
}

/// `m1.m2 - 3 (m1.e_r)(m2.e_r)`.
pub fn angular_factor<T: Real>(m1: Vec3<T>, m2: Vec3<T>, e_r: Vec3<T>) -> Result<T> {
    check_unit("e_r", e_r)?;
    Ok(angular_factor_unchecked(m1, m2, e_r))
}

#[inline]
pub(crate) fn angular_factor_unchecked<T: Real>(m1: Vec3<T>, m2: Vec3<T>, e: Vec3<T>) -> T {
    m1.dot(m2) - T::lit(3.0) * m1.dot(e) * m2.dot(e)
}

/// `m1.m2 - (m1.e_k)(m2.e_k)`, the sum over both transverse polarisations.
pub fn transverse_factor<T: Real>(m1: Vec3<T>, m2: Vec3<T>, e_k: Vec3<T>) -> Result<T> {
    check_unit("e_k", e_k)?;
    Ok(transverse_factor_unchecked(m1, m2, e_k))
}

#[inline]
pub(crate) fn transverse_factor_unchecked<T: Real>(m1: Vec3<T>, m2: Vec3<T>, e: Vec3<T>) -> T {
    m1.dot(m2) - m1.dot(e) * m2.dot(e)
}

/// Two unit vectors completing `e_k` to a right-handed orthonormal frame.
///
/// Gram-Schmidt against the Cartesian axis least aligned with `e_k`.
pub fn polarization_pair<T: Real>(e_k: Vec3<T>) -> Result<[Vec3<T>; 2]> {
    check_unit("e_k", e_k)?;
    let (ax, ay, az) = (e_k.x.abs(), e_k.y.abs(), e_k.z.abs());
    let seed = if ax <= ay && ax <= az {
        Vec3::unit_x()
    } else if ay <= az {
        Vec3::unit_y()
    } else {
        Vec3::unit_z()
    };
    let e1 = (seed - e_k * seed.dot(e_k))
        .normalized()
        .expect("seed axis is never parallel to e_k");
    let e2 = e_k.cross(e1);
    Ok([e1, e2])
}
