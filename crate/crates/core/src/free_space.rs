//! Closed-form couplings mediated by the free-space field.
//!
//! All values are in natural units (`mu0/4pi = hbar = c = 1`), so the
//! classical coupling of two moments is simply `angular_factor / r^3`.

use crate::error::{Error, Result};
use crate::model::{
    angular_factor_unchecked, DipoleVector, PairGeometry, TransitionSpec, UnitSystem,
};
use crate::scalar::Real;
use crate::vector::Vec3;

/// Truncation record attached to numerically summed or integrated couplings.
#[derive(Debug, Clone, PartialEq)]
pub struct Convergence<T> {
    /// Terms, shells or regulator steps actually used.
    pub terms: usize,
    /// Estimated absolute error of `xi`.
    pub residual: T,
    /// Raw sequence the estimate was extracted from.
    pub sequence: Vec<T>,
}

/// A coupling strength and its unit-free reduced form.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingResult<T> {
    pub xi: T,
    /// `xi * 4 pi r^3 / (mu0 |m1| |m2|)`.
    pub reduced: T,
    /// `None` for closed forms.
    pub meta: Option<Convergence<T>>,
}

impl<T: Real> CouplingResult<T> {
    pub(crate) fn exact(xi: T, r: T, m1: &DipoleVector<T>, m2: &DipoleVector<T>) -> Self {
        Self {
            xi,
            reduced: UnitSystem::Natural.reduce(xi, r, m1.magnitude(), m2.magnitude()),
            meta: None,
        }
    }

    pub(crate) fn with_meta(
        xi: T,
        r: T,
        m1: &DipoleVector<T>,
        m2: &DipoleVector<T>,
        meta: Convergence<T>,
    ) -> Self {
        Self {
            meta: Some(meta),
            ..Self::exact(xi, r, m1, m2)
        }
    }
}

/// One sample of the coupling spectral density `J12(omega)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPoint<T> {
    pub omega: T,
    pub value: T,
}

/// Static dipole-dipole energy `(mu0/4pi) [m1.m2 - 3 (m1.e)(m2.e)] / r^3`.
pub fn classical_coupling<T: Real>(
    m1: &DipoleVector<T>,
    m2: &DipoleVector<T>,
    geom: &PairGeometry<T>,
) -> CouplingResult<T> {
    let r = geom.distance();
    let xi = angular_factor_unchecked(m1.moment(), m2.moment(), geom.direction()) / (r * r * r);
    CouplingResult::exact(xi, r, m1, m2)
}

/// Permanent-dipole coupling obtained from the zero-frequency mode integral.
///
/// The contour evaluation reproduces the static form exactly, so this is the
/// same arithmetic as [`classical_coupling`].
pub fn xi_permanent<T: Real>(
    m1: &DipoleVector<T>,
    m2: &DipoleVector<T>,
    geom: &PairGeometry<T>,
) -> Result<CouplingResult<T>> {
    if !(m1.kind().is_permanent() && m2.kind().is_permanent()) {
        return Err(Error::WrongKind {
            what: "xi_permanent",
            expected: "permanent",
        });
    }
    Ok(classical_coupling(m1, m2, geom))
}

/// Resonant transition-dipole exchange coupling.
///
/// With `x = Omega r / c`:
///
/// ```text
/// xi_T = (1/r^3) { -[m1.m2 - (m1.e)(m2.e)] x^2 cos x
///                  + [m1.m2 - 3 (m1.e)(m2.e)] (cos x + x sin x) }
/// ```
///
/// which tends to the static form as `x -> 0`.
pub fn xi_transition<T: Real>(
    m1: &DipoleVector<T>,
    m2: &DipoleVector<T>,
    geom: &PairGeometry<T>,
    ts: &TransitionSpec<T>,
) -> Result<CouplingResult<T>> {
    if m1.kind() != crate::DipoleKind::Transition || m2.kind() != crate::DipoleKind::Transition {
        return Err(Error::WrongKind {
            what: "xi_transition",
            expected: "transition",
        });
    }
    let r = geom.distance();
    let x = ts.retardation(r);
    let xi = transition_bracket(m1.moment(), m2.moment(), geom.direction(), x) / (r * r * r);
    Ok(CouplingResult::exact(xi, r, m1, m2))
}

/// Dimensionless `xi_T r^3` for moment vectors and retardation `x`.
pub(crate) fn transition_bracket<T: Real>(m1: Vec3<T>, m2: Vec3<T>, e: Vec3<T>, x: T) -> T {
    let transverse = m1.cross(e).dot(m2.cross(e));
    let static_part = angular_factor_unchecked(m1, m2, e);
    let (s, c) = x.sin_cos();
    -transverse * x * x * c + static_part * (c + x * s)
}

/// Coupling spectral density for frequency `omega` (natural units, `k = omega`).
///
/// ```text
/// J12 = (mu0 hbar k^3 / 2pi) { m1.m2 j0(kr)
///        - (m1 x e).(m2 x e) [sin/(kr)^3 - cos/(kr)^2]
///        - (m1.e)(m2.e) [sin/kr + 2 cos/(kr)^2 - 2 sin/(kr)^3] }
/// ```
///
/// The braces are even in `k` and the prefactor odd, so `J12(-w) = -J12(w)`
/// holds bit for bit.
pub fn spectral_density<T: Real>(
    omega: T,
    m1: &DipoleVector<T>,
    m2: &DipoleVector<T>,
    geom: &PairGeometry<T>,
) -> SpectralPoint<T> {
    let r = geom.distance();
    let k = omega.abs();
    let braces = spectral_braces(m1.moment(), m2.moment(), geom.direction(), k * r);
    // mu0 hbar / 2 pi = 2 in natural units
    let magnitude = T::lit(2.0) * k * k * k * braces;
    let value = if omega < T::zero() {
        -magnitude
    } else {
        magnitude
    };
    SpectralPoint { omega, value }
}

/// The dimensionless braces of [`spectral_density`] at `x = kr >= 0`.
pub(crate) fn spectral_braces<T: Real>(m1: Vec3<T>, m2: Vec3<T>, e: Vec3<T>, x: T) -> T {
    let a = m1.dot(m2);
    let transverse = m1.cross(e).dot(m2.cross(e));
    let longitudinal = m1.dot(e) * m2.dot(e);
    let (j0, f1) = radial_pair(x);
    // sin/x + 2cos/x^2 - 2sin/x^3 == j0 - 2 f1
    a * j0 - transverse * f1 - longitudinal * (j0 - T::lit(2.0) * f1)
}

/// `(sin x / x, (sin x - x cos x) / x^3)`, series below `x = 0.5`.
///
/// The second entry is `j1(x)/x`; its direct form cancels catastrophically
/// for small `x`.
pub(crate) fn radial_pair<T: Real>(x: T) -> (T, T) {
    let x = x.abs();
    if x < T::lit(0.5) {
        let x2 = x * x;
        // j0 = sum (-1)^n x^2n / (2n+1)!
        // f1 = sum (-1)^n 2(n+1) x^2n / (2n+3)!
        let mut j0 = T::zero();
        let mut f1 = T::zero();
        let mut pow = T::one();
        let mut fact = T::one(); // (2n+1)!
        for n in 0..12usize {
            let nn = T::from_usize_lossy(n);
            let fact3 = fact * (T::lit(2.0) * nn + T::lit(2.0)) * (T::lit(2.0) * nn + T::lit(3.0));
            let sign = if n % 2 == 0 { T::one() } else { -T::one() };
            j0 = j0 + sign * pow / fact;
            f1 = f1 + sign * T::lit(2.0) * (nn + T::one()) * pow / fact3;
            pow = pow * x2;
            fact = fact3;
        }
        (j0, f1)
    } else {
        let (s, c) = x.sin_cos();
        (s / x, (s - x * c) / (x * x * x))
    }
}
