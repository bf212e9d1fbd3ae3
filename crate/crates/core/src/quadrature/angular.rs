use crate::error::{Error, Result};
use crate::model::{transverse_factor_unchecked, DipoleVector, PairGeometry};
use crate::quadrature::rules::GaussLegendre;
use crate::quadrature::QuadratureSpec;
use crate::scalar::Real;
use crate::vector::Vec3;

/// A quadrature value with its self-assessed absolute accuracy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureEstimate<T> {
    pub value: T,
    pub error: T,
}

/// Smallest node count accepted in each angle for a given `kr`.
pub fn required_angular_nodes(kr: f64) -> usize {
    8 + (4.0 * kr).ceil() as usize
}

/// `J12(omega)` from the raw solid-angle integral
///
/// ```text
/// J12 = (mu0 hbar omega^3 / (2 (2 pi)^2 c^3)) Int dOmega_k cos(k.r) [m1.m2 - (m1.e_k)(m2.e_k)]
/// ```
///
/// with the polar axis along the lab `z` axis, independent of the pair
/// direction. The error estimate compares against a rule with three quarters
/// of the nodes in each angle, plus a rounding floor.
pub fn j12_angular_quadrature<T: Real>(
    omega: T,
    m1: &DipoleVector<T>,
    m2: &DipoleVector<T>,
    geom: &PairGeometry<T>,
    spec: &QuadratureSpec<T>,
) -> Result<QuadratureEstimate<T>> {
    if !(omega > T::zero() && omega.is_finite()) {
        return Err(Error::NonPositive {
            field: "omega",
            value: omega.as_f64(),
        });
    }
    spec.validate()?;
    let kr = (omega * geom.distance()).as_f64();
    let required = required_angular_nodes(kr);
    if spec.n_theta < required || spec.n_phi < required {
        return Err(Error::UnderResolved {
            kr,
            required,
            n_theta: spec.n_theta,
            n_phi: spec.n_phi,
        });
    }
    let (a, b) = (m1.moment(), m2.moment());
    let k_vec = geom.separation() * omega;
    let fine = solid_angle_integral(a, b, k_vec, spec.n_theta, spec.n_phi);
    let coarse_t = (3 * spec.n_theta).div_ceil(4).max(8);
    let coarse_p = (3 * spec.n_phi).div_ceil(4).max(8);
    let coarse = solid_angle_integral(a, b, k_vec, coarse_t, coarse_p);

    // mu0 hbar / (2 (2 pi)^2) = 1 / (2 pi) in natural units
    let pref = omega * omega * omega / T::TAU();
    let nodes = T::from_usize_lossy(spec.n_theta * spec.n_phi);
    let floor = nodes * T::epsilon() * T::lit(4.0) * T::PI() * m1.magnitude() * m2.magnitude();
    Ok(QuadratureEstimate {
        value: pref * fine,
        error: pref * ((fine - coarse).abs() + floor),
    })
}

fn solid_angle_integral<T: Real>(
    m1: Vec3<T>,
    m2: Vec3<T>,
    k_vec: Vec3<T>,
    n_theta: usize,
    n_phi: usize,
) -> T {
    let rule = GaussLegendre::<T>::new(n_theta);
    let dphi = T::TAU() / T::from_usize_lossy(n_phi);
    let mut total = T::zero();
    for (&u, &w) in rule.nodes.iter().zip(&rule.weights) {
        let sin_t = (T::one() - u * u).max(T::zero()).sqrt();
        let mut ring = T::zero();
        for j in 0..n_phi {
            let (sp, cp) = (dphi * T::from_usize_lossy(j)).sin_cos();
            let e_k = Vec3::new(sin_t * cp, sin_t * sp, u);
            ring = ring + e_k.dot(k_vec).cos() * transverse_factor_unchecked(m1, m2, e_k);
        }
        total = total + w * ring * dphi;
    }
    total
}
