use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::free_space::spectral_density;
use crate::model::{DipoleVector, PairGeometry};
use crate::quadrature::rules::{uniform_edges, GaussLegendre};
use crate::quadrature::QuadratureSpec;
use crate::scalar::Real;

/// One sample of the retarded memory kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelPoint<T> {
    /// Delay (natural units, length / c).
    pub s: T,
    pub value: T,
}

const PANEL_NODES: usize = 16;
/// Fraction of `[0, omega_cut]` covered by the cos^2 roll-off.
const TAPER: f64 = 0.1;

/// `K(s) = -(1/(pi hbar)) Int_0^{omega_cut} J12(omega) sin(omega s) w(omega) domega`.
///
/// `w` is one up to `0.9 omega_cut` and rolls off as `cos^2` to zero at the
/// cutoff. The transform is evaluated at `|s|` and the sign applied
/// afterwards, so `K(-s) = -K(s)` and `K(0) = 0` hold exactly.
pub fn retarded_kernel<T: Real>(
    m1: &DipoleVector<T>,
    m2: &DipoleVector<T>,
    geom: &PairGeometry<T>,
    s_grid: &[T],
    spec: &QuadratureSpec<T>,
) -> Result<Vec<KernelPoint<T>>> {
    let wc = spec.omega_cut;
    if !(wc > T::zero() && wc.is_finite()) {
        return Err(Error::NonPositive {
            field: "omega_cut",
            value: wc.as_f64(),
        });
    }
    if s_grid.iter().any(|s| !s.is_finite()) {
        return Err(Error::invalid("s_grid", "entries must be finite"));
    }
    if s_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid("s_grid", "must be sorted ascending"));
    }
    let s_max = s_grid.iter().fold(T::zero(), |acc, s| acc.max(s.abs()));
    // at most one radian of phase per panel
    let width = T::one() / (s_max + geom.distance());
    let knee = wc * T::lit(1.0 - TAPER);
    let rule = GaussLegendre::<T>::new(PANEL_NODES);
    let mut nodes: Vec<(T, T)> = Vec::new();
    for (lo, hi) in [(T::zero(), knee), (knee, wc)] {
        for w in uniform_edges(lo, hi, width).windows(2) {
            for (omega, wt) in rule.on(w[0], w[1]) {
                let j = spectral_density(omega, m1, m2, geom).value;
                nodes.push((omega, wt * j * taper(omega, knee, wc)));
            }
        }
    }
    let pref = -T::one() / T::PI();
    Ok(s_grid
        .par_iter()
        .map(|&s| {
            let a = s.abs();
            let mut acc = T::zero();
            for &(omega, wj) in &nodes {
                acc = acc + wj * (omega * a).sin();
            }
            let v = pref * acc;
            let value = if a == T::zero() {
                T::zero()
            } else if s < T::zero() {
                -v
            } else {
                v
            };
            KernelPoint { s, value }
        })
        .collect())
}

fn taper<T: Real>(omega: T, knee: T, wc: T) -> T {
    if omega <= knee {
        return T::one();
    }
    let c = (T::FRAC_PI_2() * (omega - knee) / (wc - knee)).cos();
    c * c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector::Vec3;

    #[test]
    fn kernel_is_odd_and_vanishes_at_zero() {
        let m = DipoleVector::transition(Vec3::new(1.0, 0.0, 0.0)).unwrap();
        let g = PairGeometry::from_separation(Vec3::new(0.0, 0.0, 1.0)).unwrap();
        let grid: Vec<f64> = (-20..=20).map(|i| i as f64 * 0.1).collect();
        let k = retarded_kernel(&m, &m, &g, &grid, &QuadratureSpec::default()).unwrap();
        assert_eq!(k[20].value.to_bits(), 0.0f64.to_bits());
        for i in 0..20 {
            assert_eq!(k[i].value, -k[40 - i].value);
        }
    }

    #[test]
    fn rejects_nonpositive_cutoff_and_unsorted_grid() {
        let m = DipoleVector::transition(Vec3::new(1.0, 0.0, 0.0)).unwrap();
        let g = PairGeometry::from_separation(Vec3::new(0.0, 0.0, 1.0)).unwrap();
        let spec = QuadratureSpec {
            omega_cut: -1.0,
            ..QuadratureSpec::default()
        };
        assert!(retarded_kernel(&m, &m, &g, &[0.0], &spec).is_err());
        assert!(retarded_kernel(&m, &m, &g, &[1.0, 0.0], &QuadratureSpec::default()).is_err());
    }
}
