//! The image-dipole lattice sum.
//!
//! Summed over complete cubic shells the series converges to the periodic
//! coupling up to a uniform background `(2 mu0 / 3V) m1.m2`, the part of the
//! field-mode sum that the cubic ordering drops. The background is added
//! explicitly so the result equals the field-mode sum over `k != 0`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::free_space::{classical_coupling, Convergence, CouplingResult};
use crate::model::{angular_factor_unchecked, DipoleVector, PairGeometry};
use crate::periodic::{
    for_each_in_shell_slab, i64_of, lattice, BoxSpec, LatticeSumReport, SumStatus, COINCIDENCE,
};
use crate::scalar::Real;
use crate::vector::Vec3;

/// Stopping rule of [`xi_permanent_images`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageSumOptions<T> {
    pub shell_max: usize,
    /// Stop once a shell increment is below `tol` times the partial sum
    /// (or times `|m1||m2|/r^3` when the partial sum is smaller).
    pub tol: T,
}

impl<T: Real> Default for ImageSumOptions<T> {
    fn default() -> Self {
        Self {
            shell_max: 200,
            tol: T::lit(1e-6),
        }
    }
}

/// `(2 mu0 / 3V) m1.m2` in natural units.
pub fn background_term<T: Real>(m1: Vec3<T>, m2: Vec3<T>, bx: &BoxSpec<T>) -> T {
    T::lit(8.0) * T::PI() / T::lit(3.0) * m1.dot(m2) / bx.volume()
}

/// Sum of the image terms of shells `0..=n_shells`, shell by shell.
///
/// Entry 0 is the free-space coupling of the reduced geometry; no background.
pub fn image_shell_increments<T: Real>(
    m1: &DipoleVector<T>,
    m2: &DipoleVector<T>,
    geom: &PairGeometry<T>,
    bx: &BoxSpec<T>,
    n_shells: usize,
) -> Result<Vec<T>> {
    let g = bx.reduce(geom)?;
    let mut out = Vec::with_capacity(n_shells + 1);
    out.push(classical_coupling(m1, m2, &g).xi);
    for s in 1..=n_shells {
        out.push(shell_sum(
            m1.moment(),
            m2.moment(),
            g.separation(),
            bx,
            i64_of(s),
        )?);
    }
    Ok(out)
}

/// Images plus background summed to the fixed shell `n_shells`.
pub fn xi_permanent_images_truncated<T: Real>(
    m1: &DipoleVector<T>,
    m2: &DipoleVector<T>,
    geom: &PairGeometry<T>,
    bx: &BoxSpec<T>,
    n_shells: usize,
) -> Result<CouplingResult<T>> {
    let r = bx.reduce(geom)?.distance();
    let incs = image_shell_increments(m1, m2, geom, bx, n_shells)?;
    let xi = incs.iter().copied().sum::<T>() + background_term(m1.moment(), m2.moment(), bx);
    Ok(CouplingResult::exact(xi, r, m1, m2))
}

/// Permanent-dipole coupling in the box from the image lattice.
pub fn xi_permanent_images<T: Real>(
    m1: &DipoleVector<T>,
    m2: &DipoleVector<T>,
    geom: &PairGeometry<T>,
    bx: &BoxSpec<T>,
    opts: &ImageSumOptions<T>,
) -> Result<(CouplingResult<T>, LatticeSumReport<T>)> {
    if !(m1.kind().is_permanent() && m2.kind().is_permanent()) {
        return Err(Error::WrongKind {
            what: "xi_permanent_images",
            expected: "permanent",
        });
    }
    images_converged("xi_permanent_images", m1, m2, geom, bx, opts)
}

pub(crate) fn images_converged<T: Real>(
    what: &'static str,
    m1: &DipoleVector<T>,
    m2: &DipoleVector<T>,
    geom: &PairGeometry<T>,
    bx: &BoxSpec<T>,
    opts: &ImageSumOptions<T>,
) -> Result<(CouplingResult<T>, LatticeSumReport<T>)> {
    if !(opts.tol > T::zero()) {
        return Err(Error::NonPositive {
            field: "tol",
            value: opts.tol.as_f64(),
        });
    }
    let g = bx.reduce(geom)?;
    let r = g.distance();
    let (a, b) = (m1.moment(), m2.moment());
    let scale = m1.magnitude() * m2.magnitude() / (r * r * r);
    let background = background_term(a, b, bx);

    let mut partial = classical_coupling(m1, m2, &g).xi;
    let mut sequence = vec![partial + background];
    for s in 1..=opts.shell_max {
        let inc = shell_sum(a, b, g.separation(), bx, i64_of(s))?;
        partial = partial + inc;
        sequence.push(partial + background);
        let denom = partial.abs().max(scale);
        let delta = inc.abs() / denom;
        if s >= 2 && delta <= opts.tol {
            let xi = partial + background;
            let report = LatticeSumReport {
                value: xi,
                shells_used: s,
                last_shell_delta: delta,
                regulator_sigma: T::zero(),
                modes_used: 0,
                status: SumStatus::Converged,
            };
            // increments fall off like s^-3, so the tail is about s/2 of the last one
            let meta = Convergence {
                terms: s,
                residual: inc.abs() * T::from_usize_lossy(s) * T::lit(0.5),
                sequence,
            };
            return Ok((CouplingResult::with_meta(xi, r, m1, m2, meta), report));
        }
    }
    let last = sequence.len() - 1;
    Err(Error::NotConverged {
        what,
        residual: (sequence[last] - sequence[last - 1]).abs().as_f64(),
        tol: (opts.tol * partial.abs().max(scale)).as_f64(),
        sequence: sequence.iter().map(|v| v.as_f64()).collect(),
    })
}

/// Sum of the image terms with `max |n_i| = s`.
fn shell_sum<T: Real>(m1: Vec3<T>, m2: Vec3<T>, r: Vec3<T>, bx: &BoxSpec<T>, s: i64) -> Result<T> {
    let l = bx.edge();
    let floor = T::lit(COINCIDENCE) * l;
    let slab = |nx: i64| -> Result<T> {
        let mut acc = T::zero();
        let mut err = None;
        for_each_in_shell_slab(s, nx, |n| {
            let d = r - lattice::<T>(n) * l;
            let rho = d.norm();
            if rho < floor {
                err.get_or_insert(Error::ImageCoincidence {
                    n,
                    distance: rho.as_f64(),
                });
                return;
            }
            acc = acc + angular_factor_unchecked(m1, m2, d / rho) / (rho * rho * rho);
        });
        err.map_or(Ok(acc), Err)
    };
    let parts: Result<Vec<T>> = if s >= 8 {
        (-s..=s).into_par_iter().map(slab).collect()
    } else {
        (-s..=s).map(slab).collect()
    };
    Ok(parts?.into_iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dip(x: f64, y: f64, z: f64) -> DipoleVector<f64> {
        DipoleVector::permanent(Vec3::new(x, y, z)).unwrap()
    }

    #[test]
    fn shell_zero_is_free_space_value() {
        let m1 = dip(0.3, 0.2, -0.9);
        let m2 = dip(-0.1, 0.8, 0.4);
        let g = PairGeometry::from_separation(Vec3::new(0.1, 0.25, -0.2)).unwrap();
        let bx = BoxSpec::new(1.0).unwrap();
        let incs = image_shell_increments(&m1, &m2, &g, &bx, 0).unwrap();
        assert_eq!(incs[0], classical_coupling(&m1, &m2, &g).xi);
    }

    #[test]
    fn converged_sum_meets_tolerance() {
        let m = dip(0.6, 0.0, 0.8);
        let g = PairGeometry::from_separation(Vec3::new(0.3, 0.0, 0.1)).unwrap();
        let bx = BoxSpec::new(1.0).unwrap();
        let opts = ImageSumOptions {
            shell_max: 200,
            tol: 1e-5,
        };
        let (res, rep) = xi_permanent_images(&m, &m, &g, &bx, &opts).unwrap();
        assert!(rep.last_shell_delta <= 1e-5);
        assert_eq!(rep.value, res.xi);
        assert_eq!(res.meta.unwrap().sequence.len(), rep.shells_used + 1);
    }

    #[test]
    fn shell_cap_reports_series() {
        let m = dip(0.6, 0.0, 0.8);
        let g = PairGeometry::from_separation(Vec3::new(0.3, 0.0, 0.1)).unwrap();
        let bx = BoxSpec::new(1.0).unwrap();
        let opts = ImageSumOptions {
            shell_max: 3,
            tol: 1e-12,
        };
        match xi_permanent_images(&m, &m, &g, &bx, &opts) {
            Err(Error::NotConverged { sequence, .. }) => assert_eq!(sequence.len(), 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn transition_moments_are_rejected() {
        let m = DipoleVector::transition(Vec3::new(1.0, 0.0, 0.0)).unwrap();
        let g = PairGeometry::from_separation(Vec3::new(0.3, 0.0, 0.1)).unwrap();
        let bx = BoxSpec::new(1.0).unwrap();
        assert!(xi_permanent_images(&m, &m, &g, &bx, &ImageSumOptions::default()).is_err());
    }
}
