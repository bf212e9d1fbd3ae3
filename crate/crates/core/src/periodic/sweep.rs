//! Orientation sweep of the box-to-free ratio for parallel permanent dipoles.
//!
//! Both moments point along `(cos phi, 0, sin phi)` and the separation is
//! `(r/L) L e_r`. A row is flagged divergent when the free coupling vanishes
//! to the floor or changes sign against a grid neighbour, so the flags
//! bracket every zero of the free coupling on the grid.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::free_space::classical_coupling;
use crate::model::{DipoleVector, PairGeometry};
use crate::periodic::{images::images_converged, BoxSpec, ImageSumOptions};
use crate::scalar::Real;
use crate::vector::Vec3;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec<T> {
    /// Pair direction; normalised on use.
    pub direction: Vec3<T>,
    pub box_edge: T,
    pub phi_start: T,
    /// Exclusive end of the angle grid.
    pub phi_end: T,
    pub n_phi: usize,
    pub r_over_l: Vec<T>,
    pub images: ImageSumOptions<T>,
    pub floor: T,
}

impl<T: Real> Default for SweepSpec<T> {
    fn default() -> Self {
        Self {
            direction: Vec3::new(T::one(), T::lit(2.0), T::lit(3.0)),
            box_edge: T::one(),
            phi_start: T::zero(),
            phi_end: T::TAU(),
            n_phi: 361,
            r_over_l: [0.1, 0.2, 0.3, 0.4].into_iter().map(T::lit).collect(),
            images: ImageSumOptions {
                shell_max: 200,
                tol: T::lit(1e-5),
            },
            floor: T::lit(1e-12),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepRatio<T> {
    Value(T),
    Divergent,
    /// The image sum hit `shell_max`; the box column holds the last partial sum.
    NotConverged,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow<T> {
    pub phi: T,
    pub r_over_l: T,
    pub xi_free_reduced: T,
    pub xi_box_reduced: T,
    pub ratio: SweepRatio<T>,
    pub shells_used: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome<T> {
    /// Grouped by `r/L`, then ordered by `phi`.
    pub rows: Vec<SweepRow<T>>,
    /// Rows whose image sum did not converge.
    pub warnings: usize,
}

impl<T: Real> SweepSpec<T> {
    pub fn validate(&self) -> Result<()> {
        if self.direction.normalized().is_none() {
            return Err(Error::invalid(
                "direction",
                "must be a nonzero finite vector",
            ));
        }
        BoxSpec::new(self.box_edge)?;
        if self.n_phi == 0 {
            return Err(Error::invalid("n_phi", "must be at least 1"));
        }
        if !(self.phi_start.is_finite()
            && self.phi_end.is_finite()
            && self.phi_end > self.phi_start)
        {
            return Err(Error::invalid("phi_end", "must exceed phi_start"));
        }
        if self.r_over_l.is_empty() {
            return Err(Error::invalid("r_over_l", "need at least one value"));
        }
        for &x in &self.r_over_l {
            if !(x > T::zero() && x.is_finite()) {
                return Err(Error::NonPositive {
                    field: "r_over_l",
                    value: x.as_f64(),
                });
            }
        }
        if !(self.images.tol > T::zero()) {
            return Err(Error::NonPositive {
                field: "tol",
                value: self.images.tol.as_f64(),
            });
        }
        Ok(())
    }

    pub fn phis(&self) -> Vec<T> {
        let step = (self.phi_end - self.phi_start) / T::from_usize_lossy(self.n_phi);
        (0..self.n_phi)
            .map(|i| self.phi_start + step * T::from_usize_lossy(i))
            .collect()
    }

    fn is_periodic(&self) -> bool {
        let span = self.phi_end - self.phi_start;
        (span - T::TAU()).abs() <= T::lit(1e-12) * T::TAU()
    }
}

/// Runs the sweep; per-row convergence failures are recorded in the row.
pub fn fig2_sweep<T: Real>(spec: &SweepSpec<T>) -> Result<SweepOutcome<T>> {
    spec.validate()?;
    let e = spec.direction.normalized().expect("validated");
    let bx = BoxSpec::new(spec.box_edge)?;
    let phis = spec.phis();
    let cells: Vec<(T, T)> = spec
        .r_over_l
        .iter()
        .flat_map(|&x| phis.iter().map(move |&p| (x, p)))
        .collect();
    let evaluated: Vec<Result<(SweepRow<T>, bool)>> = cells
        .par_iter()
        .map(|&(x, phi)| row(&bx, e, x, phi, &spec.images))
        .collect();
    let mut rows = Vec::with_capacity(evaluated.len());
    let mut warnings = 0;
    for item in evaluated {
        let (r, failed) = item?;
        warnings += usize::from(failed);
        rows.push(r);
    }
    for group in rows.chunks_mut(phis.len()) {
        flag_sign_changes(group, spec.floor, spec.is_periodic());
    }
    Ok(SweepOutcome { rows, warnings })
}

fn row<T: Real>(
    bx: &BoxSpec<T>,
    e: Vec3<T>,
    r_over_l: T,
    phi: T,
    opts: &ImageSumOptions<T>,
) -> Result<(SweepRow<T>, bool)> {
    let (s, c) = phi.sin_cos();
    let m = DipoleVector::permanent(Vec3::new(c, T::zero(), s))?;
    let geom = bx.reduce(&PairGeometry::from_separation(e * (r_over_l * bx.edge()))?)?;
    let free = classical_coupling(&m, &m, &geom);
    let r3 = geom.distance().powi(3);
    let scale = m.magnitude() * m.magnitude();
    let (boxed, shells, ratio, failed) = match images_converged("sweep", &m, &m, &geom, bx, opts) {
        Ok((res, rep)) => (
            res.reduced,
            rep.shells_used,
            SweepRatio::Value(res.xi / free.xi),
            false,
        ),
        Err(Error::NotConverged { sequence, .. }) => {
            let last = T::lit(*sequence.last().expect("non-empty shell series"));
            (
                last * r3 / scale,
                opts.shell_max,
                SweepRatio::NotConverged,
                true,
            )
        }
        Err(other) => return Err(other),
    };
    Ok((
        SweepRow {
            phi,
            r_over_l,
            xi_free_reduced: free.reduced,
            xi_box_reduced: boxed,
            ratio,
            shells_used: shells,
        },
        failed,
    ))
}

fn flag_sign_changes<T: Real>(group: &mut [SweepRow<T>], floor: T, periodic: bool) {
    let n = group.len();
    let free: Vec<T> = group.iter().map(|r| r.xi_free_reduced).collect();
    let sign = |v: T| v > T::zero();
    for i in 0..n {
        let mut flagged = free[i].abs() <= floor;
        let neighbours = [
            if i > 0 {
                Some(i - 1)
            } else if periodic && n > 1 {
                Some(n - 1)
            } else {
                None
            },
            if i + 1 < n {
                Some(i + 1)
            } else if periodic && n > 1 {
                Some(0)
            } else {
                None
            },
        ];
        for j in neighbours.into_iter().flatten() {
            flagged |= sign(free[j]) != sign(free[i]);
        }
        if flagged && group[i].ratio != SweepRatio::NotConverged {
            group[i].ratio = SweepRatio::Divergent;
        }
    }
}
