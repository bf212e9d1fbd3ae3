//! Couplings inside a periodic cube of edge `L`.
//!
//! Mode sums run over `k = 2 pi n / L`, `n != 0`; image sums run over
//! `r - L n`. Every enumeration is ordered shell by shell (`max |n_i| = s`)
//! and lexicographically inside a shell, and parallel work is reduced in that
//! order, so results do not depend on the number of worker threads.

mod images;
mod modes;
mod ratio;
pub mod sweep;
mod transition;

pub use images::{
    background_term, image_shell_increments, xi_permanent_images, xi_permanent_images_truncated,
    ImageSumOptions,
};
pub use modes::{xi_permanent_modesum, ModeSumOptions};
pub use ratio::{ratio_to_free, BoxRatio, Ratio, RatioKind, RatioParams};
pub use transition::{xi_transition_box, Estimator, TransitionBoxParams};

use crate::error::{Error, Result};
use crate::model::PairGeometry;
use crate::scalar::Real;
use crate::vector::Vec3;

/// Image-coincidence threshold relative to the box edge.
const COINCIDENCE: f64 = 1e-9;

/// A periodic cube.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxSpec<T> {
    edge: T,
}

impl<T: Real> BoxSpec<T> {
    pub fn new(edge: T) -> Result<Self> {
        if !(edge > T::zero() && edge.is_finite()) {
            return Err(Error::NonPositive {
                field: "L",
                value: edge.as_f64(),
            });
        }
        Ok(Self { edge })
    }

    pub fn edge(&self) -> T {
        self.edge
    }

    pub fn volume(&self) -> T {
        self.edge * self.edge * self.edge
    }

    /// `2 pi n / L`.
    pub fn wave_vector(&self, n: [i64; 3]) -> Vec3<T> {
        lattice(n) * (T::TAU() / self.edge)
    }

    /// Reduces every component into `[-L/2, L/2)`.
    pub fn minimum_image(&self, v: Vec3<T>) -> Vec3<T> {
        let l = self.edge;
        let half = T::lit(0.5);
        v.map(|c| c - l * (c / l + half).floor())
    }

    /// Pair geometry with the separation reduced to the central cell.
    ///
    /// Positions are rebuilt as `0` and the reduced separation, so two
    /// geometries that differ by a common shift or by lattice vectors map to
    /// the same value.
    pub fn reduce(&self, geom: &PairGeometry<T>) -> Result<PairGeometry<T>> {
        let r = geom.separation();
        let reduced = self.minimum_image(r);
        let d = reduced.norm();
        if d < T::lit(COINCIDENCE) * self.edge {
            let shift = (r - reduced) / self.edge;
            return Err(Error::ImageCoincidence {
                n: shift.to_array().map(|c| c.round().to_i64().unwrap_or(0)),
                distance: d.as_f64(),
            });
        }
        PairGeometry::from_separation(reduced)
    }
}

/// Outcome flag attached to a lattice sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SumStatus {
    Converged,
    /// The near-resonant window contained no modes; `value` is zero by
    /// construction, not by cancellation.
    EmptyWindow,
}

/// Truncation metadata of a lattice or mode sum.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSumReport<T> {
    pub value: T,
    /// Outermost image shell (`max |n_i|`) included, 0 if no image sum ran.
    pub shells_used: usize,
    /// Last full-shell increment relative to the partial sum.
    pub last_shell_delta: T,
    /// Smallest Gaussian width used, 0 if none.
    pub regulator_sigma: T,
    /// Number of field modes summed, 0 for pure image sums.
    pub modes_used: usize,
    pub status: SumStatus,
}

pub(crate) fn lattice<T: Real>(n: [i64; 3]) -> Vec3<T> {
    Vec3::new(
        T::lit(n[0] as f64),
        T::lit(n[1] as f64),
        T::lit(n[2] as f64),
    )
}

/// Calls `f` on every `n` with `max |n_i| = s` and first component `nx`,
/// in lexicographic order.
pub(crate) fn for_each_in_shell_slab(s: i64, nx: i64, mut f: impl FnMut([i64; 3])) {
    if nx.abs() == s {
        for ny in -s..=s {
            for nz in -s..=s {
                f([nx, ny, nz]);
            }
        }
        return;
    }
    for ny in -s..=s {
        if ny.abs() == s {
            for nz in -s..=s {
                f([nx, ny, nz]);
            }
        } else {
            f([nx, ny, -s]);
            f([nx, ny, s]);
        }
    }
}

/// Calls `f` on every `n` of the cube `max |n_i| <= k` with fixed `nx`.
pub(crate) fn for_each_in_cube_slab(k: i64, nx: i64, mut f: impl FnMut([i64; 3])) {
    for ny in -k..=k {
        for nz in -k..=k {
            f([nx, ny, nz]);
        }
    }
}

pub(crate) fn i64_of(n: usize) -> i64 {
    i64::try_from(n).unwrap_or(i64::MAX)
}
