//! Field-mode sum for the permanent coupling.
//!
//! ```text
//! xi = sum_{k != 0} -(mu0 / V) [m1.m2 - (m1.e_k)(m2.e_k)] cos(k.r)
//! ```
//!
//! The sum is only conditionally convergent. Each mode is damped by
//! `exp(-k^2 sigma^2)`, which replaces every point dipole by a Gaussian cloud
//! of width `sqrt(2) sigma`; the field difference between point and cloud is
//! short ranged and is added back image by image. The completed value is
//! independent of `sigma`, and the spread over the schedule is the error
//! estimate.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::free_space::{Convergence, CouplingResult};
use crate::model::{transverse_factor_unchecked, DipoleVector, PairGeometry};
use crate::periodic::{
    for_each_in_cube_slab, for_each_in_shell_slab, i64_of, lattice, BoxSpec, LatticeSumReport,
    SumStatus,
};
use crate::scalar::Real;
use crate::vector::Vec3;

/// `k sigma` at the cube edge; `exp(-37)` is below double rounding.
const DAMPED_EDGE: f64 = 6.1;
/// Real-space images are kept while `|dr| < REACH sigma`.
const REACH: f64 = 13.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ModeSumOptions<T> {
    /// Gaussian widths relative to `L`.
    pub sigma_schedule: Vec<T>,
    /// Modes with `max |n_i| <= k_shell_max` are summed.
    pub k_shell_max: usize,
    /// Accepted spread over the schedule, relative to `|m1||m2|/r^3`.
    pub tol: T,
}

impl<T: Real> Default for ModeSumOptions<T> {
    fn default() -> Self {
        Self {
            sigma_schedule: [0.10, 0.07, 0.05, 0.035].into_iter().map(T::lit).collect(),
            k_shell_max: 32,
            tol: T::lit(1e-6),
        }
    }
}

/// Independent mode-sum evaluation of the box coupling.
pub fn xi_permanent_modesum<T: Real>(
    m1: &DipoleVector<T>,
    m2: &DipoleVector<T>,
    geom: &PairGeometry<T>,
    bx: &BoxSpec<T>,
    opts: &ModeSumOptions<T>,
) -> Result<(CouplingResult<T>, LatticeSumReport<T>)> {
    if !(m1.kind().is_permanent() && m2.kind().is_permanent()) {
        return Err(Error::WrongKind {
            what: "xi_permanent_modesum",
            expected: "permanent",
        });
    }
    let sched = &opts.sigma_schedule;
    if sched.is_empty() || sched.iter().any(|&s| !(s > T::zero() && s.is_finite())) {
        return Err(Error::invalid(
            "sigma_schedule",
            "entries must be positive and finite",
        ));
    }
    let l = bx.edge();
    let sigmas: Vec<T> = sched.iter().map(|&s| s * l).collect();
    let s_min = sigmas.iter().fold(T::infinity(), |a, &b| a.min(b));
    let s_max = sigmas.iter().fold(T::zero(), |a, &b| a.max(b));
    let k = opts.k_shell_max;
    let edge = T::TAU() * T::from_usize_lossy(k) * s_min / l;
    if edge < T::lit(DAMPED_EDGE) {
        let need = (T::lit(DAMPED_EDGE) * l / (T::TAU() * s_min))
            .ceil()
            .as_f64();
        return Err(Error::invalid(
            "k_shell_max",
            format!("{k} leaves the smallest regulator undamped; need at least {need}"),
        ));
    }
    let g = bx.reduce(geom)?;
    let (a, b) = (m1.moment(), m2.moment());
    let r_vec = g.separation();

    let recip = reciprocal_sums(a, b, r_vec, bx, &sigmas, i64_of(k));
    let real = real_space_sums(a, b, r_vec, bx, &sigmas, s_max);
    let values: Vec<T> = recip.iter().zip(&real).map(|(&x, &y)| x + y).collect();

    let n = T::from_usize_lossy(values.len());
    let xi = values.iter().copied().sum::<T>() / n;
    let spread = values
        .iter()
        .fold(T::zero(), |acc, &v| acc.max((v - xi).abs()));
    let r = g.distance();
    let scale = m1.magnitude() * m2.magnitude() / (r * r * r);
    if !(spread <= opts.tol * scale) {
        return Err(Error::NotConverged {
            what: "xi_permanent_modesum",
            residual: spread.as_f64(),
            tol: (opts.tol * scale).as_f64(),
            sequence: values.iter().map(|v| v.as_f64()).collect(),
        });
    }
    let modes = (2 * k + 1).pow(3) - 1;
    let report = LatticeSumReport {
        value: xi,
        shells_used: 0,
        last_shell_delta: T::zero(),
        regulator_sigma: s_min,
        modes_used: modes,
        status: SumStatus::Converged,
    };
    let meta = Convergence {
        terms: modes,
        residual: spread,
        sequence: values,
    };
    Ok((CouplingResult::with_meta(xi, r, m1, m2, meta), report))
}

/// `sum_{0 < max|n_i| <= k} -(4 pi / V) T_k cos(k.r) exp(-k^2 sigma^2)`
/// for every sigma at once.
fn reciprocal_sums<T: Real>(
    m1: Vec3<T>,
    m2: Vec3<T>,
    r: Vec3<T>,
    bx: &BoxSpec<T>,
    sigmas: &[T],
    k: i64,
) -> Vec<T> {
    let pref = -T::lit(4.0) * T::PI() / bx.volume();
    let s2: Vec<T> = sigmas.iter().map(|&s| s * s).collect();
    let slabs: Vec<Vec<T>> = (-k..=k)
        .into_par_iter()
        .map(|nx| {
            let mut acc = vec![T::zero(); s2.len()];
            for_each_in_cube_slab(k, nx, |n| {
                if n == [0, 0, 0] {
                    return;
                }
                let kv = bx.wave_vector(n);
                let k2 = kv.norm_squared();
                let e_k = kv / k2.sqrt();
                let w = transverse_factor_unchecked(m1, m2, e_k) * kv.dot(r).cos();
                for (a, &s) in acc.iter_mut().zip(&s2) {
                    *a = *a + w * (-k2 * s).exp();
                }
            });
            acc
        })
        .collect();
    let mut total = vec![T::zero(); s2.len()];
    for slab in slabs {
        for (t, v) in total.iter_mut().zip(slab) {
            *t = *t + v;
        }
    }
    total.into_iter().map(|t| t * pref).collect()
}

/// Point-minus-cloud field of every image close enough to matter.
fn real_space_sums<T: Real>(
    m1: Vec3<T>,
    m2: Vec3<T>,
    r: Vec3<T>,
    bx: &BoxSpec<T>,
    sigmas: &[T],
    s_max: T,
) -> Vec<T> {
    let l = bx.edge();
    let reach = T::lit(REACH) * s_max;
    let mut total = vec![T::zero(); sigmas.len()];
    let mut shell = 0_i64;
    // every image in shell s lies at least s L - |r| away
    while T::lit(shell as f64) * l - r.norm() <= reach {
        for nx in -shell..=shell {
            for_each_in_shell_slab(shell, nx, |n| {
                let d = r - lattice::<T>(n) * l;
                for (t, &sigma) in total.iter_mut().zip(sigmas) {
                    *t = *t + cloud_correction(m1, m2, d, sigma);
                }
            });
        }
        shell += 1;
    }
    total
}

/// Dipole coupling at separation `d` minus its Gaussian-smeared counterpart.
///
/// With `q = rho / (2 sigma)` and `phi = erfc(q) / (4 pi rho)`, the
/// short-range potential, the correction is
/// `4 pi m1.m2 g(rho) - 4 pi [phi'' c + (phi'/rho)(m1.m2 - c)]` where
/// `g` is the normalised Gaussian of variance `2 sigma^2` and
/// `c = (m1.e)(m2.e)`.
fn cloud_correction<T: Real>(m1: Vec3<T>, m2: Vec3<T>, d: Vec3<T>, sigma: T) -> T {
    let rho = d.norm();
    let e = d / rho;
    let a = m1.dot(m2);
    let c = m1.dot(e) * m2.dot(e);
    let four_pi = T::lit(4.0) * T::PI();
    let q = rho / (T::lit(2.0) * sigma);
    let gauss = (-q * q).exp();
    let erfc = q.erfc();
    let g = gauss / (four_pi * sigma * sigma).powf(T::lit(1.5));
    let s = gauss / (four_pi * T::PI().sqrt() * sigma);
    let d1 = -erfc / (four_pi * rho * rho) - s / rho;
    let d2 = T::lit(2.0) * erfc / (four_pi * rho * rho * rho)
        + s * (T::lit(2.0) / (rho * rho) + q / (sigma * rho));
    four_pi * a * g - four_pi * (d2 * c + d1 / rho * (a - c))
}
