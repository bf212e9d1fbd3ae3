//! Transition-dipole coupling in the box.
//!
//! ```text
//! xi_T = sum_{k != 0} -(mu0 / V) T_k cos(k.r) omega_k / (omega_k - Omega)
//!      = [image sum + background] + sum_{k != 0} -(mu0 / V) T_k cos(k.r) Omega / (omega_k - Omega)
//! ```
//!
//! with `T_k = m1.m2 - (m1.e_k)(m2.e_k)`. The first bracket is the permanent
//! form with transition moments; the second is damped by `exp(-k^2 sigma^2)`
//! and extrapolated to `sigma = 0` in `sigma^2`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::free_space::{Convergence, CouplingResult};
use crate::model::{
    transverse_factor_unchecked, DipoleKind, DipoleVector, PairGeometry, TransitionSpec,
};
use crate::periodic::images::images_converged;
use crate::periodic::{
    for_each_in_cube_slab, BoxSpec, ImageSumOptions, LatticeSumReport, SumStatus,
};
use crate::quadrature::rules::extrapolate_to_zero;
use crate::scalar::Real;
use crate::vector::Vec3;

const DAMPED_EDGE: f64 = 6.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    /// Only modes with `|omega_k - Omega| <= W`.
    NearResonant,
    /// Every mode, via the image form plus the damped envelope sum.
    FullSum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionBoxParams<T> {
    /// Half-width `W` of the near-resonant window, relative to Omega.
    pub window: T,
    /// Gaussian widths of the envelope sum, relative to the reduced `r`.
    pub sigma_schedule: Vec<T>,
    /// Upper bound on `max |n_i|` for the envelope sum.
    pub k_shell_max: usize,
    pub images: ImageSumOptions<T>,
    /// Accepted extrapolation residual, relative to `|m1||m2|/r^3`.
    pub tol: T,
}

impl<T: Real> Default for TransitionBoxParams<T> {
    fn default() -> Self {
        Self {
            window: T::lit(0.2),
            sigma_schedule: [0.1, 0.085, 0.07, 0.055].into_iter().map(T::lit).collect(),
            k_shell_max: 200,
            images: ImageSumOptions::default(),
            tol: T::lit(1e-3),
        }
    }
}

/// Transition coupling in the box.
///
/// `delta_min` is the smallest accepted `|omega_k - Omega|`; `None` means
/// `1e-6 Omega`.
#[allow(clippy::too_many_arguments)]
pub fn xi_transition_box<T: Real>(
    m1: &DipoleVector<T>,
    m2: &DipoleVector<T>,
    geom: &PairGeometry<T>,
    bx: &BoxSpec<T>,
    ts: &TransitionSpec<T>,
    delta_min: Option<T>,
    estimator: Estimator,
    params: &TransitionBoxParams<T>,
) -> Result<(CouplingResult<T>, LatticeSumReport<T>)> {
    if m1.kind() != DipoleKind::Transition || m2.kind() != DipoleKind::Transition {
        return Err(Error::WrongKind {
            what: "xi_transition_box",
            expected: "transition",
        });
    }
    let omega = ts.omega();
    let delta_min = delta_min.unwrap_or(omega * T::lit(1e-6));
    if !(delta_min >= T::zero()) {
        return Err(Error::invalid("delta_min", "must be non-negative"));
    }
    if !(params.window > T::zero() && params.window.is_finite()) {
        return Err(Error::NonPositive {
            field: "window",
            value: params.window.as_f64(),
        });
    }
    let g = bx.reduce(geom)?;
    resonance_guard(bx, omega, delta_min)?;
    match estimator {
        Estimator::NearResonant => near_resonant(m1, m2, &g, bx, omega, params),
        Estimator::FullSum => full_sum(m1, m2, &g, bx, omega, params),
    }
}

/// Rejects boxes with a mode closer than `delta_min` to Omega.
fn resonance_guard<T: Real>(bx: &BoxSpec<T>, omega: T, delta_min: T) -> Result<()> {
    let l = bx.edge();
    let k = (omega * l / T::TAU())
        .floor()
        .to_i64()
        .unwrap_or(i64::MAX - 1)
        + 1;
    let worst = (-k..=k)
        .into_par_iter()
        .map(|nx| {
            let mut best: Option<(T, [i64; 3])> = None;
            for_each_in_cube_slab(k, nx, |n| {
                if n == [0, 0, 0] {
                    return;
                }
                let det = (bx.wave_vector(n).norm() - omega).abs();
                if best.is_none_or(|(b, _)| det < b) {
                    best = Some((det, n));
                }
            });
            best
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .fold(None, |acc: Option<(T, [i64; 3])>, cur| match acc {
            Some(a) if a.0 <= cur.0 => Some(a),
            _ => Some(cur),
        });
    if let Some((det, n)) = worst {
        if det < delta_min {
            return Err(Error::ResonantMode {
                n,
                omega_k: bx.wave_vector(n).norm().as_f64(),
                detuning: det.as_f64(),
            });
        }
    }
    Ok(())
}

fn near_resonant<T: Real>(
    m1: &DipoleVector<T>,
    m2: &DipoleVector<T>,
    g: &PairGeometry<T>,
    bx: &BoxSpec<T>,
    omega: T,
    params: &TransitionBoxParams<T>,
) -> Result<(CouplingResult<T>, LatticeSumReport<T>)> {
    let w = params.window * omega;
    let l = bx.edge();
    let k = ((omega + w) * l / T::TAU())
        .floor()
        .to_i64()
        .unwrap_or(i64::MAX - 1)
        + 1;
    let (a, b, r) = (m1.moment(), m2.moment(), g.separation());
    let pref = -T::lit(4.0) * T::PI() / bx.volume();
    let slabs: Vec<(T, usize)> = (-k..=k)
        .into_par_iter()
        .map(|nx| {
            let mut acc = T::zero();
            let mut count = 0;
            for_each_in_cube_slab(k, nx, |n| {
                if n == [0, 0, 0] {
                    return;
                }
                let kv = bx.wave_vector(n);
                let wk = kv.norm();
                if (wk - omega).abs() > w {
                    return;
                }
                let t = transverse_factor_unchecked(a, b, kv / wk);
                acc = acc + wk * t * kv.dot(r).cos() / (wk - omega);
                count += 1;
            });
            (acc, count)
        })
        .collect();
    let (sum, modes) = slabs
        .into_iter()
        .fold((T::zero(), 0), |(s, c), (x, n)| (s + x, c + n));
    let xi = pref * sum;
    let report = LatticeSumReport {
        value: xi,
        shells_used: 0,
        last_shell_delta: T::zero(),
        regulator_sigma: T::zero(),
        modes_used: modes,
        status: if modes == 0 {
            SumStatus::EmptyWindow
        } else {
            SumStatus::Converged
        },
    };
    Ok((CouplingResult::exact(xi, g.distance(), m1, m2), report))
}

fn full_sum<T: Real>(
    m1: &DipoleVector<T>,
    m2: &DipoleVector<T>,
    g: &PairGeometry<T>,
    bx: &BoxSpec<T>,
    omega: T,
    params: &TransitionBoxParams<T>,
) -> Result<(CouplingResult<T>, LatticeSumReport<T>)> {
    let sched = &params.sigma_schedule;
    if sched.len() < 2 || sched.iter().any(|&s| !(s > T::zero() && s.is_finite())) {
        return Err(Error::invalid(
            "sigma_schedule",
            "need at least two positive entries",
        ));
    }
    if sched.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::invalid(
            "sigma_schedule",
            "must be strictly decreasing",
        ));
    }
    let r = g.distance();
    let l = bx.edge();
    let sigmas: Vec<T> = sched.iter().map(|&s| s * r).collect();
    let s_min = *sigmas.last().unwrap();
    let need = (T::lit(DAMPED_EDGE) * l / (T::TAU() * s_min)).ceil();
    let k = need.to_usize().unwrap_or(usize::MAX);
    if k > params.k_shell_max {
        return Err(Error::invalid(
            "k_shell_max",
            format!(
                "envelope sum needs {k} mode shells, limit is {}",
                params.k_shell_max
            ),
        ));
    }
    let (base, img) = images_converged("xi_transition_box", m1, m2, g, bx, &params.images)?;
    let envelope = envelope_sums(
        m1.moment(),
        m2.moment(),
        g.separation(),
        bx,
        omega,
        &sigmas,
        k as i64,
    );
    let h: Vec<T> = sigmas.iter().map(|&s| s * s).collect();
    let (chi, residual) = extrapolate_to_zero(&h, &envelope);
    let scale = m1.magnitude() * m2.magnitude() / (r * r * r);
    if !(residual <= params.tol * scale) {
        return Err(Error::NotConverged {
            what: "xi_transition_box",
            residual: residual.as_f64(),
            tol: (params.tol * scale).as_f64(),
            sequence: envelope.iter().map(|v| v.as_f64()).collect(),
        });
    }
    let xi = base.xi + chi;
    let modes = (2 * k + 1).pow(3) - 1;
    let report = LatticeSumReport {
        value: xi,
        shells_used: img.shells_used,
        last_shell_delta: img.last_shell_delta,
        regulator_sigma: s_min,
        modes_used: modes,
        status: SumStatus::Converged,
    };
    let image_residual = base.meta.map_or(T::zero(), |m| m.residual);
    let meta = Convergence {
        terms: modes,
        residual: residual + image_residual,
        sequence: envelope,
    };
    Ok((CouplingResult::with_meta(xi, r, m1, m2, meta), report))
}

/// `sum -(4 pi / V) T_k cos(k.r) Omega / (omega_k - Omega) exp(-k^2 sigma^2)`.
fn envelope_sums<T: Real>(
    m1: Vec3<T>,
    m2: Vec3<T>,
    r: Vec3<T>,
    bx: &BoxSpec<T>,
    omega: T,
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
                let wk = k2.sqrt();
                let w = transverse_factor_unchecked(m1, m2, kv / wk) * kv.dot(r).cos() * omega
                    / (wk - omega);
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::periodic::xi_permanent_images;

    fn tdip(x: f64, y: f64, z: f64) -> DipoleVector<f64> {
        DipoleVector::transition(Vec3::new(x, y, z)).unwrap()
    }

    #[test]
    fn exact_mode_resonance_is_rejected() {
        let m = tdip(1.0, 0.0, 0.0);
        let g = PairGeometry::from_separation(Vec3::new(0.0, 0.1, 0.2)).unwrap();
        let bx = BoxSpec::new(1.0).unwrap();
        let ts = TransitionSpec::new(std::f64::consts::TAU).unwrap();
        let res = xi_transition_box(
            &m,
            &m,
            &g,
            &bx,
            &ts,
            None,
            Estimator::NearResonant,
            &Default::default(),
        );
        assert!(matches!(res, Err(Error::ResonantMode { .. })));
    }

    #[test]
    fn window_below_lowest_mode_is_flagged_empty() {
        let m = tdip(1.0, 0.0, 0.0);
        let g = PairGeometry::from_separation(Vec3::new(0.0, 0.1, 0.2)).unwrap();
        let bx = BoxSpec::new(1.0).unwrap();
        let ts = TransitionSpec::new(1.0).unwrap();
        let (res, rep) = xi_transition_box(
            &m,
            &m,
            &g,
            &bx,
            &ts,
            None,
            Estimator::NearResonant,
            &Default::default(),
        )
        .unwrap();
        assert_eq!(rep.status, SumStatus::EmptyWindow);
        assert_eq!(rep.modes_used, 0);
        assert_eq!(res.xi, 0.0);
    }

    #[test]
    fn full_sum_tends_to_permanent_form_at_low_frequency() {
        let m1 = tdip(0.2, 0.5, -0.8);
        let m2 = tdip(0.6, -0.1, 0.3);
        let g = PairGeometry::from_separation(Vec3::new(0.05, 0.12, -0.08)).unwrap();
        let bx = BoxSpec::new(1.0).unwrap();
        let ts = TransitionSpec::new(1e-4).unwrap();
        let (full, _) = xi_transition_box(
            &m1,
            &m2,
            &g,
            &bx,
            &ts,
            None,
            Estimator::FullSum,
            &Default::default(),
        )
        .unwrap();
        let (p1, p2) = (
            m1.with_kind(DipoleKind::PermanentE),
            m2.with_kind(DipoleKind::PermanentE),
        );
        let (perm, _) =
            xi_permanent_images(&p1, &p2, &g, &bx, &ImageSumOptions::default()).unwrap();
        assert!((full.xi / perm.xi - 1.0).abs() < 1e-4);
    }
}
