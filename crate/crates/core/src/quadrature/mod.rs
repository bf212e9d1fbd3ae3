//! Brute-force numerical counterparts of the free-space closed forms.
//!
//! Nothing here reuses the closed forms of [`crate::free_space`] except the
//! spectral density itself as an integrand for the frequency integrals; the
//! angular quadrature integrates the polarisation-summed plane-wave kernel
//! directly.

mod angular;
mod kernel;
mod principal_value;
pub mod rules;

pub use angular::{j12_angular_quadrature, required_angular_nodes, QuadratureEstimate};
pub use kernel::{retarded_kernel, KernelPoint};
pub use principal_value::{xi_permanent_quadrature, xi_transition_pv};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Node counts, regulator schedule and cutoffs for the oracles.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSpec<T> {
    /// Gauss-Legendre nodes in `cos(theta)`.
    pub n_theta: usize,
    /// Trapezoid nodes in `phi`.
    pub n_phi: usize,
    /// Strictly decreasing regulator strengths for `exp(-eta omega r / c)`.
    pub eta_schedule: Vec<T>,
    /// Upper frequency of the kernel transform (natural units).
    pub omega_cut: T,
    /// Polynomial degree of the `eta -> 0` extrapolation; uses the
    /// `extrapolation_order + 1` smallest entries of the schedule.
    pub extrapolation_order: usize,
    /// Half-width of the excluded principal-value window, relative to Omega.
    pub pv_window: T,
    /// Accepted extrapolation residual, relative to `|m1||m2| / r^3`.
    pub tol: T,
}

impl<T: Real> Default for QuadratureSpec<T> {
    fn default() -> Self {
        Self {
            n_theta: 64,
            n_phi: 64,
            eta_schedule: [0.05, 0.04, 0.03, 0.02, 0.015, 0.01]
                .into_iter()
                .map(T::lit)
                .collect(),
            omega_cut: T::lit(50.0),
            extrapolation_order: 5,
            pv_window: T::lit(1.0 / 50.0),
            tol: T::lit(1e-6),
        }
    }
}

impl<T: Real> QuadratureSpec<T> {
    pub fn validate(&self) -> Result<()> {
        if self.n_theta < 8 || self.n_phi < 8 {
            return Err(Error::invalid("n_theta/n_phi", "need at least 8 nodes"));
        }
        let etas = &self.eta_schedule;
        if etas.is_empty() || etas.iter().any(|&e| !(e > T::zero() && e.is_finite())) {
            return Err(Error::invalid(
                "eta_schedule",
                "entries must be positive and finite",
            ));
        }
        if etas.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::invalid(
                "eta_schedule",
                "must be strictly decreasing",
            ));
        }
        if self.extrapolation_order >= etas.len() {
            return Err(Error::invalid(
                "extrapolation_order",
                format!(
                    "needs {} schedule entries, have {}",
                    self.extrapolation_order + 1,
                    etas.len()
                ),
            ));
        }
        if !(self.omega_cut > T::zero() && self.omega_cut.is_finite()) {
            return Err(Error::NonPositive {
                field: "omega_cut",
                value: self.omega_cut.as_f64(),
            });
        }
        if !(self.pv_window > T::zero() && self.pv_window < T::one()) {
            return Err(Error::invalid("pv_window", "must lie in (0, 1)"));
        }
        if !(self.tol > T::zero()) {
            return Err(Error::NonPositive {
                field: "tol",
                value: self.tol.as_f64(),
            });
        }
        Ok(())
    }

    /// The schedule entries that enter the extrapolation, largest first.
    pub(crate) fn active_etas(&self) -> &[T] {
        let n = self.eta_schedule.len();
        &self.eta_schedule[n - 1 - self.extrapolation_order..]
    }
}
