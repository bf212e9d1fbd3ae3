//! Regulated frequency integrals for the time-local couplings.
//!
//! In reduced form, with `x = omega r / c` and `B(x)` the braces of the
//! spectral density,
//!
//! ```text
//! xi r^3 = -(1/pi) PV Int_{-inf}^{inf} x^3 B(x) / (x - x0) dx
//!        = -(1/pi) PV Int_0^inf 2 x^4 B(x) / ((x + x0)(x - x0)) dx
//! ```
//!
//! where the second line folds the odd integrand onto the half line. The
//! integrand grows like `x^2`, so it is damped by `exp(-eta x)` and the
//! result extrapolated to `eta = 0`.

use crate::error::{Error, Result};
use crate::free_space::{spectral_braces, Convergence, CouplingResult};
use crate::model::{DipoleKind, DipoleVector, PairGeometry, TransitionSpec};
use crate::quadrature::rules::{
    extrapolate_to_zero, graded_edges, graded_edges_towards_hi, uniform_edges, GaussLegendre,
};
use crate::quadrature::QuadratureSpec;
use crate::scalar::Real;
use crate::vector::Vec3;

const PANEL_NODES: usize = 20;
/// Integrate up to `x = TAIL / eta`; `exp(-TAIL)` is far below rounding.
const TAIL: f64 = 50.0;

/// Principal-value oracle for the transition coupling.
pub fn xi_transition_pv<T: Real>(
    m1: &DipoleVector<T>,
    m2: &DipoleVector<T>,
    geom: &PairGeometry<T>,
    ts: &TransitionSpec<T>,
    spec: &QuadratureSpec<T>,
) -> Result<CouplingResult<T>> {
    if m1.kind() != DipoleKind::Transition || m2.kind() != DipoleKind::Transition {
        return Err(Error::WrongKind {
            what: "xi_transition_pv",
            expected: "transition",
        });
    }
    spec.validate()?;
    let x0 = ts.retardation(geom.distance());
    let x_max = T::lit(TAIL) / *spec.active_etas().last().unwrap();
    if x0 + x0 * spec.pv_window >= x_max {
        return Err(Error::invalid(
            "omega",
            "retardation beyond the regulated integration range",
        ));
    }
    regulated_coupling("xi_transition_pv", m1, m2, geom, x0, spec)
}

/// The same integral at `Omega = 0`, whose integrand has no pole.
pub fn xi_permanent_quadrature<T: Real>(
    m1: &DipoleVector<T>,
    m2: &DipoleVector<T>,
    geom: &PairGeometry<T>,
    spec: &QuadratureSpec<T>,
) -> Result<CouplingResult<T>> {
    if !(m1.kind().is_permanent() && m2.kind().is_permanent()) {
        return Err(Error::WrongKind {
            what: "xi_permanent_quadrature",
            expected: "permanent",
        });
    }
    spec.validate()?;
    regulated_coupling("xi_permanent_quadrature", m1, m2, geom, T::zero(), spec)
}

fn regulated_coupling<T: Real>(
    what: &'static str,
    m1: &DipoleVector<T>,
    m2: &DipoleVector<T>,
    geom: &PairGeometry<T>,
    x0: T,
    spec: &QuadratureSpec<T>,
) -> Result<CouplingResult<T>> {
    let etas = spec.active_etas();
    let sums = regulated_sums(
        m1.moment(),
        m2.moment(),
        geom.direction(),
        x0,
        x0 * spec.pv_window,
        etas,
    );
    let r = geom.distance();
    let r3 = r * r * r;
    let sequence: Vec<T> = sums.iter().map(|&s| -s / (T::PI() * r3)).collect();
    let (xi, residual) = extrapolate_to_zero(etas, &sequence);
    let scale = m1.magnitude() * m2.magnitude() / r3;
    if !(residual <= spec.tol * scale) {
        return Err(Error::NotConverged {
            what,
            residual: residual.as_f64(),
            tol: (spec.tol * scale).as_f64(),
            sequence: sequence.iter().map(|v| v.as_f64()).collect(),
        });
    }
    let meta = Convergence {
        terms: etas.len(),
        residual,
        sequence,
    };
    Ok(CouplingResult::with_meta(xi, r, m1, m2, meta))
}

/// `PV Int_0^X 2 x^4 B(x) exp(-eta x) / (x^2 - x0^2) dx` for every `eta`.
///
/// All regulators share one panel layout sized for the smallest `eta`, so
/// the braces are evaluated once per node. For `x0 > 0` the window
/// `[x0 - d, x0 + d]` is folded onto `[0, d]`, where
/// `[F(x0 + t) - F(x0 - t)] / t` is regular.
fn regulated_sums<T: Real>(
    m1: Vec3<T>,
    m2: Vec3<T>,
    e: Vec3<T>,
    x0: T,
    d: T,
    etas: &[T],
) -> Vec<T> {
    let rule = GaussLegendre::<T>::new(PANEL_NODES);
    let x_max = T::lit(TAIL) / *etas.last().unwrap();
    let two = T::lit(2.0);
    // 2 x^4 B(x) / (x + x0): the integrand without the pole factor
    let numerator = |x: T| {
        let x2 = x * x;
        two * x2 * x2 * spectral_braces(m1, m2, e, x) / (x + x0)
    };
    let mut sums = vec![T::zero(); etas.len()];
    let mut add = |x: T, weight: T| {
        for (s, &eta) in sums.iter_mut().zip(etas) {
            *s = *s + weight * (-eta * x).exp();
        }
    };

    if x0 == T::zero() {
        for w in uniform_edges(T::zero(), x_max, T::one()).windows(2) {
            for (x, wt) in rule.on(w[0], w[1]) {
                add(x, wt * two * x * x * spectral_braces(m1, m2, e, x));
            }
        }
        return sums;
    }

    let below = graded_edges_towards_hi(T::zero(), x0 - d, d, T::one());
    let above = graded_edges(x0 + d, x_max, d, T::one());
    for w in below.windows(2).chain(above.windows(2)) {
        for (x, wt) in rule.on(w[0], w[1]) {
            add(x, wt * numerator(x) / (x - x0));
        }
    }
    for w in uniform_edges(T::zero(), d, T::one()).windows(2) {
        for (t, wt) in rule.on(w[0], w[1]) {
            add(x0 + t, wt * numerator(x0 + t) / t);
            add(x0 - t, -wt * numerator(x0 - t) / t);
        }
    }
    sums
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::free_space::{classical_coupling, xi_transition};

    fn pair(kind: DipoleKind) -> (DipoleVector<f64>, DipoleVector<f64>, PairGeometry<f64>) {
        (
            DipoleVector::new(Vec3::new(0.6, -0.2, 0.7), kind).unwrap(),
            DipoleVector::new(Vec3::new(0.1, 0.9, -0.3), kind).unwrap(),
            PairGeometry::from_separation(Vec3::new(0.2, -0.5, 0.9)).unwrap(),
        )
    }

    #[test]
    fn transition_oracle_matches_closed_form() {
        let (m1, m2, g) = pair(DipoleKind::Transition);
        let spec = QuadratureSpec::default();
        for x in [0.5, 2.0, 5.0] {
            let ts = TransitionSpec::from_retardation(x, g.distance()).unwrap();
            let pv = xi_transition_pv(&m1, &m2, &g, &ts, &spec).unwrap();
            let cf = xi_transition(&m1, &m2, &g, &ts).unwrap();
            let scale = m1.magnitude() * m2.magnitude();
            assert!(
                (pv.reduced - cf.reduced).abs() < 1e-6 * scale,
                "x={x}: {} vs {}",
                pv.reduced,
                cf.reduced
            );
        }
    }

    #[test]
    fn permanent_oracle_matches_classical() {
        let (m1, m2, g) = pair(DipoleKind::PermanentG);
        let q = xi_permanent_quadrature(&m1, &m2, &g, &QuadratureSpec::default()).unwrap();
        let c = classical_coupling(&m1, &m2, &g);
        assert!((q.xi / c.xi - 1.0).abs() < 1e-6);
        assert_eq!(q.meta.as_ref().unwrap().sequence.len(), 6);
    }

    #[test]
    fn too_coarse_schedule_reports_sequence() {
        let (m1, m2, g) = pair(DipoleKind::Transition);
        let spec = QuadratureSpec {
            eta_schedule: vec![0.8, 0.4],
            extrapolation_order: 1,
            tol: 1e-12,
            ..QuadratureSpec::default()
        };
        let ts = TransitionSpec::new(2.0).unwrap();
        match xi_transition_pv(&m1, &m2, &g, &ts, &spec) {
            Err(Error::NotConverged { sequence, .. }) => assert_eq!(sequence.len(), 2),
            other => panic!("unexpected {other:?}"),
        }
    }
}
