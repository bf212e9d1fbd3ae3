use crate::error::Result;
use crate::free_space::{classical_coupling, xi_transition, CouplingResult};
use crate::model::{DipoleVector, PairGeometry, TransitionSpec};
use crate::periodic::{
    xi_permanent_images, xi_transition_box, BoxSpec, Estimator, ImageSumOptions, LatticeSumReport,
    TransitionBoxParams,
};
use crate::scalar::Real;

/// Which coupling to compare.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RatioKind<T> {
    Permanent,
    Transition {
        spec: TransitionSpec<T>,
        estimator: Estimator,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioParams<T> {
    pub images: ImageSumOptions<T>,
    pub transition: TransitionBoxParams<T>,
    /// Free-space reduced values at or below this are treated as zeros.
    pub floor: T,
}

impl<T: Real> Default for RatioParams<T> {
    fn default() -> Self {
        Self {
            images: ImageSumOptions::default(),
            transition: TransitionBoxParams::default(),
            floor: T::lit(1e-12),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ratio<T> {
    Finite(T),
    /// The free-space coupling vanishes; the ratio has no finite value.
    Divergent,
}

impl<T: Real> Ratio<T> {
    pub fn value(self) -> Option<T> {
        match self {
            Ratio::Finite(v) => Some(v),
            Ratio::Divergent => None,
        }
    }
}

/// Box coupling, free coupling and their ratio, all at the minimum-image
/// separation.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxRatio<T> {
    pub free: CouplingResult<T>,
    pub boxed: CouplingResult<T>,
    pub report: LatticeSumReport<T>,
    pub ratio: Ratio<T>,
}

pub fn ratio_to_free<T: Real>(
    m1: &DipoleVector<T>,
    m2: &DipoleVector<T>,
    geom: &PairGeometry<T>,
    bx: &BoxSpec<T>,
    kind: RatioKind<T>,
    params: &RatioParams<T>,
) -> Result<BoxRatio<T>> {
    let g = bx.reduce(geom)?;
    let (free, (boxed, report)) = match kind {
        RatioKind::Permanent => (
            classical_coupling(m1, m2, &g),
            xi_permanent_images(m1, m2, &g, bx, &params.images)?,
        ),
        RatioKind::Transition { spec, estimator } => (
            xi_transition(m1, m2, &g, &spec)?,
            xi_transition_box(m1, m2, &g, bx, &spec, None, estimator, &params.transition)?,
        ),
    };
    let ratio = if free.reduced.abs() <= params.floor {
        Ratio::Divergent
    } else {
        Ratio::Finite(boxed.xi / free.xi)
    };
    Ok(BoxRatio {
        free,
        boxed,
        report,
        ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector::Vec3;

    #[test]
    fn magic_angle_is_divergent() {
        let s = 1.0 / 3f64.sqrt();
        let m = DipoleVector::permanent(Vec3::new(s, s, s)).unwrap();
        let g = PairGeometry::from_separation(Vec3::new(0.0, 0.0, 0.1)).unwrap();
        let bx = BoxSpec::new(1.0).unwrap();
        let r = ratio_to_free(
            &m,
            &m,
            &g,
            &bx,
            RatioKind::Permanent,
            &RatioParams::default(),
        )
        .unwrap();
        assert_eq!(r.ratio, Ratio::Divergent);
    }

    #[test]
    fn small_pair_is_close_to_free() {
        let m = DipoleVector::permanent(Vec3::new(0.0, 0.0, 1.0)).unwrap();
        let g = PairGeometry::<f64>::from_separation(Vec3::new(0.0, 0.0, 0.01)).unwrap();
        let bx = BoxSpec::new(1.0).unwrap();
        let r = ratio_to_free(
            &m,
            &m,
            &g,
            &bx,
            RatioKind::Permanent,
            &RatioParams::default(),
        )
        .unwrap();
        assert!((r.ratio.value().unwrap() - 1.0).abs() < 1e-4);
    }
}
