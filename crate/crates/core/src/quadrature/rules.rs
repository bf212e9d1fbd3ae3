//! Gauss-Legendre rules, composite panels and extrapolation to zero.

use crate::scalar::Real;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    /// Newton iteration on `P_n` in double precision, then cast.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0_f64; n];
        let mut weights = vec![0.0_f64; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self {
            nodes: nodes.into_iter().map(T::lit).collect(),
            weights: weights.into_iter().map(T::lit).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Mapped nodes and weights on `[lo, hi]`.
    pub fn on(&self, lo: T, hi: T) -> impl Iterator<Item = (T, T)> + '_ {
        let half = (hi - lo) * T::lit(0.5);
        let mid = (hi + lo) * T::lit(0.5);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate(&self, lo: T, hi: T, mut f: impl FnMut(T) -> T) -> T {
        self.on(lo, hi).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Panel edges on `[lo, hi]` whose widths start at `first` next to `lo`
/// and double up to `max_width`.
pub(crate) fn graded_edges<T: Real>(lo: T, hi: T, first: T, max_width: T) -> Vec<T> {
    let mut edges = vec![lo];
    let mut x = lo;
    let mut h = first.min(max_width);
    while x < hi {
        x = (x + h).min(hi);
        edges.push(x);
        h = (h + h).min(max_width);
    }
    edges
}

/// Same as [`graded_edges`] but refined towards `hi`.
pub(crate) fn graded_edges_towards_hi<T: Real>(lo: T, hi: T, first: T, max_width: T) -> Vec<T> {
    let mut mirrored: Vec<T> = graded_edges(-hi, -lo, first, max_width)
        .into_iter()
        .map(|e| -e)
        .collect();
    mirrored.reverse();
    mirrored
}

/// Uniform panel edges with width at most `max_width`.
pub(crate) fn uniform_edges<T: Real>(lo: T, hi: T, max_width: T) -> Vec<T> {
    let n = ((hi - lo) / max_width)
        .ceil()
        .to_usize()
        .unwrap_or(1)
        .max(1);
    let step = (hi - lo) / T::from_usize_lossy(n);
    (0..=n)
        .map(|i| {
            if i == n {
                hi
            } else {
                lo + step * T::from_usize_lossy(i)
            }
        })
        .collect()
}

/// Value at `h = 0` of the interpolating polynomial through `(h_i, y_i)`.
pub fn neville_at_zero<T: Real>(h: &[T], y: &[T]) -> T {
    assert_eq!(h.len(), y.len());
    assert!(!h.is_empty());
    let mut p = y.to_vec();
    let n = h.len();
    for m in 1..n {
        for i in 0..n - m {
            p[i] = (h[i] * p[i + 1] - h[i + m] * p[i]) / (h[i] - h[i + m]);
        }
    }
    p[0]
}

/// Extrapolated value and the change from dropping the largest-`h` sample.
pub fn extrapolate_to_zero<T: Real>(h: &[T], y: &[T]) -> (T, T) {
    let full = neville_at_zero(h, y);
    if h.len() < 2 {
        return (full, T::infinity());
    }
    let reduced = neville_at_zero(&h[1..], &y[1..]);
    (full, (full - reduced).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let rule = GaussLegendre::<f64>::new(10);
        // degree 19 is the limit of a 10-point rule
        let v = rule.integrate(-1.0, 1.0, |x| x.powi(18));
        assert!((v - 2.0 / 19.0).abs() < 1e-15);
        let w: f64 = rule.weights.iter().sum();
        assert!((w - 2.0).abs() < 1e-14);
    }

    #[test]
    fn odd_rule_has_centre_node() {
        let rule = GaussLegendre::<f64>::new(7);
        assert_eq!(rule.nodes[3], 0.0);
        let v = rule.integrate(0.0, std::f64::consts::PI, f64::sin);
        assert!((v - 2.0).abs() < 1e-9);
    }

    #[test]
    fn neville_recovers_polynomial_intercept() {
        let h = [0.4, 0.3, 0.2, 0.1];
        let y: Vec<f64> = h.iter().map(|&x| 3.0 - 2.0 * x + 0.5 * x * x * x).collect();
        assert!((neville_at_zero(&h, &y) - 3.0).abs() < 1e-13);
    }

    #[test]
    fn graded_edges_cover_interval() {
        let e = graded_edges(0.0_f64, 10.0, 0.01, 1.0);
        assert_eq!(e[0], 0.0);
        assert_eq!(*e.last().unwrap(), 10.0);
        assert!((e[1] - 0.01).abs() < 1e-15);
        let f = graded_edges_towards_hi(0.0_f64, 10.0, 0.01, 1.0);
        assert_eq!(f[0], 0.0);
        assert!((f[f.len() - 1] - f[f.len() - 2] - 0.01).abs() < 1e-12);
    }
}
