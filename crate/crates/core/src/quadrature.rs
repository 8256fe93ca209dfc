//! Composite Gauss-Legendre quadrature.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::ComplexMatrix;
use crate::scalar::Real;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, ascending.
///
/// Newton iteration on the three-term recurrence for `P_n`.
pub fn gauss_legendre<T: Real>(n: usize) -> Vec<(T, T)> {
    assert!(n >= 1, "need at least one node");
    let mut out = vec![(T::zero(), T::zero()); n];
    let nf = T::from_count(n);
    let tol = T::epsilon() * T::lit(4.0);
    for i in 0..n.div_ceil(2) {
        let mut x = (T::PI() * (T::from_count(i) + T::lit(0.75)) / (nf + T::lit(0.5))).cos();
        let mut dp = T::one();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x = x - dx;
            if dx.abs() <= tol {
                let (_, d) = legendre_with_derivative(n, x);
                dp = d;
                break;
            }
        }
        let w = T::lit(2.0) / ((T::one() - x * x) * dp * dp);
        out[i] = (-x, w);
        out[n - 1 - i] = (x, w);
    }
    if n % 2 == 1 {
        out[n / 2].0 = T::zero();
    }
    out
}

fn legendre_with_derivative<T: Real>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    for k in 2..=n {
        let kf = T::from_count(k);
        let p2 = ((T::lit(2.0) * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = T::from_count(n);
    let d = nf * (x * p1 - p0) / (x * x - T::one());
    (p1, d)
}

/// Composite rule: `panels` equal sub-intervals with `nodes_per_panel`
/// Gauss-Legendre nodes each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub panels: usize,
    pub nodes_per_panel: usize,
}

impl QuadratureRule {
    pub const DEFAULT_NODES: usize = 8;
    pub const MIN_PANELS: usize = 16;

    pub fn new(panels: usize, nodes_per_panel: usize) -> Result<Self> {
        if panels == 0 || nodes_per_panel == 0 {
            return Err(invalid("quadrature needs at least one panel and one node"));
        }
        Ok(Self {
            panels,
            nodes_per_panel,
        })
    }

    /// 8-node panels, `max(16, ceil(4 * length * (1 + rate)))` of them.
    pub fn for_interval<T: Real>(length: T, rate: T) -> Self {
        let want = (T::lit(4.0) * length.abs() * (T::one() + rate.abs())).ceil();
        let want = want.to_usize().unwrap_or(usize::MAX).clamp(Self::MIN_PANELS, 1 << 20);
        Self {
            panels: want,
            nodes_per_panel: Self::DEFAULT_NODES,
        }
    }

    /// Same node order, twice the panels.
    pub fn refined(&self) -> Self {
        Self {
            panels: self.panels * 2,
            nodes_per_panel: self.nodes_per_panel,
        }
    }

    /// Highest polynomial degree integrated exactly on each panel.
    pub fn exact_degree(&self) -> usize {
        2 * self.nodes_per_panel - 1
    }

    /// `(node, weight)` pairs for `∫_a^b`. Works for `b < a` (negative weights).
    pub fn nodes<T: Real>(&self, a: T, b: T) -> Vec<(T, T)> {
        let base = gauss_legendre::<T>(self.nodes_per_panel);
        let h = (b - a) / T::from_count(self.panels);
        let half = h * T::lit(0.5);
        let mut out = Vec::with_capacity(self.panels * base.len());
        for p in 0..self.panels {
            let mid = a + h * (T::from_count(p) + T::lit(0.5));
            out.extend(base.iter().map(|&(x, w)| (mid + half * x, half * w)));
        }
        out
    }

    pub fn integrate<T: Real>(&self, a: T, b: T, f: impl Fn(T) -> T) -> T {
        self.nodes(a, b).into_iter().map(|(x, w)| w * f(x)).sum()
    }

    pub fn integrate_complex<T: Real>(&self, a: T, b: T, f: impl Fn(T) -> Complex<T>) -> Complex<T> {
        self.nodes(a, b).into_iter().map(|(x, w)| f(x) * w).sum()
    }

    /// `∫_a^b w(t) M(t) dt` for a matrix-valued integrand given as a
    /// scalar weight times a matrix.
    pub fn integrate_matrix<T: Real>(
        &self,
        dim: usize,
        a: T,
        b: T,
        f: impl Fn(T) -> Result<(Complex<T>, ComplexMatrix<T>)> + Sync,
    ) -> Result<ComplexMatrix<T>> {
        use rayon::prelude::*;
        let terms = self
            .nodes(a, b)
            .into_par_iter()
            .map(|(x, w)| f(x).map(|(s, m)| (s * w, m)))
            .collect::<Result<Vec<_>>>()?;
        let mut acc = ComplexMatrix::zeros(dim);
        for (s, m) in &terms {
            acc.axpy(*s, m);
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn nodes_and_weights_of_small_rules() {
        let r2 = gauss_legendre::<f64>(2);
        assert_relative_eq!(r2[1].0, 1.0 / 3f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(r2[0].1, 1.0, epsilon = 1e-15);
        let r3 = gauss_legendre::<f64>(3);
        assert_eq!(r3[1].0, 0.0);
        assert_relative_eq!(r3[1].1, 8.0 / 9.0, epsilon = 1e-15);
        assert_relative_eq!(r3[2].0, (0.6f64).sqrt(), epsilon = 1e-15);
        for n in 1..=20 {
            let s: f64 = gauss_legendre::<f64>(n).iter().map(|p| p.1).sum();
            assert_relative_eq!(s, 2.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn exact_for_monomials_up_to_degree() {
        for nodes in 1..=10 {
            let q = QuadratureRule::new(3, nodes).unwrap();
            for deg in 0..=q.exact_degree() {
                let got = q.integrate(0.0f64, 1.5, |x| x.powi(deg as i32));
                let exact = 1.5f64.powi(deg as i32 + 1) / (deg as f64 + 1.0);
                assert_relative_eq!(got, exact, max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn reversed_interval_changes_sign() {
        let q = QuadratureRule::new(4, 5).unwrap();
        let f = |x: f64| x.exp();
        assert_relative_eq!(q.integrate(0.0, 2.0, f), -q.integrate(2.0, 0.0, f), epsilon = 1e-13);
    }

    #[test]
    fn default_panel_count() {
        assert_eq!(QuadratureRule::for_interval(1.0f64, 1.0).panels, 16);
        assert_eq!(QuadratureRule::for_interval(5.0f64, 2.0).panels, 60);
        assert_eq!(QuadratureRule::for_interval(5.0f64, 2.0).refined().panels, 120);
    }

    #[test]
    fn rejects_empty_rules() {
        assert!(QuadratureRule::new(0, 8).is_err());
        assert!(QuadratureRule::new(4, 0).is_err());
    }
}
