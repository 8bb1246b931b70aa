//! Gauss–Legendre rules for integrating closed-form integrands.

use crate::scalar::Real;

#[derive(Debug, Clone)]
pub struct GaussLegendre<T: Real> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    /// `m`-point rule on `[-1, 1]`, nodes found by Newton iteration on `P_m`.
    pub fn new(m: usize) -> Self {
        assert!(m >= 1);
        let mut nodes = vec![T::zero(); m];
        let mut weights = vec![T::zero(); m];
        let mf = T::from_usize_lossy(m);
        let pi = T::pi();
        for i in 0..m.div_ceil(2) {
            let mut z = (pi * (T::from_usize_lossy(i) + T::lit(0.75)) / (mf + T::lit(0.5))).cos();
            let mut dp = T::one();
            for _ in 0..100 {
                let (p, d) = legendre(m, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() <= T::default_epsilon() * T::lit(4.0) {
                    let (_, d) = legendre(m, z);
                    dp = d;
                    break;
                }
            }
            let w = T::lit(2.0) / ((T::one() - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[m - 1 - i] = z;
            weights[i] = w;
            weights[m - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Composite rule over `[a, b]` split into `panels` equal panels.
    pub fn integrate<F, V>(&self, a: T, b: T, panels: usize, mut f: F) -> V
    where
        F: FnMut(T) -> V,
        V: std::ops::Add<Output = V> + std::ops::Mul<T, Output = V> + Default,
    {
        let panels = panels.max(1);
        let width = (b - a) / T::from_usize_lossy(panels);
        let half = width / T::lit(2.0);
        let mut acc = V::default();
        for p in 0..panels {
            let mid = a + width * (T::from_usize_lossy(p) + T::lit(0.5));
            for (z, w) in self.nodes.iter().zip(&self.weights) {
                acc = acc + f(mid + half * *z) * (*w * half);
            }
        }
        acc
    }
}

/// `(P_m(z), P_m'(z))`.
fn legendre<T: Real>(m: usize, z: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = z;
    for j in 2..=m {
        let jf = T::from_usize_lossy(j);
        let p2 = ((T::lit(2.0) * jf - T::one()) * z * p1 - (jf - T::one()) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    if m == 0 {
        return (T::one(), T::zero());
    }
    let d = T::from_usize_lossy(m) * (z * p1 - p0) / (z * z - T::one());
    (p1, d)
}
