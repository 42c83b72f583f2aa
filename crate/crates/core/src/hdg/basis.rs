//! Orthonormal modal bases on the reference triangle and segment.

use super::quadrature::legendre_with_derivative;

/// Number of basis functions of `P_p` on a triangle.
pub fn element_dim(p: usize) -> usize {
    (p + 1) * (p + 2) / 2
}

/// Number of basis functions of `P_p` on a segment.
pub fn facet_dim(p: usize) -> usize {
    p + 1
}

/// Basis of `P_p` on the reference triangle, orthonormal in `L²(T̂)`.
///
/// Built by Gram-Schmidt on the monomials `ξ^a η^b` (graded order) using
/// exact monomial integrals.
#[derive(Clone, Debug)]
pub struct ElementBasis {
    p: usize,
    exps: Vec<(i32, i32)>,
    /// Row `i` holds the monomial coefficients of basis function `i`.
    coeffs: Vec<Vec<f64>>,
}

fn monomial_integral(a: i32, b: i32) -> f64 {
    // a! b! / (a + b + 2)!
    let f = |n: i32| (1..=n).map(f64::from).product::<f64>();
    f(a) * f(b) / f(a + b + 2)
}

impl ElementBasis {
    pub fn new(p: usize) -> Self {
        let mut exps = Vec::new();
        for d in 0..=p as i32 {
            for b in 0..=d {
                exps.push((d - b, b));
            }
        }
        let n = exps.len();
        let gram: Vec<Vec<f64>> = exps
            .iter()
            .map(|&(a1, b1)| {
                exps.iter()
                    .map(|&(a2, b2)| monomial_integral(a1 + a2, b1 + b2))
                    .collect()
            })
            .collect();
        let inner = |x: &[f64], y: &[f64]| -> f64 {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    s += x[i] * gram[i][j] * y[j];
                }
            }
            s
        };
        let mut coeffs: Vec<Vec<f64>> = Vec::with_capacity(n);
        for k in 0..n {
            let mut c = vec![0.0; n];
            c[k] = 1.0;
            // two passes of modified Gram-Schmidt for stability
            for _ in 0..2 {
                for q in &coeffs {
                    let r = inner(&c, q);
                    for (ci, qi) in c.iter_mut().zip(q) {
                        *ci -= r * qi;
                    }
                }
            }
            let norm = inner(&c, &c).sqrt();
            c.iter_mut().for_each(|ci| *ci /= norm);
            coeffs.push(c);
        }
        ElementBasis { p, exps, coeffs }
    }

    pub fn degree(&self) -> usize {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    /// Values and reference gradients `(∂ξ, ∂η)` at `xi`.
    pub fn eval(&self, xi: [f64; 2], values: &mut [f64], grads: &mut [[f64; 2]]) {
        let n = self.exps.len();
        let pw = |x: f64, k: i32| if k <= 0 { 1.0 } else { x.powi(k) };
        let mut m = vec![0.0; n];
        let mut mx = vec![0.0; n];
        let mut my = vec![0.0; n];
        for (j, &(a, b)) in self.exps.iter().enumerate() {
            m[j] = pw(xi[0], a) * pw(xi[1], b);
            mx[j] = if a > 0 {
                a as f64 * pw(xi[0], a - 1) * pw(xi[1], b)
            } else {
                0.0
            };
            my[j] = if b > 0 {
                b as f64 * pw(xi[0], a) * pw(xi[1], b - 1)
            } else {
                0.0
            };
        }
        for (i, c) in self.coeffs.iter().enumerate() {
            let (mut v, mut gx, mut gy) = (0.0, 0.0, 0.0);
            for j in 0..n {
                v += c[j] * m[j];
                gx += c[j] * mx[j];
                gy += c[j] * my[j];
            }
            values[i] = v;
            grads[i] = [gx, gy];
        }
    }

    pub fn values(&self, xi: [f64; 2]) -> Vec<f64> {
        let mut v = vec![0.0; self.dim()];
        let mut g = vec![[0.0; 2]; self.dim()];
        self.eval(xi, &mut v, &mut g);
        v
    }
}

/// Scaled Legendre basis `√(2k+1) P_k(2s - 1)` on `[0, 1]`, orthonormal in `L²(0, 1)`.
pub fn facet_basis(p: usize, s: f64, out: &mut [f64]) {
    let x = 2.0 * s - 1.0;
    for (k, o) in out.iter_mut().enumerate().take(p + 1) {
        *o = ((2 * k + 1) as f64).sqrt() * legendre_with_derivative(k, x).0;
    }
}
