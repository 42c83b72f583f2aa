//! Discrete element fields, projections and space-time L² errors.

use super::basis::{element_dim, ElementBasis};
use super::quadrature::{triangle_rule, Rule};
use super::ElementMap;
use crate::mesh::SpaceTimeMesh;
use crate::Point;

/// Piecewise `P_p` field with coefficients stored per mesh element.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteSolution {
    pub p: usize,
    /// `coeffs[k * dim + i]` multiplies basis function `i` on element `k`.
    pub coeffs: Vec<f64>,
}

impl DiscreteSolution {
    pub fn zeros(mesh: &SpaceTimeMesh, p: usize) -> Self {
        DiscreteSolution {
            p,
            coeffs: vec![0.0; mesh.num_elements() * element_dim(p)],
        }
    }

    pub fn dim(&self) -> usize {
        element_dim(self.p)
    }

    pub fn element(&self, k: usize) -> &[f64] {
        let n = self.dim();
        &self.coeffs[k * n..(k + 1) * n]
    }

    pub fn element_mut(&mut self, k: usize) -> &mut [f64] {
        let n = self.dim();
        &mut self.coeffs[k * n..(k + 1) * n]
    }

    /// Value and space-time gradient on element `k` at physical point `x`.
    pub fn eval(&self, basis: &ElementBasis, map: &ElementMap, k: usize, x: Point) -> (f64, Point) {
        let n = self.dim();
        let mut v = vec![0.0; n];
        let mut g = vec![[0.0; 2]; n];
        basis.eval(map.to_reference(x), &mut v, &mut g);
        let c = self.element(k);
        let mut val = 0.0;
        let mut rg = [0.0; 2];
        for i in 0..n {
            val += c[i] * v[i];
            rg[0] += c[i] * g[i][0];
            rg[1] += c[i] * g[i][1];
        }
        (val, map.gradient(rg))
    }
}

/// Elementwise L² projection of `f` onto `P_p`.
pub fn project_l2(mesh: &SpaceTimeMesh, p: usize, f: &dyn Fn(Point) -> f64) -> DiscreteSolution {
    let basis = ElementBasis::new(p);
    let rule = triangle_rule(2 * p + 6);
    let mut out = DiscreteSolution::zeros(mesh, p);
    let n = basis.dim();
    for k in 0..mesh.num_elements() {
        let map = ElementMap::new(mesh, k);
        let c = out.element_mut(k);
        for (xi, w) in rule.points.iter().zip(&rule.weights) {
            let v = basis.values(*xi);
            let fx = f(map.to_physical(*xi));
            // the basis is orthonormal on the reference element, so the
            // physical mass matrix is det·I
            for i in 0..n {
                c[i] += w * fx * v[i];
            }
        }
    }
    out
}

fn level(line: [f64; 3], x: Point) -> f64 {
    line[0] + line[1] * x[0] + line[2] * x[1]
}

/// Splits a triangle (reference coordinates) by the sign of `phi`.
fn split_by_line(tri: [[f64; 2]; 3], phi: [f64; 3]) -> Vec<[[f64; 2]; 3]> {
    if phi.iter().all(|&v| v >= 0.0) || phi.iter().all(|&v| v <= 0.0) {
        return vec![tri];
    }
    let mut out = Vec::new();
    for sign in [1.0, -1.0] {
        let mut poly: Vec<[f64; 2]> = Vec::new();
        for i in 0..3 {
            let j = (i + 1) % 3;
            let (a, b) = (sign * phi[i], sign * phi[j]);
            if a >= 0.0 {
                poly.push(tri[i]);
            }
            if (a > 0.0 && b < 0.0) || (a < 0.0 && b > 0.0) {
                let s = a / (a - b);
                poly.push([
                    tri[i][0] + s * (tri[j][0] - tri[i][0]),
                    tri[i][1] + s * (tri[j][1] - tri[i][1]),
                ]);
            }
        }
        for t in 1..poly.len().saturating_sub(1) {
            out.push([poly[0], poly[t], poly[t + 1]]);
        }
    }
    out
}

fn integrate_sq_error(
    basis: &ElementBasis,
    rule: &Rule<[f64; 2]>,
    map: &ElementMap,
    c: &[f64],
    sub: [[f64; 2]; 3],
    exact: &dyn Fn(Point) -> f64,
) -> f64 {
    let j = [
        [sub[1][0] - sub[0][0], sub[2][0] - sub[0][0]],
        [sub[1][1] - sub[0][1], sub[2][1] - sub[0][1]],
    ];
    let det = (j[0][0] * j[1][1] - j[0][1] * j[1][0]).abs();
    let mut acc = 0.0;
    for (r, w) in rule.points.iter().zip(&rule.weights) {
        let xi = [
            sub[0][0] + j[0][0] * r[0] + j[0][1] * r[1],
            sub[0][1] + j[1][0] * r[0] + j[1][1] * r[1],
        ];
        let v = basis.values(xi);
        let uh: f64 = c.iter().zip(&v).map(|(a, b)| a * b).sum();
        let e = exact(map.to_physical(xi)) - uh;
        acc += w * det * e * e;
    }
    acc * map.det
}

/// `‖u − u_h‖` over the space-time domain. Elements cut by `discontinuity`
/// are split along it so that a jump in `exact` is integrated exactly.
pub fn st_l2_error(
    mesh: &SpaceTimeMesh,
    uh: &DiscreteSolution,
    exact: &dyn Fn(Point) -> f64,
    discontinuity: Option<[f64; 3]>,
) -> f64 {
    let basis = ElementBasis::new(uh.p);
    let rule = triangle_rule(2 * uh.p + 6);
    let reference = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
    let mut total = 0.0;
    for k in 0..mesh.num_elements() {
        let map = ElementMap::new(mesh, k);
        let subs = match discontinuity {
            Some(line) => {
                let phi = mesh.element_vertices(k).map(|x| level(line, x));
                split_by_line(reference, phi)
            }
            None => vec![reference],
        };
        for sub in subs {
            total += integrate_sq_error(&basis, &rule, &map, uh.element(k), sub, exact);
        }
    }
    total.max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{DeformationMap, MeshMode, SpaceTimeBox};

    fn mesh() -> SpaceTimeMesh {
        SpaceTimeMesh::build(4, 3, SpaceTimeBox::unit(), MeshMode::AllAtOnce)
            .unwrap()
            .deform(&DeformationMap::new(0.1))
            .unwrap()
    }

    #[test]
    fn interpolant_of_polynomial_has_zero_error() {
        let m = mesh();
        for p in 1..=3 {
            let cross = if p >= 2 { 1.0 } else { 0.0 };
            let f = move |x: Point| (1.0 + x[0] - 2.0 * x[1]).powi(p as i32) + cross * x[0] * x[1];
            let uh = project_l2(&m, p, &f);
            assert!(st_l2_error(&m, &uh, &f, None) < 1e-12, "p={p}");
        }
    }

    #[test]
    fn unit_error_on_unit_box() {
        let m = SpaceTimeMesh::build(3, 3, SpaceTimeBox::unit(), MeshMode::AllAtOnce).unwrap();
        let uh = DiscreteSolution::zeros(&m, 2);
        let e = st_l2_error(&m, &uh, &|_| 1.0, None);
        assert!((e - 1.0).abs() < 1e-13);
    }

    #[test]
    fn step_error_is_exact_with_split() {
        // u = 1 where x < t; measure of that set in the unit box is 1/2
        let m = SpaceTimeMesh::build(3, 2, SpaceTimeBox::unit(), MeshMode::AllAtOnce).unwrap();
        let uh = DiscreteSolution::zeros(&m, 1);
        let step = |x: Point| if x[1] < x[0] { 1.0 } else { 0.0 };
        let e = st_l2_error(&m, &uh, &step, Some([0.0, 1.0, -1.0]));
        assert!((e * e - 0.5).abs() < 1e-13, "{e}");
    }

    #[test]
    fn split_preserves_area() {
        let tri = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let parts = split_by_line(tri, [-0.3, 0.5, 0.2]);
        assert_eq!(parts.len(), 3);
        let area: f64 = parts
            .iter()
            .map(|t| {
                0.5 * ((t[1][0] - t[0][0]) * (t[2][1] - t[0][1])
                    - (t[2][0] - t[0][0]) * (t[1][1] - t[0][1]))
                    .abs()
            })
            .sum();
        assert!((area - 0.5).abs() < 1e-15);
    }
}
