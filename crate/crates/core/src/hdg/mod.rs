//! Space-time HDG discretization of `â·∇̂u − ν u_xx = f`.
//!
//! Element unknowns live in `P_p(K)` with an orthonormal modal basis; facet
//! unknowns live in `P_p(S)` on every non-Dirichlet facet. Assembly produces
//! the four blocks `A, B, C, D` and the right-hand sides `F, G`; [`condense`]
//! eliminates the element unknowns.

mod assemble;
mod basis;
mod condense;
mod norms;
pub mod quadrature;

use std::sync::Arc;

pub use assemble::{assemble_blocks, assemble_subdomain, BlockSystem, ElementBlocks, FacetRole};
pub use basis::{element_dim, facet_basis, facet_dim, ElementBasis};
pub use condense::{condense, reconstruct, CondensedElement, CondensedSystem};
pub use norms::{project_l2, st_l2_error, DiscreteSolution};

use crate::mesh::{BoundaryRoles, DeformationMap, SpaceTimeBox, SpaceTimeMesh};
use crate::Point;

/// Scalar field over space-time.
pub type Field = Arc<dyn Fn(Point) -> f64 + Send + Sync>;
/// `[u, u_t, u_x, u_xx]` at a point.
pub type JetField = Arc<dyn Fn(Point) -> [f64; 4] + Send + Sync>;
/// Neumann datum evaluated at a point with the outward space-time normal.
pub type NeumannField = Arc<dyn Fn(Point, Point) -> f64 + Send + Sync>;

/// Coefficients, data and (optionally) the exact solution of one problem.
#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub nu: f64,
    /// Spatial velocity `a(t, x)`; the space-time velocity is `(1, a)`.
    pub velocity: Field,
    pub source: Field,
    pub dirichlet: Field,
    pub neumann: NeumannField,
    pub exact: Option<Field>,
    /// Hand-derived derivatives of `exact`.
    pub jet: Option<JetField>,
    /// Line `c0 + c1 t + c2 x = 0` across which `exact` jumps. Error
    /// integration splits elements along it.
    pub discontinuity: Option<[f64; 3]>,
    pub domain: SpaceTimeBox,
    pub roles: BoundaryRoles,
    pub deformation: Option<DeformationMap>,
    /// `α = penalty · p²`.
    pub penalty: f64,
    pub penalty_weight: PenaltyWeight,
}

/// Facet weighting of the diffusive penalty `ν α / h_K`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PenaltyWeight {
    /// Full penalty except on constant-time facets (`n_x = 0`). There is no
    /// diffusion in time, and a penalty there would override upwinding.
    #[default]
    SkipTimeFacets,
    /// Same penalty on every facet.
    Isotropic,
}

impl PenaltyWeight {
    pub fn factor(self, n: Point) -> f64 {
        match self {
            PenaltyWeight::SkipTimeFacets if n[1].abs() <= 1e-12 => 0.0,
            _ => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PenaltyWeight::SkipTimeFacets => "skip_time_facets",
            PenaltyWeight::Isotropic => "isotropic",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "skip_time_facets" => Some(PenaltyWeight::SkipTimeFacets),
            "isotropic" => Some(PenaltyWeight::Isotropic),
            _ => None,
        }
    }
}

impl std::fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("nu", &self.nu)
            .field("domain", &self.domain)
            .field("roles", &self.roles)
            .field("deformation", &self.deformation)
            .field("penalty", &self.penalty)
            .field("penalty_weight", &self.penalty_weight)
            .finish_non_exhaustive()
    }
}

impl ProblemSpec {
    pub fn alpha(&self, p: usize) -> f64 {
        self.penalty * (p * p) as f64
    }

    /// `â_n = n_t + a n_x` at `x` for the normal `n`.
    pub fn normal_velocity(&self, x: Point, n: Point) -> f64 {
        n[0] + (self.velocity)(x) * n[1]
    }
}

/// Upwind advective flux `½(â_n(u+λ) + |â_n|(u−λ))`.
pub fn advective_flux(u: f64, lambda: f64, an: f64) -> f64 {
    0.5 * (an * (u + lambda) + an.abs() * (u - lambda))
}

/// Interior-penalty diffusive flux `−ν ∂u/∂n + (να/h)(u − λ)`.
pub fn diffusive_flux(u: f64, lambda: f64, dudn: f64, nu: f64, alpha: f64, h: f64) -> f64 {
    -nu * dudn + nu * alpha / h * (u - lambda)
}

/// Affine map from the reference triangle onto a mesh element.
#[derive(Clone, Copy, Debug)]
pub struct ElementMap {
    pub origin: Point,
    pub jac: [[f64; 2]; 2],
    pub jinv: [[f64; 2]; 2],
    pub det: f64,
}

impl ElementMap {
    pub fn new(mesh: &SpaceTimeMesh, k: usize) -> Self {
        let [x0, x1, x2] = mesh.element_vertices(k);
        let jac = [
            [x1[0] - x0[0], x2[0] - x0[0]],
            [x1[1] - x0[1], x2[1] - x0[1]],
        ];
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        let jinv = [
            [jac[1][1] / det, -jac[0][1] / det],
            [-jac[1][0] / det, jac[0][0] / det],
        ];
        ElementMap {
            origin: x0,
            jac,
            jinv,
            det,
        }
    }

    pub fn to_physical(&self, xi: [f64; 2]) -> Point {
        [
            self.origin[0] + self.jac[0][0] * xi[0] + self.jac[0][1] * xi[1],
            self.origin[1] + self.jac[1][0] * xi[0] + self.jac[1][1] * xi[1],
        ]
    }

    pub fn to_reference(&self, x: Point) -> [f64; 2] {
        let d = [x[0] - self.origin[0], x[1] - self.origin[1]];
        [
            self.jinv[0][0] * d[0] + self.jinv[0][1] * d[1],
            self.jinv[1][0] * d[0] + self.jinv[1][1] * d[1],
        ]
    }

    /// Physical gradient `J^{-T} ∇_ξ`.
    pub fn gradient(&self, g: [f64; 2]) -> Point {
        [
            self.jinv[0][0] * g[0] + self.jinv[1][0] * g[1],
            self.jinv[0][1] * g[0] + self.jinv[1][1] * g[1],
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn advective_flux_examples() {
        assert_eq!(advective_flux(1.0, 0.0, 2.0), 2.0);
        assert_eq!(advective_flux(0.0, 1.0, -2.0), -2.0);
    }

    #[test]
    fn diffusive_flux_examples() {
        assert_eq!(diffusive_flux(0.3, 0.3, 0.0, 1.0, 10.0, 0.5), 0.0);
        assert_eq!(diffusive_flux(1.0, -2.0, 3.0, 0.0, 10.0, 0.5), 0.0);
        assert_eq!(diffusive_flux(1.0, 0.0, 0.0, 1.0, 10.0, 0.5), 20.0);
    }

    proptest! {
        #[test]
        fn fluxes_are_consistent(u in -10.0..10.0f64, an in -5.0..5.0f64, dudn in -5.0..5.0f64,
                                 nu in 0.0..1.0f64, h in 0.01..1.0f64) {
            prop_assert!((advective_flux(u, u, an) - an * u).abs() <= 1e-12 * (1.0 + (an * u).abs()));
            prop_assert!((diffusive_flux(u, u, dudn, nu, 10.0, h) + nu * dudn).abs() <= 1e-12);
        }

        #[test]
        fn upwind_selects_upstream(u in -10.0..10.0f64, l in -10.0..10.0f64, an in 0.01..5.0f64) {
            prop_assert!((advective_flux(u, l, an) - an * u).abs() < 1e-10);
            prop_assert!((advective_flux(u, l, -an) + an * l).abs() < 1e-10);
        }
    }

    #[test]
    fn element_map_roundtrip() {
        use crate::mesh::{MeshMode, SpaceTimeBox};
        let m = SpaceTimeMesh::build(3, 2, SpaceTimeBox::unit(), MeshMode::AllAtOnce)
            .unwrap()
            .deform(&DeformationMap::new(0.1))
            .unwrap();
        for k in 0..m.num_elements() {
            let map = ElementMap::new(&m, k);
            assert!((0.5 * map.det - m.element_geometry(k).area).abs() < 1e-14);
            let v = m.element_vertices(k);
            assert_eq!(map.to_reference(v[0]), [0.0, 0.0]);
            let r = map.to_reference(v[2]);
            assert!(r[0].abs() < 1e-12 && (r[1] - 1.0).abs() < 1e-12);
            let x = map.to_physical([0.2, 0.3]);
            let back = map.to_reference(x);
            assert!((back[0] - 0.2).abs() < 1e-13 && (back[1] - 0.3).abs() < 1e-13);
        }
    }
}
