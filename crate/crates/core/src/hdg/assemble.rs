//! Element-by-element assembly of the HDG block system.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::basis::{element_dim, facet_basis, facet_dim, ElementBasis};
use super::quadrature::{segment_rule, triangle_rule};
use super::{ElementMap, ProblemSpec};
use crate::error::{Error, Result};
use crate::la::CsrMatrix;
use crate::mesh::{BoundaryTag, SpaceTimeMesh};
use crate::Point;

/// `|â_n|` below which a facet of a pure-advection problem is treated as
/// lying along a characteristic.
pub const CHARACTERISTIC_TOL: f64 = 1e-12;

/// How a facet enters a (sub)domain system.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FacetRole {
    /// Shared by two elements of the subdomain.
    Interior,
    /// On `∂E_N`, data from the problem.
    Neumann,
    /// On `∂E_D`; no trace unknowns.
    Dirichlet,
    /// Between the subdomain and the rest of the mesh. Treated as Neumann
    /// with caller-supplied data (slab interfaces).
    Interface,
}

impl FacetRole {
    fn has_unknowns(self) -> bool {
        !matches!(self, FacetRole::Dirichlet)
    }
}

/// Dense local blocks of one element. Columns of `b` (rows of `c`) are
/// grouped by local facet: local facet `l` owns `l*nf .. (l+1)*nf`.
#[derive(Clone, Debug)]
pub struct ElementBlocks {
    pub element: usize,
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub f: DVector<f64>,
    /// Facet block index of each local facet, `None` on Dirichlet facets.
    pub facets: [Option<usize>; 3],
}

/// The system `[A B; C D][U; Λ] = [F; G]` of one (sub)domain.
#[derive(Clone, Debug)]
pub struct BlockSystem {
    pub p: usize,
    pub elements: Vec<ElementBlocks>,
    /// Mesh facet id of each facet block.
    pub facet_ids: Vec<usize>,
    pub roles: Vec<FacetRole>,
    pub d: CsrMatrix,
    pub g: Vec<f64>,
    pub element_block_size: usize,
    pub facet_block_size: usize,
}

/// Interface data `g(facet, x, n)` for [`FacetRole::Interface`] facets.
pub type InterfaceData<'a> = &'a (dyn Fn(usize, Point, Point) -> f64 + Sync);

/// Assembles the all-at-once system over the whole mesh.
pub fn assemble_blocks(mesh: &SpaceTimeMesh, p: usize, prob: &ProblemSpec) -> Result<BlockSystem> {
    let all: Vec<usize> = (0..mesh.num_elements()).collect();
    assemble_subdomain(mesh, p, prob, &all, None)
}

/// Assembles the system restricted to `elements`. Facets between the subset
/// and the rest of the mesh become Neumann facets carrying `interface` data.
pub fn assemble_subdomain(
    mesh: &SpaceTimeMesh,
    p: usize,
    prob: &ProblemSpec,
    elements: &[usize],
    interface: Option<InterfaceData<'_>>,
) -> Result<BlockSystem> {
    if !(1..=3).contains(&p) {
        return Err(Error::InvalidArgument(format!(
            "polynomial degree {p} not in 1..=3"
        )));
    }
    let mut member = vec![false; mesh.num_elements()];
    for &k in elements {
        *member
            .get_mut(k)
            .ok_or_else(|| Error::InvalidArgument(format!("element {k} out of range")))? = true;
    }
    // classify facets touched by the subdomain
    let mut role_of: Vec<Option<FacetRole>> = vec![None; mesh.num_facets()];
    for &k in elements {
        for &fid in &mesh.elements()[k].facets {
            let f = &mesh.facets()[fid];
            let role = if f.is_boundary() {
                match f.tag.ok_or(Error::UntaggedBoundary { facet: fid })? {
                    BoundaryTag::Dirichlet => FacetRole::Dirichlet,
                    _ => FacetRole::Neumann,
                }
            } else if f.elements.iter().all(|&e| member[e]) {
                FacetRole::Interior
            } else {
                if interface.is_none() {
                    return Err(Error::InvalidArgument(format!(
                        "facet {fid} cuts the subdomain but no interface data was given"
                    )));
                }
                FacetRole::Interface
            };
            role_of[fid] = Some(role);
        }
    }
    let mut block_of = vec![None; mesh.num_facets()];
    let mut facet_ids = Vec::new();
    let mut roles = Vec::new();
    for (fid, r) in role_of.iter().enumerate() {
        if let Some(r) = r {
            if r.has_unknowns() {
                block_of[fid] = Some(facet_ids.len());
                facet_ids.push(fid);
                roles.push(*r);
            }
        }
    }

    let ne = element_dim(p);
    let nf = facet_dim(p);
    let basis = ElementBasis::new(p);
    let vol = triangle_rule(2 * p + 2);
    let seg = segment_rule(2 * p + 2);
    let alpha = prob.alpha(p);
    let nu = prob.nu;

    type Local = (ElementBlocks, Vec<(usize, DMatrix<f64>, DVector<f64>)>);
    let locals: Vec<Local> = elements
        .par_iter()
        .map(|&k| {
            let map = ElementMap::new(mesh, k);
            let h = mesh.element_geometry(k).h;
            let pen = nu * alpha / h;
            let mut a = DMatrix::zeros(ne, ne);
            let mut b = DMatrix::zeros(ne, 3 * nf);
            let mut c = DMatrix::zeros(3 * nf, ne);
            let mut f = DVector::zeros(ne);
            let mut vals = vec![0.0; ne];
            let mut rg = vec![[0.0; 2]; ne];
            let mut g = vec![[0.0; 2]; ne];
            let mut psi = vec![0.0; nf];

            for (xi, wq) in vol.points.iter().zip(&vol.weights) {
                let x = map.to_physical(*xi);
                let w = wq * map.det;
                basis.eval(*xi, &mut vals, &mut rg);
                for (gi, r) in g.iter_mut().zip(&rg) {
                    *gi = map.gradient(*r);
                }
                let av = (prob.velocity)(x);
                let src = (prob.source)(x);
                for i in 0..ne {
                    let adv = g[i][0] + av * g[i][1];
                    for j in 0..ne {
                        a[(i, j)] += w * (-vals[j] * adv + nu * g[j][1] * g[i][1]);
                    }
                    f[i] += w * src * vals[i];
                }
            }

            let e = &mesh.elements()[k];
            let mut facets = [None; 3];
            let mut facet_terms = Vec::new();
            for l in 0..3 {
                let fid = e.facets[l];
                let facet = &mesh.facets()[fid];
                let n = facet.normals[facet.local_index(k).expect("element adjacent to its facet")];
                let role = role_of[fid].expect("classified above");
                let [p0, p1] = facet.vertices.map(|v| mesh.vertices()[v]);
                let mut dl = DMatrix::zeros(nf, nf);
                let mut gl = DVector::zeros(nf);
                for (s, wq) in seg.points.iter().zip(&seg.weights) {
                    let x = [p0[0] + s * (p1[0] - p0[0]), p0[1] + s * (p1[1] - p0[1])];
                    let w = wq * facet.length;
                    let xi = map.to_reference(x);
                    basis.eval(xi, &mut vals, &mut rg);
                    for (gi, r) in g.iter_mut().zip(&rg) {
                        *gi = map.gradient(*r);
                    }
                    facet_basis(p, *s, &mut psi);
                    let an = prob.normal_velocity(x, n);
                    let (up, dn) = (an.max(0.0), an.min(0.0));
                    let nx = n[1];
                    let pen = pen * prob.penalty_weight.factor(n);
                    for i in 0..ne {
                        for j in 0..ne {
                            a[(i, j)] += w
                                * ((up + pen) * vals[j] * vals[i]
                                    - nu * g[j][1] * nx * vals[i]
                                    - nu * vals[j] * g[i][1] * nx);
                        }
                    }
                    if role == FacetRole::Dirichlet {
                        let gd = (prob.dirichlet)(x);
                        for i in 0..ne {
                            f[i] -= w * ((dn - pen) * gd * vals[i] + nu * gd * g[i][1] * nx);
                        }
                        continue;
                    }
                    if nu == 0.0 && an.abs() <= CHARACTERISTIC_TOL {
                        // nothing crosses a facet along a characteristic, so
                        // λ is fixed as the projection of the mean trace
                        let share = 0.5 * w;
                        for m in 0..nf {
                            for i in 0..ne {
                                c[(l * nf + m, i)] -= share * vals[i] * psi[m];
                            }
                            for q in 0..nf {
                                dl[(m, q)] += share * psi[q] * psi[m];
                            }
                        }
                    } else {
                        for m in 0..nf {
                            for i in 0..ne {
                                b[(i, l * nf + m)] += w
                                    * ((dn - pen) * psi[m] * vals[i] + nu * psi[m] * g[i][1] * nx);
                                c[(l * nf + m, i)] += w
                                    * (-(up + pen) * vals[i] * psi[m] + nu * g[i][1] * nx * psi[m]);
                            }
                            for q in 0..nf {
                                dl[(m, q)] -= w * (dn - pen) * psi[q] * psi[m];
                            }
                        }
                    }
                    let data = match role {
                        FacetRole::Neumann => Some((prob.neumann)(x, n)),
                        FacetRole::Interface => Some(interface.expect("checked above")(fid, x, n)),
                        _ => None,
                    };
                    if let Some(gv) = data {
                        for m in 0..nf {
                            gl[m] += w * gv * psi[m];
                            for q in 0..nf {
                                dl[(m, q)] += w * up * psi[q] * psi[m];
                            }
                        }
                    }
                }
                if role.has_unknowns() {
                    let blk = block_of[fid].expect("facet with unknowns has a block");
                    facets[l] = Some(blk);
                    facet_terms.push((blk, dl, gl));
                }
            }
            (
                ElementBlocks {
                    element: k,
                    a,
                    b,
                    c,
                    f,
                    facets,
                },
                facet_terms,
            )
        })
        .collect();

    let nl = facet_ids.len() * nf;
    let mut triplets = Vec::with_capacity(facet_ids.len() * nf * nf * 2);
    let mut g = vec![0.0; nl];
    let mut blocks = Vec::with_capacity(locals.len());
    for (eb, terms) in locals {
        for (blk, dl, gl) in terms {
            for m in 0..nf {
                g[blk * nf + m] += gl[m];
                for q in 0..nf {
                    triplets.push((blk * nf + m, blk * nf + q, dl[(m, q)]));
                }
            }
        }
        blocks.push(eb);
    }
    let d = CsrMatrix::from_triplets(nl, nl, &triplets).with_block_size(nf)?;
    Ok(BlockSystem {
        p,
        elements: blocks,
        facet_ids,
        roles,
        d,
        g,
        element_block_size: ne,
        facet_block_size: nf,
    })
}

impl BlockSystem {
    pub fn num_element_dofs(&self) -> usize {
        self.elements.len() * self.element_block_size
    }

    pub fn num_facet_dofs(&self) -> usize {
        self.facet_ids.len() * self.facet_block_size
    }

    fn element_triplets(&self, which: char) -> Vec<(usize, usize, f64)> {
        let (ne, nf) = (self.element_block_size, self.facet_block_size);
        let mut t = Vec::new();
        for (k, eb) in self.elements.iter().enumerate() {
            match which {
                'a' => {
                    for i in 0..ne {
                        for j in 0..ne {
                            t.push((k * ne + i, k * ne + j, eb.a[(i, j)]));
                        }
                    }
                }
                _ => {
                    for (l, blk) in eb.facets.iter().enumerate() {
                        let Some(blk) = blk else { continue };
                        for i in 0..ne {
                            for m in 0..nf {
                                if which == 'b' {
                                    t.push((k * ne + i, blk * nf + m, eb.b[(i, l * nf + m)]));
                                } else {
                                    t.push((blk * nf + m, k * ne + i, eb.c[(l * nf + m, i)]));
                                }
                            }
                        }
                    }
                }
            }
        }
        t
    }

    /// Element-block-diagonal `A`.
    pub fn a_matrix(&self) -> CsrMatrix {
        let n = self.num_element_dofs();
        CsrMatrix::from_triplets(n, n, &self.element_triplets('a'))
            .with_block_size(self.element_block_size)
            .expect("block size divides")
    }

    pub fn b_matrix(&self) -> CsrMatrix {
        CsrMatrix::from_triplets(
            self.num_element_dofs(),
            self.num_facet_dofs(),
            &self.element_triplets('b'),
        )
    }

    pub fn c_matrix(&self) -> CsrMatrix {
        CsrMatrix::from_triplets(
            self.num_facet_dofs(),
            self.num_element_dofs(),
            &self.element_triplets('c'),
        )
    }

    pub fn f_vector(&self) -> Vec<f64> {
        self.elements
            .iter()
            .flat_map(|e| e.f.iter().copied())
            .collect()
    }

    /// Dense monolithic matrix and right-hand side, unknowns ordered `[U; Λ]`.
    /// Intended for small test oracles.
    pub fn monolithic_dense(&self) -> (DMatrix<f64>, DVector<f64>) {
        let (nu, nl) = (self.num_element_dofs(), self.num_facet_dofs());
        let mut m = DMatrix::zeros(nu + nl, nu + nl);
        for (i, j, v) in self.element_triplets('a') {
            m[(i, j)] += v;
        }
        for (i, j, v) in self.element_triplets('b') {
            m[(i, nu + j)] += v;
        }
        for (i, j, v) in self.element_triplets('c') {
            m[(nu + i, j)] += v;
        }
        for i in 0..nl {
            for (j, v) in self.d.row(i) {
                m[(nu + i, nu + j)] += v;
            }
        }
        let mut rhs = DVector::zeros(nu + nl);
        for (i, v) in self.f_vector().into_iter().enumerate() {
            rhs[i] = v;
        }
        for (i, v) in self.g.iter().enumerate() {
            rhs[nu + i] = *v;
        }
        (m, rhs)
    }
}
