//! Conforming simplicial space-time meshes in (1+1) dimensions.
//!
//! Vertices are `(t, x)` pairs. Every triangle is stored counter-clockwise
//! in the `(t, x)` plane with its newest vertex first, so the refinement
//! edge of element `[v0, v1, v2]` is `(v1, v2)`. Local facet `l` of an
//! element is the edge opposite local vertex `l`.

mod io;
mod refine;

use std::collections::HashMap;

pub use io::{read_mesh, write_mesh};

use crate::error::{Error, Result};
use crate::Point;

/// Geometric position of a boundary facet on the reference box.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundarySide {
    /// `t = t0`.
    Initial,
    /// `t = tN`.
    Final,
    /// `x = x_lo`.
    Lower,
    /// `x = x_hi`.
    Upper,
}

impl BoundarySide {
    pub fn name(self) -> &'static str {
        match self {
            BoundarySide::Initial => "initial",
            BoundarySide::Final => "final",
            BoundarySide::Lower => "lower",
            BoundarySide::Upper => "upper",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "initial" => BoundarySide::Initial,
            "final" => BoundarySide::Final,
            "lower" => BoundarySide::Lower,
            "upper" => BoundarySide::Upper,
            _ => return None,
        })
    }
}

/// Boundary condition role of a boundary facet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundaryTag {
    Dirichlet,
    /// Part of the Neumann boundary where the inflow-type condition
    /// `-ζ u â_n + ν ∂u/∂n = g_N` is imposed (includes the initial surface).
    NeumannInflowLike,
    /// The final-time surface, treated as Neumann outflow.
    Final,
}

impl BoundaryTag {
    pub fn name(self) -> &'static str {
        match self {
            BoundaryTag::Dirichlet => "dirichlet",
            BoundaryTag::NeumannInflowLike => "neumann",
            BoundaryTag::Final => "final",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "dirichlet" => BoundaryTag::Dirichlet,
            "neumann" => BoundaryTag::NeumannInflowLike,
            "final" => BoundaryTag::Final,
            _ => return None,
        })
    }

    pub fn is_neumann(self) -> bool {
        !matches!(self, BoundaryTag::Dirichlet)
    }
}

/// Which spatial sides are Dirichlet; the time surfaces are always Neumann.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundaryRoles {
    pub lower: BoundaryTag,
    pub upper: BoundaryTag,
}

impl Default for BoundaryRoles {
    fn default() -> Self {
        BoundaryRoles {
            lower: BoundaryTag::Dirichlet,
            upper: BoundaryTag::Dirichlet,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshMode {
    SlabBySlab,
    AllAtOnce,
}

/// Axis-aligned reference box `[t0, tn] x [x_lo, x_hi]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpaceTimeBox {
    pub t0: f64,
    pub tn: f64,
    pub x_lo: f64,
    pub x_hi: f64,
}

impl SpaceTimeBox {
    pub fn unit() -> Self {
        SpaceTimeBox {
            t0: 0.0,
            tn: 1.0,
            x_lo: 0.0,
            x_hi: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Element {
    /// Counter-clockwise, newest vertex first.
    pub vertices: [usize; 3],
    /// Facet opposite each local vertex.
    pub facets: [usize; 3],
    pub slab: Option<usize>,
    /// Number of bisections since the initial mesh.
    pub generation: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Facet {
    /// Endpoints with `vertices[0] < vertices[1]`; this fixes the facet
    /// parametrization shared by both neighbors.
    pub vertices: [usize; 2],
    /// One or two adjacent elements.
    pub elements: Vec<usize>,
    /// Outward unit normal with respect to each adjacent element.
    pub normals: Vec<Point>,
    pub length: f64,
    pub side: Option<BoundarySide>,
    pub tag: Option<BoundaryTag>,
}

impl Facet {
    pub fn is_boundary(&self) -> bool {
        self.elements.len() == 1
    }

    /// Local position of `element` among the adjacent elements.
    pub fn local_index(&self, element: usize) -> Option<usize> {
        self.elements.iter().position(|&e| e == element)
    }

    pub fn other_element(&self, element: usize) -> Option<usize> {
        self.elements.iter().copied().find(|&e| e != element)
    }
}

/// Parent-to-children record of the most recent bisection pass.
#[derive(Clone, Debug, PartialEq)]
pub struct RefinementRecord {
    pub parent: usize,
    pub children: Vec<usize>,
}

/// Per-element geometric data.
#[derive(Clone, Debug, PartialEq)]
pub struct ElementGeometry {
    pub area: f64,
    /// Element diameter (longest edge).
    pub h: f64,
    /// Outward unit normal and length of each local facet.
    pub facets: [(Point, f64); 3],
}

#[derive(Clone, Debug)]
pub struct SpaceTimeMesh {
    vertices: Vec<Point>,
    elements: Vec<Element>,
    facets: Vec<Facet>,
    num_slabs: Option<usize>,
    refinement_tree: Vec<RefinementRecord>,
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
}

fn dist(a: Point, b: Point) -> f64 {
    ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt()
}

/// Outward normal of the directed edge `a -> b` of a counter-clockwise triangle.
fn outward_normal(a: Point, b: Point) -> Point {
    let l = dist(a, b);
    [(b[1] - a[1]) / l, -(b[0] - a[0]) / l]
}

impl SpaceTimeMesh {
    /// Builds a structured quad-split triangulation with `nx` cells in space
    /// and `nt` cells in time. Each cell is split along the diagonal from
    /// `(t_i, x_{j+1})` to `(t_{i+1}, x_j)`, which is the refinement edge of
    /// both halves.
    pub fn build(nx: usize, nt: usize, bx: SpaceTimeBox, mode: MeshMode) -> Result<Self> {
        if nx == 0 || nt == 0 {
            return Err(Error::InvalidArgument(format!(
                "need at least one cell per direction, got {nx}x{nt}"
            )));
        }
        if !(bx.tn > bx.t0) || !(bx.x_hi > bx.x_lo) {
            return Err(Error::InvalidArgument(format!("degenerate box {bx:?}")));
        }
        let mut vertices = Vec::with_capacity((nx + 1) * (nt + 1));
        for i in 0..=nt {
            let t = bx.t0 + (bx.tn - bx.t0) * i as f64 / nt as f64;
            for j in 0..=nx {
                let x = bx.x_lo + (bx.x_hi - bx.x_lo) * j as f64 / nx as f64;
                vertices.push([t, x]);
            }
        }
        let id = |i: usize, j: usize| i * (nx + 1) + j;
        let mut tris = Vec::with_capacity(2 * nx * nt);
        let mut slabs = Vec::with_capacity(2 * nx * nt);
        for i in 0..nt {
            for j in 0..nx {
                let (a, b, c, d) = (id(i, j), id(i, j + 1), id(i + 1, j), id(i + 1, j + 1));
                tris.push([a, c, b]);
                tris.push([d, b, c]);
                slabs.push(i);
                slabs.push(i);
            }
        }
        let slabs = match mode {
            MeshMode::SlabBySlab => Some(slabs),
            MeshMode::AllAtOnce => None,
        };
        let mut sides = HashMap::new();
        for j in 0..nx {
            sides.insert(edge_key(id(0, j), id(0, j + 1)), BoundarySide::Initial);
            sides.insert(edge_key(id(nt, j), id(nt, j + 1)), BoundarySide::Final);
        }
        for i in 0..nt {
            sides.insert(edge_key(id(i, 0), id(i + 1, 0)), BoundarySide::Lower);
            sides.insert(edge_key(id(i, nx), id(i + 1, nx)), BoundarySide::Upper);
        }
        let generations = vec![0; tris.len()];
        Self::from_parts(vertices, tris, slabs, generations, &sides, &HashMap::new())
    }

    /// Assembles a mesh from vertices and elements, building the facet list.
    /// `sides` must cover every boundary edge; `tags` is optional.
    pub(crate) fn from_parts(
        vertices: Vec<Point>,
        tris: Vec<[usize; 3]>,
        slabs: Option<Vec<usize>>,
        generations: Vec<u32>,
        sides: &HashMap<(usize, usize), BoundarySide>,
        tags: &HashMap<(usize, usize), BoundaryTag>,
    ) -> Result<Self> {
        let num_slabs = slabs.as_ref().map(|s| s.iter().max().map_or(0, |m| m + 1));
        let mut facet_of: HashMap<(usize, usize), usize> = HashMap::new();
        let mut facets: Vec<Facet> = Vec::new();
        let mut elements = Vec::with_capacity(tris.len());
        for (k, tri) in tris.iter().enumerate() {
            let mut fs = [0usize; 3];
            for (l, f) in fs.iter_mut().enumerate() {
                let (a, b) = (tri[(l + 1) % 3], tri[(l + 2) % 3]);
                let key = edge_key(a, b);
                let fid = *facet_of.entry(key).or_insert_with(|| {
                    facets.push(Facet {
                        vertices: [key.0, key.1],
                        elements: Vec::new(),
                        normals: Vec::new(),
                        length: 0.0,
                        side: None,
                        tag: None,
                    });
                    facets.len() - 1
                });
                if facets[fid].elements.len() == 2 {
                    return Err(Error::InvalidMesh(format!(
                        "edge {key:?} shared by more than two elements"
                    )));
                }
                facets[fid].elements.push(k);
                *f = fid;
            }
            elements.push(Element {
                vertices: *tri,
                facets: fs,
                slab: slabs.as_ref().map(|s| s[k]),
                generation: generations[k],
            });
        }
        for f in facets.iter_mut() {
            let key = (f.vertices[0], f.vertices[1]);
            if f.elements.len() == 1 {
                f.side = Some(*sides.get(&key).ok_or_else(|| {
                    Error::InvalidMesh(format!("boundary edge {key:?} has no side"))
                })?);
                f.tag = tags.get(&key).copied();
            }
        }
        let mut mesh = SpaceTimeMesh {
            vertices,
            elements,
            facets,
            num_slabs,
            refinement_tree: Vec::new(),
        };
        mesh.update_geometry()?;
        Ok(mesh)
    }

    fn update_geometry(&mut self) -> Result<()> {
        for (k, e) in self.elements.iter().enumerate() {
            let [a, b, c] = e.vertices.map(|v| self.vertices[v]);
            let area = signed_area(a, b, c);
            if !(area > 0.0) {
                return Err(Error::InvertedElement { element: k, area });
            }
        }
        for f in self.facets.iter_mut() {
            f.length = dist(self.vertices[f.vertices[0]], self.vertices[f.vertices[1]]);
            f.normals.clear();
        }
        for (k, e) in self.elements.iter().enumerate() {
            for l in 0..3 {
                let (a, b) = (e.vertices[(l + 1) % 3], e.vertices[(l + 2) % 3]);
                let n = outward_normal(self.vertices[a], self.vertices[b]);
                let f = &mut self.facets[e.facets[l]];
                debug_assert_eq!(f.elements[f.normals.len()], k);
                f.normals.push(n);
            }
        }
        Ok(())
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn num_facets(&self) -> usize {
        self.facets.len()
    }

    pub fn num_slabs(&self) -> Option<usize> {
        self.num_slabs
    }

    pub fn refinement_tree(&self) -> &[RefinementRecord] {
        &self.refinement_tree
    }

    pub fn element_vertices(&self, k: usize) -> [Point; 3] {
        self.elements[k].vertices.map(|v| self.vertices[v])
    }

    /// Elements of slab `n` in element order.
    pub fn slab_elements(&self, n: usize) -> Vec<usize> {
        (0..self.elements.len())
            .filter(|&k| self.elements[k].slab == Some(n))
            .collect()
    }

    pub fn element_geometry(&self, k: usize) -> ElementGeometry {
        let e = &self.elements[k];
        let p = self.element_vertices(k);
        let area = signed_area(p[0], p[1], p[2]);
        let mut h: f64 = 0.0;
        let facets = std::array::from_fn(|l| {
            let (a, b) = (p[(l + 1) % 3], p[(l + 2) % 3]);
            let len = dist(a, b);
            h = h.max(len);
            (outward_normal(a, b), len)
        });
        debug_assert!(e.facets.len() == 3);
        ElementGeometry { area, h, facets }
    }

    pub fn barycenter(&self, k: usize) -> Point {
        let p = self.element_vertices(k);
        [
            (p[0][0] + p[1][0] + p[2][0]) / 3.0,
            (p[0][1] + p[1][1] + p[2][1]) / 3.0,
        ]
    }

    pub fn facet_midpoint(&self, f: usize) -> Point {
        let [a, b] = self.facets[f].vertices.map(|v| self.vertices[v]);
        [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
    }

    /// Assigns boundary condition tags: the initial surface and Neumann
    /// spatial sides become `NeumannInflowLike`, the final surface `Final`,
    /// and the remaining spatial sides `Dirichlet`.
    pub fn classify_boundary(&mut self, roles: BoundaryRoles) {
        for f in self.facets.iter_mut().filter(|f| f.is_boundary()) {
            f.tag = Some(match f.side.expect("boundary facets carry a side") {
                BoundarySide::Initial => BoundaryTag::NeumannInflowLike,
                BoundarySide::Final => BoundaryTag::Final,
                BoundarySide::Lower => roles.lower,
                BoundarySide::Upper => roles.upper,
            });
        }
    }

    /// Maps every vertex through `d`, recomputes geometry, and revalidates.
    pub fn deform(&self, d: &DeformationMap) -> Result<Self> {
        let mut out = self.clone();
        for v in out.vertices.iter_mut() {
            *v = d.apply(*v);
        }
        out.update_geometry()?;
        out.validate()?;
        Ok(out)
    }

    /// Checks conformity, positive areas, antiparallel normals on interior
    /// facets, and the closed-normal identity on every element.
    pub fn validate(&self) -> Result<()> {
        const TOL: f64 = 1e-12;
        let bad = |m: String| Err(Error::InvalidMesh(m));
        let mut seen = HashMap::new();
        for (fid, f) in self.facets.iter().enumerate() {
            if seen.insert((f.vertices[0], f.vertices[1]), fid).is_some() {
                return bad(format!("facet {fid} duplicated"));
            }
            match f.elements.len() {
                1 if f.side.is_none() => return bad(format!("boundary facet {fid} has no side")),
                1 => {}
                2 => {
                    let (n0, n1) = (f.normals[0], f.normals[1]);
                    if (n0[0] + n1[0]).abs() > TOL || (n0[1] + n1[1]).abs() > TOL {
                        return bad(format!("normals on facet {fid} not antiparallel"));
                    }
                }
                n => return bad(format!("facet {fid} has {n} adjacent elements")),
            }
        }
        for (k, e) in self.elements.iter().enumerate() {
            let g = self.element_geometry(k);
            if !(g.area > 0.0) {
                return bad(format!("element {k} has area {}", g.area));
            }
            for l in 0..3 {
                let key = edge_key(e.vertices[(l + 1) % 3], e.vertices[(l + 2) % 3]);
                if seen.get(&key) != Some(&e.facets[l]) {
                    return bad(format!("element {k} edge {key:?} missing from facet list"));
                }
            }
            let mut closure = [0.0; 2];
            for (n, len) in g.facets {
                closure[0] += n[0] * len;
                closure[1] += n[1] * len;
            }
            let scale = g.h.max(1.0);
            if closure[0].abs() > TOL * scale || closure[1].abs() > TOL * scale {
                return bad(format!("normals of element {k} do not close"));
            }
        }
        if let Some(ns) = self.num_slabs {
            let (_, levels) = self.slab_levels(ns);
            for (k, e) in self.elements.iter().enumerate() {
                let n = e
                    .slab
                    .ok_or_else(|| Error::InvalidMesh(format!("element {k} has no slab")))?;
                let p = self.element_vertices(k);
                if p.iter()
                    .any(|v| v[0] < levels[n].0 - TOL || v[0] > levels[n].1 + TOL)
                {
                    return bad(format!("element {k} leaves slab {n}"));
                }
            }
        }
        Ok(())
    }

    /// Returns the per-slab element lists and `(t_min, t_max)` of each slab.
    pub fn slab_levels(&self, ns: usize) -> (Vec<Vec<usize>>, Vec<(f64, f64)>) {
        let mut lists = vec![Vec::new(); ns];
        let mut levels = vec![(f64::INFINITY, f64::NEG_INFINITY); ns];
        for (k, e) in self.elements.iter().enumerate() {
            if let Some(n) = e.slab {
                lists[n].push(k);
                for v in self.element_vertices(k) {
                    levels[n].0 = levels[n].0.min(v[0]);
                    levels[n].1 = levels[n].1.max(v[0]);
                }
            }
        }
        (lists, levels)
    }
}

/// Time-dependent domain deformation `x = x_u + A (1/2 - x_u) sin(2π t)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeformationMap {
    pub amplitude: f64,
}

impl DeformationMap {
    pub fn new(amplitude: f64) -> Self {
        DeformationMap { amplitude }
    }

    pub fn apply(&self, p: Point) -> Point {
        let [t, xu] = p;
        [
            t,
            xu + self.amplitude * (0.5 - xu) * (2.0 * std::f64::consts::PI * t).sin(),
        ]
    }
}
