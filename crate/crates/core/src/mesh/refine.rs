//! Newest-vertex bisection with conforming closure.

use std::collections::{HashMap, HashSet};

use super::{edge_key, BoundarySide, BoundaryTag, RefinementRecord, SpaceTimeMesh};
use crate::error::{Error, Result};

struct Splitter<'a> {
    marked: &'a HashSet<(usize, usize)>,
    vertices: Vec<crate::Point>,
    midpoints: HashMap<(usize, usize), usize>,
    out: Vec<([usize; 3], Option<usize>, u32)>,
    budget: usize,
}

impl Splitter<'_> {
    fn midpoint(&mut self, a: usize, b: usize) -> usize {
        let key = edge_key(a, b);
        if let Some(&m) = self.midpoints.get(&key) {
            return m;
        }
        let (p, q) = (self.vertices[a], self.vertices[b]);
        self.vertices
            .push([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
        let m = self.vertices.len() - 1;
        self.midpoints.insert(key, m);
        m
    }

    fn split(&mut self, tri: [usize; 3], slab: Option<usize>, generation: u32) -> Result<()> {
        let [v0, v1, v2] = tri;
        if !self.marked.contains(&edge_key(v1, v2)) {
            if self.out.len() >= self.budget {
                return Err(Error::RefinementBudget {
                    budget: self.budget,
                });
            }
            self.out.push((tri, slab, generation));
            return Ok(());
        }
        let m = self.midpoint(v1, v2);
        self.split([m, v0, v1], slab, generation + 1)?;
        self.split([m, v2, v0], slab, generation + 1)
    }
}

impl SpaceTimeMesh {
    /// Bisects every marked element at least once, then bisects further until
    /// the mesh is conforming again. Fails if the refined mesh would exceed
    /// `budget` elements.
    pub fn bisect_refine(&self, marked: &[usize], budget: usize) -> Result<SpaceTimeMesh> {
        let mut edges: HashSet<(usize, usize)> = HashSet::new();
        for &k in marked {
            let e = self.elements.get(k).ok_or_else(|| {
                Error::InvalidArgument(format!("marked element {k} does not exist"))
            })?;
            edges.insert(edge_key(e.vertices[1], e.vertices[2]));
        }
        // closure: an element touching a marked edge must split its own
        // refinement edge first
        loop {
            let mut changed = false;
            for e in &self.elements {
                let refinement = edge_key(e.vertices[1], e.vertices[2]);
                if edges.contains(&refinement) {
                    continue;
                }
                let touches = (0..3)
                    .any(|l| edges.contains(&edge_key(e.vertices[l], e.vertices[(l + 1) % 3])));
                if touches {
                    edges.insert(refinement);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }

        let mut sp = Splitter {
            marked: &edges,
            vertices: self.vertices.clone(),
            midpoints: HashMap::new(),
            out: Vec::with_capacity(self.elements.len() + 4 * edges.len()),
            budget,
        };
        let mut tree = Vec::new();
        for (k, e) in self.elements.iter().enumerate() {
            let start = sp.out.len();
            sp.split(e.vertices, e.slab, e.generation)?;
            if sp.out.len() - start > 1 {
                tree.push(RefinementRecord {
                    parent: k,
                    children: (start..sp.out.len()).collect(),
                });
            }
        }

        let mut sides: HashMap<(usize, usize), BoundarySide> = HashMap::new();
        let mut tags: HashMap<(usize, usize), BoundaryTag> = HashMap::new();
        for f in self.facets.iter().filter(|f| f.is_boundary()) {
            let key = (f.vertices[0], f.vertices[1]);
            let side = f.side.expect("boundary facets carry a side");
            let halves = match sp.midpoints.get(&key) {
                Some(&m) => vec![edge_key(key.0, m), edge_key(m, key.1)],
                None => vec![key],
            };
            for h in halves {
                sides.insert(h, side);
                if let Some(t) = f.tag {
                    tags.insert(h, t);
                }
            }
        }

        let slabs = self.num_slabs.map(|_| {
            sp.out
                .iter()
                .map(|(_, s, _)| s.expect("slab mesh"))
                .collect()
        });
        let tris = sp.out.iter().map(|(t, _, _)| *t).collect();
        let generations = sp.out.iter().map(|(_, _, g)| *g).collect();
        let mut mesh =
            SpaceTimeMesh::from_parts(sp.vertices, tris, slabs, generations, &sides, &tags)?;
        mesh.num_slabs = self.num_slabs;
        mesh.refinement_tree = tree;
        Ok(mesh)
    }
}
