//! Line-oriented mesh text format.
//!
//! ```text
//! sthdg-mesh 1
//! vertices <n>
//! <t> <x>                      (n lines, 17 significant digits)
//! elements <m> <slabbed 0|1>
//! <v0> <v1> <v2> <slab|-1>     (m lines, newest vertex first)
//! boundary <k>
//! <a> <b> <side> <tag|none>    (k lines)
//! ```

use std::collections::HashMap;
use std::io::{BufRead, Write};

use super::{BoundarySide, BoundaryTag, SpaceTimeMesh};
use crate::error::{Error, Result};

fn perr(message: impl Into<String>) -> Error {
    Error::Parse {
        what: "mesh".into(),
        message: message.into(),
    }
}

pub fn write_mesh<W: Write>(w: &mut W, mesh: &SpaceTimeMesh) -> Result<()> {
    let io = |e| Error::io("<mesh stream>", e);
    let mut s = String::new();
    s.push_str("sthdg-mesh 1\n");
    s.push_str(&format!("vertices {}\n", mesh.vertices.len()));
    for v in &mesh.vertices {
        s.push_str(&format!("{:.16e} {:.16e}\n", v[0], v[1]));
    }
    s.push_str(&format!(
        "elements {} {}\n",
        mesh.elements.len(),
        u8::from(mesh.num_slabs.is_some())
    ));
    for e in &mesh.elements {
        let slab = e.slab.map_or(-1, |n| n as i64);
        s.push_str(&format!(
            "{} {} {} {} {}\n",
            e.vertices[0], e.vertices[1], e.vertices[2], slab, e.generation
        ));
    }
    let boundary: Vec<_> = mesh.facets.iter().filter(|f| f.is_boundary()).collect();
    s.push_str(&format!("boundary {}\n", boundary.len()));
    for f in boundary {
        s.push_str(&format!(
            "{} {} {} {}\n",
            f.vertices[0],
            f.vertices[1],
            f.side.map_or("none", |x| x.name()),
            f.tag.map_or("none", |x| x.name())
        ));
    }
    w.write_all(s.as_bytes()).map_err(io)
}

fn header<'a>(line: Option<&'a str>, key: &str) -> Result<Vec<&'a str>> {
    let line = line.ok_or_else(|| perr(format!("missing '{key}' header")))?;
    let tok: Vec<&str> = line.split_whitespace().collect();
    if tok.first() != Some(&key) {
        return Err(perr(format!("expected '{key}', found '{line}'")));
    }
    Ok(tok)
}

fn num<T: std::str::FromStr>(s: Option<&&str>, what: &str) -> Result<T> {
    s.ok_or_else(|| perr(format!("missing {what}")))?
        .parse()
        .map_err(|_| perr(format!("bad {what}")))
}

pub fn read_mesh<R: BufRead>(r: R) -> Result<SpaceTimeMesh> {
    let text: Vec<String> = r
        .lines()
        .collect::<std::io::Result<_>>()
        .map_err(|e| Error::io("<mesh stream>", e))?;
    let mut lines = text
        .iter()
        .map(String::as_str)
        .filter(|l| !l.trim().is_empty());
    let magic = header(lines.next(), "sthdg-mesh")?;
    if magic.get(1) != Some(&"1") {
        return Err(perr("unsupported mesh format version"));
    }
    let nv: usize = num(header(lines.next(), "vertices")?.get(1), "vertex count")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let tok: Vec<&str> = lines
            .next()
            .ok_or_else(|| perr("truncated vertices"))?
            .split_whitespace()
            .collect();
        vertices.push([num(tok.first(), "t")?, num(tok.get(1), "x")?]);
    }
    let eh = header(lines.next(), "elements")?;
    let ne: usize = num(eh.get(1), "element count")?;
    let slabbed: u8 = num(eh.get(2), "slab flag")?;
    let mut tris = Vec::with_capacity(ne);
    let mut slabs = Vec::with_capacity(ne);
    let mut generations = Vec::with_capacity(ne);
    for _ in 0..ne {
        let tok: Vec<&str> = lines
            .next()
            .ok_or_else(|| perr("truncated elements"))?
            .split_whitespace()
            .collect();
        let tri: [usize; 3] = [
            num(tok.first(), "vertex")?,
            num(tok.get(1), "vertex")?,
            num(tok.get(2), "vertex")?,
        ];
        if tri.iter().any(|&v| v >= nv) {
            return Err(perr(format!("element references missing vertex: {tri:?}")));
        }
        tris.push(tri);
        let slab: i64 = num(tok.get(3), "slab")?;
        slabs.push(slab.max(0) as usize);
        generations.push(num(tok.get(4), "generation")?);
    }
    let nb: usize = num(header(lines.next(), "boundary")?.get(1), "boundary count")?;
    let mut sides = HashMap::new();
    let mut tags = HashMap::new();
    for _ in 0..nb {
        let tok: Vec<&str> = lines
            .next()
            .ok_or_else(|| perr("truncated boundary"))?
            .split_whitespace()
            .collect();
        let key = (num(tok.first(), "vertex")?, num(tok.get(1), "vertex")?);
        let side = tok
            .get(2)
            .and_then(|s| BoundarySide::from_name(s))
            .ok_or_else(|| perr("bad boundary side"))?;
        sides.insert(key, side);
        match tok.get(3) {
            Some(&"none") | None => {}
            Some(t) => {
                tags.insert(
                    key,
                    BoundaryTag::from_name(t).ok_or_else(|| perr(format!("bad tag '{t}'")))?,
                );
            }
        }
    }
    let slabs = (slabbed == 1).then_some(slabs);
    SpaceTimeMesh::from_parts(vertices, tris, slabs, generations, &sides, &tags)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{BoundaryRoles, DeformationMap, MeshMode, SpaceTimeBox};

    #[test]
    fn roundtrip_deformed_refined_slab_mesh() {
        let mut m = SpaceTimeMesh::build(3, 2, SpaceTimeBox::unit(), MeshMode::SlabBySlab)
            .unwrap()
            .deform(&DeformationMap::new(0.1))
            .unwrap()
            .bisect_refine(&[2, 5], usize::MAX)
            .unwrap();
        m.classify_boundary(BoundaryRoles::default());
        let mut buf = Vec::new();
        write_mesh(&mut buf, &m).unwrap();
        let r = read_mesh(buf.as_slice()).unwrap();
        assert_eq!(r.vertices(), m.vertices());
        assert_eq!(r.elements(), m.elements());
        assert_eq!(r.facets(), m.facets());
        let mut again = Vec::new();
        write_mesh(&mut again, &r).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn truncated_input_rejected() {
        let s = "sthdg-mesh 1\nvertices 3\n0 0\n";
        assert!(read_mesh(s.as_bytes()).is_err());
    }
}
