//! Mesh file formats.
//!
//! The native format is plain ASCII:
//!
//! ```text
//! nodes N cells M dim 2
//! x y                 (N lines)
//! i j k               (M lines, 0-based node indices)
//! n1 n2 bc_tag        (any number of boundary-face lines)
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. A reader for the
//! node/element blocks of Gmsh `.msh` version 2 ASCII files is also provided.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use super::Mesh;
use crate::error::MeshError;
use crate::tensor::Vec2;

fn perr(line: usize, message: impl Into<String>) -> MeshError {
    MeshError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_num<T: std::str::FromStr>(
    tok: Option<&str>,
    line: usize,
    what: &str,
) -> Result<T, MeshError> {
    tok.ok_or_else(|| perr(line, format!("missing {what}")))?
        .parse()
        .map_err(|_| perr(line, format!("invalid {what}")))
}

pub fn parse_ascii(text: &str) -> Result<Mesh, MeshError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (ln, header) = lines.next().ok_or_else(|| perr(1, "empty file"))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 6 || h[0] != "nodes" || h[2] != "cells" || h[4] != "dim" {
        return Err(perr(ln, "expected header `nodes N cells M dim 2`"));
    }
    let n: usize = parse_num(Some(h[1]), ln, "node count")?;
    let m: usize = parse_num(Some(h[3]), ln, "cell count")?;
    if h[5] != "2" {
        return Err(perr(ln, "only dim 2 is supported"));
    }
    let mut coords = Vec::with_capacity(n);
    for _ in 0..n {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| perr(ln, "unexpected end of node block"))?;
        let mut t = l.split_whitespace();
        let x = parse_num(t.next(), ln, "x")?;
        let y = parse_num(t.next(), ln, "y")?;
        coords.push(Vec2::new(x, y));
    }
    let mut cells = Vec::with_capacity(m);
    for _ in 0..m {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| perr(ln, "unexpected end of cell block"))?;
        let mut t = l.split_whitespace();
        let tri = [
            parse_num(t.next(), ln, "vertex")?,
            parse_num(t.next(), ln, "vertex")?,
            parse_num(t.next(), ln, "vertex")?,
        ];
        if t.next().is_some() {
            return Err(perr(ln, "only triangles are supported"));
        }
        cells.push(tri);
    }
    let mut boundary = Vec::new();
    for (ln, l) in lines {
        let mut t = l.split_whitespace();
        let a: usize = parse_num(t.next(), ln, "face node")?;
        let b: usize = parse_num(t.next(), ln, "face node")?;
        let tag = t
            .next()
            .ok_or_else(|| perr(ln, "missing bc_tag"))?
            .to_string();
        boundary.push((a, b, tag));
    }
    Mesh::new(coords, &cells, &boundary)
}

pub fn write_ascii(mesh: &Mesh) -> String {
    let mut s = String::new();
    let t = &mesh.topology;
    let _ = writeln!(
        s,
        "nodes {} cells {} dim 2",
        mesh.coords.len(),
        t.num_cells()
    );
    for p in &mesh.coords {
        let _ = writeln!(s, "{:e} {:e}", p.x, p.y);
    }
    for c in &t.cells {
        let _ = writeln!(s, "{} {} {}", c[0], c[1], c[2]);
    }
    for b in &t.boundary_faces {
        let _ = writeln!(s, "{} {} {}", b.nodes[0], b.nodes[1], b.tag);
    }
    s
}

/// Reads the `$Nodes`, `$Elements` and optional `$PhysicalNames` sections of a
/// Gmsh v2 ASCII file. Triangles become cells; line elements become boundary
/// faces tagged with their physical name (or physical id when unnamed).
pub fn parse_msh2(text: &str) -> Result<Mesh, MeshError> {
    let all: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .collect();
    let section = |name: &str| -> Option<&[(usize, &str)]> {
        let start = all.iter().position(|(_, l)| *l == format!("${name}"))?;
        let end = all.iter().position(|(_, l)| *l == format!("$End{name}"))?;
        Some(&all[start + 1..end])
    };
    let mut names: HashMap<i64, String> = HashMap::new();
    if let Some(block) = section("PhysicalNames") {
        for &(ln, l) in block.iter().skip(1) {
            let mut t = l.splitn(3, char::is_whitespace);
            let _dim: i64 = parse_num(t.next(), ln, "dimension")?;
            let id: i64 = parse_num(t.next(), ln, "physical id")?;
            let name = t.next().unwrap_or("").trim().trim_matches('"').to_string();
            names.insert(id, name);
        }
    }
    let nodes = section("Nodes").ok_or_else(|| perr(0, "missing $Nodes"))?;
    let mut index = HashMap::new();
    let mut coords = Vec::new();
    for &(ln, l) in nodes.iter().skip(1) {
        let mut t = l.split_whitespace();
        let id: i64 = parse_num(t.next(), ln, "node id")?;
        let x = parse_num(t.next(), ln, "x")?;
        let y = parse_num(t.next(), ln, "y")?;
        index.insert(id, coords.len());
        coords.push(Vec2::new(x, y));
    }
    let elements = section("Elements").ok_or_else(|| perr(0, "missing $Elements"))?;
    let mut cells = Vec::new();
    let mut boundary = Vec::new();
    for &(ln, l) in elements.iter().skip(1) {
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() < 3 {
            return Err(perr(ln, "short element line"));
        }
        let etype: i64 = parse_num(Some(toks[1]), ln, "element type")?;
        let ntags: usize = parse_num(Some(toks[2]), ln, "tag count")?;
        let physical: i64 = if ntags > 0 {
            parse_num(toks.get(3).copied(), ln, "physical tag")?
        } else {
            0
        };
        let node = |k: usize| -> Result<usize, MeshError> {
            let id: i64 = parse_num(toks.get(3 + ntags + k).copied(), ln, "element node")?;
            index
                .get(&id)
                .copied()
                .ok_or_else(|| perr(ln, format!("unknown node {id}")))
        };
        match etype {
            1 => {
                let tag = names
                    .get(&physical)
                    .cloned()
                    .unwrap_or_else(|| physical.to_string());
                boundary.push((node(0)?, node(1)?, tag));
            }
            2 => cells.push([node(0)?, node(1)?, node(2)?]),
            _ => {}
        }
    }
    Mesh::new(coords, &cells, &boundary)
}

pub fn read(path: &Path) -> Result<Mesh, crate::error::SolverError> {
    let text = std::fs::read_to_string(path)?;
    let mesh = if path.extension().is_some_and(|e| e == "msh") {
        parse_msh2(&text)?
    } else {
        parse_ascii(&text)?
    };
    Ok(mesh)
}
