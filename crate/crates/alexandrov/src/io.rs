//! File formats: the plain-text polytope format, node/value tables,
//! CSV emitters for measures and modulus curves, and JSON records for
//! volumes and affine maps. Floats are written in shortest-roundtrip form,
//! so identical data produces identical bytes.

use crate::convexfn::{MAMeasure, ModulusCurve, NodeSet, PLConvexFunction};
use crate::error::{Error, Result};
use crate::geometry::{AffineMap, ConvexPolytope, Halfspace};
use serde::Serialize;
use std::sync::Arc;

/// Plain-text polytope format: dimension, vertex rows, halfspace rows
/// (normal components then offset).
pub fn write_polytope(p: &ConvexPolytope) -> String {
    let mut out = String::new();
    out.push_str(&format!("dim {}\n", p.dim()));
    out.push_str(&format!("vertices {}\n", p.vertices().len()));
    for v in p.vertices() {
        out.push_str(&row(v));
        out.push('\n');
    }
    out.push_str(&format!("halfspaces {}\n", p.halfspaces().len()));
    for h in p.halfspaces() {
        let mut r = h.normal.clone();
        r.push(h.offset);
        out.push_str(&row(&r));
        out.push('\n');
    }
    out
}

pub fn read_polytope(text: &str) -> Result<ConvexPolytope> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
    let dim = parse_header(lines.next(), "dim")?;
    let nv = parse_header(lines.next(), "vertices")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let r = parse_row(lines.next(), dim)?;
        vertices.push(r);
    }
    let nh = parse_header(lines.next(), "halfspaces")?;
    let mut halfspaces = Vec::with_capacity(nh);
    for _ in 0..nh {
        let r = parse_row(lines.next(), dim + 1)?;
        halfspaces.push(Halfspace::new(r[..dim].to_vec(), r[dim])?);
    }
    // The stored pair is adopted verbatim; construction cross-validates
    // that the vertex hull and halfspace intersection agree.
    ConvexPolytope::from_representations(dim, vertices, halfspaces)
}

fn parse_header(line: Option<&str>, key: &str) -> Result<usize> {
    let line = line.ok_or_else(|| Error::Io(format!("missing '{key}' header")))?;
    let mut parts = line.split_whitespace();
    if parts.next() != Some(key) {
        return Err(Error::Io(format!("expected '{key}' header, got '{line}'")));
    }
    parts
        .next()
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::Io(format!("bad '{key}' count")))
}

fn parse_row(line: Option<&str>, len: usize) -> Result<Vec<f64>> {
    let line = line.ok_or_else(|| Error::Io("unexpected end of file".into()))?;
    let vals: Vec<f64> = line
        .split_whitespace()
        .map(|t| t.parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Io(format!("bad number in '{line}': {e}")))?;
    if vals.len() != len {
        return Err(Error::Io(format!(
            "expected {len} numbers, got {} in '{line}'",
            vals.len()
        )));
    }
    Ok(vals)
}

fn row(vals: &[f64]) -> String {
    vals.iter()
        .map(|v| format!("{v}"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Node/value table: one row per node with coordinates, value, and an
/// interior/boundary flag.
pub fn write_function(u: &PLConvexFunction) -> String {
    let nodes = u.nodes();
    let mut out = String::new();
    out.push_str(&format!("dim {}\nnodes {}\n", nodes.dim(), nodes.len()));
    for i in 0..nodes.len() {
        let mut r = row(nodes.point(i));
        r.push(' ');
        r.push_str(&format!("{}", u.value(i)));
        r.push(' ');
        r.push(if nodes.is_boundary(i) { 'b' } else { 'i' });
        out.push_str(&r);
        out.push('\n');
    }
    out
}

/// Parse a node/value table onto a given domain.
pub fn read_function(text: &str, domain: ConvexPolytope) -> Result<PLConvexFunction> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
    let dim = parse_header(lines.next(), "dim")?;
    if dim != domain.dim() {
        return Err(Error::Io("table dimension does not match the domain".into()));
    }
    let count = parse_header(lines.next(), "nodes")?;
    let mut points = Vec::with_capacity(count);
    let mut values = Vec::with_capacity(count);
    let mut flags = Vec::with_capacity(count);
    for _ in 0..count {
        let line = lines.next().ok_or_else(|| Error::Io("unexpected end of file".into()))?;
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != dim + 2 {
            return Err(Error::Io(format!("bad row '{line}'")));
        }
        let p: Vec<f64> = parts[..dim]
            .iter()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Io(e.to_string()))?;
        let v: f64 = parts[dim].parse().map_err(|e| Error::Io(format!("{e}")))?;
        points.push(p);
        values.push(v);
        flags.push(parts[dim + 1] == "b");
    }
    let nodes: Arc<NodeSet> = NodeSet::new(domain, points)?;
    for (i, &flag) in flags.iter().enumerate() {
        if nodes.is_boundary(i) != flag {
            return Err(Error::Io(format!("node {i} boundary flag mismatch")));
        }
    }
    Ok(PLConvexFunction::from_values_unchecked(nodes, values))
}

/// CSV rows for a Monge-Ampère measure: node index, coordinates, mass.
pub fn measure_csv(u: &PLConvexFunction, mu: &MAMeasure) -> String {
    let nodes = u.nodes();
    let dim = nodes.dim();
    let mut out = String::from("node");
    for k in 0..dim {
        out.push_str(&format!(",x{}", k + 1));
    }
    out.push_str(",mass\n");
    for i in 0..nodes.len() {
        out.push_str(&format!("{i}"));
        for c in nodes.point(i) {
            out.push_str(&format!(",{c}"));
        }
        out.push_str(&format!(",{}\n", mu.mass(i)));
    }
    out
}

/// CSV rows for a modulus curve: delta, omega.
pub fn modulus_csv(curve: &ModulusCurve) -> String {
    let mut out = String::from("delta,omega\n");
    for (d, w) in curve.deltas().iter().zip(curve.omegas()) {
        out.push_str(&format!("{d},{w}\n"));
    }
    out
}

/// JSON record for a volume quantity.
#[derive(Serialize)]
pub struct VolumeRecord {
    pub kind: &'static str,
    pub dim: usize,
    pub value: f64,
}

/// JSON record for an affine map.
#[derive(Serialize)]
pub struct AffineMapRecord {
    pub linear: Vec<Vec<f64>>,
    pub translation: Vec<f64>,
    pub det: f64,
    pub spectral_norm: f64,
}

impl AffineMapRecord {
    pub fn from_map(map: &AffineMap) -> Self {
        let n = map.dim();
        let linear = (0..n)
            .map(|r| (0..n).map(|c| map.linear()[(r, c)]).collect())
            .collect();
        AffineMapRecord {
            linear,
            translation: map.translation_slice().to_vec(),
            det: map.det(),
            spectral_norm: map.spectral_norm(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::mesh::{tensor_mesh, AxisCoords};

    #[test]
    fn polytope_roundtrip() {
        let p = ConvexPolytope::regular_ngon(7, 1.3).unwrap();
        let text = write_polytope(&p);
        let q = read_polytope(&text).unwrap();
        assert_eq!(q.vertices().len(), 7);
        assert_eq!(q.halfspaces().len(), 7);
        // Identical bytes after a second round trip.
        assert_eq!(text, write_polytope(&read_polytope(&text).unwrap()));
        assert!(read_polytope("dim 2\nvertices 1\n0 0\n").is_err());
    }

    #[test]
    fn function_table_roundtrip() {
        let mesh = tensor_mesh(&[
            AxisCoords::uniform(0.0, 1.0, 4),
            AxisCoords::uniform(0.0, 1.0, 4),
        ])
        .unwrap();
        let values: Vec<f64> = mesh.nodes.points().iter().map(|p| p[0] - 2.0 * p[1]).collect();
        let u = PLConvexFunction::from_values_unchecked(mesh.nodes.clone(), values);
        let text = write_function(&u);
        let v = read_function(&text, mesh.nodes.domain().clone()).unwrap();
        for i in 0..mesh.nodes.len() {
            assert_eq!(u.value(i).to_bits(), v.value(i).to_bits());
        }
    }

    #[test]
    fn csv_headers() {
        let mesh = tensor_mesh(&[
            AxisCoords::uniform(0.0, 1.0, 4),
            AxisCoords::uniform(0.0, 1.0, 4),
        ])
        .unwrap();
        let values: Vec<f64> = mesh.nodes.points().iter().map(|p| p[0] * p[0]).collect();
        let u = PLConvexFunction::from_values_unchecked(mesh.nodes.clone(), values);
        let mu = crate::convexfn::ma_measure(&u);
        let csv = measure_csv(&u, &mu);
        assert!(csv.starts_with("node,x1,x2,mass\n"));
        assert_eq!(csv.lines().count(), 1 + mesh.nodes.len());
    }
}
