//! Tagged triangular meshes of the axisymmetric (ρ, z) half-plane.

mod generate;
mod msh;

use std::collections::HashMap;

pub use generate::{generate, Layout, RegionRect, MIN_FEATURE_RATIO};
pub use msh::{import_msh, parse_msh, write_msh};

use crate::error::{Error, Result};
use crate::fem::Triangle;

/// Boundary tag given to edges on the symmetry axis.
pub const AXIS_TAG: &str = "axis";
/// Boundary tag given to every other exterior edge by the generator.
pub const OUTER_TAG: &str = "outer";

const DUPLICATE_TOL: f64 = 1e-12;

/// Immutable conforming P1 mesh with region and boundary tags.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    nodes: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    tri_region: Vec<usize>,
    region_names: Vec<String>,
    boundary_edges: Vec<[usize; 2]>,
    edge_tag: Vec<usize>,
    boundary_names: Vec<String>,
}

impl Mesh {
    /// Builds a mesh and checks its invariants: ρ ≥ 0, positive orientation,
    /// no duplicate nodes, boundary edges on exactly one triangle.
    pub fn new(
        nodes: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        tri_region: Vec<usize>,
        region_names: Vec<String>,
        boundary_edges: Vec<[usize; 2]>,
        edge_tag: Vec<usize>,
        boundary_names: Vec<String>,
    ) -> Result<Self> {
        if triangles.len() != tri_region.len() {
            return Err(Error::Mesh("region tag count differs from triangle count".into()));
        }
        if boundary_edges.len() != edge_tag.len() {
            return Err(Error::Mesh("boundary tag count differs from edge count".into()));
        }
        for (k, p) in nodes.iter().enumerate() {
            if !(p[0] >= 0.0) || !p[1].is_finite() || !p[0].is_finite() {
                return Err(Error::Mesh(format!("node {k} has invalid coordinates {p:?}")));
            }
        }
        for (e, t) in triangles.iter().enumerate() {
            if t.iter().any(|&n| n >= nodes.len()) {
                return Err(Error::Mesh(format!("triangle {e} references a missing node")));
            }
            let area = Triangle::signed_area(&[nodes[t[0]], nodes[t[1]], nodes[t[2]]]);
            if !(area > 0.0) {
                return Err(Error::Mesh(format!("triangle {e} is not positively oriented")));
            }
            if tri_region[e] >= region_names.len() {
                return Err(Error::Mesh(format!("triangle {e} has an unknown region tag")));
            }
        }
        if edge_tag.iter().any(|&t| t >= boundary_names.len()) {
            return Err(Error::Mesh("boundary edge with unknown tag".into()));
        }

        let mut sorted: Vec<usize> = (0..nodes.len()).collect();
        sorted.sort_by(|&a, &b| nodes[a][0].total_cmp(&nodes[b][0]).then(nodes[a][1].total_cmp(&nodes[b][1])));
        for w in sorted.windows(2) {
            let (p, q) = (nodes[w[0]], nodes[w[1]]);
            if (p[0] - q[0]).abs() <= DUPLICATE_TOL && (p[1] - q[1]).abs() <= DUPLICATE_TOL {
                return Err(Error::Mesh(format!("duplicate nodes {} and {}", w[0], w[1])));
            }
        }

        let counts = edge_counts(&triangles);
        for (k, e) in boundary_edges.iter().enumerate() {
            if counts.get(&edge_key(e[0], e[1])) != Some(&1) {
                return Err(Error::Mesh(format!("boundary edge {k} does not lie on exactly one triangle")));
            }
        }

        Ok(Mesh {
            nodes,
            triangles,
            tri_region,
            region_names,
            boundary_edges,
            edge_tag,
            boundary_names,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn node(&self, k: usize) -> [f64; 2] {
        self.nodes[k]
    }

    pub fn triangle(&self, e: usize) -> [usize; 3] {
        self.triangles[e]
    }

    pub fn element(&self, e: usize) -> Triangle {
        let t = self.triangles[e];
        Triangle::new([self.nodes[t[0]], self.nodes[t[1]], self.nodes[t[2]]])
    }

    pub fn region_of(&self, e: usize) -> usize {
        self.tri_region[e]
    }

    pub fn tri_regions(&self) -> &[usize] {
        &self.tri_region
    }

    pub fn region_names(&self) -> &[String] {
        &self.region_names
    }

    pub fn region_id(&self, name: &str) -> Option<usize> {
        self.region_names.iter().position(|n| n == name)
    }

    pub fn boundary_edges(&self) -> &[[usize; 2]] {
        &self.boundary_edges
    }

    pub fn edge_tags(&self) -> &[usize] {
        &self.edge_tag
    }

    pub fn boundary_names(&self) -> &[String] {
        &self.boundary_names
    }

    pub fn boundary_id(&self, name: &str) -> Option<usize> {
        self.boundary_names.iter().position(|n| n == name)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_triangles()).map(|e| self.element(e).area).sum()
    }

    pub fn region_area(&self, region: usize) -> f64 {
        (0..self.n_triangles())
            .filter(|&e| self.tri_region[e] == region)
            .map(|e| self.element(e).area)
            .sum()
    }

    /// Elements belonging to any of the given regions.
    pub fn elements_in(&self, regions: &[usize]) -> Vec<usize> {
        (0..self.n_triangles()).filter(|&e| regions.contains(&self.tri_region[e])).collect()
    }

    /// Flags of nodes lying on any boundary edge.
    pub fn boundary_nodes(&self) -> Vec<bool> {
        let mut flags = vec![false; self.n_nodes()];
        for e in &self.boundary_edges {
            flags[e[0]] = true;
            flags[e[1]] = true;
        }
        flags
    }

    pub fn max_edge_length(&self) -> f64 {
        let mut m: f64 = 0.0;
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (self.nodes[t[k]], self.nodes[t[(k + 1) % 3]]);
                m = m.max(((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt());
            }
        }
        m
    }

    /// Number of distinct edges.
    pub fn n_edges(&self) -> usize {
        edge_counts(&self.triangles).len()
    }

    /// Splits each triangle into four congruent children through its edge
    /// midpoints. Tags are inherited.
    pub fn refine_uniform(&self) -> Mesh {
        let mut nodes = self.nodes.clone();
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, nodes: &mut Vec<[f64; 2]>| -> usize {
            *midpoint.entry(edge_key(a, b)).or_insert_with(|| {
                let (p, q) = (nodes[a], nodes[b]);
                nodes.push([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
                nodes.len() - 1
            })
        };
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        let mut tri_region = Vec::with_capacity(4 * self.triangles.len());
        for (e, &[a, b, c]) in self.triangles.iter().enumerate() {
            let ab = mid(a, b, &mut nodes);
            let bc = mid(b, c, &mut nodes);
            let ca = mid(c, a, &mut nodes);
            triangles.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
            tri_region.extend([self.tri_region[e]; 4]);
        }
        let mut boundary_edges = Vec::with_capacity(2 * self.boundary_edges.len());
        let mut edge_tag = Vec::with_capacity(2 * self.boundary_edges.len());
        for (k, &[a, b]) in self.boundary_edges.iter().enumerate() {
            let m = mid(a, b, &mut nodes);
            boundary_edges.extend([[a, m], [m, b]]);
            edge_tag.extend([self.edge_tag[k]; 2]);
        }
        Mesh {
            nodes,
            triangles,
            tri_region,
            region_names: self.region_names.clone(),
            boundary_edges,
            edge_tag,
            boundary_names: self.boundary_names.clone(),
        }
    }

    /// Index of the first triangle containing `p` (ties go to the lowest index).
    pub fn locate(&self, p: [f64; 2]) -> Option<(usize, [f64; 3])> {
        const TOL: f64 = 1e-10;
        for e in 0..self.n_triangles() {
            let t = self.element(e);
            let (lo, hi) = bbox(&t.vertices);
            let pad = TOL * (1.0 + (hi[0] - lo[0]).max(hi[1] - lo[1]));
            if p[0] < lo[0] - pad || p[0] > hi[0] + pad || p[1] < lo[1] - pad || p[1] > hi[1] + pad {
                continue;
            }
            let l = t.barycentric(p);
            if l.iter().all(|&x| x >= -TOL) {
                return Some((e, l));
            }
        }
        None
    }
}

fn bbox(v: &[[f64; 2]; 3]) -> ([f64; 2], [f64; 2]) {
    let mut lo = v[0];
    let mut hi = v[0];
    for p in &v[1..] {
        lo = [lo[0].min(p[0]), lo[1].min(p[1])];
        hi = [hi[0].max(p[0]), hi[1].max(p[1])];
    }
    (lo, hi)
}

pub(crate) fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

pub(crate) fn edge_counts(triangles: &[[usize; 3]]) -> HashMap<(usize, usize), usize> {
    let mut counts = HashMap::new();
    for t in triangles {
        for k in 0..3 {
            *counts.entry(edge_key(t[k], t[(k + 1) % 3])).or_insert(0) += 1;
        }
    }
    counts
}

/// Boundary edges in triangle order, oriented along the triangle, tagged
/// `axis` when both ends lie on ρ = 0 and `outer` otherwise.
pub(crate) fn exterior_edges(nodes: &[[f64; 2]], triangles: &[[usize; 3]]) -> (Vec<[usize; 2]>, Vec<usize>, Vec<String>) {
    let counts = edge_counts(triangles);
    let mut edges = Vec::new();
    let mut tags = Vec::new();
    let mut has_axis = false;
    for t in triangles {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            if counts[&edge_key(a, b)] == 1 {
                let on_axis = nodes[a][0] == 0.0 && nodes[b][0] == 0.0;
                has_axis |= on_axis;
                edges.push([a, b]);
                tags.push(on_axis);
            }
        }
    }
    let names: Vec<String> = if has_axis {
        vec![AXIS_TAG.to_string(), OUTER_TAG.to_string()]
    } else {
        vec![OUTER_TAG.to_string()]
    };
    let tags = tags.into_iter().map(|axis| if !has_axis || axis { 0 } else { 1 }).collect();
    (edges, tags, names)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Mesh {
        generate(&Layout::single("box", [0.0, 1.0], [0.0, 1.0]), 0.5).unwrap()
    }

    #[test]
    fn refinement_quadruples_and_preserves_area() {
        let m = square();
        assert_eq!(m.n_triangles(), 8);
        let edges = m.n_edges();
        let r = m.refine_uniform();
        assert_eq!(r.n_triangles(), 32);
        assert_eq!(r.n_nodes(), m.n_nodes() + edges);
        for e in 0..m.n_triangles() {
            let parent = m.element(e).area;
            let children: f64 = (4 * e..4 * e + 4).map(|c| r.element(c).area).sum();
            assert!(((children - parent) / parent).abs() < 1e-12);
            for c in 4 * e..4 * e + 4 {
                assert_eq!(r.region_of(c), m.region_of(e));
            }
        }
        assert_eq!(r.boundary_edges().len(), 2 * m.boundary_edges().len());
        // the refined mesh still satisfies every invariant
        Mesh::new(
            r.nodes.clone(),
            r.triangles.clone(),
            r.tri_region.clone(),
            r.region_names.clone(),
            r.boundary_edges.clone(),
            r.edge_tag.clone(),
            r.boundary_names.clone(),
        )
        .unwrap();
    }

    #[test]
    fn rejects_clockwise_triangles() {
        let err = Mesh::new(
            vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            vec![[0, 2, 1]],
            vec![0],
            vec!["a".into()],
            vec![],
            vec![],
            vec![],
        );
        assert!(matches!(err, Err(Error::Mesh(_))));
    }

    #[test]
    fn rejects_duplicate_nodes_and_negative_radius() {
        let dup = Mesh::new(
            vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 0.0]],
            vec![[0, 1, 2]],
            vec![0],
            vec!["a".into()],
            vec![],
            vec![],
            vec![],
        );
        assert!(dup.is_err());
        let neg = Mesh::new(
            vec![[-0.1, 0.0], [1.0, 0.0], [0.0, 1.0]],
            vec![[0, 1, 2]],
            vec![0],
            vec!["a".into()],
            vec![],
            vec![],
            vec![],
        );
        assert!(neg.is_err());
    }

    #[test]
    fn locate_prefers_lowest_index_on_shared_edges() {
        let m = square();
        // centre of the square is a shared vertex of several triangles
        let (e, l) = m.locate([0.5, 0.5]).unwrap();
        let first = (0..m.n_triangles())
            .find(|&k| m.triangle(k).iter().any(|&n| m.node(n) == [0.5, 0.5]))
            .unwrap();
        assert_eq!(e, first);
        assert!((l.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(m.locate([2.0, 0.5]).is_none());
    }
}
