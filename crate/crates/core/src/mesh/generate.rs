//! Structured generator for layouts made of axis-aligned rectangles.
//!
//! All rectangle edges become grid lines of one tensor-product grid, so the
//! triangulation is conforming across every region interface. Each grid cell
//! is split into two triangles along the same diagonal.

use serde::{Deserialize, Serialize};

use super::{exterior_edges, Mesh};
use crate::error::{Error, Result};

/// A rectangle must be at least this fraction of its mesh size across.
pub const MIN_FEATURE_RATIO: f64 = 0.25;

const SNAP: f64 = 1e-12;

/// Tagged axis-aligned rectangle in the (ρ, z) plane, in metres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionRect {
    pub tag: String,
    pub rho: [f64; 2],
    pub z: [f64; 2],
    /// Local mesh size overriding the global target inside this rectangle.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    /// Radial mesh size only; thin radial layers use this instead of `h`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_rho: Option<f64>,
}

impl RegionRect {
    pub fn new(tag: impl Into<String>, rho: [f64; 2], z: [f64; 2]) -> Self {
        RegionRect {
            tag: tag.into(),
            rho,
            z,
            h: None,
            h_rho: None,
        }
    }

    pub fn with_h(mut self, h: f64) -> Self {
        self.h = Some(h);
        self
    }

    pub fn with_h_rho(mut self, h_rho: f64) -> Self {
        self.h_rho = Some(h_rho);
        self
    }

    pub fn area(&self) -> f64 {
        (self.rho[1] - self.rho[0]) * (self.z[1] - self.z[0])
    }

    fn contains(&self, p: [f64; 2]) -> bool {
        p[0] > self.rho[0] && p[0] < self.rho[1] && p[1] > self.z[0] && p[1] < self.z[1]
    }
}

/// Region rectangles plus an optional fill rectangle whose tag is given to
/// every cell not covered by a region.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Layout {
    pub regions: Vec<RegionRect>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fill: Option<RegionRect>,
}

impl Layout {
    pub fn single(tag: &str, rho: [f64; 2], z: [f64; 2]) -> Self {
        Layout {
            regions: vec![RegionRect::new(tag, rho, z)],
            fill: None,
        }
    }

    /// Area covered by the mesh: the fill rectangle when present, else the sum
    /// of region areas.
    pub fn covered_area(&self) -> f64 {
        match &self.fill {
            Some(f) => f.area(),
            None => self.regions.iter().map(RegionRect::area).sum(),
        }
    }

    /// Region tags in mesh order: regions first (deduplicated), then the fill.
    pub fn tags(&self) -> Vec<String> {
        let mut tags: Vec<String> = Vec::new();
        for r in self.regions.iter().chain(self.fill.iter()) {
            if !tags.contains(&r.tag) {
                tags.push(r.tag.clone());
            }
        }
        tags
    }

    fn all(&self) -> impl Iterator<Item = &RegionRect> {
        self.regions.iter().chain(self.fill.iter())
    }

    pub fn validate(&self, h: f64) -> Result<()> {
        if !(h > 0.0) {
            return Err(Error::validation("mesh.h", "must be positive"));
        }
        if self.regions.is_empty() && self.fill.is_none() {
            return Err(Error::Mesh("layout has no rectangles".into()));
        }
        for r in self.all() {
            if !(r.rho[0] >= 0.0) || !(r.rho[1] > r.rho[0]) || !(r.z[1] > r.z[0]) {
                return Err(Error::Mesh(format!(
                    "rectangle `{}` must satisfy 0 <= rho0 < rho1 and z0 < z1",
                    r.tag
                )));
            }
            let local = r.h.unwrap_or(h);
            let local_rho = r.h_rho.unwrap_or(local);
            if !(local > 0.0 && local_rho > 0.0) {
                return Err(Error::validation(format!("{}.h", r.tag), "must be positive"));
            }
            for (thickness, size) in [(r.rho[1] - r.rho[0], local_rho), (r.z[1] - r.z[0], local)] {
                if thickness < MIN_FEATURE_RATIO * size {
                    return Err(Error::Mesh(format!(
                        "rectangle `{}` is {thickness:e} m thin, too small for mesh size {size:e} m",
                        r.tag
                    )));
                }
            }
        }
        for (i, a) in self.regions.iter().enumerate() {
            for b in &self.regions[i + 1..] {
                let overlap_rho = a.rho[1].min(b.rho[1]) - a.rho[0].max(b.rho[0]);
                let overlap_z = a.z[1].min(b.z[1]) - a.z[0].max(b.z[0]);
                if overlap_rho > SNAP && overlap_z > SNAP {
                    return Err(Error::Mesh(format!("rectangles `{}` and `{}` overlap", a.tag, b.tag)));
                }
            }
            if let Some(f) = &self.fill {
                if a.rho[0] < f.rho[0] - SNAP || a.rho[1] > f.rho[1] + SNAP || a.z[0] < f.z[0] - SNAP || a.z[1] > f.z[1] + SNAP {
                    return Err(Error::Mesh(format!("rectangle `{}` leaves the fill rectangle", a.tag)));
                }
            }
        }
        Ok(())
    }
}

fn breakpoints(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() <= SNAP * (1.0 + b.abs()));
    v
}

/// Subdivides each breakpoint interval so that no cell exceeds the smallest
/// mesh size of any rectangle spanning that interval.
fn subdivide(points: &[f64], spans: &[([f64; 2], f64)], h: f64) -> Vec<f64> {
    let mut out = vec![points[0]];
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mid = 0.5 * (a + b);
        let local = spans
            .iter()
            .filter(|(r, _)| r[0] < mid && mid < r[1])
            .map(|&(_, hl)| hl)
            .fold(h, f64::min);
        let n = (((b - a) / local) - 1e-9).ceil().max(1.0) as usize;
        for k in 1..n {
            out.push(a + (b - a) * k as f64 / n as f64);
        }
        out.push(b);
    }
    out
}

/// Generates a conforming triangulation of the layout with target size `h`.
pub fn generate(layout: &Layout, h: f64) -> Result<Mesh> {
    layout.validate(h)?;
    let rho_break = breakpoints(layout.all().flat_map(|r| r.rho));
    let z_break = breakpoints(layout.all().flat_map(|r| r.z));
    let local_rho: Vec<([f64; 2], f64)> = layout.all().filter_map(|r| r.h_rho.or(r.h).map(|hl| (r.rho, hl))).collect();
    let local_z: Vec<([f64; 2], f64)> = layout.all().filter_map(|r| r.h.map(|hl| (r.z, hl))).collect();
    let rho = subdivide(&rho_break, &local_rho, h);
    let z = subdivide(&z_break, &local_z, h);

    let tags = layout.tags();
    let (nr, nz) = (rho.len(), z.len());
    let mut cell_region = vec![None; (nr - 1) * (nz - 1)];
    for j in 0..nz - 1 {
        for i in 0..nr - 1 {
            let c = [0.5 * (rho[i] + rho[i + 1]), 0.5 * (z[j] + z[j + 1])];
            let hit = layout
                .regions
                .iter()
                .find(|r| r.contains(c))
                .or_else(|| layout.fill.as_ref().filter(|f| f.contains(c)));
            cell_region[j * (nr - 1) + i] = hit.map(|r| tags.iter().position(|t| *t == r.tag).unwrap());
        }
    }

    let mut node_id = vec![usize::MAX; nr * nz];
    let mut nodes = Vec::new();
    let mut triangles = Vec::new();
    let mut tri_region = Vec::new();
    let mut id = |i: usize, j: usize, nodes: &mut Vec<[f64; 2]>| -> usize {
        let slot = &mut node_id[j * nr + i];
        if *slot == usize::MAX {
            *slot = nodes.len();
            nodes.push([rho[i], z[j]]);
        }
        *slot
    };
    for j in 0..nz - 1 {
        for i in 0..nr - 1 {
            let Some(region) = cell_region[j * (nr - 1) + i] else {
                continue;
            };
            let p00 = id(i, j, &mut nodes);
            let p10 = id(i + 1, j, &mut nodes);
            let p11 = id(i + 1, j + 1, &mut nodes);
            let p01 = id(i, j + 1, &mut nodes);
            triangles.push([p00, p10, p11]);
            triangles.push([p00, p11, p01]);
            tri_region.push(region);
            tri_region.push(region);
        }
    }

    let (edges, edge_tag, names) = exterior_edges(&nodes, &triangles);
    Mesh::new(nodes, triangles, tri_region, tags, edges, edge_tag, names)
}
