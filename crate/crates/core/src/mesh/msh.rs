//! ASCII `$MeshFormat 2.2` reader and writer.
//!
//! The x coordinate is read as ρ and y as z. Triangles (type 2) carry region
//! tags, lines (type 1) carry boundary tags, points (type 15) are skipped and
//! anything else is rejected. Physical groups must be named.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{exterior_edges, Mesh};
use crate::error::{Error, Result};
use crate::fem::Triangle;

pub fn import_msh(path: impl AsRef<Path>) -> Result<Mesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_msh(&text)
}

struct Lines<'a> {
    inner: std::iter::Peekable<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next_line(&mut self) -> Result<&'a str> {
        loop {
            match self.inner.next() {
                Some(l) if l.trim().is_empty() => continue,
                Some(l) => return Ok(l.trim()),
                None => return Err(Error::Parse("unexpected end of mesh file".into())),
            }
        }
    }

    fn expect(&mut self, tag: &str) -> Result<()> {
        let l = self.next_line()?;
        if l != tag {
            return Err(Error::Parse(format!("expected `{tag}`, found `{l}`")));
        }
        Ok(())
    }

    fn count(&mut self) -> Result<usize> {
        let l = self.next_line()?;
        l.parse().map_err(|_| Error::Parse(format!("expected a count, found `{l}`")))
    }
}

fn num<T: std::str::FromStr>(tok: Option<&str>, what: &str) -> Result<T> {
    tok.and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::Parse(format!("malformed {what}")))
}

pub fn parse_msh(text: &str) -> Result<Mesh> {
    let mut lines = Lines {
        inner: text.lines().peekable(),
    };
    let mut names: BTreeMap<(u32, i64), String> = BTreeMap::new();
    let mut node_index: BTreeMap<i64, usize> = BTreeMap::new();
    let mut raw_nodes: Vec<[f64; 2]> = Vec::new();
    let mut tris: Vec<([usize; 3], i64)> = Vec::new();
    let mut lines_1d: Vec<([usize; 2], i64)> = Vec::new();
    let mut saw_format = false;

    while let Some(line) = lines.inner.next() {
        match line.trim() {
            "" => continue,
            "$MeshFormat" => {
                let l = lines.next_line()?;
                let mut it = l.split_whitespace();
                let version: String = num(it.next(), "format version")?;
                let file_type: u32 = num(it.next(), "file type")?;
                if !version.starts_with("2.") || file_type != 0 {
                    return Err(Error::Parse(format!("only ASCII 2.2 meshes are supported, got `{l}`")));
                }
                lines.expect("$EndMeshFormat")?;
                saw_format = true;
            }
            "$PhysicalNames" => {
                let n = lines.count()?;
                for _ in 0..n {
                    let l = lines.next_line()?;
                    let mut it = l.splitn(3, char::is_whitespace);
                    let dim: u32 = num(it.next(), "physical dimension")?;
                    let tag: i64 = num(it.next(), "physical tag")?;
                    let name = it.next().unwrap_or("").trim().trim_matches('"').to_string();
                    names.insert((dim, tag), name);
                }
                lines.expect("$EndPhysicalNames")?;
            }
            "$Nodes" => {
                let n = lines.count()?;
                for _ in 0..n {
                    let l = lines.next_line()?;
                    let mut it = l.split_whitespace();
                    let id: i64 = num(it.next(), "node id")?;
                    let x: f64 = num(it.next(), "node coordinate")?;
                    let y: f64 = num(it.next(), "node coordinate")?;
                    node_index.insert(id, raw_nodes.len());
                    raw_nodes.push([x, y]);
                }
                lines.expect("$EndNodes")?;
            }
            "$Elements" => {
                let n = lines.count()?;
                for _ in 0..n {
                    let l = lines.next_line()?;
                    let mut it = l.split_whitespace();
                    let _id: i64 = num(it.next(), "element id")?;
                    let kind: u32 = num(it.next(), "element type")?;
                    let ntags: usize = num(it.next(), "tag count")?;
                    let mut tags = Vec::with_capacity(ntags);
                    for _ in 0..ntags {
                        tags.push(num::<i64>(it.next(), "element tag")?);
                    }
                    let physical = tags.first().copied().unwrap_or(0);
                    let mut node = || -> Result<usize> {
                        let id: i64 = num(it.next(), "element node")?;
                        node_index
                            .get(&id)
                            .copied()
                            .ok_or_else(|| Error::Parse(format!("element references unknown node {id}")))
                    };
                    match kind {
                        15 => {}
                        1 => lines_1d.push(([node()?, node()?], physical)),
                        2 => tris.push(([node()?, node()?, node()?], physical)),
                        other => return Err(Error::UnsupportedElement(other)),
                    }
                }
                lines.expect("$EndElements")?;
            }
            other if other.starts_with("$End") => {
                return Err(Error::Parse(format!("unbalanced section `{other}`")));
            }
            other if other.starts_with('$') => {
                // skip unknown sections
                let end = format!("$End{}", &other[1..]);
                loop {
                    if lines.next_line()? == end {
                        break;
                    }
                }
            }
            other => return Err(Error::Parse(format!("unexpected line `{other}`"))),
        }
    }
    if !saw_format {
        return Err(Error::Parse("missing $MeshFormat section".into()));
    }
    if tris.is_empty() {
        return Err(Error::Mesh("mesh contains no triangles".into()));
    }

    // keep only nodes referenced by triangles, in file order
    let mut used = vec![false; raw_nodes.len()];
    for (t, _) in &tris {
        for &n in t {
            used[n] = true;
        }
    }
    let mut remap = vec![usize::MAX; raw_nodes.len()];
    let mut nodes = Vec::new();
    for (k, p) in raw_nodes.iter().enumerate() {
        if used[k] {
            remap[k] = nodes.len();
            // snap round-off below the axis
            nodes.push([if p[0] < 0.0 && p[0] > -1e-12 { 0.0 } else { p[0] }, p[1]]);
        }
    }

    let region_tags: Vec<i64> = {
        let mut v: Vec<i64> = tris.iter().map(|&(_, t)| t).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let mut region_names = Vec::with_capacity(region_tags.len());
    for &t in &region_tags {
        let name = names
            .get(&(2, t))
            .ok_or_else(|| Error::Mesh(format!("missing physical name for surface group {t}")))?;
        region_names.push(name.clone());
    }

    let mut triangles = Vec::with_capacity(tris.len());
    let mut tri_region = Vec::with_capacity(tris.len());
    for (t, tag) in &tris {
        let mut t = [remap[t[0]], remap[t[1]], remap[t[2]]];
        if Triangle::signed_area(&[nodes[t[0]], nodes[t[1]], nodes[t[2]]]) < 0.0 {
            t.swap(1, 2);
        }
        triangles.push(t);
        tri_region.push(region_tags.binary_search(tag).unwrap());
    }

    if lines_1d.is_empty() {
        let (edges, tags, names) = exterior_edges(&nodes, &triangles);
        return Mesh::new(nodes, triangles, tri_region, region_names, edges, tags, names);
    }

    let boundary_tags: Vec<i64> = {
        let mut v: Vec<i64> = lines_1d.iter().map(|&(_, t)| t).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let mut boundary_names = Vec::with_capacity(boundary_tags.len());
    for &t in &boundary_tags {
        let name = names
            .get(&(1, t))
            .ok_or_else(|| Error::Mesh(format!("missing physical name for curve group {t}")))?;
        boundary_names.push(name.clone());
    }
    let mut edges = Vec::with_capacity(lines_1d.len());
    let mut edge_tag = Vec::with_capacity(lines_1d.len());
    for (e, tag) in &lines_1d {
        if remap[e[0]] == usize::MAX || remap[e[1]] == usize::MAX {
            return Err(Error::Mesh("boundary line uses a node outside every triangle".into()));
        }
        edges.push([remap[e[0]], remap[e[1]]]);
        edge_tag.push(boundary_tags.binary_search(tag).unwrap());
    }
    Mesh::new(nodes, triangles, tri_region, region_names, edges, edge_tag, boundary_names)
}

/// Serializes a mesh; regions get physical tags `1..=R`, boundaries `R+1..`.
pub fn write_msh(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_msh_string(mesh)).map_err(|e| Error::io(path, e))
}

pub(crate) fn to_msh_string(mesh: &Mesh) -> String {
    let nr = mesh.region_names().len();
    let mut s = String::new();
    s.push_str("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$PhysicalNames\n");
    let _ = writeln!(s, "{}", nr + mesh.boundary_names().len());
    for (k, name) in mesh.boundary_names().iter().enumerate() {
        let _ = writeln!(s, "1 {} \"{}\"", nr + k + 1, name);
    }
    for (k, name) in mesh.region_names().iter().enumerate() {
        let _ = writeln!(s, "2 {} \"{}\"", k + 1, name);
    }
    s.push_str("$EndPhysicalNames\n$Nodes\n");
    let _ = writeln!(s, "{}", mesh.n_nodes());
    for (k, p) in mesh.nodes().iter().enumerate() {
        let _ = writeln!(s, "{} {:?} {:?} 0", k + 1, p[0], p[1]);
    }
    s.push_str("$EndNodes\n$Elements\n");
    let _ = writeln!(s, "{}", mesh.boundary_edges().len() + mesh.n_triangles());
    let mut id = 1;
    for (e, tag) in mesh.boundary_edges().iter().zip(mesh.edge_tags()) {
        let phys = nr + tag + 1;
        let _ = writeln!(s, "{id} 1 2 {phys} {phys} {} {}", e[0] + 1, e[1] + 1);
        id += 1;
    }
    for (t, &r) in mesh.triangles().iter().zip(mesh.tri_regions()) {
        let _ = writeln!(s, "{id} 2 2 {} {} {} {} {}", r + 1, r + 1, t[0] + 1, t[1] + 1, t[2] + 1);
        id += 1;
    }
    s.push_str("$EndElements\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate, Layout, RegionRect};

    const TWO_TRIANGLES: &str = "\
$MeshFormat
2.2 0 8
$EndMeshFormat
$PhysicalNames
3
1 10 \"wall\"
2 1 \"copper\"
2 2 \"air\"
$EndPhysicalNames
$Nodes
4
11 0.1 0.0 0
12 0.2 0.0 0
13 0.2 0.1 0
14 0.1 0.1 0
$EndNodes
$Elements
4
1 15 2 0 1 11
2 2 2 1 1 11 12 13
3 2 2 2 2 11 14 13
4 1 2 10 3 12 13
$EndElements
";

    #[test]
    fn hand_written_two_triangles() {
        let m = parse_msh(TWO_TRIANGLES).unwrap();
        assert_eq!(m.n_triangles(), 2);
        assert_eq!(m.n_nodes(), 4);
        assert_eq!(m.region_names(), &["copper".to_string(), "air".to_string()]);
        assert_eq!(m.tri_regions(), &[0, 1]);
        // second triangle was clockwise in the file and gets reoriented
        assert!(m.element(1).area > 0.0);
        assert_eq!(m.boundary_names(), &["wall".to_string()]);
        assert_eq!(m.boundary_edges(), &[[1, 2]]);
        assert!((m.total_area() - 0.01).abs() < 1e-15);
    }

    #[test]
    fn tetrahedra_are_unsupported() {
        let text = TWO_TRIANGLES.replace("2 2 2 1 1 11 12 13", "2 4 2 1 1 11 12 13 14");
        let err = parse_msh(&text).unwrap_err();
        assert!(matches!(err, Error::UnsupportedElement(4)));
        assert!(err.to_string().contains("unsupported element"));
    }

    #[test]
    fn missing_physical_name_is_an_error() {
        let text = TWO_TRIANGLES.replace("2 2 \"air\"\n", "").replace("\n3\n1 10", "\n2\n1 10");
        assert!(matches!(parse_msh(&text), Err(Error::Mesh(_))));
    }

    #[test]
    fn structured_mesh_round_trip_is_identical() {
        let layout = Layout {
            regions: vec![RegionRect::new("fw", [0.01, 0.02], [-0.01, 0.01])],
            fill: Some(RegionRect::new("air", [0.0, 0.03], [-0.02, 0.02])),
        };
        let m = generate(&layout, 2.1e-3).unwrap().refine_uniform();
        let back = parse_msh(&to_msh_string(&m)).unwrap();
        assert_eq!(back, m);
    }
}
