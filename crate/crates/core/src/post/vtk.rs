//! Legacy ASCII VTK unstructured-grid writer. Points are `(ρ, z, 0)`.

use std::fmt::Write as _;
use std::path::Path;

use super::write_text;
use crate::error::{Error, Result};
use crate::mesh::Mesh;

pub type PointField<'a> = (&'a str, &'a [f64]);
pub type CellField<'a> = (&'a str, &'a [f64]);

/// Renders the mesh plus nodal and element fields. The region index is always
/// written as the cell field `region`.
pub fn to_vtk_string(mesh: &Mesh, point_fields: &[PointField], cell_fields: &[CellField]) -> Result<String> {
    for (name, f) in point_fields {
        if f.len() != mesh.n_nodes() {
            return Err(Error::validation(
                format!("vtk.{name}"),
                "point field length differs from node count",
            ));
        }
    }
    for (name, f) in cell_fields {
        if f.len() != mesh.n_triangles() {
            return Err(Error::validation(
                format!("vtk.{name}"),
                "cell field length differs from triangle count",
            ));
        }
    }
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0\nfoilfem\nASCII\nDATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {} double", mesh.n_nodes());
    for p in mesh.nodes() {
        let _ = writeln!(s, "{:e} {:e} 0", p[0], p[1]);
    }
    let n = mesh.n_triangles();
    let _ = writeln!(s, "CELLS {} {}", n, 4 * n);
    for t in mesh.triangles() {
        let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
    }
    let _ = writeln!(s, "CELL_TYPES {n}");
    for _ in 0..n {
        s.push_str("5\n");
    }
    let _ = writeln!(s, "CELL_DATA {n}\nSCALARS region int 1\nLOOKUP_TABLE default");
    for r in mesh.tri_regions() {
        let _ = writeln!(s, "{r}");
    }
    for (name, f) in cell_fields {
        scalars(&mut s, name, f);
    }
    if !point_fields.is_empty() {
        let _ = writeln!(s, "POINT_DATA {}", mesh.n_nodes());
        for (name, f) in point_fields {
            scalars(&mut s, name, f);
        }
    }
    Ok(s)
}

fn scalars(s: &mut String, name: &str, values: &[f64]) {
    let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
    for v in values {
        let _ = writeln!(s, "{v:e}");
    }
}

pub fn export_vtk(mesh: &Mesh, point_fields: &[PointField], cell_fields: &[CellField], path: &Path) -> Result<()> {
    write_text(path, &to_vtk_string(mesh, point_fields, cell_fields)?)
}
