//! Probes, line sampling and file exports.

mod convergence;
mod vtk;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use convergence::{convergence_study, fit_order, resolved_deck, ConvergenceLevel, ConvergenceReport, ConvergenceSettings};
pub use vtk::{export_vtk, to_vtk_string, CellField, PointField};

use crate::error::{Error, Result};
use crate::mesh::Mesh;

/// Named sampling point in the meridian plane, metres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub label: String,
    pub position: [f64; 2],
}

/// Probe resolved to its containing triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct LocatedProbe {
    pub label: String,
    pub element: usize,
    nodes: [usize; 3],
    bary: [f64; 3],
}

impl LocatedProbe {
    pub fn locate(mesh: &Mesh, probe: &Probe) -> Result<Self> {
        let (element, bary) = mesh
            .locate(probe.position)
            .ok_or_else(|| Error::validation(format!("probes.{}", probe.label), "position lies outside the mesh"))?;
        Ok(LocatedProbe {
            label: probe.label.clone(),
            element,
            nodes: mesh.triangle(element),
            bary,
        })
    }

    /// P1 interpolation of a nodal field.
    pub fn value(&self, field: &[f64]) -> f64 {
        (0..3).map(|k| self.bary[k] * field[self.nodes[k]]).sum()
    }
}

pub fn locate_probes(mesh: &Mesh, probes: &[Probe]) -> Result<Vec<LocatedProbe>> {
    probes.iter().map(|p| LocatedProbe::locate(mesh, p)).collect()
}

/// Samples a nodal field at `n` uniformly spaced points from `start` to `end`
/// (inclusive), returning `(arc length, value)` pairs.
pub fn sample_line(mesh: &Mesh, field: &[f64], start: [f64; 2], end: [f64; 2], n: usize) -> Result<Vec<(f64, f64)>> {
    if n < 2 {
        return Err(Error::validation("n_samples", "need at least 2 samples"));
    }
    let length = ((end[0] - start[0]).powi(2) + (end[1] - start[1]).powi(2)).sqrt();
    (0..n)
        .map(|k| {
            let s = k as f64 / (n - 1) as f64;
            let p = [start[0] + s * (end[0] - start[0]), start[1] + s * (end[1] - start[1])];
            let probe = LocatedProbe::locate(
                mesh,
                &Probe {
                    label: format!("sample {k}"),
                    position: p,
                },
            )
            .map_err(|_| Error::Domain(format!("sample point {p:?} lies outside the mesh")))?;
            Ok((s * length, probe.value(field)))
        })
        .collect()
}

/// Writes a CSV file with a header row; numbers are printed with full
/// round-trip precision.
pub fn write_csv(path: &Path, header: &[String], rows: &[Vec<f64>]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|v| format!("{v:e}")))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Writes any text file, creating parent directories.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate, Layout};

    fn mesh() -> Mesh {
        generate(&Layout::single("box", [0.0, 1.0], [0.0, 1.0]), 0.25).unwrap()
    }

    #[test]
    fn constant_and_linear_fields_are_reproduced() {
        let m = mesh();
        let c = vec![4.0; m.n_nodes()];
        for (_, v) in sample_line(&m, &c, [0.0, 0.3], [1.0, 0.7], 11).unwrap() {
            assert!((v - 4.0).abs() < 1e-14);
        }
        let lin: Vec<f64> = m.nodes().iter().map(|p| p[0]).collect();
        let samples = sample_line(&m, &lin, [0.0, 0.5], [1.0, 0.5], 17).unwrap();
        for (s, v) in samples {
            assert!((v - s).abs() < 1e-14);
        }
    }

    #[test]
    fn nodal_samples_are_exact() {
        let m = mesh();
        let f: Vec<f64> = (0..m.n_nodes()).map(|k| (k as f64).sin()).collect();
        for (k, p) in m.nodes().iter().enumerate() {
            let probe = LocatedProbe::locate(
                &m,
                &Probe {
                    label: "n".into(),
                    position: *p,
                },
            )
            .unwrap();
            assert!((probe.value(&f) - f[k]).abs() < 1e-14);
        }
    }

    #[test]
    fn probe_outside_mesh_is_rejected() {
        let m = mesh();
        let p = Probe {
            label: "far".into(),
            position: [2.0, 0.5],
        };
        assert!(LocatedProbe::locate(&m, &p).is_err());
        assert!(sample_line(&m, &vec![0.0; m.n_nodes()], [0.5, 0.5], [1.5, 0.5], 3).is_err());
    }

    #[test]
    fn csv_keeps_full_precision() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("h.csv");
        let x = 0.1 + 0.2;
        write_csv(&path, &["t".into(), "x".into()], &[vec![1.0, x]]).unwrap();
        let mut r = csv::Reader::from_path(&path).unwrap();
        let rec = r.records().next().unwrap().unwrap();
        assert_eq!(rec[1].parse::<f64>().unwrap(), x);
    }
}
