//! Steady manufactured-solution study on a rectangle of the meridian plane.

use std::f64::consts::PI;

use serde::Serialize;

use super::{assemble, ThermalBoundary, ThermalProblem, ThermalRegion};
use crate::error::{Error, Result};
use crate::fem::RULE_7;
use crate::mesh::{generate, Layout, Mesh};

/// Manufactured cases: `T* = T0 + sin(a ρ) cos(b z)` off the axis, or
/// `T0 + cos(a ρ) cos(b z)` on a domain touching the axis (adiabatic there).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum MmsCase {
    Isotropic,
    /// λ_ρ = 1, λ_z = 25.
    Anisotropic,
    /// Domain starting at ρ = 0 with the natural condition on the axis.
    Axis,
    /// T* = T0; the discrete solution must be exact.
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MmsLevel {
    pub h: f64,
    pub n_elements: usize,
    pub l2_error: f64,
    /// Observed order against the previous level.
    pub rate: Option<f64>,
}

const T0: f64 = 300.0;
const A: f64 = 2.0;
const B: f64 = 1.5;

impl MmsCase {
    fn lambda(self) -> (f64, f64) {
        match self {
            MmsCase::Anisotropic => (1.0, 25.0),
            _ => (1.0, 1.0),
        }
    }

    fn domain(self) -> ([f64; 2], [f64; 2]) {
        match self {
            MmsCase::Axis => ([0.0, 1.0], [0.0, 1.0]),
            _ => ([0.5, 1.5], [0.0, 1.0]),
        }
    }

    fn exact(self, p: [f64; 2]) -> f64 {
        let [r, z] = p;
        match self {
            MmsCase::Constant => T0,
            MmsCase::Axis => T0 + (A * r).cos() * (B * z).cos(),
            _ => T0 + (A * r).sin() * (B * z).cos(),
        }
    }

    /// `-(1/ρ) ∂ρ(ρ λ_ρ ∂ρT) - λ_z ∂zz T`.
    fn source(self, p: [f64; 2]) -> f64 {
        let [r, z] = p;
        let (lr, lz) = self.lambda();
        let cz = (B * z).cos();
        match self {
            MmsCase::Constant => 0.0,
            MmsCase::Axis => {
                let (s, c) = (A * r).sin_cos();
                -lr * (-A * A * c - A * s / r) * cz + lz * B * B * c * cz
            }
            _ => {
                let (s, c) = (A * r).sin_cos();
                -lr * (-A * A * s + A * c / r) * cz + lz * B * B * s * cz
            }
        }
    }
}

fn l2_error(mesh: &Mesh, t: &[f64], exact: impl Fn([f64; 2]) -> f64) -> f64 {
    let mut acc = 0.0;
    for e in 0..mesh.n_triangles() {
        let tri = mesh.element(e);
        let nodes = mesh.triangle(e);
        for (p, n_val, w) in tri.quadrature(&RULE_7) {
            let th: f64 = (0..3).map(|k| n_val[k] * t[nodes[k]]).sum();
            acc += (th - exact(p)).powi(2) * 2.0 * PI * p[0] * w;
        }
    }
    acc.sqrt()
}

/// Solves the case on `levels` uniformly refined meshes starting from h = 1/4.
pub fn mms_convergence(levels: usize, case: MmsCase) -> Result<Vec<MmsLevel>> {
    if levels < 3 {
        return Err(Error::validation("levels", format!("{levels} requested, need at least 3")));
    }
    let (rho, z) = case.domain();
    let mut mesh = generate(&Layout::single("box", rho, z), 0.25)?;
    let (lr, lz) = case.lambda();
    let mut out: Vec<MmsLevel> = Vec::with_capacity(levels);
    for level in 0..levels {
        if level > 0 {
            mesh = mesh.refine_uniform();
        }
        let boundaries = mesh
            .boundary_names()
            .iter()
            .map(|name| match name.as_str() {
                crate::mesh::AXIS_TAG => ThermalBoundary::Adiabatic,
                _ => ThermalBoundary::Isothermal { temperature: T0 },
            })
            .collect();
        let problem = ThermalProblem {
            regions: vec![ThermalRegion {
                lambda_rho: lr,
                lambda_z: lz,
                c_v: 1.0,
            }],
            boundaries,
        };
        let mut sys = assemble(&mesh, &problem)?;
        sys.set_dirichlet_values(|p| case.exact(p));
        let q = sys.load_from_fn(|p| case.source(p));
        let t = sys.steady(&q)?;
        let err = l2_error(&mesh, &t, |p| case.exact(p));
        let h = 0.25 / f64::powi(2.0, level as i32);
        let rate = out.last().map(|prev| (prev.l2_error / err).ln() / (prev.h / h).ln());
        out.push(MmsLevel {
            h,
            n_elements: mesh.n_triangles(),
            l2_error: err,
            rate,
        });
    }
    Ok(out)
}
