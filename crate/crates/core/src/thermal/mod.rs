//! Transient axisymmetric heat conduction
//! `c_V ∂T/∂t - div(λ grad T) = q` with diagonal λ = diag(λ_ρ, λ_z).
//!
//! Boundary conditions are given per boundary tag: isothermal (Dirichlet),
//! convective (Robin, `-λ ∂T/∂n = h (T - T_ref)`) or adiabatic.

mod mms;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

pub use mms::{mms_convergence, MmsCase, MmsLevel};

use crate::error::{Error, Result};
use crate::fem::{EDGE_GAUSS_3, RULE_7};
use crate::mesh::Mesh;
use crate::mqs::mirror;
use crate::sparse::{CsrMatrix, ReducedSolver, TripletMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalRegion {
    /// Conductivity along ρ, W/(m·K).
    pub lambda_rho: f64,
    /// Conductivity along z, W/(m·K).
    pub lambda_z: f64,
    /// Volumetric heat capacity, J/(m³·K).
    pub c_v: f64,
}

impl ThermalRegion {
    pub fn isotropic(lambda: f64, c_v: f64) -> Self {
        ThermalRegion {
            lambda_rho: lambda,
            lambda_z: lambda,
            c_v,
        }
    }
}

/// Condition on one boundary tag; temperatures in kelvin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ThermalBoundary {
    Isothermal { temperature: f64 },
    Convective { h: f64, ambient: f64 },
    Adiabatic,
}

#[derive(Debug, Clone)]
pub struct ThermalProblem {
    /// Indexed by mesh region id.
    pub regions: Vec<ThermalRegion>,
    /// Indexed by mesh boundary tag id.
    pub boundaries: Vec<ThermalBoundary>,
}

/// Assembled thermal matrices.
#[derive(Debug, Clone)]
pub struct ThermalSystem<'m> {
    mesh: &'m Mesh,
    stiffness: CsrMatrix<f64>,
    mass: CsrMatrix<f64>,
    robin: CsrMatrix<f64>,
    robin_load: Vec<f64>,
    dirichlet: Vec<bool>,
    dirichlet_values: Vec<f64>,
    boundaries: Vec<ThermalBoundary>,
    /// Boundary tag owning each Dirichlet node (first isothermal tag wins).
    dirichlet_tag: Vec<Option<usize>>,
}

/// Heat leaving the domain through each boundary tag, in W.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryHeatFlow {
    pub per_tag: Vec<f64>,
}

impl BoundaryHeatFlow {
    pub fn total(&self) -> f64 {
        self.per_tag.iter().sum()
    }
}

pub fn assemble<'m>(mesh: &'m Mesh, problem: &ThermalProblem) -> Result<ThermalSystem<'m>> {
    if problem.regions.len() != mesh.region_names().len() {
        return Err(Error::validation(
            "thermal.materials",
            format!(
                "{} regions in mesh, {} thermal materials",
                mesh.region_names().len(),
                problem.regions.len()
            ),
        ));
    }
    if problem.boundaries.len() != mesh.boundary_names().len() {
        let missing = mesh.boundary_names().get(problem.boundaries.len()).cloned().unwrap_or_default();
        return Err(Error::validation(
            format!("thermal.boundaries.{missing}"),
            "boundary tag has no condition",
        ));
    }
    for (k, r) in problem.regions.iter().enumerate() {
        if !(r.lambda_rho > 0.0 && r.lambda_z > 0.0 && r.c_v > 0.0) {
            return Err(Error::validation(
                format!("thermal.materials.{}", mesh.region_names()[k]),
                "lambda and c_v must be > 0",
            ));
        }
    }
    for (k, b) in problem.boundaries.iter().enumerate() {
        let bad = match *b {
            ThermalBoundary::Isothermal { temperature } => !(temperature > 0.0),
            ThermalBoundary::Convective { h, ambient } => !(h >= 0.0 && h.is_finite() && ambient > 0.0),
            ThermalBoundary::Adiabatic => false,
        };
        if bad {
            return Err(Error::validation(
                format!("thermal.boundaries.{}", mesh.boundary_names()[k]),
                "needs h >= 0 and absolute temperatures > 0 K",
            ));
        }
    }

    let n = mesh.n_nodes();
    let mut k_trip = TripletMatrix::with_capacity(n, n, 9 * mesh.n_triangles());
    let mut m_trip = TripletMatrix::with_capacity(n, n, 9 * mesh.n_triangles());
    for e in 0..mesh.n_triangles() {
        let tri = mesh.element(e);
        let nodes = mesh.triangle(e);
        let reg = &problem.regions[mesh.region_of(e)];
        let mut ke = [[0.0; 3]; 3];
        let mut me = [[0.0; 3]; 3];
        for (p, n_val, w) in tri.quadrature(&RULE_7) {
            let dv = 2.0 * PI * p[0] * w;
            for i in 0..3 {
                for j in i..3 {
                    let g = reg.lambda_rho * tri.grad[i][0] * tri.grad[j][0] + reg.lambda_z * tri.grad[i][1] * tri.grad[j][1];
                    ke[i][j] += g * dv;
                    me[i][j] += reg.c_v * n_val[i] * n_val[j] * dv;
                }
            }
        }
        mirror(&mut ke);
        mirror(&mut me);
        for i in 0..3 {
            for j in 0..3 {
                k_trip.push(nodes[i], nodes[j], ke[i][j]);
                m_trip.push(nodes[i], nodes[j], me[i][j]);
            }
        }
    }

    let mut r_trip = TripletMatrix::new(n, n);
    let mut robin_load = vec![0.0; n];
    let mut dirichlet = vec![false; n];
    let mut dirichlet_values = vec![0.0; n];
    let mut dirichlet_tag = vec![None; n];
    for (edge, &tag) in mesh.boundary_edges().iter().zip(mesh.edge_tags()) {
        match problem.boundaries[tag] {
            ThermalBoundary::Isothermal { temperature } => {
                for &k in edge {
                    if !dirichlet[k] {
                        dirichlet[k] = true;
                        dirichlet_values[k] = temperature;
                        dirichlet_tag[k] = Some(tag);
                    }
                }
            }
            ThermalBoundary::Convective { h, ambient } => {
                let (a, b) = (mesh.node(edge[0]), mesh.node(edge[1]));
                let len = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
                let mut re = [[0.0; 2]; 2];
                let mut le = [0.0; 2];
                for (t, w) in EDGE_GAUSS_3 {
                    let n_val = [1.0 - t, t];
                    let rho = a[0] + t * (b[0] - a[0]);
                    let da = 2.0 * PI * rho * len * w;
                    for i in 0..2 {
                        for j in 0..2 {
                            re[i][j] += h * n_val[i] * n_val[j] * da;
                        }
                        le[i] += h * ambient * n_val[i] * da;
                    }
                }
                re[1][0] = re[0][1];
                for i in 0..2 {
                    robin_load[edge[i]] += le[i];
                    for j in 0..2 {
                        r_trip.push(edge[i], edge[j], re[i][j]);
                    }
                }
            }
            ThermalBoundary::Adiabatic => {}
        }
    }

    Ok(ThermalSystem {
        mesh,
        stiffness: k_trip.to_csr(),
        mass: m_trip.to_csr(),
        robin: r_trip.to_csr(),
        robin_load,
        dirichlet,
        dirichlet_values,
        boundaries: problem.boundaries.clone(),
        dirichlet_tag,
    })
}

fn add(a: &CsrMatrix<f64>, b: &CsrMatrix<f64>, scale_b: f64) -> CsrMatrix<f64> {
    let mut t = TripletMatrix::with_capacity(a.nrows(), a.ncols(), a.nnz() + b.nnz());
    t.extend_from_csr(a, 0, 0, 1.0);
    t.extend_from_csr(b, 0, 0, scale_b);
    t.to_csr()
}

impl<'m> ThermalSystem<'m> {
    pub fn mesh(&self) -> &'m Mesh {
        self.mesh
    }

    pub fn stiffness(&self) -> &CsrMatrix<f64> {
        &self.stiffness
    }

    pub fn mass(&self) -> &CsrMatrix<f64> {
        &self.mass
    }

    pub fn robin(&self) -> &CsrMatrix<f64> {
        &self.robin
    }

    pub fn robin_load(&self) -> &[f64] {
        &self.robin_load
    }

    pub fn dirichlet_nodes(&self) -> &[bool] {
        &self.dirichlet
    }

    pub fn has_dirichlet(&self) -> bool {
        self.dirichlet.iter().any(|&d| d)
    }

    /// Replaces the prescribed values on Dirichlet nodes by `f(node)`.
    pub fn set_dirichlet_values(&mut self, f: impl Fn([f64; 2]) -> f64) {
        for k in 0..self.mesh.n_nodes() {
            if self.dirichlet[k] {
                self.dirichlet_values[k] = f(self.mesh.node(k));
            }
        }
    }

    /// Uniform initial field with Dirichlet values imposed.
    pub fn uniform_state(&self, temperature: f64) -> Vec<f64> {
        (0..self.mesh.n_nodes())
            .map(|k| if self.dirichlet[k] { self.dirichlet_values[k] } else { temperature })
            .collect()
    }

    /// Load vector of an element-wise constant heat source density in W/m³.
    pub fn load_from_elements(&self, density: &[f64]) -> Vec<f64> {
        assert_eq!(density.len(), self.mesh.n_triangles());
        let mut q = vec![0.0; self.mesh.n_nodes()];
        for (e, &p) in density.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let tri = self.mesh.element(e);
            let nodes = self.mesh.triangle(e);
            for (pt, n_val, w) in tri.quadrature(&RULE_7) {
                for k in 0..3 {
                    q[nodes[k]] += p * n_val[k] * 2.0 * PI * pt[0] * w;
                }
            }
        }
        q
    }

    /// Load vector of a heat source density given pointwise.
    pub fn load_from_fn(&self, f: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
        let mut q = vec![0.0; self.mesh.n_nodes()];
        for e in 0..self.mesh.n_triangles() {
            let tri = self.mesh.element(e);
            let nodes = self.mesh.triangle(e);
            for (pt, n_val, w) in tri.quadrature(&RULE_7) {
                let v = f(pt);
                for k in 0..3 {
                    q[nodes[k]] += v * n_val[k] * 2.0 * PI * pt[0] * w;
                }
            }
        }
        q
    }

    fn solve(&self, matrix: &CsrMatrix<f64>, rhs: &[f64], block: &str) -> Result<Vec<f64>> {
        let solver = ReducedSolver::new(matrix, &self.dirichlet, self.mesh.n_nodes()).map_err(|e| rename(e, block))?;
        Ok(solver.solve(rhs, &self.dirichlet_values))
    }

    /// Steady state `(K + R) T = q + r`.
    pub fn steady(&self, q: &[f64]) -> Result<Vec<f64>> {
        if !self.has_dirichlet() && self.robin.iter().all(|(_, _, v)| v == 0.0) {
            return Err(Error::Singular {
                block: "thermal steady state without isothermal or convective boundary".into(),
                pivot: self.mesh.n_nodes().saturating_sub(1),
            });
        }
        let matrix = add(&self.stiffness, &self.robin, 1.0);
        let rhs: Vec<f64> = q.iter().zip(&self.robin_load).map(|(a, b)| a + b).collect();
        self.solve(&matrix, &rhs, "thermal steady state")
    }

    /// Backward-Euler stepper for a fixed Δt.
    pub fn stepper(&self, dt: f64) -> Result<ThermalStepper<'_, 'm>> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::validation("dt_th", "must be positive"));
        }
        let kr = add(&self.stiffness, &self.robin, 1.0);
        let matrix = add(&kr, &self.mass, 1.0 / dt);
        let solver = ReducedSolver::new(&matrix, &self.dirichlet, self.mesh.n_nodes()).map_err(|e| rename(e, "thermal step"))?;
        Ok(ThermalStepper { system: self, dt, solver })
    }

    /// Internal energy `∫ c_V T dV` in J.
    pub fn internal_energy(&self, t: &[f64]) -> f64 {
        let ones = vec![1.0; t.len()];
        self.mass.bilinear(&ones, t)
    }

    /// Mean nodal temperature per element (the centroid value for P1).
    pub fn element_means(&self, t: &[f64]) -> Vec<f64> {
        self.mesh
            .triangles()
            .iter()
            .map(|tri| (t[tri[0]] + t[tri[1]] + t[tri[2]]) / 3.0)
            .collect()
    }

    /// Heat leaving through each boundary tag, from consistent nodal fluxes.
    ///
    /// Robin tags report `∫ h (T - T_amb) dA`; isothermal tags report the
    /// Dirichlet reactions of the balance `M Ṫ + K T + R T - r - q`, with
    /// `t_old` and `dt` describing the last step (`None` for a steady state).
    pub fn boundary_heat_flow(&self, t: &[f64], q: &[f64], previous: Option<(&[f64], f64)>) -> BoundaryHeatFlow {
        let mut per_tag = vec![0.0; self.boundaries.len()];
        let kt = self.stiffness.mul_vec(t);
        let rt = self.robin.mul_vec(t);
        let storage: Vec<f64> = match previous {
            Some((old, dt)) => {
                let diff: Vec<f64> = t.iter().zip(old).map(|(a, b)| (a - b) / dt).collect();
                self.mass.mul_vec(&diff)
            }
            None => vec![0.0; t.len()],
        };
        // Robin flux per tag from edge integrals
        for (edge, &tag) in self.mesh.boundary_edges().iter().zip(self.mesh.edge_tags()) {
            if let ThermalBoundary::Convective { h, ambient } = self.boundaries[tag] {
                let (a, b) = (self.mesh.node(edge[0]), self.mesh.node(edge[1]));
                let len = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
                for (s, w) in EDGE_GAUSS_3 {
                    let temp = (1.0 - s) * t[edge[0]] + s * t[edge[1]];
                    let rho = a[0] + s * (b[0] - a[0]);
                    per_tag[tag] += h * (temp - ambient) * 2.0 * PI * rho * len * w;
                }
            }
        }
        for k in 0..t.len() {
            if let Some(tag) = self.dirichlet_tag[k] {
                per_tag[tag] -= storage[k] + kt[k] + rt[k] - self.robin_load[k] - q[k];
            }
        }
        BoundaryHeatFlow { per_tag }
    }
}

fn rename(e: Error, block: &str) -> Error {
    match e {
        Error::Singular { pivot, .. } => Error::Singular {
            block: block.to_string(),
            pivot,
        },
        other => other,
    }
}

/// Backward-Euler thermal stepper with a reused factorization.
pub struct ThermalStepper<'s, 'm> {
    system: &'s ThermalSystem<'m>,
    dt: f64,
    solver: ReducedSolver<f64>,
}

impl ThermalStepper<'_, '_> {
    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// `(M/Δt + K + R) T = M/Δt T_old + q + r`.
    pub fn step(&self, t_old: &[f64], q: &[f64]) -> Vec<f64> {
        let sys = self.system;
        let m_old = sys.mass.mul_vec(t_old);
        let rhs: Vec<f64> = (0..t_old.len()).map(|i| m_old[i] / self.dt + q[i] + sys.robin_load[i]).collect();
        self.solver.solve(&rhs, &sys.dirichlet_values)
    }
}
