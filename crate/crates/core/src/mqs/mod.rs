//! Axisymmetric magnetoquasistatic system for `A = A_φ(ρ, z) e_φ`.
//!
//! Nodal P1 unknowns carry A_φ; the axis and the outer boundary are
//! homogeneous Dirichlet. With test functions `w_i = N_i e_φ` the blocks are
//!
//! ```text
//! K_ij = ∫ ν_ρ ∂zN_i ∂zN_j + ν_z (∂ρN_i + N_i/ρ)(∂ρN_j + N_j/ρ) dV
//! M_ij = ∫ σ N_i N_j dV
//! X_ij = ∫ σ ξ_j χ·w_i dV = ∫ σ ξ_j N_i dS
//! G_ij = ∫ σ ξ_i ξ_j / (2πρ) dS
//! ```
//!
//! with `dV = 2πρ dS`. `ν_ρ` multiplies `B_ρ = -∂zA` and `ν_z` multiplies
//! `B_z = ∂ρA + A/ρ`; see `docs/anisotropy.md` for the foil-winding case.

mod resolved;
mod solve;

use std::collections::BTreeSet;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

pub use resolved::{check_layer_resolution, resolved_layout, resolved_turn_regions, ResolvedLayout};
pub use solve::{extract_phasor, TimeStepper};

use crate::error::{Error, Result};
use crate::fem::RULE_7;
use crate::foil_winding::{FoilWindingSpec, VoltageBasis};
use crate::materials::AzimuthalConductivity;
use crate::mesh::Mesh;
use crate::sparse::{CsrMatrix, TripletMatrix};

/// Magnetic properties of one mesh region in global (ρ, z) components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MagneticRegion {
    /// Reluctivity acting on B_ρ, m/H.
    pub nu_rho: f64,
    /// Reluctivity acting on B_z, m/H.
    pub nu_z: f64,
    /// Conductivity carrying eddy currents along e_φ.
    pub sigma: AzimuthalConductivity,
    /// Imposed azimuthal source current density J_s in A/m².
    pub source_density: f64,
}

impl MagneticRegion {
    pub fn isotropic(nu: f64, sigma: AzimuthalConductivity) -> Self {
        MagneticRegion {
            nu_rho: nu,
            nu_z: nu,
            sigma,
            source_density: 0.0,
        }
    }
}

/// External circuit seen by one winding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WindingDrive {
    /// Imposed current `I sin(ωt)`, peak amplitude in A.
    Current { amplitude: f64 },
    /// Voltage source `V_s sin(ωt)` behind a series resistance: `v = V_s - R i`.
    Source { amplitude: f64, resistance: f64 },
    /// Passive load: `v + R i = 0`. An infinite resistance is an open circuit.
    Load { resistance: f64 },
}

impl WindingDrive {
    fn effective(self) -> WindingDrive {
        match self {
            WindingDrive::Load { resistance } if resistance.is_infinite() => WindingDrive::Current { amplitude: 0.0 },
            d => d,
        }
    }

    fn has_current_unknown(self) -> bool {
        !matches!(self.effective(), WindingDrive::Current { .. })
    }

    /// (source amplitude, resistance) of the loop equation `v + R i = V`.
    fn loop_terms(self) -> (f64, f64) {
        match self.effective() {
            WindingDrive::Source { amplitude, resistance } => (amplitude, resistance),
            WindingDrive::Load { resistance } => (0.0, resistance),
            WindingDrive::Current { .. } => (0.0, 0.0),
        }
    }

    pub fn validate(&self, name: &str) -> Result<()> {
        let bad = |f: &str, r: &str| Err(Error::validation(format!("{name}.drive.{f}"), r));
        match *self {
            WindingDrive::Current { amplitude } if !amplitude.is_finite() => bad("amplitude", "must be finite"),
            WindingDrive::Source { resistance, .. } if !(resistance >= 0.0 && resistance.is_finite()) => {
                bad("resistance", "must be finite and >= 0")
            }
            WindingDrive::Source { amplitude, .. } if !amplitude.is_finite() => bad("amplitude", "must be finite"),
            WindingDrive::Load { resistance } if !(resistance >= 0.0) => bad("resistance", "must be >= 0"),
            _ => Ok(()),
        }
    }
}

/// Basis of the winding's voltage unknowns.
#[derive(Debug, Clone, PartialEq)]
pub enum WindingBasis {
    /// Homogenized foil winding: hat functions in ρ.
    Hat(VoltageBasis),
    /// Resolved winding: one solid turn per listed region, unknown = turn voltage.
    SolidTurns(Vec<usize>),
}

impl WindingBasis {
    pub fn len(&self) -> usize {
        match self {
            WindingBasis::Hat(b) => b.len(),
            WindingBasis::SolidTurns(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Nonzero basis values at a point of `region` (second pair may be zero).
    fn eval(&self, rho: f64, region: usize) -> [(usize, f64); 2] {
        match self {
            WindingBasis::Hat(b) => b.eval(rho),
            WindingBasis::SolidTurns(regions) => {
                let k = regions.iter().position(|&r| r == region).unwrap_or(0);
                [(k, 1.0), (k, 0.0)]
            }
        }
    }
}

/// A winding whose current is carried by the field (voltage-function model).
#[derive(Debug, Clone)]
pub struct FoilWindingModel {
    pub name: String,
    pub regions: Vec<usize>,
    pub basis: WindingBasis,
    /// Coupling vector c with `V = c^T u`.
    pub coupling: Vec<f64>,
    /// Geometry of the homogenized winding, when there is one.
    pub spec: Option<FoilWindingSpec>,
    pub drive: WindingDrive,
}

/// Stranded (wire) winding with uniform current density and no eddy currents.
#[derive(Debug, Clone)]
pub struct StrandedWindingModel {
    pub name: String,
    pub region: usize,
    pub turns: f64,
    pub fill_factor: f64,
    /// Conductivity of the wire metal.
    pub conductor: AzimuthalConductivity,
    pub drive: WindingDrive,
}

#[derive(Debug, Clone)]
pub struct MagneticProblem {
    /// Indexed by mesh region id.
    pub regions: Vec<MagneticRegion>,
    pub foils: Vec<FoilWindingModel>,
    pub stranded: Vec<StrandedWindingModel>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RegionRole {
    Passive,
    Foil(usize),
    Stranded(usize),
}

/// Position of every unknown in the global vector.
#[derive(Debug, Clone)]
pub(crate) struct DofLayout {
    pub n_nodes: usize,
    pub foil_u: Vec<usize>,
    pub foil_i: Vec<Option<usize>>,
    pub stranded_i: Vec<Option<usize>>,
    pub n_total: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct FoilBlocks {
    /// n_nodes × n_u
    pub x: CsrMatrix<f64>,
    /// n_u × n_u, dense
    pub g: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub(crate) struct StrandedBlocks {
    /// Flux-linkage vector: `Ψ = s^T a`.
    pub s: Vec<f64>,
    pub area: f64,
    pub resistance: f64,
}

/// Assembled magnetic blocks on a fixed mesh.
#[derive(Debug, Clone)]
pub struct MagneticSystem<'m> {
    mesh: &'m Mesh,
    problem: MagneticProblem,
    roles: Vec<RegionRole>,
    pub(crate) layout: DofLayout,
    pub(crate) dirichlet: Vec<bool>,
    pub(crate) stiffness: CsrMatrix<f64>,
    pub(crate) mass: CsrMatrix<f64>,
    pub(crate) foils: Vec<FoilBlocks>,
    pub(crate) stranded: Vec<StrandedBlocks>,
    pub(crate) source: Vec<f64>,
    element_sigma: Vec<f64>,
    element_wire_sigma: Vec<f64>,
    element_volume: Vec<f64>,
}

/// Per-winding terminal quantities. For foil windings `u` holds the voltage
/// function coefficients and `cut_integrals` the Galerkin cut integrals.
#[derive(Debug, Clone, PartialEq)]
pub struct WindingState<T> {
    pub u: Vec<T>,
    pub cut_integrals: Vec<T>,
    pub current: T,
    pub voltage: T,
}

/// Solution of the magnetic system: phasors (frequency mode, peak values) or
/// instantaneous values at `time` (time mode).
#[derive(Debug, Clone, PartialEq)]
pub struct MagneticState<T> {
    pub a: Vec<T>,
    pub foils: Vec<WindingState<T>>,
    pub stranded: Vec<WindingState<T>>,
    pub time: f64,
    pub omega: f64,
}

impl<T: crate::sparse::Scalar> MagneticState<T> {
    pub fn norm(&self) -> f64 {
        self.a.iter().map(|v| v.modulus().powi(2)).sum::<f64>().sqrt()
    }
}

impl MagneticProblem {
    fn validate(&self, mesh: &Mesh) -> Result<Vec<RegionRole>> {
        let n_regions = mesh.region_names().len();
        if self.regions.len() != n_regions {
            return Err(Error::validation(
                "materials",
                format!("{} regions in mesh, {} magnetic materials", n_regions, self.regions.len()),
            ));
        }
        for (k, r) in self.regions.iter().enumerate() {
            let name = &mesh.region_names()[k];
            if !(r.nu_rho > 0.0 && r.nu_z > 0.0) {
                return Err(Error::validation(format!("materials.{name}"), "reluctivity must be > 0"));
            }
            if !(r.sigma.at(r.sigma.law.map_or(0.0, |l| l.t_ref))? >= 0.0) {
                return Err(Error::validation(format!("materials.{name}"), "conductivity must be >= 0"));
            }
        }
        let mut roles = vec![RegionRole::Passive; n_regions];
        for (w, f) in self.foils.iter().enumerate() {
            f.drive.validate(&f.name)?;
            if f.basis.len() != f.coupling.len() || f.basis.is_empty() {
                return Err(Error::validation(&f.name, "coupling vector does not match the basis"));
            }
            for &r in &f.regions {
                if r >= n_regions || roles[r] != RegionRole::Passive {
                    return Err(Error::validation(&f.name, "winding region missing or shared"));
                }
                roles[r] = RegionRole::Foil(w);
            }
        }
        for (k, s) in self.stranded.iter().enumerate() {
            s.drive.validate(&s.name)?;
            if s.region >= n_regions || roles[s.region] != RegionRole::Passive {
                return Err(Error::validation(&s.name, "winding region missing or shared"));
            }
            if !(s.turns >= 1.0) {
                return Err(Error::validation(format!("{}.turns", s.name), "must be >= 1"));
            }
            if !(s.fill_factor > 0.0 && s.fill_factor <= 1.0) {
                return Err(Error::validation(format!("{}.fill_factor", s.name), "must lie in (0, 1]"));
            }
            roles[s.region] = RegionRole::Stranded(k);
        }
        Ok(roles)
    }
}

/// Assembles every block at the reference temperature of each conductivity law.
pub fn assemble<'m>(mesh: &'m Mesh, problem: MagneticProblem) -> Result<MagneticSystem<'m>> {
    let roles = problem.validate(mesh)?;

    let n_nodes = mesh.n_nodes();
    let mut next = n_nodes;
    let mut foil_u = Vec::new();
    for f in &problem.foils {
        foil_u.push(next);
        next += f.basis.len();
    }
    let mut foil_i = Vec::new();
    for f in &problem.foils {
        foil_i.push(f.drive.has_current_unknown().then(|| {
            next += 1;
            next - 1
        }));
    }
    let mut stranded_i = Vec::new();
    for s in &problem.stranded {
        stranded_i.push(s.drive.has_current_unknown().then(|| {
            next += 1;
            next - 1
        }));
    }
    let layout = DofLayout {
        n_nodes,
        foil_u,
        foil_i,
        stranded_i,
        n_total: next,
    };

    let mut dirichlet = mesh.boundary_nodes();
    dirichlet.resize(layout.n_total, false);

    let element_volume: Vec<f64> = (0..mesh.n_triangles()).map(|e| mesh.element(e).volume()).collect();

    let mut system = MagneticSystem {
        mesh,
        stiffness: assemble_stiffness(mesh, &problem.regions),
        source: assemble_source(mesh, &problem.regions),
        problem,
        roles,
        layout,
        dirichlet,
        mass: CsrMatrix::zeros(n_nodes, n_nodes),
        foils: Vec::new(),
        stranded: Vec::new(),
        element_sigma: Vec::new(),
        element_wire_sigma: Vec::new(),
        element_volume,
    };
    let temps: Vec<f64> = (0..mesh.n_triangles())
        .map(|e| {
            let r = mesh.region_of(e);
            match system.roles[r] {
                RegionRole::Stranded(k) => system.problem.stranded[k].conductor.law.map_or(0.0, |l| l.t_ref),
                _ => system.problem.regions[r].sigma.law.map_or(0.0, |l| l.t_ref),
            }
        })
        .collect();
    system.update_conductivity(&temps)?;
    Ok(system)
}

fn assemble_stiffness(mesh: &Mesh, regions: &[MagneticRegion]) -> CsrMatrix<f64> {
    let n = mesh.n_nodes();
    let mut trip = TripletMatrix::with_capacity(n, n, 9 * mesh.n_triangles());
    for e in 0..mesh.n_triangles() {
        let tri = mesh.element(e);
        let nodes = mesh.triangle(e);
        let reg = &regions[mesh.region_of(e)];
        let mut ke = [[0.0; 3]; 3];
        for (p, n_val, w) in tri.quadrature(&RULE_7) {
            let rho = p[0];
            let dv = 2.0 * PI * rho * w;
            // B_z and B_ρ of each shape function
            let bz: [f64; 3] = std::array::from_fn(|k| tri.grad[k][0] + n_val[k] / rho);
            let br: [f64; 3] = std::array::from_fn(|k| -tri.grad[k][1]);
            for i in 0..3 {
                for j in i..3 {
                    ke[i][j] += (reg.nu_z * bz[i] * bz[j] + reg.nu_rho * br[i] * br[j]) * dv;
                }
            }
        }
        mirror(&mut ke);
        for i in 0..3 {
            for j in 0..3 {
                trip.push(nodes[i], nodes[j], ke[i][j]);
            }
        }
    }
    trip.to_csr()
}

/// Copies the upper triangle of an element matrix to the lower one.
pub(crate) fn mirror(m: &mut [[f64; 3]; 3]) {
    for i in 0..3 {
        for j in 0..i {
            m[i][j] = m[j][i];
        }
    }
}

fn assemble_source(mesh: &Mesh, regions: &[MagneticRegion]) -> Vec<f64> {
    let mut q = vec![0.0; mesh.n_nodes()];
    for e in 0..mesh.n_triangles() {
        let js = regions[mesh.region_of(e)].source_density;
        if js == 0.0 {
            continue;
        }
        let tri = mesh.element(e);
        let nodes = mesh.triangle(e);
        for (p, n_val, w) in tri.quadrature(&RULE_7) {
            for k in 0..3 {
                q[nodes[k]] += js * n_val[k] * 2.0 * PI * p[0] * w;
            }
        }
    }
    q
}

impl<'m> MagneticSystem<'m> {
    pub fn mesh(&self) -> &'m Mesh {
        self.mesh
    }

    pub fn problem(&self) -> &MagneticProblem {
        &self.problem
    }

    pub fn n_dofs(&self) -> usize {
        self.layout.n_total
    }

    pub fn stiffness(&self) -> &CsrMatrix<f64> {
        &self.stiffness
    }

    pub fn mass(&self) -> &CsrMatrix<f64> {
        &self.mass
    }

    /// X_σ of foil winding `w` (nodes × basis).
    pub fn coupling_matrix(&self, w: usize) -> &CsrMatrix<f64> {
        &self.foils[w].x
    }

    /// G_σ of foil winding `w`.
    pub fn gram(&self, w: usize) -> &[Vec<f64>] {
        &self.foils[w].g
    }

    /// Source load vector q_mg.
    pub fn source_vector(&self) -> &[f64] {
        &self.source
    }

    /// Flux-linkage vector of stranded winding `k`.
    pub fn stranded_vector(&self, k: usize) -> &[f64] {
        &self.stranded[k].s
    }

    /// DC resistance of stranded winding `k` at the current conductivities.
    pub fn stranded_resistance(&self, k: usize) -> f64 {
        self.stranded[k].resistance
    }

    pub fn element_volumes(&self) -> &[f64] {
        &self.element_volume
    }

    pub fn element_conductivity(&self) -> &[f64] {
        &self.element_sigma
    }

    /// Re-evaluates σ(T) with one temperature per element and reassembles the
    /// conductivity-dependent blocks (M_σ, X_σ, G_σ, stranded resistances).
    pub fn update_conductivity(&mut self, element_temperature: &[f64]) -> Result<()> {
        let mesh = self.mesh;
        assert_eq!(element_temperature.len(), mesh.n_triangles());
        let mut sigma = Vec::with_capacity(mesh.n_triangles());
        let mut wire = Vec::with_capacity(mesh.n_triangles());
        for e in 0..mesh.n_triangles() {
            let r = mesh.region_of(e);
            let t = element_temperature[e];
            match self.roles[r] {
                RegionRole::Stranded(k) => {
                    sigma.push(0.0);
                    wire.push(self.problem.stranded[k].conductor.at(t)?);
                }
                _ => {
                    sigma.push(self.problem.regions[r].sigma.at(t)?);
                    wire.push(0.0);
                }
            }
        }
        self.element_sigma = sigma;
        self.element_wire_sigma = wire;
        self.assemble_conductivity_blocks();
        Ok(())
    }

    fn assemble_conductivity_blocks(&mut self) {
        let mesh = self.mesh;
        let n = mesh.n_nodes();
        let mut mass = TripletMatrix::with_capacity(n, n, 9 * mesh.n_triangles());
        let mut x_trip: Vec<TripletMatrix<f64>> = self.problem.foils.iter().map(|f| TripletMatrix::new(n, f.basis.len())).collect();
        let mut g: Vec<Vec<Vec<f64>>> = self
            .problem
            .foils
            .iter()
            .map(|f| vec![vec![0.0; f.basis.len()]; f.basis.len()])
            .collect();

        for e in 0..mesh.n_triangles() {
            let sigma = self.element_sigma[e];
            if sigma == 0.0 {
                continue;
            }
            let region = mesh.region_of(e);
            let tri = mesh.element(e);
            let nodes = mesh.triangle(e);
            let foil = match self.roles[region] {
                RegionRole::Foil(w) => Some(w),
                _ => None,
            };
            let mut me = [[0.0; 3]; 3];
            let mut xe: Vec<(usize, usize, f64)> = Vec::new();
            for (p, n_val, w) in tri.quadrature(&RULE_7) {
                let rho = p[0];
                let dv = 2.0 * PI * rho * w;
                for i in 0..3 {
                    for j in i..3 {
                        me[i][j] += sigma * n_val[i] * n_val[j] * dv;
                    }
                }
                if let Some(wi) = foil {
                    let vals = self.problem.foils[wi].basis.eval(rho, region);
                    for &(j, xi) in &vals {
                        if xi == 0.0 {
                            continue;
                        }
                        for k in 0..3 {
                            xe.push((nodes[k], j, sigma * xi * n_val[k] * w));
                        }
                        for &(l, xl) in &vals {
                            if xl != 0.0 && l >= j {
                                g[wi][j][l] += sigma * xi * xl / (2.0 * PI * rho) * w;
                            }
                        }
                    }
                }
            }
            mirror(&mut me);
            for i in 0..3 {
                for j in 0..3 {
                    mass.push(nodes[i], nodes[j], me[i][j]);
                }
            }
            if let Some(wi) = foil {
                for (i, j, v) in xe {
                    x_trip[wi].push(i, j, v);
                }
            }
        }
        for gw in &mut g {
            for j in 0..gw.len() {
                for l in 0..j {
                    gw[j][l] = gw[l][j];
                }
            }
        }
        self.mass = mass.to_csr();
        self.foils = x_trip.into_iter().zip(g).map(|(x, g)| FoilBlocks { x: x.to_csr(), g }).collect();

        let mut stranded = Vec::with_capacity(self.problem.stranded.len());
        for s in &self.problem.stranded {
            let elements = mesh.elements_in(&[s.region]);
            let area: f64 = elements.iter().map(|&e| mesh.element(e).area).sum();
            let density = s.turns / area;
            let mut vec_s = vec![0.0; n];
            let mut resistance = 0.0;
            for &e in &elements {
                let tri = mesh.element(e);
                let nodes = mesh.triangle(e);
                for (p, n_val, w) in tri.quadrature(&RULE_7) {
                    for k in 0..3 {
                        vec_s[nodes[k]] += density * n_val[k] * 2.0 * PI * p[0] * w;
                    }
                }
                resistance += s.turns * s.turns / (s.fill_factor * self.element_wire_sigma[e] * area * area) * self.element_volume[e];
            }
            stranded.push(StrandedBlocks {
                s: vec_s,
                area,
                resistance,
            });
        }
        self.stranded = stranded;
    }

    /// True when any conductivity depends on temperature.
    pub fn is_temperature_dependent(&self) -> bool {
        self.problem.regions.iter().any(|r| r.sigma.is_temperature_dependent())
            || self.problem.stranded.iter().any(|s| s.conductor.is_temperature_dependent())
    }

    /// Regions carrying winding `w`'s voltage function.
    pub fn foil_regions(&self, w: usize) -> &[usize] {
        &self.problem.foils[w].regions
    }

    /// Magnetic co-energy `½ a^T K a` of a real state, in J.
    pub fn magnetic_energy(&self, a: &[f64]) -> f64 {
        0.5 * self.stiffness.bilinear(a, a)
    }

    /// Nodes carrying nonzero entries of any X_σ column.
    pub fn foil_nodes(&self, w: usize) -> BTreeSet<usize> {
        self.foils[w].x.iter().map(|(i, _, _)| i).collect()
    }

    fn role(&self, region: usize) -> RegionRole {
        self.roles[region]
    }
}

#[cfg(test)]
mod tests;
