//! JSON problem decks: parsing, validation, defaults and model construction.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::coupling::{CouplingSettings, MagneticMode};
use crate::error::{Error, Result};
use crate::foil_winding::FoilWindingSpec;
use crate::materials::{homogenize, AzimuthalConductivity, MaterialSpec};
use crate::mesh::{generate, Layout, Mesh, RegionRect};
use crate::mqs::{FoilWindingModel, MagneticProblem, MagneticRegion, StrandedWindingModel, WindingDrive};
use crate::post::Probe;
use crate::thermal::{ThermalBoundary, ThermalProblem, ThermalRegion};

const KELVIN_OFFSET: f64 = 273.15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TemperatureUnit {
    #[serde(rename = "K")]
    Kelvin,
    #[serde(rename = "degC")]
    Celsius,
}

/// Temperature with an explicit unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Temperature {
    pub value: f64,
    pub unit: TemperatureUnit,
}

impl Temperature {
    pub fn kelvin(k: f64) -> Self {
        Temperature {
            value: k,
            unit: TemperatureUnit::Kelvin,
        }
    }

    pub fn celsius(c: f64) -> Self {
        Temperature {
            value: c,
            unit: TemperatureUnit::Celsius,
        }
    }

    pub fn to_kelvin(self) -> f64 {
        match self.unit {
            TemperatureUnit::Kelvin => self.value,
            TemperatureUnit::Celsius => self.value + KELVIN_OFFSET,
        }
    }
}

pub fn kelvin_to_celsius(k: f64) -> f64 {
    k - KELVIN_OFFSET
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialConfig {
    #[serde(default)]
    pub sigma: f64,
    #[serde(default = "one")]
    pub mu_r: f64,
    pub lambda: f64,
    pub c_v: f64,
    /// Temperature coefficient of resistivity, 1/K.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

fn one() -> f64 {
    1.0
}

impl MaterialConfig {
    pub fn spec(&self) -> MaterialSpec {
        let m = MaterialSpec::new(self.sigma, self.mu_r, self.lambda, self.c_v);
        match self.alpha {
            Some(a) => m.with_alpha(a),
            None => m,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    /// Target element size, m.
    pub h: f64,
    /// Uniform refinements applied after generation.
    #[serde(default)]
    pub refine: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FoilWindingConfig {
    pub name: String,
    pub region: String,
    pub turns: u32,
    pub fill_factor: f64,
    pub conductor: String,
    pub insulator: String,
    pub drive: WindingDrive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrandedWindingConfig {
    pub name: String,
    pub region: String,
    pub turns: u32,
    pub fill_factor: f64,
    pub conductor: String,
    pub insulator: String,
    pub drive: WindingDrive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MagneticConfig {
    #[serde(default)]
    pub mode: MagneticMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps_per_period: Option<usize>,
    /// Magnetic time step, s; must divide the period into whole steps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_mag: Option<f64>,
    #[serde(default = "two")]
    pub periods_per_window: usize,
}

fn two() -> usize {
    2
}

impl Default for MagneticConfig {
    fn default() -> Self {
        MagneticConfig {
            mode: MagneticMode::Harmonic,
            steps_per_period: None,
            dt_mag: None,
            periods_per_window: 2,
        }
    }
}

pub const DEFAULT_STEPS_PER_PERIOD: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundaryConfig {
    Isothermal { temperature: Temperature },
    Convective { h: f64, ambient: Temperature },
    Adiabatic,
}

impl BoundaryConfig {
    fn resolve(self) -> ThermalBoundary {
        match self {
            BoundaryConfig::Isothermal { temperature } => ThermalBoundary::Isothermal {
                temperature: temperature.to_kelvin(),
            },
            BoundaryConfig::Convective { h, ambient } => ThermalBoundary::Convective {
                h,
                ambient: ambient.to_kelvin(),
            },
            BoundaryConfig::Adiabatic => ThermalBoundary::Adiabatic,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalConfig {
    pub dt_initial: f64,
    /// Cap of the adaptive step; defaults to 16 × dt_initial when adaptive,
    /// dt_initial otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_max: Option<f64>,
    #[serde(default)]
    pub adaptive: bool,
    #[serde(default = "half")]
    pub grow_threshold: f64,
    pub end_time: f64,
    /// Reference temperature of the conductivity law.
    pub reference_temperature: Temperature,
    /// Initial temperature; defaults to the reference temperature.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_temperature: Option<Temperature>,
    pub boundaries: BTreeMap<String, BoundaryConfig>,
}

fn half() -> f64 {
    0.5
}

/// Straight sampling line exported after the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineConfig {
    pub label: String,
    pub start: [f64; 2],
    pub end: [f64; 2],
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    /// Write a VTK snapshot every k thermal steps (0: final state only).
    #[serde(default)]
    pub vtk_every: usize,
    #[serde(default)]
    pub lines: Vec<LineConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub name: String,
    pub geometry: Layout,
    pub mesh: MeshConfig,
    pub materials: BTreeMap<String, MaterialConfig>,
    /// Material of every region tag that is not a winding.
    pub regions: BTreeMap<String, String>,
    #[serde(default)]
    pub foil_windings: Vec<FoilWindingConfig>,
    #[serde(default)]
    pub stranded_windings: Vec<StrandedWindingConfig>,
    /// Drive frequency, Hz.
    pub frequency: f64,
    #[serde(default = "seven")]
    pub n_u: usize,
    #[serde(default)]
    pub magnetic: MagneticConfig,
    pub thermal: ThermalConfig,
    #[serde(default)]
    pub probes: Vec<Probe>,
    #[serde(default)]
    pub output: OutputConfig,
}

fn seven() -> usize {
    7
}

pub fn load_config(path: &Path) -> Result<ProblemConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

/// Parses, validates and resolves defaults.
pub fn parse_config(text: &str) -> Result<ProblemConfig> {
    let raw: ProblemConfig = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    raw.resolve()
}

impl ProblemConfig {
    /// Fills every defaulted field and validates the result.
    pub fn resolve(mut self) -> Result<Self> {
        let period = 1.0 / self.frequency;
        if !(self.frequency > 0.0 && self.frequency.is_finite()) {
            return Err(Error::validation("frequency", "must be > 0"));
        }
        let steps = match (self.magnetic.steps_per_period, self.magnetic.dt_mag) {
            (Some(n), _) => n,
            (None, Some(dt)) => {
                if !(dt > 0.0) {
                    return Err(Error::validation("magnetic.dt_mag", "must be > 0"));
                }
                let n = (period / dt).round();
                if n < 1.0 || ((n * dt - period) / period).abs() > 1e-9 {
                    return Err(Error::validation("magnetic.dt_mag", "must divide the period into whole steps"));
                }
                n as usize
            }
            (None, None) => DEFAULT_STEPS_PER_PERIOD,
        };
        if steps < 2 {
            return Err(Error::validation("magnetic.steps_per_period", "must be >= 2"));
        }
        if let Some(dt) = self.magnetic.dt_mag {
            if ((dt * steps as f64 - period) / period).abs() > 1e-9 {
                return Err(Error::validation("magnetic.dt_mag", "disagrees with steps_per_period"));
            }
        }
        self.magnetic.steps_per_period = Some(steps);
        self.magnetic.dt_mag = Some(period / steps as f64);
        if self.thermal.dt_max.is_none() {
            let factor = if self.thermal.adaptive { 16.0 } else { 1.0 };
            self.thermal.dt_max = Some(factor * self.thermal.dt_initial);
        }
        if self.thermal.initial_temperature.is_none() {
            self.thermal.initial_temperature = Some(self.thermal.reference_temperature);
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_u < 2 {
            return Err(Error::validation(
                "n_u",
                format!("{} basis functions requested, need at least 2", self.n_u),
            ));
        }
        if !(self.mesh.h > 0.0) {
            return Err(Error::validation("mesh.h", "must be > 0"));
        }
        self.coupling_settings().validate()?;
        for (name, m) in &self.materials {
            m.spec().validate(&format!("materials.{name}"))?;
        }
        let t_ref = self.thermal.reference_temperature.to_kelvin();
        if !(t_ref > 0.0) {
            return Err(Error::validation("thermal.reference_temperature", "must be above 0 K"));
        }
        if let Some(t0) = self.thermal.initial_temperature {
            if !(t0.to_kelvin() > 0.0) {
                return Err(Error::validation("thermal.initial_temperature", "must be above 0 K"));
            }
        }

        let tags = self.geometry.tags();
        let mut owner: BTreeMap<&str, &str> = BTreeMap::new();
        for (tag, material) in &self.regions {
            if !tags.contains(tag) {
                return Err(Error::validation(format!("regions.{tag}"), "region tag is not in the geometry"));
            }
            if !self.materials.contains_key(material) {
                return Err(Error::validation(
                    format!("regions.{tag}"),
                    format!("unknown material `{material}`"),
                ));
            }
            owner.insert(tag, "material");
        }
        let winding_refs = self
            .foil_windings
            .iter()
            .map(|w| (&w.name, &w.region, &w.conductor, &w.insulator, w.turns, w.fill_factor))
            .chain(
                self.stranded_windings
                    .iter()
                    .map(|w| (&w.name, &w.region, &w.conductor, &w.insulator, w.turns, w.fill_factor)),
            );
        for (name, region, conductor, insulator, turns, ff) in winding_refs {
            let field = |f: &str| format!("windings.{name}.{f}");
            if !tags.contains(region) {
                return Err(Error::validation(
                    field("region"),
                    format!("region `{region}` is not in the geometry"),
                ));
            }
            if owner.insert(region, name).is_some() {
                return Err(Error::validation(field("region"), format!("region `{region}` is assigned twice")));
            }
            for m in [conductor, insulator] {
                if !self.materials.contains_key(m) {
                    return Err(Error::validation(field("conductor"), format!("unknown material `{m}`")));
                }
            }
            if turns == 0 {
                return Err(Error::validation(field("turns"), "must be >= 1"));
            }
            if !(ff > 0.0 && ff <= 1.0) {
                return Err(Error::validation(field("fill_factor"), "must lie in (0, 1]"));
            }
        }
        for w in &self.foil_windings {
            w.drive.validate(&w.name)?;
            self.foil_spec(w)?.validate()?;
        }
        for w in &self.stranded_windings {
            w.drive.validate(&w.name)?;
        }
        for tag in &tags {
            if !owner.contains_key(tag.as_str()) {
                return Err(Error::validation(format!("regions.{tag}"), "region has no material"));
            }
        }
        for (tag, b) in &self.thermal.boundaries {
            if tag != crate::mesh::AXIS_TAG && tag != crate::mesh::OUTER_TAG {
                return Err(Error::validation(format!("thermal.boundaries.{tag}"), "unknown boundary tag"));
            }
            if let BoundaryConfig::Convective { h, .. } = b {
                if !(*h >= 0.0 && h.is_finite()) {
                    return Err(Error::validation(format!("thermal.boundaries.{tag}.h"), "must be finite and >= 0"));
                }
            }
        }
        for p in &self.probes {
            if !(p.position[0] >= 0.0) {
                return Err(Error::validation(format!("probes.{}", p.label), "rho must be >= 0"));
            }
        }
        Ok(())
    }

    /// Resolved deck as pretty JSON; feeding it back yields the same run.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn coupling_settings(&self) -> CouplingSettings {
        let steps = self.magnetic.steps_per_period.unwrap_or(DEFAULT_STEPS_PER_PERIOD);
        CouplingSettings {
            frequency: self.frequency,
            mode: self.magnetic.mode,
            steps_per_period: steps,
            periods_per_window: self.magnetic.periods_per_window,
            dt_initial: self.thermal.dt_initial,
            dt_max: self.thermal.dt_max.unwrap_or(self.thermal.dt_initial),
            end_time: self.thermal.end_time,
            grow_threshold: self.thermal.grow_threshold,
        }
    }

    pub fn reference_temperature(&self) -> f64 {
        self.thermal.reference_temperature.to_kelvin()
    }

    pub fn initial_temperature(&self) -> f64 {
        self.thermal
            .initial_temperature
            .unwrap_or(self.thermal.reference_temperature)
            .to_kelvin()
    }

    fn material(&self, name: &str) -> Result<MaterialSpec> {
        self.materials
            .get(name)
            .map(MaterialConfig::spec)
            .ok_or_else(|| Error::validation("materials", format!("unknown material `{name}`")))
    }

    /// Bounding rectangle of all rectangles carrying `tag`.
    pub fn region_bounds(&self, tag: &str) -> Result<([f64; 2], [f64; 2])> {
        let rects: Vec<&RegionRect> = self.geometry.regions.iter().filter(|r| r.tag == tag).collect();
        if rects.is_empty() {
            return Err(Error::validation(
                format!("geometry.{tag}"),
                "winding regions must be listed rectangles",
            ));
        }
        let rho = [
            rects.iter().map(|r| r.rho[0]).fold(f64::INFINITY, f64::min),
            rects.iter().map(|r| r.rho[1]).fold(f64::NEG_INFINITY, f64::max),
        ];
        let z = [
            rects.iter().map(|r| r.z[0]).fold(f64::INFINITY, f64::min),
            rects.iter().map(|r| r.z[1]).fold(f64::NEG_INFINITY, f64::max),
        ];
        Ok((rho, z))
    }

    pub fn foil_spec(&self, w: &FoilWindingConfig) -> Result<FoilWindingSpec> {
        let (rho, z) = self.region_bounds(&w.region)?;
        Ok(FoilWindingSpec {
            region: w.region.clone(),
            rho,
            z,
            turns: w.turns,
            fill_factor: w.fill_factor,
            conductor: self.material(&w.conductor)?,
            insulator: self.material(&w.insulator)?,
        })
    }

    /// Layout with every foil-winding rectangle split into `n_u - 1` radial
    /// strips so that element edges follow the kinks of the hat functions.
    pub fn mesh_layout(&self) -> Result<Layout> {
        let mut layout = self.geometry.clone();
        for w in &self.foil_windings {
            let spec = self.foil_spec(w)?;
            let basis = crate::foil_winding::build_voltage_basis(&spec, self.n_u)?;
            let mut split = Vec::new();
            for r in layout.regions.drain(..) {
                if r.tag != w.region {
                    split.push(r);
                    continue;
                }
                let mut cuts = vec![r.rho[0]];
                cuts.extend(
                    basis
                        .nodes()
                        .iter()
                        .copied()
                        .filter(|&x| x > r.rho[0] + 1e-12 && x < r.rho[1] - 1e-12),
                );
                cuts.push(r.rho[1]);
                for c in cuts.windows(2) {
                    split.push(RegionRect {
                        rho: [c[0], c[1]],
                        ..r.clone()
                    });
                }
            }
            layout.regions = split;
        }
        Ok(layout)
    }

    pub fn build_mesh(&self) -> Result<Mesh> {
        let mut mesh = generate(&self.mesh_layout()?, self.mesh.h)?;
        for _ in 0..self.mesh.refine {
            mesh = mesh.refine_uniform();
        }
        Ok(mesh)
    }

    fn region_id(mesh: &Mesh, tag: &str) -> Result<usize> {
        mesh.region_id(tag)
            .ok_or_else(|| Error::Mesh(format!("region `{tag}` is missing from the mesh")))
    }

    /// Magnetic materials, windings and drives on `mesh`.
    pub fn magnetic_problem(&self, mesh: &Mesh) -> Result<MagneticProblem> {
        let t_ref = self.reference_temperature();
        let mut regions: Vec<Option<MagneticRegion>> = vec![None; mesh.region_names().len()];
        for (tag, material) in &self.regions {
            let m = self.material(material)?;
            regions[Self::region_id(mesh, tag)?] = Some(MagneticRegion::isotropic(m.nu, AzimuthalConductivity::of(&m, t_ref)));
        }
        let mut foils = Vec::new();
        for w in &self.foil_windings {
            let spec = self.foil_spec(w)?;
            let id = Self::region_id(mesh, &w.region)?;
            let t = homogenize(&spec.conductor, &spec.insulator, spec.fill_factor)?;
            let (nu_rho, nu_z) = t.nu_rho_z();
            regions[id] = Some(MagneticRegion {
                nu_rho,
                nu_z,
                sigma: AzimuthalConductivity::mixed(&spec.conductor, &spec.insulator, spec.fill_factor, t_ref),
                source_density: 0.0,
            });
            spec.check_skin_depth(self.frequency);
            foils.push(FoilWindingModel::homogenized(&w.name, id, spec, self.n_u, w.drive)?);
        }
        let mut stranded = Vec::new();
        for w in &self.stranded_windings {
            let id = Self::region_id(mesh, &w.region)?;
            let c = self.material(&w.conductor)?;
            let i = self.material(&w.insulator)?;
            let t = homogenize(&c, &i, w.fill_factor)?;
            regions[id] = Some(MagneticRegion::isotropic(t.nu_par, AzimuthalConductivity::constant(0.0)));
            stranded.push(StrandedWindingModel {
                name: w.name.clone(),
                region: id,
                turns: w.turns as f64,
                fill_factor: w.fill_factor,
                conductor: AzimuthalConductivity::of(&c, t_ref),
                drive: w.drive,
            });
        }
        let regions = regions
            .into_iter()
            .enumerate()
            .map(|(k, r)| r.ok_or_else(|| Error::validation(format!("regions.{}", mesh.region_names()[k]), "region has no material")))
            .collect::<Result<Vec<_>>>()?;
        Ok(MagneticProblem { regions, foils, stranded })
    }

    /// Thermal materials and boundary conditions on `mesh`.
    pub fn thermal_problem(&self, mesh: &Mesh) -> Result<ThermalProblem> {
        let mut regions: Vec<Option<ThermalRegion>> = vec![None; mesh.region_names().len()];
        for (tag, material) in &self.regions {
            let m = self.material(material)?;
            regions[Self::region_id(mesh, tag)?] = Some(ThermalRegion::isotropic(m.lambda, m.c_v));
        }
        for w in &self.foil_windings {
            let spec = self.foil_spec(w)?;
            let t = homogenize(&spec.conductor, &spec.insulator, spec.fill_factor)?;
            let (lambda_rho, lambda_z) = t.lambda_rho_z();
            regions[Self::region_id(mesh, &w.region)?] = Some(ThermalRegion {
                lambda_rho,
                lambda_z,
                c_v: t.c_v,
            });
        }
        for w in &self.stranded_windings {
            let t = homogenize(&self.material(&w.conductor)?, &self.material(&w.insulator)?, w.fill_factor)?;
            regions[Self::region_id(mesh, &w.region)?] = Some(ThermalRegion::isotropic(t.lambda_perp, t.c_v));
        }
        let regions = regions
            .into_iter()
            .enumerate()
            .map(|(k, r)| r.ok_or_else(|| Error::validation(format!("regions.{}", mesh.region_names()[k]), "region has no material")))
            .collect::<Result<Vec<_>>>()?;
        let boundaries = mesh
            .boundary_names()
            .iter()
            .map(|name| {
                self.thermal
                    .boundaries
                    .get(name)
                    .map(|b| b.resolve())
                    .ok_or_else(|| Error::validation(format!("thermal.boundaries.{name}"), "boundary tag has no condition"))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ThermalProblem { regions, boundaries })
    }
}

#[cfg(test)]
mod tests;
