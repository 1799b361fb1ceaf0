//! Full run of a deck: mesh, assembly, coupled simulation and exports.

use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;
use serde::Serialize;

use crate::config::{kelvin_to_celsius, ProblemConfig};
use crate::coupling::{run_weak_coupling, CouplingResult, HistoryRow, StepObserver};
use crate::error::Result;
use crate::mesh::Mesh;
use crate::mqs::{self, MagneticSystem};
use crate::post::{export_vtk, locate_probes, sample_line, write_csv, write_text};
use crate::thermal::{self, ThermalSystem};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionSummary {
    pub tag: String,
    pub volume_m3: f64,
    /// Volume-weighted mean temperature, K.
    pub mean_temperature_k: f64,
    pub mean_temperature_c: f64,
    pub max_temperature_k: f64,
    pub min_temperature_k: f64,
    pub loss_w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindingSummary {
    pub name: String,
    /// Peak amplitudes of the terminal quantities.
    pub current_a: f64,
    pub voltage_v: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LossPeak {
    pub element: usize,
    pub region: String,
    /// Element centroid (ρ, z), m.
    pub position: [f64; 2],
    pub density_w_per_m3: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub name: String,
    pub n_nodes: usize,
    pub n_triangles: usize,
    pub end_time_s: f64,
    pub thermal_steps: usize,
    pub magnetic_solves: usize,
    pub total_loss_w: f64,
    pub internal_energy_j: f64,
    pub t_min_k: f64,
    pub t_max_k: f64,
    pub regions: Vec<RegionSummary>,
    pub windings: Vec<WindingSummary>,
    pub loss_peak: LossPeak,
    pub probes: Vec<(String, f64)>,
    pub wall_time_s: f64,
}

impl RunReport {
    pub fn region(&self, tag: &str) -> Option<&RegionSummary> {
        self.regions.iter().find(|r| r.tag == tag)
    }
}

/// Everything a caller may want to inspect after a run.
pub struct RunOutput {
    pub report: RunReport,
    pub mesh: Mesh,
    pub result: CouplingResult,
}

/// Assembles both sub-problems of `cfg` on `mesh`.
pub fn build_systems<'m>(cfg: &ProblemConfig, mesh: &'m Mesh) -> Result<(MagneticSystem<'m>, ThermalSystem<'m>)> {
    let magnetic = mqs::assemble(mesh, cfg.magnetic_problem(mesh)?)?;
    let thermal = thermal::assemble(mesh, &cfg.thermal_problem(mesh)?)?;
    Ok((magnetic, thermal))
}

struct SnapshotWriter<'a> {
    mesh: &'a Mesh,
    dir: Option<PathBuf>,
    every: usize,
}

impl StepObserver for SnapshotWriter<'_> {
    fn after_step(&mut self, step: usize, _row: &HistoryRow, temperature: &[f64], losses: &[f64]) -> Result<()> {
        match &self.dir {
            Some(dir) if self.every > 0 && step.is_multiple_of(self.every) => export_vtk(
                self.mesh,
                &[("T", temperature)],
                &[("losses", losses)],
                &dir.join(format!("step_{step:05}.vtk")),
            ),
            _ => Ok(()),
        }
    }
}

/// Runs `cfg`; when `out_dir` is given, writes the history, snapshots,
/// line samples, resolved deck and report there.
pub fn run(cfg: &ProblemConfig, out_dir: Option<&Path>) -> Result<RunOutput> {
    let clock = Instant::now();
    let mesh = cfg.build_mesh()?;
    info!("{}: {} nodes, {} triangles", cfg.name, mesh.n_nodes(), mesh.n_triangles());
    let (mut magnetic, thermal) = build_systems(cfg, &mesh)?;
    let probes = locate_probes(&mesh, &cfg.probes)?;
    if let Some(dir) = out_dir {
        write_text(&dir.join("config_resolved.json"), &cfg.to_json())?;
    }
    let mut observer = SnapshotWriter {
        mesh: &mesh,
        dir: out_dir.map(Path::to_path_buf),
        every: cfg.output.vtk_every,
    };
    let initial = thermal.uniform_state(cfg.initial_temperature());
    let result = run_weak_coupling(&mut magnetic, &thermal, &cfg.coupling_settings(), initial, &probes, &mut observer)?;

    let t = &result.temperature;
    let last = result.history.last().expect("at least one thermal step");
    let volumes = magnetic.element_volumes();
    let means = thermal.element_means(t);
    let region_loss = magnetic.region_losses(&result.losses);
    let regions = mesh
        .region_names()
        .iter()
        .enumerate()
        .map(|(r, tag)| {
            let elems = mesh.elements_in(&[r]);
            let volume: f64 = elems.iter().map(|&e| volumes[e]).sum();
            let mean = elems.iter().map(|&e| volumes[e] * means[e]).sum::<f64>() / volume;
            let nodal = elems.iter().flat_map(|&e| mesh.triangle(e)).map(|k| t[k]);
            let (lo, hi) = nodal.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
            RegionSummary {
                tag: tag.clone(),
                volume_m3: volume,
                mean_temperature_k: mean,
                mean_temperature_c: kelvin_to_celsius(mean),
                max_temperature_k: hi,
                min_temperature_k: lo,
                loss_w: region_loss[r],
            }
        })
        .collect();
    let names = cfg
        .foil_windings
        .iter()
        .map(|w| &w.name)
        .chain(cfg.stranded_windings.iter().map(|w| &w.name));
    let windings = names
        .zip(&last.windings)
        .map(|(name, p)| WindingSummary {
            name: name.clone(),
            current_a: p.current.norm(),
            voltage_v: p.voltage.norm(),
        })
        .collect();
    // Lowest index wins ties so the report is reproducible.
    let peak = (0..mesh.n_triangles()).fold(0, |best, e| if result.losses[e] > result.losses[best] { e } else { best });
    let tri = mesh.triangle(peak);
    let centroid = [0, 1].map(|d| tri.iter().map(|&k| mesh.node(k)[d]).sum::<f64>() / 3.0);
    let report = RunReport {
        name: cfg.name.clone(),
        n_nodes: mesh.n_nodes(),
        n_triangles: mesh.n_triangles(),
        end_time_s: last.time,
        thermal_steps: result.thermal_steps,
        magnetic_solves: result.magnetic_solves,
        total_loss_w: last.total_loss,
        internal_energy_j: last.internal_energy,
        t_min_k: last.t_min,
        t_max_k: last.t_max,
        regions,
        windings,
        loss_peak: LossPeak {
            element: peak,
            region: mesh.region_names()[mesh.region_of(peak)].clone(),
            position: centroid,
            density_w_per_m3: result.losses[peak],
        },
        probes: probes.iter().map(|p| (p.label.clone(), p.value(t))).collect(),
        wall_time_s: clock.elapsed().as_secs_f64(),
    };
    if let Some(dir) = out_dir {
        write_outputs(cfg, &mesh, &result, &report, dir)?;
    }
    Ok(RunOutput { report, mesh, result })
}

/// Column names of `history.csv`.
pub fn history_header(cfg: &ProblemConfig) -> Vec<String> {
    let mut h: Vec<String> = ["time_s", "dt_s", "total_loss_W", "internal_energy_J", "T_min_K", "T_max_K"]
        .map(String::from)
        .to_vec();
    h.extend(cfg.probes.iter().map(|p| format!("T_{}_K", p.label)));
    for name in cfg
        .foil_windings
        .iter()
        .map(|w| &w.name)
        .chain(cfg.stranded_windings.iter().map(|w| &w.name))
    {
        h.push(format!("I_{name}_A"));
        h.push(format!("V_{name}_V"));
    }
    h
}

fn history_rows(history: &[HistoryRow]) -> Vec<Vec<f64>> {
    history
        .iter()
        .map(|r| {
            let mut row = vec![r.time, r.dt, r.total_loss, r.internal_energy, r.t_min, r.t_max];
            row.extend(&r.probes);
            for w in &r.windings {
                row.push(w.current.norm());
                row.push(w.voltage.norm());
            }
            row
        })
        .collect()
}

fn write_outputs(cfg: &ProblemConfig, mesh: &Mesh, result: &CouplingResult, report: &RunReport, dir: &Path) -> Result<()> {
    write_csv(&dir.join("history.csv"), &history_header(cfg), &history_rows(&result.history))?;
    let t = &result.temperature;
    let mut point: Vec<(&str, Vec<f64>)> = vec![("T", t.clone())];
    if let Some(state) = &result.final_harmonic {
        let n = mesh.n_nodes();
        point.push(("A_re", state.a[..n].iter().map(|a| a.re).collect()));
        point.push(("A_im", state.a[..n].iter().map(|a| a.im).collect()));
    }
    let point_refs: Vec<(&str, &[f64])> = point.iter().map(|(n, v)| (*n, v.as_slice())).collect();
    export_vtk(mesh, &point_refs, &[("losses", &result.losses)], &dir.join("final.vtk"))?;
    for line in &cfg.output.lines {
        let samples = sample_line(mesh, t, line.start, line.end, line.samples)?;
        let length = samples.last().map_or(0.0, |s| s.0);
        let rows = samples
            .iter()
            .map(|&(s, v)| {
                let f = if length > 0.0 { s / length } else { 0.0 };
                let p = [0, 1].map(|d| line.start[d] + f * (line.end[d] - line.start[d]));
                vec![s, p[0], p[1], v]
            })
            .collect::<Vec<_>>();
        let header = ["arclength_m", "rho_m", "z_m", "T_K"].map(String::from).to_vec();
        write_csv(&dir.join(format!("line_{}.csv", line.label)), &header, &rows)?;
    }
    let json = serde_json::to_string_pretty(report).expect("report serializes");
    write_text(&dir.join("report.json"), &json)
}
