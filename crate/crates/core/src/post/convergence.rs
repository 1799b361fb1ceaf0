//! Resolved-versus-homogenized internal-energy convergence study.

use log::info;
use serde::{Deserialize, Serialize};

use crate::config::ProblemConfig;
use crate::coupling::run_weak_coupling;
use crate::error::{Error, Result};
use crate::mesh::{generate, Mesh};
use crate::mqs::{self, check_layer_resolution, resolved_layout, resolved_turn_regions, FoilWindingModel};
use crate::thermal;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceSettings {
    /// Number of homogenized refinement levels; the mesh size halves per level.
    pub levels: usize,
    /// Mesh size of the coarsest homogenized level (deck value when `None`).
    pub coarse_h: Option<f64>,
    /// Mesh size of the resolved reference outside the conductor layers.
    pub reference_h: f64,
    /// Radial elements across every conductor layer of the reference.
    pub elements_per_layer: usize,
}

impl ConvergenceSettings {
    pub fn new(levels: usize, reference_h: f64) -> Self {
        ConvergenceSettings {
            levels,
            coarse_h: None,
            reference_h,
            elements_per_layer: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceLevel {
    pub h: f64,
    pub n_elements: usize,
    /// Final internal energy of the homogenized run, J.
    pub u_hom: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub levels: Vec<ConvergenceLevel>,
    /// Final internal energy of the resolved reference, J.
    pub u_ref: f64,
    pub reference_elements: usize,
    /// Fitted `p` in `error ~ N_el^-p`.
    pub order: f64,
}

impl ConvergenceReport {
    pub fn is_monotone(&self) -> bool {
        self.levels.windows(2).all(|w| w[1].rel_error < w[0].rel_error)
    }

    pub fn csv_rows(&self) -> (Vec<String>, Vec<Vec<f64>>) {
        let header = ["h_m", "n_elements", "U_hom_J", "U_ref_J", "rel_error"].map(String::from).to_vec();
        let rows = self
            .levels
            .iter()
            .map(|l| vec![l.h, l.n_elements as f64, l.u_hom, self.u_ref, l.rel_error])
            .collect();
        (header, rows)
    }
}

/// Least-squares slope of `ln e` against `ln n`, negated.
pub fn fit_order(n_elements: &[usize], errors: &[f64]) -> Result<f64> {
    if n_elements.len() != errors.len() || n_elements.len() < 2 {
        return Err(Error::validation("levels", "need at least 2 levels to fit an order"));
    }
    if errors.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::Domain("errors must be positive to fit an order".into()));
    }
    let x: Vec<f64> = n_elements.iter().map(|&n| (n as f64).ln()).collect();
    let y: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let m = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / m, y.iter().sum::<f64>() / m);
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    Ok(-sxy / sxx)
}

/// Final internal energy of a coupled run of `deck` on `mesh`, with the
/// given foil windings replacing those the deck would build.
fn final_energy(deck: &ProblemConfig, mesh: &Mesh, foils: Option<Vec<FoilWindingModel>>) -> Result<f64> {
    let mut problem = deck.magnetic_problem(mesh)?;
    if let Some(f) = foils {
        problem.foils = f;
    }
    let mut magnetic = mqs::assemble(mesh, problem)?;
    let th = thermal::assemble(mesh, &deck.thermal_problem(mesh)?)?;
    let initial = th.uniform_state(deck.initial_temperature());
    let result = run_weak_coupling(&mut magnetic, &th, &deck.coupling_settings(), initial, &[], &mut ())?;
    Ok(th.internal_energy(&result.temperature))
}

/// Deck and mesh with the single foil winding replaced by its resolved
/// turns; returns the turn region ids as well.
pub fn resolved_deck(deck: &ProblemConfig, h: f64, elements_per_layer: usize) -> Result<(ProblemConfig, Mesh, FoilWindingModel)> {
    let [w] = deck.foil_windings.as_slice() else {
        return Err(Error::validation("foil_windings", "the study needs exactly one foil winding"));
    };
    let spec = deck.foil_spec(w)?;
    let layout = resolved_layout(&spec, elements_per_layer);
    let mut resolved = deck.clone();
    resolved.foil_windings.clear();
    resolved.geometry.regions.retain(|r| r.tag != w.region);
    resolved.geometry.regions.extend(layout.rects.iter().cloned());
    for t in &layout.turn_tags {
        resolved.regions.insert(t.clone(), w.conductor.clone());
    }
    if let Some(ins) = &layout.insulation_tag {
        resolved.regions.insert(ins.clone(), w.insulator.clone());
    }
    resolved.mesh.h = h;
    resolved.mesh.refine = 0;
    let mesh = generate(&resolved.geometry, h)?;
    let turns = resolved_turn_regions(&mesh, &layout)?;
    check_layer_resolution(&mesh, &turns)?;
    let model = FoilWindingModel::resolved(&w.name, turns, w.drive);
    Ok((resolved, mesh, model))
}

/// Runs the resolved reference once and the homogenized model on
/// `settings.levels` successively halved meshes, all to the deck end time.
pub fn convergence_study(deck: &ProblemConfig, settings: &ConvergenceSettings) -> Result<ConvergenceReport> {
    if settings.levels < 2 {
        return Err(Error::validation("levels", "need at least 2 levels"));
    }
    let (res_deck, res_mesh, model) = resolved_deck(deck, settings.reference_h, settings.elements_per_layer)?;
    info!("resolved reference: {} triangles", res_mesh.n_triangles());
    let u_ref = final_energy(&res_deck, &res_mesh, Some(vec![model]))?;

    let h0 = settings.coarse_h.unwrap_or(deck.mesh.h);
    let mut levels = Vec::with_capacity(settings.levels);
    for k in 0..settings.levels {
        let mut d = deck.clone();
        d.mesh.h = h0 / 2f64.powi(k as i32);
        d.mesh.refine = 0;
        let mesh = d.build_mesh()?;
        let u_hom = final_energy(&d, &mesh, None)?;
        let rel_error = ((u_hom - u_ref) / u_ref).abs();
        info!(
            "level {k}: h = {:.3e} m, {} triangles, error {rel_error:.3e}",
            d.mesh.h,
            mesh.n_triangles()
        );
        levels.push(ConvergenceLevel {
            h: d.mesh.h,
            n_elements: mesh.n_triangles(),
            u_hom,
            rel_error,
        });
    }
    let n: Vec<usize> = levels.iter().map(|l| l.n_elements).collect();
    let e: Vec<f64> = levels.iter().map(|l| l.rel_error).collect();
    let order = fit_order(&n, &e)?;
    Ok(ConvergenceReport {
        levels,
        u_ref,
        reference_elements: res_mesh.n_triangles(),
        order,
    })
}
