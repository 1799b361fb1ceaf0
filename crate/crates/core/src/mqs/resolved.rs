//! Turn-resolved foil winding used as a reference for the homogenized model.
//!
//! Every conductor layer is its own region and one solid turn: its voltage
//! basis function is the region indicator and all turns are in series.

use super::{FoilWindingModel, WindingBasis, WindingDrive};
use crate::error::{Error, Result};
use crate::foil_winding::FoilWindingSpec;
use crate::mesh::{Mesh, RegionRect};

/// Rectangles of the resolved winding and the tags of its turns.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedLayout {
    pub rects: Vec<RegionRect>,
    pub turn_tags: Vec<String>,
    pub insulation_tag: Option<String>,
}

/// Splits the winding rectangle into conductor layers and insulation gaps.
/// Each conductor layer sits in the middle of its turn cell of width `b`,
/// with half of the insulation on either side. `elements_per_layer` sets the
/// radial mesh size inside every layer.
pub fn resolved_layout(spec: &FoilWindingSpec, elements_per_layer: usize) -> ResolvedLayout {
    let b = spec.turn_width();
    let bc = spec.conductor_width();
    let half_gap = 0.5 * (b - bc);
    let h_layer = bc / elements_per_layer.max(1) as f64;
    let mut rects = Vec::new();
    let mut turn_tags = Vec::new();
    let insulation_tag = (spec.fill_factor < 1.0).then(|| format!("{}_insulation", spec.region));
    let insulation = |lo: f64, hi: f64, rects: &mut Vec<RegionRect>| {
        if let Some(ins) = &insulation_tag {
            rects.push(RegionRect::new(ins.clone(), [lo, hi], spec.z).with_h_rho(hi - lo));
        }
    };
    let edge = |n: u32| if n == spec.turns { spec.rho[1] } else { spec.rho[0] + n as f64 * b };
    insulation(spec.rho[0], spec.rho[0] + half_gap, &mut rects);
    for n in 0..spec.turns {
        let c0 = edge(n) + half_gap;
        let c1 = c0 + bc;
        let tag = format!("{}_turn{}", spec.region, n);
        rects.push(RegionRect::new(tag.clone(), [c0, c1], spec.z).with_h_rho(h_layer));
        turn_tags.push(tag);
        let next = if n + 1 == spec.turns { edge(n + 1) } else { edge(n + 1) + half_gap };
        insulation(c1, next, &mut rects);
    }
    ResolvedLayout {
        rects,
        turn_tags,
        insulation_tag,
    }
}

/// Mesh region ids of the turns, in build order.
pub fn resolved_turn_regions(mesh: &Mesh, layout: &ResolvedLayout) -> Result<Vec<usize>> {
    layout
        .turn_tags
        .iter()
        .map(|t| {
            mesh.region_id(t)
                .ok_or_else(|| Error::Mesh(format!("turn region `{t}` is missing")))
        })
        .collect()
}

/// Rejects meshes with fewer than two elements across any conductor layer.
pub fn check_layer_resolution(mesh: &Mesh, regions: &[usize]) -> Result<()> {
    for &r in regions {
        let mut rho: Vec<f64> = mesh
            .elements_in(&[r])
            .into_iter()
            .flat_map(|e| mesh.triangle(e))
            .map(|k| mesh.node(k)[0])
            .collect();
        rho.sort_by(f64::total_cmp);
        rho.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * (1.0 + b.abs()));
        let across = rho.len().saturating_sub(1);
        if across < 2 {
            return Err(Error::Mesh(format!(
                "conductor layer `{}` has {across} element(s) across its thickness, need at least 2",
                mesh.region_names()[r]
            )));
        }
    }
    Ok(())
}

impl FoilWindingModel {
    /// Series connection of solid turns occupying `turn_regions`.
    pub fn resolved(name: impl Into<String>, turn_regions: Vec<usize>, drive: WindingDrive) -> Self {
        let n = turn_regions.len();
        FoilWindingModel {
            name: name.into(),
            regions: turn_regions.clone(),
            basis: WindingBasis::SolidTurns(turn_regions),
            coupling: vec![1.0; n],
            spec: None,
            drive,
        }
    }

    /// Homogenized winding with `n_u` hat functions.
    pub fn homogenized(name: impl Into<String>, region: usize, spec: FoilWindingSpec, n_u: usize, drive: WindingDrive) -> Result<Self> {
        spec.validate()?;
        let basis = crate::foil_winding::build_voltage_basis(&spec, n_u)?;
        let coupling = crate::foil_winding::coupling_vector(&basis, &spec);
        Ok(FoilWindingModel {
            name: name.into(),
            regions: vec![region],
            basis: WindingBasis::Hat(basis),
            coupling,
            spec: Some(spec),
            drive,
        })
    }
}
