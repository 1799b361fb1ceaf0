use std::path::Path;

use foilfem::config::{load_config, ProblemConfig};
use foilfem::post::{convergence_study, resolved_deck, ConvergenceSettings};
use foilfem::thermal::{self, ThermalRegion};

fn deck() -> ProblemConfig {
    load_config(&Path::new(env!("CARGO_MANIFEST_DIR")).join("decks/convergence.json")).unwrap()
}

#[test]
fn identical_constituents_make_layers_invisible() {
    let mut cfg = deck();
    let copper = cfg.materials["copper"].clone();
    cfg.materials.insert("insulation".into(), copper);
    let (res, mesh, _) = resolved_deck(&cfg, 1e-3, 2).unwrap();
    let layered = res.thermal_problem(&mesh).unwrap();
    // same mesh, every winding sub-region replaced by the homogenized tensors
    let spec = cfg.foil_spec(&cfg.foil_windings[0]).unwrap();
    let t = foilfem::materials::homogenize(&spec.conductor, &spec.insulator, spec.fill_factor).unwrap();
    let (lambda_rho, lambda_z) = t.lambda_rho_z();
    let mut homogenized = layered.clone();
    for (k, name) in mesh.region_names().iter().enumerate() {
        if name.starts_with("winding_") {
            homogenized.regions[k] = ThermalRegion {
                lambda_rho,
                lambda_z,
                c_v: t.c_v,
            };
        }
    }
    let a = thermal::assemble(&mesh, &layered).unwrap();
    let b = thermal::assemble(&mesh, &homogenized).unwrap();
    let q = a.load_from_fn(|p| {
        if (0.01..=0.02).contains(&p[0]) && p[1].abs() <= 0.01 {
            1e5
        } else {
            0.0
        }
    });
    let (ta, tb) = (a.steady(&q).unwrap(), b.steady(&q).unwrap());
    let (ua, ub) = (a.internal_energy(&ta), b.internal_energy(&tb));
    assert!(((ua - ub) / ua).abs() < 1e-12, "{ua} vs {ub}");
}

#[test]
fn under_resolved_reference_is_rejected() {
    let cfg = deck();
    assert!(resolved_deck(&cfg, 1e-3, 1).is_err());
}

#[test]
fn two_level_study_on_a_coarse_reference() {
    let report = convergence_study(&deck(), &ConvergenceSettings::new(2, 1e-3)).unwrap();
    assert_eq!(report.levels.len(), 2);
    assert!(report.levels[1].n_elements > 3 * report.levels[0].n_elements);
    assert!(report.levels.iter().all(|l| l.rel_error > 0.0 && l.rel_error < 1e-2));
    assert!(report.u_ref > 0.0);
}
