//! Turn-resolved foil winding: every conductor layer is a solid turn and all
//! turns are in series. Compares terminal impedance with the homogenized model.

use std::f64::consts::PI;
use std::path::Path;

use foilfem::config::load_config;
use foilfem::mqs::{self, WindingDrive};
use foilfem::post::resolved_deck;
use foilfem::run::build_systems;

fn main() -> foilfem::Result<()> {
    let mut cfg = load_config(&Path::new(env!("CARGO_MANIFEST_DIR")).join("decks/convergence.json"))?;
    cfg.foil_windings[0].drive = WindingDrive::Current { amplitude: 1.0 };
    let (res, mesh, model) = resolved_deck(&cfg, 5e-4, 4)?;
    let mut problem = res.magnetic_problem(&mesh)?;
    problem.foils = vec![model];
    let resolved = mqs::assemble(&mesh, problem)?;

    let hom_mesh = cfg.build_mesh()?;
    let (homogenized, _) = build_systems(&cfg, &hom_mesh)?;
    println!(
        "resolved: {} triangles, homogenized: {} triangles",
        mesh.n_triangles(),
        hom_mesh.n_triangles()
    );
    for f in [50.0, 1e3, 1e4] {
        let w = 2.0 * PI * f;
        let a = resolved.solve_frequency(w)?;
        let b = homogenized.solve_frequency(w)?;
        let (za, zb) = (a.foils[0].voltage, b.foils[0].voltage);
        let turn_spread = a.foils[0]
            .cut_integrals
            .iter()
            .map(|c| (c - a.foils[0].current).norm())
            .fold(0.0, f64::max);
        println!("f = {f:>7.0} Hz  Z_res = {za:.5e}  Z_hom = {zb:.5e}  max turn-current deviation {turn_spread:.1e}");
    }
    Ok(())
}
