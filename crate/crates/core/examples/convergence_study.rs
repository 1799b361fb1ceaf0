//! Internal-energy error of the homogenized winding against a
//! turn-resolved reference over successively refined meshes.

use std::path::Path;

use foilfem::config::load_config;
use foilfem::post::{convergence_study, ConvergenceSettings};

fn main() -> foilfem::Result<()> {
    env_logger::init();
    let cfg = load_config(&Path::new(env!("CARGO_MANIFEST_DIR")).join("decks/convergence.json"))?;
    let report = convergence_study(&cfg, &ConvergenceSettings::new(4, 2.5e-4))?;
    println!(
        "resolved reference: {} triangles, U = {:.9e} J",
        report.reference_elements, report.u_ref
    );
    for l in &report.levels {
        println!(
            "h = {:.2e} m  N_el = {:>6}  U = {:.9e} J  error {:.3e}",
            l.h, l.n_elements, l.u_hom, l.rel_error
        );
    }
    println!("fitted order {:.3} in N_el, monotone: {}", report.order, report.is_monotone());
    Ok(())
}
