//! Coupled run of the foil winding in an air box, with a steady-state
//! energy balance at the end.

use std::path::Path;

use foilfem::config::{kelvin_to_celsius, load_config};
use foilfem::run::{build_systems, run};

fn main() -> foilfem::Result<()> {
    env_logger::init();
    let cfg = load_config(&Path::new(env!("CARGO_MANIFEST_DIR")).join("decks/validation.json"))?;
    let out_dir = std::env::temp_dir().join("foilfem_validation");
    let out = run(&cfg, Some(&out_dir))?;
    let r = &out.report;
    println!(
        "{} steps, total loss {:.4} W, U = {:.6e} J",
        r.thermal_steps, r.total_loss_w, r.internal_energy_j
    );
    for row in out.result.history.iter().step_by(30) {
        println!(
            "  t = {:>6.0} s  T_max = {:>7.3} degC  P = {:.5} W",
            row.time,
            kelvin_to_celsius(row.t_max),
            row.total_loss
        );
    }
    let (magnetic, thermal) = build_systems(&cfg, &out.mesh)?;
    let q = thermal.load_from_elements(&out.result.losses);
    let outflow = thermal.boundary_heat_flow(&out.result.temperature, &q, None).total();
    println!(
        "generated {:.6} W, leaving through the box {:.6} W",
        magnetic.total_loss(&out.result.losses),
        outflow
    );
    println!("outputs in {}", out_dir.display());
    Ok(())
}
