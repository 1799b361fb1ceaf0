//! Pot-core transformer with a foil primary and a stranded secondary,
//! driven by a 5 kHz source through the two-resistor circuit.

use std::path::Path;

use foilfem::config::{kelvin_to_celsius, load_config};
use foilfem::post::sample_line;
use foilfem::run::run;

fn main() -> foilfem::Result<()> {
    env_logger::init();
    let cfg = load_config(&Path::new(env!("CARGO_MANIFEST_DIR")).join("decks/pot_transformer.json"))?;
    let out = run(&cfg, Some(&std::env::temp_dir().join("foilfem_pot")))?;
    let r = &out.report;
    for w in &r.windings {
        println!("{:<10} |i| = {:.4} A, |v| = {:.3} V", w.name, w.current_a, w.voltage_v);
    }
    for reg in &r.regions {
        println!(
            "{:<6} mean {:6.2} degC, max {:6.2} degC, loss {:.4} W",
            reg.tag,
            reg.mean_temperature_c,
            kelvin_to_celsius(reg.max_temperature_k),
            reg.loss_w
        );
    }
    let p = r.loss_peak.position;
    println!(
        "loss peak {:.3e} W/m3 in {} at rho = {:.2} mm, z = {:.2} mm",
        r.loss_peak.density_w_per_m3,
        r.loss_peak.region,
        p[0] * 1e3,
        p[1] * 1e3
    );
    for (label, t) in &r.probes {
        println!("  {label:<14} {:.2} degC", kelvin_to_celsius(*t));
    }
    println!("radial profile at z = 0:");
    for (s, t) in sample_line(&out.mesh, &out.result.temperature, [0.0, 0.0], [0.035, 0.0], 15)? {
        println!("  rho = {:5.1} mm  T = {:.2} degC", s * 1e3, kelvin_to_celsius(t));
    }
    Ok(())
}
