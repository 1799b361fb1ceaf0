//! Frequency sweep of the homogenized validation winding: AC resistance,
//! reactance and the per-cut current check.

use std::f64::consts::PI;
use std::path::Path;

use foilfem::config::load_config;
use foilfem::mqs::WindingDrive;
use foilfem::run::build_systems;

fn main() -> foilfem::Result<()> {
    let mut cfg = load_config(&Path::new(env!("CARGO_MANIFEST_DIR")).join("decks/validation.json"))?;
    cfg.foil_windings[0].drive = WindingDrive::Current { amplitude: 1.0 };
    let mesh = cfg.build_mesh()?;
    let (system, _) = build_systems(&cfg, &mesh)?;
    let spec = cfg.foil_spec(&cfg.foil_windings[0])?;

    println!(
        "{:>9} {:>12} {:>12} {:>12} {:>12}",
        "f / Hz", "R / ohm", "X / ohm", "loss / W", "cut error"
    );
    for f in [1.0, 50.0, 500.0, 5e3, 2e4] {
        let s = system.solve_frequency(2.0 * PI * f)?;
        let z = s.foils[0].voltage / s.foils[0].current;
        let loss = system.total_loss(&system.element_losses_harmonic(&s));
        let mut worst: f64 = 0.0;
        for k in 0..5 {
            let alpha = spec.rho[0] + spec.width() * (0.1 + 0.2 * k as f64);
            worst = worst.max((system.foil_cut_current(&s, 0, alpha)? - s.foils[0].current).norm());
        }
        println!("{f:>9.0} {:>12.5e} {:>12.5e} {loss:>12.5e} {worst:>12.2e}", z.re, z.im);
    }
    Ok(())
}
