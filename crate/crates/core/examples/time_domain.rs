//! Backward-Euler magnetic stepping compared with the harmonic solution.

use std::f64::consts::PI;
use std::path::Path;

use foilfem::config::load_config;
use foilfem::coupling::losses_time_domain;
use foilfem::mqs::{extract_phasor, TimeStepper};
use foilfem::run::build_systems;

fn main() -> foilfem::Result<()> {
    let cfg = load_config(&Path::new(env!("CARGO_MANIFEST_DIR")).join("decks/validation.json"))?;
    let mesh = cfg.build_mesh()?;
    let (system, _) = build_systems(&cfg, &mesh)?;
    let omega = 2.0 * PI * cfg.frequency;
    let phasor = system.solve_frequency(omega)?;
    let p_harmonic = system.total_loss(&system.element_losses_harmonic(&phasor));

    for steps in [50, 100, 200, 400] {
        let dt = 1.0 / (cfg.frequency * steps as f64);
        let stepper = TimeStepper::new(&system, omega, dt)?;
        let mut states = vec![system.initial_state(omega, 0.0)];
        for _ in 0..5 * steps {
            let next = stepper.step(states.last().unwrap());
            states.push(next);
        }
        let last = &states[4 * steps..];
        let p = system.total_loss(&losses_time_domain(&system, last, steps, dt)?);
        let times: Vec<f64> = last.iter().map(|s| s.time).collect();
        let v: Vec<f64> = last.iter().map(|s| s.foils[0].voltage).collect();
        let v_hat = extract_phasor(&times, &v, omega);
        println!(
            "{steps:>4} steps/period: P = {p:.6} W ({:+.3e} rel.), |V| = {:.6e} V (harmonic {:.6e} V)",
            p / p_harmonic - 1.0,
            v_hat.norm(),
            phasor.foils[0].voltage.norm()
        );
    }
    Ok(())
}
