//! Weak magneto-thermal coupling.
//!
//! Each macro step freezes the temperature, updates σ(T) per element, runs a
//! magnetic window (one phasor solve or a few periods of time stepping),
//! averages the Joule losses per element and advances the heat equation by
//! one thermal step.

use log::{debug, info};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mqs::{extract_phasor, MagneticState, MagneticSystem, TimeStepper};
use crate::post::LocatedProbe;
use crate::thermal::{ThermalStepper, ThermalSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MagneticMode {
    /// One complex solve per window; losses from phasors.
    #[default]
    Harmonic,
    /// Backward-Euler time stepping over whole periods.
    Time,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSettings {
    pub frequency: f64,
    pub mode: MagneticMode,
    pub steps_per_period: usize,
    pub periods_per_window: usize,
    pub dt_initial: f64,
    pub dt_max: f64,
    pub end_time: f64,
    /// Δt_th doubles after a step whose largest nodal change is below this, K.
    pub grow_threshold: f64,
}

impl CouplingSettings {
    pub fn omega(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.frequency
    }

    pub fn dt_mag(&self) -> f64 {
        1.0 / (self.frequency * self.steps_per_period as f64)
    }

    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, field: &str, reason: &str| if ok { Ok(()) } else { Err(Error::validation(field, reason)) };
        check(self.frequency > 0.0 && self.frequency.is_finite(), "frequency", "must be > 0")?;
        check(self.steps_per_period >= 2, "steps_per_period", "must be >= 2")?;
        check(self.periods_per_window >= 1, "periods_per_window", "must be >= 1")?;
        check(
            self.dt_initial > 0.0 && self.dt_initial.is_finite(),
            "thermal.dt_initial",
            "must be > 0",
        )?;
        check(
            self.dt_initial >= self.dt_mag(),
            "thermal.dt_initial",
            "must be at least the magnetic step",
        )?;
        check(self.dt_max >= self.dt_initial, "thermal.dt_max", "must be >= dt_initial")?;
        check(self.end_time > 0.0 && self.end_time.is_finite(), "thermal.end_time", "must be > 0")?;
        check(self.grow_threshold >= 0.0, "thermal.grow_threshold", "must be >= 0")
    }
}

/// Step-doubling rule: grow when the last step changed no node by more than
/// `threshold` kelvin; never below the initial step, never above the cap.
pub fn adapt_macro_step(max_change: f64, dt: f64, dt_initial: f64, dt_max: f64, threshold: f64) -> f64 {
    let next = if max_change < threshold { 2.0 * dt } else { dt };
    next.clamp(dt_initial, dt_max)
}

/// Per-element time-averaged losses of a phasor solution, W/m³.
pub fn losses_harmonic(system: &MagneticSystem, state: &MagneticState<Complex64>) -> Vec<f64> {
    system.element_losses_harmonic(state)
}

/// Average of the instantaneous element losses over the last full period of
/// `window` (consecutive states `dt` apart), W/m³.
pub fn losses_time_domain(system: &MagneticSystem, window: &[MagneticState<f64>], steps_per_period: usize, dt: f64) -> Result<Vec<f64>> {
    if window.len() < steps_per_period + 1 {
        return Err(Error::Domain(format!(
            "loss window holds {} steps, one period needs {}",
            window.len().saturating_sub(1),
            steps_per_period
        )));
    }
    let n = window.len();
    let mut acc = vec![0.0; system.mesh().n_triangles()];
    for k in n - steps_per_period..n {
        let p = system.element_losses_instant(&window[k], &window[k - 1], dt);
        for (a, v) in acc.iter_mut().zip(p) {
            *a += v;
        }
    }
    acc.iter_mut().for_each(|a| *a /= steps_per_period as f64);
    Ok(acc)
}

/// Terminal quantities of one winding over a window, as peak phasors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindingPhasors {
    pub current: Complex64,
    pub voltage: Complex64,
}

/// One row of the coupling history, written after every thermal step.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryRow {
    pub time: f64,
    pub dt: f64,
    pub total_loss: f64,
    pub internal_energy: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub probes: Vec<f64>,
    /// Foil windings first, then stranded windings.
    pub windings: Vec<WindingPhasors>,
}

#[derive(Debug, Clone)]
pub struct CouplingResult {
    pub history: Vec<HistoryRow>,
    pub temperature: Vec<f64>,
    /// Losses of the last window, W/m³ per element.
    pub losses: Vec<f64>,
    pub thermal_steps: usize,
    pub magnetic_solves: usize,
    /// Final phasor state (harmonic mode only).
    pub final_harmonic: Option<MagneticState<Complex64>>,
}

/// Called after every thermal step with the step index, the new temperature
/// and the losses that drove the step.
pub trait StepObserver {
    fn after_step(&mut self, _step: usize, _row: &HistoryRow, _temperature: &[f64], _losses: &[f64]) -> Result<()> {
        Ok(())
    }
}

impl StepObserver for () {}

struct Window {
    losses: Vec<f64>,
    windings: Vec<WindingPhasors>,
    harmonic: Option<MagneticState<Complex64>>,
    solves: usize,
}

/// Runs the coupled simulation from `initial` until the end time.
pub fn run_weak_coupling(
    magnetic: &mut MagneticSystem,
    thermal: &ThermalSystem,
    settings: &CouplingSettings,
    initial: Vec<f64>,
    probes: &[LocatedProbe],
    observer: &mut dyn StepObserver,
) -> Result<CouplingResult> {
    settings.validate()?;
    let temperature_dependent = magnetic.is_temperature_dependent();
    let mut t_field = initial;
    let mut time = 0.0;
    let mut dt = settings.dt_initial;
    let mut stepper: Option<ThermalStepper> = None;
    let mut mag_state: Option<MagneticState<f64>> = None;
    let mut last_harmonic: Option<MagneticState<Complex64>> = None;
    let mut history = Vec::new();
    let mut solves = 0;
    let mut losses = Vec::new();
    let mut step = 0;
    let eps = 1e-9 * settings.end_time;

    while time < settings.end_time - eps {
        if temperature_dependent || (last_harmonic.is_none() && mag_state.is_none()) {
            magnetic
                .update_conductivity(&thermal.element_means(&t_field))
                .map_err(|e| e.at_time(time))?;
        }
        let window = match settings.mode {
            MagneticMode::Harmonic => {
                let state = match (&last_harmonic, temperature_dependent) {
                    (Some(s), false) => s.clone(),
                    _ => magnetic.solve_frequency(settings.omega()).map_err(|e| e.at_time(time))?,
                };
                let solves = usize::from(temperature_dependent || last_harmonic.is_none());
                let w = Window {
                    losses: losses_harmonic(magnetic, &state),
                    windings: harmonic_terminals(&state),
                    harmonic: Some(state),
                    solves,
                };
                last_harmonic = w.harmonic.clone();
                w
            }
            MagneticMode::Time => {
                let (w, last) = time_window(magnetic, settings, mag_state.take()).map_err(|e| e.at_time(time))?;
                mag_state = Some(last);
                w
            }
        };
        solves += window.solves;
        let q = thermal.load_from_elements(&window.losses);

        let dt_step = dt.min(settings.end_time - time);
        if stepper.as_ref().is_none_or(|s| s.dt() != dt_step) {
            stepper = Some(thermal.stepper(dt_step).map_err(|e| e.at_time(time))?);
        }
        let next = stepper.as_ref().unwrap().step(&t_field, &q);
        let max_change = next.iter().zip(&t_field).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("temperature became non-finite".into()).at_time(time));
        }
        t_field = next;
        time += dt_step;
        step += 1;

        let row = HistoryRow {
            time,
            dt: dt_step,
            total_loss: magnetic.total_loss(&window.losses),
            internal_energy: thermal.internal_energy(&t_field),
            t_min: t_field.iter().copied().fold(f64::INFINITY, f64::min),
            t_max: t_field.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            probes: probes.iter().map(|p| p.value(&t_field)).collect(),
            windings: window.windings,
        };
        debug!(
            "t = {:.1} s, dt = {:.1} s, P = {:.4} W, T_max = {:.3} K",
            row.time, row.dt, row.total_loss, row.t_max
        );
        observer.after_step(step, &row, &t_field, &window.losses)?;
        history.push(row);
        losses = window.losses;
        dt = adapt_macro_step(max_change, dt, settings.dt_initial, settings.dt_max, settings.grow_threshold);
    }
    info!("coupled run finished: {step} thermal steps, {solves} magnetic solves");
    Ok(CouplingResult {
        history,
        temperature: t_field,
        losses,
        thermal_steps: step,
        magnetic_solves: solves,
        final_harmonic: last_harmonic,
    })
}

fn harmonic_terminals(state: &MagneticState<Complex64>) -> Vec<WindingPhasors> {
    state
        .foils
        .iter()
        .chain(&state.stranded)
        .map(|w| WindingPhasors {
            current: w.current,
            voltage: w.voltage,
        })
        .collect()
}

/// Runs `periods_per_window` periods continuing from `start` (zero field on
/// the first window) and averages losses over the last period.
fn time_window(
    magnetic: &MagneticSystem,
    settings: &CouplingSettings,
    start: Option<MagneticState<f64>>,
) -> Result<(Window, MagneticState<f64>)> {
    let omega = settings.omega();
    let dt = settings.dt_mag();
    let n_period = settings.steps_per_period;
    let stepper = TimeStepper::new(magnetic, omega, dt)?;
    let mut state = start.unwrap_or_else(|| magnetic.initial_state(omega, 0.0));
    let total = n_period * settings.periods_per_window;
    let mut last_period = Vec::with_capacity(n_period + 1);
    for k in 0..total {
        let next = stepper.step(&state);
        if k + n_period >= total {
            if last_period.is_empty() {
                last_period.push(state.clone());
            }
            last_period.push(next.clone());
        }
        state = next;
    }
    let losses = losses_time_domain(magnetic, &last_period, n_period, dt)?;
    let times: Vec<f64> = last_period.iter().map(|s| s.time).collect();
    let n_windings = state.foils.len() + state.stranded.len();
    let windings = (0..n_windings)
        .map(|w| {
            let pick = |s: &MagneticState<f64>| {
                s.foils
                    .iter()
                    .chain(&s.stranded)
                    .nth(w)
                    .map_or((0.0, 0.0), |x| (x.current, x.voltage))
            };
            let currents: Vec<f64> = last_period.iter().map(|s| pick(s).0).collect();
            let voltages: Vec<f64> = last_period.iter().map(|s| pick(s).1).collect();
            WindingPhasors {
                current: extract_phasor(&times, &currents, omega),
                voltage: extract_phasor(&times, &voltages, omega),
            }
        })
        .collect();
    Ok((
        Window {
            losses,
            windings,
            harmonic: None,
            solves: total,
        },
        state,
    ))
}
