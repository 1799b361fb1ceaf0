use std::f64::consts::PI;

use approx::assert_relative_eq;
use num_complex::Complex64;

use super::*;
use crate::foil_winding::{dc_resistance, FoilWindingSpec};
use crate::materials::{homogenize, AzimuthalConductivity, MaterialSpec, MU0};
use crate::mesh::{generate, Layout, RegionRect};

fn winding(turns: u32) -> FoilWindingSpec {
    FoilWindingSpec {
        region: "fw".into(),
        rho: [0.010, 0.020],
        z: [-0.010, 0.010],
        turns,
        fill_factor: 0.8,
        conductor: MaterialSpec::new(60e6, 1.0, 385.0, 3.45e6),
        insulator: MaterialSpec::new(0.0, 1.0, 0.09, 1.03e6),
    }
}

fn air_box() -> RegionRect {
    RegionRect::new("air", [0.0, 0.03], [-0.02, 0.02])
}

/// Winding split into `strips` radial strips (one region) plus air.
fn homogenized_mesh(spec: &FoilWindingSpec, strips: usize, h: f64) -> Mesh {
    let w = spec.width() / strips as f64;
    let regions = (0..strips)
        .map(|k| RegionRect::new("fw", [spec.rho[0] + k as f64 * w, spec.rho[0] + (k + 1) as f64 * w], spec.z))
        .collect();
    generate(
        &Layout {
            regions,
            fill: Some(air_box()),
        },
        h,
    )
    .unwrap()
}

fn air() -> MagneticRegion {
    MagneticRegion::isotropic(1.0 / MU0, AzimuthalConductivity::constant(0.0))
}

fn foil_region(spec: &FoilWindingSpec) -> MagneticRegion {
    let t = homogenize(&spec.conductor, &spec.insulator, spec.fill_factor).unwrap();
    let (nu_rho, nu_z) = t.nu_rho_z();
    MagneticRegion {
        nu_rho,
        nu_z,
        sigma: AzimuthalConductivity::constant(t.sigma_phi()),
        source_density: 0.0,
    }
}

fn homogenized_system<'m>(mesh: &'m Mesh, spec: &FoilWindingSpec, n_u: usize, drive: WindingDrive) -> MagneticSystem<'m> {
    let fw = mesh.region_id("fw").unwrap();
    let mut regions = vec![air(); mesh.region_names().len()];
    regions[fw] = foil_region(spec);
    let foil = FoilWindingModel::homogenized("fw", fw, spec.clone(), n_u, drive).unwrap();
    assemble(
        mesh,
        MagneticProblem {
            regions,
            foils: vec![foil],
            stranded: vec![],
        },
    )
    .unwrap()
}

fn current(amplitude: f64) -> WindingDrive {
    WindingDrive::Current { amplitude }
}

const OMEGA_50: f64 = 2.0 * PI * 50.0;

#[test]
fn assembled_matrices_are_symmetric() {
    let spec = winding(30);
    let mesh = homogenized_mesh(&spec, 6, 2e-3);
    let sys = homogenized_system(&mesh, &spec, 7, current(1.0));
    assert_eq!(sys.stiffness().asymmetry(), 0.0);
    assert_eq!(sys.mass().asymmetry(), 0.0);
    let g = sys.gram(0);
    for i in 0..g.len() {
        assert!(g[i][i] > 0.0);
        for j in 0..g.len() {
            assert_eq!(g[i][j], g[j][i]);
        }
    }
}

#[test]
fn stiffness_is_positive_semidefinite() {
    let spec = winding(30);
    let mesh = homogenized_mesh(&spec, 6, 2e-3);
    let sys = homogenized_system(&mesh, &spec, 7, current(1.0));
    let mut state = 12345u64;
    for _ in 0..20 {
        let v: Vec<f64> = (0..mesh.n_nodes())
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            })
            .collect();
        assert!(sys.stiffness().bilinear(&v, &v) > 0.0);
    }
}

#[test]
fn uniform_axial_field_is_in_the_kernel_at_interior_nodes() {
    // A = B0 ρ / 2 gives B = B0 e_z; the weak residual vanishes away from the boundary.
    let spec = winding(30);
    let mesh = homogenized_mesh(&spec, 6, 2e-3);
    let sys = homogenized_system(&mesh, &spec, 7, current(1.0));
    let a: Vec<f64> = mesh.nodes().iter().map(|p| 0.5 * p[0]).collect();
    let ka = sys.stiffness().mul_vec(&a);
    let boundary = mesh.boundary_nodes();
    // scale: one row of K times a typical value
    let scale = (0..mesh.n_nodes()).map(|i| sys.stiffness().get(i, i) * a[i]).fold(0.0, f64::max);
    for i in 0..mesh.n_nodes() {
        let p = mesh.node(i);
        // interfaces between ν regions still cancel because ν is isotropic here
        if !boundary[i] {
            assert!(ka[i].abs() < 1e-9 * scale, "node {p:?}: {}", ka[i]);
        }
    }
}

#[test]
fn conductivity_mass_integrates_sigma() {
    let spec = winding(30);
    let mesh = homogenized_mesh(&spec, 6, 2e-3);
    let sys = homogenized_system(&mesh, &spec, 7, current(1.0));
    let ones = vec![1.0; mesh.n_nodes()];
    let total = sys.mass().bilinear(&ones, &ones);
    let rho_avg = 0.015;
    let exact = 48e6 * 2.0 * PI * rho_avg * spec.width() * spec.height();
    assert_relative_eq!(total, exact, max_relative = 1e-12);
}

#[test]
fn gram_matrix_matches_closed_form_for_two_hats() {
    let spec = winding(30);
    let mesh = homogenized_mesh(&spec, 1, 1e-3);
    let sys = homogenized_system(&mesh, &spec, 2, current(1.0));
    let [r0, r1] = spec.rho;
    let w = r1 - r0;
    let ln = (r1 / r0).ln();
    // ∫ (r1-ρ)²/ρ, ∫ (ρ-r0)²/ρ and ∫ (r1-ρ)(ρ-r0)/ρ over [r0, r1]
    let i00 = r1 * r1 * ln - 2.0 * r1 * w + 0.5 * (r1 * r1 - r0 * r0);
    let i11 = r0 * r0 * ln - 2.0 * r0 * w + 0.5 * (r1 * r1 - r0 * r0);
    let i01 = (r0 + r1) * w - r0 * r1 * ln - 0.5 * (r1 * r1 - r0 * r0);
    let k = 48e6 * spec.height() / (2.0 * PI * w * w);
    let g = sys.gram(0);
    assert_relative_eq!(g[0][0], k * i00, max_relative = 1e-9);
    assert_relative_eq!(g[1][1], k * i11, max_relative = 1e-9);
    assert_relative_eq!(g[0][1], k * i01, max_relative = 1e-9);
}

#[test]
fn coupling_matrix_lives_on_foil_nodes() {
    let spec = winding(30);
    let mesh = homogenized_mesh(&spec, 6, 2e-3);
    let sys = homogenized_system(&mesh, &spec, 7, current(1.0));
    let fw = mesh.region_id("fw").unwrap();
    let mut in_foil = vec![false; mesh.n_nodes()];
    for e in mesh.elements_in(&[fw]) {
        for k in mesh.triangle(e) {
            in_foil[k] = true;
        }
    }
    for (i, _, v) in sys.coupling_matrix(0).iter() {
        assert!(in_foil[i] && v != 0.0);
    }
}

#[test]
fn dc_limit_reproduces_series_resistance() {
    let spec = winding(30);
    let mesh = homogenized_mesh(&spec, 6, 2e-3);
    let sys = homogenized_system(&mesh, &spec, 7, current(1.0));
    let s = sys.solve_frequency(0.0).unwrap();
    let (sum, integral) = dc_resistance(&spec);
    let r = s.foils[0].voltage.re;
    assert_relative_eq!(r, integral, max_relative = 1e-9);
    assert_relative_eq!(r, sum, max_relative = 1e-2);
    let loss = sys.total_loss(&sys.element_losses_harmonic(&s));
    assert_relative_eq!(loss, 0.5 * integral, max_relative = 1e-9);
}

#[test]
fn cut_current_is_uniform_at_fifty_hertz() {
    let spec = winding(30);
    let mesh = homogenized_mesh(&spec, 6, 1e-3);
    let sys = homogenized_system(&mesh, &spec, 7, current(10.0));
    let s = sys.solve_frequency(OMEGA_50).unwrap();
    assert!(sys.frequency_residual(&s) < 1e-10);
    for k in 0..5 {
        let alpha = spec.rho[0] + spec.width() * (0.1 + 0.2 * k as f64);
        let i = sys.foil_cut_current(&s, 0, alpha).unwrap();
        assert!((i - Complex64::new(10.0, 0.0)).norm() < 1e-8 * 10.0, "{alpha}: {i}");
    }
    // the pointwise cut integral agrees up to discretization error
    let p = sys.foil_cut_current_pointwise(&s, 0, 0.015, 400).unwrap();
    assert!((p - Complex64::new(10.0, 0.0)).norm() < 0.05 * 10.0, "{p}");
}

#[test]
fn zero_drive_gives_zero_state() {
    let spec = winding(30);
    let mesh = homogenized_mesh(&spec, 6, 2e-3);
    let sys = homogenized_system(&mesh, &spec, 7, current(0.0));
    let s = sys.solve_frequency(OMEGA_50).unwrap();
    assert_eq!(s.norm(), 0.0);
    assert!(s.foils[0].u.iter().all(|v| v.norm() == 0.0));
}

#[test]
fn dirichlet_nodes_are_exactly_zero() {
    let spec = winding(30);
    let mesh = homogenized_mesh(&spec, 6, 2e-3);
    let sys = homogenized_system(&mesh, &spec, 7, current(1.0));
    let s = sys.solve_frequency(OMEGA_50).unwrap();
    for (i, b) in mesh.boundary_nodes().into_iter().enumerate() {
        if b {
            assert_eq!(s.a[i], Complex64::new(0.0, 0.0));
        }
    }
}

#[test]
fn input_power_equals_joule_losses() {
    let spec = winding(30);
    let mesh = homogenized_mesh(&spec, 6, 1e-3);
    for f in [50.0, 2000.0, 20000.0] {
        let sys = homogenized_system(&mesh, &spec, 7, current(3.0));
        let s = sys.solve_frequency(2.0 * PI * f).unwrap();
        let input = 0.5 * (s.foils[0].voltage * s.foils[0].current.conj()).re;
        let loss = sys.total_loss(&sys.element_losses_harmonic(&s));
        assert_relative_eq!(input, loss, max_relative = 1e-9);
    }
}

#[test]
fn source_circuit_loop_equation_holds() {
    let spec = winding(30);
    let mesh = homogenized_mesh(&spec, 6, 2e-3);
    let drive = WindingDrive::Source {
        amplitude: 5.0,
        resistance: 0.5,
    };
    let sys = homogenized_system(&mesh, &spec, 7, drive);
    let s = sys.solve_frequency(OMEGA_50).unwrap();
    let w = &s.foils[0];
    assert!((w.voltage + w.current * 0.5 - 5.0).norm() < 1e-10 * 5.0);
    assert!(sys.frequency_residual(&s) < 1e-10);
    let input = 0.5 * (w.voltage * w.current.conj()).re;
    let loss = sys.total_loss(&sys.element_losses_harmonic(&s));
    assert_relative_eq!(input, loss, max_relative = 1e-9);
}

#[test]
fn open_circuit_load_carries_no_current() {
    let spec = winding(30);
    let mesh = homogenized_mesh(&spec, 6, 2e-3);
    let sys = homogenized_system(&mesh, &spec, 7, WindingDrive::Load { resistance: f64::INFINITY });
    let s = sys.solve_frequency(OMEGA_50).unwrap();
    assert_eq!(s.foils[0].current, Complex64::new(0.0, 0.0));
}

#[test]
fn backward_euler_matches_harmonic_steady_state() {
    let spec = winding(30);
    let mesh = homogenized_mesh(&spec, 6, 2e-3);
    let f = 1000.0;
    let omega = 2.0 * PI * f;
    let sys = homogenized_system(&mesh, &spec, 7, current(2.0));
    let harmonic = sys.solve_frequency(omega).unwrap();
    let p_ref = sys.total_loss(&sys.element_losses_harmonic(&harmonic));

    let steps = 200;
    let dt = 1.0 / f / steps as f64;
    let stepper = TimeStepper::new(&sys, omega, dt).unwrap();
    let mut state = sys.initial_state(omega, 0.0);
    let (mut times, mut volts) = (Vec::new(), Vec::new());
    let mut energy = 0.0;
    for k in 0..6 * steps {
        let next = stepper.step(&state);
        if k >= 5 * steps {
            energy += sys.total_loss(&sys.element_losses_instant(&next, &state, dt)) * dt;
        }
        if k + 1 >= 5 * steps {
            times.push(next.time);
            volts.push(next.foils[0].voltage);
        }
        state = next;
    }
    let p_avg = energy * f;
    assert_relative_eq!(p_avg, p_ref, max_relative = 0.03);
    let v = extract_phasor(&times, &volts, omega);
    let v_ref = harmonic.foils[0].voltage;
    assert!((v - v_ref).norm() < 0.03 * v_ref.norm(), "{v} vs {v_ref}");
}

#[test]
fn backward_euler_dissipates_without_drive() {
    let spec = winding(30);
    let mesh = homogenized_mesh(&spec, 6, 2e-3);
    let driven = homogenized_system(&mesh, &spec, 7, current(1.0));
    let s = driven.solve_frequency(OMEGA_50).unwrap();
    let free = homogenized_system(&mesh, &spec, 7, current(0.0));
    let stepper = TimeStepper::new(&free, OMEGA_50, 1e-4).unwrap();
    let mut state = free.initial_state(OMEGA_50, 0.0);
    state.a = s.a.iter().map(|v| v.re).collect();
    let mut energy = free.magnetic_energy(&state.a);
    for _ in 0..50 {
        state = stepper.step(&state);
        let e = free.magnetic_energy(&state.a);
        assert!(e <= energy * (1.0 + 1e-12));
        energy = e;
    }
    assert!(energy > 0.0);
}

#[test]
fn phasor_extraction_recovers_sine_reference() {
    let omega = 2.0 * PI * 50.0;
    let x = Complex64::new(1.5, -0.7);
    let times: Vec<f64> = (0..=400).map(|k| k as f64 * 0.02 / 400.0 + 0.3).collect();
    let values: Vec<f64> = times.iter().map(|&t| (x * Complex64::from_polar(1.0, omega * t)).im).collect();
    let got = extract_phasor(&times, &values, omega);
    assert!((got - x).norm() < 1e-12);
}

fn resolved_system<'m>(mesh: &'m Mesh, spec: &FoilWindingSpec, turns: &[usize], drive: WindingDrive) -> MagneticSystem<'m> {
    let mut regions = vec![air(); mesh.region_names().len()];
    for &t in turns {
        regions[t] = MagneticRegion::isotropic(1.0 / MU0, AzimuthalConductivity::constant(spec.conductor.sigma));
    }
    let foil = FoilWindingModel::resolved("fw", turns.to_vec(), drive);
    assemble(
        mesh,
        MagneticProblem {
            regions,
            foils: vec![foil],
            stranded: vec![],
        },
    )
    .unwrap()
}

fn resolved_mesh(spec: &FoilWindingSpec, per_layer: usize, h: f64) -> (Mesh, Vec<usize>) {
    let layout = resolved_layout(spec, per_layer);
    let mesh = generate(
        &Layout {
            regions: layout.rects.clone(),
            fill: Some(air_box()),
        },
        h,
    )
    .unwrap();
    let turns = resolved_turn_regions(&mesh, &layout).unwrap();
    (mesh, turns)
}

#[test]
fn single_solid_turn_dc_resistance() {
    let mut spec = winding(1);
    spec.rho = [0.010, 0.0105];
    let (mesh, turns) = resolved_mesh(&spec, 4, 2e-3);
    check_layer_resolution(&mesh, &turns).unwrap();
    let sys = resolved_system(&mesh, &spec, &turns, current(1.0));
    let s = sys.solve_frequency(0.0).unwrap();
    let rho_c = spec.rho[0] + 0.5 * spec.conductor_width();
    let analytic = 2.0 * PI * rho_c / (spec.conductor.sigma * spec.conductor_width() * spec.height());
    assert_relative_eq!(s.foils[0].voltage.re, analytic, max_relative = 1e-2);
}

#[test]
fn resolved_turns_share_one_current() {
    let spec = winding(10);
    let (mesh, turns) = resolved_mesh(&spec, 2, 2e-3);
    let sys = resolved_system(&mesh, &spec, &turns, current(10.0));
    let s = sys.solve_frequency(OMEGA_50).unwrap();
    assert!(sys.frequency_residual(&s) < 1e-10);
    for n in 0..10 {
        let alpha = spec.turn_center(n);
        let i = sys.foil_cut_current(&s, 0, alpha).unwrap();
        assert!((i - Complex64::new(10.0, 0.0)).norm() < 1e-10 * 10.0);
    }
    let input = 0.5 * (s.foils[0].voltage * s.foils[0].current.conj()).re;
    assert_relative_eq!(input, sys.total_loss(&sys.element_losses_harmonic(&s)), max_relative = 1e-9);
}

#[test]
fn under_resolved_layers_are_rejected() {
    let spec = winding(10);
    let (mesh, turns) = resolved_mesh(&spec, 1, 2e-3);
    assert!(matches!(check_layer_resolution(&mesh, &turns), Err(Error::Mesh(_))));
}

fn stranded_problem(mesh: &Mesh, turns: f64, drive: WindingDrive) -> MagneticProblem {
    let coil = mesh.region_id("coil").unwrap();
    let regions = vec![air(); mesh.region_names().len()];
    MagneticProblem {
        regions,
        foils: vec![],
        stranded: vec![StrandedWindingModel {
            name: "sc".into(),
            region: coil,
            turns,
            fill_factor: 0.5,
            conductor: AzimuthalConductivity::constant(58e6),
            drive,
        }],
    }
}

fn coil_mesh() -> Mesh {
    generate(
        &Layout {
            regions: vec![RegionRect::new("coil", [0.01, 0.016], [-0.01, 0.01])],
            fill: Some(air_box()),
        },
        1e-3,
    )
    .unwrap()
}

#[test]
fn stranded_vector_equals_uniform_source() {
    let mesh = coil_mesh();
    let coil = mesh.region_id("coil").unwrap();
    let area = mesh.region_area(coil);
    let turns = 500.0;
    let sys = assemble(&mesh, stranded_problem(&mesh, turns, current(1.0))).unwrap();
    let mut src = stranded_problem(&mesh, turns, current(0.0));
    src.stranded.clear();
    src.regions[coil].source_density = turns / area;
    let sys_q = assemble(&mesh, src).unwrap();
    for (a, b) in sys.stranded_vector(0).iter().zip(sys_q.source_vector()) {
        assert_relative_eq!(*a, *b, max_relative = 1e-12, epsilon = 1e-18);
    }
    // ∫ s_i/(2πρ) over the nodal basis partition of unity = N
    let mut total = 0.0;
    for e in mesh.elements_in(&[coil]) {
        let t = mesh.element(e);
        for (_, _, w) in t.quadrature(&crate::fem::RULE_7) {
            total += turns / area * w;
        }
    }
    assert_relative_eq!(total, turns, max_relative = 1e-12);
    let r_expected = turns * turns * 2.0 * PI * 0.013 / (0.5 * 58e6 * area);
    assert_relative_eq!(sys.stranded_resistance(0), r_expected, max_relative = 1e-12);
}

#[test]
fn stranded_current_drive_matches_source_density() {
    let mesh = coil_mesh();
    let coil = mesh.region_id("coil").unwrap();
    let area = mesh.region_area(coil);
    let sys = assemble(&mesh, stranded_problem(&mesh, 1.0, current(1.0))).unwrap();
    let s = sys.solve_frequency(OMEGA_50).unwrap();
    let mut src = stranded_problem(&mesh, 1.0, current(0.0));
    src.stranded.clear();
    src.regions[coil].source_density = 1.0 / area;
    let q = assemble(&mesh, src).unwrap().solve_frequency(OMEGA_50).unwrap();
    for (a, b) in s.a.iter().zip(&q.a) {
        assert!((a - b).norm() <= 1e-12 * s.norm());
    }
    // a stranded winding's voltage-driven current matches its impedance
    let z = s.stranded[0].voltage / s.stranded[0].current;
    let sys_v = assemble(
        &mesh,
        stranded_problem(
            &mesh,
            1.0,
            WindingDrive::Source {
                amplitude: 1.0,
                resistance: 0.0,
            },
        ),
    )
    .unwrap();
    let sv = sys_v.solve_frequency(OMEGA_50).unwrap();
    assert!((sv.stranded[0].current - 1.0 / z).norm() < 1e-9 * (1.0 / z).norm());
    assert!(sys_v.frequency_residual(&sv) < 1e-10);
}

#[test]
fn missing_material_is_rejected() {
    let mesh = coil_mesh();
    let problem = MagneticProblem {
        regions: vec![air()],
        foils: vec![],
        stranded: vec![],
    };
    assert!(matches!(assemble(&mesh, problem), Err(Error::Validation { .. })));
}
