use super::*;

const VALIDATION: &str = include_str!("../../decks/validation.json");
const POT: &str = include_str!("../../decks/pot_transformer.json");

fn edit(text: &str, f: impl FnOnce(&mut serde_json::Value)) -> String {
    let mut v: serde_json::Value = serde_json::from_str(text).unwrap();
    f(&mut v);
    v.to_string()
}

fn field_of(err: Error) -> String {
    match err {
        Error::Validation { field, .. } => field,
        other => panic!("expected a validation error, got {other}"),
    }
}

#[test]
fn validation_deck_defaults() {
    let cfg = parse_config(VALIDATION).unwrap();
    assert_eq!(cfg.n_u, 7);
    assert_eq!(cfg.magnetic.steps_per_period, Some(200));
    assert!((cfg.magnetic.dt_mag.unwrap() - 1e-4).abs() < 1e-18);
    assert_eq!(cfg.thermal.dt_max, Some(120.0));
    assert!((cfg.reference_temperature() - 293.15).abs() < 1e-12);
    assert_eq!(cfg.initial_temperature(), cfg.reference_temperature());
}

#[test]
fn adaptive_deck_gets_step_cap() {
    let cfg = parse_config(POT).unwrap();
    assert_eq!(cfg.thermal.dt_max, Some(480.0));
    assert_eq!(cfg.probes.len(), 6);
}

#[test]
fn resolved_echo_round_trips() {
    let cfg = parse_config(VALIDATION).unwrap();
    let again = parse_config(&cfg.to_json()).unwrap();
    assert_eq!(cfg, again);
}

#[test]
fn too_few_basis_functions() {
    let text = edit(VALIDATION, |v| v["n_u"] = 1.into());
    assert_eq!(field_of(parse_config(&text).unwrap_err()), "n_u");
}

#[test]
fn zero_end_time() {
    let text = edit(VALIDATION, |v| v["thermal"]["end_time"] = 0.0.into());
    assert_eq!(field_of(parse_config(&text).unwrap_err()), "thermal.end_time");
}

#[test]
fn unknown_field_is_a_parse_error() {
    let text = edit(VALIDATION, |v| v["thermal"]["dt_inital"] = 1.0.into());
    let err = parse_config(&text).unwrap_err();
    assert!(matches!(err, Error::Parse(ref m) if m.contains("dt_inital")), "{err}");
}

#[test]
fn malformed_json() {
    assert!(matches!(parse_config("{ \"name\": "), Err(Error::Parse(_))));
}

#[test]
fn missing_material_is_named() {
    let text = edit(VALIDATION, |v| v["regions"]["air"] = "vacuum".into());
    assert_eq!(field_of(parse_config(&text).unwrap_err()), "regions.air");
}

#[test]
fn untagged_boundary_is_rejected() {
    let text = edit(VALIDATION, |v| {
        v["thermal"]["boundaries"].as_object_mut().unwrap().remove("axis");
    });
    let cfg = parse_config(&text).unwrap();
    let mesh = cfg.build_mesh().unwrap();
    assert_eq!(field_of(cfg.thermal_problem(&mesh).unwrap_err()), "thermal.boundaries.axis");
}

#[test]
fn dt_mag_must_divide_period() {
    let text = edit(VALIDATION, |v| {
        v["magnetic"] = serde_json::json!({ "dt_mag": 3e-3 });
    });
    assert_eq!(field_of(parse_config(&text).unwrap_err()), "magnetic.dt_mag");
    let text = edit(VALIDATION, |v| {
        v["magnetic"] = serde_json::json!({ "dt_mag": 2e-4 });
    });
    assert_eq!(parse_config(&text).unwrap().magnetic.steps_per_period, Some(100));
}

#[test]
fn celsius_and_kelvin_agree() {
    assert_eq!(Temperature::celsius(20.0).to_kelvin(), Temperature::kelvin(293.15).to_kelvin());
    assert!((kelvin_to_celsius(350.0) - 76.85).abs() < 1e-12);
}

#[test]
fn unknown_temperature_unit() {
    let text = edit(VALIDATION, |v| v["thermal"]["reference_temperature"]["unit"] = "F".into());
    assert!(matches!(parse_config(&text), Err(Error::Parse(_))));
}

#[test]
fn winding_region_assigned_twice() {
    let text = edit(VALIDATION, |v| v["regions"]["winding"] = "air".into());
    assert_eq!(field_of(parse_config(&text).unwrap_err()), "windings.foil.region");
}

#[test]
fn foil_mesh_follows_hat_nodes() {
    let cfg = parse_config(VALIDATION).unwrap();
    let layout = cfg.mesh_layout().unwrap();
    assert_eq!(layout.regions.iter().filter(|r| r.tag == "winding").count(), 6);
    let mesh = cfg.build_mesh().unwrap();
    let spec = cfg.foil_spec(&cfg.foil_windings[0]).unwrap();
    let basis = crate::foil_winding::build_voltage_basis(&spec, 7).unwrap();
    for x in basis.nodes() {
        assert!(mesh.nodes().iter().any(|p| (p[0] - x).abs() < 1e-12));
    }
}

#[test]
fn problems_cover_every_region() {
    for deck in [VALIDATION, POT] {
        let cfg = parse_config(deck).unwrap();
        let mesh = cfg.build_mesh().unwrap();
        let m = cfg.magnetic_problem(&mesh).unwrap();
        let t = cfg.thermal_problem(&mesh).unwrap();
        assert_eq!(m.regions.len(), mesh.region_names().len());
        assert_eq!(t.regions.len(), mesh.region_names().len());
    }
}
