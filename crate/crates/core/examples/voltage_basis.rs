//! Hat basis of the voltage function across a foil winding, its coupling
//! vector and the DC resistance of the series turns.

use foilfem::foil_winding::{build_voltage_basis, coupling_vector, dc_resistance, FoilWindingSpec};
use foilfem::materials::MaterialSpec;

fn main() -> foilfem::Result<()> {
    let spec = FoilWindingSpec {
        region: "winding".into(),
        rho: [0.010, 0.020],
        z: [-0.010, 0.010],
        turns: 30,
        fill_factor: 0.8,
        conductor: MaterialSpec::new(60e6, 1.0, 385.0, 3.45e6),
        insulator: MaterialSpec::new(0.0, 1.0, 0.09, 1.03e6),
    };
    for n_u in [2, 3, 7, 20] {
        let basis = build_voltage_basis(&spec, n_u)?;
        let c = coupling_vector(&basis, &spec);
        let shown: Vec<String> = c.iter().take(7).map(|v| format!("{v:.3}")).collect();
        println!(
            "n_u = {n_u:>2}: spacing {:.3} mm, sum c = {:.12}, c = [{}{}]",
            basis.spacing() * 1e3,
            c.iter().sum::<f64>(),
            shown.join(", "),
            if n_u > 7 { ", ..." } else { "" }
        );
    }
    let (sum, integral) = dc_resistance(&spec);
    println!("R_dc: turn sum {:.6e} ohm, continuous {:.6e} ohm", sum, integral);
    println!("skin depth check at 50 Hz: {}", spec.check_skin_depth(50.0));
    Ok(())
}
