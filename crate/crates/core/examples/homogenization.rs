//! Effective tensors of a copper/insulation foil stack and the temperature
//! dependence of the azimuthal conductivity.

use foilfem::materials::{homogenize, AzimuthalConductivity, MaterialSpec};

fn main() -> foilfem::Result<()> {
    let copper = MaterialSpec::new(60e6, 1.0, 385.0, 3.45e6).with_alpha(3.93e-3);
    let insulation = MaterialSpec::new(0.0, 1.0, 0.09, 1.03e6);

    println!(
        "{:>5} {:>12} {:>12} {:>12} {:>12}",
        "ff", "sigma_par", "lambda_par", "lambda_perp", "c_V"
    );
    for ff in [0.5, 0.7, 0.8, 0.9, 1.0] {
        let t = homogenize(&copper, &insulation, ff)?;
        println!(
            "{ff:>5.2} {:>12.4e} {:>12.4} {:>12.5} {:>12.4e}",
            t.sigma_par, t.lambda_par, t.lambda_perp, t.c_v
        );
    }

    let t = homogenize(&copper, &insulation, 0.8)?;
    let (nu_rho, nu_z) = t.nu_rho_z();
    let (l_rho, l_z) = t.lambda_rho_z();
    println!("\nradial stacking, ff = 0.8: nu = ({nu_rho:.4e}, {nu_z:.4e}), lambda = ({l_rho:.5}, {l_z:.3})");

    let t_ref = 293.15;
    let sigma = AzimuthalConductivity::mixed(&copper, &insulation, 0.8, t_ref);
    for dt in [0.0, 25.0, 50.0, 100.0] {
        println!("T = T_ref + {dt:>5.1} K -> sigma = {:.4e} S/m", sigma.at(t_ref + dt)?);
    }
    Ok(())
}
