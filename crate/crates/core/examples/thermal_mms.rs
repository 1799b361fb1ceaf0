//! Manufactured-solution convergence of the axisymmetric heat solver.

use foilfem::thermal::{mms_convergence, MmsCase};

fn main() -> foilfem::Result<()> {
    for (name, case) in [
        ("isotropic", MmsCase::Isotropic),
        ("anisotropic (lambda_z = 25 lambda_rho)", MmsCase::Anisotropic),
        ("domain touching the axis", MmsCase::Axis),
        ("constant solution", MmsCase::Constant),
    ] {
        println!("{name}");
        for l in mms_convergence(5, case)? {
            let rate = l.rate.map_or(String::from("  -"), |r| format!("{r:.3}"));
            println!(
                "  h = {:.4e}  elements {:>6}  L2 error {:.4e}  rate {rate}",
                l.h, l.n_elements, l.l2_error
            );
        }
    }
    Ok(())
}
