//! Constitutive data, foil-winding mixing rules and conductivity temperature law.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Vacuum permeability in H/m.
pub const MU0: f64 = 4.0e-7 * PI;

/// Linear temperature law `σ(T) = σ_ref / (1 + α_ref (T - T_ref))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemperatureModel {
    /// S/m
    pub sigma_ref: f64,
    /// 1/K
    pub alpha_ref: f64,
    /// K
    pub t_ref: f64,
}

impl TemperatureModel {
    pub fn conductivity_at(&self, t: f64) -> Result<f64> {
        conductivity_at(t, self)
    }
}

/// Electric conductivity at temperature `t` (K).
pub fn conductivity_at(t: f64, model: &TemperatureModel) -> Result<f64> {
    let denom = 1.0 + model.alpha_ref * (t - model.t_ref);
    if !(denom > 0.0) {
        return Err(Error::Material(format!(
            "temperature {t} K is below the validity range of the conductivity law (1 + α(T - T_ref) = {denom})"
        )));
    }
    Ok(model.sigma_ref / denom)
}

/// Skin depth `sqrt(2 / (ω µ σ))` in metres.
pub fn skin_depth(f: f64, mu: f64, sigma: f64) -> f64 {
    (2.0 / (2.0 * PI * f * mu * sigma)).sqrt()
}

/// Isotropic constituent material.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialSpec {
    /// S/m
    pub sigma: f64,
    /// Reluctivity in m/H.
    pub nu: f64,
    /// W/(m K)
    pub lambda: f64,
    /// Volumetric heat capacity, J/(m³ K)
    pub c_v: f64,
    /// Temperature coefficient α_ref in 1/K; `None` keeps σ constant.
    pub alpha: Option<f64>,
}

impl MaterialSpec {
    pub fn new(sigma: f64, mu_r: f64, lambda: f64, c_v: f64) -> Self {
        MaterialSpec {
            sigma,
            nu: 1.0 / (mu_r * MU0),
            lambda,
            c_v,
            alpha: None,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = Some(alpha);
        self
    }

    pub fn mu(&self) -> f64 {
        1.0 / self.nu
    }

    pub fn validate(&self, name: &str) -> Result<()> {
        let check = |ok: bool, field: &str, reason: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::validation(format!("materials.{name}.{field}"), reason))
            }
        };
        check(self.sigma >= 0.0 && self.sigma.is_finite(), "sigma", "must be >= 0")?;
        check(self.nu > 0.0 && self.nu.is_finite(), "mu_r", "must be > 0")?;
        check(self.lambda > 0.0 && self.lambda.is_finite(), "lambda", "must be > 0")?;
        check(self.c_v > 0.0 && self.c_v.is_finite(), "c_v", "must be > 0")?;
        check(self.alpha.is_none_or(|a| a >= 0.0), "alpha", "must be >= 0")?;
        Ok(())
    }

    /// Temperature law referenced at `t_ref`, if the material has one.
    pub fn temperature_model(&self, t_ref: f64) -> Option<TemperatureModel> {
        self.alpha.map(|alpha_ref| TemperatureModel {
            sigma_ref: self.sigma,
            alpha_ref,
            t_ref,
        })
    }
}

/// Global axis that carries the local e_α direction (perpendicular to the
/// layers). The winding direction e_β is always azimuthal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum StackAxis {
    #[default]
    Radial,
    Axial,
}

/// Diagonal homogenized tensors in the local (α, β, c) frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomogenizedTensors {
    pub nu_perp: f64,
    pub nu_par: f64,
    pub sigma_perp: f64,
    pub sigma_par: f64,
    pub lambda_perp: f64,
    pub lambda_par: f64,
    pub c_v: f64,
    pub stack_axis: StackAxis,
}

impl HomogenizedTensors {
    /// Reluctivities acting on (B_ρ, B_z).
    pub fn nu_rho_z(&self) -> (f64, f64) {
        match self.stack_axis {
            StackAxis::Radial => (self.nu_perp, self.nu_par),
            StackAxis::Axial => (self.nu_par, self.nu_perp),
        }
    }

    /// Thermal conductivities acting on (∂_ρ T, ∂_z T).
    pub fn lambda_rho_z(&self) -> (f64, f64) {
        match self.stack_axis {
            StackAxis::Radial => (self.lambda_perp, self.lambda_par),
            StackAxis::Axial => (self.lambda_par, self.lambda_perp),
        }
    }

    /// Azimuthal conductivity; e_β is parallel to the layers for both stackings.
    pub fn sigma_phi(&self) -> f64 {
        self.sigma_par
    }
}

fn arithmetic(ff: f64, c: f64, i: f64) -> f64 {
    if c == i {
        return c;
    }
    ff * c + (1.0 - ff) * i
}

fn harmonic(ff: f64, c: f64, i: f64) -> f64 {
    if ff == 1.0 || c == i {
        return c;
    }
    if c == 0.0 || i == 0.0 {
        return 0.0;
    }
    1.0 / (ff / c + (1.0 - ff) / i)
}

/// Mixing rules for a layered conductor/insulator stack.
pub fn homogenize(conductor: &MaterialSpec, insulator: &MaterialSpec, fill_factor: f64) -> Result<HomogenizedTensors> {
    if !(fill_factor > 0.0 && fill_factor <= 1.0) {
        return Err(Error::validation("fill_factor", format!("{fill_factor} is outside (0, 1]")));
    }
    conductor.validate("conductor")?;
    insulator.validate("insulator")?;
    let ff = fill_factor;
    Ok(HomogenizedTensors {
        nu_perp: arithmetic(ff, conductor.nu, insulator.nu),
        nu_par: harmonic(ff, conductor.nu, insulator.nu),
        sigma_perp: harmonic(ff, conductor.sigma, insulator.sigma),
        sigma_par: arithmetic(ff, conductor.sigma, insulator.sigma),
        lambda_perp: harmonic(ff, conductor.lambda, insulator.lambda),
        lambda_par: arithmetic(ff, conductor.lambda, insulator.lambda),
        c_v: arithmetic(ff, conductor.c_v, insulator.c_v),
        stack_axis: StackAxis::Radial,
    })
}

/// Azimuthal conductivity as an affine function of a constituent temperature
/// law: `σ(T) = weight · law(T) + offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AzimuthalConductivity {
    pub weight: f64,
    pub law: Option<TemperatureModel>,
    pub offset: f64,
}

impl AzimuthalConductivity {
    pub fn constant(sigma: f64) -> Self {
        AzimuthalConductivity {
            weight: 0.0,
            law: None,
            offset: sigma,
        }
    }

    /// Plain material, temperature dependent if it has a coefficient.
    pub fn of(material: &MaterialSpec, t_ref: f64) -> Self {
        match material.temperature_model(t_ref) {
            Some(law) => AzimuthalConductivity {
                weight: 1.0,
                law: Some(law),
                offset: 0.0,
            },
            None => Self::constant(material.sigma),
        }
    }

    /// Parallel mixture `ff σ_c(T) + (1 - ff) σ_i` of a foil stack.
    pub fn mixed(conductor: &MaterialSpec, insulator: &MaterialSpec, fill_factor: f64, t_ref: f64) -> Self {
        match conductor.temperature_model(t_ref) {
            Some(law) => AzimuthalConductivity {
                weight: fill_factor,
                law: Some(law),
                offset: (1.0 - fill_factor) * insulator.sigma,
            },
            None => Self::constant(arithmetic(fill_factor, conductor.sigma, insulator.sigma)),
        }
    }

    pub fn at(&self, t: f64) -> Result<f64> {
        match &self.law {
            Some(law) => Ok(self.weight * law.conductivity_at(t)? + self.offset),
            None => Ok(self.offset),
        }
    }

    pub fn is_temperature_dependent(&self) -> bool {
        self.law.is_some() && self.weight != 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn copper() -> MaterialSpec {
        MaterialSpec::new(60e6, 1.0, 385.0, 3.45e6)
    }

    fn insulator() -> MaterialSpec {
        MaterialSpec::new(0.0, 1.0, 0.09, 1.03e6)
    }

    #[test]
    fn foil_stack_at_eighty_percent() {
        let t = homogenize(&copper(), &insulator(), 0.8).unwrap();
        assert_eq!(t.sigma_par, 48e6);
        assert_eq!(t.sigma_perp, 0.0);
        assert!((t.lambda_par - 308.018).abs() < 1e-9);
        let expected = 1.0 / (0.8 / 385.0 + 0.2 / 0.09);
        assert!((t.lambda_perp - expected).abs() < 1e-15);
        assert!((t.lambda_perp - 0.4496).abs() < 1e-4);
        assert!((t.c_v - 2.966e6).abs() < 1e-6);
        assert_eq!(t.nu_rho_z(), (1.0 / MU0, 1.0 / MU0));
    }

    #[test]
    fn full_fill_gives_conductor() {
        let t = homogenize(&copper(), &insulator(), 1.0).unwrap();
        let c = copper();
        assert_eq!(t.sigma_par, c.sigma);
        assert_eq!(t.sigma_perp, c.sigma);
        assert_eq!(t.lambda_par, c.lambda);
        assert_eq!(t.lambda_perp, c.lambda);
        assert_eq!(t.nu_par, c.nu);
        assert_eq!(t.nu_perp, c.nu);
        assert_eq!(t.c_v, c.c_v);
    }

    #[test]
    fn fill_factor_out_of_range() {
        assert!(homogenize(&copper(), &insulator(), 0.0).is_err());
        assert!(homogenize(&copper(), &insulator(), 1.2).is_err());
    }

    #[test]
    fn conductivity_law() {
        let law = TemperatureModel {
            sigma_ref: 60e6,
            alpha_ref: 3.93e-3,
            t_ref: 293.15,
        };
        assert_eq!(conductivity_at(293.15, &law).unwrap(), 60e6);
        let hot = conductivity_at(393.15, &law).unwrap();
        assert!((hot - 60e6 / 1.393).abs() < 1e-6);
        assert!((hot / 1e6 - 43.07).abs() < 0.01);
        let flat = TemperatureModel { alpha_ref: 0.0, ..law };
        assert_eq!(conductivity_at(1000.0, &flat).unwrap(), 60e6);
        // 1 + α (T - T_ref) <= 0
        assert!(conductivity_at(293.15 - 300.0, &law).is_err());
    }

    #[test]
    fn skin_depths() {
        let d50 = skin_depth(50.0, MU0, 60e6);
        assert!((d50 - 9.19e-3).abs() < 0.01e-3);
        let d5k = skin_depth(5e3, MU0, 60e6);
        assert!((d5k - 0.919e-3).abs() < 0.001e-3);
        assert!((skin_depth(50.0, MU0, 240e6) - 0.5 * d50).abs() < 1e-15);
    }

    #[test]
    fn mixed_conductivity_tracks_temperature() {
        let c = copper().with_alpha(3.93e-3);
        let s = AzimuthalConductivity::mixed(&c, &insulator(), 0.8, 293.15);
        assert_eq!(s.at(293.15).unwrap(), 48e6);
        assert!(s.at(393.15).unwrap() < 48e6);
        let fixed = AzimuthalConductivity::mixed(&copper(), &insulator(), 0.8, 293.15);
        assert!(!fixed.is_temperature_dependent());
        assert_eq!(fixed.at(500.0).unwrap(), 48e6);
    }

    proptest! {
        #[test]
        fn harmonic_below_arithmetic(ff in 0.01f64..0.99, a in 0.01f64..1e3, b in 0.01f64..1e3) {
            prop_assume!((a - b).abs() > 1e-6 * (a + b));
            let c = MaterialSpec::new(a, 1.0 + a, a, 1.0 + a);
            let i = MaterialSpec::new(b, 1.0 + b, b, 1.0 + b);
            let t = homogenize(&c, &i, ff).unwrap();
            prop_assert!(t.lambda_perp < t.lambda_par);
            prop_assert!(t.sigma_perp < t.sigma_par);
            prop_assert!(t.nu_par < t.nu_perp);
        }

        #[test]
        fn mixing_symmetric_under_swap(ff in 0.01f64..0.99, a in 0.01f64..1e3, b in 0.01f64..1e3) {
            let c = MaterialSpec::new(1.0, 1.0 + a, a, 1.0);
            let i = MaterialSpec::new(1.0, 1.0 + b, b, 1.0);
            let t = homogenize(&c, &i, ff).unwrap();
            let s = homogenize(&i, &c, 1.0 - ff).unwrap();
            prop_assert!(((t.lambda_perp - s.lambda_perp) / t.lambda_perp).abs() < 1e-12);
            prop_assert!(((t.lambda_par - s.lambda_par) / t.lambda_par).abs() < 1e-12);
            prop_assert!(((t.nu_perp - s.nu_perp) / t.nu_perp).abs() < 1e-12);
            prop_assert!(((t.nu_par - s.nu_par) / t.nu_par).abs() < 1e-12);
        }

        #[test]
        fn conductivity_decreases_with_temperature(t0 in 250.0f64..500.0, dt in 0.1f64..200.0) {
            let law = TemperatureModel { sigma_ref: 60e6, alpha_ref: 3.93e-3, t_ref: 293.15 };
            prop_assert!(conductivity_at(t0 + dt, &law).unwrap() < conductivity_at(t0, &law).unwrap());
        }
    }
}
