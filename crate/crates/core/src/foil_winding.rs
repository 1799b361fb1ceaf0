//! Foil-winding geometry, distribution function and the voltage-function basis.
//!
//! The winding occupies a rectangle `[ρ0, ρ1] × [z0, z1]` of the meridian
//! plane with turns stacked radially: the local build coordinate α is ρ, the
//! winding direction β is azimuthal and c is z.

use std::f64::consts::PI;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::materials::{skin_depth, MaterialSpec};
use crate::sparse::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoilWindingSpec {
    pub region: String,
    /// Radial extent [ρ0, ρ1] in m.
    pub rho: [f64; 2],
    /// Axial extent [z0, z1] in m.
    pub z: [f64; 2],
    pub turns: u32,
    pub fill_factor: f64,
    pub conductor: MaterialSpec,
    pub insulator: MaterialSpec,
}

impl FoilWindingSpec {
    /// Build width w_fw.
    pub fn width(&self) -> f64 {
        self.rho[1] - self.rho[0]
    }

    /// Height h_fw.
    pub fn height(&self) -> f64 {
        self.z[1] - self.z[0]
    }

    /// Turn width b = w_fw / N.
    pub fn turn_width(&self) -> f64 {
        self.width() / self.turns as f64
    }

    /// Conductor layer thickness b_c = ff · b.
    pub fn conductor_width(&self) -> f64 {
        self.fill_factor * self.turn_width()
    }

    /// Centre radius of turn `n` (0-based).
    pub fn turn_center(&self, n: u32) -> f64 {
        self.rho[0] + (n as f64 + 0.5) * self.turn_width()
    }

    pub fn validate(&self) -> Result<()> {
        let field = |f: &str| format!("windings.{}.{f}", self.region);
        if !(self.rho[0] >= 0.0 && self.rho[1] > self.rho[0]) {
            return Err(Error::validation(field("rho"), "need 0 <= rho0 < rho1"));
        }
        if !(self.z[1] > self.z[0]) {
            return Err(Error::validation(field("z"), "need z0 < z1"));
        }
        if self.turns == 0 {
            return Err(Error::validation(field("turns"), "must be at least 1"));
        }
        if !(self.fill_factor > 0.0 && self.fill_factor <= 1.0) {
            return Err(Error::validation(field("fill_factor"), "must lie in (0, 1]"));
        }
        if !(self.conductor.sigma > 0.0) {
            return Err(Error::validation(field("conductor.sigma"), "must be > 0"));
        }
        self.conductor.validate("conductor")?;
        self.insulator.validate("insulator")?;
        if self.height() < 10.0 * self.turn_width() {
            warn!(
                "foil winding `{}`: height {:e} m is not much larger than the turn width {:e} m",
                self.region,
                self.height(),
                self.turn_width()
            );
        }
        Ok(())
    }

    /// Warns when the conductor layer is thicker than the skin depth at `f`.
    pub fn check_skin_depth(&self, f: f64) -> bool {
        if f <= 0.0 {
            return true;
        }
        let delta = skin_depth(f, self.conductor.mu(), self.conductor.sigma);
        let ok = self.conductor_width() <= delta;
        if !ok {
            warn!(
                "foil winding `{}`: conductor layer {:e} m exceeds the skin depth {:e} m at {f} Hz",
                self.region,
                self.conductor_width(),
                delta
            );
        }
        ok
    }

    fn contains(&self, p: [f64; 2]) -> bool {
        const TOL: f64 = 1e-12;
        p[0] >= self.rho[0] - TOL && p[0] <= self.rho[1] + TOL && p[1] >= self.z[0] - TOL && p[1] <= self.z[1] + TOL
    }
}

/// Azimuthal component of the distribution function χ = e_φ / (2πρ), in 1/m.
pub fn winding_function_at(point: [f64; 2], spec: &FoilWindingSpec) -> Result<f64> {
    if !spec.contains(point) {
        return Err(Error::Domain(format!(
            "point {point:?} lies outside foil winding `{}`",
            spec.region
        )));
    }
    if !(point[0] > 0.0) {
        return Err(Error::Domain("distribution function is singular on the axis".into()));
    }
    Ok(1.0 / (2.0 * PI * point[0]))
}

/// Piecewise-linear hat functions in ρ on uniformly spaced nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct VoltageBasis {
    nodes: Vec<f64>,
}

impl VoltageBasis {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn spacing(&self) -> f64 {
        self.nodes[1] - self.nodes[0]
    }

    /// Nonzero basis values at ρ: at most two `(index, value)` pairs. Points
    /// outside the span are clamped to the end nodes.
    pub fn eval(&self, rho: f64) -> [(usize, f64); 2] {
        let n = self.nodes.len();
        let h = self.spacing();
        let s = ((rho - self.nodes[0]) / h).clamp(0.0, (n - 1) as f64);
        let k = (s.floor() as usize).min(n - 2);
        let t = s - k as f64;
        [(k, 1.0 - t), (k + 1, t)]
    }

    pub fn value(&self, j: usize, rho: f64) -> f64 {
        self.eval(rho).iter().filter(|(k, _)| *k == j).map(|(_, v)| *v).sum()
    }

    /// Exact 1D mass matrix ∫ ξ_i ξ_j dρ (tridiagonal, stored dense).
    pub fn mass(&self) -> Vec<Vec<f64>> {
        let n = self.nodes.len();
        let h = self.spacing();
        let mut m = vec![vec![0.0; n]; n];
        for k in 0..n - 1 {
            m[k][k] += h / 3.0;
            m[k + 1][k + 1] += h / 3.0;
            m[k][k + 1] += h / 6.0;
            m[k + 1][k] += h / 6.0;
        }
        m
    }
}

pub fn build_voltage_basis(spec: &FoilWindingSpec, n_u: usize) -> Result<VoltageBasis> {
    if n_u < 2 {
        return Err(Error::validation(
            "n_u",
            format!("{n_u} basis functions requested, need at least 2"),
        ));
    }
    let [r0, r1] = spec.rho;
    let nodes = (0..n_u)
        .map(|k| {
            if k + 1 == n_u {
                r1
            } else {
                r0 + (r1 - r0) * k as f64 / (n_u - 1) as f64
            }
        })
        .collect();
    Ok(VoltageBasis { nodes })
}

/// `c_i = (1/b) ∫ ξ_i dρ`, evaluated exactly for hats.
pub fn coupling_vector(basis: &VoltageBasis, spec: &FoilWindingSpec) -> Vec<f64> {
    let n = basis.len();
    let b = spec.turn_width();
    let h = basis.spacing();
    (0..n).map(|i| if i == 0 || i + 1 == n { 0.5 * h / b } else { h / b }).collect()
}

/// Foil-cut current at the build coordinate `alpha`.
///
/// `weighted` holds the Galerkin cut integrals `r_j = ∫ σ ξ_j χ · E dV` (the
/// rows of the discrete current condition without the `c I` term). The cut
/// profile `g(ρ) = ∫ J_φ dz` is recovered as its L2 projection onto the
/// voltage basis and the turn current is `b · g(alpha)`.
pub fn foil_cut_current<T: Scalar>(basis: &VoltageBasis, spec: &FoilWindingSpec, weighted: &[T], alpha: f64) -> Result<T> {
    if alpha < spec.rho[0] - 1e-12 || alpha > spec.rho[1] + 1e-12 {
        return Err(Error::Domain(format!(
            "cut position {alpha} m lies outside [{}, {}]",
            spec.rho[0], spec.rho[1]
        )));
    }
    let profile = project_tridiagonal(&basis.mass(), weighted);
    let mut g = T::zero();
    for (j, v) in basis.eval(alpha) {
        g += profile[j] * T::from_real(v);
    }
    Ok(g * T::from_real(spec.turn_width()))
}

/// Thomas algorithm for the symmetric tridiagonal hat mass matrix.
fn project_tridiagonal<T: Scalar>(m: &[Vec<f64>], rhs: &[T]) -> Vec<T> {
    let n = rhs.len();
    let mut diag: Vec<f64> = (0..n).map(|i| m[i][i]).collect();
    let mut y: Vec<T> = rhs.to_vec();
    for i in 1..n {
        let w = m[i][i - 1] / diag[i - 1];
        diag[i] -= w * m[i - 1][i];
        let prev = y[i - 1];
        y[i] -= prev * T::from_real(w);
    }
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let mut acc = y[i];
        if i + 1 < n {
            acc -= x[i + 1] * T::from_real(m[i][i + 1]);
        }
        x[i] = acc / T::from_real(diag[i]);
    }
    x
}

/// DC resistance of the series turns, as `(turn sum, continuous integral)`.
pub fn dc_resistance(spec: &FoilWindingSpec) -> (f64, f64) {
    let k = 2.0 * PI / (spec.conductor.sigma * spec.conductor_width() * spec.height());
    let sum: f64 = (0..spec.turns).map(|n| spec.turn_center(n)).sum();
    let integral = 0.5 * (spec.rho[1].powi(2) - spec.rho[0].powi(2)) / spec.turn_width();
    (k * sum, k * integral)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn validation_winding() -> FoilWindingSpec {
        FoilWindingSpec {
            region: "fw".into(),
            rho: [0.010, 0.020],
            z: [-0.010, 0.010],
            turns: 30,
            fill_factor: 0.8,
            conductor: MaterialSpec::new(60e6, 1.0, 385.0, 3.45e6),
            insulator: MaterialSpec::new(0.0, 1.0, 0.09, 1.03e6),
        }
    }

    #[test]
    fn distribution_function_normalization() {
        let mut spec = validation_winding();
        spec.rho = [0.1, 0.4];
        let rho = 1.0 / (2.0 * PI);
        assert!((winding_function_at([rho, 0.0], &spec).unwrap() - 1.0).abs() < 1e-15);
        let half = winding_function_at([2.0 * rho, 0.0], &spec).unwrap();
        assert!((half - 0.5).abs() < 1e-15);
        for r in [0.11, 0.2, 0.35] {
            let chi = winding_function_at([r, 0.0], &spec).unwrap();
            assert!((2.0 * PI * r * chi - 1.0).abs() < 1e-15);
        }
        assert!(winding_function_at([0.05, 0.0], &spec).is_err());
    }

    #[test]
    fn two_hats_are_linear() {
        let spec = validation_winding();
        let basis = build_voltage_basis(&spec, 2).unwrap();
        for r in [0.01, 0.0125, 0.017, 0.02] {
            let s = basis.value(0, r) + basis.value(1, r);
            assert!((s - 1.0).abs() < 1e-15);
            assert!((basis.value(1, r) - (r - 0.01) / 0.01).abs() < 1e-12);
        }
        let c = coupling_vector(&basis, &spec);
        assert_eq!(c, vec![15.0, 15.0]);
    }

    #[test]
    fn seven_hats_on_validation_winding() {
        let spec = validation_winding();
        let basis = build_voltage_basis(&spec, 7).unwrap();
        assert_eq!(basis.len(), 7);
        assert!((basis.spacing() - 0.01 / 6.0).abs() < 1e-15);
        let mid = basis.nodes()[3];
        assert!((basis.value(3, mid) - 1.0).abs() < 1e-12);
        assert!(basis.value(3, basis.nodes()[2]).abs() < 1e-12);
        assert!(basis.value(3, basis.nodes()[4]).abs() < 1e-12);
        assert!(build_voltage_basis(&spec, 1).is_err());
    }

    #[test]
    fn constant_voltage_function_gives_n_times_u() {
        let spec = validation_winding();
        let basis = build_voltage_basis(&spec, 7).unwrap();
        let c = coupling_vector(&basis, &spec);
        let u0 = 0.37;
        let v: f64 = c.iter().map(|ci| ci * u0).sum();
        assert!((v - 30.0 * u0).abs() < 1e-12);
    }

    #[test]
    fn cut_current_of_consistent_profile_is_exact() {
        let spec = validation_winding();
        let basis = build_voltage_basis(&spec, 7).unwrap();
        let current = 2.5;
        // r_j = c_j I is the discrete current condition itself
        let r: Vec<f64> = coupling_vector(&basis, &spec).iter().map(|c| c * current).collect();
        for k in 0..5 {
            let alpha = spec.rho[0] + spec.width() * k as f64 / 4.0;
            let i = foil_cut_current(&basis, &spec, &r, alpha).unwrap();
            assert!(((i - current) / current).abs() < 1e-13);
        }
        let zero = foil_cut_current(&basis, &spec, &[0.0; 7], 0.015).unwrap();
        assert_eq!(zero, 0.0);
        assert!(foil_cut_current(&basis, &spec, &r, 0.03).is_err());
    }

    #[test]
    fn single_turn_resistance() {
        let spec = FoilWindingSpec {
            rho: [0.00995, 0.01005],
            z: [0.0, 0.02],
            turns: 1,
            fill_factor: 1.0,
            ..validation_winding()
        };
        let (r, _) = dc_resistance(&spec);
        let expected = 2.0 * PI * 0.01 / (60e6 * 1e-4 * 0.02);
        assert!(((r - expected) / expected).abs() < 1e-12);
        assert!((expected - 523.6e-6).abs() < 0.05e-6);
        let taller = FoilWindingSpec {
            z: [0.0, 0.04],
            ..spec.clone()
        };
        assert!((dc_resistance(&taller).0 - 0.5 * r).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn coupling_sums_to_turns(n_u in 2usize..40, turns in 1u32..200, r0 in 0.0f64..0.1, w in 1e-3f64..0.1) {
            let spec = FoilWindingSpec { rho: [r0, r0 + w], turns, ..validation_winding() };
            let basis = build_voltage_basis(&spec, n_u).unwrap();
            let sum: f64 = coupling_vector(&basis, &spec).iter().sum();
            prop_assert!(((sum - turns as f64) / turns as f64).abs() < 1e-12);
            // partition of unity anywhere in the span
            let r = r0 + 0.37 * w;
            let pu: f64 = (0..n_u).map(|j| basis.value(j, r)).sum();
            prop_assert!((pu - 1.0).abs() < 1e-12);
        }

        #[test]
        fn turn_sum_matches_integral(turns in 1u32..500, r0 in 0.0f64..0.05) {
            let spec = FoilWindingSpec { rho: [r0, r0 + 0.01], turns, ..validation_winding() };
            let (sum, integral) = dc_resistance(&spec);
            let n = turns as f64;
            prop_assert!(((sum - integral) / integral).abs() <= 1.0 / (2.0 * n * n));
        }
    }
}
