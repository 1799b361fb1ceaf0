//! Frequency-domain and backward-Euler solves of the coupled field-circuit
//! system, plus the quantities derived from a solution.
//!
//! With `D` standing for `jω` (phasors) or `1/Δt` (backward Euler) the rows are
//!
//! ```text
//! a:  (K + D M) a - Σ X u - Σ s i      = q + D M a_old
//! u:  -D Xᵀ a + G u - c i              = -D Xᵀ a_old
//! i:  cᵀ u + R i                       = V          (foil winding in a circuit)
//! i:  D sᵀ a + (R_dc + R) i            = V + D sᵀ a_old   (stranded winding)
//! ```
//!
//! Current-driven windings have no `i` unknown; their current enters the right
//! hand side instead. Time waveforms are `x(t) = Im{X e^{jωt}}`, so a drive of
//! amplitude `X` is `X sin(ωt)` in the time domain.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{MagneticState, MagneticSystem, RegionRole, WindingBasis, WindingDrive, WindingState};
use crate::error::{Error, Result};
use crate::fem::RULE_7;
use crate::foil_winding;
use crate::sparse::{CsrMatrix, ReducedSolver, Scalar, TripletMatrix};

/// Drive current or source voltage at the current instant (`scale` turns an
/// amplitude into a phasor or an instantaneous value).
fn drive_value<T: Scalar>(drive: WindingDrive, scale: T) -> (Option<T>, T) {
    match drive.effective() {
        WindingDrive::Current { amplitude } => (Some(scale * T::from_real(amplitude)), T::zero()),
        WindingDrive::Source { amplitude, .. } => (None, scale * T::from_real(amplitude)),
        WindingDrive::Load { .. } => (None, T::zero()),
    }
}

impl MagneticSystem<'_> {
    /// Full system matrix for the operator `D` (`jω` or `1/Δt`).
    pub(crate) fn system_matrix<T: Scalar>(&self, d: T) -> CsrMatrix<T> {
        let lay = &self.layout;
        let n = lay.n_total;
        let mut trip = TripletMatrix::with_capacity(n, n, self.stiffness.nnz() + self.mass.nnz());
        trip.extend_from_csr(&self.stiffness.map(T::from_real), 0, 0, T::one());
        trip.extend_from_csr(&self.mass.map(T::from_real), 0, 0, d);

        for (w, f) in self.problem.foils.iter().enumerate() {
            let off = lay.foil_u[w];
            for (i, j, v) in self.foils[w].x.iter() {
                trip.push(i, off + j, -T::from_real(v));
                trip.push(off + j, i, -d * T::from_real(v));
            }
            for (j, row) in self.foils[w].g.iter().enumerate() {
                for (k, &v) in row.iter().enumerate() {
                    if v != 0.0 {
                        trip.push(off + j, off + k, T::from_real(v));
                    }
                }
            }
            if let Some(ic) = lay.foil_i[w] {
                let (_, r) = f.drive.loop_terms();
                for (j, &c) in f.coupling.iter().enumerate() {
                    trip.push(off + j, ic, -T::from_real(c));
                    trip.push(ic, off + j, T::from_real(c));
                }
                trip.push(ic, ic, T::from_real(r));
            }
        }

        for (k, s) in self.problem.stranded.iter().enumerate() {
            if let Some(ic) = lay.stranded_i[k] {
                let (_, r) = s.drive.loop_terms();
                for (i, &v) in self.stranded[k].s.iter().enumerate() {
                    if v != 0.0 {
                        trip.push(i, ic, -T::from_real(v));
                        trip.push(ic, i, d * T::from_real(v));
                    }
                }
                trip.push(ic, ic, T::from_real(self.stranded[k].resistance + r));
            }
        }
        trip.to_csr()
    }

    /// Right-hand side; `scale` is the drive waveform factor and `a_old` the
    /// previous nodal vector for time stepping.
    pub(crate) fn system_rhs<T: Scalar>(&self, d: T, scale: T, a_old: Option<&[T]>) -> Vec<T> {
        let lay = &self.layout;
        let mut rhs = vec![T::zero(); lay.n_total];
        for (i, &q) in self.source.iter().enumerate() {
            rhs[i] = scale * T::from_real(q);
        }
        if let Some(old) = a_old {
            let m: Vec<T> = self.mass.map(T::from_real).mul_vec(old);
            for i in 0..lay.n_nodes {
                rhs[i] += d * m[i];
            }
        }
        for (w, f) in self.problem.foils.iter().enumerate() {
            let off = lay.foil_u[w];
            let (current, voltage) = drive_value(f.drive, scale);
            if let Some(i) = current {
                for (j, &c) in f.coupling.iter().enumerate() {
                    rhs[off + j] += T::from_real(c) * i;
                }
            }
            if let Some(old) = a_old {
                for (i, j, v) in self.foils[w].x.iter() {
                    rhs[off + j] -= d * T::from_real(v) * old[i];
                }
            }
            if let Some(ic) = lay.foil_i[w] {
                rhs[ic] = voltage;
            }
        }
        for (k, s) in self.problem.stranded.iter().enumerate() {
            let (current, voltage) = drive_value(s.drive, scale);
            let sv = &self.stranded[k].s;
            if let Some(i) = current {
                for (node, &v) in sv.iter().enumerate() {
                    rhs[node] += T::from_real(v) * i;
                }
            }
            if let Some(ic) = lay.stranded_i[k] {
                rhs[ic] = voltage;
                if let Some(old) = a_old {
                    rhs[ic] += d * dot(sv, old);
                }
            }
        }
        rhs
    }

    fn prescribed(&self) -> &[bool] {
        &self.dirichlet
    }

    /// Unpacks a solution vector into nodal values and terminal quantities.
    fn unpack<T: Scalar>(&self, x: &[T], d: T, scale: T, a_old: Option<&[T]>, time: f64, omega: f64) -> MagneticState<T> {
        let lay = &self.layout;
        let a = x[..lay.n_nodes].to_vec();
        let da: Vec<T> = match a_old {
            Some(old) => a.iter().zip(old).map(|(&n, &o)| n - o).collect(),
            None => a.clone(),
        };
        let mut foils = Vec::with_capacity(self.problem.foils.len());
        for (w, f) in self.problem.foils.iter().enumerate() {
            let off = lay.foil_u[w];
            let u = x[off..off + f.basis.len()].to_vec();
            let xt = self.foils[w].x.map(T::from_real).tr_mul_vec(&da);
            let cut: Vec<T> = (0..u.len())
                .map(|j| {
                    let mut r = -d * xt[j];
                    for (k, &g) in self.foils[w].g[j].iter().enumerate() {
                        r += T::from_real(g) * u[k];
                    }
                    r
                })
                .collect();
            let current = match lay.foil_i[w] {
                Some(ic) => x[ic],
                None => drive_value(f.drive, scale).0.unwrap_or(T::zero()),
            };
            let voltage = f.coupling.iter().zip(&u).fold(T::zero(), |acc, (&c, &v)| acc + T::from_real(c) * v);
            foils.push(WindingState {
                u,
                cut_integrals: cut,
                current,
                voltage,
            });
        }
        let mut stranded = Vec::with_capacity(self.problem.stranded.len());
        for (k, s) in self.problem.stranded.iter().enumerate() {
            let current = match lay.stranded_i[k] {
                Some(ic) => x[ic],
                None => drive_value(s.drive, scale).0.unwrap_or(T::zero()),
            };
            let voltage = T::from_real(self.stranded[k].resistance) * current + d * dot(&self.stranded[k].s, &da);
            stranded.push(WindingState {
                u: Vec::new(),
                cut_integrals: Vec::new(),
                current,
                voltage,
            });
        }
        MagneticState {
            a,
            foils,
            stranded,
            time,
            omega,
        }
    }

    fn pack<T: Scalar>(&self, state: &MagneticState<T>) -> Vec<T> {
        let lay = &self.layout;
        let mut x = vec![T::zero(); lay.n_total];
        x[..lay.n_nodes].copy_from_slice(&state.a);
        for (w, f) in state.foils.iter().enumerate() {
            let off = lay.foil_u[w];
            x[off..off + f.u.len()].copy_from_slice(&f.u);
            if let Some(ic) = lay.foil_i[w] {
                x[ic] = f.current;
            }
        }
        for (k, s) in state.stranded.iter().enumerate() {
            if let Some(ic) = lay.stranded_i[k] {
                x[ic] = s.current;
            }
        }
        x
    }

    /// Time-harmonic solve at angular frequency `omega`; drive amplitudes are
    /// real phasors (sine reference).
    pub fn solve_frequency(&self, omega: f64) -> Result<MagneticState<Complex64>> {
        let d = Complex64::new(0.0, omega);
        let one = Complex64::new(1.0, 0.0);
        let matrix = self.system_matrix(d);
        let solver = ReducedSolver::new(&matrix, self.prescribed(), self.layout.n_nodes)?;
        let rhs = self.system_rhs(d, one, None);
        let x = solver.solve(&rhs, &vec![Complex64::new(0.0, 0.0); self.layout.n_total]);
        Ok(self.unpack(&x, d, one, None, 0.0, omega))
    }

    /// Largest relative residual over the a, u and circuit row blocks of a
    /// frequency-domain solution (Dirichlet rows excluded).
    pub fn frequency_residual(&self, state: &MagneticState<Complex64>) -> f64 {
        let d = Complex64::new(0.0, state.omega);
        let matrix = self.system_matrix(d);
        let rhs = self.system_rhs(d, Complex64::new(1.0, 0.0), None);
        let x = self.pack(state);
        let ax = matrix.mul_vec(&x);
        let lay = &self.layout;
        let mut blocks: Vec<Vec<usize>> = vec![(0..lay.n_nodes).filter(|&i| !self.dirichlet[i]).collect()];
        for (w, f) in self.problem.foils.iter().enumerate() {
            blocks.push((lay.foil_u[w]..lay.foil_u[w] + f.basis.len()).collect());
        }
        blocks.push(lay.foil_i.iter().chain(&lay.stranded_i).flatten().copied().collect());
        let mut worst: f64 = 0.0;
        for rows in blocks {
            if rows.is_empty() {
                continue;
            }
            // scale by the size of the terms entering each row
            let mut res = 0.0;
            let mut scale = 0.0;
            for &i in &rows {
                res += (ax[i] - rhs[i]).norm_sqr();
                let mut row_scale = rhs[i].norm();
                for (j, v) in matrix.row(i) {
                    row_scale = row_scale.max((v * x[j]).norm());
                }
                scale += row_scale * row_scale;
            }
            if scale > 0.0 {
                worst = worst.max((res / scale).sqrt());
            }
        }
        worst
    }

    /// Zero field with the drive evaluated at `time`.
    pub fn initial_state(&self, omega: f64, time: f64) -> MagneticState<f64> {
        let x = vec![0.0; self.layout.n_total];
        let mut s = self.unpack(&x, 0.0, (omega * time).sin(), Some(&vec![0.0; self.layout.n_nodes]), time, omega);
        for f in &mut s.foils {
            f.cut_integrals.iter_mut().for_each(|v| *v = 0.0);
        }
        s
    }

    /// Time-averaged loss density per element for a phasor solution, W/m³.
    pub fn element_losses_harmonic(&self, state: &MagneticState<Complex64>) -> Vec<f64> {
        let d = Complex64::new(0.0, state.omega);
        self.element_power(&state.a, None, d, state, 0.5)
    }

    /// Instantaneous loss density per element at the end of a time step.
    pub fn element_losses_instant(&self, state: &MagneticState<f64>, previous: &MagneticState<f64>, dt: f64) -> Vec<f64> {
        self.element_power(&state.a, Some(&previous.a), 1.0 / dt, state, 1.0)
    }

    fn element_power<T: Scalar>(&self, a: &[T], a_old: Option<&[T]>, d: T, state: &MagneticState<T>, factor: f64) -> Vec<f64> {
        let mesh = self.mesh;
        let mut out = vec![0.0; mesh.n_triangles()];
        for e in 0..mesh.n_triangles() {
            let region = mesh.region_of(e);
            match self.role(region) {
                RegionRole::Stranded(k) => {
                    let s = &self.problem.stranded[k];
                    let i = state.stranded[k].current.modulus();
                    let area = self.stranded[k].area;
                    out[e] = factor * s.turns * s.turns * i * i / (s.fill_factor * self.element_wire_sigma[e] * area * area);
                }
                role => {
                    let sigma = self.element_sigma[e];
                    if sigma == 0.0 {
                        continue;
                    }
                    let tri = mesh.element(e);
                    let nodes = mesh.triangle(e);
                    let mut p = 0.0;
                    for (pt, n_val, w) in tri.quadrature(&RULE_7) {
                        let rho = pt[0];
                        let mut da = T::zero();
                        for k in 0..3 {
                            let old = a_old.map_or(T::zero(), |o| o[nodes[k]]);
                            da += (a[nodes[k]] - old) * T::from_real(n_val[k]);
                        }
                        let mut field = -d * da;
                        if let RegionRole::Foil(fw) = role {
                            for (j, xi) in self.problem.foils[fw].basis.eval(rho, region) {
                                if xi != 0.0 {
                                    field += state.foils[fw].u[j] * T::from_real(xi / (2.0 * PI * rho));
                                }
                            }
                        }
                        p += sigma * field.modulus().powi(2) * 2.0 * PI * rho * w;
                    }
                    out[e] = factor * p / self.element_volume[e];
                }
            }
        }
        out
    }

    /// Total loss in W from per-element densities.
    pub fn total_loss(&self, density: &[f64]) -> f64 {
        density.iter().zip(&self.element_volume).map(|(p, v)| p * v).sum()
    }

    /// Loss per mesh region in W.
    pub fn region_losses(&self, density: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.mesh.region_names().len()];
        for (e, (p, v)) in density.iter().zip(&self.element_volume).enumerate() {
            out[self.mesh.region_of(e)] += p * v;
        }
        out
    }

    /// Current crossing a cut of foil winding `w` at build coordinate `alpha`.
    ///
    /// For the homogenized winding this is `b` times the projected cut
    /// profile; for solid turns it is the current of the turn at `alpha`.
    pub fn foil_cut_current<T: Scalar>(&self, state: &MagneticState<T>, w: usize, alpha: f64) -> Result<T> {
        let f = &self.problem.foils[w];
        let r = &state.foils[w].cut_integrals;
        match &f.basis {
            WindingBasis::Hat(basis) => {
                let spec = f
                    .spec
                    .as_ref()
                    .ok_or_else(|| Error::Domain(format!("winding `{}` has no geometry", f.name)))?;
                foil_winding::foil_cut_current(basis, spec, r, alpha)
            }
            WindingBasis::SolidTurns(regions) => {
                let mut best = (f64::INFINITY, 0);
                for (k, &reg) in regions.iter().enumerate() {
                    let (lo, hi) = self.region_rho_extent(reg);
                    let dist = if alpha < lo {
                        lo - alpha
                    } else if alpha > hi {
                        alpha - hi
                    } else {
                        0.0
                    };
                    if dist < best.0 {
                        best = (dist, k);
                    }
                }
                Ok(r[best.1])
            }
        }
    }

    /// Pointwise cut current `b ∫ J_φ(alpha, z) dz` of a phasor solution,
    /// sampled with `n_z` midpoint intervals.
    pub fn foil_cut_current_pointwise(&self, state: &MagneticState<Complex64>, w: usize, alpha: f64, n_z: usize) -> Result<Complex64> {
        let f = &self.problem.foils[w];
        let spec = f
            .spec
            .as_ref()
            .ok_or_else(|| Error::Domain(format!("winding `{}` has no geometry", f.name)))?;
        let d = Complex64::new(0.0, state.omega);
        let dz = spec.height() / n_z as f64;
        let mut total = Complex64::new(0.0, 0.0);
        for k in 0..n_z {
            let p = [alpha, spec.z[0] + (k as f64 + 0.5) * dz];
            let (e, bary) = self
                .mesh
                .locate(p)
                .ok_or_else(|| Error::Domain(format!("cut point {p:?} is outside the mesh")))?;
            let nodes = self.mesh.triangle(e);
            let region = self.mesh.region_of(e);
            let mut field = Complex64::new(0.0, 0.0);
            for i in 0..3 {
                field -= d * state.a[nodes[i]] * bary[i];
            }
            if self.problem.foils[w].regions.contains(&region) {
                for (j, xi) in f.basis.eval(alpha, region) {
                    field += state.foils[w].u[j] * (xi / (2.0 * PI * alpha));
                }
            }
            total += field * self.element_sigma[e] * dz;
        }
        Ok(total * spec.turn_width())
    }

    fn region_rho_extent(&self, region: usize) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for e in self.mesh.elements_in(&[region]) {
            for p in self.mesh.element(e).vertices {
                lo = lo.min(p[0]);
                hi = hi.max(p[0]);
            }
        }
        (lo, hi)
    }
}

fn dot<T: Scalar>(s: &[f64], a: &[T]) -> T {
    s.iter().zip(a).fold(T::zero(), |acc, (&v, &x)| acc + T::from_real(v) * x)
}

/// Backward-Euler stepper with a factorization reused for every step.
pub struct TimeStepper<'s, 'm> {
    system: &'s MagneticSystem<'m>,
    omega: f64,
    dt: f64,
    solver: ReducedSolver<f64>,
}

impl<'s, 'm> TimeStepper<'s, 'm> {
    pub fn new(system: &'s MagneticSystem<'m>, omega: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::validation("dt_mag", "must be positive"));
        }
        let matrix = system.system_matrix(1.0 / dt);
        let solver = ReducedSolver::new(&matrix, system.prescribed(), system.layout.n_nodes)?;
        Ok(TimeStepper { system, omega, dt, solver })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advances one step from `previous`.
    pub fn step(&self, previous: &MagneticState<f64>) -> MagneticState<f64> {
        let t = previous.time + self.dt;
        let d = 1.0 / self.dt;
        let scale = (self.omega * t).sin();
        let rhs = self.system.system_rhs(d, scale, Some(&previous.a));
        let x = self.solver.solve(&rhs, &vec![0.0; self.system.layout.n_total]);
        self.system.unpack(&x, d, scale, Some(&previous.a), t, self.omega)
    }
}

/// Phasor `(2/T) ∫ x(t) j e^{-jωt} dt` of uniformly spaced samples covering
/// whole periods (trapezoidal rule; first and last sample one period apart).
pub fn extract_phasor(times: &[f64], values: &[f64], omega: f64) -> Complex64 {
    assert_eq!(times.len(), values.len());
    assert!(times.len() >= 2);
    let span = times[times.len() - 1] - times[0];
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..times.len() - 1 {
        let dt = times[k + 1] - times[k];
        let f = |i: usize| values[i] * Complex64::new(0.0, 1.0) * Complex64::from_polar(1.0, -omega * times[i]);
        acc += 0.5 * dt * (f(k) + f(k + 1));
    }
    acc * (2.0 / span)
}
