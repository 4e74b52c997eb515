//! Newmark time stepping for the semidiscrete second- and third-order models.
//!
//! Second-order models use the standard Newmark relations
//!
//!   ψⁿ⁺¹  = ψⁿ + Δt ψ̇ⁿ + Δt²/2 [(1-2β) ψ̈ⁿ + 2β ψ̈ⁿ⁺¹],
//!   ψ̇ⁿ⁺¹ = ψ̇ⁿ + Δt [(1-γ) ψ̈ⁿ + γ ψ̈ⁿ⁺¹],
//!
//! third-order models their extension with the jerk as the implicit unknown:
//!
//!   ψⁿ⁺¹  = ψⁿ + Δt ψ̇ⁿ + Δt²/2 ψ̈ⁿ + Δt³/6 [(1-6β) ψ⃛ⁿ + 6β ψ⃛ⁿ⁺¹],
//!   ψ̇ⁿ⁺¹ = ψ̇ⁿ + Δt ψ̈ⁿ + Δt²/2 [(1-2γ) ψ⃛ⁿ + 2γ ψ⃛ⁿ⁺¹],
//!   ψ̈ⁿ⁺¹ = ψ̈ⁿ + Δt [(1-η) ψ⃛ⁿ + η ψ⃛ⁿ⁺¹].
//!
//! The quasilinear coefficient α = 1 - k ψ_t and the gradient nonlinearity
//! are resolved by a fixed-point iteration on the highest time derivative:
//! predict with the step-n values frozen, then repeatedly assemble the
//! weighted mass matrix and loads at the current candidate and solve the
//! effective banded system until the relative l² increment drops below the
//! tolerance.

use crate::assembly::{AssembledOperators, QuadraturePlan};
use crate::banded::BandedMatrix;
use crate::error::{Error, Result};
use crate::models::{
    alpha_field, forcing_load, nonlinear_rhs, EffectiveCoefficients, ForcingSpec, ModelKind,
};
use serde::{Deserialize, Serialize};

/// Newmark parameters; `eta` is only used by the third-order scheme.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NewmarkParams {
    pub beta: f64,
    pub gamma: f64,
    pub eta: f64,
}

impl NewmarkParams {
    /// Average acceleration for second-order models: (β, γ) = (1/4, 1/2).
    pub fn average_acceleration() -> Self {
        NewmarkParams {
            beta: 0.25,
            gamma: 0.5,
            eta: 0.0,
        }
    }

    /// Average acceleration for third-order models:
    /// (β, γ, η) = (1/12, 1/4, 1/2).
    pub fn average_acceleration_third_order() -> Self {
        NewmarkParams {
            beta: 1.0 / 12.0,
            gamma: 0.25,
            eta: 0.5,
        }
    }
}

/// Uniform time grid.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TimeGrid {
    pub dt: f64,
    pub n_steps: usize,
}

impl TimeGrid {
    pub fn from_final_time(final_time: f64, n_steps: usize) -> Result<Self> {
        if !(final_time > 0.0) || n_steps == 0 {
            return Err(Error::InvalidArgument(format!(
                "time grid needs final_time > 0 and n_steps >= 1 (got {final_time}, {n_steps})"
            )));
        }
        Ok(TimeGrid {
            dt: final_time / n_steps as f64,
            n_steps,
        })
    }

    pub fn final_time(&self) -> f64 {
        self.dt * self.n_steps as f64
    }
}

/// Stopping rule of the fixed-point corrector.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FixedPointSettings {
    /// Relative l² increment tolerance on the highest time derivative.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for FixedPointSettings {
    fn default() -> Self {
        FixedPointSettings {
            tol: 1e-8,
            max_iter: 50,
        }
    }
}

/// Absolute increment floor guarding the relative test for zero states.
const INCREMENT_FLOOR: f64 = 1e-14;

/// Galerkin coefficient vectors (free DOFs) at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub psi: Vec<f64>,
    pub psi_t: Vec<f64>,
    pub psi_tt: Vec<f64>,
    /// Present iff the model is third order in time.
    pub psi_ttt: Option<Vec<f64>>,
}

/// Per-step solver diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct StepDiagnostics {
    pub iterations: usize,
    pub min_alpha: f64,
    pub min_gamma: f64,
}

/// Stored time history of a march.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub dt: f64,
    /// Steps between stored snapshots.
    pub stride: usize,
    pub states: Vec<State>,
    /// Fixed-point iterations of every step (not just stored ones).
    pub fp_iterations: Vec<usize>,
}

impl Trajectory {
    /// Time spacing of stored snapshots.
    pub fn snapshot_dt(&self) -> f64 {
        self.dt * self.stride as f64
    }

    pub fn last(&self) -> &State {
        self.states.last().expect("trajectory never empty")
    }
}

/// Everything the steppers need about the semidiscrete system.
pub struct SemidiscreteSystem<'a> {
    pub kind: ModelKind,
    pub coeffs: &'a EffectiveCoefficients,
    pub plan: &'a QuadraturePlan,
    pub ops: &'a AssembledOperators,
    pub forcing: &'a ForcingSpec,
}

impl<'a> SemidiscreteSystem<'a> {
    fn n_free(&self) -> usize {
        self.ops.map.n_free()
    }

    /// Weighted mass M(α) on the free DOFs for the candidate ψ_t, plus the
    /// α/γ extrema. Fails when α loses positivity anywhere.
    fn alpha_mass(
        &self,
        psi_t_free: &[f64],
        t: f64,
        scratch: &mut Scratch,
    ) -> Result<(BandedMatrix, f64, f64)> {
        let full = self.ops.map.extend_vec(psi_t_free);
        self.plan.sample_field(&full, 0, &mut scratch.qp_field);
        let field = alpha_field(self.coeffs, &scratch.qp_field);
        if field.min_alpha <= 0.0 {
            return Err(Error::Degeneracy {
                t,
                min_alpha: field.min_alpha,
            });
        }
        self.plan
            .weighted_gram_into(&mut scratch.weighted_full, 0, Some(&field.alpha))?;
        Ok((
            self.ops.map.restrict_matrix(&scratch.weighted_full),
            field.min_alpha,
            field.min_gamma,
        ))
    }

    /// Forcing plus gradient-nonlinearity load at time `t` for the candidate
    /// state, restricted to the free DOFs.
    fn load(&self, psi_free: &[f64], psi_t_free: &[f64], t: f64) -> Result<Vec<f64>> {
        let mut load = forcing_load(self.forcing, t, self.plan)?;
        if self.coeffs.sigma != 0.0 {
            let psi_full = self.ops.map.extend_vec(psi_free);
            let psit_full = self.ops.map.extend_vec(psi_t_free);
            let mut psi_x = Vec::new();
            let mut psi_tx = Vec::new();
            self.plan.sample_field(&psi_full, 1, &mut psi_x);
            self.plan.sample_field(&psit_full, 1, &mut psi_tx);
            let nl = nonlinear_rhs(self.coeffs, &psi_x, &psi_tx, self.plan)?;
            for (l, n) in load.iter_mut().zip(&nl) {
                *l += n;
            }
        }
        Ok(self.ops.map.restrict_vec(&load))
    }
}

struct Scratch {
    qp_field: Vec<f64>,
    weighted_full: BandedMatrix,
}

impl Scratch {
    fn new(plan: &QuadraturePlan) -> Self {
        Scratch {
            qp_field: Vec::with_capacity(plan.n_points()),
            weighted_full: BandedMatrix::zeros(plan.n_dof, plan.degree),
        }
    }
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

fn combined(base: &[f64], a: f64, x: &[f64]) -> Vec<f64> {
    let mut out = base.to_vec();
    axpy(&mut out, a, x);
    out
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn l2_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Builds the state at t = 0 from initial coefficient vectors.
///
/// For second-order models ψ̈(0) solves the semidiscrete equation at t = 0,
/// M(α₀) ψ̈ = F + N - c²Kψ₀ - bKψ₁. For third-order models ψ̈(0) = ψ₂ is
/// data and the jerk solves τM ψ⃛ = F + N - M(α₀)ψ₂ - c²Kψ₀ - bKψ₁.
pub fn initialize_state(
    sys: &SemidiscreteSystem,
    psi0: Vec<f64>,
    psi1: Vec<f64>,
    psi2: Option<Vec<f64>>,
) -> Result<State> {
    let mut scratch = Scratch::new(sys.plan);
    let k = &sys.ops.stiffness;
    let c2 = sys.coeffs.c2;
    let b = sys.coeffs.b;
    let (m_alpha, _, _) = sys.alpha_mass(&psi1, 0.0, &mut scratch)?;
    let mut rhs = sys.load(&psi0, &psi1, 0.0)?;
    axpy(&mut rhs, -c2, &k.mat_vec(&psi0));
    axpy(&mut rhs, -b, &k.mat_vec(&psi1));
    if sys.kind.is_third_order() {
        let psi2 = psi2.ok_or_else(|| {
            Error::InvalidArgument("third-order model needs psi2 initial data".into())
        })?;
        axpy(&mut rhs, -1.0, &m_alpha.mat_vec(&psi2));
        let mut tau_m = sys.ops.mass.clone();
        tau_m.scale(sys.coeffs.tau);
        let jerk = tau_m.factor()?.solve(&rhs);
        Ok(State {
            t: 0.0,
            psi: psi0,
            psi_t: psi1,
            psi_tt: psi2,
            psi_ttt: Some(jerk),
        })
    } else {
        let acc = m_alpha.factor()?.solve(&rhs);
        Ok(State {
            t: 0.0,
            psi: psi0,
            psi_t: psi1,
            psi_tt: acc,
            psi_ttt: None,
        })
    }
}

/// One Newmark step of a second-order model.
pub fn newmark2_step(
    sys: &SemidiscreteSystem,
    state: &State,
    dt: f64,
    params: &NewmarkParams,
    fp: &FixedPointSettings,
) -> Result<(State, StepDiagnostics)> {
    debug_assert!(!sys.kind.is_third_order());
    let mut scratch = Scratch::new(sys.plan);
    let t_next = state.t + dt;
    let c2 = sys.coeffs.c2;
    let b = sys.coeffs.b;
    let k = &sys.ops.stiffness;
    let beta = params.beta;
    let gamma = params.gamma;

    // predictors with the acceleration frozen at step n
    let mut psi_pred = state.psi.clone();
    axpy(&mut psi_pred, dt, &state.psi_t);
    axpy(
        &mut psi_pred,
        0.5 * dt * dt * (1.0 - 2.0 * beta),
        &state.psi_tt,
    );
    let mut psit_pred = state.psi_t.clone();
    axpy(&mut psit_pred, dt * (1.0 - gamma), &state.psi_tt);

    let mut fixed_rhs = vec![0.0; sys.n_free()];
    axpy(&mut fixed_rhs, -c2, &k.mat_vec(&psi_pred));
    axpy(&mut fixed_rhs, -b, &k.mat_vec(&psit_pred));

    let solve_once = |acc: &[f64], scratch: &mut Scratch| -> Result<(Vec<f64>, f64, f64)> {
        let psi_c = combined(&psi_pred, beta * dt * dt, acc);
        let psit_c = combined(&psit_pred, gamma * dt, acc);
        let (m_alpha, min_a, min_g) = sys.alpha_mass(&psit_c, t_next, scratch)?;
        let mut eff = m_alpha;
        eff.add_scaled(k, c2 * beta * dt * dt + b * gamma * dt);
        let mut rhs = sys.load(&psi_c, &psit_c, t_next)?;
        axpy(&mut rhs, 1.0, &fixed_rhs);
        Ok((eff.factor()?.solve(&rhs), min_a, min_g))
    };

    let (acc, diag) = fixed_point(sys, fp, &state.psi_tt, solve_once, &mut scratch)?;
    let psi = combined(&psi_pred, beta * dt * dt, &acc);
    let psi_t = combined(&psit_pred, gamma * dt, &acc);
    Ok((
        State {
            t: t_next,
            psi,
            psi_t,
            psi_tt: acc,
            psi_ttt: None,
        },
        diag,
    ))
}

/// One extended-Newmark step of a third-order model.
///
/// The effective matrix of each corrector solve is
/// τM + Δt·η·M(α) + γ·Δt²·b·K + β·Δt³·c²·K.
pub fn newmark3_step(
    sys: &SemidiscreteSystem,
    state: &State,
    dt: f64,
    params: &NewmarkParams,
    fp: &FixedPointSettings,
) -> Result<(State, StepDiagnostics)> {
    debug_assert!(sys.kind.is_third_order());
    if !(sys.coeffs.tau > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "third-order step needs tau > 0, got {}",
            sys.coeffs.tau
        )));
    }
    let jerk0 = state
        .psi_ttt
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("third-order state lacks psi_ttt".into()))?;
    let mut scratch = Scratch::new(sys.plan);
    let t_next = state.t + dt;
    let tau = sys.coeffs.tau;
    let c2 = sys.coeffs.c2;
    let b = sys.coeffs.b;
    let k = &sys.ops.stiffness;
    let m = &sys.ops.mass;
    let beta = params.beta;
    let gamma = params.gamma;
    let eta = params.eta;

    let mut psi_pred = state.psi.clone();
    axpy(&mut psi_pred, dt, &state.psi_t);
    axpy(&mut psi_pred, 0.5 * dt * dt, &state.psi_tt);
    axpy(&mut psi_pred, dt.powi(3) / 6.0 * (1.0 - 6.0 * beta), jerk0);
    let mut psit_pred = state.psi_t.clone();
    axpy(&mut psit_pred, dt, &state.psi_tt);
    axpy(&mut psit_pred, 0.5 * dt * dt * (1.0 - 2.0 * gamma), jerk0);
    let mut psitt_pred = state.psi_tt.clone();
    axpy(&mut psitt_pred, dt * (1.0 - eta), jerk0);

    let mut fixed_rhs = vec![0.0; sys.n_free()];
    axpy(&mut fixed_rhs, -c2, &k.mat_vec(&psi_pred));
    axpy(&mut fixed_rhs, -b, &k.mat_vec(&psit_pred));

    let mut tau_m = m.clone();
    tau_m.scale(tau);

    let solve_once = |jerk: &[f64], scratch: &mut Scratch| -> Result<(Vec<f64>, f64, f64)> {
        let psi_c = combined(&psi_pred, beta * dt.powi(3), jerk);
        let psit_c = combined(&psit_pred, gamma * dt * dt, jerk);
        let (m_alpha, min_a, min_g) = sys.alpha_mass(&psit_c, t_next, scratch)?;
        let mut eff = tau_m.clone();
        eff.add_scaled(&m_alpha, eta * dt);
        eff.add_scaled(k, gamma * dt * dt * b + beta * dt.powi(3) * c2);
        let mut rhs = sys.load(&psi_c, &psit_c, t_next)?;
        axpy(&mut rhs, 1.0, &fixed_rhs);
        axpy(&mut rhs, -1.0, &m_alpha.mat_vec(&psitt_pred));
        Ok((eff.factor()?.solve(&rhs), min_a, min_g))
    };

    let (jerk, diag) = fixed_point(sys, fp, jerk0, solve_once, &mut scratch)?;
    let psi = combined(&psi_pred, beta * dt.powi(3), &jerk);
    let psi_t = combined(&psit_pred, gamma * dt * dt, &jerk);
    let psi_tt = combined(&psitt_pred, eta * dt, &jerk);
    Ok((
        State {
            t: t_next,
            psi,
            psi_t,
            psi_tt,
            psi_ttt: Some(jerk),
        },
        diag,
    ))
}

/// Fixed-point loop on the highest time derivative.
///
/// `solve` maps a candidate unknown to the next iterate (one corrector
/// solve). Linear systems converge in the first solve by construction, so a
/// single iteration is performed; otherwise iterate until the relative l²
/// increment is below tol (with an absolute floor for zero states).
fn fixed_point(
    sys: &SemidiscreteSystem,
    fp: &FixedPointSettings,
    frozen: &[f64],
    mut solve: impl FnMut(&[f64], &mut Scratch) -> Result<(Vec<f64>, f64, f64)>,
    scratch: &mut Scratch,
) -> Result<(Vec<f64>, StepDiagnostics)> {
    if fp.max_iter == 0 {
        return Err(Error::NonConvergence {
            iterations: 0,
            last_increment: f64::INFINITY,
        });
    }
    // With k = 0 and sigma = 0 neither the matrix nor the loads depend on
    // the iterate; the first solve already is the fixed point.
    let affine = sys.coeffs.k == 0.0 && sys.coeffs.sigma == 0.0;
    let mut current = frozen.to_vec();
    let mut last_increment = f64::INFINITY;
    for iteration in 1..=fp.max_iter {
        let (next, min_a, min_g) = solve(&current, scratch)?;
        let inc = l2_diff(&next, &current);
        current = next;
        if affine || inc <= fp.tol * l2(&current) || inc <= INCREMENT_FLOOR {
            return Ok((
                current,
                StepDiagnostics {
                    iterations: iteration,
                    min_alpha: min_a,
                    min_gamma: min_g,
                },
            ));
        }
        last_increment = inc / l2(&current).max(INCREMENT_FLOOR);
    }
    Err(Error::NonConvergence {
        iterations: fp.max_iter,
        last_increment,
    })
}

/// Marches `n_steps` Newmark steps, storing every `stride`-th state (plus the
/// initial one) and per-step diagnostics.
pub fn march(
    sys: &SemidiscreteSystem,
    initial: State,
    grid: &TimeGrid,
    params: &NewmarkParams,
    fp: &FixedPointSettings,
    stride: usize,
    mut on_step: impl FnMut(usize, &State, &StepDiagnostics),
) -> Result<Trajectory> {
    let stride = stride.max(1);
    let mut states = Vec::with_capacity(grid.n_steps / stride + 2);
    let mut fp_iterations = Vec::with_capacity(grid.n_steps);
    let mut state = initial;
    states.push(state.clone());
    for step in 1..=grid.n_steps {
        let (next, diag) = if sys.kind.is_third_order() {
            newmark3_step(sys, &state, grid.dt, params, fp)?
        } else {
            newmark2_step(sys, &state, grid.dt, params, fp)?
        };
        state = next;
        fp_iterations.push(diag.iterations);
        on_step(step, &state, &diag);
        if step % stride == 0 {
            states.push(state.clone());
        }
    }
    Ok(Trajectory {
        dt: grid.dt,
        stride,
        states,
        fp_iterations,
    })
}

/// Largest relative residual of the Newmark relations between two
/// consecutive states; the relations are enforced identities, so this should
/// sit at round-off after every accepted step.
pub fn kinematic_residual(prev: &State, next: &State, dt: f64, params: &NewmarkParams) -> f64 {
    let rel = |lhs: &[f64], rhs: &[f64]| -> f64 {
        let scale = l2(lhs).max(l2(rhs)).max(1e-300);
        l2_diff(lhs, rhs) / scale
    };
    match (&prev.psi_ttt, &next.psi_ttt) {
        (Some(j0), Some(j1)) => {
            let mut psi = prev.psi.clone();
            axpy(&mut psi, dt, &prev.psi_t);
            axpy(&mut psi, 0.5 * dt * dt, &prev.psi_tt);
            axpy(&mut psi, dt.powi(3) / 6.0 * (1.0 - 6.0 * params.beta), j0);
            axpy(&mut psi, dt.powi(3) / 6.0 * 6.0 * params.beta, j1);
            let mut psi_t = prev.psi_t.clone();
            axpy(&mut psi_t, dt, &prev.psi_tt);
            axpy(&mut psi_t, 0.5 * dt * dt * (1.0 - 2.0 * params.gamma), j0);
            axpy(&mut psi_t, 0.5 * dt * dt * 2.0 * params.gamma, j1);
            let mut psi_tt = prev.psi_tt.clone();
            axpy(&mut psi_tt, dt * (1.0 - params.eta), j0);
            axpy(&mut psi_tt, dt * params.eta, j1);
            rel(&psi, &next.psi)
                .max(rel(&psi_t, &next.psi_t))
                .max(rel(&psi_tt, &next.psi_tt))
        }
        _ => {
            let mut psi = prev.psi.clone();
            axpy(&mut psi, dt, &prev.psi_t);
            axpy(
                &mut psi,
                0.5 * dt * dt * (1.0 - 2.0 * params.beta),
                &prev.psi_tt,
            );
            axpy(&mut psi, 0.5 * dt * dt * 2.0 * params.beta, &next.psi_tt);
            let mut psi_t = prev.psi_t.clone();
            axpy(&mut psi_t, dt * (1.0 - params.gamma), &prev.psi_tt);
            axpy(&mut psi_t, dt * params.gamma, &next.psi_tt);
            rel(&psi, &next.psi).max(rel(&psi_t, &next.psi_t))
        }
    }
}
