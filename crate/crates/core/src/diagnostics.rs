//! Runtime diagnostics: energy, auxiliary state, trajectory norms and the
//! singular-limit relative errors.
//!
//! All spatial norms are discrete quadratic forms of the assembled operators:
//! |v|² through the mass matrix, |∇v|² through the stiffness matrix, |Δv|²
//! through the broken second-derivative Gram matrix. Time norms over a stored
//! trajectory use the maximum over snapshots for L∞ and the trapezoidal rule
//! for L².

use crate::assembly::AssembledOperators;
use crate::banded::BandedMatrix;
use crate::error::{Error, Result};
use crate::models::EffectiveCoefficients;
use crate::newmark::{State, Trajectory};

/// One energy sample E(t) = ½(|ψ_t|² + |∇ψ|² + |ψ_tt|² + |∇ψ_t|² + |Δψ|²)
/// with every addend reported separately.
#[derive(Debug, Clone, Copy)]
pub struct EnergySample {
    pub t: f64,
    pub total: f64,
    pub psi_t_sq: f64,
    pub grad_psi_sq: f64,
    pub psi_tt_sq: f64,
    pub grad_psi_t_sq: f64,
    pub lap_psi_sq: f64,
}

/// Evaluates the energy functional for one state.
pub fn energy(state: &State, ops: &AssembledOperators) -> EnergySample {
    let psi_t_sq = ops.mass.quadratic_form(&state.psi_t);
    let grad_psi_sq = ops.stiffness.quadratic_form(&state.psi);
    let psi_tt_sq = ops.mass.quadratic_form(&state.psi_tt);
    let grad_psi_t_sq = ops.stiffness.quadratic_form(&state.psi_t);
    let lap_psi_sq = ops.d2.quadratic_form(&state.psi);
    EnergySample {
        t: state.t,
        total: 0.5 * (psi_t_sq + grad_psi_sq + psi_tt_sq + grad_psi_t_sq + lap_psi_sq),
        psi_t_sq,
        grad_psi_sq,
        psi_tt_sq,
        grad_psi_t_sq,
        lap_psi_sq,
    }
}

/// Auxiliary state z = ψ_t + (c²/b) ψ and z_t = ψ_tt + (c²/b) ψ_t.
#[derive(Debug, Clone)]
pub struct AuxiliaryState {
    pub z: Vec<f64>,
    pub z_t: Vec<f64>,
}

pub fn auxiliary(state: &State, coeffs: &EffectiveCoefficients) -> AuxiliaryState {
    let r = coeffs.c2_over_b();
    let z = state
        .psi_t
        .iter()
        .zip(&state.psi)
        .map(|(pt, p)| pt + r * p)
        .collect();
    let z_t = state
        .psi_tt
        .iter()
        .zip(&state.psi_t)
        .map(|(ptt, pt)| ptt + r * pt)
        .collect();
    AuxiliaryState { z, z_t }
}

/// Per-step minima of α and γ over the quadrature points.
#[derive(Debug, Clone, Default)]
pub struct DegeneracyReport {
    pub min_alpha_per_step: Vec<f64>,
    pub min_gamma_per_step: Vec<f64>,
    pub min_alpha: f64,
    pub min_gamma: f64,
}

impl DegeneracyReport {
    pub fn new() -> Self {
        DegeneracyReport {
            min_alpha_per_step: Vec::new(),
            min_gamma_per_step: Vec::new(),
            min_alpha: f64::INFINITY,
            min_gamma: f64::INFINITY,
        }
    }

    pub fn record(&mut self, min_alpha: f64, min_gamma: f64) {
        self.min_alpha_per_step.push(min_alpha);
        self.min_gamma_per_step.push(min_gamma);
        self.min_alpha = self.min_alpha.min(min_alpha);
        self.min_gamma = self.min_gamma.min(min_gamma);
    }
}

/// Discrete trajectory norms.
///
/// `xbar_*` are the τ-independent norms; `xw`/`xk` add the τ-weighted
/// addends. For quadratic splines the H³ seminorm of the X^K norms is not
/// representable (broken third derivatives vanish); the H³ addend then falls
/// back to the H² norm and `h3_degree_limited` is set.
#[derive(Debug, Clone, Copy)]
pub struct NormReport {
    /// max over steps of the H¹ norm of ψ.
    pub ch1: f64,
    pub xbar_w_sq: f64,
    pub xbar_k_sq: f64,
    pub xw_sq: f64,
    pub xk_sq: f64,
    pub h3_degree_limited: bool,
}

struct NormKernels<'a> {
    ops: &'a AssembledOperators,
}

impl<'a> NormKernels<'a> {
    fn h1_sq(&self, v: &[f64]) -> f64 {
        self.ops.mass.quadratic_form(v) + self.ops.stiffness.quadratic_form(v)
    }

    fn h2_sq(&self, v: &[f64]) -> f64 {
        self.h1_sq(v) + self.ops.d2.quadratic_form(v)
    }

    fn h3_sq(&self, v: &[f64]) -> (f64, bool) {
        match &self.ops.d3 {
            Some(d3) => (self.h2_sq(v) + d3.quadratic_form(v), false),
            None => (self.h2_sq(v), true),
        }
    }

    fn l2_sq(&self, v: &[f64]) -> f64 {
        self.ops.mass.quadratic_form(v)
    }
}

/// Trapezoidal rule over snapshot values.
fn trapezoid(dt: f64, samples: &[f64]) -> f64 {
    if samples.len() < 2 {
        return 0.0;
    }
    let interior: f64 = samples[1..samples.len() - 1].iter().sum();
    dt * (0.5 * (samples[0] + samples[samples.len() - 1]) + interior)
}

/// Access to a trajectory's states, either stored directly or as the
/// difference of two trajectories.
enum Series<'a> {
    Single(&'a Trajectory),
    Difference(&'a Trajectory, &'a Trajectory),
}

impl<'a> Series<'a> {
    fn len(&self) -> usize {
        match self {
            Series::Single(t) => t.states.len(),
            Series::Difference(a, _) => a.states.len(),
        }
    }

    fn snapshot_dt(&self) -> f64 {
        match self {
            Series::Single(t) => t.snapshot_dt(),
            Series::Difference(a, _) => a.snapshot_dt(),
        }
    }

    fn state(&self, i: usize) -> State {
        match self {
            Series::Single(t) => t.states[i].clone(),
            Series::Difference(a, b) => {
                let x = &a.states[i];
                let y = &b.states[i];
                let sub =
                    |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(p, q)| p - q).collect::<Vec<_>>();
                State {
                    t: x.t,
                    psi: sub(&x.psi, &y.psi),
                    psi_t: sub(&x.psi_t, &y.psi_t),
                    psi_tt: sub(&x.psi_tt, &y.psi_tt),
                    // psi_ttt only participates in the τ-weighted norms,
                    // which are never evaluated on differences
                    psi_ttt: None,
                }
            }
        }
    }
}

fn norms_of_series(
    series: &Series,
    ops: &AssembledOperators,
    coeffs: &EffectiveCoefficients,
) -> NormReport {
    let kernels = NormKernels { ops };
    let n = series.len();
    let dt = series.snapshot_dt();
    let r = coeffs.c2_over_b();
    let tau = coeffs.tau;

    let mut ch1_sq_max: f64 = 0.0;
    let mut linf_h2_psi: f64 = 0.0;
    let mut linf_h2_psit: f64 = 0.0;
    let mut linf_h1_psitt: f64 = 0.0;
    let mut linf_h2_z: f64 = 0.0;
    let mut linf_h3_psi: f64 = 0.0;
    let mut linf_h1_zt: f64 = 0.0;
    let mut l2h1_psitt = Vec::with_capacity(n);
    let mut l2h1_zt = Vec::with_capacity(n);
    let mut l2l2_psittt = Vec::with_capacity(n);
    let mut degree_limited = false;

    for i in 0..n {
        let s = series.state(i);
        ch1_sq_max = ch1_sq_max.max(kernels.h1_sq(&s.psi));
        linf_h2_psi = linf_h2_psi.max(kernels.h2_sq(&s.psi));
        linf_h2_psit = linf_h2_psit.max(kernels.h2_sq(&s.psi_t));
        linf_h1_psitt = linf_h1_psitt.max(kernels.h1_sq(&s.psi_tt));
        l2h1_psitt.push(kernels.h1_sq(&s.psi_tt));

        let z: Vec<f64> = s.psi_t.iter().zip(&s.psi).map(|(a, b)| a + r * b).collect();
        let z_t: Vec<f64> = s
            .psi_tt
            .iter()
            .zip(&s.psi_t)
            .map(|(a, b)| a + r * b)
            .collect();
        linf_h2_z = linf_h2_z.max(kernels.h2_sq(&z));
        let (h3, limited) = kernels.h3_sq(&s.psi);
        degree_limited |= limited;
        linf_h3_psi = linf_h3_psi.max(h3);
        linf_h1_zt = linf_h1_zt.max(kernels.h1_sq(&z_t));
        l2h1_zt.push(kernels.h1_sq(&z_t));

        l2l2_psittt.push(match &s.psi_ttt {
            Some(j) => kernels.l2_sq(j),
            None => 0.0,
        });
    }

    // W^{1,∞}(0,T; H²) as the sum of squares of the two sup-in-time norms
    let w1inf_h2 = linf_h2_psi + linf_h2_psit;
    let l2h1_psitt_val = trapezoid(dt, &l2h1_psitt);
    let l2h1_zt_val = trapezoid(dt, &l2h1_zt);
    let l2l2_psittt_val = trapezoid(dt, &l2l2_psittt);

    let xbar_w_sq = w1inf_h2 + l2h1_psitt_val;
    let xbar_k_sq = l2h1_zt_val + linf_h2_z + linf_h3_psi;
    NormReport {
        ch1: ch1_sq_max.sqrt(),
        xbar_w_sq,
        xbar_k_sq,
        xw_sq: xbar_w_sq + tau * linf_h1_psitt + tau * tau * l2l2_psittt_val,
        xk_sq: xbar_k_sq + tau * linf_h1_zt,
        h3_degree_limited: degree_limited,
    }
}

/// Norms of a stored trajectory.
pub fn trajectory_norms(
    traj: &Trajectory,
    ops: &AssembledOperators,
    coeffs: &EffectiveCoefficients,
) -> Result<NormReport> {
    if traj.states.len() < 2 {
        return Err(Error::GridMismatch(
            "trajectory needs at least two snapshots for time norms".into(),
        ));
    }
    Ok(norms_of_series(&Series::Single(traj), ops, coeffs))
}

/// Relative singular-limit errors of a τ-run against the τ = 0 baseline.
#[derive(Debug, Clone, Copy)]
pub struct ErrorPair {
    /// ‖ψ^τ - ψ̄‖_{C([0,T];H¹)} / ‖ψ̄‖_{C([0,T];H¹)}.
    pub error_ch1: f64,
    /// ‖ψ^τ - ψ̄‖_{X̄W} / ‖ψ̄‖_{X̄W}.
    pub error_xbar_w: f64,
    /// The X̄K analogue; only meaningful for Kuznetsov-type pairs.
    pub error_xbar_k: Option<f64>,
}

/// Computes the limit errors; both trajectories must share mesh and grid.
pub fn limit_errors(
    traj_tau: &Trajectory,
    traj_baseline: &Trajectory,
    ops: &AssembledOperators,
    coeffs: &EffectiveCoefficients,
) -> Result<ErrorPair> {
    if traj_tau.states.len() != traj_baseline.states.len() {
        return Err(Error::GridMismatch(format!(
            "snapshot counts differ: {} vs {}",
            traj_tau.states.len(),
            traj_baseline.states.len()
        )));
    }
    if traj_tau.states.len() < 2 {
        return Err(Error::GridMismatch("need at least two snapshots".into()));
    }
    let dt_a = traj_tau.snapshot_dt();
    let dt_b = traj_baseline.snapshot_dt();
    if (dt_a - dt_b).abs() > 1e-12 * dt_a.abs().max(dt_b.abs()) {
        return Err(Error::GridMismatch(format!(
            "snapshot spacings differ: {dt_a} vs {dt_b}"
        )));
    }
    let n_a = traj_tau.states[0].psi.len();
    let n_b = traj_baseline.states[0].psi.len();
    if n_a != n_b {
        return Err(Error::GridMismatch(format!(
            "DOF counts differ: {n_a} vs {n_b}"
        )));
    }
    let diff = norms_of_series(&Series::Difference(traj_tau, traj_baseline), ops, coeffs);
    let base = norms_of_series(&Series::Single(traj_baseline), ops, coeffs);
    Ok(ErrorPair {
        error_ch1: diff.ch1 / base.ch1,
        error_xbar_w: (diff.xbar_w_sq / base.xbar_w_sq).sqrt(),
        error_xbar_k: if coeffs.sigma != 0.0 {
            Some((diff.xbar_k_sq / base.xbar_k_sq).sqrt())
        } else {
            None
        },
    })
}

/// Samples the pressure field u = ϱ₀ ψ_t of a state on a uniform grid with
/// `n_dof` intervals over the domain (the grid the experiment snapshots use).
pub fn pressure_samples(
    state: &State,
    basis: &crate::spline::SplineBasis,
    ops: &AssembledOperators,
    rho0: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let (a, b) = basis.domain();
    let n = basis.n_dof();
    let full = ops.map.extend_vec(&state.psi_t);
    let mut xs = Vec::with_capacity(n + 1);
    let mut ps = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let x = a + (b - a) * j as f64 / n as f64;
        let v = basis.eval_spline(&full, x, 0)?[0];
        xs.push(x);
        ps.push(rho0 * v);
    }
    Ok((xs, ps))
}

/// Quadratic-form helper shared by tests.
pub fn m_norm(m: &BandedMatrix, v: &[f64]) -> f64 {
    m.quadratic_form(v).sqrt()
}

/// Minima of α and γ over the quadrature points for a state's ψ_t field.
pub fn alpha_report_of_state(
    state: &State,
    coeffs: &EffectiveCoefficients,
    plan: &crate::assembly::QuadraturePlan,
    ops: &AssembledOperators,
) -> (f64, f64) {
    let full = ops.map.extend_vec(&state.psi_t);
    let mut vals = Vec::new();
    plan.sample_field(&full, 0, &mut vals);
    let f = crate::models::alpha_field(coeffs, &vals);
    (f.min_alpha, f.min_gamma)
}
