//! Single-simulation driver.

use crate::assembly::{assemble_with_plan, AssembledOperators, QuadraturePlan};
use crate::diagnostics::{alpha_report_of_state, energy, DegeneracyReport, EnergySample};
use crate::error::Result;
use crate::models::{derive_coefficients, EffectiveCoefficients, ForcingSpec, InitialData};
use crate::newmark::{
    initialize_state, march, NewmarkParams, SemidiscreteSystem, TimeGrid, Trajectory,
};
use crate::spline::{build_basis, QuadratureRule, SplineBasis};

use super::config::{InitialPreset, SimConfig};

/// Everything a finished simulation exposes for post-processing.
#[derive(Debug)]
pub struct RunOutput {
    pub basis: SplineBasis,
    pub plan: QuadraturePlan,
    pub ops: AssembledOperators,
    pub coeffs: EffectiveCoefficients,
    pub rho0: f64,
    pub trajectory: Trajectory,
    /// One energy sample per time step, including t = 0.
    pub energy: Vec<EnergySample>,
    pub degeneracy: DegeneracyReport,
}

/// Interpolates `f` at the Greville abscissae, zeroes the boundary DOFs and
/// restricts to the free set.
pub fn project_initial(
    basis: &SplineBasis,
    ops: &AssembledOperators,
    f: impl Fn(f64) -> f64,
) -> Result<Vec<f64>> {
    let mut full = basis.interpolate(f)?;
    full[0] = 0.0;
    let n = full.len();
    full[n - 1] = 0.0;
    Ok(ops.map.restrict_vec(&full))
}

/// Runs one deterministic simulation from a validated config.
pub fn run_simulation(config: &SimConfig) -> Result<RunOutput> {
    config.validate()?;
    let coeffs = derive_coefficients(&config.medium, config.model, config.tau)?;
    let basis = build_basis(
        config.mesh.degree,
        config.mesh.n_elements,
        (0.0, config.mesh.length),
    )?;
    let rule = QuadratureRule::gauss_legendre(config.mesh.degree + 1);
    let plan = QuadraturePlan::new(&basis, &rule)?;
    let ops = assemble_with_plan(&plan);
    let grid = TimeGrid::from_final_time(config.time.final_time, config.time.n_steps)?;

    let data = match config.initial.preset {
        InitialPreset::Gaussian => InitialData::gaussian(
            config.initial.amplitude,
            config.initial.center,
            config.initial.width,
        ),
        InitialPreset::Zero => InitialData::zero(),
    };
    let psi0 = project_initial(&basis, &ops, |x| (data.psi0)(x))?;
    let psi1 = project_initial(&basis, &ops, |x| (data.psi1)(x))?;
    let psi2 = if config.model.is_third_order() {
        Some(project_initial(&basis, &ops, |x| (data.psi2)(x))?)
    } else {
        None
    };

    let forcing = ForcingSpec::Zero;
    let sys = SemidiscreteSystem {
        kind: config.model,
        coeffs: &coeffs,
        plan: &plan,
        ops: &ops,
        forcing: &forcing,
    };
    let params = if config.model.is_third_order() {
        NewmarkParams::average_acceleration_third_order()
    } else {
        NewmarkParams::average_acceleration()
    };

    let state0 = initialize_state(&sys, psi0, psi1, psi2)?;

    let mut degeneracy = DegeneracyReport::new();
    let (a0, g0) = alpha_report_of_state(&state0, &coeffs, &plan, &ops);
    degeneracy.record(a0, g0);

    let mut energy_samples = Vec::with_capacity(grid.n_steps + 1);
    energy_samples.push(energy(&state0, &ops));

    let trajectory = march(
        &sys,
        state0,
        &grid,
        &params,
        &config.fixed_point,
        config.output.snapshot_stride,
        |_, state, diag| {
            energy_samples.push(energy(state, &ops));
            degeneracy.record(diag.min_alpha, diag.min_gamma);
        },
    )?;

    Ok(RunOutput {
        basis,
        plan,
        ops,
        coeffs,
        rho0: config.medium.rho0,
        trajectory,
        energy: energy_samples,
        degeneracy,
    })
}

impl RunOutput {
    /// Pressure samples u = ϱ₀ψ_t of the final state on the uniform output
    /// grid (n_dof intervals).
    pub fn final_pressure(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        crate::diagnostics::pressure_samples(
            self.trajectory.last(),
            &self.basis,
            &self.ops,
            self.rho0,
        )
    }

    /// Index of the stored snapshot closest to time `t`.
    pub fn snapshot_index_near(&self, t: f64) -> usize {
        let dt = self.trajectory.snapshot_dt();
        let i = (t / dt).round();
        (i.max(0.0) as usize).min(self.trajectory.states.len() - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ModelKind;

    #[test]
    fn zero_initial_data_gives_zero_trajectory_and_energy() {
        let mut cfg = SimConfig::paper_preset(ModelKind::Westervelt, 0.0);
        cfg.initial.preset = InitialPreset::Zero;
        cfg.mesh.n_elements = 16;
        cfg.time.n_steps = 10;
        let out = run_simulation(&cfg).unwrap();
        assert!(out
            .trajectory
            .states
            .iter()
            .all(|s| s.psi.iter().all(|&v| v == 0.0)));
        assert!(out.energy.iter().all(|e| e.total == 0.0));
    }

    #[test]
    fn snapshot_count_matches_stride() {
        let mut cfg = SimConfig::paper_preset(ModelKind::Westervelt, 0.0);
        cfg.mesh.n_elements = 24;
        cfg.time.n_steps = 40;
        cfg.output.snapshot_stride = 4;
        let out = run_simulation(&cfg).unwrap();
        assert_eq!(out.trajectory.states.len(), 40 / 4 + 1);
        assert_eq!(out.energy.len(), 41);
        assert_eq!(out.trajectory.fp_iterations.len(), 40);
    }

    #[test]
    fn paper_amplitude_reports_min_alpha_near_three_quarters() {
        let mut cfg = SimConfig::paper_preset(ModelKind::Westervelt, 0.0);
        cfg.time.n_steps = 5;
        let out = run_simulation(&cfg).unwrap();
        approx::assert_relative_eq!(out.degeneracy.min_alpha, 0.7511, max_relative = 1e-3);
    }
}
