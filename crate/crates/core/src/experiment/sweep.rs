//! τ-sweep driver: one baseline solve of the limit equation, one JMGT solve
//! per relaxation time, and the relative limit errors of each pair.

use crate::diagnostics::limit_errors;
use crate::error::{Error, Result};
use crate::models::ModelKind;

use super::config::SimConfig;
use super::run::{run_simulation, RunOutput};

/// Sweep specification: a third-order base config and a positive τ list.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub base: SimConfig,
    pub taus: Vec<f64>,
}

impl SweepConfig {
    /// Builds from a config whose `sweep_taus` list is present.
    pub fn from_sim_config(base: SimConfig) -> Result<Self> {
        let taus = base
            .sweep_taus
            .clone()
            .ok_or_else(|| Error::Config("sweep requires a sweep_taus list".into()))?;
        let cfg = SweepConfig { base, taus };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.base.model.is_third_order() {
            return Err(Error::Config(format!(
                "sweep base model must be third order, got {:?}",
                self.base.model
            )));
        }
        if self.taus.is_empty() {
            return Err(Error::Config("nothing to sweep: empty tau list".into()));
        }
        if let Some(&bad) = self.taus.iter().find(|&&t| !(t > 0.0)) {
            return Err(Error::Config(format!(
                "sweep tau values must be positive, got {bad}"
            )));
        }
        Ok(())
    }

    fn member_config(&self, tau: f64) -> SimConfig {
        SimConfig {
            tau,
            sweep_taus: None,
            ..self.base.clone()
        }
    }

    fn baseline_config(&self) -> SimConfig {
        SimConfig {
            model: self.base.model.limit_kind(),
            tau: 0.0,
            sweep_taus: None,
            ..self.base.clone()
        }
    }
}

/// One emitted sweep row.
#[derive(Debug, Clone, Copy)]
pub struct SweepRow {
    pub tau: f64,
    pub error_ch1: f64,
    pub error_xbar_w: f64,
    /// Present for Kuznetsov-type sweeps.
    pub error_xbar_k: Option<f64>,
}

/// Full sweep result; rows are ordered by descending τ.
#[derive(Debug)]
pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
    pub baseline: RunOutput,
    pub baseline_model: ModelKind,
}

/// Runs the sweep. `jobs > 1` executes members concurrently; results are
/// collected in the τ order regardless, so the output is order-deterministic.
pub fn sweep_tau(config: &SweepConfig, jobs: usize) -> Result<SweepOutput> {
    config.validate()?;
    let mut taus = config.taus.clone();
    taus.sort_by(|a, b| b.partial_cmp(a).expect("finite taus"));

    let baseline = run_simulation(&config.baseline_config())?;

    let run_member = |&tau: &f64| -> Result<SweepRow> {
        let member =
            run_simulation(&config.member_config(tau)).map_err(|e| Error::SweepMember {
                tau,
                source: Box::new(e),
            })?;
        let errors = limit_errors(
            &member.trajectory,
            &baseline.trajectory,
            &baseline.ops,
            &member.coeffs,
        )
        .map_err(|e| Error::SweepMember {
            tau,
            source: Box::new(e),
        })?;
        Ok(SweepRow {
            tau,
            error_ch1: errors.error_ch1,
            error_xbar_w: errors.error_xbar_w,
            error_xbar_k: errors.error_xbar_k,
        })
    };

    let rows: Vec<SweepRow> = if jobs > 1 {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
        pool.install(|| taus.par_iter().map(run_member).collect::<Result<Vec<_>>>())?
    } else {
        taus.iter().map(run_member).collect::<Result<Vec<_>>>()?
    };

    Ok(SweepOutput {
        rows,
        baseline_model: config.base.model.limit_kind(),
        baseline,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_base() -> SimConfig {
        let mut cfg = SimConfig::paper_preset(ModelKind::JmgtWestervelt, 1e-7);
        cfg.mesh.n_elements = 32;
        cfg.time.n_steps = 60;
        cfg
    }

    #[test]
    fn empty_tau_list_is_rejected() {
        let mut base = small_base();
        base.sweep_taus = Some(vec![]);
        assert!(matches!(
            SweepConfig::from_sim_config(base),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn nonpositive_tau_is_rejected() {
        let cfg = SweepConfig {
            base: small_base(),
            taus: vec![1e-7, 0.0],
        };
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn failing_member_reports_its_tau() {
        // a vanishingly small positive tau blows up the member's initial
        // jerk solve (psi_ttt(0) ~ b/tau) while the tau = 0 baseline is
        // unaffected; the abort must carry the offending member tau.
        let tau = 1e-250;
        let cfg = SweepConfig {
            base: small_base(),
            taus: vec![tau],
        };
        match sweep_tau(&cfg, 1) {
            Err(Error::SweepMember { tau: t, source }) => {
                assert_eq!(t, tau);
                assert_eq!(source.exit_code(), 3, "numerical failure: {source}");
            }
            other => panic!("expected sweep-member failure, got {other:?}"),
        }
    }

    #[test]
    fn second_order_base_is_rejected() {
        let cfg = SweepConfig {
            base: SimConfig::paper_preset(ModelKind::Westervelt, 0.0),
            taus: vec![1e-7],
        };
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn rows_come_out_in_descending_tau_order() {
        let cfg = SweepConfig {
            base: small_base(),
            taus: vec![1e-8, 1e-7, 5e-8],
        };
        let out = sweep_tau(&cfg, 1).unwrap();
        let taus: Vec<f64> = out.rows.iter().map(|r| r.tau).collect();
        assert_eq!(taus, vec![1e-7, 5e-8, 1e-8]);
        assert!(out.rows.iter().all(|r| r.error_ch1.is_finite()));
        assert!(out
            .rows
            .windows(2)
            .all(|w| w[0].error_ch1 >= w[1].error_ch1));
    }

    #[test]
    fn parallel_and_serial_sweeps_agree_bitwise() {
        let cfg = SweepConfig {
            base: small_base(),
            taus: vec![2e-7, 1e-7, 5e-8],
        };
        let serial = sweep_tau(&cfg, 1).unwrap();
        let parallel = sweep_tau(&cfg, 3).unwrap();
        for (a, b) in serial.rows.iter().zip(&parallel.rows) {
            assert_eq!(a.tau, b.tau);
            assert_eq!(a.error_ch1, b.error_ch1);
            assert_eq!(a.error_xbar_w, b.error_xbar_w);
        }
    }
}
