//! The four acoustic model equations and their effective coefficients.
//!
//! All models act on the acoustic velocity potential ψ (v = -∇ψ, p = ϱ₀ψ_t)
//! and are advanced in the reformulated quasilinear form
//!
//!   τ ψ_ttt + (1 - k ψ_t) ψ_tt - c² Δψ - b Δψ_t = σ · 2 ∇ψ·∇ψ_t + f,
//!
//! with b = δ + τ c². The second-order limit models have τ = 0 (so b = δ);
//! the Westervelt-type models have σ = 0 and k = 2β_a/c² with
//! β_a = 1 + B/(2A), the Kuznetsov-type ones σ = 1 and k = (2/c²)·B/(2A).

use crate::assembly::QuadraturePlan;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Physical constants of the propagation medium.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumParams {
    /// Speed of sound (m/s).
    pub c: f64,
    /// Sound diffusivity (m²/s).
    pub delta: f64,
    /// Mass density (kg/m³).
    pub rho0: f64,
    /// Nonlinearity parameter B/A (dimensionless).
    pub b_over_a: f64,
}

impl MediumParams {
    /// Water at the values used throughout the experiments.
    pub fn water() -> Self {
        MediumParams {
            c: 1500.0,
            delta: 6e-9,
            rho0: 1000.0,
            b_over_a: 5.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.delta > 0.0 && self.rho0 > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "medium parameters must be strictly positive (c = {}, delta = {}, rho0 = {})",
                self.c, self.delta, self.rho0
            )));
        }
        Ok(())
    }
}

/// Which wave equation is being solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// Second order in time, Westervelt nonlinearity (τ = 0).
    Westervelt,
    /// Second order in time with the quadratic gradient term (τ = 0).
    Kuznetsov,
    /// Third order in time, Westervelt-type (τ > 0).
    JmgtWestervelt,
    /// Third order in time, Kuznetsov-type (τ > 0).
    JmgtKuznetsov,
}

impl ModelKind {
    pub fn is_third_order(self) -> bool {
        matches!(self, ModelKind::JmgtWestervelt | ModelKind::JmgtKuznetsov)
    }

    pub fn has_gradient_nonlinearity(self) -> bool {
        matches!(self, ModelKind::Kuznetsov | ModelKind::JmgtKuznetsov)
    }

    /// The τ = 0 equation this model relaxes to.
    pub fn limit_kind(self) -> ModelKind {
        match self {
            ModelKind::JmgtWestervelt => ModelKind::Westervelt,
            ModelKind::JmgtKuznetsov => ModelKind::Kuznetsov,
            other => other,
        }
    }
}

/// Derived coefficients of the reformulated equation.
#[derive(Debug, Clone, Copy)]
pub struct EffectiveCoefficients {
    /// Relaxation time (s); zero for the limit models.
    pub tau: f64,
    /// Effective diffusivity b = δ + τ c² (m²/s).
    pub b: f64,
    /// Coefficient of the quadratic ψ_t term (s²/m²).
    pub k: f64,
    /// β_a = 1 + B/(2A).
    pub beta_a: f64,
    /// Gradient-nonlinearity selector: 0 Westervelt-type, 1 Kuznetsov-type.
    pub sigma: f64,
    /// c² (m²/s²), kept here since every operator scales with it.
    pub c2: f64,
}

impl EffectiveCoefficients {
    /// Ratio c²/b appearing in the auxiliary state z = ψ_t + (c²/b)ψ.
    pub fn c2_over_b(&self) -> f64 {
        self.c2 / self.b
    }

    /// Linearized critical parameter at rest, γ = 1 - τc²/b = δ/b.
    pub fn gamma_at_rest(&self) -> f64 {
        1.0 - self.tau * self.c2 / self.b
    }
}

/// Computes the effective coefficients for a model/τ pair.
pub fn derive_coefficients(
    medium: &MediumParams,
    kind: ModelKind,
    tau: f64,
) -> Result<EffectiveCoefficients> {
    medium.validate()?;
    if kind.is_third_order() {
        if tau <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "{kind:?} requires tau > 0, got {tau}"
            )));
        }
    } else if tau != 0.0 {
        return Err(Error::InvalidArgument(format!(
            "{kind:?} is a limit model and requires tau = 0, got {tau}"
        )));
    }
    let c2 = medium.c * medium.c;
    let beta_a = 1.0 + medium.b_over_a / 2.0;
    let k = match kind {
        ModelKind::Westervelt | ModelKind::JmgtWestervelt => 2.0 * beta_a / c2,
        ModelKind::Kuznetsov | ModelKind::JmgtKuznetsov => 2.0 / c2 * (medium.b_over_a / 2.0),
    };
    Ok(EffectiveCoefficients {
        tau,
        b: medium.delta + tau * c2,
        k,
        beta_a,
        sigma: if kind.has_gradient_nonlinearity() {
            1.0
        } else {
            0.0
        },
        c2,
    })
}

/// Quasilinear coefficient field α = 1 - k ψ_t and critical field
/// γ = α - τc²/b at the quadrature points.
#[derive(Debug, Clone)]
pub struct AlphaField {
    pub alpha: Vec<f64>,
    pub gamma: Vec<f64>,
    pub min_alpha: f64,
    pub min_gamma: f64,
}

pub fn alpha_field(coeffs: &EffectiveCoefficients, psi_t: &[f64]) -> AlphaField {
    let shift = coeffs.tau * coeffs.c2 / coeffs.b;
    let mut alpha = Vec::with_capacity(psi_t.len());
    let mut gamma = Vec::with_capacity(psi_t.len());
    let mut min_alpha = f64::INFINITY;
    let mut min_gamma = f64::INFINITY;
    for &v in psi_t {
        let a = 1.0 - coeffs.k * v;
        let g = a - shift;
        min_alpha = min_alpha.min(a);
        min_gamma = min_gamma.min(g);
        alpha.push(a);
        gamma.push(g);
    }
    AlphaField {
        alpha,
        gamma,
        min_alpha,
        min_gamma,
    }
}

/// Nonlinear load vector with entries ∫ σ · 2 ψ_x ψ_tx φᵢ dx (full DOF set).
pub fn nonlinear_rhs(
    coeffs: &EffectiveCoefficients,
    psi_x: &[f64],
    psi_tx: &[f64],
    plan: &QuadraturePlan,
) -> Result<Vec<f64>> {
    if coeffs.sigma == 0.0 {
        return Ok(vec![0.0; plan.n_dof]);
    }
    if psi_x.len() != plan.n_points() || psi_tx.len() != plan.n_points() {
        return Err(Error::WeightLengthMismatch {
            expected: plan.n_points(),
            got: psi_x.len().min(psi_tx.len()),
        });
    }
    let g: Vec<f64> = psi_x
        .iter()
        .zip(psi_tx)
        .map(|(a, b)| coeffs.sigma * 2.0 * a * b)
        .collect();
    plan.load_from_samples(&g)
}

/// Space-time source term f(x, t); zero by default, nonzero only in
/// manufactured-solution runs.
#[derive(Clone, Default)]
pub enum ForcingSpec {
    #[default]
    Zero,
    Function(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

impl std::fmt::Debug for ForcingSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ForcingSpec::Zero => write!(f, "ForcingSpec::Zero"),
            ForcingSpec::Function(_) => write!(f, "ForcingSpec::Function(..)"),
        }
    }
}

impl ForcingSpec {
    pub fn from_fn(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        ForcingSpec::Function(Arc::new(f))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ForcingSpec::Zero)
    }
}

/// Load vector ∫ f(·, t) φᵢ dx (full DOF set).
pub fn forcing_load(spec: &ForcingSpec, t: f64, plan: &QuadraturePlan) -> Result<Vec<f64>> {
    match spec {
        ForcingSpec::Zero => Ok(vec![0.0; plan.n_dof]),
        ForcingSpec::Function(f) => {
            let g: Vec<f64> = plan.x.iter().map(|&x| f(x, t)).collect();
            plan.load_from_samples(&g)
        }
    }
}

/// Initial data (ψ₀, ψ₁, ψ₂) as functions of x.
#[derive(Clone)]
pub struct InitialData {
    pub psi0: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub psi1: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub psi2: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for InitialData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "InitialData(..)")
    }
}

impl InitialData {
    pub fn zero() -> Self {
        InitialData {
            psi0: Arc::new(|_| 0.0),
            psi1: Arc::new(|_| 0.0),
            psi2: Arc::new(|_| 0.0),
        }
    }

    /// The experiment preset: ψ₀ = 0, ψ₁ a Gaussian pressure pulse
    /// A·exp(-(x-x₀)²/(2s²)), ψ₂ = 0.
    ///
    /// The Gaussian tail does not vanish identically on the boundary; with
    /// the preset geometry the mismatch is ~e⁻⁵⁰ and the boundary DOFs are
    /// zeroed after interpolation.
    pub fn gaussian(amplitude: f64, center: f64, width: f64) -> Self {
        InitialData {
            psi0: Arc::new(|_| 0.0),
            psi1: Arc::new(move |x| {
                let d = x - center;
                amplitude * (-d * d / (2.0 * width * width)).exp()
            }),
            psi2: Arc::new(|_| 0.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spline::{build_basis, QuadratureRule};
    use approx::assert_relative_eq;

    #[test]
    fn water_jmgt_coefficients() {
        let c =
            derive_coefficients(&MediumParams::water(), ModelKind::JmgtWestervelt, 1e-7).unwrap();
        assert_relative_eq!(c.b, 0.225000006, max_relative = 1e-12);
        assert_relative_eq!(c.beta_a, 3.5);
        assert_eq!(c.sigma, 0.0);
    }

    #[test]
    fn water_westervelt_coefficients() {
        let c = derive_coefficients(&MediumParams::water(), ModelKind::Westervelt, 0.0).unwrap();
        assert_eq!(c.b, 6e-9);
        assert_relative_eq!(c.k, 7.0 / 2.25e6, max_relative = 1e-15);
        assert_relative_eq!(c.k, 3.1111e-6, max_relative = 1e-4);
    }

    #[test]
    fn water_kuznetsov_coefficients() {
        let c = derive_coefficients(&MediumParams::water(), ModelKind::Kuznetsov, 0.0).unwrap();
        assert_relative_eq!(c.k, 5.0 / 2.25e6, max_relative = 1e-15);
        assert_relative_eq!(c.k, 2.2222e-6, max_relative = 1e-4);
        assert_eq!(c.sigma, 1.0);
    }

    #[test]
    fn tau_sign_violations_are_errors() {
        let w = MediumParams::water();
        assert!(derive_coefficients(&w, ModelKind::Westervelt, 1e-7).is_err());
        assert!(derive_coefficients(&w, ModelKind::JmgtWestervelt, 0.0).is_err());
        assert!(derive_coefficients(&w, ModelKind::JmgtKuznetsov, -1e-7).is_err());
    }

    #[test]
    fn coefficient_identity_exact_over_many_samples() {
        // b - delta - tau c^2 must vanish exactly when evaluated in the same
        // order as the defining expression.
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            ((state >> 11) as f64) / ((1u64 << 53) as f64)
        };
        for _ in 0..1_000_000 {
            let delta = 1e-9 * (1.0 + next());
            let tau = 1e-8 * next();
            let c = 300.0 + 2000.0 * next();
            let medium = MediumParams {
                c,
                delta,
                rho0: 1000.0,
                b_over_a: 5.0,
            };
            let coeffs = derive_coefficients(
                &medium,
                if tau > 0.0 {
                    ModelKind::JmgtWestervelt
                } else {
                    ModelKind::Westervelt
                },
                tau,
            )
            .unwrap();
            assert_eq!(coeffs.b, delta + tau * (c * c));
        }
    }

    #[test]
    fn limit_consistency_as_tau_vanishes() {
        let w = MediumParams::water();
        let base = derive_coefficients(&w, ModelKind::Westervelt, 0.0).unwrap();
        for exp in 8..14 {
            let tau = 10f64.powi(-exp);
            let c = derive_coefficients(&w, ModelKind::JmgtWestervelt, tau).unwrap();
            assert_eq!(c.k, base.k);
            assert_eq!(c.sigma, base.sigma);
            assert_relative_eq!(c.b - base.b, tau * 2.25e6, max_relative = 1e-9);
        }
    }

    #[test]
    fn alpha_field_values_and_minima() {
        let coeffs =
            derive_coefficients(&MediumParams::water(), ModelKind::JmgtWestervelt, 1e-7).unwrap();
        // k = 0: alpha == 1, gamma == 1 - tau c^2/b
        let lin = EffectiveCoefficients { k: 0.0, ..coeffs };
        let f = alpha_field(&lin, &[0.0, 1.0, -3.0]);
        assert!(f.alpha.iter().all(|&a| a == 1.0));
        let expected_gamma = 1.0 - 1e-7 * 2.25e6 / 0.225000006;
        for g in &f.gamma {
            assert_relative_eq!(*g, expected_gamma, max_relative = 1e-12);
        }

        // Gaussian peak: min alpha = 1 - k * 8e4 ≈ 0.7511
        let f = alpha_field(&coeffs, &[0.0, 4e4, 8e4]);
        assert_relative_eq!(f.min_alpha, 1.0 - 7.0 / 2.25e6 * 8e4, max_relative = 1e-12);
        assert_relative_eq!(f.min_alpha, 0.7511, max_relative = 1e-3);

        // at rest gamma = delta/b
        let f = alpha_field(&coeffs, &[0.0]);
        assert_relative_eq!(f.gamma[0], 6e-9 / 0.225000006, max_relative = 1e-10);
        assert_relative_eq!(f.gamma[0], 2.6667e-8, max_relative = 1e-4);
        assert!(f.min_gamma > 0.0);
    }

    #[test]
    fn nonlinear_rhs_zero_cases() {
        let basis = build_basis(2, 8, (0.0, 1.0)).unwrap();
        let plan = QuadraturePlan::new(&basis, &QuadratureRule::gauss_legendre(3)).unwrap();
        let coeffs_w =
            derive_coefficients(&MediumParams::water(), ModelKind::Westervelt, 0.0).unwrap();
        let ones = vec![1.0; plan.n_points()];
        // sigma = 0 short-circuits
        let load = nonlinear_rhs(&coeffs_w, &ones, &ones, &plan).unwrap();
        assert!(load.iter().all(|&v| v == 0.0));
        // spatially constant psi: psi_x == 0
        let coeffs_k =
            derive_coefficients(&MediumParams::water(), ModelKind::Kuznetsov, 0.0).unwrap();
        let zeros = vec![0.0; plan.n_points()];
        let load = nonlinear_rhs(&coeffs_k, &zeros, &ones, &plan).unwrap();
        assert!(load.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn nonlinear_rhs_matches_trig_integrals_on_fine_mesh() {
        // psi = psi_t = sin(pi x / l): entries approximate
        // ∫ 2 (pi/l)^2 cos^2(pi x/l) φ_i dx.
        let l = 1.0;
        let basis = build_basis(2, 200, (0.0, l)).unwrap();
        let plan = QuadraturePlan::new(&basis, &QuadratureRule::gauss_legendre(3)).unwrap();
        let coeffs =
            derive_coefficients(&MediumParams::water(), ModelKind::Kuznetsov, 0.0).unwrap();
        let freq = std::f64::consts::PI / l;
        let coefs = basis.interpolate(|x| (freq * x).sin()).unwrap();
        let mut grad = Vec::new();
        plan.sample_field(&coefs, 1, &mut grad);
        let load = nonlinear_rhs(&coeffs, &grad, &grad, &plan).unwrap();
        let exact: Vec<f64> = plan
            .load_from_samples(
                &plan
                    .x
                    .iter()
                    .map(|&x| 2.0 * freq * freq * (freq * x).cos().powi(2))
                    .collect::<Vec<_>>(),
            )
            .unwrap();
        for (a, b) in load.iter().zip(&exact) {
            assert_relative_eq!(a, b, epsilon = 1e-8 * freq * freq, max_relative = 1e-4);
        }
    }

    #[test]
    fn nonlinear_rhs_is_bilinear() {
        let basis = build_basis(2, 10, (0.0, 1.0)).unwrap();
        let plan = QuadraturePlan::new(&basis, &QuadratureRule::gauss_legendre(3)).unwrap();
        let coeffs =
            derive_coefficients(&MediumParams::water(), ModelKind::Kuznetsov, 0.0).unwrap();
        let a: Vec<f64> = plan.x.iter().map(|x| x.sin()).collect();
        let b: Vec<f64> = plan.x.iter().map(|x| (2.0 * x).cos()).collect();
        let base = nonlinear_rhs(&coeffs, &a, &b, &plan).unwrap();
        let lam = 3.7;
        let scaled_a: Vec<f64> = a.iter().map(|v| lam * v).collect();
        let scaled = nonlinear_rhs(&coeffs, &scaled_a, &b, &plan).unwrap();
        for (s, b0) in scaled.iter().zip(&base) {
            assert_relative_eq!(*s, lam * b0, max_relative = 1e-12, epsilon = 1e-300);
        }
    }

    #[test]
    fn forcing_load_cases() {
        let basis = build_basis(2, 8, (0.0, 0.2)).unwrap();
        let plan = QuadraturePlan::new(&basis, &QuadratureRule::gauss_legendre(3)).unwrap();
        let zero = forcing_load(&ForcingSpec::Zero, 1.0, &plan).unwrap();
        assert!(zero.iter().all(|&v| v == 0.0));

        let one = forcing_load(&ForcingSpec::from_fn(|_, _| 1.0), 0.0, &plan).unwrap();
        assert_relative_eq!(one.iter().sum::<f64>(), 0.2, max_relative = 1e-13);

        let f = ForcingSpec::from_fn(|x: f64, t: f64| (std::f64::consts::PI * x / 0.2).sin() * t);
        let l1 = forcing_load(&f, 1.0, &plan).unwrap();
        let l2 = forcing_load(&f, 2.0, &plan).unwrap();
        for (a, b) in l1.iter().zip(&l2) {
            assert_relative_eq!(2.0 * a, b, max_relative = 1e-14, epsilon = 1e-300);
        }
    }
}
