//! Independent semi-analytic references for solver verification.
//!
//! For a single Dirichlet eigenmode sin(mπx/l) with eigenvalue λ = (mπ/l)²,
//! the linear third-order model reduces to the modal ODE
//!
//!   τ a''' + a'' + b λ a' + c² λ a = 0,
//!
//! whose exact solution is a sum of exponentials of the characteristic roots
//! (two roots of s² + δλ s + c²λ for the τ = 0 limit). Roots come from a
//! closed-form cubic with a complex Newton polish; near-confluent roots are
//! rejected rather than handled by a generalized-eigenvector branch.
//!
//! Manufactured cases pair an exact ψ(x, t) with the forcing obtained by
//! substituting it into the chosen model, hand-derived in closed form.

use crate::error::{Error, Result};
use crate::models::{EffectiveCoefficients, ForcingSpec, MediumParams, ModelKind};
use num_complex::Complex64;
use std::sync::Arc;

/// Relative root-separation threshold below which the exponential basis is
/// considered ill-conditioned.
const CONFLUENCE_THRESHOLD: f64 = 1e-6;

/// Single Dirichlet-Laplacian mode of a linear model.
#[derive(Debug, Clone, Copy)]
pub struct ModalProblem {
    /// Eigenvalue λ = (mπ/l)².
    pub lambda: f64,
    /// Relaxation time; 0 selects the second-order limit model.
    pub tau: f64,
    /// Effective diffusivity (δ for the limit model).
    pub b: f64,
    /// c².
    pub c2: f64,
    /// Modal initial data a(0), a'(0), a''(0) (a''(0) unused when τ = 0).
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
}

impl ModalProblem {
    /// Mode `m` on a Dirichlet interval of length `l`.
    pub fn new(m: usize, l: f64, coeffs: &EffectiveCoefficients, data: (f64, f64, f64)) -> Self {
        let freq = m as f64 * std::f64::consts::PI / l;
        ModalProblem {
            lambda: freq * freq,
            tau: coeffs.tau,
            b: coeffs.b,
            c2: coeffs.c2,
            a0: data.0,
            a1: data.1,
            a2: data.2,
        }
    }
}

/// Roots of the modal characteristic polynomial.
#[derive(Debug, Clone)]
pub struct CharacteristicRoots {
    pub roots: Vec<Complex64>,
}

/// Solves τs³ + s² + bλ s + c²λ = 0 (or the quadratic for τ = 0).
pub fn characteristic_roots(p: &ModalProblem) -> Result<CharacteristicRoots> {
    let mut roots = if p.tau > 0.0 {
        cubic_roots(p.tau, 1.0, p.b * p.lambda, p.c2 * p.lambda)
    } else {
        quadratic_roots(1.0, p.b * p.lambda, p.c2 * p.lambda)
    };
    // real-coefficient polynomial: snap spurious imaginary residue of real
    // roots left behind by the Newton polish
    for r in roots.iter_mut() {
        if r.im.abs() <= 1e-14 * r.norm() {
            r.im = 0.0;
        }
    }
    // separation measured against the pair's own magnitude, so a fast
    // relaxation root does not mask a genuinely distinct oscillatory pair
    for i in 0..roots.len() {
        for j in (i + 1)..roots.len() {
            let sep = (roots[i] - roots[j]).norm();
            let scale = roots[i].norm().max(roots[j].norm());
            if sep < CONFLUENCE_THRESHOLD * scale {
                return Err(Error::ConfluentRoots {
                    separation: sep,
                    scale,
                });
            }
        }
    }
    Ok(CharacteristicRoots { roots })
}

fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<Complex64> {
    let disc = Complex64::new(b * b - 4.0 * a * c, 0.0).sqrt();
    // sign chosen to avoid cancellation in the dominant root
    let q = if b >= 0.0 {
        -0.5 * (Complex64::new(b, 0.0) + disc)
    } else {
        -0.5 * (Complex64::new(b, 0.0) - disc)
    };
    vec![q / a, Complex64::new(c, 0.0) / q]
}

/// Monic-normalized Cardano seeds followed by a complex Newton polish on the
/// original polynomial.
fn cubic_roots(a3: f64, a2: f64, a1: f64, a0: f64) -> Vec<Complex64> {
    let b2 = a2 / a3;
    let b1 = a1 / a3;
    let b0 = a0 / a3;
    // depressed cubic y^3 + p y + q, s = y - b2/3
    let p = b1 - b2 * b2 / 3.0;
    let q = 2.0 * b2.powi(3) / 27.0 - b2 * b1 / 3.0 + b0;
    let shift = -b2 / 3.0;
    let half_q = Complex64::new(q / 2.0, 0.0);
    let disc = (half_q * half_q + Complex64::new(p / 3.0, 0.0).powi(3)).sqrt();
    let mut u = (-half_q + disc).powf(1.0 / 3.0);
    if u.norm() < 1e-300 {
        u = (-half_q - disc).powf(1.0 / 3.0);
    }
    let omega = Complex64::new(-0.5, 0.75f64.sqrt());
    let mut roots = Vec::with_capacity(3);
    for k in 0..3 {
        let uk = u * omega.powu(k);
        let y = if uk.norm() < 1e-300 {
            Complex64::new(0.0, 0.0)
        } else {
            uk - Complex64::new(p / 3.0, 0.0) / uk
        };
        let mut s = y + shift;
        // Newton polish on the original scaled polynomial
        for _ in 0..60 {
            let f = ((Complex64::new(a3, 0.0) * s + a2) * s + a1) * s + a0;
            let df = (Complex64::new(3.0 * a3, 0.0) * s + 2.0 * a2) * s + a1;
            if df.norm() == 0.0 {
                break;
            }
            let step = f / df;
            s -= step;
            if step.norm() <= 1e-15 * s.norm().max(1e-300) {
                break;
            }
        }
        roots.push(s);
    }
    roots
}

/// Exact modal solution a(t) = Σ cᵢ exp(sᵢ t) with the coefficients from the
/// Vandermonde system on (a₀, a₁, a₂).
#[derive(Debug, Clone)]
pub struct ModalSolution {
    pub roots: Vec<Complex64>,
    coefficients: Vec<Complex64>,
}

impl ModalSolution {
    pub fn new(problem: &ModalProblem) -> Result<Self> {
        let roots = characteristic_roots(problem)?.roots;
        let n = roots.len();
        let data = [problem.a0, problem.a1, problem.a2];
        // rows: Σ c_i s_i^k = a_k
        let mut m = vec![Complex64::new(0.0, 0.0); n * n];
        let mut rhs = vec![Complex64::new(0.0, 0.0); n];
        for (k, r) in rhs.iter_mut().enumerate().take(n) {
            for (i, s) in roots.iter().enumerate() {
                m[k * n + i] = s.powu(k as u32);
            }
            *r = Complex64::new(data[k], 0.0);
        }
        let coefficients = complex_gauss_solve(&mut m, &mut rhs, n)?;
        Ok(ModalSolution {
            roots,
            coefficients,
        })
    }

    /// a and its first `order` derivatives at time t.
    pub fn eval_derivatives(&self, t: f64, order: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(order + 1);
        for k in 0..=order {
            let mut acc = Complex64::new(0.0, 0.0);
            for (c, s) in self.coefficients.iter().zip(&self.roots) {
                acc += c * s.powu(k as u32) * (s * t).exp();
            }
            out.push(acc.re);
        }
        out
    }
}

/// (a, a', a'') at time t.
pub fn modal_solution(problem: &ModalProblem, t: f64) -> Result<(f64, f64, f64)> {
    let sol = ModalSolution::new(problem)?;
    let d = sol.eval_derivatives(t, 2);
    Ok((d[0], d[1], d[2]))
}

fn complex_gauss_solve(
    m: &mut [Complex64],
    rhs: &mut [Complex64],
    n: usize,
) -> Result<Vec<Complex64>> {
    for k in 0..n {
        let mut p = k;
        let mut best = m[k * n + k].norm();
        for i in (k + 1)..n {
            let v = m[i * n + k].norm();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best == 0.0 {
            return Err(Error::FactorizationFailure {
                pivot: k,
                value: 0.0,
            });
        }
        if p != k {
            for j in 0..n {
                m.swap(k * n + j, p * n + j);
            }
            rhs.swap(k, p);
        }
        for i in (k + 1)..n {
            let f = m[i * n + k] / m[k * n + k];
            for j in k..n {
                let v = m[k * n + j];
                m[i * n + j] -= f * v;
            }
            let v = rhs[k];
            rhs[i] -= f * v;
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for i in (0..n).rev() {
        let mut acc = rhs[i];
        for j in (i + 1)..n {
            acc -= m[i * n + j] * x[j];
        }
        x[i] = acc / m[i * n + i];
    }
    Ok(x)
}

/// A manufactured solution together with the forcing that makes it exact for
/// the given model.
#[derive(Clone)]
pub struct ManufacturedCase {
    pub name: &'static str,
    pub kind: ModelKind,
    pub coeffs: EffectiveCoefficients,
    pub length: f64,
    pub psi: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    pub psi_t: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    pub psi_tt: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    pub forcing: ForcingSpec,
}

impl std::fmt::Debug for ManufacturedCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ManufacturedCase({})", self.name)
    }
}

/// Separable case ψ = sin(πx/l) q(t) for the general model
///
///   τψ_ttt + ψ_tt - c²Δψ - bΔψ_t = (k/2 ψ_t² + σ|∇ψ|²)_t + f,
///
/// so with μ = (π/l)²:
///
///   f(x,t) = φ [τq''' + q'' + c²μ q + bμ q'] - k φ² q' q'' - 2σ φ'² q q'.
fn separable_case(
    name: &'static str,
    kind: ModelKind,
    coeffs: EffectiveCoefficients,
    length: f64,
    q: Arc<dyn Fn(f64) -> [f64; 4] + Send + Sync>,
) -> ManufacturedCase {
    let freq = std::f64::consts::PI / length;
    let mu = freq * freq;
    let (tau, c2, b, k, sigma) = (coeffs.tau, coeffs.c2, coeffs.b, coeffs.k, coeffs.sigma);
    let qf = q.clone();
    let psi = Arc::new(move |x: f64, t: f64| (freq * x).sin() * qf(t)[0]);
    let qf = q.clone();
    let psi_t = Arc::new(move |x: f64, t: f64| (freq * x).sin() * qf(t)[1]);
    let qf = q.clone();
    let psi_tt = Arc::new(move |x: f64, t: f64| (freq * x).sin() * qf(t)[2]);
    let forcing = ForcingSpec::from_fn(move |x: f64, t: f64| {
        let phi = (freq * x).sin();
        let dphi = freq * (freq * x).cos();
        let [q0, q1, q2, q3] = q(t);
        phi * (tau * q3 + q2 + c2 * mu * q0 + b * mu * q1)
            - k * phi * phi * q1 * q2
            - 2.0 * sigma * dphi * dphi * q0 * q1
    });
    ManufacturedCase {
        name,
        kind,
        coeffs,
        length,
        psi,
        psi_t,
        psi_tt,
        forcing,
    }
}

/// Catalog lookup. Cases are built for water on a channel of length `l`:
///
/// * `sine-t2-linear-westervelt` — ψ = sin(πx/l) t², linear (k = 0) Westervelt,
/// * `sine-t3-linear-jmgt` — ψ = sin(πx/l) t³, linear JMGT (τ = 10⁻⁷ s),
/// * `sine-exp-linear-westervelt` — ψ = sin(πx/l) e^(-t/T₀), linear Westervelt,
/// * `sine-t2-westervelt` — as the first case with the quadratic ψ_t
///   nonlinearity retained,
/// * `sine-t2-kuznetsov` — full Kuznetsov nonlinearity.
pub fn manufactured_case(name: &str, length: f64) -> Result<ManufacturedCase> {
    let water = MediumParams::water();
    let poly2: Arc<dyn Fn(f64) -> [f64; 4] + Send + Sync> =
        Arc::new(|t: f64| [t * t, 2.0 * t, 2.0, 0.0]);
    let poly3: Arc<dyn Fn(f64) -> [f64; 4] + Send + Sync> =
        Arc::new(|t: f64| [t * t * t, 3.0 * t * t, 6.0 * t, 6.0]);
    // decay on the acoustic transit scale of the channel
    let rate = 1500.0 / length;
    let expdec: Arc<dyn Fn(f64) -> [f64; 4] + Send + Sync> = Arc::new(move |t: f64| {
        let e = (-rate * t).exp();
        [e, -rate * e, rate * rate * e, -rate.powi(3) * e]
    });
    match name {
        "sine-t2-linear-westervelt" => {
            let mut coeffs =
                crate::models::derive_coefficients(&water, ModelKind::Westervelt, 0.0)?;
            coeffs.k = 0.0;
            Ok(separable_case(
                "sine-t2-linear-westervelt",
                ModelKind::Westervelt,
                coeffs,
                length,
                poly2,
            ))
        }
        "sine-t3-linear-jmgt" => {
            let mut coeffs =
                crate::models::derive_coefficients(&water, ModelKind::JmgtWestervelt, 1e-7)?;
            coeffs.k = 0.0;
            Ok(separable_case(
                "sine-t3-linear-jmgt",
                ModelKind::JmgtWestervelt,
                coeffs,
                length,
                poly3,
            ))
        }
        "sine-exp-linear-westervelt" => {
            let mut coeffs =
                crate::models::derive_coefficients(&water, ModelKind::Westervelt, 0.0)?;
            coeffs.k = 0.0;
            Ok(separable_case(
                "sine-exp-linear-westervelt",
                ModelKind::Westervelt,
                coeffs,
                length,
                expdec,
            ))
        }
        "sine-t2-westervelt" => {
            let coeffs = crate::models::derive_coefficients(&water, ModelKind::Westervelt, 0.0)?;
            Ok(separable_case(
                "sine-t2-westervelt",
                ModelKind::Westervelt,
                coeffs,
                length,
                poly2,
            ))
        }
        "sine-t2-kuznetsov" => {
            let coeffs = crate::models::derive_coefficients(&water, ModelKind::Kuznetsov, 0.0)?;
            Ok(separable_case(
                "sine-t2-kuznetsov",
                ModelKind::Kuznetsov,
                coeffs,
                length,
                poly2,
            ))
        }
        other => Err(Error::UnknownCase(other.to_string())),
    }
}
