//! Univariate B-spline bases on uniform clamped knot vectors.
//!
//! The discretization follows the isogeometric setup: degree-p splines with
//! maximal C^(p-1) regularity on a uniform open knot vector over [0, l]. Basis
//! values and derivatives come from the Cox–de Boor recursion in its
//! triangular-table form, returning only the p+1 functions active at the
//! query point together with their global indices.

use crate::banded::DenseLu;
use crate::error::{Error, Result};

/// Clamped B-spline basis on an interval.
#[derive(Debug, Clone)]
pub struct SplineBasis {
    degree: usize,
    knots: Vec<f64>,
    n_dof: usize,
    domain: (f64, f64),
}

/// Values of the active basis functions at one point.
///
/// Global function indices are `first_index..first_index + values.len()`.
#[derive(Debug, Clone)]
pub struct BasisValues {
    pub first_index: usize,
    pub values: Vec<f64>,
    pub first_derivatives: Vec<f64>,
    pub second_derivatives: Vec<f64>,
}

/// Builds a uniform clamped basis with `n_elements` elements over `domain`.
///
/// The first and last knots repeat degree+1 times, so the basis is
/// interpolatory at the endpoints and `n_dof = n_elements + degree`.
pub fn build_basis(degree: usize, n_elements: usize, domain: (f64, f64)) -> Result<SplineBasis> {
    let (a, b) = domain;
    if degree < 1 {
        return Err(Error::InvalidArgument(format!(
            "degree must be >= 1, got {degree}"
        )));
    }
    if n_elements < 1 {
        return Err(Error::InvalidArgument(format!(
            "n_elements must be >= 1, got {n_elements}"
        )));
    }
    if !(a.is_finite() && b.is_finite() && b > a) {
        return Err(Error::InvalidArgument(format!(
            "degenerate domain [{a}, {b}]"
        )));
    }
    let mut knots = Vec::with_capacity(n_elements + 1 + 2 * degree);
    for _ in 0..=degree {
        knots.push(a);
    }
    let h = (b - a) / n_elements as f64;
    for i in 1..n_elements {
        knots.push(a + h * i as f64);
    }
    for _ in 0..=degree {
        knots.push(b);
    }
    Ok(SplineBasis {
        degree,
        n_dof: n_elements + degree,
        knots,
        domain,
    })
}

impl SplineBasis {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_dof(&self) -> usize {
        self.n_dof
    }

    pub fn n_elements(&self) -> usize {
        self.n_dof - self.degree
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Length of one element of the uniform mesh.
    pub fn element_length(&self) -> f64 {
        (self.domain.1 - self.domain.0) / self.n_elements() as f64
    }

    /// Left endpoint of element `e`.
    pub fn element_start(&self, e: usize) -> f64 {
        self.domain.0 + self.element_length() * e as f64
    }

    /// Knot span index for `x` (largest i with knots[i] <= x, clamped at the
    /// right end so x = l falls in the last nonempty span).
    pub fn find_span(&self, x: f64) -> Result<usize> {
        let (a, b) = self.domain;
        if !(x >= a && x <= b) {
            return Err(Error::OutOfDomain { x, lo: a, hi: b });
        }
        let n = self.n_dof;
        let p = self.degree;
        if x == b {
            return Ok(n - 1);
        }
        let mut lo = p;
        let mut hi = n;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if x < self.knots[mid] {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(lo)
    }

    /// Element index for `x` on the uniform mesh.
    pub fn element_of(&self, x: f64) -> Result<usize> {
        Ok(self.find_span(x)? - self.degree)
    }

    /// Evaluates the active basis functions and derivatives up to order 2.
    pub fn evaluate(&self, x: f64) -> Result<BasisValues> {
        let table = self.evaluate_ders(x, 2)?;
        let span = self.find_span(x)?;
        Ok(BasisValues {
            first_index: span - self.degree,
            values: table[0].clone(),
            first_derivatives: table[1].clone(),
            second_derivatives: table[2].clone(),
        })
    }

    /// Derivative table of the active functions: `table[k][j]` is the k-th
    /// derivative of function `span - degree + j` at `x`, for k = 0..=n_ders.
    ///
    /// Triangular-table form of the Cox-de Boor recursion with the standard
    /// two-row derivative accumulation (derivatives above the degree are
    /// identically zero).
    pub fn evaluate_ders(&self, x: f64, n_ders: usize) -> Result<Vec<Vec<f64>>> {
        let span = self.find_span(x)?;
        let p = self.degree;
        let u = &self.knots;

        // ndu[j][r]: basis functions of degree j (row) and knot differences
        let mut ndu = vec![vec![0.0; p + 1]; p + 1];
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        ndu[0][0] = 1.0;
        for j in 1..=p {
            left[j] = x - u[span + 1 - j];
            right[j] = u[span + j] - x;
            let mut saved = 0.0;
            for r in 0..j {
                // lower triangle stores the knot differences
                ndu[j][r] = right[r + 1] + left[j - r];
                let temp = ndu[r][j - 1] / ndu[j][r];
                // upper triangle stores the basis values
                ndu[r][j] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            ndu[j][j] = saved;
        }

        let mut ders = vec![vec![0.0; p + 1]; n_ders + 1];
        for j in 0..=p {
            ders[0][j] = ndu[j][p];
        }
        let max_k = n_ders.min(p);
        let mut a = vec![vec![0.0; p + 1]; 2];
        for r in 0..=p {
            let mut s1 = 0;
            let mut s2 = 1;
            a[0][0] = 1.0;
            for k in 1..=max_k {
                let mut d = 0.0;
                let rk = r as isize - k as isize;
                let pk = (p - k) as isize;
                if r >= k {
                    a[s2][0] = a[s1][0] / ndu[(pk + 1) as usize][rk as usize];
                    d = a[s2][0] * ndu[rk as usize][pk as usize];
                }
                let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
                let j2 = if (r as isize - 1) <= pk { k - 1 } else { p - r };
                for j in j1..=j2 {
                    a[s2][j] = (a[s1][j] - a[s1][j - 1])
                        / ndu[(pk + 1) as usize][(rk + j as isize) as usize];
                    d += a[s2][j] * ndu[(rk + j as isize) as usize][pk as usize];
                }
                if r as isize <= pk {
                    a[s2][k] = -a[s1][k - 1] / ndu[(pk + 1) as usize][r];
                    d += a[s2][k] * ndu[r][pk as usize];
                }
                ders[k][r] = d;
                std::mem::swap(&mut s1, &mut s2);
            }
        }
        let mut factor = p as f64;
        for k in 1..=max_k {
            for j in 0..=p {
                ders[k][j] *= factor;
            }
            factor *= (p - k) as f64;
        }
        Ok(ders)
    }

    /// Evaluates a spline (full coefficient vector) and derivatives up to
    /// order `n_ders` at `x`.
    pub fn eval_spline(&self, coefs: &[f64], x: f64, n_ders: usize) -> Result<Vec<f64>> {
        assert_eq!(coefs.len(), self.n_dof);
        let span = self.find_span(x)?;
        let table = self.evaluate_ders(x, n_ders)?;
        let first = span - self.degree;
        let mut out = vec![0.0; n_ders + 1];
        for (k, row) in table.iter().enumerate() {
            out[k] = row
                .iter()
                .enumerate()
                .map(|(j, v)| v * coefs[first + j])
                .sum();
        }
        Ok(out)
    }

    /// Greville abscissae: averages of degree consecutive interior knots,
    /// clamped to the domain against round-off drift of the knot average.
    pub fn greville_abscissae(&self) -> Vec<f64> {
        let p = self.degree;
        let (a, b) = self.domain;
        (0..self.n_dof)
            .map(|i| (self.knots[i + 1..=i + p].iter().sum::<f64>() / p as f64).clamp(a, b))
            .collect()
    }

    /// Spline coefficients interpolating `f` at the Greville abscissae.
    ///
    /// The collocation matrix of a clamped basis at its Greville points is
    /// nonsingular; a dense LU handles the one-time solve.
    pub fn interpolate(&self, f: impl Fn(f64) -> f64) -> Result<Vec<f64>> {
        let n = self.n_dof;
        let xs = self.greville_abscissae();
        let mut matrix = vec![0.0; n * n];
        let mut rhs = vec![0.0; n];
        for (i, &x) in xs.iter().enumerate() {
            let span = self.find_span(x)?;
            let table = self.evaluate_ders(x, 0)?;
            let first = span - self.degree;
            for (j, v) in table[0].iter().enumerate() {
                matrix[i * n + first + j] = *v;
            }
            rhs[i] = f(x);
        }
        let lu = DenseLu::factor(&matrix, n)?;
        Ok(lu.solve(&rhs))
    }
}

/// Quadrature rule on the reference element [0, 1].
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    /// Gauss–Legendre rule with `n` points, mapped to [0, 1].
    ///
    /// Nodes are Newton-refined roots of the Legendre polynomial; the weights
    /// sum to 1 (the reference element measure) and the rule is exact for
    /// polynomials of degree 2n - 1.
    pub fn gauss_legendre(n: usize) -> Self {
        assert!(n >= 1);
        let mut points = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n {
            // initial guess on [-1, 1]
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_and_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                    let (p2, d2) = legendre_and_derivative(n, x);
                    dp = d2;
                    x -= p2 / d2;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            // map to [0, 1], ascending in the point coordinate
            points[n - 1 - i] = 0.5 * (x + 1.0);
            weights[n - 1 - i] = 0.5 * w;
        }
        QuadratureRule { points, weights }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Polynomial exactness degree of the Gauss rule.
    pub fn exactness_degree(&self) -> usize {
        2 * self.len() - 1
    }
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn paper_mesh_has_251_dofs() {
        let basis = build_basis(2, 249, (0.0, 0.2)).unwrap();
        assert_eq!(basis.n_dof(), 251);
        assert_eq!(basis.knots()[0], 0.0);
        assert_eq!(*basis.knots().last().unwrap(), 0.2);
        // clamped: first/last knot repeated degree+1 times
        assert!(basis.knots()[..3].iter().all(|&k| k == 0.0));
        assert!(basis.knots()[basis.knots().len() - 3..]
            .iter()
            .all(|&k| k == 0.2));
    }

    #[test]
    fn linear_hats_are_symmetric_at_midpoint() {
        let basis = build_basis(1, 1, (0.0, 1.0)).unwrap();
        assert_eq!(basis.n_dof(), 2);
        let v = basis.evaluate(0.5).unwrap();
        assert_relative_eq!(v.values[0], 0.5);
        assert_relative_eq!(v.values[1], 0.5);
    }

    #[test]
    fn invalid_arguments_are_rejected() {
        assert!(build_basis(0, 4, (0.0, 1.0)).is_err());
        assert!(build_basis(2, 0, (0.0, 1.0)).is_err());
        assert!(build_basis(2, 4, (1.0, 1.0)).is_err());
        assert!(build_basis(2, 4, (2.0, 1.0)).is_err());
        assert!(build_basis(2, 4, (0.0, f64::NAN)).is_err());
    }

    #[test]
    fn out_of_domain_evaluation_is_an_error() {
        let basis = build_basis(2, 4, (0.0, 1.0)).unwrap();
        assert!(matches!(
            basis.evaluate(-0.01),
            Err(Error::OutOfDomain { .. })
        ));
        assert!(matches!(
            basis.evaluate(1.01),
            Err(Error::OutOfDomain { .. })
        ));
        assert!(basis.evaluate(1.0).is_ok());
    }

    #[test]
    fn quadratic_values_at_interior_knot_midpoint() {
        // On a uniform quadratic basis the midpoint of an interior element
        // sees the cardinal values (1/8, 3/4, 1/8).
        let basis = build_basis(2, 8, (0.0, 1.0)).unwrap();
        let v = basis.evaluate(0.5 * (3.0 + 4.0) / 8.0).unwrap();
        assert_relative_eq!(v.values[0], 0.125, max_relative = 1e-13);
        assert_relative_eq!(v.values[1], 0.75, max_relative = 1e-13);
        assert_relative_eq!(v.values[2], 0.125, max_relative = 1e-13);
    }

    #[test]
    fn partition_of_unity_and_derivative_sums() {
        let basis = build_basis(2, 4, (0.0, 1.0)).unwrap();
        for i in 0..=100 {
            let x = i as f64 / 100.0;
            let v = basis.evaluate(x).unwrap();
            let s: f64 = v.values.iter().sum();
            let s1: f64 = v.first_derivatives.iter().sum();
            assert!((s - 1.0).abs() <= 1e-12, "sum {s} at x = {x}");
            assert!(s1.abs() <= 1e-9, "derivative sum {s1} at x = {x}");
        }
    }

    #[test]
    fn second_derivatives_piecewise_constant_for_quadratics() {
        let basis = build_basis(2, 5, (0.0, 1.0)).unwrap();
        // two points inside the same element must see identical second ders
        let a = basis.evaluate(0.41).unwrap();
        let b = basis.evaluate(0.47).unwrap();
        assert_eq!(a.first_index, b.first_index);
        for (x, y) in a.second_derivatives.iter().zip(&b.second_derivatives) {
            assert_relative_eq!(x, y, max_relative = 1e-12);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let basis = build_basis(3, 7, (0.0, 2.0)).unwrap();
        let h = 1e-6;
        for &x in &[0.3, 0.77, 1.11, 1.62] {
            let f0 = basis.evaluate_ders(x - h, 1).unwrap();
            let f1 = basis.evaluate_ders(x + h, 1).unwrap();
            let c = basis.evaluate_ders(x, 1).unwrap();
            // points may straddle a knot only if the element is the same
            let s0 = basis.find_span(x - h).unwrap();
            let s1 = basis.find_span(x + h).unwrap();
            if s0 != s1 {
                continue;
            }
            for j in 0..c[0].len() {
                let fd = (f1[0][j] - f0[0][j]) / (2.0 * h);
                assert_relative_eq!(fd, c[1][j], epsilon = 1e-6, max_relative = 1e-5);
            }
        }
    }

    #[test]
    fn cubic_third_derivatives_match_finite_differences_of_second() {
        let basis = build_basis(3, 6, (0.0, 1.0)).unwrap();
        let h = 1e-6;
        for &x in &[0.21, 0.4, 0.68, 0.9] {
            if basis.find_span(x - h).unwrap() != basis.find_span(x + h).unwrap() {
                continue;
            }
            let lo = basis.evaluate_ders(x - h, 3).unwrap();
            let hi = basis.evaluate_ders(x + h, 3).unwrap();
            let c = basis.evaluate_ders(x, 3).unwrap();
            for j in 0..c[0].len() {
                let fd = (hi[2][j] - lo[2][j]) / (2.0 * h);
                assert_relative_eq!(fd, c[3][j], epsilon = 1e-3, max_relative = 1e-4);
            }
        }
    }

    #[test]
    fn greville_interpolation_reproduces_polynomials() {
        let basis = build_basis(2, 6, (0.0, 1.0)).unwrap();
        let coefs = basis.interpolate(|x| 1.0 + 2.0 * x + 3.0 * x * x).unwrap();
        for i in 0..=20 {
            let x = i as f64 / 20.0;
            let v = basis.eval_spline(&coefs, x, 0).unwrap()[0];
            assert_relative_eq!(v, 1.0 + 2.0 * x + 3.0 * x * x, max_relative = 1e-12);
        }
    }

    #[test]
    fn gauss_rules_integrate_monomials_exactly() {
        for n in 1..=6 {
            let rule = QuadratureRule::gauss_legendre(n);
            assert_relative_eq!(rule.weights.iter().sum::<f64>(), 1.0, max_relative = 1e-14);
            for k in 0..=rule.exactness_degree() {
                let q: f64 = rule
                    .points
                    .iter()
                    .zip(&rule.weights)
                    .map(|(x, w)| w * x.powi(k as i32))
                    .sum();
                let exact = 1.0 / (k as f64 + 1.0);
                assert_relative_eq!(q, exact, max_relative = 1e-13);
            }
        }
    }

    proptest! {
        #[test]
        fn partition_of_unity_random(
            degree in 1usize..5,
            n_elements in 1usize..40,
            t in 0.0f64..1.0,
        ) {
            let basis = build_basis(degree, n_elements, (0.0, 0.2)).unwrap();
            let x = 0.2 * t;
            let v = basis.evaluate(x).unwrap();
            let s: f64 = v.values.iter().sum();
            prop_assert!((s - 1.0).abs() <= 1e-12);
            prop_assert!(v.values.iter().all(|&b| b >= -1e-14));
        }
    }
}
