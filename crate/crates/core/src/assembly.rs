//! Galerkin assembly of the spline operators.
//!
//! Element-by-element assembly with Gauss quadrature of the mass matrix
//! (∫ φᵢ φⱼ), the stiffness matrix (∫ φᵢ′ φⱼ′), and the broken
//! second-derivative Gram matrix (∫ φᵢ″ φⱼ″) used for discrete |Δψ| and H²
//! norms. Homogeneous Dirichlet conditions are imposed by deleting the first
//! and last row/column: clamped splines are interpolatory at the endpoints.

use crate::banded::BandedMatrix;
use crate::error::{Error, Result};
use crate::spline::{QuadratureRule, SplineBasis};

/// Precomputed basis tables at every quadrature point of the mesh.
///
/// All assembly and field-sampling loops run off this cache, so the Cox-de
/// Boor recursion is evaluated once per mesh rather than once per time step.
#[derive(Debug, Clone)]
pub struct QuadraturePlan {
    pub degree: usize,
    pub n_dof: usize,
    pub n_elements: usize,
    pub points_per_element: usize,
    /// First active DOF of each element.
    pub first_dof: Vec<usize>,
    /// Global coordinates of the quadrature points, element-major.
    pub x: Vec<f64>,
    /// Quadrature weight times the element Jacobian, per point.
    pub scaled_weights: Vec<f64>,
    /// Basis values per point: `values[q * (degree+1) + a]`.
    pub values: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
    /// Broken third derivatives; only populated for degree >= 3 bases.
    pub d3: Option<Vec<f64>>,
}

impl QuadraturePlan {
    pub fn new(basis: &SplineBasis, rule: &QuadratureRule) -> Result<Self> {
        if rule.exactness_degree() < 2 * basis.degree() {
            return Err(Error::InvalidArgument(format!(
                "quadrature exactness {} below 2p = {}",
                rule.exactness_degree(),
                2 * basis.degree()
            )));
        }
        let p = basis.degree();
        let n_el = basis.n_elements();
        let nq = rule.len();
        let h = basis.element_length();
        let n_ders = if p >= 3 { 3 } else { 2 };
        let mut plan = QuadraturePlan {
            degree: p,
            n_dof: basis.n_dof(),
            n_elements: n_el,
            points_per_element: nq,
            first_dof: Vec::with_capacity(n_el),
            x: Vec::with_capacity(n_el * nq),
            scaled_weights: Vec::with_capacity(n_el * nq),
            values: Vec::with_capacity(n_el * nq * (p + 1)),
            d1: Vec::with_capacity(n_el * nq * (p + 1)),
            d2: Vec::with_capacity(n_el * nq * (p + 1)),
            d3: if p >= 3 {
                Some(Vec::with_capacity(n_el * nq * (p + 1)))
            } else {
                None
            },
        };
        for e in 0..n_el {
            let x0 = basis.element_start(e);
            // interior quadrature points of element e always lie in span e+p
            let first = basis.element_of(x0 + 0.5 * h)?;
            plan.first_dof.push(first);
            for (pt, w) in rule.points.iter().zip(&rule.weights) {
                let x = x0 + h * pt;
                let table = basis.evaluate_ders(x, n_ders)?;
                plan.x.push(x);
                plan.scaled_weights.push(w * h);
                plan.values.extend_from_slice(&table[0]);
                plan.d1.extend_from_slice(&table[1]);
                plan.d2.extend_from_slice(&table[2]);
                if let Some(d3) = plan.d3.as_mut() {
                    d3.extend_from_slice(&table[3]);
                }
            }
        }
        Ok(plan)
    }

    pub fn n_points(&self) -> usize {
        self.x.len()
    }

    fn table(&self, order: usize) -> &[f64] {
        match order {
            0 => &self.values,
            1 => &self.d1,
            2 => &self.d2,
            3 => self
                .d3
                .as_ref()
                .expect("third derivatives need degree >= 3"),
            _ => panic!("derivative order {order} not cached"),
        }
    }

    /// Gram matrix of the `order`-th derivatives, full DOF set.
    pub fn gram(&self, order: usize) -> BandedMatrix {
        let mut m = BandedMatrix::zeros(self.n_dof, self.degree);
        self.weighted_gram_into(&mut m, order, None)
            .expect("unit weight cannot mismatch");
        m
    }

    /// Assembles ∫ w φᵢ^(order) φⱼ^(order) into `out` (full DOF set).
    pub fn weighted_gram_into(
        &self,
        out: &mut BandedMatrix,
        order: usize,
        weight: Option<&[f64]>,
    ) -> Result<()> {
        if let Some(w) = weight {
            if w.len() != self.n_points() {
                return Err(Error::WeightLengthMismatch {
                    expected: self.n_points(),
                    got: w.len(),
                });
            }
        }
        assert_eq!(out.dim(), self.n_dof);
        out.fill_zero();
        let table = self.table(order);
        let na = self.degree + 1;
        for e in 0..self.n_elements {
            let first = self.first_dof[e];
            for q in 0..self.points_per_element {
                let gq = e * self.points_per_element + q;
                let wq = self.scaled_weights[gq] * weight.map_or(1.0, |w| w[gq]);
                let row = &table[gq * na..(gq + 1) * na];
                for a in 0..na {
                    for b in a..na {
                        out.add(first + a, first + b, wq * row[a] * row[b]);
                    }
                }
            }
        }
        Ok(())
    }

    /// Load vector ∫ g φᵢ from per-quadrature-point samples of g.
    pub fn load_from_samples(&self, g: &[f64]) -> Result<Vec<f64>> {
        if g.len() != self.n_points() {
            return Err(Error::WeightLengthMismatch {
                expected: self.n_points(),
                got: g.len(),
            });
        }
        let na = self.degree + 1;
        let mut load = vec![0.0; self.n_dof];
        for e in 0..self.n_elements {
            let first = self.first_dof[e];
            for q in 0..self.points_per_element {
                let gq = e * self.points_per_element + q;
                let wq = self.scaled_weights[gq] * g[gq];
                if wq == 0.0 {
                    continue;
                }
                let row = &self.values[gq * na..(gq + 1) * na];
                for a in 0..na {
                    load[first + a] += wq * row[a];
                }
            }
        }
        Ok(load)
    }

    /// Samples the `order`-th spatial derivative of a spline field (full
    /// coefficients) at every quadrature point.
    pub fn sample_field(&self, coefs: &[f64], order: usize, out: &mut Vec<f64>) {
        assert_eq!(coefs.len(), self.n_dof);
        let table = self.table(order);
        let na = self.degree + 1;
        out.clear();
        out.reserve(self.n_points());
        for e in 0..self.n_elements {
            let first = self.first_dof[e];
            for q in 0..self.points_per_element {
                let gq = e * self.points_per_element + q;
                let row = &table[gq * na..(gq + 1) * na];
                let mut acc = 0.0;
                for a in 0..na {
                    acc += row[a] * coefs[first + a];
                }
                out.push(acc);
            }
        }
    }
}

/// Map between the full DOF set and the free DOFs after removing the two
/// boundary functions.
#[derive(Debug, Clone)]
pub struct ConstraintMap {
    n_full: usize,
}

impl ConstraintMap {
    pub fn dirichlet(n_full: usize) -> Self {
        assert!(n_full >= 2, "need the two boundary DOFs");
        ConstraintMap { n_full }
    }

    pub fn n_full(&self) -> usize {
        self.n_full
    }

    pub fn n_free(&self) -> usize {
        self.n_full - 2
    }

    pub fn full_index(&self, free: usize) -> usize {
        free + 1
    }

    /// Drops the first and last row/column.
    pub fn restrict_matrix(&self, m: &BandedMatrix) -> BandedMatrix {
        assert_eq!(m.dim(), self.n_full);
        let w = m.semi_bandwidth();
        let nf = self.n_free();
        let mut out = BandedMatrix::zeros(nf, w);
        for i in 0..nf {
            for d in 0..=w {
                if i + d < nf {
                    let v = m.get(i + 1, i + 1 + d);
                    if v != 0.0 {
                        out.add(i, i + d, v);
                    }
                }
            }
        }
        out
    }

    pub fn restrict_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n_full);
        v[1..self.n_full - 1].to_vec()
    }

    /// Zero-extends a free vector with the boundary values.
    pub fn extend_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n_free());
        let mut out = vec![0.0; self.n_full];
        out[1..self.n_full - 1].copy_from_slice(v);
        out
    }
}

/// Mass, stiffness and broken-derivative Gram matrices on the full and the
/// constrained DOF sets.
#[derive(Debug, Clone)]
pub struct AssembledOperators {
    pub mass_full: BandedMatrix,
    pub stiffness_full: BandedMatrix,
    pub d2_full: BandedMatrix,
    pub d3_full: Option<BandedMatrix>,
    pub mass: BandedMatrix,
    pub stiffness: BandedMatrix,
    pub d2: BandedMatrix,
    pub d3: Option<BandedMatrix>,
    pub map: ConstraintMap,
}

/// Assembles all operators for the basis/rule pair.
pub fn assemble(basis: &SplineBasis, rule: &QuadratureRule) -> Result<AssembledOperators> {
    let plan = QuadraturePlan::new(basis, rule)?;
    Ok(assemble_with_plan(&plan))
}

pub fn assemble_with_plan(plan: &QuadraturePlan) -> AssembledOperators {
    let mass_full = plan.gram(0);
    let stiffness_full = plan.gram(1);
    let d2_full = plan.gram(2);
    let d3_full = plan.d3.as_ref().map(|_| plan.gram(3));
    let map = ConstraintMap::dirichlet(plan.n_dof);
    AssembledOperators {
        mass: map.restrict_matrix(&mass_full),
        stiffness: map.restrict_matrix(&stiffness_full),
        d2: map.restrict_matrix(&d2_full),
        d3: d3_full.as_ref().map(|m| map.restrict_matrix(m)),
        mass_full,
        stiffness_full,
        d2_full,
        d3_full,
        map,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spline::build_basis;
    use approx::assert_relative_eq;

    fn plan_for(degree: usize, n_el: usize, domain: (f64, f64)) -> QuadraturePlan {
        let basis = build_basis(degree, n_el, domain).unwrap();
        let rule = QuadratureRule::gauss_legendre(degree + 1);
        QuadraturePlan::new(&basis, &rule).unwrap()
    }

    #[test]
    fn mass_entries_sum_to_domain_length() {
        let plan = plan_for(2, 249, (0.0, 0.2));
        let ops = assemble_with_plan(&plan);
        assert_relative_eq!(ops.mass_full.entry_sum(), 0.2, max_relative = 1e-12);
    }

    #[test]
    fn stiffness_annihilates_constants_before_constraints() {
        let plan = plan_for(2, 7, (0.0, 1.0));
        let ops = assemble_with_plan(&plan);
        let ones = vec![1.0; ops.mass_full.dim()];
        let kx = ops.stiffness_full.mat_vec(&ones);
        for v in kx {
            assert!(v.abs() <= 1e-12, "K*1 entry {v}");
        }
    }

    #[test]
    fn one_element_quadratic_mass_matches_exact_rationals() {
        // Bernstein basis on [0, 1]: exact Beta-function integrals.
        let plan = plan_for(2, 1, (0.0, 1.0));
        let ops = assemble_with_plan(&plan);
        let exact = [
            [1.0 / 5.0, 1.0 / 10.0, 1.0 / 30.0],
            [1.0 / 10.0, 2.0 / 15.0, 1.0 / 10.0],
            [1.0 / 30.0, 1.0 / 10.0, 1.0 / 5.0],
        ];
        for i in 0..3 {
            for j in 0..3 {
                assert_relative_eq!(ops.mass_full.get(i, j), exact[i][j], max_relative = 1e-14);
            }
        }
    }

    #[test]
    fn one_element_linear_mass_matches_exact_rationals() {
        let plan = plan_for(1, 1, (0.0, 1.0));
        let ops = assemble_with_plan(&plan);
        let exact = [[1.0 / 3.0, 1.0 / 6.0], [1.0 / 6.0, 1.0 / 3.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert_relative_eq!(ops.mass_full.get(i, j), exact[i][j], max_relative = 1e-14);
            }
        }
    }

    #[test]
    fn weighted_mass_with_unit_weight_equals_mass() {
        let plan = plan_for(2, 5, (0.0, 0.2));
        let ops = assemble_with_plan(&plan);
        let w = vec![1.0; plan.n_points()];
        let mut mw = BandedMatrix::zeros(plan.n_dof, plan.degree);
        plan.weighted_gram_into(&mut mw, 0, Some(&w)).unwrap();
        for i in 0..plan.n_dof {
            for j in 0..plan.n_dof {
                assert_relative_eq!(mw.get(i, j), ops.mass_full.get(i, j), max_relative = 1e-15);
            }
        }
    }

    #[test]
    fn weighted_mass_with_zero_weight_is_zero() {
        let plan = plan_for(2, 5, (0.0, 0.2));
        let w = vec![0.0; plan.n_points()];
        let mut mw = BandedMatrix::zeros(plan.n_dof, plan.degree);
        plan.weighted_gram_into(&mut mw, 0, Some(&w)).unwrap();
        assert_eq!(mw.entry_sum(), 0.0);
    }

    #[test]
    fn weighted_mass_linear_weight_exact_integrals() {
        // w(x) = x, degree 1, one element on [0, 1]:
        //   ∫ x (1-x)^2 = 1/12, ∫ x^2 (1-x) = 1/12, ∫ x^3 = 1/4.
        let plan = plan_for(1, 1, (0.0, 1.0));
        let w: Vec<f64> = plan.x.clone();
        let mut mw = BandedMatrix::zeros(plan.n_dof, plan.degree);
        plan.weighted_gram_into(&mut mw, 0, Some(&w)).unwrap();
        assert_relative_eq!(mw.get(0, 0), 1.0 / 12.0, max_relative = 1e-14);
        assert_relative_eq!(mw.get(0, 1), 1.0 / 12.0, max_relative = 1e-14);
        assert_relative_eq!(mw.get(1, 1), 1.0 / 4.0, max_relative = 1e-14);
    }

    #[test]
    fn weight_length_mismatch_is_an_error() {
        let plan = plan_for(2, 5, (0.0, 0.2));
        let w = vec![1.0; plan.n_points() - 1];
        let mut mw = BandedMatrix::zeros(plan.n_dof, plan.degree);
        assert!(matches!(
            plan.weighted_gram_into(&mut mw, 0, Some(&w)),
            Err(Error::WeightLengthMismatch { .. })
        ));
    }

    #[test]
    fn constrained_mass_is_spd_and_matches_dense_oracle() {
        // 4-element quadratic mesh solved against brute-force dense
        // Gaussian elimination without pivoting-free shortcuts.
        let plan = plan_for(2, 4, (0.0, 1.0));
        let ops = assemble_with_plan(&plan);
        let n = ops.mass.dim();
        let rhs: Vec<f64> = (0..n).map(|i| 1.0 + i as f64).collect();
        let x = ops.mass.factor().unwrap().solve(&rhs);

        // dense oracle
        let mut a = vec![vec![0.0; n + 1]; n];
        for i in 0..n {
            for j in 0..n {
                a[i][j] = ops.mass.get(i, j);
            }
            a[i][n] = rhs[i];
        }
        for k in 0..n {
            let p = (k..n)
                .max_by(|&r, &s| a[r][k].abs().partial_cmp(&a[s][k].abs()).unwrap())
                .unwrap();
            a.swap(k, p);
            for i in (k + 1)..n {
                let f = a[i][k] / a[k][k];
                for j in k..=n {
                    a[i][j] -= f * a[k][j];
                }
            }
        }
        let mut y = vec![0.0; n];
        for i in (0..n).rev() {
            let mut acc = a[i][n];
            for j in (i + 1)..n {
                acc -= a[i][j] * y[j];
            }
            y[i] = acc / a[i][i];
        }
        for (xi, yi) in x.iter().zip(&y) {
            assert_relative_eq!(xi, yi, max_relative = 1e-13);
        }
    }

    #[test]
    fn load_from_constant_samples_sums_to_length() {
        let plan = plan_for(2, 9, (0.0, 0.2));
        let g = vec![1.0; plan.n_points()];
        let load = plan.load_from_samples(&g).unwrap();
        assert_relative_eq!(load.iter().sum::<f64>(), 0.2, max_relative = 1e-13);
    }

    #[test]
    fn sample_field_reproduces_interpolated_polynomial() {
        let basis = build_basis(2, 6, (0.0, 1.0)).unwrap();
        let rule = QuadratureRule::gauss_legendre(3);
        let plan = QuadraturePlan::new(&basis, &rule).unwrap();
        let coefs = basis.interpolate(|x| x * x).unwrap();
        let mut vals = Vec::new();
        plan.sample_field(&coefs, 0, &mut vals);
        let mut d1 = Vec::new();
        plan.sample_field(&coefs, 1, &mut d1);
        for (q, &x) in plan.x.iter().enumerate() {
            assert_relative_eq!(vals[q], x * x, max_relative = 1e-12);
            assert_relative_eq!(d1[q], 2.0 * x, max_relative = 1e-11, epsilon = 1e-13);
        }
    }
}
