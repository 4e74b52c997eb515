//! Symmetric banded matrices and their LDLᵀ factorization.
//!
//! Every operator assembled from a degree-p spline basis has semi-bandwidth p,
//! so the linear systems solved at each Newmark step are small banded SPD
//! systems. The factorization is a plain symmetric LDLᵀ without pivoting; a
//! non-positive or non-finite pivot is reported as a failure instead of being
//! regularized away.

use crate::error::{Error, Result};

/// Symmetric banded matrix, stored by upper diagonals.
///
/// `diag(d)[i]` holds `A[i][i+d]` for `d = 0..=semi_bandwidth`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix {
    n: usize,
    semi_bandwidth: usize,
    diags: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, semi_bandwidth: usize) -> Self {
        BandedMatrix {
            n,
            semi_bandwidth,
            diags: vec![0.0; n * (semi_bandwidth + 1)],
        }
    }

    /// Builds from a dense symmetric matrix; entries outside the band must be
    /// zero and the matrix must be symmetric.
    pub fn from_dense(a: &[Vec<f64>], semi_bandwidth: usize) -> Result<Self> {
        let n = a.len();
        let mut m = BandedMatrix::zeros(n, semi_bandwidth);
        for i in 0..n {
            if a[i].len() != n {
                return Err(Error::InvalidArgument("matrix is not square".into()));
            }
            for j in 0..n {
                if a[i][j] != a[j][i] {
                    return Err(Error::InvalidArgument(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
                if j.abs_diff(i) > semi_bandwidth && a[i][j] != 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "entry ({i}, {j}) lies outside semi-bandwidth {semi_bandwidth}"
                    )));
                }
                if j >= i && j - i <= semi_bandwidth {
                    *m.entry_mut(i, j - i) = a[i][j];
                }
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn semi_bandwidth(&self) -> usize {
        self.semi_bandwidth
    }

    fn entry_mut(&mut self, i: usize, d: usize) -> &mut f64 {
        &mut self.diags[d * self.n + i]
    }

    fn entry(&self, i: usize, d: usize) -> f64 {
        self.diags[d * self.n + i]
    }

    /// Symmetric read access; zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        if hi - lo > self.semi_bandwidth {
            0.0
        } else {
            self.entry(lo, hi - lo)
        }
    }

    /// Adds `v` to the (i, j) entry (and by symmetry to (j, i)).
    ///
    /// Panics if (i, j) lies outside the band; assembly loops only touch
    /// index pairs of active functions on a shared element, which are within
    /// the band by construction.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        assert!(
            hi - lo <= self.semi_bandwidth,
            "entry ({i}, {j}) outside semi-bandwidth {}",
            self.semi_bandwidth
        );
        *self.entry_mut(lo, hi - lo) += v;
    }

    pub fn fill_zero(&mut self) {
        self.diags.fill(0.0);
    }

    /// y = A x.
    pub fn mat_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let mut acc = self.entry(i, 0) * x[i];
            for d in 1..=self.semi_bandwidth {
                if i + d < self.n {
                    acc += self.entry(i, d) * x[i + d];
                }
                if i >= d {
                    acc += self.entry(i - d, d) * x[i - d];
                }
            }
            y[i] = acc;
        }
        y
    }

    /// xᵀ A x.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let ax = self.mat_vec(x);
        x.iter().zip(&ax).map(|(a, b)| a * b).sum()
    }

    /// Sum of all entries (both triangles).
    pub fn entry_sum(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            s += self.entry(i, 0);
            for d in 1..=self.semi_bandwidth {
                if i + d < self.n {
                    s += 2.0 * self.entry(i, d);
                }
            }
        }
        s
    }

    /// A + c B, elementwise on the band (dimensions and bandwidths must match).
    pub fn add_scaled(&mut self, other: &BandedMatrix, c: f64) {
        assert_eq!(self.n, other.n);
        assert_eq!(self.semi_bandwidth, other.semi_bandwidth);
        for (a, b) in self.diags.iter_mut().zip(&other.diags) {
            *a += c * b;
        }
    }

    pub fn scale(&mut self, c: f64) {
        for a in self.diags.iter_mut() {
            *a *= c;
        }
    }

    /// Factors A = L D Lᵀ with unit lower-triangular banded L.
    ///
    /// The assembled operators here are SPD, so a pivot d ≤ 0 signals an
    /// assembly or degeneracy bug and is reported, not patched.
    pub fn factor(&self) -> Result<BandedFactorization> {
        let n = self.n;
        let w = self.semi_bandwidth;
        let mut d = vec![0.0; n];
        // l[(k-1)*n + j] = L[j+k][j]
        let mut l = vec![0.0; n * w];
        for j in 0..n {
            let mut dj = self.entry(j, 0);
            let k_lo = j.saturating_sub(w);
            for k in k_lo..j {
                let ljk = l[(j - k - 1) * n + k];
                dj -= ljk * ljk * d[k];
            }
            if !(dj.is_finite() && dj > 0.0) {
                return Err(Error::FactorizationFailure {
                    pivot: j,
                    value: dj,
                });
            }
            d[j] = dj;
            let i_hi = (j + w).min(n - 1);
            for i in (j + 1)..=i_hi {
                let mut s = self.get(i, j);
                let k_lo = i.saturating_sub(w);
                for k in k_lo..j {
                    s -= l[(i - k - 1) * n + k] * l[(j - k - 1) * n + k] * d[k];
                }
                l[(i - j - 1) * n + j] = s / dj;
            }
        }
        Ok(BandedFactorization { n, w, d, l })
    }
}

/// Reusable LDLᵀ factorization of a [`BandedMatrix`].
#[derive(Debug, Clone)]
pub struct BandedFactorization {
    n: usize,
    w: usize,
    d: Vec<f64>,
    l: Vec<f64>,
}

impl BandedFactorization {
    /// Solves A x = rhs.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        assert_eq!(rhs.len(), self.n);
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.n;
        let w = self.w;
        // forward: L z = rhs
        for i in 0..n {
            let k_lo = i.saturating_sub(w);
            let mut acc = x[i];
            for k in k_lo..i {
                acc -= self.l[(i - k - 1) * n + k] * x[k];
            }
            x[i] = acc;
        }
        // diagonal
        for i in 0..n {
            x[i] /= self.d[i];
        }
        // backward: Lᵀ y = z
        for i in (0..n).rev() {
            let k_hi = (i + w).min(n - 1);
            let mut acc = x[i];
            for k in (i + 1)..=k_hi {
                acc -= self.l[(k - i - 1) * n + i] * x[k];
            }
            x[i] = acc;
        }
    }
}

/// Dense LU with partial pivoting.
///
/// Used once per simulation for the (banded but nonsymmetric) Greville
/// collocation system of the initial data; at a few hundred unknowns a dense
/// solve is a negligible setup cost.
#[derive(Debug, Clone)]
pub struct DenseLu {
    n: usize,
    a: Vec<f64>,
    piv: Vec<usize>,
}

impl DenseLu {
    pub fn factor(matrix: &[f64], n: usize) -> Result<Self> {
        assert_eq!(matrix.len(), n * n);
        let mut a = matrix.to_vec();
        let mut piv = vec![0usize; n];
        for k in 0..n {
            let mut p = k;
            let mut best = a[k * n + k].abs();
            for i in (k + 1)..n {
                let v = a[i * n + k].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best.is_finite() && best > 0.0) {
                return Err(Error::FactorizationFailure {
                    pivot: k,
                    value: a[p * n + k],
                });
            }
            piv[k] = p;
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
            }
            let pivot = a[k * n + k];
            for i in (k + 1)..n {
                let f = a[i * n + k] / pivot;
                a[i * n + k] = f;
                for j in (k + 1)..n {
                    a[i * n + j] -= f * a[k * n + j];
                }
            }
        }
        Ok(DenseLu { n, a, piv })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        assert_eq!(rhs.len(), self.n);
        let n = self.n;
        let mut x = rhs.to_vec();
        for k in 0..n {
            x.swap(k, self.piv[k]);
            for i in (k + 1)..n {
                x[i] -= self.a[i * n + k] * x[k];
            }
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in (i + 1)..n {
                acc -= self.a[i * n + j] * x[j];
            }
            x[i] = acc / self.a[i * n + i];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn l2(v: &[f64]) -> f64 {
        v.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    #[test]
    fn identity_solve_returns_input() {
        let mut m = BandedMatrix::zeros(5, 2);
        for i in 0..5 {
            m.add(i, i, 1.0);
        }
        let f = m.factor().unwrap();
        let rhs = vec![1.0, -2.0, 3.0, 0.5, 4.0];
        assert_eq!(f.solve(&rhs), rhs);
    }

    #[test]
    fn two_by_two_row_sums() {
        let m = BandedMatrix::from_dense(&[vec![2.0, 1.0], vec![1.0, 2.0]], 1).unwrap();
        let f = m.factor().unwrap();
        let x = f.solve(&[3.0, 3.0]);
        assert_relative_eq!(x[0], 1.0, max_relative = 1e-14);
        assert_relative_eq!(x[1], 1.0, max_relative = 1e-14);
    }

    #[test]
    fn zero_rhs_gives_zero_solution() {
        let m = BandedMatrix::from_dense(&[vec![2.0, 1.0], vec![1.0, 2.0]], 1).unwrap();
        let f = m.factor().unwrap();
        assert_eq!(f.solve(&[0.0, 0.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn singular_matrix_reports_pivot_index() {
        let m = BandedMatrix::from_dense(
            &[
                vec![1.0, 1.0, 0.0],
                vec![1.0, 1.0, 0.0],
                vec![0.0, 0.0, 1.0],
            ],
            1,
        )
        .unwrap();
        match m.factor() {
            Err(Error::FactorizationFailure { pivot, .. }) => assert_eq!(pivot, 1),
            other => panic!("expected factorization failure, got {other:?}"),
        }
    }

    #[test]
    fn asymmetric_dense_input_rejected() {
        let r = BandedMatrix::from_dense(&[vec![1.0, 2.0], vec![3.0, 1.0]], 1);
        assert!(matches!(r, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn factor_solve_is_bit_deterministic() {
        let mut m = BandedMatrix::zeros(40, 2);
        for i in 0..40 {
            m.add(i, i, 2.0 + (i as f64) * 0.01);
            if i + 1 < 40 {
                m.add(i, i + 1, -0.5);
            }
            if i + 2 < 40 {
                m.add(i, i + 2, 0.125);
            }
        }
        let rhs: Vec<f64> = (0..40).map(|i| (i as f64).sin()).collect();
        let x1 = m.factor().unwrap().solve(&rhs);
        let x2 = m.factor().unwrap().solve(&rhs);
        assert_eq!(x1, x2);
    }

    proptest! {
        // Random diagonally dominant SPD banded systems: the solve residual
        // must satisfy |A x - b| <= 1e-10 |b|.
        #[test]
        fn residual_bound_on_random_spd(
            n in 1usize..300,
            w in 1usize..4,
            seed in 0u64..1_000_000,
        ) {
            let w = w.min(n - 1);
            let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let mut next = || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((state >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
            };
            let mut m = BandedMatrix::zeros(n, w);
            for i in 0..n {
                for d in 1..=w {
                    if i + d < n {
                        m.add(i, i + d, 0.4 * next());
                    }
                }
            }
            for i in 0..n {
                let mut row = 0.0;
                for j in 0..n {
                    if j != i {
                        row += m.get(i, j).abs();
                    }
                }
                m.add(i, i, row + 0.5 + next().abs());
            }
            let rhs: Vec<f64> = (0..n).map(|_| next()).collect();
            let x = m.factor().unwrap().solve(&rhs);
            let ax = m.mat_vec(&x);
            let res: Vec<f64> = ax.iter().zip(&rhs).map(|(a, b)| a - b).collect();
            prop_assert!(l2(&res) <= 1e-10 * l2(&rhs).max(1e-300));
        }
    }

    #[test]
    fn dense_lu_solves_small_system() {
        // 3x3 with known solution [1, 2, 3]
        let a = vec![2.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 2.0];
        let lu = DenseLu::factor(&a, 3).unwrap();
        let x = lu.solve(&[4.0, 10.0, 8.0]);
        for (xi, ei) in x.iter().zip([1.0, 2.0, 3.0]) {
            assert_relative_eq!(*xi, ei, max_relative = 1e-13);
        }
    }
}
