//! Small dense complex linear algebra: Hermitian eigen-decomposition by
//! cyclic Jacobi rotations and a spectral solve built on it.

use alloc::vec::Vec;

#[allow(unused_imports)]
use crate::Float;
use crate::{Error, Result, C64};

/// Row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: alloc::vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        (0..self.rows)
            .map(|i| {
                let row = &self.data[i * self.cols..(i + 1) * self.cols];
                row.iter()
                    .zip(x)
                    .fold(C64::new(0.0, 0.0), |a, (r, v)| a + r * v)
            })
            .collect()
    }

    /// Largest entrywise distance to the identity.
    pub fn max_deviation_from_identity(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.rows {
            for j in 0..self.cols {
                let target = if i == j { 1.0 } else { 0.0 };
                m = m.max((self[(i, j)] - target).norm());
            }
        }
        m
    }

    /// `max |a_ij − conj(a_ji)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.rows {
            for j in 0..self.cols {
                m = m.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        m
    }
}

impl core::ops::Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigen-decomposition `A = V diag(values) V^H` of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Eigenvectors stored as columns, same order as `values`.
    pub vectors: CMatrix,
}

/// Cyclic Jacobi eigen-decomposition; only the Hermitian part of `a` is used.
pub fn hermitian_eigen(a: &CMatrix) -> Result<HermitianEigen> {
    if a.rows != a.cols {
        return Err(Error::DimensionMismatch {
            expected: a.rows,
            found: a.cols,
        });
    }
    let n = a.rows;
    let mut m = CMatrix::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)].conj()));
    let mut v = CMatrix::identity(n);
    let scale = m.data.iter().fold(0.0f64, |s, x| s.max(x.norm()));
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= 1e-300 || off.sqrt() <= 1e-17 * scale * 1e-3 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                if r < 1e-18 * (app.abs() + aqq.abs()) * 1e-2 {
                    m[(p, q)] = C64::new(0.0, 0.0);
                    m[(q, p)] = C64::new(0.0, 0.0);
                    continue;
                }
                let u = apq / r;
                let theta = (aqq - app) / (2.0 * r);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let uc = u.conj();
                for k in 0..n {
                    let akp = m[(k, p)];
                    let akq = m[(k, q)];
                    m[(k, p)] = akp * c - akq * (uc * s);
                    m[(k, q)] = akp * s + akq * (uc * c);
                }
                for k in 0..n {
                    let apk = m[(p, k)];
                    let aqk = m[(q, k)];
                    m[(p, k)] = apk * c - aqk * (u * s);
                    m[(q, k)] = apk * s + aqk * (u * c);
                }
                m[(p, q)] = C64::new(0.0, 0.0);
                m[(q, p)] = C64::new(0.0, 0.0);
                m[(p, p)] = C64::new(m[(p, p)].re, 0.0);
                m[(q, q)] = C64::new(m[(q, q)].re, 0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c - vkq * (uc * s);
                    v[(k, q)] = vkp * s + vkq * (uc * c);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        m[(i, i)]
            .re
            .partial_cmp(&m[(j, j)].re)
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(HermitianEigen { values, vectors })
}

impl HermitianEigen {
    /// `λ_max / λ_min`, infinite when the smallest eigenvalue is not positive.
    pub fn condition(&self) -> f64 {
        let lo = self.values.first().copied().unwrap_or(0.0);
        let hi = self.values.last().copied().unwrap_or(0.0);
        if lo <= 0.0 {
            f64::INFINITY
        } else {
            hi / lo
        }
    }

    /// Solves `A x = b` through the spectrum, adding `ridge` to every eigenvalue.
    ///
    /// Eigenvalues not exceeding `rcond · λ_max` (after the ridge) make the
    /// system numerically singular and are reported as an error.
    pub fn solve(&self, b: &[C64], ridge: f64, rcond: f64) -> Result<Vec<C64>> {
        let n = self.values.len();
        if b.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: b.len(),
            });
        }
        let hi = self.values.last().copied().unwrap_or(0.0) + ridge;
        let mut x = alloc::vec![C64::new(0.0, 0.0); n];
        for j in 0..n {
            let lam = self.values[j] + ridge;
            if !(lam > rcond * hi) {
                return Err(Error::Singular);
            }
            let mut proj = C64::new(0.0, 0.0);
            for i in 0..n {
                proj += self.vectors[(i, j)].conj() * b[i];
            }
            proj /= lam;
            for i in 0..n {
                x[i] += self.vectors[(i, j)] * proj;
            }
        }
        Ok(x)
    }
}

/// Least-squares line `y ≈ c0 + c1 x`.
pub fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (my - slope * mx, slope)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn eigen_of_small_hermitian() {
        let a = CMatrix {
            rows: 2,
            cols: 2,
            data: alloc::vec![c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)],
        };
        let e = hermitian_eigen(&a).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!((e.values[1] - 3.0).abs() < 1e-14);
        assert!((e.condition() - 3.0).abs() < 1e-13);
    }

    #[test]
    fn reconstructs_random_hermitian() {
        let n = 9;
        let mut a = CMatrix::zeros(n, n);
        let mut s = 1u64;
        let mut rnd = || {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for i in 0..n {
            a[(i, i)] = c(rnd() + 3.0, 0.0);
            for j in (i + 1)..n {
                let z = c(rnd(), rnd());
                a[(i, j)] = z;
                a[(j, i)] = z.conj();
            }
        }
        let e = hermitian_eigen(&a).unwrap();
        for i in 0..n {
            for j in 0..n {
                let mut r = c(0.0, 0.0);
                for k in 0..n {
                    r += e.vectors[(i, k)] * e.values[k] * e.vectors[(j, k)].conj();
                }
                assert!((r - a[(i, j)]).norm() < 1e-13);
            }
        }
        let b: Vec<C64> = (0..n).map(|i| c(i as f64, 1.0)).collect();
        let x = e.solve(&b, 0.0, 1e-15).unwrap();
        let ax = a.mul_vec(&x);
        for (u, v) in ax.iter().zip(&b) {
            assert!((u - v).norm() < 1e-12);
        }
    }

    #[test]
    fn line_fit() {
        let (c0, c1) = fit_line(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]);
        assert!((c0 - 1.0).abs() < 1e-14 && (c1 - 2.0).abs() < 1e-14);
    }
}
