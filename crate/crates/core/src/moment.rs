//! Moment problems `∫_{−T/2}^{T/2} v(t + T/2) e^{λ̄_n t} dt = c_n` and their solutions.
//!
//! A control `v` on `(0, T)` steers mode `n` of the damped system to rest exactly
//! when the moments against `e^{λ̄_n t}` and `e^{λ̄_{−n} t} = e^{λ_n t}` take the
//! values returned by [`moment_rhs`].

use alloc::vec::Vec;

use crate::biorth::BiorthogonalFamily;
use crate::linalg::{hermitian_eigen, CMatrix};
use crate::modal::{ControlSignal, ModalState};
use crate::quad::GaussLegendre;
use crate::spectrum::{lambda, lambda_bar, signed_indices};
#[allow(unused_imports)]
use crate::Float;
use crate::{Error, Result, C64};

/// `−e^{−λ̄_n T/2}(û¹_{|n|} + λ_n û⁰_{|n|})/f̂_{|n|}`.
pub fn moment_rhs(n: i64, data: &ModalState, horizon: f64, eps: f64, alpha: f64) -> Result<C64> {
    if n == 0 {
        return Err(Error::InvalidMode(0));
    }
    let k = n.unsigned_abs() as u32;
    let f = data.f_hat(k).ok_or(Error::ZeroProfileCoefficient(k))?;
    if f == C64::new(0.0, 0.0) {
        return Err(Error::ZeroProfileCoefficient(k));
    }
    let (u0, u1) = match data.mode(k) {
        Some(m) => (m.u0, m.u1),
        None => return Ok(C64::new(0.0, 0.0)),
    };
    let lb = lambda_bar(n, eps, alpha);
    let l = lambda(n, eps, alpha);
    Ok(-(-lb * (horizon / 2.0)).exp() * (u1 + l * u0) / f)
}

/// The finite moment system for modes `1 … N`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MomentSystem {
    pub epsilon: f64,
    pub alpha: f64,
    pub horizon: f64,
    /// `−N … −1, 1 … N`.
    pub indices: Vec<i64>,
    pub rhs: Vec<C64>,
}

impl MomentSystem {
    /// Every mode up to `n_max` is constrained; modes absent from `data` start at rest.
    pub fn new(data: &ModalState, n_max: u32, horizon: f64, eps: f64, alpha: f64) -> Result<Self> {
        data.check()?;
        if !(horizon > 0.0) {
            return Err(Error::InvalidParameter("horizon must be positive"));
        }
        if data.max_mode() > n_max {
            return Err(Error::DimensionMismatch {
                expected: n_max as usize,
                found: data.max_mode() as usize,
            });
        }
        let indices = signed_indices(n_max);
        let rhs = indices
            .iter()
            .map(|&n| moment_rhs(n, data, horizon, eps, alpha))
            .collect::<Result<Vec<_>>>()?;
        Ok(MomentSystem {
            epsilon: eps,
            alpha,
            horizon,
            indices,
            rhs,
        })
    }

    /// `∫₀^T v(s) e^{λ̄_n (s − T/2)} ds − c_n` for every index.
    pub fn residuals(&self, v: &ControlSignal) -> Vec<C64> {
        self.indices
            .iter()
            .zip(&self.rhs)
            .map(|(&n, c)| {
                v.moment(lambda_bar(n, self.epsilon, self.alpha), self.horizon / 2.0) - c
            })
            .collect()
    }
}

/// `∫_{−h}^{h} e^{st} dt = 2 sinh(sh)/s`, with the series near `s = 0`.
pub fn exp_integral(s: C64, h: f64) -> C64 {
    let w = s * h;
    if w.norm() < 1e-3 {
        let w2 = w * w;
        return (w2 * (w2 / 120.0 + 1.0 / 6.0) + 1.0) * (2.0 * h);
    }
    (w.exp() - (-w).exp()) / s
}

/// Gram matrix `G_nk = ∫_{−T/2}^{T/2} e^{λ̄_n t} e^{λ_k t} dt`.
pub fn gram_matrix(indices: &[i64], eps: f64, alpha: f64, horizon: f64) -> CMatrix {
    let lb: Vec<C64> = indices.iter().map(|&n| lambda_bar(n, eps, alpha)).collect();
    CMatrix::from_fn(indices.len(), indices.len(), |i, j| {
        exp_integral(lb[i] + lb[j].conj(), horizon / 2.0)
    })
}

fn equilibrate(g: &CMatrix) -> (CMatrix, Vec<f64>) {
    let d: Vec<f64> = (0..g.rows).map(|i| 1.0 / g[(i, i)].re.sqrt()).collect();
    (
        CMatrix::from_fn(g.rows, g.cols, |i, j| g[(i, j)] * (d[i] * d[j])),
        d,
    )
}

/// Condition numbers of the Gram matrix, raw and after diagonal scaling.
pub fn gram_condition(indices: &[i64], eps: f64, alpha: f64, horizon: f64) -> Result<(f64, f64)> {
    let g = gram_matrix(indices, eps, alpha, horizon);
    let raw = hermitian_eigen(&g)?.condition();
    let (s, _) = equilibrate(&g);
    Ok((raw, hermitian_eigen(&s)?.condition()))
}

/// Minimal-norm solution of a moment system.
#[derive(Debug, Clone, PartialEq)]
pub struct GramSolution {
    pub control: ControlSignal,
    /// `v(s) = Σ_k β_k e^{λ_k (s − T/2)}`, same order as the system indices.
    pub coefficients: Vec<C64>,
    pub condition: f64,
    pub condition_equilibrated: f64,
}

impl GramSolution {
    /// Exact `L²(0,T)` norm `√(β^H G β)`.
    pub fn norm(&self, sys: &MomentSystem) -> f64 {
        let g = gram_matrix(&sys.indices, sys.epsilon, sys.alpha, sys.horizon);
        let gb = g.mul_vec(&self.coefficients);
        let q: C64 = self
            .coefficients
            .iter()
            .zip(&gb)
            .map(|(b, x)| b.conj() * x)
            .sum();
        q.re.max(0.0).sqrt()
    }
}

/// Relative eigenvalue floor below which the scaled Gram matrix counts as singular.
pub const GRAM_RCOND: f64 = 1e-15;

/// Solves `Gβ = c` through the eigen-decomposition of the diagonally scaled Gram
/// matrix and samples the control at `intervals + 1` points of `[0, T]`.
///
/// `ridge` (zero by default) is added to the scaled spectrum; it is the only regularization.
pub fn minnorm_control(sys: &MomentSystem, intervals: usize, ridge: f64) -> Result<GramSolution> {
    let g = gram_matrix(&sys.indices, sys.epsilon, sys.alpha, sys.horizon);
    let condition = hermitian_eigen(&g)?.condition();
    let (s, d) = equilibrate(&g);
    let eig = hermitian_eigen(&s)?;
    let condition_equilibrated = eig.condition();
    let b: Vec<C64> = sys.rhs.iter().zip(&d).map(|(c, di)| c * *di).collect();
    let y = eig.solve(&b, ridge, GRAM_RCOND)?;
    let coefficients: Vec<C64> = y.iter().zip(&d).map(|(v, di)| v * *di).collect();
    let lam: Vec<C64> = sys
        .indices
        .iter()
        .map(|&n| lambda(n, sys.epsilon, sys.alpha))
        .collect();
    let half = sys.horizon / 2.0;
    let mut control = ControlSignal::from_fn(0.0, sys.horizon, intervals.max(1), |s| {
        lam.iter()
            .zip(&coefficients)
            .map(|(l, b)| b * (l * (s - half)).exp())
            .sum()
    });
    control.is_real_expected = conjugate_symmetric(&sys.indices, &sys.rhs);
    Ok(GramSolution {
        control,
        coefficients,
        condition,
        condition_equilibrated,
    })
}

fn conjugate_symmetric(indices: &[i64], rhs: &[C64]) -> bool {
    indices.iter().zip(rhs).all(|(&n, c)| {
        indices
            .iter()
            .position(|&k| k == -n)
            .map(|j| (rhs[j] - c.conj()).norm() <= 1e-14 * (1.0 + c.norm()))
            .unwrap_or(false)
    })
}

/// `v(s) = Σ_m c_m f_m(s − T/2)` on `intervals + 1` points of `[0, T]`.
pub fn synthesize_control_series(
    sys: &MomentSystem,
    family: &BiorthogonalFamily,
    intervals: usize,
) -> Result<ControlSignal> {
    if 2.0 * family.support > sys.horizon * (1.0 + 1e-12) {
        return Err(Error::HorizonTooShort {
            needed: 2.0 * family.support,
            given: sys.horizon,
        });
    }
    for &n in &sys.indices {
        if family.member(n).is_none() {
            return Err(Error::InvalidMode(n));
        }
    }
    let half = sys.horizon / 2.0;
    let mut v = ControlSignal::from_fn(0.0, sys.horizon, intervals.max(1), |s| {
        sys.indices
            .iter()
            .zip(&sys.rhs)
            .map(|(&n, c)| c * family.value_at(n, s - half).unwrap_or_default())
            .sum()
    });
    v.is_real_expected = conjugate_symmetric(&sys.indices, &sys.rhs);
    Ok(v)
}

/// `H_nk = ∫_{−T}^{T} e^{λ_n t} e^{λ̄_k t} dt`, so that `∫|Σβ_n e^{λ_n t}|² = Σ β_n β̄_k H_nk`.
pub fn ingham_gram(indices: &[i64], eps: f64, alpha: f64, horizon: f64) -> CMatrix {
    let l: Vec<C64> = indices.iter().map(|&n| lambda(n, eps, alpha)).collect();
    CMatrix::from_fn(indices.len(), indices.len(), |i, j| {
        exp_integral(l[i] + l[j].conj(), horizon)
    })
}

fn ingham_denominator(coeffs: &[(i64, C64)], eps: f64, alpha: f64, omega_w: f64) -> Result<f64> {
    let den: f64 = coeffs
        .iter()
        .map(|(n, b)| {
            b.norm_sqr() * (-omega_w * eps * (n.unsigned_abs() as f64).powf(2.0 * alpha)).exp()
        })
        .sum();
    if den == 0.0 {
        return Err(Error::InvalidParameter("all coefficients are zero"));
    }
    Ok(den)
}

/// `∫_{−T}^{T}|Σβ_n e^{λ_n t}|²dt / Σ|β_n|² e^{−ω ε|n|^{2α}}` from the closed-form Gram expansion.
pub fn ingham_ratio(
    coeffs: &[(i64, C64)],
    eps: f64,
    alpha: f64,
    horizon: f64,
    omega_w: f64,
) -> Result<f64> {
    if !(horizon > 0.0) {
        return Err(Error::InvalidParameter("horizon must be positive"));
    }
    let den = ingham_denominator(coeffs, eps, alpha, omega_w)?;
    let idx: Vec<i64> = coeffs.iter().map(|c| c.0).collect();
    let h = ingham_gram(&idx, eps, alpha, horizon);
    let mut num = C64::new(0.0, 0.0);
    for (i, (_, bi)) in coeffs.iter().enumerate() {
        for (j, (_, bj)) in coeffs.iter().enumerate() {
            num += bi * bj.conj() * h[(i, j)];
        }
    }
    Ok(num.re / den)
}

/// Same ratio with the numerator integrated by composite Gauss–Legendre quadrature.
pub fn ingham_ratio_quadrature(
    coeffs: &[(i64, C64)],
    eps: f64,
    alpha: f64,
    horizon: f64,
    omega_w: f64,
    panels: usize,
) -> Result<f64> {
    if !(horizon > 0.0) {
        return Err(Error::InvalidParameter("horizon must be positive"));
    }
    let den = ingham_denominator(coeffs, eps, alpha, omega_w)?;
    let l: Vec<(C64, C64)> = coeffs
        .iter()
        .map(|&(n, b)| (lambda(n, eps, alpha), b))
        .collect();
    let gl = GaussLegendre::new(16);
    let num: f64 = gl.composite(-horizon, horizon, panels.max(1), |t| {
        let s: C64 = l.iter().map(|(lm, b)| b * (lm * t).exp()).sum();
        s.norm_sqr()
    });
    Ok(num / den)
}

/// Exact infimum of [`ingham_ratio`] over coefficients supported on `indices`:
/// the smallest eigenvalue of `S = W^{-1/2} H W^{-1/2}`.
///
/// Computed as `1/λ_max(S⁻¹)` with `S⁻¹` formed from the diagonally scaled matrix,
/// which keeps the answer accurate when the weights span many orders of magnitude.
pub fn ingham_infimum(
    indices: &[i64],
    eps: f64,
    alpha: f64,
    horizon: f64,
    omega_w: f64,
) -> Result<f64> {
    let h = ingham_gram(indices, eps, alpha, horizon);
    let w: Vec<f64> = indices
        .iter()
        .map(|n| (0.5 * omega_w * eps * (n.unsigned_abs() as f64).powf(2.0 * alpha)).exp())
        .collect();
    let s = CMatrix::from_fn(h.rows, h.cols, |i, j| h[(i, j)] * (w[i] * w[j]));
    let (a, d) = equilibrate(&s);
    let eig = hermitian_eigen(&a)?;
    if eig.values.first().is_none_or(|&v| v <= 0.0) {
        return Ok(0.0);
    }
    let n = s.rows;
    let inv = CMatrix::from_fn(n, n, |i, j| {
        let mut acc = C64::new(0.0, 0.0);
        for (k, lam) in eig.values.iter().enumerate() {
            acc += eig.vectors[(i, k)] * eig.vectors[(j, k)].conj() / *lam;
        }
        acc * (d[i] * d[j])
    });
    let top = hermitian_eigen(&inv)?.values.last().copied().unwrap_or(0.0);
    Ok(if top > 0.0 { 1.0 / top } else { 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::biorth::sinc_limit_family;
    use crate::modal::{ModeData, ProfileCoeff};
    use core::f64::consts::PI;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn resonant() -> ModalState {
        ModalState::new(
            vec![ModeData {
                n: 1,
                u0: c(PI / 2.0),
                u1: c(0.0),
            }],
            vec![ProfileCoeff {
                n: 1,
                f_hat: c(PI / 2.0),
            }],
        )
        .unwrap()
    }

    #[test]
    fn rhs_examples() {
        let d = resonant();
        let r = moment_rhs(1, &d, 2.0 * PI, 0.0, 0.25).unwrap();
        assert!((r - C64::i()).norm() < 1e-15);
        let r = moment_rhs(-1, &d, 2.0 * PI, 0.0, 0.25).unwrap();
        assert!((r + C64::i()).norm() < 1e-15);
        let z = d.with_coefficients(&[(c(0.0), c(0.0))]);
        assert_eq!(moment_rhs(1, &z, 2.0 * PI, 0.1, 0.25).unwrap(), c(0.0));
        let bad = ModalState {
            profile: vec![ProfileCoeff {
                n: 1,
                f_hat: c(0.0),
            }],
            ..d
        };
        assert_eq!(
            moment_rhs(1, &bad, 1.0, 0.0, 0.25),
            Err(Error::ZeroProfileCoefficient(1))
        );
    }

    #[test]
    fn gram_examples() {
        let idx = signed_indices(3);
        let g = gram_matrix(&idx, 0.0, 0.25, 2.0 * PI);
        for i in 0..6 {
            for j in 0..6 {
                let want = if i == j { 2.0 * PI } else { 0.0 };
                assert!((g[(i, j)] - want).norm() < 1e-13);
            }
        }
        let g = gram_matrix(&[1], 0.1, 0.25, 2.0);
        assert!((g[(0, 0)].re - 2.0 * (0.2f64).sinh() / 0.2).abs() < 1e-14);
        assert!((g[(0, 0)].re - 2.01336).abs() < 1e-5);
    }

    #[test]
    fn resonant_controls() {
        let d = resonant();
        let sys = MomentSystem::new(&d, 1, 2.0 * PI, 0.0, 0.25).unwrap();
        let sol = minnorm_control(&sys, 4096, 0.0).unwrap();
        let want = ControlSignal::from_fn(0.0, 2.0 * PI, 4096, |t| c(t.sin() / PI));
        assert!(sol.control.sup_distance(&want) < 1e-12);
        assert!((sol.norm(&sys) - (1.0 / PI).sqrt()).abs() < 1e-13);
        let fam = sinc_limit_family(&[-1, 1], PI / 2048.0, 0.0).unwrap();
        let v = synthesize_control_series(&sys, &fam, 4096).unwrap();
        assert!(v.sup_distance(&want) < 1e-12);
        assert!(v.max_imag() < 1e-15);
    }

    #[test]
    fn ingham_examples() {
        let r = ingham_ratio(&[(1, c(1.0))], 0.0, 0.25, PI, 1.0).unwrap();
        assert!((r - 2.0 * PI).abs() < 1e-13);
        let co = [
            (1, C64::new(0.3, -1.0)),
            (-2, c(0.5)),
            (3, C64::new(0.0, 2.0)),
        ];
        for (e, a) in [(0.0, 0.25), (0.1, 0.75), (0.01, 0.25)] {
            let g = ingham_ratio(&co, e, a, 2.0 * PI, 2.0).unwrap();
            let q = ingham_ratio_quadrature(&co, e, a, 2.0 * PI, 2.0, 200).unwrap();
            assert!((g - q).abs() < 1e-10 * g, "{g} {q}");
            let scaled: Vec<(i64, C64)> = co
                .iter()
                .map(|&(n, b)| (n, b * C64::new(-3.0, 1.0)))
                .collect();
            assert!((ingham_ratio(&scaled, e, a, 2.0 * PI, 2.0).unwrap() - g).abs() < 1e-12 * g);
            assert!(ingham_infimum(&[1, -2, 3], e, a, 2.0 * PI, 2.0).unwrap() <= g);
        }
        assert!(ingham_ratio(&[(1, c(0.0))], 0.1, 0.25, 1.0, 1.0).is_err());
    }
}
