//! Eigenvalue families, the weight function φ_ε, the root map ξ_ε and the
//! multiplier nodes a_n.

use alloc::vec::Vec;
use core::f64::consts::E;

use crate::config::is_critical;
#[allow(unused_imports)]
use crate::Float;
use crate::{Error, Result, C64};

/// Which eigenvalue family to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Family {
    /// `λ_n = i n + ε|n|^{2α}` of the damped system.
    Lambda,
    /// `μ_n = i n` of the undamped limit.
    Mu,
    /// `ν_n` of the variant with damping only, mainly diagnostic.
    Nu,
}

/// One eigenvalue with its index.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpectralPoint {
    pub n: i64,
    pub value: C64,
}

impl SpectralPoint {
    pub fn re(&self) -> f64 {
        self.value.re
    }
    pub fn im(&self) -> f64 {
        self.value.im
    }
}

/// `ε|n|^{2α}`, the real part of `λ_n`.
#[inline]
pub fn damping_rate(n: i64, eps: f64, alpha: f64) -> f64 {
    if eps == 0.0 {
        0.0
    } else {
        eps * (n.unsigned_abs() as f64).powf(2.0 * alpha)
    }
}

/// `λ_n = i n + ε|n|^{2α}`.
#[inline]
pub fn lambda(n: i64, eps: f64, alpha: f64) -> C64 {
    C64::new(damping_rate(n, eps, alpha), n as f64)
}

/// Conjugate `λ̄_n`.
#[inline]
pub fn lambda_bar(n: i64, eps: f64, alpha: f64) -> C64 {
    lambda(n, eps, alpha).conj()
}

/// Interpolation node `iλ̄_n = n + iε|n|^{2α}`.
#[inline]
pub fn node(n: i64, eps: f64, alpha: f64) -> C64 {
    C64::new(n as f64, damping_rate(n, eps, alpha))
}

/// Evaluates one member of a family. `n` must be nonzero.
pub fn eigenvalue(family: Family, n: i64, eps: f64, alpha: f64) -> Result<C64> {
    if n == 0 {
        return Err(Error::InvalidMode(0));
    }
    Ok(match family {
        Family::Lambda => lambda(n, eps, alpha),
        Family::Mu => C64::new(0.0, n as f64),
        Family::Nu => {
            let c = damping_rate(n, eps, alpha);
            let nf = n as f64;
            let root = C64::new(c * c - nf * nf, 0.0).sqrt();
            C64::new(c, 0.0) + root * nf.signum()
        }
    })
}

/// Members with `0 < |n| ≤ n_max`, ordered `-n_max, …, -1, 1, …, n_max`.
pub fn spectral_family(family: Family, n_max: u32, eps: f64, alpha: f64) -> Vec<SpectralPoint> {
    signed_indices(n_max)
        .into_iter()
        .map(|n| SpectralPoint {
            n,
            value: eigenvalue(family, n, eps, alpha).unwrap(),
        })
        .collect()
}

/// `-n_max, …, -1, 1, …, n_max`.
pub fn signed_indices(n_max: u32) -> Vec<i64> {
    let n = n_max as i64;
    (-n..=n).filter(|&k| k != 0).collect()
}

/// The weight `φ_ε` that describes the real-axis growth of the interpolating product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightFunction {
    pub alpha: f64,
    pub epsilon: f64,
    /// `γ_ε = (1/ε)^{1/(2α−1)}`, only for α > 1/2 and ε > 0.
    pub gamma: Option<f64>,
}

impl WeightFunction {
    pub fn new(eps: f64, alpha: f64) -> Result<Self> {
        if is_critical(alpha) {
            return Err(Error::CriticalExponent);
        }
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::InvalidParameter("alpha must lie in [0, 1)"));
        }
        if !(0.0..1.0).contains(&eps) {
            return Err(Error::InvalidParameter("epsilon must lie in [0, 1)"));
        }
        let gamma = if alpha > 0.5 && eps > 0.0 {
            Some((1.0 / eps).powf(1.0 / (2.0 * alpha - 1.0)))
        } else {
            None
        };
        Ok(WeightFunction {
            alpha,
            epsilon: eps,
            gamma,
        })
    }

    /// `φ_ε(|x|)`.
    pub fn phi(&self, x: f64) -> f64 {
        let x = x.abs();
        let (a, e) = (self.alpha, self.epsilon);
        if e == 0.0 {
            return 0.0;
        }
        match self.gamma {
            Some(g) if x > g => (x / e).powf(1.0 / (2.0 * a)),
            _ => e * x.powf(2.0 * a),
        }
    }

    /// Inverse of φ_ε on `[0, ∞)`. Needs α > 0 and ε > 0.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        let (a, e) = (self.alpha, self.epsilon);
        if a == 0.0 || e == 0.0 {
            return Err(Error::InvalidParameter(
                "weight is not invertible for alpha = 0 or epsilon = 0",
            ));
        }
        if y < 0.0 {
            return Err(Error::InvalidParameter("weight inverse needs y >= 0"));
        }
        Ok(match self.gamma {
            Some(g) if y > g => e * y.powf(2.0 * a),
            _ => (y / e).powf(1.0 / (2.0 * a)),
        })
    }
}

/// `φ_ε(x)` as a free function.
pub fn phi_eps(x: f64, eps: f64, alpha: f64) -> Result<f64> {
    Ok(WeightFunction::new(eps, alpha)?.phi(x))
}

/// `φ_ε^{-1}(y)` as a free function.
pub fn phi_eps_inverse(y: f64, eps: f64, alpha: f64) -> Result<f64> {
    WeightFunction::new(eps, alpha)?.inverse(y)
}

/// Non-negative root ξ of `ξ² + ε²ξ^{4α} = x²`.
pub fn xi_eps(x: f64, eps: f64, alpha: f64) -> f64 {
    let x = x.abs();
    if eps == 0.0 || x == 0.0 {
        return x;
    }
    let f = |xi: f64| xi * xi + eps * eps * xi.powf(4.0 * alpha) - x * x;
    let df = |xi: f64| 2.0 * xi + 4.0 * alpha * eps * eps * xi.powf(4.0 * alpha - 1.0);
    let (mut lo, mut hi) = (0.0, x);
    let mut xi = 0.5 * x;
    for _ in 0..200 {
        let v = f(xi);
        if v > 0.0 {
            hi = xi;
        } else {
            lo = xi;
        }
        if hi - lo <= 1e-15 * x {
            break;
        }
        let d = df(xi);
        let step = if d > 0.0 { xi - v / d } else { f64::NAN };
        xi = if step > lo && step < hi {
            step
        } else {
            0.5 * (lo + hi)
        };
        if (hi - lo) < 1e-14 * x && v.abs() < 1e-15 * x * x {
            break;
        }
    }
    xi
}

/// Index `n_m = ⌊φ_ε(e|λ_m|)⌋ + 1` of the first multiplier node for mode m.
pub fn first_node_index(m: i64, w: &WeightFunction) -> u64 {
    let lm = lambda(m, w.epsilon, w.alpha).norm();
    w.phi(E * lm).floor() as u64 + 1
}

/// Multiplier node `a_n = φ_ε^{-1}(n)/e`.
pub fn multiplier_node(n: u64, w: &WeightFunction) -> Result<f64> {
    Ok(w.inverse(n as f64)? / E)
}

/// Nodes of the multiplier for one mode.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierNodes {
    pub n_m: u64,
    /// `a_{n_m}, a_{n_m+1}, …`.
    pub a: Vec<f64>,
}

/// First `count` multiplier nodes of mode `m`, checking `a_{n_m} ≥ |λ_m|`.
pub fn multiplier_nodes(m: i64, eps: f64, alpha: f64, count: usize) -> Result<MultiplierNodes> {
    if alpha == 0.0 {
        return Err(Error::InvalidParameter(
            "no multiplier is used at alpha = 0",
        ));
    }
    if eps == 0.0 {
        return Err(Error::InvalidParameter(
            "no multiplier is used at epsilon = 0",
        ));
    }
    if m == 0 {
        return Err(Error::InvalidMode(0));
    }
    let w = WeightFunction::new(eps, alpha)?;
    let n_m = first_node_index(m, &w);
    let a: Vec<f64> = (0..count as u64)
        .map(|k| multiplier_node(n_m + k, &w))
        .collect::<Result<_>>()?;
    if let Some(&a0) = a.first() {
        let lm = lambda(m, eps, alpha).norm();
        if a0 < lm * (1.0 - 1e-14) {
            return Err(Error::InvalidParameter(
                "first multiplier node below |lambda_m|",
            ));
        }
    }
    Ok(MultiplierNodes { n_m, a })
}

/// Exponential-type bound `L₁` of the interpolating product.
pub fn product_type_bound(eps: f64, alpha: f64) -> Result<f64> {
    if is_critical(alpha) {
        return Err(Error::CriticalExponent);
    }
    let base = core::f64::consts::SQRT_2 * core::f64::consts::PI / 2.0;
    Ok(if alpha < 0.5 {
        base.max(4.0 * eps / (1.0 - 2.0 * alpha))
    } else {
        base.max(8.0 / (2.0 * alpha - 1.0))
    })
}

/// Bound `L₂` on `Σ 1/a_n`, the exponential type of the multiplier.
pub fn multiplier_type_bound(eps: f64, alpha: f64) -> Result<f64> {
    if is_critical(alpha) {
        return Err(Error::CriticalExponent);
    }
    if alpha == 0.0 {
        return Err(Error::InvalidParameter(
            "no multiplier is used at alpha = 0",
        ));
    }
    Ok(if alpha < 0.5 {
        (4.0 * alpha + 1.0) / (2.0 * alpha) * eps.powf(1.0 / (2.0 * alpha)) * E
    } else {
        (2.0 * alpha + 1.0) / (2.0 * alpha - 1.0) * E
    })
}

/// Constant `D` in the tail condition `Σ_{n≥n_m} a_n^{-2} ≤ D(1+|Re λ_m|)/|λ_m|²`.
pub fn multiplier_tail_constant(alpha: f64) -> Result<f64> {
    if is_critical(alpha) {
        return Err(Error::CriticalExponent);
    }
    if alpha == 0.0 {
        return Err(Error::InvalidParameter(
            "no multiplier is used at alpha = 0",
        ));
    }
    Ok(if alpha < 0.5 {
        2f64.powf(alpha) * E * E
    } else {
        4.0 * alpha / (1.0 - alpha) * E * E
    })
}
