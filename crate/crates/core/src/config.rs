//! Experiment parameters and their validation.

#[allow(unused_imports)]
use crate::Float;
use crate::{Error, Result};

/// How the multiplier power in the entire interpolant is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum OmegaMode {
    /// Use this power (rounded up to an integer so the power stays entire).
    Fixed(f64),
    /// Smallest integer power that makes the interpolant decay on the reals.
    Fitted,
}

/// Truncation policy for the frequency integral defining θ_m.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum HalfWidth {
    /// Grow the window until the neglected tail, as it would show up in the
    /// moments of the transformed function, is below `tol`.
    Auto { tol: f64, cap: f64 },
    /// Fixed half-width.
    Fixed(f64),
}

/// Quadrature budget for frequency-domain integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QuadBudget {
    pub half_width: HalfWidth,
    /// Extra oversampling of the frequency grid beyond the aliasing limit.
    pub points_per_unit: f64,
}

impl Default for QuadBudget {
    fn default() -> Self {
        QuadBudget {
            half_width: HalfWidth::Auto {
                tol: 1e-8,
                cap: 4.0e3,
            },
            points_per_unit: 1.0,
        }
    }
}

/// Named rules for the control profile coefficients `f̂_n`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ProfileRule {
    Unit,
    Inverse,
    InverseSquare,
    Explicit(alloc::vec::Vec<f64>),
}

/// Commands gate the critical exponent differently.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    /// Anything that builds biorthogonal families or synthesizes controls.
    Synthesis,
    /// Conditioning diagnostics, which must accept α = 1/2.
    Diagnostic,
}

/// All parameters of one experiment.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct ProblemConfig {
    pub alpha: f64,
    pub epsilon: f64,
    pub horizon_t: f64,
    pub n_modes: u32,
    pub delta: f64,
    pub omega_mode: OmegaMode,
    pub decay_boost: u32,
    pub quad: QuadBudget,
    pub time_grid: f64,
    pub smoothing_a: f64,
    pub profile: ProfileRule,
    /// Branch point of the weight function, filled in by [`validate_config`] when α > 1/2.
    pub gamma_eps: Option<f64>,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        ProblemConfig {
            alpha: 0.25,
            epsilon: 0.1,
            horizon_t: 2.0 * core::f64::consts::PI,
            n_modes: 8,
            delta: 0.5,
            omega_mode: OmegaMode::Fitted,
            decay_boost: 1,
            quad: QuadBudget::default(),
            time_grid: 64.0,
            smoothing_a: 0.5,
            profile: ProfileRule::Unit,
            gamma_eps: None,
        }
    }
}

const HALF_TOL: f64 = 1e-12;

/// True when α is the critical exponent 1/2 (to within 1e-12).
pub fn is_critical(alpha: f64) -> bool {
    (alpha - 0.5).abs() < HALF_TOL
}

/// Checks ranges, gates α = 1/2 by purpose and attaches derived fields.
///
/// The result is a fixed point: validating it again returns the same value.
pub fn validate_config(cfg: &ProblemConfig, purpose: Purpose) -> Result<ProblemConfig> {
    let mut c = cfg.clone();
    if !(c.alpha.is_finite() && (0.0..1.0).contains(&c.alpha)) {
        return Err(Error::InvalidParameter("alpha must lie in [0, 1)"));
    }
    if !(c.epsilon.is_finite() && (0.0..1.0).contains(&c.epsilon)) {
        return Err(Error::InvalidParameter("epsilon must lie in [0, 1)"));
    }
    if !(c.horizon_t.is_finite() && c.horizon_t > 0.0) {
        return Err(Error::InvalidParameter("horizon_t must be positive"));
    }
    if c.n_modes == 0 {
        return Err(Error::InvalidParameter("n_modes must be at least 1"));
    }
    if !(c.delta.is_finite() && c.delta > 0.0) {
        return Err(Error::InvalidParameter("delta must be positive"));
    }
    if !(c.time_grid.is_finite() && c.time_grid > 0.0) {
        return Err(Error::InvalidParameter("time_grid must be positive"));
    }
    if !(c.smoothing_a.is_finite() && c.smoothing_a >= 0.0) {
        return Err(Error::InvalidParameter("smoothing_a must be non-negative"));
    }
    if let OmegaMode::Fixed(w) = c.omega_mode {
        if !(w.is_finite() && w >= 0.0) {
            return Err(Error::InvalidParameter("fixed omega must be non-negative"));
        }
    }
    if !(c.quad.points_per_unit.is_finite() && c.quad.points_per_unit >= 1.0) {
        return Err(Error::InvalidParameter(
            "points_per_unit must be at least 1",
        ));
    }
    match c.quad.half_width {
        HalfWidth::Auto { tol, cap } if !(tol > 0.0 && cap > 0.0) => {
            return Err(Error::InvalidParameter(
                "auto half-width needs positive tol and cap",
            ))
        }
        HalfWidth::Fixed(x) if !(x > 0.0) => {
            return Err(Error::InvalidParameter("fixed half-width must be positive"))
        }
        _ => {}
    }
    if let ProfileRule::Explicit(ref v) = c.profile {
        if let Some(i) = v.iter().position(|&f| f == 0.0 || !f.is_finite()) {
            return Err(Error::ZeroProfileCoefficient(i as u32 + 1));
        }
    }
    if is_critical(c.alpha) {
        if purpose == Purpose::Synthesis {
            return Err(Error::CriticalExponent);
        }
        c.alpha = 0.5;
    }
    c.epsilon += 0.0;
    c.gamma_eps = if c.alpha > 0.5 && c.epsilon > 0.0 {
        Some((1.0 / c.epsilon).powf(1.0 / (2.0 * c.alpha - 1.0)))
    } else {
        None
    };
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(alpha: f64, epsilon: f64) -> ProblemConfig {
        ProblemConfig {
            alpha,
            epsilon,
            ..Default::default()
        }
    }

    #[test]
    fn accepts_regular_config() {
        let c = validate_config(&cfg(0.25, 0.1), Purpose::Synthesis).unwrap();
        assert_eq!(c.gamma_eps, None);
    }

    #[test]
    fn critical_exponent_gated_by_purpose() {
        assert_eq!(
            validate_config(&cfg(0.5, 0.1), Purpose::Synthesis),
            Err(Error::CriticalExponent)
        );
        assert!(validate_config(&cfg(0.5 + 1e-13, 0.1), Purpose::Diagnostic).is_ok());
    }

    #[test]
    fn branch_point_attached() {
        let c = validate_config(&cfg(0.75, 0.1), Purpose::Synthesis).unwrap();
        assert!((c.gamma_eps.unwrap() - 100.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(validate_config(&cfg(1.0, 0.1), Purpose::Diagnostic).is_err());
        assert!(validate_config(&cfg(0.2, -0.1), Purpose::Diagnostic).is_err());
        let mut c = cfg(0.2, 0.1);
        c.horizon_t = 0.0;
        assert!(validate_config(&c, Purpose::Diagnostic).is_err());
        c = cfg(0.2, 0.1);
        c.profile = ProfileRule::Explicit(alloc::vec![1.0, 0.0]);
        assert_eq!(
            validate_config(&c, Purpose::Diagnostic),
            Err(Error::ZeroProfileCoefficient(2))
        );
    }

    #[test]
    fn validation_is_idempotent() {
        for &(a, e) in &[(0.25, 0.1), (0.75, 0.3), (0.5, 0.5), (0.0, 0.0)] {
            let once = validate_config(&cfg(a, e), Purpose::Diagnostic).unwrap();
            let twice = validate_config(&once, Purpose::Diagnostic).unwrap();
            assert_eq!(once, twice);
        }
    }
}
