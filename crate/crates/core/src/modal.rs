//! Modal data: sine coefficients of initial states, control profiles and
//! sampled control signals.
//!
//! Coefficients follow the un-normalized convention `ĝ_n = ∫₀^π g(x) sin(nx) dx`,
//! so a function `g = Σ a_n sin(nx)` has `ĝ_n = (π/2) a_n`.

use alloc::vec::Vec;

use crate::config::ProfileRule;
#[allow(unused_imports)]
use crate::Float;
use crate::{Error, Result, C64};

/// Initial position and velocity coefficients of one mode.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModeData {
    pub n: u32,
    pub u0: C64,
    pub u1: C64,
}

/// Profile coefficient `f̂_n`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProfileCoeff {
    pub n: u32,
    pub f_hat: C64,
}

/// A finite modal state together with the control profile.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModalState {
    pub modes: Vec<ModeData>,
    pub profile: Vec<ProfileCoeff>,
}

impl ModalState {
    /// Builds a state and checks index ordering and profile coverage.
    pub fn new(modes: Vec<ModeData>, profile: Vec<ProfileCoeff>) -> Result<Self> {
        let s = ModalState { modes, profile };
        s.check()?;
        Ok(s)
    }

    /// Strictly increasing positive indices, nonzero profile on every data mode.
    pub fn check(&self) -> Result<()> {
        let mut last = 0u32;
        for m in &self.modes {
            if m.n <= last {
                return Err(Error::InvalidMode(m.n as i64));
            }
            last = m.n;
            let f = self.f_hat(m.n).ok_or(Error::ZeroProfileCoefficient(m.n))?;
            if f == C64::new(0.0, 0.0) {
                return Err(Error::ZeroProfileCoefficient(m.n));
            }
        }
        let mut last = 0u32;
        for p in &self.profile {
            if p.n <= last {
                return Err(Error::InvalidMode(p.n as i64));
            }
            last = p.n;
        }
        Ok(())
    }

    pub fn f_hat(&self, n: u32) -> Option<C64> {
        self.profile.iter().find(|p| p.n == n).map(|p| p.f_hat)
    }

    pub fn mode(&self, n: u32) -> Option<&ModeData> {
        self.modes.iter().find(|m| m.n == n)
    }

    pub fn max_mode(&self) -> u32 {
        self.modes.iter().map(|m| m.n).max().unwrap_or(0)
    }

    /// True when every coefficient is real.
    pub fn is_real(&self) -> bool {
        self.modes.iter().all(|m| m.u0.im == 0.0 && m.u1.im == 0.0)
            && self.profile.iter().all(|p| p.f_hat.im == 0.0)
    }

    /// Copy of the state with positions and velocities replaced.
    pub fn with_coefficients(&self, coeffs: &[(C64, C64)]) -> ModalState {
        let modes = self
            .modes
            .iter()
            .zip(coeffs)
            .map(|(m, &(u0, u1))| ModeData { n: m.n, u0, u1 })
            .collect();
        ModalState {
            modes,
            profile: self.profile.clone(),
        }
    }
}

/// Weighted norm `Σ (n²|û⁰_n|² + |û¹_n|²)/|f̂_n|²` of the data.
pub fn h0_norm_sq(data: &ModalState) -> Result<f64> {
    let mut acc = 0.0;
    for m in &data.modes {
        let f = data.f_hat(m.n).ok_or(Error::ZeroProfileCoefficient(m.n))?;
        let f2 = f.norm_sqr();
        if f2 == 0.0 {
            return Err(Error::ZeroProfileCoefficient(m.n));
        }
        let n = m.n as f64;
        acc += (n * n * m.u0.norm_sqr() + m.u1.norm_sqr()) / f2;
    }
    Ok(acc)
}

/// Profile coefficients `f̂_1 … f̂_N` from a named rule.
pub fn project_profile(rule: &ProfileRule, n: u32) -> Result<Vec<ProfileCoeff>> {
    let mut out = Vec::with_capacity(n as usize);
    for k in 1..=n {
        let kf = k as f64;
        let f = match rule {
            ProfileRule::Unit => 1.0,
            ProfileRule::Inverse => 1.0 / kf,
            ProfileRule::InverseSquare => 1.0 / (kf * kf),
            ProfileRule::Explicit(v) => *v.get(k as usize - 1).ok_or(Error::DimensionMismatch {
                expected: n as usize,
                found: v.len(),
            })?,
        };
        if f == 0.0 || !f.is_finite() {
            return Err(Error::ZeroProfileCoefficient(k));
        }
        out.push(ProfileCoeff {
            n: k,
            f_hat: C64::new(f, 0.0),
        });
    }
    Ok(out)
}

/// Samples of a scalar control on a uniform grid `t0, t0 + dt, …, t1`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ControlSignal {
    pub t0: f64,
    pub t1: f64,
    pub samples: Vec<C64>,
    pub is_real_expected: bool,
}

impl ControlSignal {
    pub fn zero(t0: f64, t1: f64, intervals: usize) -> Self {
        ControlSignal {
            t0,
            t1,
            samples: alloc::vec![C64::new(0.0, 0.0); intervals + 1],
            is_real_expected: true,
        }
    }

    /// Samples `f` at `intervals + 1` uniform points.
    pub fn from_fn(t0: f64, t1: f64, intervals: usize, f: impl Fn(f64) -> C64) -> Self {
        let dt = (t1 - t0) / intervals as f64;
        let samples = (0..=intervals).map(|j| f(t0 + j as f64 * dt)).collect();
        ControlSignal {
            t0,
            t1,
            samples,
            is_real_expected: false,
        }
    }

    pub fn intervals(&self) -> usize {
        self.samples.len().saturating_sub(1)
    }

    pub fn dt(&self) -> f64 {
        (self.t1 - self.t0) / self.intervals().max(1) as f64
    }

    pub fn time(&self, j: usize) -> f64 {
        self.t0 + j as f64 * self.dt()
    }

    /// Trapezoid weight of sample `j`.
    pub fn weight(&self, j: usize) -> f64 {
        let last = self.intervals();
        if j == 0 || j == last {
            0.5 * self.dt()
        } else {
            self.dt()
        }
    }

    pub fn l2_norm(&self) -> f64 {
        let mut acc = 0.0;
        for (j, v) in self.samples.iter().enumerate() {
            acc += self.weight(j) * v.norm_sqr();
        }
        acc.sqrt()
    }

    pub fn max_imag(&self) -> f64 {
        self.samples.iter().fold(0.0, |a, v| a.max(v.im.abs()))
    }

    pub fn sup_distance(&self, other: &ControlSignal) -> f64 {
        self.samples
            .iter()
            .zip(&other.samples)
            .fold(0.0, |a, (x, y)| a.max((x - y).norm()))
    }

    /// `∫ v(t) e^{s (t - shift)} dt` by the trapezoid rule.
    pub fn moment(&self, s: C64, shift: f64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (j, v) in self.samples.iter().enumerate() {
            acc += v * (s * (self.time(j) - shift)).exp() * self.weight(j);
        }
        acc
    }
}
