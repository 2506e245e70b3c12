//! Exact modal propagation of the controlled wave equations on `(0, π)`.
//!
//! Mode `n` obeys `ü + b u̇ + k u = f̂_n v(t)` with
//!
//! | system | `b` | `k` |
//! |---|---|---|
//! | damped (`u_tt − u_xx + 2ε(−∂²)^α u_t + ε²(−∂²)^{2α} u`) | `2εn^{2α}` | `n² + ε²n^{4α}` |
//! | viscous (no `ε²` term) | `2εn^{2α}` | `n²` |
//! | conservative | `0` | `n²` |
//!
//! The homogeneous flow is the closed-form 2×2 exponential; the control is
//! reconstructed piecewise linearly and its contribution integrated exactly.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::modal::{ControlSignal, ModalState, ModeData};
use crate::quad::GaussLegendre;
#[allow(unused_imports)]
use crate::Float;
use crate::{Error, Result, C64};

/// Which of the three modal systems to propagate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum System {
    Damped,
    Viscous,
    Conservative,
}

/// Coefficients and characteristic roots of one mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeDynamics {
    pub n: u32,
    pub stiffness: f64,
    pub damping: f64,
    pub f_hat: C64,
    /// `m = −b/2` and `d = √(m² − k)`; the roots are `m ± d`.
    m: f64,
    d: C64,
}

impl ModeDynamics {
    pub fn new(system: System, n: u32, eps: f64, alpha: f64, f_hat: C64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidMode(0));
        }
        let nf = n as f64;
        let c = eps * nf.powf(2.0 * alpha);
        let (damping, stiffness) = match system {
            System::Damped => (2.0 * c, nf * nf + c * c),
            System::Viscous => (2.0 * c, nf * nf),
            System::Conservative => (0.0, nf * nf),
        };
        let m = -damping / 2.0;
        let d = C64::new(m * m - stiffness, 0.0).sqrt();
        Ok(ModeDynamics {
            n,
            stiffness,
            damping,
            f_hat,
            m,
            d,
        })
    }

    /// Characteristic roots `(r₁, r₂)`.
    pub fn roots(&self) -> (C64, C64) {
        (self.d + self.m, -self.d + self.m)
    }

    /// `(cosh(dτ), sinh(dτ)/d)`, continuous through `d = 0`.
    fn hyperbolic(&self, tau: f64) -> (C64, C64) {
        let w = self.d * tau;
        if w.norm() < 1e-4 {
            let w2 = w * w;
            (
                w2 * (w2 / 24.0 + 0.5) + 1.0,
                (w2 * (w2 / 120.0 + 1.0 / 6.0) + 1.0) * tau,
            )
        } else {
            (w.cosh(), w.sinh() / self.d)
        }
    }

    /// Homogeneous flow over time `tau` as a row-major 2×2 matrix acting on `(u, u̇)`.
    pub fn propagator(&self, tau: f64) -> [C64; 4] {
        let (ch, sh) = self.hyperbolic(tau);
        let e = (self.m * tau).exp();
        let (k, b, m) = (self.stiffness, self.damping, self.m);
        [
            (ch + sh * (-m)) * e,
            sh * e,
            sh * (-k) * e,
            (ch + sh * (-b - m)) * e,
        ]
    }

    /// Impulse response `E(τ) = e^{mτ} sinh(dτ)/d`.
    pub fn impulse(&self, tau: f64) -> C64 {
        self.hyperbolic(tau).1 * (self.m * tau).exp()
    }

    /// `(∫₀^h E, ∫₀^h (h−τ)E)`.
    fn forcing_weights(&self, h: f64) -> (C64, C64) {
        let (r1, r2) = self.roots();
        if (r1 - r2).norm() * h < 1e-2 {
            let gl = GaussLegendre::new(16);
            let i0: C64 = gl.composite(0.0, h, 4, |t| self.impulse(t));
            let i1: C64 = gl.composite(0.0, h, 4, |t| self.impulse(t) * (h - t));
            return (i0, i1);
        }
        let dr = r1 - r2;
        let i0 = (phi1(r1 * h) - phi1(r2 * h)) * h / dr;
        let i1 = (phi2(r1 * h) - phi2(r2 * h)) * (h * h) / dr;
        (i0, i1)
    }

    /// `n²|u|² + |u̇ − m u|²`, which decays exactly like `e^{2mt}` for the damped system.
    pub fn adapted_norm_sq(&self, u: C64, du: C64) -> f64 {
        let nf = self.n as f64;
        nf * nf * u.norm_sqr() + (du - u * self.m).norm_sqr()
    }

    /// Decay rate `−m = b/2`.
    pub fn decay_rate(&self) -> f64 {
        -self.m
    }
}

/// `(e^z − 1)/z`.
fn phi1(z: C64) -> C64 {
    if z.norm() < 1e-2 {
        let mut acc = C64::new(0.0, 0.0);
        let mut term = C64::new(1.0, 0.0);
        for k in 1..12 {
            acc += term;
            term = term * z / (k as f64 + 1.0);
        }
        acc
    } else {
        (z.exp() - 1.0) / z
    }
}

/// `(e^z − 1 − z)/z²`.
fn phi2(z: C64) -> C64 {
    if z.norm() < 1e-1 {
        let mut acc = C64::new(0.0, 0.0);
        let mut term = C64::new(0.5, 0.0);
        for k in 2..18 {
            acc += term;
            term = term * z / (k as f64 + 1.0);
        }
        acc
    } else {
        (z.exp() - 1.0 - z) / (z * z)
    }
}

/// Propagates `(u, u̇)` of one mode across the whole control window.
pub fn mode_propagate(
    dynm: &ModeDynamics,
    state: (C64, C64),
    control: &ControlSignal,
) -> (C64, C64) {
    let steps = control.intervals();
    if steps == 0 {
        return state;
    }
    let h = control.dt();
    let p = dynm.propagator(h);
    let (i0, i1) = dynm.forcing_weights(h);
    let eh = dynm.impulse(h);
    let f = dynm.f_hat;
    let (mut u, mut du) = state;
    for j in 0..steps {
        let v0 = control.samples[j];
        let sigma = (control.samples[j + 1] - v0) / h;
        let nu = p[0] * u + p[1] * du + f * (v0 * i0 + sigma * i1);
        let ndu = p[2] * u + p[3] * du + f * (v0 * eh + sigma * i0);
        u = nu;
        du = ndu;
    }
    (u, du)
}

/// Energy `(2/π) Σ (k_n |û_n|² + |û̇_n|²)`, i.e. `(π/2)Σ(k_n|a_n|² + |ȧ_n|²)` in sine amplitudes.
pub fn energy(system: System, modes: &[ModeData], eps: f64, alpha: f64) -> f64 {
    let mut acc = 0.0;
    for md in modes {
        let nf = md.n as f64;
        let k = match system {
            System::Damped => nf * nf + eps * eps * nf.powf(4.0 * alpha),
            System::Viscous | System::Conservative => nf * nf,
        };
        acc += k * md.u0.norm_sqr() + md.u1.norm_sqr();
    }
    2.0 / PI * acc
}

/// Sampled energy and the final state of a run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    /// `|û_n(t)|` per recorded time, modes in increasing order.
    pub magnitudes: Vec<Vec<f64>>,
    pub initial: Vec<ModeData>,
    pub final_state: Vec<ModeData>,
}

/// Propagates modes `1 … n_max` under `control`, recording every `record_every` steps.
///
/// Modes missing from `data` start at rest; modes without a profile coefficient are not forced.
pub fn simulate(
    system: System,
    data: &ModalState,
    n_max: u32,
    eps: f64,
    alpha: f64,
    control: &ControlSignal,
    record_every: usize,
) -> Result<Trajectory> {
    if data.max_mode() > n_max {
        return Err(Error::DimensionMismatch {
            expected: n_max as usize,
            found: data.max_mode() as usize,
        });
    }
    if control.intervals() == 0 || !(control.t1 > control.t0) {
        return Err(Error::InvalidParameter(
            "control must cover a positive interval",
        ));
    }
    let dyns = (1..=n_max)
        .map(|n| ModeDynamics::new(system, n, eps, alpha, data.f_hat(n).unwrap_or_default()))
        .collect::<Result<Vec<_>>>()?;
    let initial: Vec<ModeData> = (1..=n_max)
        .map(|n| {
            data.mode(n).copied().unwrap_or(ModeData {
                n,
                u0: C64::new(0.0, 0.0),
                u1: C64::new(0.0, 0.0),
            })
        })
        .collect();
    let h = control.dt();
    let every = record_every.max(1);
    let steps = control.intervals();
    let mut state: Vec<(C64, C64)> = initial.iter().map(|m| (m.u0, m.u1)).collect();
    let consts: Vec<_> = dyns
        .iter()
        .map(|d| (d.propagator(h), d.forcing_weights(h), d.impulse(h)))
        .collect();
    let mut times = vec![control.t0];
    let mut en = vec![energy(system, &initial, eps, alpha)];
    let mut mags = vec![state.iter().map(|s| s.0.norm()).collect::<Vec<_>>()];
    for j in 0..steps {
        let v0 = control.samples[j];
        let sigma = (control.samples[j + 1] - v0) / h;
        for ((s, d), (p, (i0, i1), eh)) in state.iter_mut().zip(&dyns).zip(&consts) {
            let (u, du) = *s;
            let f = d.f_hat;
            *s = (
                p[0] * u + p[1] * du + f * (v0 * i0 + sigma * i1),
                p[2] * u + p[3] * du + f * (v0 * eh + sigma * i0),
            );
        }
        if (j + 1) % every == 0 || j + 1 == steps {
            let snap: Vec<ModeData> = state
                .iter()
                .zip(1..)
                .map(|(s, n)| ModeData {
                    n,
                    u0: s.0,
                    u1: s.1,
                })
                .collect();
            times.push(control.time(j + 1));
            en.push(energy(system, &snap, eps, alpha));
            mags.push(state.iter().map(|s| s.0.norm()).collect());
        }
    }
    let final_state = state
        .iter()
        .zip(1..)
        .map(|(s, n)| ModeData {
            n,
            u0: s.0,
            u1: s.1,
        })
        .collect();
    Ok(Trajectory {
        times,
        energy: en,
        magnitudes: mags,
        initial,
        final_state,
    })
}

/// `E(final)/E(initial)`, zero when both vanish.
pub fn final_residual(
    system: System,
    final_state: &[ModeData],
    initial: &[ModeData],
    eps: f64,
    alpha: f64,
) -> f64 {
    let e1 = energy(system, final_state, eps, alpha);
    let e0 = energy(system, initial, eps, alpha);
    if e0 == 0.0 {
        if e1 == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        e1 / e0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modal::ProfileCoeff;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn apply(p: &[C64; 4], s: (C64, C64)) -> (C64, C64) {
        (p[0] * s.0 + p[1] * s.1, p[2] * s.0 + p[3] * s.1)
    }

    #[test]
    fn free_examples() {
        let d = ModeDynamics::new(System::Damped, 1, 0.0, 0.25, c(1.0)).unwrap();
        let s = apply(&d.propagator(2.0 * PI), (c(1.0), c(0.0)));
        assert!((s.0 - 1.0).norm() < 1e-14 && s.1.norm() < 1e-14);
        let d = ModeDynamics::new(System::Damped, 1, 0.1, 0.7, c(1.0)).unwrap();
        let s = apply(&d.propagator(PI), (c(1.0), c(0.0)));
        assert!((s.0.re + (-0.1 * PI).exp()).abs() < 1e-14);
        assert!((s.0.re + 0.73040).abs() < 1e-5);
    }

    #[test]
    fn resonant_null_control() {
        let data = ModalState::new(
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
        .unwrap();
        let v = ControlSignal::from_fn(0.0, 2.0 * PI, 8192 * 4, |t| c(t.sin() / PI));
        let tr = simulate(System::Damped, &data, 1, 0.0, 0.25, &v, 1024).unwrap();
        let r = final_residual(System::Damped, &tr.final_state, &tr.initial, 0.0, 0.25);
        assert!(r < 1e-15, "{r}");
    }

    #[test]
    fn group_property_and_overdamped() {
        for (sys, e, a, n) in [
            (System::Damped, 0.1, 0.75, 5u32),
            (System::Viscous, 0.5, 0.75, 9),
            (System::Viscous, 0.9, 0.9, 30),
        ] {
            let d = ModeDynamics::new(sys, n, e, a, c(1.0)).unwrap();
            let s0 = (C64::new(0.3, -0.2), C64::new(1.0, 0.5));
            let a1 = apply(&d.propagator(0.7), apply(&d.propagator(0.4), s0));
            let a2 = apply(&d.propagator(1.1), s0);
            assert!((a1.0 - a2.0).norm() + (a1.1 - a2.1).norm() < 1e-13);
        }
    }

    #[test]
    fn double_root_forcing() {
        // εn^{2α} = n for n = 4, α = 3/4, ε = 1/2: critically damped
        let d = ModeDynamics::new(System::Viscous, 4, 0.5, 0.75, c(1.0)).unwrap();
        let (r1, r2) = d.roots();
        assert!((r1 - r2).norm() < 1e-6);
        let v = ControlSignal::from_fn(0.0, 1.0, 200, |t| c(t));
        let (u, _) = mode_propagate(&d, (c(0.0), c(0.0)), &v);
        // u = ∫₀¹ (1−s) e^{−4(1−s)} s ds
        let want = GaussLegendre::new(32)
            .integrate(0.0, 1.0, |s| (1.0 - s) * (-4.0 * (1.0 - s)).exp() * s);
        assert!((u.re - want).abs() < 1e-14, "{u} {want}");
    }
}
