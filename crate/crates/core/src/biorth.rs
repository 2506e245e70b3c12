//! Biorthogonal families to `e^{λ̄_n t}`.
//!
//! `Ψ_m = P_m · (M_{|m|}(z)/M_{|m|}(iλ̄_m))^ω · sinc(δ(z − iλ̄_m))^{1+k}` vanishes at every
//! `iλ̄_n` with `n ≠ m` and equals one at `iλ̄_m`, so its inverse Fourier transform
//! `θ_m(t) = (1/2π)∫Ψ_m(x)e^{ixt}dx` satisfies `∫θ_m e^{λ̄_n t}dt = δ_mn`.
//!
//! All families live on a common uniform grid `t_j = (j − M/2)·dt` with `M` a
//! power of two. The transform is the trapezoid rule in `x` with step
//! `2π/(M·dt)`, folded onto `M` bins and evaluated by one FFT.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::config::{HalfWidth, OmegaMode, ProblemConfig, QuadBudget};
use crate::fft::fft_in_place;
use crate::linalg::{fit_line, CMatrix};
use crate::multiplier::{ln_sinc, MultiplierTable};
use crate::spectrum::{lambda_bar, multiplier_type_bound, product_type_bound};
use crate::weierstrass::ProductEvaluator;
#[allow(unused_imports)]
use crate::Float;
use crate::{Error, Result, C64};

/// `ln|M(iλ̄_m)|` below this is treated as underflow.
const UNDERFLOW_LN: f64 = -700.0;
/// Consecutive negligible samples needed before the frequency scan stops.
const QUIET_RUN: usize = 64;

/// Which construction produced a family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum FamilyKind {
    Theta,
    Zeta,
    SincLimit,
}

/// One interpolant `Ψ_m`, borrowing the shared product and multiplier tables.
#[derive(Debug, Clone, Copy)]
pub struct EntireInterpolant<'a> {
    pub m: i64,
    product: &'a ProductEvaluator,
    multiplier: Option<&'a MultiplierTable>,
    pub omega: u32,
    pub delta: f64,
    pub decay_boost: u32,
    node: C64,
    ln_m_node: C64,
}

impl<'a> EntireInterpolant<'a> {
    pub fn new(
        m: i64,
        product: &'a ProductEvaluator,
        multiplier: Option<&'a MultiplierTable>,
        omega: u32,
        delta: f64,
        decay_boost: u32,
    ) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidMode(0));
        }
        if !(delta > 0.0) {
            return Err(Error::InvalidParameter("delta must be positive"));
        }
        let node = C64::i() * lambda_bar(m, product.epsilon, product.alpha);
        let ln_m_node = match multiplier {
            Some(t) if omega > 0 => {
                let v = t.ln_eval(m, node)?.log;
                if v.re < UNDERFLOW_LN {
                    return Err(Error::Underflow("multiplier at the interpolation node"));
                }
                v
            }
            _ => C64::new(0.0, 0.0),
        };
        Ok(EntireInterpolant {
            m,
            product,
            multiplier,
            omega,
            delta,
            decay_boost,
            node,
            ln_m_node,
        })
    }

    /// Interpolation node `iλ̄_m`.
    pub fn node(&self) -> C64 {
        self.node
    }

    /// Complex log of `Ψ_m(z)`; real part `-∞` at an exact zero.
    pub fn ln_eval(&self, z: C64) -> Result<C64> {
        let mut acc = self.product.eval(self.m, z)?.log;
        if acc.re == f64::NEG_INFINITY {
            return Ok(acc);
        }
        if let (Some(t), true) = (self.multiplier, self.omega > 0) {
            acc += (t.ln_eval(self.m, z)?.log - self.ln_m_node) * self.omega as f64;
        }
        let w = (z - self.node) * self.delta;
        if w.re.abs() > 0.0 || w.im.abs() > 0.0 {
            let s = w.sin();
            if s == C64::new(0.0, 0.0) {
                return Ok(C64::new(f64::NEG_INFINITY, 0.0));
            }
            acc += ln_sinc(w) * (1 + self.decay_boost) as f64;
        }
        Ok(acc)
    }

    pub fn eval(&self, z: C64) -> Result<C64> {
        let l = self.ln_eval(z)?;
        Ok(if l.re == f64::NEG_INFINITY {
            C64::new(0.0, 0.0)
        } else {
            l.exp()
        })
    }

    /// `L₁ + ωL₂ + (1+k)δ`, the type guaranteed by the product and multiplier bounds.
    pub fn declared_type(&self) -> Result<f64> {
        let (e, a) = (self.product.epsilon, self.product.alpha);
        let l2 = match self.multiplier {
            Some(_) => multiplier_type_bound(e, a)?,
            None => 0.0,
        };
        Ok(product_type_bound(e, a)? + self.omega as f64 * l2 + self.sinc_type())
    }

    /// Actual exponential type: `π` (or `0` when the nodes spread faster than
    /// linearly, α > 1/2) for the product, `ω Σ_{n≥n_m} 1/a_n` for the
    /// multiplier, `(1+k)δ` for the sinc factors.
    pub fn exact_type(&self) -> f64 {
        let (e, a) = (self.product.epsilon, self.product.alpha);
        let tp = if a > 0.5 && e > 0.0 { 0.0 } else { PI };
        let tm = match self.multiplier {
            Some(t) if self.omega > 0 => self.omega as f64 * t.exponential_type(self.m),
            _ => 0.0,
        };
        tp + tm + self.sinc_type()
    }

    fn sinc_type(&self) -> f64 {
        (1 + self.decay_boost) as f64 * self.delta
    }
}

/// `Ψ_m(z)`.
pub fn psi_eval(z: C64, interp: &EntireInterpolant<'_>) -> Result<C64> {
    interp.eval(z)
}

/// Smallest integer `ω ≥ 1` with `ln|P_m(x)| + ω ln|M_{|m|}(x)| < 0` on the far part
/// (`|x| ≥ max/8`) of the grid `xs`, for every `m ∈ ms`. Growth of the product
/// nearer the origin only enters the constant of the envelope.
pub fn fit_multiplier_power(
    ms: &[i64],
    xs: &[f64],
    product: &ProductEvaluator,
    multiplier: &MultiplierTable,
) -> Result<u32> {
    let far = xs.iter().fold(0.0f64, |a, &x| a.max(x.abs())) / 8.0;
    let mut worst = 0.0f64;
    for &m in ms {
        for &x0 in xs.iter().filter(|x| x.abs() >= far) {
            for x in [x0, -x0] {
                let (lm, _) = multiplier.ln_abs_real(m, x)?;
                if lm > -1.0 {
                    continue;
                }
                let lp = product.eval(m, C64::new(x, 0.0))?.ln_abs();
                worst = worst.max(lp / -lm);
            }
        }
    }
    Ok((worst.ceil() as u32).max(1))
}

/// Shared tables and parameters for all interpolants of one configuration.
#[derive(Debug, Clone)]
pub struct InterpolantSet {
    pub product: ProductEvaluator,
    pub multiplier: Option<MultiplierTable>,
    pub omega: u32,
    pub delta: f64,
    pub decay_boost: u32,
    pub quad: QuadBudget,
    /// Largest `Re λ̄_m` over the modes the set was built for.
    pub rate: f64,
}

impl InterpolantSet {
    /// Builds tables reaching the frequency cap of the budget and fixes `ω`
    /// (fitted over `ms` unless the configuration pins it).
    pub fn new(cfg: &ProblemConfig, ms: &[i64]) -> Result<Self> {
        let (e, a) = (cfg.epsilon, cfg.alpha);
        if e > 0.0 && cfg.decay_boost == 0 {
            return Err(Error::InvalidParameter(
                "decay_boost must be at least 1 when epsilon > 0",
            ));
        }
        let top = ms
            .iter()
            .map(|&m| lambda_bar(m, e, a).norm())
            .fold(1.0, f64::max);
        let x_cap = match cfg.quad.half_width {
            HalfWidth::Auto { cap, .. } => cap,
            HalfWidth::Fixed(x) => x,
        };
        let reach = x_cap + top + 2.0;
        let product = ProductEvaluator::new(e, a, reach)?;
        let multiplier = if a > 0.0 && e > 0.0 {
            Some(MultiplierTable::new(e, a, reach)?)
        } else {
            None
        };
        let omega = match (&multiplier, cfg.omega_mode) {
            (None, _) => 0,
            (Some(_), OmegaMode::Fixed(w)) => w.ceil() as u32,
            (Some(t), OmegaMode::Fitted) => {
                let hi = (x_cap / 2.0).clamp(10.0, 2000.0);
                let xs: Vec<f64> = (0..=64)
                    .map(|i| hi * (0.125 + 0.875 * i as f64 / 64.0))
                    .collect();
                fit_multiplier_power(ms, &xs, &product, t)?
            }
        };
        let rate = ms
            .iter()
            .map(|&m| lambda_bar(m, e, a).re)
            .fold(0.0, f64::max);
        Ok(InterpolantSet {
            product,
            multiplier,
            omega,
            delta: cfg.delta,
            decay_boost: cfg.decay_boost,
            quad: cfg.quad,
            rate,
        })
    }

    pub fn get(&self, m: i64) -> Result<EntireInterpolant<'_>> {
        EntireInterpolant::new(
            m,
            &self.product,
            self.multiplier.as_ref(),
            self.omega,
            self.delta,
            self.decay_boost,
        )
    }

    pub fn epsilon(&self) -> f64 {
        self.product.epsilon
    }

    pub fn alpha(&self) -> f64 {
        self.product.alpha
    }
}

/// Uniform grid `t_j = (j − len/2)·dt`, `len` a power of two.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TimeGrid {
    pub dt: f64,
    pub len: usize,
}

impl TimeGrid {
    /// Smallest grid with spacing `dt` whose half-period is at least `half`.
    pub fn covering(half: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && half > 0.0 && half.is_finite()) {
            return Err(Error::InvalidParameter(
                "grid needs positive spacing and width",
            ));
        }
        let need = (2.0 * half / dt).ceil() as usize;
        let len = need.max(2).next_power_of_two();
        Ok(TimeGrid { dt, len })
    }

    pub fn time(&self, j: usize) -> f64 {
        (j as f64 - (self.len / 2) as f64) * self.dt
    }

    pub fn half_period(&self) -> f64 {
        self.len as f64 * self.dt / 2.0
    }

    /// Frequency step `2π/(len·dt)` dual to the grid.
    pub fn freq_step(&self) -> f64 {
        2.0 * PI / (self.len as f64 * self.dt)
    }

    /// Index range `[lo, hi]` of grid points with `|t| ≤ w`.
    pub fn window(&self, w: f64) -> (usize, usize) {
        let c = (self.len / 2) as f64;
        let k = ((w / self.dt) * (1.0 + 1e-12))
            .floor()
            .min(c - 1.0)
            .max(0.0);
        ((c - k) as usize, (c + k) as usize)
    }
}

/// Diagnostics of one frequency-domain transform.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TransformInfo {
    /// Frequency cutoff actually used.
    pub x_max: f64,
    /// Number of frequency samples.
    pub samples: usize,
    /// Frequency step.
    pub step: f64,
}

/// `(1/2π)∫f(x)e^{ixt}dx` on `grid`, by the trapezoid rule with the grid's dual step
/// along the line `Im z = shift`, i.e. `e^{−shift·t}(1/2π)∫f(x + i·shift)e^{ixt}dx`.
///
/// The automatic cutoff stops once the neglected tail, multiplied by `amp`, stays
/// below `tol` (relative to the transform scale when that exceeds one) and `x ≥ min_x`.
/// `amp` is how much a uniform error in the result can grow downstream.
pub fn inverse_fourier<F: FnMut(C64) -> Result<C64>>(
    mut f: F,
    shift: f64,
    grid: &TimeGrid,
    budget: &QuadBudget,
    min_x: f64,
    amp: f64,
) -> Result<(Vec<C64>, TransformInfo)> {
    let n = grid.len;
    let h = grid.freq_step();
    let mut bins = vec![C64::new(0.0, 0.0); n];
    let mut put = |k: i64, v: C64| {
        let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        bins[k.rem_euclid(n as i64) as usize] += v * sign;
    };
    let mut f = |x: f64| f(C64::new(x, shift));
    let v0 = f(0.0)?;
    put(0, v0);
    let mut mass = v0.norm();
    let mut k = 0i64;
    match budget.half_width {
        HalfWidth::Fixed(xm) => {
            while ((k + 1) as f64) * h <= xm {
                k += 1;
                let x = k as f64 * h;
                put(k, f(x)?);
                put(-k, f(-x)?);
            }
        }
        HalfWidth::Auto { tol, cap } => {
            let mut quiet = 0usize;
            loop {
                k += 1;
                let x = k as f64 * h;
                if x > cap {
                    return Err(Error::BudgetExceeded("frequency cutoff reached its cap"));
                }
                let (a, b) = (f(x)?, f(-x)?);
                put(k, a);
                put(-k, b);
                let s = a.norm() + b.norm();
                mass += s;
                let scale = (mass * h / (2.0 * PI)).max(1.0);
                if s * x * amp / (2.0 * PI) < tol * scale {
                    quiet += 1;
                } else {
                    quiet = 0;
                }
                if quiet >= QUIET_RUN && x >= min_x {
                    break;
                }
            }
        }
    }
    fft_in_place(&mut bins, true);
    let scale = h / (2.0 * PI);
    for (j, b) in bins.iter_mut().enumerate() {
        *b *= scale * (-shift * grid.time(j)).exp();
    }
    Ok((
        bins,
        TransformInfo {
            x_max: k as f64 * h,
            samples: (2 * k + 1) as usize,
            step: h,
        },
    ))
}

/// One sampled member of a family.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Member {
    pub m: i64,
    pub values: Vec<C64>,
    /// L² norm over the grid.
    pub norm: f64,
    /// Half-width outside which the member vanishes in exact arithmetic.
    pub support: f64,
    /// Fraction of the squared norm found outside `[−support, support]`.
    pub outside_mass: f64,
    pub transform: TransformInfo,
}

fn grid_norm_and_outside(values: &[C64], grid: &TimeGrid, support: f64) -> (f64, f64) {
    let mut total = 0.0;
    let mut outside = 0.0;
    for (j, v) in values.iter().enumerate() {
        let q = v.norm_sqr() * grid.dt;
        total += q;
        if grid.time(j).abs() > support + 1e-9 * grid.dt {
            outside += q;
        }
    }
    (
        total.sqrt(),
        if total > 0.0 { outside / total } else { 0.0 },
    )
}

/// Samples `θ_m` on `grid`.
///
/// Negative times come from the real axis; `t ≥ 0` from the line `Im z = rate`,
/// where `rate` is the largest `Re λ̄_n` the family will meet. The factor
/// `e^{−rate·t}` then absorbs the growth of `e^{λ̄_n t}` and keeps the moments
/// free of cancellation.
pub fn theta_eval(
    interp: &EntireInterpolant<'_>,
    grid: &TimeGrid,
    budget: &QuadBudget,
    rate: f64,
) -> Result<Member> {
    let support = interp.exact_type();
    if grid.half_period() < support {
        return Err(Error::HorizonTooShort {
            needed: 2.0 * support,
            given: 2.0 * grid.half_period(),
        });
    }
    let min_x = 4.0 * interp.node().norm() + 8.0;
    let psi = |z: C64| interp.eval(z);
    let (mut values, mut info) = inverse_fourier(psi, 0.0, grid, budget, min_x, 2.0 * support)?;
    if rate > 0.0 {
        let (upper, up) = inverse_fourier(psi, rate, grid, budget, min_x, 2.0 * support)?;
        let mid = grid.len / 2;
        values[mid..].copy_from_slice(&upper[mid..]);
        info.x_max = info.x_max.max(up.x_max);
        info.samples += up.samples;
    }
    let (norm, outside) = grid_norm_and_outside(&values, grid, support);
    Ok(Member {
        m: interp.m,
        values,
        norm,
        support,
        outside_mass: outside,
        transform: info,
    })
}

/// `θ̃_m(t) = e^{imt}/(2π)` on `|t| < π`, zero elsewhere.
pub fn sinc_theta(m: i64, t: f64) -> C64 {
    if t.abs() > PI {
        return C64::new(0.0, 0.0);
    }
    C64::from_polar(1.0 / (2.0 * PI), m as f64 * t)
}

/// Analytic `∫_{−π}^{π} θ̃_m(t) e^{−int} dt`.
pub fn sinc_limit_moment(m: i64, n: i64) -> f64 {
    let d = (m - n) as f64;
    if m == n {
        1.0
    } else {
        (d * PI).sin() / (d * PI)
    }
}

/// Analytic biorthogonality matrix of the sinc-limit family.
pub fn sinc_limit_matrix(ms: &[i64], ns: &[i64]) -> CMatrix {
    CMatrix::from_fn(ms.len(), ns.len(), |i, j| {
        C64::new(sinc_limit_moment(ms[i], ns[j]), 0.0)
    })
}

/// `k_a(x) = (√(2π)/a²)(a − |x|)_+`, which has integral `√(2π)`.
pub fn triangle_kernel(a: f64, x: f64) -> f64 {
    (2.0 * PI).sqrt() / (a * a) * (a - x.abs()).max(0.0)
}

/// Fitted norm bound `‖θ_m‖ ≤ C e^{β|Re λ_m|}`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NormFit {
    pub c: f64,
    pub beta: f64,
}

impl NormFit {
    pub fn bound(&self, re: f64) -> f64 {
        self.c * (self.beta * re.abs()).exp()
    }
}

/// Least-squares slope of `ln‖θ_m‖` against `|Re λ_m|` (clamped at zero), then the
/// smallest `C` that makes the bound hold at every point.
pub fn fit_norm_bound(points: &[(f64, f64)]) -> NormFit {
    let xs: Vec<f64> = points.iter().map(|p| p.0.abs()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let spread =
        xs.iter().fold(0.0f64, |a, &x| a.max(x)) - xs.iter().fold(f64::INFINITY, |a, &x| a.min(x));
    let beta = if xs.len() >= 2 && spread > 1e-12 {
        fit_line(&xs, &ys).1.max(0.0)
    } else {
        0.0
    };
    let ln_c = xs
        .iter()
        .zip(&ys)
        .fold(f64::NEG_INFINITY, |a, (x, y)| a.max(y - beta * x));
    NormFit {
        c: ln_c.exp(),
        beta,
    }
}

/// A family of sampled functions on one grid.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BiorthogonalFamily {
    pub kind: FamilyKind,
    pub epsilon: f64,
    pub alpha: f64,
    pub grid: TimeGrid,
    /// Largest member support.
    pub support: f64,
    pub members: Vec<Member>,
    pub norm_fit: NormFit,
    /// Declared type `L₁ + ωL₂ + (1+k)δ` (zero for the sinc limit).
    pub declared_type: f64,
    pub omega: u32,
}

impl BiorthogonalFamily {
    pub fn member(&self, m: i64) -> Option<&Member> {
        self.members.iter().find(|x| x.m == m)
    }

    pub fn indices(&self) -> Vec<i64> {
        self.members.iter().map(|x| x.m).collect()
    }

    /// Linear interpolation of member `m` at time `t` (zero off the grid).
    pub fn value_at(&self, m: i64, t: f64) -> Option<C64> {
        let mem = self.member(m)?;
        let u = t / self.grid.dt + (self.grid.len / 2) as f64;
        if u < 0.0 || u > (self.grid.len - 1) as f64 {
            return Some(C64::new(0.0, 0.0));
        }
        let j = u.floor() as usize;
        let f = u - j as f64;
        if j + 1 >= self.grid.len || f == 0.0 {
            return Some(mem.values[j]);
        }
        Some(mem.values[j] * (1.0 - f) + mem.values[j + 1] * f)
    }

    fn refit(&mut self) {
        let pts: Vec<(f64, f64)> = self
            .members
            .iter()
            .filter(|x| x.norm > 0.0)
            .map(|x| (lambda_bar(x.m, self.epsilon, self.alpha).re, x.norm))
            .collect();
        self.norm_fit = fit_norm_bound(&pts);
    }
}

/// Grid spacing `dt` such that `T/2` is a grid point and the density is at least `points_per_unit`.
pub fn aligned_spacing(horizon: f64, points_per_unit: f64) -> f64 {
    let half = horizon / 2.0;
    half / (half * points_per_unit).ceil().max(1.0)
}

/// Builds `θ_m` for every `m` in `ms` on a grid of spacing `dt` whose half-period
/// covers the supports plus `margin` and at least `min_half`.
pub fn theta_family(
    set: &InterpolantSet,
    ms: &[i64],
    dt: f64,
    margin: f64,
    min_half: f64,
) -> Result<BiorthogonalFamily> {
    let grid = theta_grid(set, ms, dt, margin, min_half)?;
    let members = ms
        .iter()
        .map(|&m| theta_eval(&set.get(m)?, &grid, &set.quad, set.rate))
        .collect::<Result<Vec<_>>>()?;
    assemble_theta(set, ms, grid, members)
}

/// Grid used by [`theta_family`]; exposed so callers can build members in parallel.
pub fn theta_grid(
    set: &InterpolantSet,
    ms: &[i64],
    dt: f64,
    margin: f64,
    min_half: f64,
) -> Result<TimeGrid> {
    let mut support: f64 = 0.0;
    for &m in ms {
        support = support.max(set.get(m)?.exact_type());
    }
    TimeGrid::covering((support + margin.max(0.0)).max(min_half), dt)
}

/// Wraps members built on `grid` into a family and fits the norm bound.
pub fn assemble_theta(
    set: &InterpolantSet,
    ms: &[i64],
    grid: TimeGrid,
    members: Vec<Member>,
) -> Result<BiorthogonalFamily> {
    let mut declared: f64 = 0.0;
    for &m in ms {
        declared = declared.max(set.get(m)?.declared_type()?);
    }
    let support = members.iter().fold(0.0f64, |a, x| a.max(x.support));
    let mut fam = BiorthogonalFamily {
        kind: FamilyKind::Theta,
        epsilon: set.epsilon(),
        alpha: set.alpha(),
        grid,
        support,
        members,
        norm_fit: NormFit { c: 0.0, beta: 0.0 },
        declared_type: declared,
        omega: set.omega,
    };
    fam.refit();
    Ok(fam)
}

/// The closed-form ε = 0 family sampled on a grid with spacing `dt`.
pub fn sinc_limit_family(ms: &[i64], dt: f64, min_half: f64) -> Result<BiorthogonalFamily> {
    let grid = TimeGrid::covering((PI + dt).max(min_half), dt)?;
    let members = ms
        .iter()
        .map(|&m| {
            if m == 0 {
                return Err(Error::InvalidMode(0));
            }
            // jump points carry the mean of the one-sided limits
            let values: Vec<C64> = (0..grid.len)
                .map(|j| {
                    let t = grid.time(j);
                    if (t.abs() - PI).abs() < 1e-12 {
                        sinc_theta(m, t) * 0.5
                    } else {
                        sinc_theta(m, t)
                    }
                })
                .collect();
            let norm = 1.0 / (2.0 * PI).sqrt();
            Ok(Member {
                m,
                values,
                norm,
                support: PI,
                outside_mass: 0.0,
                transform: TransformInfo::default(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut fam = BiorthogonalFamily {
        kind: FamilyKind::SincLimit,
        epsilon: 0.0,
        alpha: 0.0,
        grid,
        support: PI,
        members,
        norm_fit: NormFit { c: 0.0, beta: 0.0 },
        declared_type: PI,
        omega: 0,
    };
    fam.refit();
    Ok(fam)
}

/// `ζ_m = (θ_m ∗ ρ_m)/R_m` with `ρ_m(x) = e^{ix·m}k_a(x)` and `R_m` the discrete
/// moment of `ρ_m` against `e^{λ̄_m t}`, so the `m`-th moment of `ζ_m` is one.
pub fn zeta_eval(theta: &BiorthogonalFamily, m: i64, a: f64) -> Result<Member> {
    if !(a > 0.0) {
        return Err(Error::InvalidParameter(
            "kernel half-width must be positive",
        ));
    }
    let mem = theta.member(m).ok_or(Error::InvalidMode(m))?;
    let grid = theta.grid;
    let support = mem.support + a;
    if grid.half_period() < support {
        return Err(Error::HorizonTooShort {
            needed: 2.0 * support,
            given: 2.0 * grid.half_period(),
        });
    }
    let dt = grid.dt;
    let lm = lambda_bar(m, theta.epsilon, theta.alpha);
    let w = (a / dt).ceil() as i64;
    let rho: Vec<C64> = (-w..=w)
        .map(|l| {
            let s = l as f64 * dt;
            C64::from_polar(triangle_kernel(a, s), m as f64 * s)
        })
        .collect();
    let r_m: C64 = rho
        .iter()
        .enumerate()
        .map(|(i, r)| r * (lm * ((i as i64 - w) as f64 * dt)).exp() * dt)
        .sum();
    if r_m.norm() < 1e-300 {
        return Err(Error::Underflow("smoothing kernel moment"));
    }
    let n = grid.len as i64;
    let mut values = vec![C64::new(0.0, 0.0); grid.len];
    for (j, out) in values.iter_mut().enumerate() {
        let mut acc = C64::new(0.0, 0.0);
        for (i, r) in rho.iter().enumerate() {
            let src = j as i64 - (i as i64 - w);
            if (0..n).contains(&src) {
                acc += mem.values[src as usize] * r;
            }
        }
        *out = acc * (dt / r_m);
    }
    let (norm, outside) = grid_norm_and_outside(&values, &grid, support);
    Ok(Member {
        m,
        values,
        norm,
        support,
        outside_mass: outside,
        transform: mem.transform,
    })
}

/// Smooths every member of a θ family.
pub fn zeta_family(theta: &BiorthogonalFamily, a: f64) -> Result<BiorthogonalFamily> {
    let members = theta
        .members
        .iter()
        .map(|x| zeta_eval(theta, x.m, a))
        .collect::<Result<Vec<_>>>()?;
    let mut fam = BiorthogonalFamily {
        kind: FamilyKind::Zeta,
        support: theta.support + a,
        members,
        ..theta.clone()
    };
    fam.refit();
    Ok(fam)
}

/// `B_mn = ∫_{−T_int}^{T_int} f_m(t) e^{λ̄_n t} dt` by the trapezoid rule on the
/// family grid, with the maximum deviation from the identity.
pub fn biorthogonality_matrix(
    fam: &BiorthogonalFamily,
    ms: &[i64],
    ns: &[i64],
    t_int: f64,
) -> Result<(CMatrix, f64)> {
    if t_int + 1e-9 < fam.support {
        return Err(Error::HorizonTooShort {
            needed: 2.0 * fam.support,
            given: 2.0 * t_int,
        });
    }
    let g = fam.grid;
    let (lo, hi) = g.window(t_int.min(g.half_period()));
    let mut b = CMatrix::zeros(ms.len(), ns.len());
    for (i, &m) in ms.iter().enumerate() {
        let mem = fam.member(m).ok_or(Error::InvalidMode(m))?;
        for (k, &n) in ns.iter().enumerate() {
            if n == 0 {
                return Err(Error::InvalidMode(0));
            }
            let ln = if fam.kind == FamilyKind::SincLimit {
                lambda_bar(n, 0.0, 0.0)
            } else {
                lambda_bar(n, fam.epsilon, fam.alpha)
            };
            let mut acc = C64::new(0.0, 0.0);
            for j in lo..=hi {
                acc += mem.values[j] * (ln * g.time(j)).exp() * g.dt;
            }
            b[(i, k)] = acc;
        }
    }
    let mut dev = 0.0f64;
    for (i, &m) in ms.iter().enumerate() {
        for (k, &n) in ns.iter().enumerate() {
            let want = if m == n { 1.0 } else { 0.0 };
            dev = dev.max((b[(i, k)] - want).norm());
        }
    }
    Ok((b, dev))
}

/// `∫|Σ c_m f_m|² / Σ|c_m|² e^{2β|Re λ_m|}` over the family grid.
pub fn stacked_norm_ratio(
    fam: &BiorthogonalFamily,
    coeffs: &[(i64, C64)],
    beta: f64,
) -> Result<f64> {
    let mut sum = vec![C64::new(0.0, 0.0); fam.grid.len];
    let mut den = 0.0;
    for &(m, c) in coeffs {
        let mem = fam.member(m).ok_or(Error::InvalidMode(m))?;
        for (s, v) in sum.iter_mut().zip(&mem.values) {
            *s += v * c;
        }
        let re = lambda_bar(m, fam.epsilon, fam.alpha).re.abs();
        den += c.norm_sqr() * (2.0 * beta * re).exp();
    }
    if den == 0.0 {
        return Err(Error::InvalidParameter("all coefficients are zero"));
    }
    let num: f64 = sum.iter().map(|v| v.norm_sqr()).sum::<f64>() * fam.grid.dt;
    Ok(num / den)
}

/// Cauchy–Schwarz ceiling `Σ_m ‖f_m‖² e^{−2β|Re λ_m|}` for [`stacked_norm_ratio`].
pub fn stacked_norm_ceiling(fam: &BiorthogonalFamily, ms: &[i64], beta: f64) -> Result<f64> {
    let mut acc = 0.0;
    for &m in ms {
        let mem = fam.member(m).ok_or(Error::InvalidMode(m))?;
        let re = lambda_bar(m, fam.epsilon, fam.alpha).re.abs();
        acc += mem.norm * mem.norm * (-2.0 * beta * re).exp();
    }
    Ok(acc)
}
