//! The interpolating product
//! `P_m(z) = Π_{n≠m} (λ̄_n + iz)/(λ̄_n − λ̄_m)`, which equals `δ_mn` at `z = iλ̄_n`.
//!
//! Factors with indices `n` and `−n` are always taken together. The product is
//! evaluated directly for `0 < |n| ≤ N` and the remainder through its log
//! expansion in the power moments `S_k = Σ_{|n|>N} λ̄_n^{-k}`, which are
//! precomputed once for a ladder of truncations `N`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::config::is_critical;
use crate::quad::smooth_sum;
use crate::spectrum::{lambda_bar, WeightFunction};
#[allow(unused_imports)]
use crate::Float;
use crate::{Error, Result, C64};

const MOMENTS: usize = 40;
const FIRST_LEVEL: u64 = 64;
/// Direct range must exceed `REACH_FACTOR · max(|z|, |λ_m|)`.
const REACH_FACTOR: f64 = 4.0;

/// Log of a product value with its truncation data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductValue {
    /// Complex logarithm (real part `ln|P|`); `-∞` real part for an exact zero.
    pub log: C64,
    /// Bound on the error of `log` from the tail expansion.
    pub tail_bound: f64,
    /// Direct truncation `N` used.
    pub truncation: u64,
}

impl ProductValue {
    pub fn value(&self) -> C64 {
        if self.log.re == f64::NEG_INFINITY {
            C64::new(0.0, 0.0)
        } else {
            self.log.exp()
        }
    }
    pub fn ln_abs(&self) -> f64 {
        self.log.re
    }
}

#[derive(Debug, Clone)]
struct TailLevel {
    n: u64,
    /// `S_1 … S_K`; real by conjugate symmetry of the spectrum.
    moments: Vec<f64>,
}

/// Precomputed spectrum and tail moments for fixed (ε, α).
#[derive(Debug, Clone)]
pub struct ProductEvaluator {
    pub epsilon: f64,
    pub alpha: f64,
    /// `λ̄_n` for `n = 1 … N_top` (index `n − 1`); negative indices by conjugation.
    lbar: Vec<C64>,
    levels: Vec<TailLevel>,
}

impl ProductEvaluator {
    /// Builds an evaluator valid for `|z| ≤ reach` and `|λ_m| ≤ reach`.
    pub fn new(eps: f64, alpha: f64, reach: f64) -> Result<Self> {
        if is_critical(alpha) {
            return Err(Error::CriticalExponent);
        }
        if !(0.0..1.0).contains(&alpha) || !(0.0..1.0).contains(&eps) {
            return Err(Error::InvalidParameter(
                "alpha and epsilon must lie in [0, 1)",
            ));
        }
        let mut top = FIRST_LEVEL;
        while (top as f64) < REACH_FACTOR * reach.max(1.0) {
            top *= 2;
        }
        let lbar: Vec<C64> = (1..=top as i64)
            .map(|n| lambda_bar(n, eps, alpha))
            .collect();
        let knee = WeightFunction::new(eps, alpha)?.gamma.unwrap_or(0.0);
        let g = |k: i32, t: f64| -> f64 {
            let w = C64::new(
                if eps == 0.0 {
                    0.0
                } else {
                    eps * t.powf(2.0 * alpha)
                },
                -t,
            );
            2.0 * w.powi(-k).re
        };
        let mut moments: Vec<f64> = (1..=MOMENTS as i32)
            .map(|k| smooth_sum(top + 1, None, 2000, knee, |t| g(k, t)))
            .collect();
        let mut levels = Vec::new();
        levels.push(TailLevel {
            n: top,
            moments: moments.clone(),
        });
        let mut hi = top;
        while hi > FIRST_LEVEL {
            let lo = hi / 2;
            for n in (lo + 1..=hi).rev() {
                let r = lbar[n as usize - 1].inv();
                let mut p = r;
                for s in moments.iter_mut() {
                    *s += 2.0 * p.re;
                    p *= r;
                }
            }
            levels.push(TailLevel {
                n: lo,
                moments: moments.clone(),
            });
            hi = lo;
        }
        levels.reverse();
        Ok(ProductEvaluator {
            epsilon: eps,
            alpha,
            lbar,
            levels,
        })
    }

    /// Largest `max(|z|, |λ_m|)` this evaluator supports.
    pub fn reach(&self) -> f64 {
        self.levels
            .last()
            .map(|l| l.n as f64 / REACH_FACTOR)
            .unwrap_or(0.0)
    }

    /// Truncations available, ascending.
    pub fn truncations(&self) -> Vec<u64> {
        self.levels.iter().map(|l| l.n).collect()
    }

    #[inline]
    fn lbar_of(&self, n: i64) -> C64 {
        let v = self.lbar[n.unsigned_abs() as usize - 1];
        if n > 0 {
            v
        } else {
            v.conj()
        }
    }

    fn level_for(&self, r: f64) -> Result<usize> {
        self.levels
            .iter()
            .position(|l| l.n as f64 >= REACH_FACTOR * r)
            .ok_or(Error::BudgetExceeded("product evaluator reach"))
    }

    /// `P_m(z)` with automatically chosen truncation.
    pub fn eval(&self, m: i64, z: C64) -> Result<ProductValue> {
        if m == 0 {
            return Err(Error::InvalidMode(0));
        }
        let r = z
            .norm()
            .max(self.lbar_of(m).norm())
            .max(m.unsigned_abs() as f64);
        let lvl = self.level_for(r)?;
        self.eval_at_level(m, z, lvl)
    }

    /// `P_m(z)` with the truncation of ladder level `lvl`; fails when the
    /// tail expansion would not converge there.
    pub fn eval_at_level(&self, m: i64, z: C64, lvl: usize) -> Result<ProductValue> {
        let level = self
            .levels
            .get(lvl)
            .ok_or(Error::BudgetExceeded("product level"))?;
        let lm = self.lbar_of(m);
        let r = z.norm().max(lm.norm());
        let n_t = level.n;
        if (m.unsigned_abs()) > n_t || REACH_FACTOR * r > n_t as f64 * 1.000001 {
            return Err(Error::BudgetExceeded("truncation too small for argument"));
        }
        let iz = C64::i() * z;
        let mut acc = C64::new(1.0, 0.0);
        let mut scale = 0.0;
        for n in 1..=n_t as i64 {
            let lp = self.lbar[n as usize - 1];
            let ln = lp.conj();
            let mut f = C64::new(1.0, 0.0);
            if n != m {
                f *= (lp + iz) / (lp - lm);
            }
            if -n != m {
                f *= (ln + iz) / (ln - lm);
            }
            acc *= f;
            if n % 16 == 0 {
                let a = acc.norm();
                if a == 0.0 {
                    break;
                }
                if !(1e-150..=1e150).contains(&a) {
                    scale += a.ln();
                    acc /= a;
                }
            }
        }
        if acc == C64::new(0.0, 0.0) {
            return Ok(ProductValue {
                log: C64::new(f64::NEG_INFINITY, 0.0),
                tail_bound: 0.0,
                truncation: n_t,
            });
        }
        let mut tail = C64::new(0.0, 0.0);
        let mut pz = iz;
        let ml = -lm;
        let mut pm = ml;
        for (k, s) in level.moments.iter().enumerate() {
            let kf = (k + 1) as f64;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            tail += (pz - pm) * (sign * s / kf);
            pz *= iz;
            pm *= ml;
        }
        let nt = n_t as f64;
        let rho = r / nt;
        let kk = MOMENTS as f64;
        let remainder = 2.0 * nt * rho.powf(kk + 1.0) / (kk * (kk + 1.0) * (1.0 - rho));
        let tail_bound = remainder + 1e-14 * (1.0 + tail.norm());
        Ok(ProductValue {
            log: acc.ln() + scale + tail,
            tail_bound,
            truncation: n_t,
        })
    }

    /// `P_m(iλ̄_n)`; exactly zero for `n ≠ m` in the direct range.
    pub fn at_node(&self, m: i64, n: i64) -> Result<C64> {
        let z = C64::i() * self.lbar_of(n);
        Ok(self.eval(m, z)?.value())
    }
}

/// Closed form of the ε = 0 product, `(−1)^m m sin(πz)/(πz(z−m))`.
pub fn pm_closed_form_eps0(m: i64, z: C64) -> C64 {
    let mf = m as f64;
    let sign = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    if z.norm() < 1e-8 {
        // sin(πz)/(πz) → 1
        return C64::new(sign * mf, 0.0) / (z - mf);
    }
    if (z - mf).norm() < 1e-8 {
        return C64::new(1.0, 0.0);
    }
    (z * PI).sin() * (sign * mf) / (z * PI * (z - mf))
}

/// Largest `|P_m(iλ̄_n) − δ_mn|` over the index ranges, with the full table.
pub fn pm_interpolation_check(
    ms: &[i64],
    ns: &[i64],
    ev: &ProductEvaluator,
) -> Result<(f64, Vec<(i64, i64, f64)>)> {
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for &m in ms {
        for &n in ns {
            let v = ev.at_node(m, n)?;
            let target = if m == n { 1.0 } else { 0.0 };
            let d = (v - target).norm();
            worst = worst.max(d);
            rows.push((m, n, d));
        }
    }
    Ok((worst, rows))
}

/// One row of the bound table `Q_m ≤ 16 exp(C ε m^{2α})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QmRow {
    pub m: i64,
    pub ln_q: f64,
    /// `ε m^{2α}`, the exponent scale.
    pub scale: f64,
}

/// `Q_m = Π_{n≠m} |λ_n/(λ_n − λ_m)|`, which equals `|P_m(0)|`.
pub fn qm_table(ms: &[i64], ev: &ProductEvaluator) -> Result<Vec<QmRow>> {
    ms.iter()
        .map(|&m| {
            let v = ev.eval(m, C64::new(0.0, 0.0))?;
            Ok(QmRow {
                m,
                ln_q: v.ln_abs(),
                scale: ev.epsilon * (m.unsigned_abs() as f64).powf(2.0 * ev.alpha),
            })
        })
        .collect()
}

/// Smallest `C ≥ 0` with `ln Q_m ≤ ln 16 + C ε m^{2α}` on the rows.
pub fn fit_qm_constant(rows: &[QmRow]) -> f64 {
    rows.iter().fold(0.0f64, |c, r| {
        let excess = r.ln_q - 16f64.ln();
        if excess <= 0.0 {
            c
        } else if r.scale > 0.0 {
            c.max(excess / r.scale)
        } else {
            f64::INFINITY
        }
    })
}

/// Rows violating the bound with constant `c`.
pub fn qm_violations(rows: &[QmRow], c: f64) -> Vec<QmRow> {
    rows.iter()
        .copied()
        .filter(|r| r.ln_q > 16f64.ln() + c * r.scale + 1e-12)
        .collect()
}

/// Fitted real-axis envelope `|P_m(x)| ≤ C exp(ω(φ_ε(x) + |Re λ_m|))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeFit {
    pub omega: f64,
    pub c: f64,
}

/// Fits the envelope on a grid of real points.
///
/// `C` is the largest `|P_m|` where the exponent is at most 1 (at least 1),
/// then `ω` the smallest value covering the rest of the grid.
pub fn envelope_fit(m: i64, xs: &[f64], ev: &ProductEvaluator) -> Result<EnvelopeFit> {
    let w = WeightFunction::new(ev.epsilon, ev.alpha)?;
    let re_m = lambda_bar(m, ev.epsilon, ev.alpha).re.abs();
    let mut pts = Vec::with_capacity(xs.len());
    for &x in xs {
        let lp = ev.eval(m, C64::new(x, 0.0))?.ln_abs();
        pts.push((w.phi(x) + re_m, lp));
    }
    let ln_c = pts
        .iter()
        .filter(|p| p.0 <= 1.0)
        .fold(0.0f64, |a, p| a.max(p.1));
    let omega = pts
        .iter()
        .filter(|p| p.0 > 0.0)
        .fold(0.0f64, |a, p| a.max((p.1 - ln_c) / p.0));
    Ok(EnvelopeFit {
        omega,
        c: ln_c.exp(),
    })
}

/// True when the envelope holds at every grid point.
pub fn envelope_holds(m: i64, xs: &[f64], fit: EnvelopeFit, ev: &ProductEvaluator) -> Result<bool> {
    let w = WeightFunction::new(ev.epsilon, ev.alpha)?;
    let re_m = lambda_bar(m, ev.epsilon, ev.alpha).re.abs();
    for &x in xs {
        let lp = ev.eval(m, C64::new(x, 0.0))?.ln_abs();
        if lp > fit.c.ln() + fit.omega * (w.phi(x) + re_m) + 1e-9 {
            return Ok(false);
        }
    }
    Ok(true)
}
