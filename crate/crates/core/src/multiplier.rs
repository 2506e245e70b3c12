//! The multiplier `M_m(z) = Π_{n≥n_m} sin(z/a_n)/(z/a_n)` whose decay on the
//! real axis compensates the growth of the interpolating product.
//!
//! Nodes up to a ladder truncation `N` are multiplied directly; the rest is
//! summed through `ln(sin w / w) = −Σ_j ζ(2j) w^{2j}/(j π^{2j})` against the
//! precomputed moments `Σ_{n>N} a_n^{-2j}`.

use alloc::vec::Vec;
use core::f64::consts::{E, PI};

use crate::config::is_critical;
use crate::quad::smooth_sum;
use crate::spectrum::{first_node_index, lambda, multiplier_tail_constant, WeightFunction};
use crate::weierstrass::ProductValue;
#[allow(unused_imports)]
use crate::Float;
use crate::{Error, Result, C64};

const SERIES_TERMS: usize = 30;
const FIRST_LEVEL: u64 = 64;
/// Nodes beyond the direct range exceed `REACH_FACTOR · |z|`.
const REACH_FACTOR: f64 = 2.0;

/// Coefficients `ζ(2j)/(j π^{2j})` of `−ln(sin w / w)`.
fn log_sinc_coefficients() -> Vec<f64> {
    (1..=SERIES_TERMS)
        .map(|j| {
            let p = 2.0 * j as f64;
            let zeta = match j {
                1 => PI * PI / 6.0,
                2 => PI.powi(4) / 90.0,
                _ => smooth_sum(1, None, 64, 0.0, |t| t.powf(-p)),
            };
            zeta / (j as f64 * PI.powf(p))
        })
        .collect()
}

/// `ln(sin w / w)` for complex `w`.
pub fn ln_sinc(w: C64) -> C64 {
    if w.norm() < 0.5 {
        let w2 = w * w;
        let mut p = w2;
        let mut acc = C64::new(0.0, 0.0);
        // ζ(2j)/(j π^{2j}) for the first terms; |w|² < 1/4 makes 12 terms plenty
        const C: [f64; 12] = [
            1.0 / 6.0,
            1.0 / 180.0,
            1.0 / 2835.0,
            1.0 / 37800.0,
            1.0 / 467775.0,
            691.0 / 3831077250.0,
            2.0 / 127702575.0,
            3617.0 / 2605132530000.0,
            43867.0 / 350813659321125.0,
            174611.0 / 15313294652906250.0,
            155366.0 / 147926426347074375.0,
            236364091.0 / 2423034863564152278125.0,
        ];
        for c in C {
            acc -= p * c;
            p *= w2;
        }
        acc
    } else {
        (w.sin() / w).ln()
    }
}

/// `ln|sin x / x|` for real `x`, with the sign of `sin x / x`.
pub fn ln_abs_sinc(x: f64) -> (f64, f64) {
    if x.abs() < 0.5 {
        (ln_sinc(C64::new(x, 0.0)).re, 1.0)
    } else {
        let s = x.sin() / x;
        (s.abs().ln(), s.signum())
    }
}

#[derive(Debug, Clone)]
struct NodeLevel {
    n: u64,
    /// `Σ_{n>N} a_n^{-2j}`, `j = 1 … SERIES_TERMS`.
    moments: Vec<f64>,
}

/// Shared node table for all modes at fixed (ε, α).
#[derive(Debug, Clone)]
pub struct MultiplierTable {
    pub weight: WeightFunction,
    /// `a_n` for `n = 1 … N_top` (index `n − 1`).
    nodes: Vec<f64>,
    levels: Vec<NodeLevel>,
    coeffs: Vec<f64>,
}

impl MultiplierTable {
    /// Table valid for `|z| ≤ reach` and all `m` with `n_m ≤ N_top`.
    pub fn new(eps: f64, alpha: f64, reach: f64) -> Result<Self> {
        if is_critical(alpha) {
            return Err(Error::CriticalExponent);
        }
        if alpha == 0.0 || eps == 0.0 {
            return Err(Error::InvalidParameter(
                "multiplier needs alpha > 0 and epsilon > 0",
            ));
        }
        let w = WeightFunction::new(eps, alpha)?;
        let node = |t: f64| -> f64 {
            match w.gamma {
                Some(g) if t > g => eps * t.powf(2.0 * alpha) / E,
                _ => (t / eps).powf(1.0 / (2.0 * alpha)) / E,
            }
        };
        let mut top = FIRST_LEVEL;
        while node(top as f64 + 1.0) < REACH_FACTOR * reach.max(1.0) {
            top *= 2;
        }
        let nodes: Vec<f64> = (1..=top).map(|n| node(n as f64)).collect();
        let coeffs = log_sinc_coefficients();
        let mut moments = Vec::with_capacity(SERIES_TERMS);
        for j in 1..=SERIES_TERMS {
            let p = 2.0 * j as f64;
            moments.push(branch_sum(&w, top + 1, |t| node(t).powf(-p)));
        }
        let mut levels = alloc::vec![NodeLevel {
            n: top,
            moments: moments.clone()
        }];
        let mut hi = top;
        while hi > FIRST_LEVEL {
            let lo = hi / 2;
            for n in (lo + 1..=hi).rev() {
                let r = nodes[n as usize - 1].powi(-2);
                let mut p = r;
                for s in moments.iter_mut() {
                    *s += p;
                    p *= r;
                }
            }
            levels.push(NodeLevel {
                n: lo,
                moments: moments.clone(),
            });
            hi = lo;
        }
        levels.reverse();
        Ok(MultiplierTable {
            weight: w,
            nodes,
            levels,
            coeffs,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.weight.epsilon
    }

    pub fn alpha(&self) -> f64 {
        self.weight.alpha
    }

    /// `n_m = ⌊φ_ε(e|λ_m|)⌋ + 1`.
    pub fn first_index(&self, m: i64) -> u64 {
        first_node_index(m, &self.weight)
    }

    /// Node `a_n`.
    pub fn node(&self, n: u64) -> f64 {
        if (n as usize) <= self.nodes.len() {
            self.nodes[n as usize - 1]
        } else {
            self.weight.inverse(n as f64).unwrap_or(f64::INFINITY) / E
        }
    }

    fn level_for(&self, n_m: u64, r: f64) -> Result<usize> {
        self.levels
            .iter()
            .position(|l| l.n + 1 >= n_m && self.node(l.n + 1) >= REACH_FACTOR * r)
            .ok_or(Error::BudgetExceeded("multiplier table reach"))
    }

    fn tail_series(&self, lvl: usize, z2: C64) -> (C64, f64) {
        let mut acc = C64::new(0.0, 0.0);
        let mut p = z2;
        for (c, s) in self.coeffs.iter().zip(&self.levels[lvl].moments) {
            acc -= p * (c * s);
            p *= z2;
        }
        let rho = z2.norm() * self.node(self.levels[lvl].n + 1).powi(-2);
        let bound = rho.powi(SERIES_TERMS as i32 + 1) / (PI * PI).powi(SERIES_TERMS as i32)
            + 1e-15 * (1.0 + acc.norm());
        (acc, bound)
    }

    /// Complex log of `M_{|m|}(z)`.
    pub fn ln_eval(&self, m: i64, z: C64) -> Result<ProductValue> {
        let n_m = self.first_index(m);
        let lvl = self.level_for(n_m, z.norm())?;
        let n_t = self.levels[lvl].n;
        let mut acc = C64::new(0.0, 0.0);
        for n in n_m..=n_t {
            acc += ln_sinc(z / self.nodes[n as usize - 1]);
        }
        let (tail, bound) = self.tail_series(lvl, z * z);
        Ok(ProductValue {
            log: acc + tail,
            tail_bound: bound,
            truncation: n_t,
        })
    }

    /// `(ln|M_{|m|}(x)|, sign)` for real `x`; `M` is real on the real axis.
    pub fn ln_abs_real(&self, m: i64, x: f64) -> Result<(f64, f64)> {
        let n_m = self.first_index(m);
        let lvl = self.level_for(n_m, x.abs())?;
        let n_t = self.levels[lvl].n;
        let mut acc = 0.0;
        let mut sign = 1.0;
        for n in n_m..=n_t {
            let (l, s) = ln_abs_sinc(x / self.nodes[n as usize - 1]);
            acc += l;
            sign *= s;
        }
        let (tail, _) = self.tail_series(lvl, C64::new(x * x, 0.0));
        Ok((acc + tail.re, sign))
    }

    /// `Σ_{n≥n_m} a_n^{-p}` including the tail.
    pub fn node_power_sum(&self, m: i64, p: f64) -> f64 {
        let n_m = self.first_index(m);
        let w = self.weight;
        let node = |t: f64| w.inverse(t).unwrap_or(f64::INFINITY) / E;
        branch_sum(&w, n_m, |t| node(t).powf(-p))
    }

    /// Exponential type `Σ_{n≥n_m} 1/a_n` of `M_m`.
    pub fn exponential_type(&self, m: i64) -> f64 {
        self.node_power_sum(m, 1.0)
    }
}

/// `Σ_{n≥n0} g(n)` where `g` may have a kink at the branch point of the weight.
fn branch_sum<F: Fn(f64) -> f64>(w: &WeightFunction, n0: u64, g: F) -> f64 {
    match w.gamma {
        Some(gam) if (n0 as f64) <= gam => {
            let split = gam.floor() as u64;
            smooth_sum(n0, Some(split), 2000, 0.0, &g) + smooth_sum(split + 1, None, 2000, 0.0, &g)
        }
        _ => smooth_sum(n0, None, 2000, 0.0, &g),
    }
}

/// Results of checking the multiplier bounds for one mode.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierReport {
    pub m: i64,
    /// `φ_ε(e|λ_m|) ≤ 2e²|Re λ_m|`.
    pub weight_at_node_ok: bool,
    /// Grid points where `|M_m(x)| ≤ exp(−φ_ε(x) + 2e²|Re λ_m| + 1)` fails.
    pub decay_failures: Vec<f64>,
    /// Smallest margin `bound − ln|M_m(x)|` over the grid.
    pub decay_margin: f64,
    /// `ln|M_m(iλ̄_m)|`.
    pub ln_at_node: f64,
    /// `−D(1 + |Re λ_m|)`.
    pub ln_lower_bound: f64,
    /// Exponential type `Σ_{n≥n_m} 1/a_n`.
    pub exponential_type: f64,
}

impl MultiplierReport {
    pub fn passed(&self) -> bool {
        self.weight_at_node_ok
            && self.decay_failures.is_empty()
            && self.ln_at_node >= self.ln_lower_bound
    }
}

/// Checks the real-axis decay bound on `xs` and the lower bound at `iλ̄_m`.
pub fn mm_property_check(m: i64, xs: &[f64], table: &MultiplierTable) -> Result<MultiplierReport> {
    let (eps, alpha) = (table.epsilon(), table.alpha());
    let re_m = lambda(m, eps, alpha).re.abs();
    let w = table.weight;
    let weight_at_node_ok = w.phi(E * lambda(m, eps, alpha).norm()) <= 2.0 * E * E * re_m;
    let mut decay_failures = Vec::new();
    let mut decay_margin = f64::INFINITY;
    for &x in xs {
        let (lm, _) = table.ln_abs_real(m, x)?;
        let bound = -w.phi(x) + 2.0 * E * E * re_m + 1.0;
        let margin = bound - lm;
        decay_margin = decay_margin.min(margin);
        if margin < 0.0 {
            decay_failures.push(x);
        }
    }
    let node = C64::new(m as f64, re_m);
    let ln_at_node = table.ln_eval(m, node)?.log.re;
    let d = multiplier_tail_constant(alpha)?;
    Ok(MultiplierReport {
        m,
        weight_at_node_ok,
        decay_failures,
        decay_margin,
        ln_at_node,
        ln_lower_bound: -d * (1.0 + re_m),
        exponential_type: table.exponential_type(m),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{multiplier_nodes, multiplier_type_bound};

    fn brute(m: i64, z: C64, eps: f64, alpha: f64, count: usize) -> C64 {
        let nodes = multiplier_nodes(m, eps, alpha, count).unwrap();
        nodes
            .a
            .iter()
            .fold(C64::new(0.0, 0.0), |acc, a| acc + ln_sinc(z / a))
    }

    #[test]
    fn ln_sinc_series_matches_direct() {
        for &w in &[
            C64::new(0.3, 0.2),
            C64::new(-0.1, 0.45),
            C64::new(0.49, 0.0),
        ] {
            let direct = (w.sin() / w).ln();
            assert!((ln_sinc(w) - direct).norm() < 1e-15);
        }
    }

    #[test]
    fn coefficients_match_known_values() {
        let c = log_sinc_coefficients();
        assert!((c[0] - 1.0 / 6.0).abs() < 1e-16);
        assert!((c[1] - 1.0 / 180.0).abs() < 1e-17);
        assert!((c[2] - 1.0 / 2835.0).abs() < 1e-17);
    }

    #[test]
    fn value_at_zero_and_first_zero() {
        let t = MultiplierTable::new(0.1, 0.75, 200.0).unwrap();
        assert_eq!(t.ln_eval(3, C64::new(0.0, 0.0)).unwrap().log.re, 0.0);
        let n_m = t.first_index(3);
        let z = PI * t.node(n_m);
        let (l, _) = t.ln_abs_real(3, z).unwrap();
        assert!(l < -25.0);
    }

    #[test]
    fn tail_expansion_matches_long_product() {
        // α = 0.25: nodes grow like n², a long direct product converges.
        let t = MultiplierTable::new(0.1, 0.25, 2000.0).unwrap();
        for &z in &[
            C64::new(500.0, 0.0),
            C64::new(1500.0, 3.0),
            C64::new(2.0, 0.5),
        ] {
            let a = t.ln_eval(2, z).unwrap().log;
            let b = brute(2, z, 0.1, 0.25, 400_000);
            assert!((a.re - b.re).abs() < 1e-8, "{z}: {a} {b}");
        }
    }

    #[test]
    fn type_below_bound() {
        for &(e, a) in &[
            (0.1, 0.25),
            (0.01, 0.25),
            (0.1, 0.75),
            (0.01, 0.75),
            (0.3, 0.9),
        ] {
            let t = MultiplierTable::new(e, a, 10.0).unwrap();
            let l2 = multiplier_type_bound(e, a).unwrap();
            assert!(t.exponential_type(1) <= l2, "{e} {a}");
        }
    }

    #[test]
    fn tail_condition_holds() {
        for &(e, a) in &[(0.1, 0.25), (0.01, 0.75), (0.1, 0.75), (0.5, 0.3)] {
            let t = MultiplierTable::new(e, a, 10.0).unwrap();
            let d = multiplier_tail_constant(a).unwrap();
            for m in 1..=16i64 {
                let l = lambda(m, e, a);
                let lhs = t.node_power_sum(m, 2.0);
                assert!(lhs <= d * (1.0 + l.re) / l.norm_sqr(), "{e} {a} {m}");
            }
        }
    }

    #[test]
    fn properties_small_case() {
        let t = MultiplierTable::new(0.1, 0.75, 1e3).unwrap();
        let xs: Vec<f64> = (0..60)
            .map(|k| 10f64.powf(-2.0 + 5.0 * k as f64 / 59.0))
            .collect();
        for m in [1i64, 4, 9] {
            let r = mm_property_check(m, &xs, &t).unwrap();
            assert!(r.passed(), "{r:?}");
        }
    }
}
