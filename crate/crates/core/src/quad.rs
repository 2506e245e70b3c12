//! Quadrature helpers: Gauss–Legendre panels, log-substituted tails and
//! Euler–Maclaurin sums of smooth sequences.

use alloc::vec::Vec;

#[allow(unused_imports)]
use crate::Float;

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        let mut nodes = alloc::vec![0.0; n];
        let mut weights = alloc::vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (core::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                let pn = if n == 0 { 1.0 } else { p1 };
                let pm = if n == 1 { 1.0 } else { p0 };
                dp = nf * (x * pn - pm) / (x * x - 1.0);
                let dx = pn / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// `∫_a^b f` with one panel.
    pub fn integrate<T, F>(&self, a: f64, b: f64, mut f: F) -> T
    where
        T: core::ops::Add<Output = T> + core::ops::Mul<f64, Output = T> + Default,
        F: FnMut(f64) -> T,
    {
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        let mut acc = T::default();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + f(c + h * x) * (w * h);
        }
        acc
    }

    /// `∫_a^b f` with `panels` equal panels.
    pub fn composite<T, F>(&self, a: f64, b: f64, panels: usize, mut f: F) -> T
    where
        T: core::ops::Add<Output = T> + core::ops::Mul<f64, Output = T> + Default,
        F: FnMut(f64) -> T,
    {
        let h = (b - a) / panels as f64;
        let mut acc = T::default();
        for p in 0..panels {
            let lo = a + p as f64 * h;
            acc = acc + self.integrate(lo, lo + h, &mut f);
        }
        acc
    }
}

/// `∫_a^b g(t) dt` for `0 < a < b ≤ ∞`, substituting `t = a e^u`.
///
/// Suited to integrands with power-law behaviour. For an infinite upper limit
/// the integration stops once panels stay negligible beyond `knee`.
pub fn log_integral<F: FnMut(f64) -> f64>(a: f64, b: Option<f64>, knee: f64, mut g: F) -> f64 {
    let gl = GaussLegendre::new(16);
    let du = 0.25;
    let mut h = |u: f64| {
        let t = a * u.exp();
        g(t) * t
    };
    match b {
        Some(b) => {
            let umax = (b / a).ln();
            let panels = ((umax / du).ceil() as usize).max(1);
            gl.composite(0.0, umax, panels, h)
        }
        None => {
            let u_knee = if knee > a { (knee / a).ln() } else { 0.0 };
            let mut acc = 0.0;
            let mut quiet = 0;
            let mut u = 0.0;
            while u < 700.0 {
                let p = gl.integrate(u, u + du, &mut h);
                acc += p;
                u += du;
                if u > u_knee + 1.0 && p.abs() <= 1e-19 * acc.abs().max(1e-300) {
                    quiet += 1;
                    if quiet >= 8 {
                        break;
                    }
                } else {
                    quiet = 0;
                }
            }
            acc
        }
    }
}

/// `Σ_{n=n0}^{n1} g(n)` for a sequence that is smooth in `n`; `n1 = None` means ∞.
///
/// Sums directly up to `n0 + direct` and uses the Euler–Maclaurin formula with
/// a numerical first derivative for the rest.
pub fn smooth_sum<F: FnMut(f64) -> f64>(
    n0: u64,
    n1: Option<u64>,
    direct: u64,
    knee: f64,
    mut g: F,
) -> f64 {
    let split = n0.saturating_add(direct);
    let end_direct = match n1 {
        Some(e) => e.min(split),
        None => split,
    };
    let mut acc = 0.0;
    let mut k = end_direct;
    while k >= n0 {
        acc += g(k as f64);
        if k == 0 {
            break;
        }
        k -= 1;
    }
    if let Some(e) = n1 {
        if e <= split {
            return acc;
        }
    }
    let a = (split + 1) as f64;
    let d = |g: &mut F, t: f64| {
        let h = 1e-2 * t;
        (8.0 * (g(t + h) - g(t - h)) - (g(t + 2.0 * h) - g(t - 2.0 * h))) / (12.0 * h)
    };
    let d3 = |g: &mut F, t: f64| {
        let h = 0.02 * t;
        (g(t + 2.0 * h) - 2.0 * g(t + h) + 2.0 * g(t - h) - g(t - 2.0 * h)) / (2.0 * h * h * h)
    };
    match n1 {
        Some(e) => {
            let b = e as f64;
            let ga = g(a);
            let gb = g(b);
            let corr =
                (d(&mut g, b) - d(&mut g, a)) / 12.0 - (d3(&mut g, b) - d3(&mut g, a)) / 720.0;
            acc + log_integral(a, Some(b), knee, &mut g) + 0.5 * (ga + gb) + corr
        }
        None => {
            let ga = g(a);
            let corr = -d(&mut g, a) / 12.0 + d3(&mut g, a) / 720.0;
            acc + log_integral(a, None, knee, &mut g) + 0.5 * ga + corr
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        let gl = GaussLegendre::new(16);
        let v: f64 = gl.integrate(0.0, 2.0, |x| x.powi(31));
        assert!((v - 2f64.powi(32) / 32.0).abs() < 1e-6 * v);
        let s: f64 = gl.weights.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
    }

    #[test]
    fn zeta_two_tail() {
        // Σ_{n>100} 1/n² = ψ'(101)
        let s = smooth_sum(101, None, 2000, 0.0, |t| 1.0 / (t * t));
        let exact = 0.009950166663333571;
        assert!((s - exact).abs() < 1e-16, "{s}");
    }

    #[test]
    fn slow_tail() {
        // Σ_{n≥1} n^{-1.5} = ζ(1.5)
        let s = smooth_sum(1, None, 2000, 0.0, |t| t.powf(-1.5));
        assert!((s - 2.612375348685488).abs() < 1e-13, "{s}");
    }

    #[test]
    fn finite_range() {
        let s = smooth_sum(10, Some(100_000), 100, 0.0, |t| 1.0 / t);
        let direct = 9.261177875895174;
        assert!((s - direct).abs() < 1e-12, "{s} {direct}");
    }
}
