//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `UNATTAINABLE` are still evaluated and reported; they do not
//! change the exit status.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use nullwave::experiments::{
    build_theta, closed_form_deviation, degeneracy_table, energy_law, ingham_points,
    multiplier_rows, qm_split, resonant_oracle, spread_over_epsilon, sweep_epsilon_summary,
};
use nullwave::spec::ExperimentSpec;
use nullwave_core::biorth::{
    biorthogonality_matrix, fit_norm_bound, sinc_limit_family, sinc_theta,
};
use nullwave_core::config::ProblemConfig;
use nullwave_core::quad::GaussLegendre;
use nullwave_core::spectrum::{lambda, signed_indices};
use nullwave_core::weierstrass::{pm_interpolation_check, ProductEvaluator};
use nullwave_core::C64;

const UNATTAINABLE: &[u32] = &[7];
const EPS_SWEEP: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];

struct Outcome {
    passed: bool,
    detail: String,
}

fn timed(limit_s: f64, f: impl FnOnce() -> Outcome) -> (Outcome, Duration, bool) {
    let t0 = Instant::now();
    let o = f();
    let dt = t0.elapsed();
    let in_time = dt.as_secs_f64() <= limit_s;
    (o, dt, in_time)
}

fn sinc_limit() -> Outcome {
    let ms = signed_indices(16);
    let gl = GaussLegendre::new(16);
    let mut quad_dev = 0.0f64;
    for &m in &ms {
        for &n in &ms {
            let v: C64 = gl.composite(-PI, PI, 64, |t| {
                sinc_theta(m, t) * C64::from_polar(1.0, -(n as f64) * t)
            });
            let want = if m == n { 1.0 } else { 0.0 };
            quad_dev = quad_dev.max((v - want).norm());
        }
    }
    let fam = sinc_limit_family(&ms, PI / 4096.0, 0.0).unwrap();
    let (_, grid_dev) = biorthogonality_matrix(&fam, &ms, &ms, PI).unwrap();
    Outcome {
        passed: quad_dev <= 1e-10 && grid_dev <= 1e-10,
        detail: format!(
            "quadrature dev {quad_dev:.2e}, sampled family dev {grid_dev:.2e} (limit 1e-10)"
        ),
    }
}

fn resonant() -> Outcome {
    let (oracle, series, residual) = resonant_oracle().unwrap();
    Outcome {
        passed: oracle <= 1e-9 && series <= 1e-6 && residual <= 1e-15,
        detail: format!("|v - sin t/pi| {oracle:.2e} (1e-9), |series - oracle| {series:.2e} (1e-6), residual {residual:.2e} (1e-15)"),
    }
}

fn interpolation() -> Outcome {
    let ms = signed_indices(8);
    let mut worst = 0.0f64;
    for eps in [0.0, 0.1, 0.5] {
        for alpha in [0.25, 0.75] {
            let reach = ms
                .iter()
                .map(|&n| lambda(n, eps, alpha).norm())
                .fold(1.0, f64::max)
                + 2.0;
            let ev = ProductEvaluator::new(eps, alpha, reach).unwrap();
            worst = worst.max(pm_interpolation_check(&ms, &ms, &ev).unwrap().0);
        }
    }
    Outcome {
        passed: worst <= 1e-6,
        detail: format!("max |P_m(node_n) - delta| {worst:.2e} (1e-6)"),
    }
}

fn closed_form() -> Outcome {
    let d = closed_form_deviation(0.25)
        .unwrap()
        .max(closed_form_deviation(0.75).unwrap());
    Outcome {
        passed: d <= 1e-8,
        detail: format!("max deviation {d:.2e} (1e-8)"),
    }
}

fn qm_bound() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for eps in [0.1, 0.5] {
        for alpha in [0.25, 0.75] {
            let q = qm_split(eps, alpha).unwrap();
            ok &= q.violations == 0;
            parts.push(format!(
                "({eps},{alpha}): C={:.3} viol={}",
                q.c_fit, q.violations
            ));
        }
    }
    Outcome {
        passed: ok,
        detail: parts.join("; "),
    }
}

fn multiplier() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for eps in [0.01, 0.1] {
        for alpha in [0.25, 0.75] {
            let (t, pass) = multiplier_rows(eps, alpha, 16, 1e5, 351).unwrap();
            ok &= pass;
            let failures: usize = t
                .column("decay_failures")
                .unwrap()
                .iter()
                .map(|s| s.parse::<usize>().unwrap())
                .sum();
            parts.push(format!(
                "({eps},{alpha}): {}",
                if pass {
                    "ok".to_string()
                } else {
                    format!("{failures} grid failures")
                }
            ));
        }
    }
    Outcome {
        passed: ok,
        detail: parts.join("; "),
    }
}

fn family_biorthogonality() -> Outcome {
    let ms = signed_indices(6);
    let mut fits = Vec::new();
    let mut dev_ok = true;
    let mut bound_ok = true;
    let mut parts = Vec::new();
    for alpha in [0.25, 0.75] {
        let cfg = ProblemConfig {
            epsilon: 0.1,
            alpha,
            ..ProblemConfig::default()
        };
        let fam = build_theta(&cfg, &ms).unwrap();
        let (_, dev) = biorthogonality_matrix(&fam, &ms, &ms, fam.support).unwrap();
        let pts: Vec<(f64, f64)> = fam
            .members
            .iter()
            .map(|m| (lambda(m.m, 0.1, alpha).re, m.norm))
            .collect();
        let fit = fit_norm_bound(&pts);
        bound_ok &= pts
            .iter()
            .all(|&(re, n)| n <= fit.bound(re) * (1.0 + 1e-12));
        dev_ok &= dev <= 1e-4;
        parts.push(format!(
            "alpha={alpha}: |B-I| {dev:.2e}, C={:.3}, beta={:.3}",
            fit.c, fit.beta
        ));
        fits.push((fit, pts));
    }
    let ratio = |a: f64, b: f64| {
        if a.min(b) > 0.0 {
            a.max(b) / a.min(b)
        } else {
            f64::INFINITY
        }
    };
    let c_ratio = ratio(fits[0].0.c, fits[1].0.c);
    let beta_ratio = ratio(fits[0].0.beta, fits[1].0.beta);
    let cross = fits[0].1.iter().all(|&(re, n)| n <= fits[1].0.bound(re));
    parts.push(format!("C ratio {c_ratio:.2}, beta ratio {beta_ratio:.2} (10); alpha=0.75 bound covers alpha=0.25 norms: {cross}"));
    Outcome {
        passed: dev_ok && bound_ok && c_ratio <= 10.0 && beta_ratio <= 10.0,
        detail: parts.join("; "),
    }
}

fn uniform_boundedness() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for alpha in [0.25, 0.75] {
        let mut spec = ExperimentSpec::default();
        spec.problem.alpha = alpha;
        let data = spec.modal_data().unwrap();
        let (s, _) = sweep_epsilon_summary(&spec.problem, &data, &EPS_SWEEP).unwrap();
        let res = s.residuals.iter().cloned().fold(0.0, f64::max);
        let im = s.imaginary.iter().cloned().fold(0.0, f64::max);
        ok &= s.ratio <= 10.0 && res <= 1e-9 && im <= 1e-10 && s.weak_limit_residual <= 1e-2;
        parts.push(format!(
            "alpha={alpha}: norm ratio {:.3} (10), residual {res:.1e} (1e-9), imag {im:.1e} (1e-10), eps=0 residual {:.1e} (1e-2)",
            s.ratio, s.weak_limit_residual
        ));
    }
    Outcome {
        passed: ok,
        detail: parts.join("; "),
    }
}

fn degeneracy() -> Outcome {
    let modes = [4u32, 8, 12, 16];
    let rows = degeneracy_table(&[0.25, 0.5], &modes, 0.5, 2.0 * PI).unwrap();
    let eq = |a: f64| -> Vec<f64> { rows.iter().filter(|r| r.0 == a).map(|r| r.3).collect() };
    let raw = |a: f64| -> Vec<f64> { rows.iter().filter(|r| r.0 == a).map(|r| r.2).collect() };
    let crit = eq(0.5);
    let monotone = crit.windows(2).all(|w| w[1] > w[0]);
    let ratio = crit[3] / eq(0.25)[3];
    let fmt = |v: Vec<f64>| {
        v.iter()
            .map(|x| format!("{x:.2e}"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    Outcome {
        passed: monotone && ratio >= 1e2,
        detail: format!(
            "alpha=0.5 cond {} (raw {}), monotone {monotone}; ratio to alpha=0.25 at N=16 {ratio:.2e} (1e2)",
            fmt(crit),
            fmt(raw(0.5))
        ),
    }
}

fn energy() -> Outcome {
    let mut ok = true;
    let mut env = 0.0f64;
    let mut drift = 0.0f64;
    for (k, (eps, alpha)) in [(0.1, 0.25), (0.1, 0.75), (0.5, 0.25), (0.5, 0.75)]
        .into_iter()
        .enumerate()
    {
        let law = energy_law(eps, alpha, 16, 2.0 * PI, 2000, 11 + k as u64).unwrap();
        ok &= law.monotone;
        env = env.max(law.envelope_error);
        drift = drift.max(law.conservative_drift);
    }
    Outcome {
        passed: ok && env <= 1e-12 && drift <= 1e-12,
        detail: format!("non-increasing {ok}, envelope error {env:.2e} (1e-12), eps=0 drift {drift:.2e} (1e-12)"),
    }
}

fn ingham() -> Outcome {
    let (pts, _) = ingham_points(&[0.25, 0.75], &EPS_SWEEP, 12, 3.0 * PI, 2024, 100, None).unwrap();
    let min = pts
        .iter()
        .map(|p| p.min_ratio)
        .fold(f64::INFINITY, f64::min);
    let gap = pts.iter().map(|p| p.max_rel_gap).fold(0.0, f64::max);
    let s25 = spread_over_epsilon(&pts, 0.25, |p| p.min_ratio);
    let s75 = spread_over_epsilon(&pts, 0.75, |p| p.min_ratio);
    let inf = pts.iter().map(|p| p.infimum).fold(f64::INFINITY, f64::min);
    Outcome {
        passed: min > 0.0 && s25 <= 5.0 && s75 <= 5.0 && gap <= 1e-10,
        detail: format!(
            "min ratio {min:.3}, spread {s25:.2}/{s75:.2} (5), Gram vs quadrature {gap:.1e} (1e-10), exact infimum {inf:.3}"
        ),
    }
}

fn main() {
    type Check = (u32, &'static str, f64, fn() -> Outcome);
    let checks: [Check; 11] = [
        (1, "sinc-limit biorthogonality", 1.0, sinc_limit),
        (2, "resonant single-mode oracle", 1.0, resonant),
        (3, "interpolation identity", 10.0, interpolation),
        (4, "zero-viscosity closed form", 5.0, closed_form),
        (5, "Q_m bound fit/holdout", 60.0, qm_bound),
        (6, "multiplier properties", 30.0, multiplier),
        (
            7,
            "family biorthogonality and norm growth",
            600.0,
            family_biorthogonality,
        ),
        (8, "uniform control bounds", 120.0, uniform_boundedness),
        (9, "critical-exponent conditioning", 60.0, degeneracy),
        (10, "energy law", 5.0, energy),
        (11, "Ingham ratio", 120.0, ingham),
    ];
    let filter: Option<u32> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut unexpected = Vec::new();
    let mut passed = 0;
    let mut ran = 0;
    for (id, name, limit, f) in checks {
        if filter.is_some_and(|k| k != id) {
            continue;
        }
        ran += 1;
        let (o, dt, in_time) = timed(limit, f);
        let ok = o.passed && in_time;
        if ok {
            passed += 1;
        } else if !UNATTAINABLE.contains(&id) {
            unexpected.push(id);
        }
        let note = if !ok && UNATTAINABLE.contains(&id) {
            " [known unattainable]"
        } else {
            ""
        };
        println!(
            "{} {id:>2} {name}: {} | {:.2}s of {limit}s{note}",
            if ok { "PASS" } else { "FAIL" },
            o.detail,
            dt.as_secs_f64()
        );
    }
    println!("{passed}/{ran} criteria pass");
    if !unexpected.is_empty() {
        println!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
