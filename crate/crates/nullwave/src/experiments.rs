//! The computations behind each subcommand. Every function returns a [`Report`]
//! whose tables are written by the caller.

use std::f64::consts::PI;

use anyhow::{bail, Context};
use nullwave_core::biorth::{
    assemble_theta, biorthogonality_matrix, sinc_limit_family, theta_eval, theta_grid, zeta_family,
    BiorthogonalFamily, InterpolantSet,
};
use nullwave_core::config::{is_critical, ProblemConfig, Purpose};
use nullwave_core::linalg::CMatrix;
use nullwave_core::modal::{ControlSignal, ModalState, ModeData};
use nullwave_core::moment::{
    gram_condition, ingham_infimum, ingham_ratio, ingham_ratio_quadrature, minnorm_control,
    synthesize_control_series, MomentSystem,
};
use nullwave_core::multiplier::{mm_property_check, MultiplierTable};
use nullwave_core::pde::{energy, final_residual, simulate, ModeDynamics, System};
use nullwave_core::spectrum::{eigenvalue, lambda, signed_indices, Family};
use nullwave_core::weierstrass::{
    envelope_fit, envelope_holds, fit_qm_constant, pm_closed_form_eps0, pm_interpolation_check,
    qm_table, qm_violations, ProductEvaluator,
};
use nullwave_core::C64;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde_json::json;

use crate::report::{num, Fitted, Report, Table};
use crate::spec::{ControlPath, ExperimentSpec};

/// Samples per unit time used for controls and simulations.
pub const CONTROL_SAMPLES_PER_UNIT: f64 = 1024.0;

fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

fn reach_for(ns: impl IntoIterator<Item = i64>, eps: f64, alpha: f64) -> f64 {
    ns.into_iter()
        .map(|n| lambda(n, eps, alpha).norm())
        .fold(1.0, f64::max)
        + 2.0
}

fn intervals(horizon: f64) -> usize {
    (horizon * CONTROL_SAMPLES_PER_UNIT).ceil() as usize
}

fn is_sorted_descending(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] > w[1])
}

/// Eigenvalue families on `−N … N`.
pub fn spectrum_dump(spec: &ExperimentSpec) -> anyhow::Result<Report> {
    let s = spec.validated(Purpose::Diagnostic)?;
    let p = &s.problem;
    let mut t = Table::new("spectrum", &["family", "n", "re", "im"]);
    for (name, fam) in [
        ("lambda", Family::Lambda),
        ("mu", Family::Mu),
        ("nu", Family::Nu),
    ] {
        for n in signed_indices(p.n_modes) {
            let v = eigenvalue(fam, n, p.epsilon, p.alpha)?;
            t.push(vec![name.into(), n.to_string(), num(v.re), num(v.im)]);
        }
    }
    Ok(Report::new(vec![t]))
}

/// Largest `ω̂` of the real-axis envelope of `P_m` over `1 ≤ m ≤ n_max`.
pub fn envelope_omega(eps: f64, alpha: f64, n_max: u32) -> anyhow::Result<f64> {
    if eps == 0.0 {
        return Ok(0.0);
    }
    let xs = log_grid(1e-2, 1e3, 201);
    let ev = ProductEvaluator::new(eps, alpha, 1e3 + reach_for(1..=n_max as i64, eps, alpha))?;
    let mut w = 0.0f64;
    for m in 1..=n_max as i64 {
        w = w.max(envelope_fit(m, &xs, &ev)?.omega);
    }
    Ok(w)
}

/// Outcome of the `Q_m` fit on `1..32` and holdout on `33..64`.
#[derive(Debug, Clone)]
pub struct QmSplit {
    pub c_fit: f64,
    pub violations: usize,
    pub table: Table,
}

pub fn qm_split(eps: f64, alpha: f64) -> anyhow::Result<QmSplit> {
    let ev = ProductEvaluator::new(eps, alpha, reach_for([64], eps, alpha))?;
    let fit_ms: Vec<i64> = (1..=32).collect();
    let hold_ms: Vec<i64> = (33..=64).collect();
    let fit = qm_table(&fit_ms, &ev)?;
    let hold = qm_table(&hold_ms, &ev)?;
    let c = fit_qm_constant(&fit);
    let violations = qm_violations(&hold, c).len();
    let mut t = Table::new("qm", &["m", "q_m", "bound", "set"]);
    for (rows, set) in [(&fit, "fit"), (&hold, "holdout")] {
        for r in rows.iter() {
            t.push(vec![
                r.m.to_string(),
                num(r.ln_q.exp()),
                num(16.0 * (c * r.scale).exp()),
                set.into(),
            ]);
        }
    }
    Ok(QmSplit {
        c_fit: c,
        violations,
        table: t,
    })
}

/// Largest deviation from the ε = 0 closed form on `[−20, 20]` for `m ∈ {1, 2, 5}`.
pub fn closed_form_deviation(alpha: f64) -> anyhow::Result<f64> {
    let ev = ProductEvaluator::new(0.0, alpha, 25.0)?;
    let mut worst = 0.0f64;
    for m in [1i64, 2, 5] {
        for i in 0..=8000 {
            let x = -20.0 + 40.0 * i as f64 / 8000.0;
            if x.abs() < 1e-3 || (x - m as f64).abs() < 1e-3 {
                continue;
            }
            let z = C64::new(x, 0.0);
            worst = worst.max((ev.eval(m, z)?.value() - pm_closed_form_eps0(m, z)).norm());
        }
    }
    Ok(worst)
}

/// Interpolation identity, ε = 0 closed form, `Q_m` bound and real-axis envelope.
pub fn weierstrass_check(spec: &ExperimentSpec) -> anyhow::Result<Report> {
    let s = spec.validated(Purpose::Synthesis)?;
    let p = &s.problem;
    let tol = &s.tolerances;
    let ms = signed_indices(p.n_modes);
    let ev = ProductEvaluator::new(
        p.epsilon,
        p.alpha,
        1e3 + reach_for(ms.iter().copied(), p.epsilon, p.alpha),
    )?;
    let (interp_dev, rows) = pm_interpolation_check(&ms, &ms, &ev)?;
    let mut ti = Table::new("interpolation", &["m", "n", "deviation"]);
    for (m, n, d) in rows {
        ti.push(vec![m.to_string(), n.to_string(), num(d)]);
    }
    let closed = closed_form_deviation(p.alpha)?;
    let xs = log_grid(1e-2, 1e3, 201);
    let mut te = Table::new("envelope", &["m", "x", "abs_p", "envelope"]);
    let mut omega = 0.0f64;
    let mut c_env = 0.0f64;
    let mut env_ok = true;
    let phi = nullwave_core::spectrum::WeightFunction::new(p.epsilon, p.alpha)?;
    for m in 1..=p.n_modes as i64 {
        let fit = envelope_fit(m, &xs, &ev)?;
        env_ok &= envelope_holds(m, &xs, fit, &ev)?;
        omega = omega.max(fit.omega);
        c_env = c_env.max(fit.c);
        let re_m = lambda(m, p.epsilon, p.alpha).re;
        for &x in &xs {
            let v = ev.eval(m, C64::new(x, 0.0))?.ln_abs().exp();
            te.push(vec![
                m.to_string(),
                num(x),
                num(v),
                num(fit.c * (fit.omega * (phi.phi(x) + re_m)).exp()),
            ]);
        }
    }
    let mut tables = vec![ti, te];
    let mut q_summary = json!(null);
    let mut q_ok = true;
    let mut c_q = None;
    if p.epsilon > 0.0 {
        let q = qm_split(p.epsilon, p.alpha)?;
        q_ok = q.violations == 0;
        c_q = Some(q.c_fit);
        q_summary = json!({ "c_fit": q.c_fit, "holdout_violations": q.violations });
        tables.push(q.table);
    }
    let mut r = Report::new(tables);
    r.fitted = Fitted {
        omega: Some(omega),
        beta: None,
        c: c_q.or(Some(c_env)),
    };
    r.summary = json!({
        "interpolation_deviation": interp_dev,
        "closed_form_deviation": closed,
        "envelope_holds": env_ok,
        "envelope_c": c_env,
        "qm": q_summary,
    });
    r.truncation = json!({ "product_truncations": ev.truncations() });
    r.passed = interp_dev <= tol.interpolation && closed <= tol.closed_form && q_ok && env_ok;
    Ok(r)
}

/// Multiplier decay and node bounds for `1 ≤ m ≤ N` on a log grid of `[1e-2, x_max]`.
pub fn multiplier_rows(
    eps: f64,
    alpha: f64,
    n_max: u32,
    x_max: f64,
    points: usize,
) -> anyhow::Result<(Table, bool)> {
    let table = MultiplierTable::new(eps, alpha, x_max + reach_for(1..=n_max as i64, eps, alpha))?;
    let xs = log_grid(1e-2, x_max, points);
    let reports = (1..=n_max as i64)
        .into_par_iter()
        .map(|m| mm_property_check(m, &xs, &table))
        .collect::<Result<Vec<_>, _>>()?;
    let mut t = Table::new(
        "multiplier",
        &[
            "m",
            "weight_at_node_ok",
            "decay_failures",
            "decay_margin",
            "ln_at_node",
            "ln_lower_bound",
            "exponential_type",
            "passed",
        ],
    );
    let mut ok = true;
    for r in reports {
        ok &= r.passed();
        t.push(vec![
            r.m.to_string(),
            r.weight_at_node_ok.to_string(),
            r.decay_failures.len().to_string(),
            num(r.decay_margin),
            num(r.ln_at_node),
            num(r.ln_lower_bound),
            num(r.exponential_type),
            r.passed().to_string(),
        ]);
    }
    Ok((t, ok))
}

pub fn multiplier_check(spec: &ExperimentSpec) -> anyhow::Result<Report> {
    let s = spec.validated(Purpose::Synthesis)?;
    let p = &s.problem;
    if !(p.epsilon > 0.0 && p.alpha > 0.0) {
        bail!("the multiplier exists only for epsilon > 0 and alpha > 0");
    }
    let (t, ok) = multiplier_rows(p.epsilon, p.alpha, p.n_modes, 1e5, 141)?;
    let mut r = Report::new(vec![t]);
    r.passed = ok;
    Ok(r)
}

/// `θ_m` for every index in `ms`, members built in parallel.
pub fn build_theta(cfg: &ProblemConfig, ms: &[i64]) -> anyhow::Result<BiorthogonalFamily> {
    let dt = 1.0 / cfg.time_grid;
    if cfg.epsilon == 0.0 {
        return Ok(sinc_limit_family(ms, dt, 0.0)?);
    }
    let set = InterpolantSet::new(cfg, ms)?;
    let grid = theta_grid(&set, ms, dt, 1.0, 0.0)?;
    let members = ms
        .par_iter()
        .map(|&m| theta_eval(&set.get(m)?, &grid, &set.quad, set.rate))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(assemble_theta(&set, ms, grid, members)?)
}

fn deviation_table(name: &str, ms: &[i64], b: &CMatrix) -> Table {
    let mut t = Table::new(name, &["m", "n", "re", "im", "deviation"]);
    for (i, &m) in ms.iter().enumerate() {
        for (k, &n) in ms.iter().enumerate() {
            let v = b[(i, k)];
            let want = if m == n { 1.0 } else { 0.0 };
            t.push(vec![
                m.to_string(),
                n.to_string(),
                num(v.re),
                num(v.im),
                num((v - want).norm()),
            ]);
        }
    }
    t
}

/// Biorthogonal family on `|m| ≤ N`: norm table and deviation matrices for θ and ζ.
pub fn biorth(spec: &ExperimentSpec) -> anyhow::Result<Report> {
    let s = spec.validated(Purpose::Synthesis)?;
    let p = &s.problem;
    let ms = signed_indices(p.n_modes);
    let theta = build_theta(p, &ms)?;
    let (b, dev) = biorthogonality_matrix(&theta, &ms, &ms, theta.support)?;
    let zeta = zeta_family(&theta, p.smoothing_a)?;
    let (bz, dev_z) = biorthogonality_matrix(&zeta, &ms, &ms, zeta.support)?;
    let mut tn = Table::new(
        "norms",
        &[
            "m",
            "re_lambda",
            "theta_norm",
            "zeta_norm",
            "support",
            "outside_mass",
            "x_max",
        ],
    );
    for (a, z) in theta.members.iter().zip(&zeta.members) {
        tn.push(vec![
            a.m.to_string(),
            num(lambda(a.m, p.epsilon, p.alpha).re),
            num(a.norm),
            num(z.norm),
            num(a.support),
            num(a.outside_mass),
            num(a.transform.x_max),
        ]);
    }
    let mut r = Report::new(vec![
        tn,
        deviation_table("theta_deviation", &ms, &b),
        deviation_table("zeta_deviation", &ms, &bz),
    ]);
    r.fitted = Fitted {
        omega: Some(theta.omega as f64),
        beta: Some(theta.norm_fit.beta),
        c: Some(theta.norm_fit.c),
    };
    r.summary = json!({
        "theta_deviation": dev,
        "zeta_deviation": dev_z,
        "support": theta.support,
        "declared_type": theta.declared_type,
        "grid_len": theta.grid.len,
        "grid_dt": theta.grid.dt,
    });
    r.truncation = json!({
        "x_max": theta.members.iter().map(|m| m.transform.x_max).collect::<Vec<_>>(),
        "samples": theta.members.iter().map(|m| m.transform.samples).collect::<Vec<_>>(),
    });
    r.passed = dev <= s.tolerances.biorthogonality && dev_z <= s.tolerances.biorthogonality;
    Ok(r)
}

/// A synthesized control with its diagnostics.
#[derive(Debug, Clone)]
pub struct ControlOutcome {
    pub control: ControlSignal,
    pub norm: f64,
    pub condition: Option<f64>,
    pub condition_equilibrated: Option<f64>,
    pub residual: f64,
    pub imaginary: f64,
}

/// Solves the moment problem for `data` and checks the control on the damped system.
pub fn solve_control(
    cfg: &ProblemConfig,
    data: &ModalState,
    path: ControlPath,
    family: Option<&BiorthogonalFamily>,
) -> anyhow::Result<ControlOutcome> {
    if is_critical(cfg.alpha) {
        bail!(nullwave_core::Error::CriticalExponent);
    }
    let sys = MomentSystem::new(data, cfg.n_modes, cfg.horizon_t, cfg.epsilon, cfg.alpha)?;
    let steps = intervals(cfg.horizon_t);
    let (control, norm, cond, cond_eq) = match path {
        ControlPath::Oracle => {
            let sol = minnorm_control(&sys, steps, 0.0)?;
            let norm = sol.norm(&sys);
            (
                sol.control,
                norm,
                Some(sol.condition),
                Some(sol.condition_equilibrated),
            )
        }
        ControlPath::Series => {
            let owned;
            let fam = match family {
                Some(f) => f,
                None => {
                    owned = build_theta(cfg, &sys.indices)?;
                    &owned
                }
            };
            let v = synthesize_control_series(&sys, fam, steps)?;
            let norm = v.l2_norm();
            (v, norm, None, None)
        }
    };
    let tr = simulate(
        System::Damped,
        data,
        cfg.n_modes,
        cfg.epsilon,
        cfg.alpha,
        &control,
        usize::MAX,
    )?;
    let residual = final_residual(
        System::Damped,
        &tr.final_state,
        &tr.initial,
        cfg.epsilon,
        cfg.alpha,
    );
    let imaginary = control.max_imag();
    Ok(ControlOutcome {
        control,
        norm,
        condition: cond,
        condition_equilibrated: cond_eq,
        residual,
        imaginary,
    })
}

/// Final-energy ratio left by `control` on the system with viscosity `eps`.
pub fn residual_on(
    data: &ModalState,
    n_max: u32,
    eps: f64,
    alpha: f64,
    control: &ControlSignal,
) -> anyhow::Result<f64> {
    let tr = simulate(System::Damped, data, n_max, eps, alpha, control, usize::MAX)?;
    Ok(final_residual(
        System::Damped,
        &tr.final_state,
        &tr.initial,
        eps,
        alpha,
    ))
}

const CONTROL_HEADER: [&str; 10] = [
    "epsilon",
    "alpha",
    "n_modes",
    "horizon",
    "path",
    "norm",
    "cond",
    "cond_equilibrated",
    "final_residual",
    "max_imag",
];

fn control_row(cfg: &ProblemConfig, path: &str, o: &ControlOutcome) -> Vec<String> {
    let opt = |x: Option<f64>| x.map(num).unwrap_or_default();
    vec![
        num(cfg.epsilon),
        num(cfg.alpha),
        cfg.n_modes.to_string(),
        num(cfg.horizon_t),
        path.into(),
        num(o.norm),
        opt(o.condition),
        opt(o.condition_equilibrated),
        num(o.residual),
        num(o.imaginary),
    ]
}

fn path_name(p: ControlPath) -> &'static str {
    match p {
        ControlPath::Oracle => "oracle",
        ControlPath::Series => "series",
    }
}

pub fn control_solve(spec: &ExperimentSpec) -> anyhow::Result<Report> {
    let s = spec.validated(Purpose::Synthesis)?;
    let data = s.modal_data()?;
    let o = solve_control(&s.problem, &data, s.path, None)?;
    let mut t = Table::new("control", &CONTROL_HEADER);
    t.push(control_row(&s.problem, path_name(s.path), &o));
    let mut tv = Table::new("control_samples", &["t", "re", "im"]);
    let every = (o.control.intervals() / 2048).max(1);
    for (j, v) in o.control.samples.iter().enumerate() {
        if j % every == 0 || j == o.control.intervals() {
            tv.push(vec![num(o.control.time(j)), num(v.re), num(v.im)]);
        }
    }
    let limit = match s.path {
        ControlPath::Oracle => s.tolerances.oracle_residual,
        ControlPath::Series => s.tolerances.series_residual,
    };
    let mut r = Report::new(vec![t, tv]);
    r.summary = json!({ "norm": o.norm, "final_residual": o.residual, "max_imag": o.imaginary, "residual_limit": limit });
    r.passed = o.residual <= limit && o.imaginary <= s.tolerances.imaginary;
    Ok(r)
}

/// Summary of an ε sweep with oracle controls.
#[derive(Debug, Clone)]
pub struct SweepSummary {
    pub norms: Vec<f64>,
    pub residuals: Vec<f64>,
    pub imaginary: Vec<f64>,
    pub ratio: f64,
    pub weak_limit_residual: f64,
}

pub fn sweep_epsilon_summary(
    cfg: &ProblemConfig,
    data: &ModalState,
    eps: &[f64],
) -> anyhow::Result<(SweepSummary, Table)> {
    if eps.is_empty() || !is_sorted_descending(eps) {
        bail!("epsilon list must be non-empty and sorted in descending order");
    }
    let outcomes = eps
        .par_iter()
        .map(|&e| {
            let c = ProblemConfig {
                epsilon: e,
                ..cfg.clone()
            };
            solve_control(&c, data, ControlPath::Oracle, None).map(|o| (c, o))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    let mut t = Table::new("sweep", &CONTROL_HEADER);
    for (c, o) in &outcomes {
        t.push(control_row(c, "oracle", o));
    }
    let (_, last) = outcomes.last().context("empty sweep")?;
    let weak = residual_on(data, cfg.n_modes, 0.0, cfg.alpha, &last.control)?;
    t.push(vec![
        num(0.0),
        num(cfg.alpha),
        cfg.n_modes.to_string(),
        num(cfg.horizon_t),
        "weak_limit".into(),
        num(last.norm),
        String::new(),
        String::new(),
        num(weak),
        num(last.imaginary),
    ]);
    let norms: Vec<f64> = outcomes.iter().map(|(_, o)| o.norm).collect();
    let hi = norms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = norms.iter().cloned().fold(f64::INFINITY, f64::min);
    let summary = SweepSummary {
        ratio: hi / lo,
        residuals: outcomes.iter().map(|(_, o)| o.residual).collect(),
        imaginary: outcomes.iter().map(|(_, o)| o.imaginary).collect(),
        norms,
        weak_limit_residual: weak,
    };
    Ok((summary, t))
}

pub fn sweep_epsilon(spec: &ExperimentSpec) -> anyhow::Result<Report> {
    let s = spec.validated(Purpose::Synthesis)?;
    let data = s.modal_data()?;
    let (sum, t) = sweep_epsilon_summary(&s.problem, &data, &s.sweep.epsilon)?;
    let tol = &s.tolerances;
    let mut r = Report::new(vec![t]);
    r.summary = json!({
        "norm_ratio": sum.ratio,
        "max_residual": sum.residuals.iter().cloned().fold(0.0, f64::max),
        "max_imag": sum.imaginary.iter().cloned().fold(0.0, f64::max),
        "weak_limit_residual": sum.weak_limit_residual,
    });
    r.passed = sum.ratio <= 10.0
        && sum.residuals.iter().all(|&x| x <= tol.oracle_residual)
        && sum.imaginary.iter().all(|&x| x <= tol.imaginary)
        && sum.weak_limit_residual <= tol.weak_limit_residual;
    Ok(r)
}

/// Condition numbers `(raw, equilibrated)` of the Gram matrix for every `(α, N)`.
pub fn degeneracy_table(
    alphas: &[f64],
    modes: &[u32],
    eps: f64,
    horizon: f64,
) -> anyhow::Result<Vec<(f64, u32, f64, f64)>> {
    let pts: Vec<(f64, u32)> = alphas
        .iter()
        .flat_map(|&a| modes.iter().map(move |&n| (a, n)))
        .collect();
    pts.par_iter()
        .map(|&(a, n)| {
            let (raw, eq) = gram_condition(&signed_indices(n), eps, a, horizon)?;
            Ok((a, n, raw, eq))
        })
        .collect()
}

pub fn degeneracy(spec: &ExperimentSpec) -> anyhow::Result<Report> {
    let s = spec.validated(Purpose::Diagnostic)?;
    let p = &s.problem;
    let rows = degeneracy_table(&s.sweep.alpha, &s.sweep.modes, p.epsilon, p.horizon_t)?;
    let mut t = Table::new(
        "degeneracy",
        &[
            "alpha",
            "n_modes",
            "epsilon",
            "horizon",
            "cond",
            "cond_equilibrated",
        ],
    );
    for &(a, n, raw, eq) in &rows {
        t.push(vec![
            num(a),
            n.to_string(),
            num(p.epsilon),
            num(p.horizon_t),
            num(raw),
            num(eq),
        ]);
    }
    let series =
        |alpha: f64| -> Vec<f64> { rows.iter().filter(|r| r.0 == alpha).map(|r| r.3).collect() };
    let crit = series(0.5);
    let monotone = crit.windows(2).all(|w| w[1] > w[0]);
    let last = |v: &[f64]| v.last().copied();
    let ratio = match (last(&crit), last(&series(0.25))) {
        (Some(a), Some(b)) => Some(a / b),
        _ => None,
    };
    let mut r = Report::new(vec![t]);
    r.summary = json!({ "critical_monotone": monotone, "critical_over_quarter": ratio });
    r.passed = crit.is_empty() || (monotone && ratio.map_or(true, |x| x >= 1e2));
    Ok(r)
}

/// One seeded coefficient draw: 1 to 4 distinct indices with complex normal values.
pub fn ingham_draw(seed: u64, trial: u64, n_max: u32) -> Vec<(i64, C64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ trial.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let idx = signed_indices(n_max);
    let k = rng.gen_range(1..=4usize.min(idx.len()));
    let mut picks: Vec<usize> = sample(&mut rng, idx.len(), k).into_vec();
    picks.sort_unstable();
    picks
        .into_iter()
        .map(|i| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            (idx[i], C64::new(re, im))
        })
        .collect()
}

/// Per-`(α, ε)` statistics of the Ingham ratio over the draws.
#[derive(Debug, Clone, PartialEq)]
pub struct InghamPoint {
    pub alpha: f64,
    pub epsilon: f64,
    pub omega_weight: f64,
    pub min_ratio: f64,
    pub infimum: f64,
    pub max_rel_gap: f64,
}

pub fn ingham_points(
    alphas: &[f64],
    eps: &[f64],
    n_max: u32,
    horizon: f64,
    seed: u64,
    trials: usize,
    omega_weight: Option<f64>,
) -> anyhow::Result<(Vec<InghamPoint>, Table)> {
    let draws: Vec<Vec<(i64, C64)>> = (0..trials as u64)
        .map(|k| ingham_draw(seed, k, n_max))
        .collect();
    let panels = ((2.0 * horizon * n_max as f64).ceil() as usize).max(64);
    let pts: Vec<(f64, f64)> = alphas
        .iter()
        .flat_map(|&a| eps.iter().map(move |&e| (a, e)))
        .collect();
    let results = pts
        .par_iter()
        .map(
            |&(a, e)| -> anyhow::Result<(InghamPoint, Vec<Vec<String>>)> {
                let w = match omega_weight {
                    Some(w) => w,
                    None if is_critical(a) => 0.0,
                    None => envelope_omega(e, a, n_max)?,
                };
                let mut rows = Vec::with_capacity(draws.len());
                let mut min_ratio = f64::INFINITY;
                let mut gap = 0.0f64;
                for (k, d) in draws.iter().enumerate() {
                    let g = ingham_ratio(d, e, a, horizon, w)?;
                    let q = ingham_ratio_quadrature(d, e, a, horizon, w, panels)?;
                    min_ratio = min_ratio.min(g);
                    gap = gap.max((g - q).abs() / g.abs());
                    let support: Vec<String> = d.iter().map(|p| p.0.to_string()).collect();
                    rows.push(vec![
                        num(a),
                        num(e),
                        k.to_string(),
                        support.join(" "),
                        num(w),
                        num(g),
                        num(q),
                    ]);
                }
                let infimum = ingham_infimum(&signed_indices(n_max), e, a, horizon, w)?;
                Ok((
                    InghamPoint {
                        alpha: a,
                        epsilon: e,
                        omega_weight: w,
                        min_ratio,
                        infimum,
                        max_rel_gap: gap,
                    },
                    rows,
                ))
            },
        )
        .collect::<anyhow::Result<Vec<_>>>()?;
    let mut t = Table::new(
        "ingham",
        &[
            "alpha",
            "epsilon",
            "trial",
            "support",
            "omega_weight",
            "ratio",
            "ratio_quadrature",
        ],
    );
    let mut out = Vec::new();
    for (p, rows) in results {
        out.push(p);
        for r in rows {
            t.push(r);
        }
    }
    Ok((out, t))
}

/// Largest over smallest of `f` across the points with the given α.
pub fn spread_over_epsilon(
    points: &[InghamPoint],
    alpha: f64,
    f: impl Fn(&InghamPoint) -> f64,
) -> f64 {
    let v: Vec<f64> = points.iter().filter(|p| p.alpha == alpha).map(f).collect();
    let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
    hi / lo
}

pub fn ingham_run(spec: &ExperimentSpec) -> anyhow::Result<Report> {
    let s = spec.validated(Purpose::Diagnostic)?;
    let p = &s.problem;
    let (pts, t) = ingham_points(
        &s.sweep.alpha,
        &s.sweep.epsilon,
        p.n_modes,
        p.horizon_t,
        s.seed,
        s.trials,
        s.omega_weight,
    )?;
    let mut ts = Table::new(
        "ingham_summary",
        &[
            "alpha",
            "epsilon",
            "omega_weight",
            "min_ratio",
            "infimum",
            "max_rel_gap",
        ],
    );
    for q in &pts {
        ts.push(vec![
            num(q.alpha),
            num(q.epsilon),
            num(q.omega_weight),
            num(q.min_ratio),
            num(q.infimum),
            num(q.max_rel_gap),
        ]);
    }
    let mut spreads = Vec::new();
    let mut ok = pts
        .iter()
        .all(|q| q.min_ratio > 0.0 && q.max_rel_gap <= s.tolerances.ingham_agreement);
    for &a in &s.sweep.alpha {
        let sp = spread_over_epsilon(&pts, a, |q| q.min_ratio);
        if !is_critical(a) {
            ok &= sp <= 5.0;
        }
        spreads.push(json!({ "alpha": a, "min_ratio_spread": sp, "infimum_spread": spread_over_epsilon(&pts, a, |q| q.infimum) }));
    }
    let mut r = Report::new(vec![t, ts]);
    let w = pts.iter().map(|q| q.omega_weight).fold(0.0, f64::max);
    r.fitted = Fitted {
        omega: Some(w),
        beta: None,
        c: None,
    };
    r.summary = json!({ "spreads": spreads, "trials": s.trials, "seed": s.seed });
    r.passed = ok;
    Ok(r)
}

/// Energy trajectory under the configured control, or with no control when `free`.
pub fn simulate_run(spec: &ExperimentSpec, free: bool) -> anyhow::Result<Report> {
    let s = spec.validated(Purpose::Synthesis)?;
    let p = &s.problem;
    let data = s.modal_data()?;
    let control = if free {
        ControlSignal::zero(0.0, p.horizon_t, intervals(p.horizon_t))
    } else {
        solve_control(p, &data, s.path, None)?.control
    };
    let every = (control.intervals() / 1000).max(1);
    let tr = simulate(
        System::Damped,
        &data,
        p.n_modes,
        p.epsilon,
        p.alpha,
        &control,
        every,
    )?;
    let mut header = vec!["t".to_string(), "energy".to_string()];
    header.extend((1..=p.n_modes).map(|n| format!("abs_u{n}")));
    let mut t = Table {
        name: "trajectory".into(),
        header,
        rows: Vec::new(),
    };
    for ((time, e), mags) in tr.times.iter().zip(&tr.energy).zip(&tr.magnitudes) {
        let mut row = vec![num(*time), num(*e)];
        row.extend(mags.iter().map(|m| num(*m)));
        t.push(row);
    }
    let residual = final_residual(
        System::Damped,
        &tr.final_state,
        &tr.initial,
        p.epsilon,
        p.alpha,
    );
    let mut r = Report::new(vec![t]);
    r.summary = json!({ "final_residual": residual, "free": free });
    r.passed = free || residual <= s.tolerances.oracle_residual;
    Ok(r)
}

/// Energy-law diagnostics for free evolution of random data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyLaw {
    pub monotone: bool,
    pub envelope_error: f64,
    pub conservative_drift: f64,
}

/// Free evolution of seeded random data on `1 … n_max` over `(0, horizon)`.
pub fn energy_law(
    eps: f64,
    alpha: f64,
    n_max: u32,
    horizon: f64,
    steps: usize,
    seed: u64,
) -> anyhow::Result<EnergyLaw> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gauss = || C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
    let modes: Vec<ModeData> = (1..=n_max)
        .map(|n| ModeData {
            n,
            u0: gauss(),
            u1: gauss(),
        })
        .collect();
    let profile =
        nullwave_core::modal::project_profile(&nullwave_core::config::ProfileRule::Unit, n_max)?;
    let data = ModalState::new(modes.clone(), profile)?;
    let v = ControlSignal::zero(0.0, horizon, steps);
    let tr = simulate(System::Damped, &data, n_max, eps, alpha, &v, 1)?;
    let monotone = tr.energy.windows(2).all(|w| w[1] <= w[0]);
    let mut envelope_error = 0.0f64;
    for md in &modes {
        let d = ModeDynamics::new(System::Damped, md.n, eps, alpha, C64::new(1.0, 0.0))?;
        let a0 = d.adapted_norm_sq(md.u0, md.u1);
        for j in 0..=steps {
            let t = v.time(j);
            let pm = d.propagator(t);
            let u = pm[0] * md.u0 + pm[1] * md.u1;
            let du = pm[2] * md.u0 + pm[3] * md.u1;
            let want = (-2.0 * eps * (md.n as f64).powf(2.0 * alpha) * t).exp();
            envelope_error =
                envelope_error.max((d.adapted_norm_sq(u, du) / a0 - want).abs() / want);
        }
    }
    let tr0 = simulate(System::Damped, &data, n_max, 0.0, alpha, &v, 1)?;
    let e0 = energy(System::Damped, &tr0.initial, 0.0, alpha);
    let conservative_drift = tr0
        .energy
        .iter()
        .fold(0.0f64, |m, e| m.max((e - e0).abs() / e0));
    Ok(EnergyLaw {
        monotone,
        envelope_error,
        conservative_drift,
    })
}

/// Largest `|θ̃ moment − δ|` for the closed-form sinc family on `|m|, |n| ≤ n_max`.
pub fn sinc_limit_deviation(n_max: u32) -> f64 {
    let ms = signed_indices(n_max);
    nullwave_core::biorth::sinc_limit_matrix(&ms, &ms).max_deviation_from_identity()
}

/// Single-mode resonant problem at ε = 0, `T = 2π`: errors of both controls against
/// `sin t/π` and the simulated residual of the oracle control.
pub fn resonant_oracle() -> anyhow::Result<(f64, f64, f64)> {
    const STEPS: usize = 1 << 15;
    let data = ModalState::new(
        vec![ModeData {
            n: 1,
            u0: C64::new(PI / 2.0, 0.0),
            u1: C64::new(0.0, 0.0),
        }],
        vec![nullwave_core::modal::ProfileCoeff {
            n: 1,
            f_hat: C64::new(PI / 2.0, 0.0),
        }],
    )?;
    let sys = MomentSystem::new(&data, 1, 2.0 * PI, 0.0, 0.25)?;
    let want = ControlSignal::from_fn(0.0, 2.0 * PI, STEPS, |t| C64::new(t.sin() / PI, 0.0));
    let oracle = minnorm_control(&sys, STEPS, 0.0)?.control;
    let fam = sinc_limit_family(&[-1, 1], PI / 4096.0, 0.0)?;
    let series = synthesize_control_series(&sys, &fam, STEPS)?;
    let residual = residual_on(&data, 1, 0.0, 0.25, &oracle)?;
    Ok((
        oracle.sup_distance(&want),
        series.sup_distance(&oracle),
        residual,
    ))
}

/// Aggregated property checks at the configured parameters.
pub fn verify(spec: &ExperimentSpec) -> anyhow::Result<Report> {
    let s = spec.validated(Purpose::Synthesis)?;
    let p = &s.problem;
    let tol = &s.tolerances;
    let mut t = Table::new("verify", &["check", "value", "limit", "passed"]);
    let mut all = true;
    let mut add = |t: &mut Table, name: &str, value: f64, limit: f64, ok: bool| {
        all &= ok;
        t.push(vec![name.into(), num(value), num(limit), ok.to_string()]);
    };
    let n = p.n_modes.min(8);
    let ms = signed_indices(n);

    let d = sinc_limit_deviation(n);
    add(&mut t, "sinc_limit_biorthogonality", d, 1e-10, d <= 1e-10);

    let (e_or, e_ser, res) = resonant_oracle()?;
    add(
        &mut t,
        "resonant_oracle_control",
        e_or,
        tol.oracle_residual,
        e_or <= tol.oracle_residual,
    );
    add(
        &mut t,
        "resonant_series_control",
        e_ser,
        1e-6,
        e_ser <= 1e-6,
    );
    add(&mut t, "resonant_residual", res, 1e-15, res <= 1e-15);

    let ev = ProductEvaluator::new(
        p.epsilon,
        p.alpha,
        reach_for(ms.iter().copied(), p.epsilon, p.alpha),
    )?;
    let (di, _) = pm_interpolation_check(&ms, &ms, &ev)?;
    add(
        &mut t,
        "interpolation_identity",
        di,
        tol.interpolation,
        di <= tol.interpolation,
    );

    let dc = closed_form_deviation(p.alpha)?;
    add(
        &mut t,
        "closed_form_limit",
        dc,
        tol.closed_form,
        dc <= tol.closed_form,
    );

    if p.epsilon > 0.0 {
        let q = qm_split(p.epsilon, p.alpha)?;
        add(
            &mut t,
            "qm_holdout_violations",
            q.violations as f64,
            0.0,
            q.violations == 0,
        );
        if p.alpha > 0.0 {
            let (_, ok) = multiplier_rows(p.epsilon, p.alpha, n, 1e5, 71)?;
            add(
                &mut t,
                "multiplier_properties",
                if ok { 0.0 } else { 1.0 },
                0.0,
                ok,
            );
        }
    }

    let small = signed_indices(n.min(3));
    let fam = build_theta(p, &small)?;
    let (_, db) = biorthogonality_matrix(&fam, &small, &small, fam.support)?;
    add(
        &mut t,
        "family_biorthogonality",
        db,
        tol.biorthogonality,
        db <= tol.biorthogonality,
    );

    let law = energy_law(p.epsilon, p.alpha, 16, 4.0, 400, s.seed)?;
    add(
        &mut t,
        "energy_monotone",
        if law.monotone { 0.0 } else { 1.0 },
        0.0,
        law.monotone,
    );
    add(
        &mut t,
        "energy_envelope",
        law.envelope_error,
        tol.energy,
        law.envelope_error <= tol.energy,
    );
    add(
        &mut t,
        "energy_conservation",
        law.conservative_drift,
        tol.energy,
        law.conservative_drift <= tol.energy,
    );

    let draw = ingham_draw(s.seed, 0, n);
    let g = ingham_ratio(&draw, p.epsilon, p.alpha, p.horizon_t, 1.0)?;
    let q = ingham_ratio_quadrature(&draw, p.epsilon, p.alpha, p.horizon_t, 1.0, 400)?;
    let gap = (g - q).abs() / g;
    add(
        &mut t,
        "ingham_closed_form",
        gap,
        tol.ingham_agreement,
        gap <= tol.ingham_agreement,
    );

    let data = s.modal_data()?;
    let o = solve_control(p, &data, ControlPath::Oracle, None)?;
    add(
        &mut t,
        "oracle_control_residual",
        o.residual,
        tol.oracle_residual,
        o.residual <= tol.oracle_residual,
    );
    add(
        &mut t,
        "oracle_control_imag",
        o.imaginary,
        tol.imaginary,
        o.imaginary <= tol.imaginary,
    );

    let mut r = Report::new(vec![t]);
    r.fitted = Fitted {
        omega: Some(fam.omega as f64),
        beta: Some(fam.norm_fit.beta),
        c: Some(fam.norm_fit.c),
    };
    r.passed = all;
    Ok(r)
}
