use kgman_core::fit::log_log_slope;
use kgman_core::homoclinic::HomoclinicOrbit;
use kgman_core::manifolds::{
    center_manifold_psi, classification_scan, convergence_to_wc, is_monotone,
    lyapunov_within_wc, reversible_heteroclinic, truncation_consistency, CenterStableSolution,
    CenterStableSolver, HeteroclinicOrbit, Method, TruncationConfig,
};
use kgman_core::{Model, State};
use rand::Rng;
use rayon::prelude::*;

use super::{thin, Check, Context, Report, RunError, RunResult};
use crate::output::{Plot, Series, Table};

/// Random elliptic datum of spectral norm `norm`.
fn random_center(model: &Model, rng: &mut impl Rng, norm: f64) -> State {
    let mut v = model.zero_state();
    for n in 1..model.dim() {
        v.a[n] = rng.gen_range(-1.0..1.0);
        v.b[n] = rng.gen_range(-1.0..1.0);
    }
    let s = model.spectrum().norm(&v);
    v.scaled(norm / s)
}

/// Position-only datum on one mode, of spectral norm `norm`.
fn single_mode(model: &Model, n: usize, norm: f64) -> State {
    let mut v = model.zero_state();
    let lambda = model.spectrum().lambda(n);
    v.a[n] = norm / (1.0 + lambda * lambda).sqrt();
    v
}

fn fraction(raw: &crate::config::RawConfig, key: &str, default: f64) -> RunResult<f64> {
    let f: f64 = raw.get(key, default)?;
    if !(0.0..=1.0).contains(&f) {
        return Err(RunError::Config(format!("`{key}` must lie in [0, 1], got {f}")));
    }
    Ok(f)
}

fn check_mode(model: &Model, n: usize) -> RunResult<()> {
    if n == 0 || n >= model.dim() {
        return Err(RunError::Config(format!(
            "mode index {n} outside the elliptic range 1..{}",
            model.dim() - 1
        )));
    }
    Ok(())
}

struct ShadowRun {
    v_s: f64,
    data_norm: f64,
    solutions: Vec<CenterStableSolution>,
}

pub fn shadow(ctx: &mut Context<'_>) -> RunResult<Report> {
    let settings = ctx.settings;
    let raw = &settings.raw;
    let model = Model::new(settings.params)?;
    let mut cfg = settings.truncation(1e-4)?;
    let eps2 = cfg.data_radius();
    let window_h = raw.positive("shadow.window_h", 40.0)?;
    let window_c = raw.positive("shadow.window_c", 1.0 / cfg.epsilon)?;
    if !settings.horizon_given() {
        cfg.t_horizon = cfg.t_horizon.max(window_h).max(window_c);
    }
    if window_h > cfg.t_horizon || window_c > cfg.t_horizon {
        return Err(RunError::Config(format!(
            "check windows ({window_h}, {window_c}) exceed the horizon {}",
            cfg.t_horizon
        )));
    }
    let methods: Vec<Method> = match raw.raw("shadow.method").unwrap_or("both") {
        "both" => vec![Method::Shooting, Method::FixedPoint],
        other => vec![other.parse::<Method>()?],
    };
    let samples = raw.count("shadow.samples", 1)?;
    let data_fraction = fraction(raw, "shadow.data_fraction", 0.5)?;
    let stable_fraction = fraction(raw, "shadow.stable_fraction", 0.3)?;
    let c_bound = raw.positive("shadow.c_bound", 10.0)?;
    let scan_points: usize = raw.get("shadow.scan_points", 11)?;
    let stride = raw.count("shadow.sample_every", 100)?;

    let solver = CenterStableSolver::new(&model, &cfg)?;
    let data: Vec<(State, f64)> = (0..samples)
        .map(|k| {
            let mut rng = ctx.rng(k as u64);
            let v_c = random_center(&model, &mut rng, data_fraction * eps2);
            let v_s = stable_fraction * eps2 * rng.gen_range(-1.0..=1.0);
            (v_c, v_s)
        })
        .collect();
    let runs: Vec<RunResult<ShadowRun>> = data
        .par_iter()
        .map(|(v_c, v_s)| {
            let solutions = methods
                .iter()
                .map(|m| solver.solve(v_c, *v_s, *m).map_err(RunError::from))
                .collect::<RunResult<Vec<_>>>()?;
            Ok(ShadowRun {
                v_s: *v_s,
                data_norm: model.spectrum().norm(v_c),
                solutions,
            })
        })
        .collect();

    let mut report = Report::default();
    let tol = 10.0 * cfg.fp_tol.max(cfg.shoot_tol);
    let mut table = Table::new(&[
        "sample",
        "method",
        "norm_v_c",
        "v_s",
        "v_u",
        "sup_h_window",
        "sup_c_window",
        "boundary_stable",
        "boundary_center",
        "iterations",
        "last_update",
    ]);
    let mut tube_source = None;
    for (k, run) in runs.into_iter().enumerate() {
        let run = run?;
        for sol in &run.solutions {
            let name = method_name(sol.method);
            let (sup_h, _) = sol.sup_norms(window_h, &model);
            let (_, sup_c) = sol.sup_norms(window_c, &model);
            let (bs, bc) = sol.boundary_residual(solver.basis());
            table.push(vec![
                k.into(),
                name.into(),
                run.data_norm.into(),
                run.v_s.into(),
                sol.v_u.into(),
                sup_h.into(),
                sup_c.into(),
                bs.into(),
                bc.into(),
                sol.diagnostics.iterations.into(),
                sol.diagnostics.last_update.into(),
            ]);
            report.push(Check::below(format!("sample {k} {name}: stable boundary datum"), bs, cfg.fp_tol));
            report.push(Check::below(format!("sample {k} {name}: center boundary datum"), bc, cfg.fp_tol));
            report.push(Check::at_most(
                format!("sample {k} {name}: sup|Z_h| on [0,{window_h}] / eps^2"),
                sup_h / eps2,
                c_bound,
            ));
            report.push(Check::at_most(
                format!("sample {k} {name}: sup|Z_c| on [0,{window_c}] / eps^2"),
                sup_c / eps2,
                c_bound,
            ));
        }
        if run.solutions.len() == 2 {
            let d = run.solutions[0].sup_distance(&run.solutions[1], window_h, &model);
            report.push(Check::below(format!("sample {k}: shooting vs fixed point"), d, tol));
        }
        if k == 0 {
            tube_source = run.solutions.into_iter().last();
        }
    }
    ctx.sink.table("solutions", &table)?;

    if let Some(sol) = tube_source {
        let mut tube = Table::new(&["t", "abs_z_h", "norm_z_c"]);
        let (mut hs, mut cs) = (Vec::new(), Vec::new());
        for i in thin(sol.states.len(), stride) {
            let z = &sol.states[i];
            let (h, c) = (z.project_h().norm(), model.spectrum().center_norm(z));
            tube.push(vec![sol.times[i].into(), h.into(), c.into()]);
            hs.push((sol.times[i], h));
            cs.push((sol.times[i], c));
        }
        ctx.sink.table("tube", &tube)?;
        let t_end = sol.horizon();
        let level = |name: &str, v: f64| Series::new(name, vec![(0.0, v), (t_end, v)]);
        ctx.sink.plot(
            "tube_plot",
            &Plot::new("Center-stable deviation and its tubes", "t", "size of deviation")
                .log_y()
                .with(Series::new("|Z_h|", hs))
                .with(Series::new("||Z_c||", cs))
                .with(level("eps^2", eps2))
                .with(level("C eps^2", c_bound * eps2))
                .with(level("delta", cfg.delta)),
        )?;
    }

    if scan_points >= 2 {
        let (v_c, v_s) = &data[0];
        let scan = classification_scan(&solver, v_c, *v_s, -cfg.epsilon, cfg.epsilon, scan_points);
        let mut t = Table::new(&["v_u", "side"]);
        for (v, s) in &scan {
            t.push(vec![(*v).into(), (*s).into()]);
        }
        ctx.sink.table("classification", &t)?;
        report.push(Check::equals(
            "exit classification monotone in V_u",
            if is_monotone(&scan) { 1.0 } else { 0.0 },
            1.0,
        ));
    }
    Ok(report)
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Shooting => "shooting",
        Method::FixedPoint => "fixed_point",
    }
}

pub fn psi_scan(ctx: &mut Context<'_>) -> RunResult<Report> {
    let settings = ctx.settings;
    let raw = &settings.raw;
    let model = Model::new(settings.params)?;
    let cfg = settings.truncation(1e-2)?;
    let scales = raw.list("psi.scales", &[1e-3, 2e-3, 5e-3, 1e-2])?;
    if scales.iter().any(|s| !(*s > 0.0 && *s <= 1.0)) {
        return Err(RunError::Config("psi.scales entries must lie in (0, 1]".into()));
    }
    let min_slope = raw.positive("psi.min_slope", 1.9)?;
    let ly_norm = raw.positive("psi.lyapunov_norm", 1e-2)?;
    let ly_horizon = raw.positive("psi.lyapunov_horizon", 100.0)?;
    let ly_factor = raw.positive("psi.lyapunov_factor", 3.0)?;
    let j_tol = raw.positive("psi.j_drift", 0.05)?;

    let mut report = Report::default();
    let psi0 = center_manifold_psi(&model.zero_state(), &model, &cfg)?;
    report.push(Check::equals("Psi(0)", psi0.norm(), 0.0));

    let direction = random_center(&model, &mut ctx.rng(0), cfg.delta);
    let points: Vec<RunResult<(f64, f64, kgman_core::HyperbolicPoint)>> = scales
        .par_iter()
        .map(|&s| {
            let v = direction.scaled(s);
            let psi = center_manifold_psi(&v, &model, &cfg)?;
            Ok((s, model.spectrum().norm(&v), psi))
        })
        .collect();
    let mut table = Table::new(&["s", "norm_v_c", "psi_a0", "psi_b0", "psi_norm"]);
    let (mut ss, mut ns) = (Vec::new(), Vec::new());
    for p in points {
        let (s, nv, psi) = p?;
        table.push(vec![s.into(), nv.into(), psi.a0.into(), psi.b0.into(), psi.norm().into()]);
        ss.push(s);
        ns.push(psi.norm());
    }
    ctx.sink.table("psi", &table)?;
    let slope = if ss.len() >= 2 { log_log_slope(&ss, &ns).unwrap_or(f64::NAN) } else { f64::NAN };
    report.push(Check::at_least("log-log slope of |Psi(s V_c)|", slope, min_slope));
    ctx.sink.plot(
        "psi_scaling",
        &Plot::new("Center-manifold graph near the origin", "s", "|Psi(s V_c)|")
            .log_x()
            .log_y()
            .with(Series::from_xy("|Psi|", &ss, &ns)),
    )?;

    let ly_cfg = cfg.with_horizon(ly_horizon);
    let ly_data = single_mode(&model, 1, ly_norm);
    let ly = lyapunov_within_wc(&ly_data, &model, &ly_cfg, 0.0)?;
    let mut lt = Table::new(&["quantity", "value"]);
    for (name, v) in [
        ("data norm", ly.data_norm),
        ("sup center norm", ly.sup_center),
        ("inf center norm", ly.inf_center),
        ("sup hyperbolic", ly.sup_hyperbolic),
        ("hyperbolic constant (sup / delta^3)", ly.hyperbolic_constant),
        ("relative J drift", ly.j_drift),
        ("direct integration mismatch", ly.integration_mismatch),
        ("window", ly.window),
        ("psi slope", slope),
    ] {
        lt.push(vec![name.into(), v.into()]);
    }
    ctx.sink.table("summary", &lt)?;
    report.push(Check::at_most("Lyapunov: sup|X_c| / |V_c|", ly.ratio_max(), ly_factor));
    report.push(Check::at_least("Lyapunov: inf|X_c| / |V_c|", ly.ratio_min(), 1.0 / ly_factor));
    report.push(Check::below("Lyapunov: relative J drift", ly.j_drift, j_tol));
    Ok(report)
}

pub fn heteroclinic(ctx: &mut Context<'_>) -> RunResult<Report> {
    let settings = ctx.settings;
    let raw = &settings.raw;
    let model = Model::new(settings.params)?;
    let cfg = settings.truncation(1e-2)?;
    let mode: usize = raw.get("heteroclinic.mode", 1)?;
    check_mode(&model, mode)?;
    let norms = raw.list("heteroclinic.norms", &[1e-2])?;
    let segment = raw.positive("heteroclinic.segment", 1.0)?;
    let tolerance = raw.positive("heteroclinic.tolerance", 1e-8)?;
    let stride = raw.count("heteroclinic.sample_every", 100)?;

    let runs: Vec<RunResult<HeteroclinicOrbit>> = norms
        .par_iter()
        .map(|&norm| {
            let f_c = single_mode(&model, mode, norm);
            reversible_heteroclinic(&f_c, &model, &cfg, segment).map_err(RunError::from)
        })
        .collect();
    let runs: Vec<HeteroclinicOrbit> = runs.into_iter().collect::<RunResult<_>>()?;

    let mut report = Report::default();
    let mut sweep = Table::new(&[
        "norm_f_c",
        "momentum_residual",
        "symmetry_residual",
        "tracking_constant",
        "target_time",
    ]);
    let mut targets = Table::new(&["norm_f_c", "side", "n", "a", "b"]);
    for het in &runs {
        sweep.push(vec![
            het.data_norm.into(),
            het.momentum_residual.into(),
            het.symmetry_residual.into(),
            het.tracking_constant.into(),
            het.target_time.into(),
        ]);
        for (side, x) in [("forward", &het.target), ("reflected", &het.reflected_target)] {
            for n in 0..x.dim() {
                targets.push(vec![het.data_norm.into(), side.into(), n.into(), x.a[n].into(), x.b[n].into()]);
            }
        }
        report.push(Check::below(
            format!("|f_c| = {:e}: reflection vs backward integration", het.data_norm),
            het.symmetry_residual,
            tolerance,
        ));
        report.push(Check::at_most(
            format!("|f_c| = {:e}: momentum at t = 0", het.data_norm),
            het.momentum_residual,
            cfg.fp_tol,
        ));
    }
    if runs.len() >= 2 {
        let cs: Vec<f64> = runs.iter().map(|h| h.tracking_constant).collect();
        let hi = cs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = cs.iter().copied().fold(f64::INFINITY, f64::min);
        report.push(Check::at_most("tracking constant spread (max/min)", hi / lo, 2.0));
    }
    ctx.sink.table("sweep", &sweep)?;
    ctx.sink.table("targets", &targets)?;

    let het = &runs[0];
    let orbit = HomoclinicOrbit::new(model.params());
    let mut table = Table::new(&["t", "a0", "b0", "norm_c", "deviation"]);
    let (mut a0s, mut devs) = (Vec::new(), Vec::new());
    for i in thin(het.times.len(), stride) {
        let (t, x) = (het.times[i], &het.states[i]);
        let dev = model.spectrum().norm(&x.sub(&orbit.state(t, model.spectrum())));
        let nc = model.spectrum().center_norm(x);
        table.push(vec![t.into(), x.a[0].into(), x.b[0].into(), nc.into(), dev.into()]);
        a0s.push((t, x.a[0]));
        devs.push((t, dev));
    }
    ctx.sink.table("orbit", &table)?;
    ctx.sink.plot(
        "orbit_a0",
        &Plot::new("Reversible heteroclinic: hyperbolic coordinate", "t", "a0").with(Series::new("a0", a0s)),
    )?;
    ctx.sink.plot(
        "orbit_deviation",
        &Plot::new("Distance from the homoclinic", "t", "|X - h|")
            .log_y()
            .with(Series::new(format!("|f_c| = {:e}", het.data_norm), devs)),
    )?;
    Ok(report)
}

pub fn converge_wc(ctx: &mut Context<'_>) -> RunResult<Report> {
    let settings = ctx.settings;
    let raw = &settings.raw;
    let model = Model::new(settings.params)?;
    let m = model.params().m;
    let mut cfg: TruncationConfig = settings.truncation(1e-2)?;
    let margin = raw.positive("converge.margin", 20.0 / m)?;
    if !settings.horizon_given() {
        cfg.t_horizon = 2.0 * cfg.t_eps + margin;
    }
    let data_fraction = fraction(raw, "converge.data_fraction", 0.5)?;
    let stable_fraction = fraction(raw, "converge.stable_fraction", 0.3)?;
    let samples = raw.count("converge.samples", 9)?;
    let c_bound = raw.positive("converge.c_bound", 10.0)?;
    let tolerance = raw.positive("converge.tolerance", 1e-8)?;
    let eps2 = cfg.data_radius();

    let mut rng = ctx.rng(0);
    let v_c = random_center(&model, &mut rng, data_fraction * eps2);
    let v_s = stable_fraction * eps2;
    let solver = CenterStableSolver::new(&model, &cfg)?;
    let sol = solver.fixed_point(&v_c, v_s)?;
    let conv = convergence_to_wc(&sol, &model, &cfg, samples.max(2))?;
    let trunc = truncation_consistency(&sol, &model, &cfg, sol.horizon(), 1.0)?;

    let mut report = Report::default();
    report.push(Check::at_least("fitted decay rate", conv.rate, conv.required_rate));
    report.push(Check::at_most("d(t_eps) / eps^2", conv.distance_at_t_eps / eps2, c_bound));
    report.push(Check::equals(
        "orbit inside the cutoff tube",
        if trunc.inside_tube { 1.0 } else { 0.0 },
        1.0,
    ));
    report.push(Check::below("untruncated re-integration mismatch", trunc.max_mismatch, tolerance));

    let mut table = Table::new(&["t", "distance"]);
    for (t, d) in conv.times.iter().zip(&conv.distances) {
        table.push(vec![(*t).into(), (*d).into()]);
    }
    ctx.sink.table("distances", &table)?;
    let d0 = conv.distances[0];
    let t0 = conv.times[0];
    let fitted: Vec<(f64, f64)> = conv
        .times
        .iter()
        .map(|t| (*t, d0 * (-conv.rate * (t - t0)).exp()))
        .collect();
    ctx.sink.plot(
        "decay_fit",
        &Plot::new("Approach to the center manifold", "t", "d(t)")
            .log_y()
            .with(Series::from_xy("d(t)", &conv.times, &conv.distances))
            .with(Series::new(format!("rate {:.4}", conv.rate), fitted)),
    )?;
    let mut summary = Table::new(&["quantity", "value"]);
    for (name, v) in [
        ("rate", conv.rate),
        ("required rate", conv.required_rate),
        ("d(t_eps)", conv.distance_at_t_eps),
        ("t_eps", cfg.t_eps),
        ("horizon", cfg.t_horizon),
        ("v_u", sol.v_u),
        ("sup |Z_h|", trunc.sup_hyperbolic),
        ("sup |Z_c|", trunc.sup_center),
        ("re-integration mismatch", trunc.max_mismatch),
    ] {
        summary.push(vec![name.into(), v.into()]);
    }
    ctx.sink.table("summary", &summary)?;
    Ok(report)
}
