use kgman_core::linearized::{
    homoclinic_certificate, scatter_asymptotics, HyperbolicBasis, ModePropagator, ScatterConfig,
};
use kgman_core::Model;
use rayon::prelude::*;

use super::{thin, Check, Context, Report, RunError, RunResult};
use crate::output::{Plot, Series, Table};

fn elliptic_modes(raw: &crate::config::RawConfig, key: &str, model: &Model) -> RunResult<Vec<usize>> {
    let default: Vec<usize> = [1, 2, 4, 8].into_iter().filter(|n| *n < model.dim()).collect();
    let modes: Vec<usize> = raw.list(key, &default)?;
    for &n in &modes {
        if n == 0 || n >= model.dim() {
            return Err(RunError::Config(format!(
                "mode index {n} outside the elliptic range 1..{}",
                model.dim() - 1
            )));
        }
    }
    Ok(modes)
}

pub fn linearized_scatter(ctx: &mut Context<'_>) -> RunResult<Report> {
    let raw = &ctx.settings.raw;
    let model = Model::new(ctx.settings.params)?;
    let m = model.params().m;
    let modes = elliptic_modes(raw, "scatter.modes", &model)?;
    let z0 = [raw.get("scatter.a0", 1.0)?, raw.get("scatter.b0", 0.0)?];
    let t_trunc = raw.positive("scatter.t_trunc", 40.0 / m)?;
    let dt = raw.positive("scatter.dt", 1e-3)?;
    let default_checks: Vec<f64> = (1..=20).map(|k| t_trunc * k as f64 / 20.0).collect();
    let checkpoints = raw.list("scatter.checkpoints", &default_checks)?;

    let mut data = model.zero_state();
    for &n in &modes {
        data.a[n] = z0[0];
        data.b[n] = z0[1];
    }
    let first = scatter_asymptotics(&data, &model, &ScatterConfig::new(t_trunc, dt), &checkpoints)?;
    let late_checks = [t_trunc, 1.5 * t_trunc, 2.0 * t_trunc];
    let second = scatter_asymptotics(
        &data,
        &model,
        &ScatterConfig::new(2.0 * t_trunc, dt),
        &late_checks,
    )?;

    let mut report = Report::default();
    let mut inv = Table::new(&["n", "lambda", "omega", "a_plus", "b_plus", "c", "c_doubled_truncation"]);
    let mut cps = Table::new(&["n", "t", "residual", "c_at_t"]);
    let mut plot = Plot::new("Distance to the free torus orbit", "t", "||z(t) - S(t) z+||_n").log_y();
    let spectrum = model.spectrum();
    for &n in &modes {
        let k = n - 1;
        let i1 = &first.invariants;
        inv.push(vec![
            n.into(),
            spectrum.lambda(n).into(),
            i1.omega[k].into(),
            i1.a_plus[k].into(),
            i1.b_plus[k].into(),
            i1.c[k].into(),
            second.invariants.c[k].into(),
        ]);
        let mut pts = Vec::new();
        for cp in &first.checkpoints {
            cps.push(vec![n.into(), cp.t.into(), cp.residual[k].into(), cp.c_at_t[k].into()]);
            pts.push((cp.t, cp.residual[k]));
        }
        plot = plot.with(Series::new(format!("mode {n}"), pts));

        let at_trunc = first
            .checkpoints
            .iter()
            .filter(|cp| (cp.t - t_trunc).abs() < 1e-9)
            .map(|cp| cp.residual[k])
            .next()
            .unwrap_or(second.checkpoints[0].residual[k]);
        report.push(Check::below(format!("mode {n}: residual at t = {t_trunc}"), at_trunc, 1e-6));
        report.push(Check::below(
            format!("mode {n}: c at T vs 2T"),
            (i1.c[k] - second.invariants.c[k]).abs(),
            1e-8,
        ));
        let cauchy = second
            .checkpoints
            .windows(2)
            .map(|w| (w[0].c_at_t[k] - w[1].c_at_t[k]).abs())
            .fold(0.0, f64::max);
        report.push(Check::below(format!("mode {n}: c(t) Cauchy past T"), cauchy, 1e-6));
    }
    let mut summary = Table::new(&["quantity", "value"]);
    summary.push(vec!["tail bound at T".into(), first.tail_bound.into()]);
    summary.push(vec!["tail bound at 2T".into(), second.tail_bound.into()]);
    ctx.sink.table("invariants", &inv)?;
    ctx.sink.table("checkpoints", &cps)?;
    ctx.sink.table("summary", &summary)?;
    ctx.sink.plot("residuals", &plot)?;
    Ok(report)
}

pub fn hyperbolic_basis(ctx: &mut Context<'_>) -> RunResult<Report> {
    let raw = &ctx.settings.raw;
    let params = ctx.settings.params;
    let m = params.m;
    let t_max = raw.positive("basis.t_max", 30.0 / m)?;
    let dt = raw.positive("basis.dt", 1e-3)?;
    let fit_start = raw.positive("basis.fit_start", 5.0 / m)?;
    let fit_end = raw.positive("basis.fit_end", 15.0 / m)?;
    let stride = raw.count("basis.sample_every", 100)?;
    let basis = HyperbolicBasis::build(&params, t_max, dt)?;

    let mut report = Report::default();
    let f0 = basis.at_index(0);
    let sigma0 = (f0.sigma[0] - 0.0).abs().max((f0.sigma[1] - 1.0).abs());
    let rho0 = (f0.rho[0] - 1.0).abs().max((f0.rho[1] - 0.0).abs());
    report.push(Check::equals("sigma(0) - (0,1)", sigma0, 0.0));
    report.push(Check::equals("rho(0) - (1,0)", rho0, 0.0));
    report.push(Check::below("Wronskian drift", basis.wronskian_drift(), 1e-10));
    report.push(Check::below("duality residual", basis.duality_residual(), 1e-9));

    let mut table = Table::new(&[
        "t",
        "sigma_a",
        "sigma_b",
        "rho_a",
        "rho_b",
        "sigma_star_a",
        "sigma_star_b",
        "rho_star_a",
        "rho_star_b",
    ]);
    let names = ["|sigma|", "|rho|", "|sigma*|", "|rho*|"];
    let mut norms: Vec<Vec<(f64, f64)>> = vec![Vec::new(); 4];
    for i in thin(basis.len(), stride) {
        let t = basis.time(i);
        let f = basis.at_index(i);
        let mut row = vec![t.into()];
        for (k, v) in [f.sigma, f.rho, f.sigma_star, f.rho_star].iter().enumerate() {
            row.push(v[0].into());
            row.push(v[1].into());
            norms[k].push((t, v[0].hypot(v[1])));
        }
        table.push(row);
    }
    ctx.sink.table("basis", &table)?;
    let mut plot = Plot::new("Hyperbolic fundamental pair and duals", "t", "Euclidean norm").log_y();
    for (name, pts) in names.iter().zip(norms) {
        plot = plot.with(Series::new(*name, pts));
    }
    ctx.sink.plot("basis_norms", &plot)?;

    let fit = basis.growth_fit(fit_start, fit_end)?;
    let mut growth = Table::new(&["vector", "rate", "expected", "constant"]);
    for (name, rate, expected, constant) in [
        ("sigma", fit.sigma_rate, -m, fit.sigma_const),
        ("rho", fit.rho_rate, m, fit.rho_const),
        ("sigma_star", fit.sigma_star_rate, m, fit.sigma_star_const),
        ("rho_star", fit.rho_star_rate, -m, fit.rho_star_const),
    ] {
        growth.push(vec![name.into(), rate.into(), expected.into(), constant.into()]);
        report.push(Check::near(format!("{name} growth rate"), rate, expected, 0.02 * m));
    }
    ctx.sink.table("growth", &growth)?;

    let roo = basis.reduction_of_order_check(1.0_f64.min(0.5 * t_max))?;
    report.push(Check::below("reduction-of-order cross-check", roo, 1e-8));
    let mut summary = Table::new(&["quantity", "value"]);
    summary.push(vec!["sigma normalization".into(), basis.sigma_normalization().into()]);
    summary.push(vec!["wronskian".into(), basis.wronskian().into()]);
    summary.push(vec!["wronskian drift".into(), basis.wronskian_drift().into()]);
    summary.push(vec!["duality residual".into(), basis.duality_residual().into()]);
    summary.push(vec!["reduction of order deviation".into(), roo.into()]);
    ctx.sink.table("summary", &summary)?;
    Ok(report)
}

pub fn ode_bound(ctx: &mut Context<'_>) -> RunResult<Report> {
    let raw = &ctx.settings.raw;
    let model = Model::new(ctx.settings.params)?;
    let modes = elliptic_modes(raw, "bound.modes", &model)?;
    let t_end = raw.positive("bound.t_end", 200.0)?;
    let dt = raw.positive("bound.dt", 1e-2)?;
    let empirical_max = raw.positive("bound.empirical_max", 3.0)?;
    let stride = raw.count("bound.sample_every", 100)?;
    let cert = homoclinic_certificate(model.params())?;

    let mut cert_table = Table::new(&["k", "bound", "q_total"]);
    cert_table.push(vec![cert.k.into(), cert.bound.into(), cert.q_total.into()]);
    ctx.sink.table("certificate", &cert_table)?;
    let mut cuts = Table::new(&["j", "t_j"]);
    for (j, t) in cert.cuts.iter().enumerate() {
        cuts.push(vec![(j + 1).into(), (*t).into()]);
    }
    ctx.sink.table("cuts", &cuts)?;

    let starts = [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, -1.0]];
    let results: Vec<RunResult<(usize, f64, f64, f64, Vec<(f64, f64)>)>> = modes
        .par_iter()
        .map(|&n| {
            let prop = ModePropagator::new(&model, n, dt)?;
            let mut worst: f64 = 0.0;
            let mut curve = Vec::new();
            for (k, z0) in starts.iter().enumerate() {
                let (times, zs) = prop.path(*z0, 0.0, t_end);
                let n0 = prop.norm(*z0);
                let ratios: Vec<f64> = zs.iter().map(|z| prop.norm(*z) / n0).collect();
                worst = ratios.iter().copied().fold(worst, f64::max);
                if k == 0 {
                    curve = thin(times.len(), stride).map(|i| (times[i], ratios[i])).collect();
                }
            }
            Ok((n, prop.lambda(), prop.omega(), worst, curve))
        })
        .collect();

    let mut report = Report::default();
    let mut measured = Table::new(&["n", "lambda", "omega", "sup_ratio"]);
    let mut plot = Plot::new("Mode norm growth along the homoclinic", "t", "|z(t)|_n / |z(0)|_n");
    for r in results {
        let (n, lambda, omega, worst, curve) = r?;
        measured.push(vec![n.into(), lambda.into(), omega.into(), worst.into()]);
        plot = plot.with(Series::new(format!("mode {n}"), curve));
        report.push(Check::at_most(format!("mode {n}: sup ratio vs certificate"), worst, cert.bound));
        report.push(Check::at_most(format!("mode {n}: sup ratio empirical"), worst, empirical_max));
    }
    ctx.sink.table("measured", &measured)?;
    ctx.sink.plot("mode_growth", &plot)?;
    Ok(report)
}
