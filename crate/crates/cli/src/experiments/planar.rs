use kgman_core::evolve::{energy_scale, integrate, SchemeConfig, SchemeOrder};
use kgman_core::fit::log_log_slope;
use kgman_core::homoclinic::{planar_energy, planar_orbit, HomoclinicOrbit, PlanarOrbit};
use kgman_core::Model;
use rayon::prelude::*;

use super::{thin, Check, Context, Report, RunError, RunResult};
use crate::output::{Plot, Series, Table};

pub fn phase_portrait(ctx: &mut Context<'_>) -> RunResult<Report> {
    let raw = &ctx.settings.raw;
    let params = ctx.settings.params;
    let (m, p) = (params.m, params.p);
    let h = HomoclinicOrbit::new(&params);
    let peak = h.alpha(0.0);
    let default_etas: Vec<f64> = [0.1, 0.2, 0.4, 0.6, 0.8].iter().map(|f| f * peak).collect();
    let etas = raw.list("phase.etas", &default_etas)?;
    for &eta in &etas {
        if !(eta > 0.0 && eta < peak) {
            return Err(RunError::Config(format!(
                "phase.etas entries must lie in (0, α(0) = {peak}), got {eta}"
            )));
        }
    }
    let t_end = raw.positive("phase.t_end", 60.0 / m)?;
    let dt = raw.positive("phase.dt", 1e-4)?;
    let samples = raw.count("phase.samples", 2001)?.max(2);
    let return_tol = raw.positive("phase.return_tol", 1e-6)?;
    let drift_bound = raw.get("scheme.drift_tolerance", 1e-8)?;

    let mut report = Report::default();

    let half = 20.0 / m;
    let mut k0 = Table::new(&["t", "a0", "b0", "energy"]);
    let mut k0_points = Vec::with_capacity(samples);
    let mut max_level: f64 = 0.0;
    for i in 0..samples {
        let t = -half + 2.0 * half * i as f64 / (samples - 1) as f64;
        let (a, b) = (h.alpha(t), h.beta(t));
        let e = planar_energy(m, p, a, b);
        max_level = max_level.max(e.abs());
        k0.push(vec![t.into(), a.into(), b.into(), e.into()]);
        k0_points.push((a, b));
    }
    ctx.sink.table("k0", &k0)?;
    report.push(Check::below("K_0 planar energy", max_level, 1e-10));

    let orbits: Vec<kgman_core::Result<PlanarOrbit>> = etas
        .par_iter()
        .map(|&eta| planar_orbit(eta, &params, t_end, dt, drift_bound))
        .collect();
    let equilibrium = params.equilibrium_amplitude();
    let mut k_eta = Table::new(&["eta", "t", "a0", "b0", "energy"]);
    let mut returns = Table::new(&["eta", "return_time", "return_a0", "return_error", "max_energy_drift"]);
    let mut plot = Plot::new("Phase portrait of the space-stationary set", "a0", "b0")
        .with(Series::new("K_0", k0_points));
    let stride = ((t_end / dt) as usize / samples).max(1);
    for (eta, orbit) in etas.iter().zip(orbits) {
        let orbit = orbit?;
        let at_rest = (eta - equilibrium).abs() < 1e-12;
        let ret = orbit.first_return();
        let (ret_t, ret_a) = ret.unwrap_or((f64::NAN, f64::NAN));
        let err = (ret_a - eta).abs();
        returns.push(vec![
            (*eta).into(),
            ret_t.into(),
            ret_a.into(),
            err.into(),
            orbit.max_energy_drift().into(),
        ]);
        if !at_rest {
            report.push(Check::below(format!("K_eta={eta} return to section"), err, return_tol));
        }
        let period = if ret_t.is_finite() { ret_t } else { t_end };
        let mut pts = Vec::new();
        for i in thin(orbit.samples.len(), stride) {
            let s = orbit.samples[i];
            k_eta.push(vec![(*eta).into(), s.t.into(), s.a0.into(), s.b0.into(), s.energy.into()]);
            if s.t <= period + dt {
                pts.push((s.a0, s.b0));
            }
        }
        plot = plot.with(Series::new(format!("K_eta={eta:.4}"), pts));
    }
    ctx.sink.table("k_eta", &k_eta)?;
    ctx.sink.table("returns", &returns)?;
    ctx.sink.plot("phase_portrait", &plot)?;
    Ok(report)
}

fn tracking_error(
    model: &Model,
    h: &HomoclinicOrbit,
    scheme: &SchemeConfig,
    t_end: f64,
) -> kgman_core::Result<f64> {
    let tr = integrate(&h.state(0.0, model.spectrum()), t_end, model, scheme, &mut [])?;
    Ok(tr
        .times
        .iter()
        .zip(&tr.states)
        .map(|(t, x)| (x.a[0] - h.alpha(*t)).abs().max((x.b[0] - h.beta(*t)).abs()))
        .fold(0.0, f64::max))
}

pub fn homoclinic_track(ctx: &mut Context<'_>) -> RunResult<Report> {
    let settings = ctx.settings;
    let raw = &settings.raw;
    let model = Model::new(settings.params)?;
    let h = HomoclinicOrbit::new(model.params());
    let scheme = settings.scheme;
    let t_end = settings.t_end;
    let tolerance = raw.positive("track.tolerance", 1e-5)?;
    let dts = raw.list("track.dts", &[0.1, 0.05, 0.025, 0.0125])?;
    let t_fit = raw.positive("track.t_fit", 10.0)?;
    if dts.len() < 2 || dts.iter().any(|d| !(*d > 0.0)) {
        return Err(RunError::Config("track.dts needs at least two positive steps".into()));
    }

    let mut report = Report::default();
    let traj = integrate(&h.state(0.0, model.spectrum()), t_end, &model, &scheme, &mut [])?;
    let scale = energy_scale(&model, &traj.states[0]);
    let mut track = Table::new(&["t", "a0", "b0", "alpha", "beta", "error", "H", "J", "norm_c"]);
    let mut err_pts = Vec::new();
    let mut max_err: f64 = 0.0;
    let mut max_drift: f64 = 0.0;
    let stride = (traj.len() / 2000).max(1);
    for i in 0..traj.len() {
        let (t, x, o) = (traj.times[i], &traj.states[i], traj.observables[i]);
        let err = (x.a[0] - h.alpha(t)).abs().max((x.b[0] - h.beta(t)).abs());
        max_err = max_err.max(err);
        max_drift = max_drift.max((o.h - traj.observables[0].h).abs() / scale);
        if i % stride == 0 || i + 1 == traj.len() {
            track.push(vec![
                t.into(),
                x.a[0].into(),
                x.b[0].into(),
                h.alpha(t).into(),
                h.beta(t).into(),
                err.into(),
                o.h.into(),
                o.j.into(),
                o.center_norm.into(),
            ]);
            err_pts.push((t, err));
        }
    }
    ctx.sink.table("track", &track)?;
    ctx.sink.plot(
        "tracking_error",
        &Plot::new("Integrator vs closed-form homoclinic", "t", "max(|a0-alpha|, |b0-beta|)")
            .log_y()
            .with(Series::new(format!("order {}", scheme.order.order()), err_pts)),
    )?;
    report.push(Check::below("max tracking error", max_err, tolerance));
    report.apriori("homoclinic trajectory", &traj, &model);

    let jobs: Vec<(SchemeOrder, f64)> = [SchemeOrder::Second, SchemeOrder::Fourth]
        .iter()
        .flat_map(|o| dts.iter().map(move |d| (*o, *d)))
        .collect();
    let errors: Vec<kgman_core::Result<f64>> = jobs
        .par_iter()
        .map(|(order, dt)| tracking_error(&model, &h, &SchemeConfig::new(*order, *dt)?, t_fit))
        .collect();
    let mut conv = Table::new(&["order", "dt", "error"]);
    let mut plot = Plot::new("Convergence on the homoclinic", "dt", "max error").log_x().log_y();
    let mut summary = Table::new(&["quantity", "value"]);
    summary.push(vec!["max tracking error".into(), max_err.into()]);
    summary.push(vec!["max relative energy drift".into(), max_drift.into()]);
    for (k, order) in [SchemeOrder::Second, SchemeOrder::Fourth].iter().enumerate() {
        let errs: Vec<f64> = errors[k * dts.len()..(k + 1) * dts.len()]
            .iter()
            .map(|e| e.as_ref().copied().map_err(|e| RunError::Failure(e.to_string())))
            .collect::<RunResult<_>>()?;
        for (dt, e) in dts.iter().zip(&errs) {
            conv.push(vec![order.order().into(), (*dt).into(), (*e).into()]);
        }
        let slope = log_log_slope(&dts, &errs).unwrap_or(f64::NAN);
        let (target, tol) = if *order == SchemeOrder::Second { (2.0, 0.1) } else { (4.0, 0.2) };
        report.push(Check::near(
            format!("order-{} convergence slope", order.order()),
            slope,
            target,
            tol,
        ));
        summary.push(vec![format!("order-{} slope", order.order()).into(), slope.into()]);
        plot = plot.with(Series::from_xy(format!("order {}", order.order()), &dts, &errs));
    }
    ctx.sink.table("convergence", &conv)?;
    ctx.sink.table("summary", &summary)?;
    ctx.sink.plot("convergence_plot", &plot)?;
    Ok(report)
}
