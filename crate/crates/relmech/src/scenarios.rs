//! Scenario runners.

use std::io;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use relmech_core::curvilinear::{self, chart_by_name};
use relmech_core::electromagnetism::{integrate_lorentz, FaradayTensor};
use relmech_core::fluids::{self, FluidFields, Residual, RESIDUAL_CSV_HEADER};
use relmech_core::gravity::EffectiveMetric;
use relmech_core::orbits::{integrate_geodesic, measure_precession, write_orbit_csv};
use relmech_core::worldline::Worldline;
use relmech_core::{FourVector, ThreeVector};
use thiserror::Error;

use crate::config::{FlowKind, PotentialKind, ResidualKind, ScenarioConfig, ScenarioKind};
use crate::output::write_atomic;
use crate::report::{emit_report, Check, Format, RunReport};
use crate::suite;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Core(#[from] relmech_core::Error),
    #[error("writing {path}: {source}")]
    Io { path: String, source: io::Error },
}

type RunResult<T> = std::result::Result<T, RunError>;

struct Out<'a> {
    dir: &'a Path,
    report: RunReport,
}

impl Out<'_> {
    fn write(&mut self, name: &str, bytes: &[u8]) -> RunResult<()> {
        let path = self.dir.join(name);
        write_atomic(&path, bytes).map_err(|source| RunError::Io { path: path.display().to_string(), source })?;
        self.report.artifacts.push(name.to_string());
        Ok(())
    }

    fn worldline(&mut self, name: &str, wl: &Worldline, stride: usize) -> RunResult<()> {
        let mut buf = Vec::new();
        thin(wl, stride).write_csv(&mut buf).expect("writing to memory");
        self.write(name, &buf)
    }
}

fn thin(wl: &Worldline, stride: usize) -> Worldline {
    let mut samples: Vec<_> = wl.samples.iter().step_by(stride).copied().collect();
    if (wl.samples.len() - 1) % stride != 0 {
        samples.push(*wl.last());
    }
    Worldline { mass: wl.mass, charge: wl.charge, c: wl.c, step: wl.step, settings: wl.settings, samples }
}

fn norm_check(report: &mut RunReport, wl: &Worldline, tol: f64) {
    let rel = wl.max_norm_residual() / (wl.c * wl.c);
    report.value("max_norm_residual_rel", rel);
    report.check(Check::at_most("norm_residual", rel, tol));
}

/// Runs `cfg`, writes its artifacts and `report.txt` / `report.csv` into `out`.
pub fn run(cfg: &ScenarioConfig, out: &Path) -> RunResult<RunReport> {
    let start = Instant::now();
    let mut o = Out { dir: out, report: RunReport::new(cfg.scenario.as_str()) };
    match cfg.scenario {
        ScenarioKind::Orbit => orbit(cfg, &mut o)?,
        ScenarioKind::LorentzTrajectory => lorentz_trajectory(cfg, &mut o)?,
        ScenarioKind::ChargedDust => charged_dust(cfg, &mut o)?,
        ScenarioKind::FluidStreamline => fluid_streamline(cfg, &mut o)?,
        ScenarioKind::ResidualSweep => residual_sweep(cfg, &mut o)?,
        ScenarioKind::IdentitySuite => {
            for c in suite::identity_checks(cfg.seed, &cfg.chart)? {
                o.report.check(c);
            }
        }
    }
    let text = emit_report(&o.report, Format::Text);
    let csv = emit_report(&o.report, Format::Csv);
    o.write("report.txt", text.as_bytes())?;
    o.write("report.csv", csv.as_bytes())?;
    o.report.artifacts.truncate(o.report.artifacts.len() - 2);
    o.report.wall_time = start.elapsed();
    Ok(o.report)
}

fn metric(cfg: &ScenarioConfig) -> EffectiveMetric {
    EffectiveMetric::static_w(Arc::new(cfg.newtonian_potential()), cfg.c)
}

fn uniform_field(cfg: &ScenarioConfig) -> impl Fn(&FourVector) -> FaradayTensor + Copy {
    let f = FaradayTensor::assemble(cfg.field_e, cfg.field_b);
    move |_: &FourVector| f
}

fn orbit(cfg: &ScenarioConfig, o: &mut Out) -> RunResult<()> {
    let oc = cfg.orbit_config();
    oc.validate()?;
    let wl = oc.run()?;
    let pot = oc.potential();
    let prec = measure_precession(&wl, oc.gm)?;
    let (de, dh) = suite::first_integral_drift(&wl, &pot)?;
    let per_century = suite::revolutions_per_century(&oc);
    let arcsec = 180.0 / std::f64::consts::PI * 3600.0 * per_century;

    let r = &mut o.report;
    r.value("perihelia", prec.orbits() as f64);
    r.value("closed_form_shift_per_rev", prec.predicted);
    r.value("measured_shift_per_rev", prec.shift_per_rev);
    r.value("measured_shift_stderr", prec.shift_stderr);
    r.value("measured_over_closed_form", prec.shift_per_rev / prec.predicted);
    r.value("kepler_period", oc.kepler_period());
    r.value("revolutions_per_century", per_century);
    r.value("closed_form_arcsec_per_century", prec.predicted * arcsec);
    r.value("measured_arcsec_per_century", prec.shift_per_rev * arcsec);
    r.value("epsilon_drift_rel", de);
    r.value("h_drift_rel", dh);
    r.check(Check::at_most("precession_relative_deviation", prec.relative_deviation, cfg.orbit.tolerance));
    r.check(Check::at_most("epsilon_drift", de, 1e-8));
    r.check(Check::at_most("h_drift", dh, 1e-8));
    norm_check(r, &wl, cfg.norm_tolerance);

    let mut buf = Vec::new();
    write_orbit_csv(&thin(&wl, cfg.stride), &pot, &mut buf).expect("writing to memory");
    o.write("orbit.csv", &buf)?;
    o.write("precession.txt", prec.to_kv().as_bytes())
}

fn lorentz_trajectory(cfg: &ScenarioConfig, o: &mut Out) -> RunResult<()> {
    let p = &cfg.particle;
    let state = relmech_core::worldline::ParticleState::from_velocity(&p.x, p.t, &p.v, p.mass, p.charge, cfg.c)?;
    let wl = integrate_lorentz(&state, uniform_field(cfg), cfg.integrator.step, cfg.integrator.steps, cfg.c, cfg.settings())?;
    // m c U⁴ - q E·x is conserved in a uniform field
    let invariant = |k: usize| {
        let s = &wl.samples[k];
        p.mass * cfg.c * s.u.0[3] - p.charge * cfg.field_e.dot(&s.x.spatial())
    };
    let i0 = invariant(0);
    let drift = (0..wl.samples.len()).fold(0.0f64, |m, k| m.max((invariant(k) - i0).abs())) / (p.mass * cfg.c * cfg.c);
    let last = wl.last();
    let r = &mut o.report;
    r.value("final_t", last.t);
    r.value("final_gamma", last.u.0[3] / cfg.c);
    r.value("energy_balance_rel", drift);
    norm_check(r, &wl, cfg.norm_tolerance);
    r.check(Check::at_most("energy_balance", drift, 1e-9));
    o.worldline("worldline.csv", &wl, cfg.stride)
}

fn charged_dust(cfg: &ScenarioConfig, o: &mut Out) -> RunResult<()> {
    let g = metric(cfg);
    let x0 = cfg.initial_event();
    let parcel = suite::normalized_state(&g, &x0, &cfg.particle.v, cfg.fluid.rho, cfg.fluid.sigma0)?;
    let (ds, n, settings) = (cfg.integrator.step, cfg.integrator.steps, cfg.settings());
    let wl = fluids::charged_dust_streamline(&parcel, uniform_field(cfg), &g, ds, n, settings)?;
    norm_check(&mut o.report, &wl, cfg.norm_tolerance);
    if cfg.potential.kind == PotentialKind::Zero {
        let lorentz = integrate_lorentz(&parcel, uniform_field(cfg), ds, n, cfg.c, settings)?;
        o.report.check(Check::at_most("lorentz_consistency", suite::worldline_deviation(&wl, &lorentz), 1e-10));
    }
    if cfg.fluid.sigma0 == 0.0 {
        let geo = integrate_geodesic(&g, &parcel, ds, n, settings)?;
        o.report.check(Check::at_most("geodesic_consistency", suite::worldline_deviation(&wl, &geo), 1e-12));
    }
    o.worldline("streamline.csv", &wl, cfg.stride)
}

fn fluid_fields(cfg: &ScenarioConfig) -> FluidFields {
    let f = &cfg.fluid;
    let (rho, p0, gp) = (f.rho, f.p0, f.grad_p);
    let mut fields = FluidFields::at_rest(metric(cfg), Arc::new(move |_| rho))
        .with_pressure(Arc::new(move |y: &FourVector| p0 + gp.dot(&y.spatial())));
    match f.flow {
        FlowKind::Rest => {}
        FlowKind::Uniform => {
            let v = f.velocity;
            fields = fields.with_coordinate_velocity(Arc::new(move |_| v));
        }
        FlowKind::RigidRotation => {
            let w = ThreeVector::new(0.0, 0.0, f.omega);
            fields = fields.with_coordinate_velocity(Arc::new(move |y: &FourVector| w.cross(&y.spatial())));
        }
    }
    let (sigma0, eta, zeta) = (f.sigma0, f.eta, f.zeta);
    let faraday = FaradayTensor::assemble(cfg.field_e, cfg.field_b);
    fields
        .with_charge(Arc::new(move |_| sigma0), Arc::new(move |_| faraday))
        .with_viscosity(Arc::new(move |_| eta), Arc::new(move |_| zeta))
}

fn fluid_streamline(cfg: &ScenarioConfig, o: &mut Out) -> RunResult<()> {
    let fields = fluid_fields(cfg);
    let x0 = cfg.initial_event();
    let parcel = suite::normalized_state(&fields.metric, &x0, &cfg.particle.v, cfg.fluid.rho, 0.0)?;
    let (ds, n, settings) = (cfg.integrator.step, cfg.integrator.steps, cfg.settings());
    let wl = fluids::perfect_fluid_streamline(&parcel, &fields, ds, n, cfg.fluid.h, settings)?;
    norm_check(&mut o.report, &wl, cfg.norm_tolerance);
    if cfg.fluid.p0 == 0.0 && cfg.fluid.grad_p == ThreeVector::ZERO {
        let geo = integrate_geodesic(&fields.metric, &parcel, ds, n, settings)?;
        o.report.check(Check::at_most("geodesic_consistency", suite::worldline_deviation(&wl, &geo), 1e-12));
    }
    o.worldline("streamline.csv", &wl, cfg.stride)
}

fn residual_at(kind: ResidualKind, fields: &FluidFields, x: &FourVector, h: f64) -> relmech_core::Result<Residual> {
    let tag = kind.as_str();
    let vector = |r: FourVector| Residual { tag, x: *x, h, r };
    let scalar = |r: f64| Residual::scalar(tag, *x, h, r);
    Ok(match kind {
        ResidualKind::ContinuityDust => scalar(fluids::continuity_residual_dust(fields, x, h)?),
        ResidualKind::EulerDust => vector(fluids::euler_residual_dust(fields, x, h)?),
        ResidualKind::ContinuityPerfectFluid => scalar(fluids::continuity_residual_perfect_fluid(fields, x, h)?),
        ResidualKind::EulerPerfectFluid => vector(fluids::euler_residual_perfect_fluid(fields, x, h)?),
        ResidualKind::ContinuityPlasma => scalar(fluids::plasma_continuity_residual(fields, x, h)?),
        ResidualKind::EulerPlasma => vector(fluids::plasma_euler_residual(fields, x, h)?),
        ResidualKind::ContinuityViscous => scalar(fluids::viscous_continuity_residual(fields, x, h)?),
        ResidualKind::NavierStokes => vector(fluids::navier_stokes_residual(fields, x, h)?),
    })
}

fn residual_sweep(cfg: &ScenarioConfig, o: &mut Out) -> RunResult<()> {
    let chart = chart_by_name(&cfg.chart, curvilinear::DEFAULT_MARGIN)?;
    let fields = fluid_fields(cfg);
    let s = &cfg.sweep;
    let at = |i: usize, axis: usize| {
        if s.n == 1 {
            s.min.0[axis]
        } else {
            s.min.0[axis] + (s.max.0[axis] - s.min.0[axis]) * i as f64 / (s.n - 1) as f64
        }
    };
    let mut csv = String::from(RESIDUAL_CSV_HEADER);
    csv.push('\n');
    let mut worst = 0.0f64;
    for i in 0..s.n {
        for j in 0..s.n {
            for k in 0..s.n {
                let xh = ThreeVector::new(at(i, 0), at(j, 1), at(k, 2));
                chart.check(&xh)?;
                let x = chart.inverse(&xh);
                let ev = FourVector::new(x.0[0], x.0[1], x.0[2], s.x4);
                let r = residual_at(s.residual, &fields, &ev, s.h)?;
                worst = worst.max(r.r.max_abs());
                csv.push_str(&r.csv_row());
                csv.push('\n');
            }
        }
    }
    let rep = &mut o.report;
    rep.value("events", (s.n * s.n * s.n) as f64);
    rep.value("max_abs_residual", worst);
    rep.check(Check::at_most("max_residual", worst, s.tolerance));
    o.write("residuals.csv", csv.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn run_text(text: &str) -> (RunReport, tempfile::TempDir) {
        let dir = tempfile::tempdir().unwrap();
        let cfg = parse_config(text).unwrap();
        (run(&cfg, dir.path()).unwrap(), dir)
    }

    #[test]
    fn thinning_keeps_the_endpoints() {
        let (r, dir) = run_text("scenario = lorentz_trajectory\nc = 1\nparticle.v = 0.5,0,0\nparticle.charge = 1\nfield.B = 0,0,1\nintegrator.steps = 10\noutput.stride = 4\n");
        assert!(r.passed());
        let csv = std::fs::read_to_string(dir.path().join("worldline.csv")).unwrap();
        // samples 0, 4, 8 and the last one
        assert_eq!(csv.lines().count(), 1 + 4);
    }

    #[test]
    fn lorentz_energy_balance() {
        let (r, _d) = run_text("scenario = lorentz_trajectory\nc = 1\nparticle.v = 0.3,0.2,0\nparticle.charge = -1\nfield.E = 0.5,0,0.1\nfield.B = 0,0.4,1\nintegrator.steps = 5000\n");
        assert!(r.passed(), "{:?}", r.checks);
        assert_eq!(r.artifacts, vec!["worldline.csv"]);
    }

    #[test]
    fn residual_sweep_grid() {
        let (r, dir) = run_text("scenario = residual_sweep\nc = 10\npotential.kind = point_mass\npotential.GM = 1\nsweep.residual = euler_perfect_fluid\nfluid.p0 = 0.2\n");
        let csv = std::fs::read_to_string(dir.path().join("residuals.csv")).unwrap();
        assert_eq!(csv.lines().count(), 1001);
        assert!(csv.lines().nth(1).unwrap().starts_with("euler_perfect_fluid,"));
        // a fluid at rest in a gravitational field with uniform pressure is not in equilibrium
        assert!(!r.passed());
        let (r, _d) = run_text("scenario = residual_sweep\nc = 10\nsweep.residual = navier_stokes\nfluid.p0 = 0.2\nfluid.eta = 0.1\nsweep.n = 4\n");
        assert!(r.passed(), "{:?}", r.checks);
    }

    #[test]
    fn sweep_rejects_points_on_the_axis() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = parse_config("scenario = residual_sweep\nsweep.min = 1,0,0\nsweep.max = 2,1,1\n").unwrap();
        assert!(matches!(run(&cfg, dir.path()), Err(RunError::Core(relmech_core::Error::SingularJacobian { .. }))));
    }

    #[test]
    fn charged_dust_consistency_checks() {
        let (r, _d) = run_text("scenario = charged_dust\nc = 1\nparticle.v = 0.3,0,0\nfluid.sigma0 = 0.5\nfield.B = 0,0,1\nintegrator.steps = 2000\n");
        assert!(r.checks.iter().any(|c| c.name == "lorentz_consistency"));
        assert!(r.passed(), "{:?}", r.checks);
        let (r, _d) = run_text("scenario = charged_dust\nc = 10\npotential.kind = point_mass\npotential.GM = 1\nparticle.x = 5,0,0\nparticle.v = 0,0.4,0\nintegrator.step = 1e-2\nintegrator.steps = 2000\n");
        assert!(r.checks.iter().any(|c| c.name == "geodesic_consistency"));
        assert!(r.passed(), "{:?}", r.checks);
    }

    #[test]
    fn fluid_streamline_without_pressure_is_a_geodesic() {
        let (r, _d) = run_text("scenario = fluid_streamline\nc = 10\npotential.kind = point_mass\npotential.GM = 1\nparticle.x = 5,0,0\nparticle.v = 0,0.4,0\nintegrator.step = 1e-2\nintegrator.steps = 500\n");
        assert!(r.passed(), "{:?}", r.checks);
        let (r, _d) = run_text("scenario = fluid_streamline\nc = 10\nfluid.grad_p = 0.1,0,0\nintegrator.steps = 500\n");
        assert!(r.passed(), "{:?}", r.checks);
        assert!(r.checks.iter().all(|c| c.name != "geodesic_consistency"));
    }

    #[test]
    fn short_orbit() {
        let (r, dir) = run_text("scenario = orbit\nc = 10\norbit.GM = 1\norbit.a = 10\norbit.e = 0.3\norbit.revolutions = 5.5\norbit.steps_per_orbit = 2000\noutput.stride = 10\n");
        assert!(r.passed(), "{:?}", r.checks);
        assert_eq!(r.artifacts, vec!["orbit.csv", "precession.txt"]);
        assert!(dir.path().join("report.txt").exists());
    }
}
