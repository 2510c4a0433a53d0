//! Flat `key = value` scenario configuration.

use std::collections::HashSet;
use std::fmt::Write;
use std::path::PathBuf;
use std::str::FromStr;

use relmech_core::ode::Method;
use relmech_core::{FourVector, ThreeVector};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {reason}")]
    ParseError { line: usize, reason: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("`{key}` = {value}: {reason}")]
    RangeError { key: String, value: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    Orbit,
    LorentzTrajectory,
    ChargedDust,
    FluidStreamline,
    ResidualSweep,
    IdentitySuite,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 6] = [
        ScenarioKind::Orbit,
        ScenarioKind::LorentzTrajectory,
        ScenarioKind::ChargedDust,
        ScenarioKind::FluidStreamline,
        ScenarioKind::ResidualSweep,
        ScenarioKind::IdentitySuite,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ScenarioKind::Orbit => "orbit",
            ScenarioKind::LorentzTrajectory => "lorentz_trajectory",
            ScenarioKind::ChargedDust => "charged_dust",
            ScenarioKind::FluidStreamline => "fluid_streamline",
            ScenarioKind::ResidualSweep => "residual_sweep",
            ScenarioKind::IdentitySuite => "identity_suite",
        }
    }
}

impl FromStr for ScenarioKind {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        ScenarioKind::ALL.into_iter().find(|k| k.as_str() == s).ok_or(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialKind {
    PointMass,
    Uniform,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowKind {
    Rest,
    Uniform,
    RigidRotation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualKind {
    ContinuityDust,
    EulerDust,
    ContinuityPerfectFluid,
    EulerPerfectFluid,
    ContinuityPlasma,
    EulerPlasma,
    ContinuityViscous,
    NavierStokes,
}

impl ResidualKind {
    pub const ALL: [ResidualKind; 8] = [
        ResidualKind::ContinuityDust,
        ResidualKind::EulerDust,
        ResidualKind::ContinuityPerfectFluid,
        ResidualKind::EulerPerfectFluid,
        ResidualKind::ContinuityPlasma,
        ResidualKind::EulerPlasma,
        ResidualKind::ContinuityViscous,
        ResidualKind::NavierStokes,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ResidualKind::ContinuityDust => "continuity_dust",
            ResidualKind::EulerDust => "euler_dust",
            ResidualKind::ContinuityPerfectFluid => "continuity_perfect_fluid",
            ResidualKind::EulerPerfectFluid => "euler_perfect_fluid",
            ResidualKind::ContinuityPlasma => "continuity_plasma",
            ResidualKind::EulerPlasma => "euler_plasma",
            ResidualKind::ContinuityViscous => "continuity_viscous",
            ResidualKind::NavierStokes => "navier_stokes",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    pub step: f64,
    pub steps: usize,
    /// Unset means on for orbits and off elsewhere.
    pub projection: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialConfig {
    pub kind: PotentialKind,
    pub gm: f64,
    pub g: ThreeVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleConfig {
    pub x: ThreeVector,
    pub v: ThreeVector,
    pub t: f64,
    pub mass: f64,
    pub charge: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitSection {
    pub gm: f64,
    pub a: f64,
    pub e: f64,
    pub steps_per_orbit: usize,
    pub revolutions: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FluidConfig {
    pub rho: f64,
    pub sigma0: f64,
    pub p0: f64,
    pub grad_p: ThreeVector,
    pub eta: f64,
    pub zeta: f64,
    pub flow: FlowKind,
    pub velocity: ThreeVector,
    pub omega: f64,
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub residual: ResidualKind,
    pub n: usize,
    pub min: ThreeVector,
    pub max: ThreeVector,
    pub x4: f64,
    pub h: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    pub c: f64,
    pub g_newton: f64,
    pub seed: u64,
    pub out: PathBuf,
    pub chart: String,
    pub stride: usize,
    pub norm_tolerance: f64,
    pub integrator: IntegratorConfig,
    pub potential: PotentialConfig,
    pub field_e: ThreeVector,
    pub field_b: ThreeVector,
    pub particle: ParticleConfig,
    pub orbit: OrbitSection,
    pub fluid: FluidConfig,
    pub sweep: SweepConfig,
}

/// `(key, default, description)` for every accepted key.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("scenario", "", "orbit | lorentz_trajectory | charged_dust | fluid_streamline | residual_sweep | identity_suite (required)"),
    ("c", "299792458", "speed of light, > 0"),
    ("G", "6.6743e-11", "gravitational constant, > 0; potential.M sets GM = G*M"),
    ("seed", "0", "seed for randomized checks"),
    ("out", "out", "output directory (overridden by --out and RELMECH_OUT)"),
    ("chart", "spherical", "spherical | cylindrical | cartesian; sweep grid coordinates and operator checks"),
    ("output.stride", "1", "write every n-th sample to trajectory CSVs, >= 1"),
    ("check.norm_tolerance", "1e-9", "bound on |g(U,U) + c^2| / c^2"),
    ("integrator.method", "rk4", "rk4 | rkf45"),
    ("integrator.step", "1e-3", "proper-time step ds, > 0"),
    ("integrator.steps", "1000", "number of steps, >= 1"),
    ("integrator.atol", "1e-12", "rkf45 absolute tolerance, > 0"),
    ("integrator.rtol", "1e-10", "rkf45 relative tolerance, > 0"),
    ("integrator.projection", "", "true | false; default true for orbit, false otherwise"),
    ("potential.kind", "zero", "point_mass | uniform | zero"),
    ("potential.GM", "0", "point-mass GM, >= 0"),
    ("potential.M", "", "point mass M; sets potential.GM = G*M"),
    ("potential.g", "0,0,0", "uniform acceleration vector, W = -g.x"),
    ("field.E", "0,0,0", "uniform electric field"),
    ("field.B", "0,0,0", "uniform magnetic field"),
    ("particle.x", "0,0,0", "initial position"),
    ("particle.v", "0,0,0", "initial coordinate velocity, |v| < c"),
    ("particle.t", "0", "initial time"),
    ("particle.mass", "1", "mass (density for fluid parcels), > 0"),
    ("particle.charge", "0", "charge (charge density for charged dust)"),
    ("orbit.GM", "1.32712440018e20", "central GM, > 0"),
    ("orbit.a", "5.7909e10", "semi-major axis, > 0"),
    ("orbit.e", "0.20563", "eccentricity in [0, 1)"),
    ("orbit.steps_per_orbit", "4000", "RK steps per Kepler period, >= 8"),
    ("orbit.revolutions", "50", "revolutions to integrate, > 0"),
    ("orbit.tolerance", "0.05", "bound on |measured/closed-form - 1|"),
    ("fluid.rho", "1", "rest-mass density, >= 0"),
    ("fluid.sigma0", "0", "rest charge density"),
    ("fluid.p0", "0", "pressure at the origin"),
    ("fluid.grad_p", "0,0,0", "uniform pressure gradient"),
    ("fluid.eta", "0", "shear viscosity, >= 0"),
    ("fluid.zeta", "0", "bulk viscosity, >= 0"),
    ("fluid.flow", "rest", "rest | uniform | rigid_rotation"),
    ("fluid.velocity", "0,0,0", "velocity of the uniform flow"),
    ("fluid.omega", "0", "angular velocity of the rigid rotation about x3"),
    ("fluid.h", "1e-4", "finite-difference step for field derivatives, > 0"),
    ("sweep.residual", "continuity_dust", "continuity_dust | euler_dust | continuity_perfect_fluid | euler_perfect_fluid | continuity_plasma | euler_plasma | continuity_viscous | navier_stokes"),
    ("sweep.n", "10", "grid points per axis, 1..=1000"),
    ("sweep.min", "1,0.5,0", "lower grid corner in chart coordinates"),
    ("sweep.max", "2,2.5,3", "upper grid corner in chart coordinates"),
    ("sweep.x4", "0", "x4 = ct of the sweep slice"),
    ("sweep.h", "1e-3", "finite-difference step, > 0"),
    ("sweep.tolerance", "1e-6", "bound on the largest residual component"),
];

/// Text for `--help-config`.
pub fn help_config() -> String {
    let w = KEYS.iter().map(|k| k.0.len()).max().unwrap_or(0);
    let mut s = String::from("Configuration keys (`key = value`, `#` starts a comment, vectors are `x, y, z`):\n\n");
    for (k, d, doc) in KEYS {
        let def = if d.is_empty() { String::new() } else { format!(" [default: {d}]") };
        let _ = writeln!(s, "  {k:<w$}  {doc}{def}");
    }
    s
}

impl ScenarioConfig {
    fn with_defaults(scenario: ScenarioKind) -> Self {
        ScenarioConfig {
            scenario,
            c: 299_792_458.0,
            g_newton: 6.6743e-11,
            seed: 0,
            out: PathBuf::from("out"),
            chart: "spherical".into(),
            stride: 1,
            norm_tolerance: 1e-9,
            integrator: IntegratorConfig { method: Method::Rk4, step: 1e-3, steps: 1000, projection: None },
            potential: PotentialConfig { kind: PotentialKind::Zero, gm: 0.0, g: ThreeVector::ZERO },
            field_e: ThreeVector::ZERO,
            field_b: ThreeVector::ZERO,
            particle: ParticleConfig { x: ThreeVector::ZERO, v: ThreeVector::ZERO, t: 0.0, mass: 1.0, charge: 0.0 },
            orbit: OrbitSection {
                gm: 1.327_124_400_18e20,
                a: 5.7909e10,
                e: 0.20563,
                steps_per_orbit: 4000,
                revolutions: 50.0,
                tolerance: 0.05,
            },
            fluid: FluidConfig {
                rho: 1.0,
                sigma0: 0.0,
                p0: 0.0,
                grad_p: ThreeVector::ZERO,
                eta: 0.0,
                zeta: 0.0,
                flow: FlowKind::Rest,
                velocity: ThreeVector::ZERO,
                omega: 0.0,
                h: 1e-4,
            },
            sweep: SweepConfig {
                residual: ResidualKind::ContinuityDust,
                n: 10,
                min: ThreeVector::new(1.0, 0.5, 0.0),
                max: ThreeVector::new(2.0, 2.5, 3.0),
                x4: 0.0,
                h: 1e-3,
                tolerance: 1e-6,
            },
        }
    }

    /// Integrator settings with the scenario's projection default.
    pub fn settings(&self) -> relmech_core::worldline::IntegratorSettings {
        let projection = self.integrator.projection.unwrap_or(self.scenario == ScenarioKind::Orbit);
        relmech_core::worldline::IntegratorSettings { method: self.integrator.method, projection }
    }

    /// Orbit initial data and run length.
    pub fn orbit_config(&self) -> relmech_core::orbits::OrbitConfig {
        let o = &self.orbit;
        relmech_core::orbits::OrbitConfig {
            steps_per_orbit: o.steps_per_orbit,
            revolutions: o.revolutions,
            settings: self.settings(),
            ..relmech_core::orbits::OrbitConfig::new(o.gm, o.a, o.e, self.c)
        }
    }

    pub fn newtonian_potential(&self) -> relmech_core::gravity::Potential {
        use relmech_core::gravity::Potential;
        match self.potential.kind {
            PotentialKind::PointMass => Potential::PointMass { gm: self.potential.gm },
            PotentialKind::Uniform => Potential::Uniform { g: self.potential.g },
            PotentialKind::Zero => Potential::Zero,
        }
    }

    pub fn initial_event(&self) -> FourVector {
        FourVector::event(&self.particle.x, self.particle.t, self.c)
    }
}

fn strip_comment(s: &str) -> &str {
    match s.find('#') {
        Some(i) => &s[..i],
        None => s,
    }
}

struct Line<'a> {
    no: usize,
    key: &'a str,
    value: &'a str,
}

impl Line<'_> {
    fn parse_err(&self, reason: impl Into<String>) -> ConfigError {
        ConfigError::ParseError { line: self.no, reason: reason.into() }
    }

    fn num(&self) -> Result<f64, ConfigError> {
        let v: f64 = self.value.parse().map_err(|_| self.parse_err(format!("`{}` is not a number", self.value)))?;
        if !v.is_finite() {
            return Err(self.parse_err(format!("`{}` is not finite", self.value)));
        }
        Ok(v)
    }

    fn int(&self) -> Result<u64, ConfigError> {
        self.value.parse().map_err(|_| self.parse_err(format!("`{}` is not a non-negative integer", self.value)))
    }

    fn boolean(&self) -> Result<bool, ConfigError> {
        match self.value {
            "true" => Ok(true),
            "false" => Ok(false),
            v => Err(self.parse_err(format!("`{v}` is not true or false"))),
        }
    }

    fn vec3(&self) -> Result<ThreeVector, ConfigError> {
        let parts: Vec<&str> = self.value.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(self.parse_err(format!("`{}` is not a vector `x, y, z`", self.value)));
        }
        let mut v = [0.0; 3];
        for (vi, p) in v.iter_mut().zip(parts) {
            *vi = Line { value: p, ..*self }.num()?;
        }
        Ok(ThreeVector(v))
    }

    fn choice<T: Copy>(&self, options: &[(&str, T)]) -> Result<T, ConfigError> {
        options.iter().find(|(n, _)| *n == self.value).map(|(_, v)| *v).ok_or_else(|| {
            let names: Vec<&str> = options.iter().map(|o| o.0).collect();
            self.parse_err(format!("`{}` is not one of {}", self.value, names.join(", ")))
        })
    }
}

impl<'a> Clone for Line<'a> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<'a> Copy for Line<'a> {}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let mut lines = Vec::new();
    let mut seen = HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let content = strip_comment(raw).trim();
        if content.is_empty() {
            continue;
        }
        let no = i + 1;
        let (k, v) = content
            .split_once('=')
            .ok_or(ConfigError::ParseError { line: no, reason: "expected `key = value`".into() })?;
        let line = Line { no, key: k.trim(), value: v.trim() };
        if line.key.is_empty() {
            return Err(line.parse_err("empty key"));
        }
        if !KEYS.iter().any(|(name, _, _)| *name == line.key) {
            return Err(ConfigError::UnknownKey { line: no, key: line.key.to_string() });
        }
        if !seen.insert(line.key) {
            return Err(line.parse_err(format!("duplicate key `{}`", line.key)));
        }
        lines.push(line);
    }

    let scenario = match lines.iter().find(|l| l.key == "scenario") {
        Some(l) => l.value.parse().map_err(|_| {
            let names: Vec<&str> = ScenarioKind::ALL.iter().map(|k| k.as_str()).collect();
            l.parse_err(format!("`{}` is not one of {}", l.value, names.join(", ")))
        })?,
        None => {
            return Err(ConfigError::RangeError {
                key: "scenario".into(),
                value: String::new(),
                reason: "a scenario is required".into(),
            })
        }
    };
    let mut cfg = ScenarioConfig::with_defaults(scenario);
    let mut mass = None;
    let mut atol = 1e-12;
    let mut rtol = 1e-10;
    for l in &lines {
        match l.key {
            "scenario" => {}
            "c" => cfg.c = l.num()?,
            "G" => cfg.g_newton = l.num()?,
            "seed" => cfg.seed = l.int()?,
            "out" => cfg.out = PathBuf::from(l.value),
            "chart" => cfg.chart = l.choice(&[("spherical", "spherical"), ("cylindrical", "cylindrical"), ("cartesian", "cartesian")])?.into(),
            "output.stride" => cfg.stride = l.int()? as usize,
            "check.norm_tolerance" => cfg.norm_tolerance = l.num()?,
            "integrator.method" => {
                cfg.integrator.method = l.choice(&[("rk4", Method::Rk4), ("rkf45", Method::Rkf45 { atol: 0.0, rtol: 0.0 })])?
            }
            "integrator.step" => cfg.integrator.step = l.num()?,
            "integrator.steps" => cfg.integrator.steps = l.int()? as usize,
            "integrator.atol" => atol = l.num()?,
            "integrator.rtol" => rtol = l.num()?,
            "integrator.projection" => cfg.integrator.projection = Some(l.boolean()?),
            "potential.kind" => {
                cfg.potential.kind = l.choice(&[
                    ("point_mass", PotentialKind::PointMass),
                    ("uniform", PotentialKind::Uniform),
                    ("zero", PotentialKind::Zero),
                ])?
            }
            "potential.GM" => cfg.potential.gm = l.num()?,
            "potential.M" => mass = Some(l.num()?),
            "potential.g" => cfg.potential.g = l.vec3()?,
            "field.E" => cfg.field_e = l.vec3()?,
            "field.B" => cfg.field_b = l.vec3()?,
            "particle.x" => cfg.particle.x = l.vec3()?,
            "particle.v" => cfg.particle.v = l.vec3()?,
            "particle.t" => cfg.particle.t = l.num()?,
            "particle.mass" => cfg.particle.mass = l.num()?,
            "particle.charge" => cfg.particle.charge = l.num()?,
            "orbit.GM" => cfg.orbit.gm = l.num()?,
            "orbit.a" => cfg.orbit.a = l.num()?,
            "orbit.e" => cfg.orbit.e = l.num()?,
            "orbit.steps_per_orbit" => cfg.orbit.steps_per_orbit = l.int()? as usize,
            "orbit.revolutions" => cfg.orbit.revolutions = l.num()?,
            "orbit.tolerance" => cfg.orbit.tolerance = l.num()?,
            "fluid.rho" => cfg.fluid.rho = l.num()?,
            "fluid.sigma0" => cfg.fluid.sigma0 = l.num()?,
            "fluid.p0" => cfg.fluid.p0 = l.num()?,
            "fluid.grad_p" => cfg.fluid.grad_p = l.vec3()?,
            "fluid.eta" => cfg.fluid.eta = l.num()?,
            "fluid.zeta" => cfg.fluid.zeta = l.num()?,
            "fluid.flow" => {
                cfg.fluid.flow = l.choice(&[
                    ("rest", FlowKind::Rest),
                    ("uniform", FlowKind::Uniform),
                    ("rigid_rotation", FlowKind::RigidRotation),
                ])?
            }
            "fluid.velocity" => cfg.fluid.velocity = l.vec3()?,
            "fluid.omega" => cfg.fluid.omega = l.num()?,
            "fluid.h" => cfg.fluid.h = l.num()?,
            "sweep.residual" => {
                let opts: Vec<(&str, ResidualKind)> = ResidualKind::ALL.iter().map(|k| (k.as_str(), *k)).collect();
                cfg.sweep.residual = l.choice(&opts)?
            }
            "sweep.n" => cfg.sweep.n = l.int()? as usize,
            "sweep.min" => cfg.sweep.min = l.vec3()?,
            "sweep.max" => cfg.sweep.max = l.vec3()?,
            "sweep.x4" => cfg.sweep.x4 = l.num()?,
            "sweep.h" => cfg.sweep.h = l.num()?,
            "sweep.tolerance" => cfg.sweep.tolerance = l.num()?,
            other => unreachable!("key `{other}` is listed but not handled"),
        }
    }
    if let Method::Rkf45 { .. } = cfg.integrator.method {
        cfg.integrator.method = Method::Rkf45 { atol, rtol };
    }
    if let Some(m) = mass {
        positive("potential.M", m)?;
        cfg.potential.gm = cfg.g_newton * m;
    }
    validate(&cfg, atol, rtol)?;
    Ok(cfg)
}

fn range(key: &str, value: impl ToString, reason: &str) -> ConfigError {
    ConfigError::RangeError { key: key.into(), value: value.to_string(), reason: reason.into() }
}

fn positive(key: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 {
        Ok(())
    } else {
        Err(range(key, v, "must be > 0"))
    }
}

fn non_negative(key: &str, v: f64) -> Result<(), ConfigError> {
    if v >= 0.0 {
        Ok(())
    } else {
        Err(range(key, v, "must be >= 0"))
    }
}

fn validate(cfg: &ScenarioConfig, atol: f64, rtol: f64) -> Result<(), ConfigError> {
    positive("c", cfg.c)?;
    positive("G", cfg.g_newton)?;
    positive("check.norm_tolerance", cfg.norm_tolerance)?;
    positive("integrator.step", cfg.integrator.step)?;
    positive("integrator.atol", atol)?;
    positive("integrator.rtol", rtol)?;
    if cfg.stride == 0 {
        return Err(range("output.stride", 0, "must be >= 1"));
    }
    if cfg.integrator.steps == 0 || cfg.integrator.steps > 100_000_000 {
        return Err(range("integrator.steps", cfg.integrator.steps, "must be in 1..=100000000"));
    }
    non_negative("potential.GM", cfg.potential.gm)?;
    positive("particle.mass", cfg.particle.mass)?;
    if !(cfg.particle.v.norm() < cfg.c) {
        return Err(range("particle.v", cfg.particle.v.norm(), "speed must be below c"));
    }
    positive("orbit.GM", cfg.orbit.gm)?;
    positive("orbit.a", cfg.orbit.a)?;
    if !(0.0..1.0).contains(&cfg.orbit.e) {
        return Err(range("orbit.e", cfg.orbit.e, "must be in [0, 1)"));
    }
    if cfg.orbit.steps_per_orbit < 8 {
        return Err(range("orbit.steps_per_orbit", cfg.orbit.steps_per_orbit, "must be >= 8"));
    }
    positive("orbit.revolutions", cfg.orbit.revolutions)?;
    positive("orbit.tolerance", cfg.orbit.tolerance)?;
    non_negative("fluid.rho", cfg.fluid.rho)?;
    non_negative("fluid.eta", cfg.fluid.eta)?;
    non_negative("fluid.zeta", cfg.fluid.zeta)?;
    positive("fluid.h", cfg.fluid.h)?;
    if !(cfg.fluid.velocity.norm() < cfg.c) {
        return Err(range("fluid.velocity", cfg.fluid.velocity.norm(), "speed must be below c"));
    }
    if cfg.sweep.n == 0 || cfg.sweep.n > 1000 {
        return Err(range("sweep.n", cfg.sweep.n, "must be in 1..=1000"));
    }
    positive("sweep.h", cfg.sweep.h)?;
    positive("sweep.tolerance", cfg.sweep.tolerance)?;
    for i in 0..3 {
        if cfg.sweep.min.0[i] > cfg.sweep.max.0[i] {
            return Err(range("sweep.min", format!("{:?}", cfg.sweep.min.0), "must not exceed sweep.max"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_needs_a_scenario() {
        assert!(matches!(parse_config(""), Err(ConfigError::RangeError { key, .. }) if key == "scenario"));
        assert!(matches!(parse_config("# only a comment\n\n"), Err(ConfigError::RangeError { .. })));
    }

    #[test]
    fn defaults_only() {
        let cfg = parse_config("scenario = orbit").unwrap();
        assert_eq!(cfg.c, 299_792_458.0);
        assert_eq!(cfg.orbit.gm, 1.32712440018e20);
        assert!(cfg.settings().projection);
        let cfg = parse_config("scenario = lorentz_trajectory").unwrap();
        assert!(!cfg.settings().projection);
    }

    #[test]
    fn negative_c_is_a_range_error() {
        let e = parse_config("scenario = orbit\nc = -1").unwrap_err();
        assert!(matches!(e, ConfigError::RangeError { ref key, .. } if key == "c"), "{e}");
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let e = parse_config("scenario = orbit\n\nc = fast").unwrap_err();
        assert!(matches!(e, ConfigError::ParseError { line: 3, .. }), "{e}");
        let e = parse_config("scenario = orbit\njunk").unwrap_err();
        assert!(matches!(e, ConfigError::ParseError { line: 2, .. }));
        let e = parse_config("scenario = orbit\nc = 1\nc = 2").unwrap_err();
        assert!(matches!(e, ConfigError::ParseError { line: 3, .. }));
        let e = parse_config("scenario = orbit\nfield.E = 1, 2").unwrap_err();
        assert!(matches!(e, ConfigError::ParseError { line: 2, .. }));
        let e = parse_config("scenario = warp_drive").unwrap_err();
        assert!(matches!(e, ConfigError::ParseError { line: 1, .. }));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = parse_config("scenario = orbit\norbit.mass = 3").unwrap_err();
        assert_eq!(e, ConfigError::UnknownKey { line: 2, key: "orbit.mass".into() });
    }

    #[test]
    fn values_and_comments() {
        let text = "scenario = charged_dust  # trailing\nfield.B = 0, 0, 1.5\nintegrator.method = rkf45\nintegrator.rtol = 1e-8\npotential.kind = point_mass\npotential.M = 2e30\n";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.field_b, ThreeVector::new(0.0, 0.0, 1.5));
        assert_eq!(cfg.integrator.method, Method::Rkf45 { atol: 1e-12, rtol: 1e-8 });
        assert_eq!(cfg.potential.gm, 6.6743e-11 * 2e30);
    }

    #[test]
    fn every_documented_key_parses_with_its_default() {
        for (k, d, _) in KEYS {
            let v = match *k {
                "scenario" => continue,
                "potential.M" => "1",
                "integrator.projection" => "true",
                _ => d,
            };
            let text = format!("scenario = identity_suite\n{k} = {v}\n");
            parse_config(&text).unwrap_or_else(|e| panic!("{k}: {e}"));
        }
        let help = help_config();
        assert!(KEYS.iter().all(|(k, _, _)| help.contains(k)));
    }

    #[test]
    fn ranges() {
        for bad in ["orbit.e = 1", "integrator.steps = 0", "sweep.n = 1001", "fluid.eta = -1", "particle.v = 3e8, 0, 0", "output.stride = 0"] {
            let e = parse_config(&format!("scenario = orbit\n{bad}")).unwrap_err();
            assert!(matches!(e, ConfigError::RangeError { .. }), "{bad}: {e}");
        }
    }
}
