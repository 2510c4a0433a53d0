//! Geodesics in effective metrics, static first integrals and perihelion precession.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::gravity::{weak_field_ratio, EffectiveMetric, NewtonianPotential, Potential};
use crate::minkowski::{FourVector, ThreeVector};
use crate::worldline::{integrate_second_order, IntegratorSettings, ParticleState, Worldline, WORLDLINE_CSV_HEADER};

/// Bound on `|θ - π/2|` and `|u^z|/c` for equatorial motion.
pub const EQUATORIAL_TOL: f64 = 1e-9;
/// Relative radial amplitude below which an orbit is treated as circular.
pub const MIN_RELATIVE_AMPLITUDE: f64 = 1e-10;

/// Integrates `d²x^α/ds² = -Γ^α_βγ u^β u^γ`, recording `g(u,u) + c²` per sample.
pub fn integrate_geodesic(
    g: &EffectiveMetric,
    state0: &ParticleState,
    ds: f64,
    n: usize,
    settings: IntegratorSettings,
) -> Result<Worldline> {
    integrate_second_order(
        &state0.x,
        &state0.u,
        state0.mass,
        state0.charge,
        g.c(),
        ds,
        n,
        settings,
        |x, u| Ok(-g.christoffel(x)?.contract(u, u)),
        |x, u| g.dot(x, u, u),
    )
}

/// Conserved energy per unit mass (m²/s², `c² + ½v² + W` to leading order)
/// and angular momentum per unit mass about the z axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstIntegrals {
    pub epsilon: f64,
    pub h: f64,
}

fn check_equatorial(x: &FourVector, u: &FourVector, c: f64) -> Result<()> {
    let r = x.spatial().norm();
    let dtheta = (x.0[2] / r).abs();
    let uz = (u.0[2] / c).abs();
    if dtheta > EQUATORIAL_TOL || uz > EQUATORIAL_TOL {
        return Err(Error::NotEquatorial { detail: format!("|theta - pi/2| = {dtheta:e}, |u_z|/c = {uz:e}") });
    }
    Ok(())
}

/// `ε = c(1 + 2W/c²)U⁴`, `h = (1 - 2W/c²)(x u^y - y u^x)`.
pub fn static_first_integrals(state: &ParticleState, w: &dyn NewtonianPotential, c: f64) -> Result<FirstIntegrals> {
    check_equatorial(&state.x, &state.u, c)?;
    let (x, u) = (&state.x, &state.u);
    let k = weak_field_ratio(w.value(&x.spatial()), c)?;
    Ok(FirstIntegrals {
        epsilon: c * (1.0 + k) * u.0[3],
        h: (1.0 - k) * (x.0[0] * u.0[1] - x.0[1] * u.0[0]),
    })
}

/// `L = ½(1 - 2W/c²)|u|² - ½(1 + 2W/c²)(u⁴)²` per unit mass.
pub fn lagrangian(x: &FourVector, u: &FourVector, w: &dyn NewtonianPotential, c: f64) -> Result<f64> {
    let k = weak_field_ratio(w.value(&x.spatial()), c)?;
    let v2 = u.spatial().norm_sq();
    Ok(0.5 * (1.0 - k) * v2 - 0.5 * (1.0 + k) * u.0[3] * u.0[3])
}

fn momenta(x: &FourVector, u: &FourVector, w: &dyn NewtonianPotential, c: f64) -> Result<[f64; 4]> {
    let k = weak_field_ratio(w.value(&x.spatial()), c)?;
    Ok([(1.0 - k) * u.0[0], (1.0 - k) * u.0[1], (1.0 - k) * u.0[2], -(1.0 + k) * u.0[3]])
}

/// Largest `|d/ds(∂L/∂u^μ) - ∂L/∂x^μ|` over interior samples, with a central difference in s.
pub fn euler_lagrange_residual(wl: &Worldline, w: &dyn NewtonianPotential, c: f64) -> Result<f64> {
    let s = &wl.samples;
    if s.len() < 3 {
        return Err(Error::InvalidArgument("need at least three samples".into()));
    }
    let c2 = c * c;
    let mut worst: f64 = 0.0;
    for k in 1..s.len() - 1 {
        let pp = momenta(&s[k + 1].x, &s[k + 1].u, w, c)?;
        let pm = momenta(&s[k - 1].x, &s[k - 1].u, w, c)?;
        let (x, u) = (&s[k].x, &s[k].u);
        let dw = w.gradient(&x.spatial());
        let q = u.spatial().norm_sq() + u.0[3] * u.0[3];
        let ds = s[k + 1].s - s[k - 1].s;
        for mu in 0..4 {
            let dl = if mu < 3 { -dw.0[mu] / c2 * q } else { 0.0 };
            worst = worst.max(((pp[mu] - pm[mu]) / ds - dl).abs());
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitParams {
    pub gm: f64,
    pub h: f64,
    pub epsilon: f64,
    pub c: f64,
}

/// Orbit equation in `y = 1/r`:
/// `(1-ky)/(1+ky)(y'² + y²) + c²(1-ky)/h² - ε²/(h²c²)` with `k = 2GM/c²`.
pub fn orbit_equation_residual(y: f64, yp: f64, p: &OrbitParams) -> f64 {
    let k = 2.0 * p.gm / (p.c * p.c);
    let h2 = p.h * p.h;
    (1.0 - k * y) / (1.0 + k * y) * (yp * yp + y * y) + p.c * p.c * (1.0 - k * y) / h2
        - p.epsilon * p.epsilon / (h2 * p.c * p.c)
}

/// Orbit-equation variables `(y, dy/dφ)` of an equatorial state.
pub fn orbit_variables(state: &ParticleState) -> (f64, f64) {
    let (x, u) = (&state.x, &state.u);
    let r2 = x.0[0] * x.0[0] + x.0[1] * x.0[1];
    let r = r2.sqrt();
    let ur = (x.0[0] * u.0[0] + x.0[1] * u.0[1]) / r;
    let uphi = (x.0[0] * u.0[1] - x.0[1] * u.0[0]) / r2;
    (1.0 / r, -ur / (r2 * uphi))
}

/// Perihelion advance per revolution, `8π(GM/(ch))²`.
pub fn perihelion_shift_closed_form(gm: f64, h: f64, c: f64) -> f64 {
    8.0 * PI * (gm / (c * h)).powi(2)
}

/// Initial data for a bound point-mass orbit started at perihelion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitConfig {
    pub gm: f64,
    /// Semi-major axis of the osculating Newtonian ellipse.
    pub a: f64,
    pub e: f64,
    pub c: f64,
    pub steps_per_orbit: usize,
    pub revolutions: f64,
    pub settings: IntegratorSettings,
}

impl OrbitConfig {
    pub fn new(gm: f64, a: f64, e: f64, c: f64) -> Self {
        OrbitConfig {
            gm,
            a,
            e,
            c,
            steps_per_orbit: 4000,
            revolutions: 50.0,
            settings: IntegratorSettings { projection: true, ..Default::default() },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gm > 0.0 && self.a > 0.0 && self.c > 0.0) {
            return Err(Error::InvalidArgument("GM, a and c must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.e) {
            return Err(Error::InvalidArgument(format!("eccentricity {} outside [0, 1)", self.e)));
        }
        if self.steps_per_orbit < 8 || !(self.revolutions > 0.0) {
            return Err(Error::InvalidArgument("need steps_per_orbit >= 8 and revolutions > 0".into()));
        }
        Ok(())
    }

    pub fn potential(&self) -> Potential {
        Potential::PointMass { gm: self.gm }
    }

    pub fn kepler_period(&self) -> f64 {
        2.0 * PI * (self.a.powi(3) / self.gm).sqrt()
    }

    /// Perihelion on +x with the Newtonian perihelion speed along +y,
    /// lifted to a g-normalized four-velocity.
    pub fn initial_state(&self) -> Result<ParticleState> {
        self.validate()?;
        let rp = self.a * (1.0 - self.e);
        let vp = (self.gm * (1.0 + self.e) / rp).sqrt();
        let x = ThreeVector::new(rp, 0.0, 0.0);
        let v = ThreeVector::new(0.0, vp, 0.0);
        let c = self.c;
        let k = weak_field_ratio(self.potential().value(&x), c)?;
        let d2 = 1.0 + k - (1.0 - k) * v.norm_sq() / (c * c);
        if !(d2 > 0.0) {
            return Err(Error::NotTimelike { at: 0.0 });
        }
        let d = d2.sqrt();
        let state = ParticleState {
            x: FourVector::event(&x, 0.0, c),
            u: FourVector::new(v.0[0] / d, v.0[1] / d, v.0[2] / d, c / d),
            mass: 1.0,
            charge: 0.0,
        };
        let fi = static_first_integrals(&state, &self.potential(), c)?;
        if !(fi.epsilon < c * c) {
            return Err(Error::InvalidArgument(format!("orbit is not bound: epsilon - c^2 = {}", fi.epsilon - c * c)));
        }
        Ok(state)
    }

    pub fn step(&self) -> f64 {
        self.kepler_period() / self.steps_per_orbit as f64
    }

    pub fn total_steps(&self) -> usize {
        (self.revolutions * self.steps_per_orbit as f64).ceil() as usize
    }

    pub fn run(&self) -> Result<Worldline> {
        let state = self.initial_state()?;
        let g = EffectiveMetric::static_w(std::sync::Arc::new(self.potential()), self.c);
        integrate_geodesic(&g, &state, self.step(), self.total_steps(), self.settings)
    }
}

/// Polar angle of each sample, unwrapped to be continuous.
pub fn unwrapped_phi(wl: &Worldline) -> Vec<f64> {
    let mut out = Vec::with_capacity(wl.samples.len());
    let mut prev = 0.0;
    let mut offset = 0.0;
    for (i, s) in wl.samples.iter().enumerate() {
        let p = s.x.0[1].atan2(s.x.0[0]);
        if i > 0 {
            let d = p - prev;
            if d > PI {
                offset -= 2.0 * PI;
            } else if d < -PI {
                offset += 2.0 * PI;
            }
        }
        prev = p;
        out.push(p + offset);
    }
    out
}

pub const ORBIT_CSV_EXTRA: &str = "r,phi,epsilon,h_angmom,orbit_index";

/// Worldline CSV with orbit columns; `phi` is unwrapped and `orbit_index` counts completed turns.
pub fn write_orbit_csv<W: Write>(wl: &Worldline, pot: &dyn NewtonianPotential, mut out: W) -> io::Result<()> {
    writeln!(out, "{WORLDLINE_CSV_HEADER},{ORBIT_CSV_EXTRA}")?;
    let phi = unwrapped_phi(wl);
    let phi0 = phi.first().copied().unwrap_or(0.0);
    for (k, s) in wl.samples.iter().enumerate() {
        let st = ParticleState { x: s.x, u: s.u, mass: wl.mass, charge: wl.charge };
        let (eps, h) = match static_first_integrals(&st, pot, wl.c) {
            Ok(fi) => (fi.epsilon, fi.h),
            Err(_) => (f64::NAN, f64::NAN),
        };
        let idx = ((phi[k] - phi0) / (2.0 * PI)).floor() as i64;
        let x = &s.x.0;
        let u = &s.u.0;
        writeln!(
            out,
            "{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{}",
            s.s,
            s.t,
            x[0],
            x[1],
            x[2],
            x[3],
            u[0],
            u[1],
            u[2],
            u[3],
            s.norm_residual,
            s.x.spatial().norm(),
            phi[k],
            eps,
            h,
            idx
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrecessionReport {
    /// Perihelion angles `φ_k - 2πk`.
    pub perihelion_angles: Vec<f64>,
    /// Fitted advance per revolution (rad).
    pub shift_per_rev: f64,
    pub shift_stderr: f64,
    pub predicted: f64,
    pub relative_deviation: f64,
}

impl PrecessionReport {
    pub fn orbits(&self) -> usize {
        self.perihelion_angles.len()
    }

    /// Flat `key = value` block.
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "perihelia = {}", self.orbits());
        let _ = writeln!(s, "shift_per_rev = {:?}", self.shift_per_rev);
        let _ = writeln!(s, "shift_stderr = {:?}", self.shift_stderr);
        let _ = writeln!(s, "predicted = {:?}", self.predicted);
        let _ = writeln!(s, "relative_deviation = {:?}", self.relative_deviation);
        let angles: Vec<String> = self.perihelion_angles.iter().map(|a| format!("{a:?}")).collect();
        let _ = writeln!(s, "perihelion_angles = {}", angles.join(","));
        s
    }
}

/// Perihelion angles from local minima of r(s), each refined by a three-point parabola.
pub fn perihelion_angles(wl: &Worldline) -> Result<Vec<f64>> {
    let r: Vec<f64> = wl.samples.iter().map(|s| s.x.spatial().norm()).collect();
    let (lo, hi) = r.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    if r.len() < 3 || (hi - lo) <= MIN_RELATIVE_AMPLITUDE * 0.5 * (hi + lo) {
        return Err(Error::InsufficientOrbits { found: 0 });
    }
    let phi = unwrapped_phi(wl);
    let mut out = Vec::new();
    for k in 1..r.len() - 1 {
        if !(r[k - 1] > r[k] && r[k] <= r[k + 1]) {
            continue;
        }
        let curv = r[k - 1] - 2.0 * r[k] + r[k + 1];
        let d = if curv > 0.0 { 0.5 * (r[k - 1] - r[k + 1]) / curv } else { 0.0 };
        let p = phi[k] + 0.5 * d * (phi[k + 1] - phi[k - 1]) + 0.5 * d * d * (phi[k + 1] - 2.0 * phi[k] + phi[k - 1]);
        out.push(p - 2.0 * PI * out.len() as f64);
    }
    // re-anchor the turn count on the first detected perihelion
    if let Some(&first) = out.first() {
        let turns = (first / (2.0 * PI)).round();
        for a in out.iter_mut() {
            *a -= 2.0 * PI * turns;
        }
    }
    if out.len() < 3 {
        return Err(Error::InsufficientOrbits { found: out.len() });
    }
    Ok(out)
}

/// Least-squares slope and its standard error for `y_k` against `k`.
pub fn fit_slope(y: &[f64]) -> (f64, f64) {
    let n = y.len() as f64;
    let xm = (n - 1.0) / 2.0;
    let ym = y.iter().sum::<f64>() / n;
    let sxx: f64 = (0..y.len()).map(|k| (k as f64 - xm).powi(2)).sum();
    let sxy: f64 = y.iter().enumerate().map(|(k, v)| (k as f64 - xm) * (v - ym)).sum();
    let slope = sxy / sxx;
    let rss: f64 = y.iter().enumerate().map(|(k, v)| (v - ym - slope * (k as f64 - xm)).powi(2)).sum();
    let stderr = if y.len() > 2 { (rss / (n - 2.0) / sxx).sqrt() } else { f64::INFINITY };
    (slope, stderr)
}

/// Measured perihelion advance of an equatorial point-mass orbit against the closed form.
pub fn measure_precession(wl: &Worldline, gm: f64) -> Result<PrecessionReport> {
    let angles = perihelion_angles(wl)?;
    let (shift, stderr) = fit_slope(&angles);
    let pot = Potential::PointMass { gm };
    let fi = static_first_integrals(&wl.state(0), &pot, wl.c)?;
    let predicted = perihelion_shift_closed_form(gm, fi.h, wl.c);
    Ok(PrecessionReport {
        perihelion_angles: angles,
        shift_per_rev: shift,
        shift_stderr: stderr,
        predicted,
        relative_deviation: (shift - predicted) / predicted,
    })
}

/// `ds/dt = √(1 + 2W/c² - (1 - 2W/c²)|v|²/c²)`.
pub fn time_dilation_factor(state: &ParticleState, w: &dyn NewtonianPotential, c: f64) -> Result<f64> {
    let k = weak_field_ratio(w.value(&state.x.spatial()), c)?;
    let v = state.coordinate_velocity(c);
    let q = 1.0 + k - (1.0 - k) * v.norm_sq() / (c * c);
    if !(q > 0.0) {
        return Err(Error::NotTimelike { at: state.x.0[3] });
    }
    Ok(q.sqrt())
}
