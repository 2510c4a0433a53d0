//! Proper time, four-velocity maps and point-particle dynamics in flat spacetime.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::minkowski::{inner4, FourVector, ThreeVector};
use crate::ode::{rk4_step, rkf45_advance, Method};

/// Relative tolerance on `g(U,U) + c²` for a state to count as normalized.
pub const TAU_NORM: f64 = 1e-9;
/// Relative tolerance of the force orthogonality check.
pub const TAU_ORTHO: f64 = 1e-6;

pub const WORLDLINE_CSV_HEADER: &str = "s,t,x1,x2,x3,x4,u1,u2,u3,u4,norm_residual";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParticleState {
    pub x: FourVector,
    pub u: FourVector,
    pub mass: f64,
    pub charge: f64,
}

impl ParticleState {
    /// Flat-space state at position `x`, time `t`, moving with coordinate velocity `v`.
    pub fn from_velocity(x: &ThreeVector, t: f64, v: &ThreeVector, mass: f64, charge: f64, c: f64) -> Result<Self> {
        Ok(ParticleState {
            x: FourVector::event(x, t, c),
            u: four_velocity_from_coordinate_velocity(v, c)?,
            mass,
            charge,
        })
    }

    pub fn coordinate_velocity(&self, c: f64) -> ThreeVector {
        coordinate_velocity_from_four_velocity(&self.u, c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorSettings {
    pub method: Method,
    /// Rescale U after each step so that `g(U,U) = -c²`.
    pub projection: bool,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        IntegratorSettings { method: Method::Rk4, projection: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub s: f64,
    pub t: f64,
    pub x: FourVector,
    pub u: FourVector,
    /// `g(U,U) + c²` after the step.
    pub norm_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Worldline {
    pub mass: f64,
    pub charge: f64,
    pub c: f64,
    pub step: f64,
    pub settings: IntegratorSettings,
    pub samples: Vec<Sample>,
}

impl Worldline {
    pub fn last(&self) -> &Sample {
        self.samples.last().expect("worldline has at least the initial sample")
    }

    pub fn state(&self, k: usize) -> ParticleState {
        let smp = &self.samples[k];
        ParticleState { x: smp.x, u: smp.u, mass: self.mass, charge: self.charge }
    }

    pub fn max_norm_residual(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, s| m.max(s.norm_residual.abs()))
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{WORLDLINE_CSV_HEADER}")?;
        for s in &self.samples {
            writeln!(
                w,
                "{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?}",
                s.s, s.t, s.x.0[0], s.x.0[1], s.x.0[2], s.x.0[3], s.u.0[0], s.u.0[1], s.u.0[2], s.u.0[3], s.norm_residual
            )?;
        }
        Ok(())
    }
}

fn pack(x: &FourVector, u: &FourVector) -> [f64; 8] {
    [x.0[0], x.0[1], x.0[2], x.0[3], u.0[0], u.0[1], u.0[2], u.0[3]]
}

fn unpack(y: &[f64; 8]) -> (FourVector, FourVector) {
    (FourVector([y[0], y[1], y[2], y[3]]), FourVector([y[4], y[5], y[6], y[7]]))
}

/// Shared second-order integrator: `d²X/ds² = accel(X, U)`, with `norm(X, U)` giving `g(U,U)`.
pub(crate) fn integrate_second_order<A, G>(
    x0: &FourVector,
    u0: &FourVector,
    mass: f64,
    charge: f64,
    c: f64,
    ds: f64,
    n: usize,
    settings: IntegratorSettings,
    accel: A,
    norm: G,
) -> Result<Worldline>
where
    A: Fn(&FourVector, &FourVector) -> Result<FourVector>,
    G: Fn(&FourVector, &FourVector) -> Result<f64>,
{
    if !(ds > 0.0) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {ds}")));
    }
    let c2 = c * c;
    let r0 = norm(x0, u0)? + c2;
    if !(r0.abs() <= TAU_NORM * c2) {
        return Err(Error::NotNormalized { residual: r0, bound: TAU_NORM * c2 });
    }
    let rhs = |_s: f64, y: &[f64; 8]| -> Result<[f64; 8]> {
        let (x, u) = unpack(y);
        let a = accel(&x, &u)?;
        Ok([u.0[0], u.0[1], u.0[2], u.0[3], a.0[0], a.0[1], a.0[2], a.0[3]])
    };
    let project = |y: &mut [f64; 8]| -> Result<()> {
        if settings.projection {
            let (x, u) = unpack(y);
            let q = -norm(&x, &u)?;
            if !(q > 0.0) {
                return Err(Error::NotTimelike { at: y[3] });
            }
            let k = (c2 / q).sqrt();
            for v in y[4..].iter_mut() {
                *v *= k;
            }
        }
        Ok(())
    };
    let mut samples = Vec::with_capacity(n + 1);
    samples.push(Sample { s: 0.0, t: x0.0[3] / c, x: *x0, u: *u0, norm_residual: r0 });
    let mut y = pack(x0, u0);
    let mut hint = 0.0;
    for k in 0..n {
        let s = k as f64 * ds;
        y = match settings.method {
            Method::Rk4 => {
                let mut y1 = rk4_step(&rhs, s, &y, ds)?;
                project(&mut y1)?;
                y1
            }
            Method::Rkf45 { atol, rtol } => rkf45_advance(&rhs, s, &y, ds, atol, rtol, &mut hint, project)?,
        };
        let (x, u) = unpack(&y);
        samples.push(Sample { s: (k + 1) as f64 * ds, t: x.0[3] / c, x, u, norm_residual: norm(&x, &u)? + c2 });
    }
    Ok(Worldline { mass, charge, c, step: ds, settings, samples })
}

/// Relativistic force ℱ^α as a function of event and four-velocity.
pub trait ForceOracle {
    fn force(&self, x: &FourVector, u: &FourVector) -> FourVector;
}

impl<F: Fn(&FourVector, &FourVector) -> FourVector> ForceOracle for F {
    fn force(&self, x: &FourVector, u: &FourVector) -> FourVector {
        self(x, u)
    }
}

/// Integrates `m d²X/ds² = ℱ(X, U)`. Every force evaluation is checked for
/// Minkowski orthogonality to U.
pub fn integrate_relativistic<F: ForceOracle>(
    state0: &ParticleState,
    force: &F,
    ds: f64,
    n: usize,
    c: f64,
    settings: IntegratorSettings,
) -> Result<Worldline> {
    let m = state0.mass;
    if !(m > 0.0) {
        return Err(Error::InvalidArgument(format!("mass must be positive, got {m}")));
    }
    integrate_second_order(
        &state0.x,
        &state0.u,
        m,
        state0.charge,
        c,
        ds,
        n,
        settings,
        |x, u| {
            let f = force.force(x, u);
            let dot = inner4(&f, u).abs();
            let bound = TAU_ORTHO * f.euclid_norm() * u.euclid_norm();
            if dot > bound {
                return Err(Error::OrthogonalityViolated { dot, bound });
            }
            Ok(f * (1.0 / m))
        },
        |_, u| Ok(inner4(u, u)),
    )
}

/// `U = (γv, γc)`.
pub fn four_velocity_from_coordinate_velocity(v: &ThreeVector, c: f64) -> Result<FourVector> {
    let speed = v.norm();
    if !(speed < c) {
        return Err(Error::SpeedNotSubluminal { speed, c });
    }
    let g = 1.0 / (1.0 - v.norm_sq() / (c * c)).sqrt();
    Ok(FourVector([g * v.0[0], g * v.0[1], g * v.0[2], g * c]))
}

/// `v = c Uⁱ / U⁴`.
pub fn coordinate_velocity_from_four_velocity(u: &FourVector, c: f64) -> ThreeVector {
    u.spatial() * (c / u.0[3])
}

/// ℱⁱ = γfⁱ and ℱ⁴ = δ_ij ℱⁱUʲ/U⁴.
pub fn newtonian_force_to_relativistic(f: &ThreeVector, v: &ThreeVector, c: f64) -> Result<FourVector> {
    let u = four_velocity_from_coordinate_velocity(v, c)?;
    let g = u.0[3] / c;
    let fs = *f * g;
    let f4 = fs.dot(&u.spatial()) / u.0[3];
    Ok(FourVector([fs.0[0], fs.0[1], fs.0[2], f4]))
}

/// Inverse of [`newtonian_force_to_relativistic`]: fⁱ = ℱⁱ/γ.
pub fn relativistic_force_to_newtonian(force: &FourVector, v: &ThreeVector, c: f64) -> Result<ThreeVector> {
    let speed = v.norm();
    if !(speed < c) {
        return Err(Error::SpeedNotSubluminal { speed, c });
    }
    Ok(force.spatial() * (1.0 - v.norm_sq() / (c * c)).sqrt())
}

/// Total energy `mc²/√(1 - v²/c²)`.
pub fn energy(m: f64, v: &ThreeVector, c: f64) -> Result<f64> {
    let speed = v.norm();
    if !(speed < c) {
        return Err(Error::SpeedNotSubluminal { speed, c });
    }
    Ok(m * c * c / (1.0 - v.norm_sq() / (c * c)).sqrt())
}

/// Parameterized spacetime path `u ↦ x^μ(u)`.
pub trait Path {
    fn position(&self, u: f64) -> FourVector;

    fn tangent(&self, u: f64, h: f64) -> FourVector {
        (self.position(u + h) - self.position(u - h)) * (0.5 / h)
    }
}

impl<F: Fn(f64) -> FourVector> Path for F {
    fn position(&self, u: f64) -> FourVector {
        self(u)
    }
}

/// Proper time `s(u)` tabulated at the even quadrature nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ProperTimeTable {
    pub u: Vec<f64>,
    pub s: Vec<f64>,
}

impl ProperTimeTable {
    pub fn total(&self) -> f64 {
        *self.s.last().unwrap_or(&0.0)
    }
}

/// Composite Simpson quadrature of `ds = (1/c)√(-d(ẋ,ẋ)) du` over `n` (even) panels.
pub fn proper_time_table<P: Path>(path: &P, u1: f64, u2: f64, n: usize, c: f64) -> Result<ProperTimeTable> {
    if n == 0 || n % 2 != 0 {
        return Err(Error::InvalidArgument(format!("Simpson needs an even positive n, got {n}")));
    }
    if !(u2 > u1) {
        return Err(Error::InvalidArgument("empty parameter range".into()));
    }
    let du = (u2 - u1) / n as f64;
    let hd = du * 1e-3;
    let mut f = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let u = u1 + k as f64 * du;
        let xd = path.tangent(u, hd);
        let q = -inner4(&xd, &xd);
        if !(q > 0.0) {
            return Err(Error::NotTimelike { at: u });
        }
        f.push(q.sqrt() / c);
    }
    let mut table = ProperTimeTable { u: vec![u1], s: vec![0.0] };
    let mut acc = 0.0;
    for k in (0..n).step_by(2) {
        acc += du / 3.0 * (f[k] + 4.0 * f[k + 1] + f[k + 2]);
        table.u.push(u1 + (k + 2) as f64 * du);
        table.s.push(acc);
    }
    Ok(table)
}
