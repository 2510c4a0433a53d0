//! Dust, charged dust, perfect fluid, plasma and viscous plasma in an effective metric.
//!
//! Residual evaluators work on analytic field oracles with central differences.
//! All of them share one balance computation so that switching a material
//! term off and setting its coefficient to zero give identical bits.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::electromagnetism::FaradayTensor;
use crate::error::{Error, Result};
use crate::field::shifted;
use crate::gravity::{weak_field_ratio, EffectiveMetric, Provenance};
use crate::minkowski::{Covector, FourVector, Tensor2, ThreeVector, IDENTITY4};
use crate::worldline::{integrate_second_order, IntegratorSettings, ParticleState, Worldline};

pub type ScalarOracle = Arc<dyn Fn(&FourVector) -> f64 + Send + Sync>;
pub type VectorOracle = Arc<dyn Fn(&FourVector) -> FourVector + Send + Sync>;
pub type VelocityOracle = Arc<dyn Fn(&FourVector) -> ThreeVector + Send + Sync>;
pub type FaradayOracle = Arc<dyn Fn(&FourVector) -> FaradayTensor + Send + Sync>;

fn constant(v: f64) -> ScalarOracle {
    Arc::new(move |_| v)
}

/// Field oracles of a continuum in an external metric.
#[derive(Clone)]
pub struct FluidFields {
    pub metric: EffectiveMetric,
    pub rho: ScalarOracle,
    pub p: ScalarOracle,
    pub u: VectorOracle,
    velocity: Option<VelocityOracle>,
    pub sigma0: ScalarOracle,
    pub faraday: FaradayOracle,
    pub eta: ScalarOracle,
    pub zeta: ScalarOracle,
}

impl FluidFields {
    /// Dust with density `rho` and four-velocity `u`; every other field is zero.
    pub fn dust(metric: EffectiveMetric, rho: ScalarOracle, u: VectorOracle) -> Self {
        FluidFields {
            metric,
            rho,
            p: constant(0.0),
            u,
            velocity: None,
            sigma0: constant(0.0),
            faraday: Arc::new(|_| FaradayTensor::ZERO),
            eta: constant(0.0),
            zeta: constant(0.0),
        }
    }

    /// Dust at rest in the metric.
    pub fn at_rest(metric: EffectiveMetric, rho: ScalarOracle) -> Self {
        let f = FluidFields::dust(metric, rho, Arc::new(|_| FourVector::ZERO));
        f.with_coordinate_velocity(Arc::new(|_| ThreeVector::ZERO))
    }

    /// Replaces `u` by the g-normalized four-velocity `λ(v, c)` of a coordinate-velocity field.
    pub fn with_coordinate_velocity(mut self, v: VelocityOracle) -> Self {
        let g = self.metric.clone();
        let c = g.c();
        let vv = v.clone();
        self.u = Arc::new(move |x| {
            let w = vv(x);
            let t = FourVector::new(w.0[0], w.0[1], w.0[2], c);
            match g.dot(x, &t, &t) {
                Ok(q) if q < 0.0 => t * (c / (-q).sqrt()),
                _ => FourVector([f64::NAN; 4]),
            }
        });
        self.velocity = Some(v);
        self
    }

    pub fn with_pressure(mut self, p: ScalarOracle) -> Self {
        self.p = p;
        self
    }

    pub fn with_charge(mut self, sigma0: ScalarOracle, faraday: FaradayOracle) -> Self {
        self.sigma0 = sigma0;
        self.faraday = faraday;
        self
    }

    pub fn with_viscosity(mut self, eta: ScalarOracle, zeta: ScalarOracle) -> Self {
        self.eta = eta;
        self.zeta = zeta;
        self
    }

    pub fn c(&self) -> f64 {
        self.metric.c()
    }

    /// `v = c u⃗/u⁴`, or the field it was built from.
    pub fn coordinate_velocity(&self, x: &FourVector) -> ThreeVector {
        match &self.velocity {
            Some(v) => v(x),
            None => {
                let u = (self.u)(x);
                u.spatial() * (self.c() / u.0[3])
            }
        }
    }

    /// `J^μ = σ₀ u^μ`.
    pub fn current(&self, x: &FourVector) -> FourVector {
        (self.u)(x) * (self.sigma0)(x)
    }

    fn static_potential(&self, x: &FourVector) -> Result<(f64, ThreeVector)> {
        match self.metric.provenance() {
            Provenance::Flat => Ok((0.0, ThreeVector::ZERO)),
            Provenance::StaticW => {
                let w = self.metric.potential().expect("static metric has a potential");
                let xs = x.spatial();
                Ok((w.value(&xs), w.gradient(&xs)))
            }
            Provenance::FromPhi => Err(Error::InvalidArgument("expansion needs a static W metric".into())),
        }
    }
}

/// `P^α_γ = δ^α_γ + ū_γ u^α / c²`, stored `[α][γ]`.
pub fn projector(u: &FourVector, ubar: &Covector, c: f64) -> Tensor2 {
    let mut p = IDENTITY4;
    for a in 0..4 {
        for g in 0..4 {
            p.0[a][g] += ubar.0[g] * u.0[a] / (c * c);
        }
    }
    p
}

/// `ū_μ = g_μν u^ν`.
pub fn lower_with(g: &Tensor2, u: &FourVector) -> Covector {
    let v = g.apply(u);
    Covector(v.0)
}

fn d4<F: Fn(&FourVector) -> FourVector + ?Sized>(f: &F, x: &FourVector, h: f64) -> [FourVector; 4] {
    let mut d = [FourVector::ZERO; 4];
    for (b, db) in d.iter_mut().enumerate() {
        *db = (f(&shifted(x, b, h)) - f(&shifted(x, b, -h))) * (0.5 / h);
    }
    d
}

/// `u^β ∇_β u^α` with the metric connection.
pub fn convective_derivative(fields: &FluidFields, x: &FourVector, h: f64) -> Result<FourVector> {
    let u = (fields.u)(x);
    let du = d4(&*fields.u, x, h);
    let mut a = fields.metric.christoffel(x)?.contract(&u, &u);
    for b in 0..4 {
        a = a + du[b] * u.0[b];
    }
    Ok(a)
}

/// Viscous part of the stress-energy tensor:
/// `-η[(g^ασ + u^αu^σ/c²)∂_σu^β + (g^βσ + u^βu^σ/c²)∂_σu^α] + (⅔η - ζ)(g^αβ + u^αu^β/c²)∂_σu^σ`.
pub fn viscous_stress_energy(fields: &FluidFields, x: &FourVector, h: f64) -> Result<Tensor2> {
    let c2 = fields.c() * fields.c();
    let ginv = fields.metric.inverse(x)?;
    let u = (fields.u)(x);
    let du = d4(&*fields.u, x, h); // du[σ][β] = ∂_σ u^β
    let eta = (fields.eta)(x);
    let zeta = (fields.zeta)(x);
    let mut q = Tensor2::ZERO;
    for a in 0..4 {
        for b in 0..4 {
            q.0[a][b] = ginv.0[a][b] + u.0[a] * u.0[b] / c2;
        }
    }
    let div: f64 = (0..4).map(|s| du[s].0[s]).sum();
    let mut t = Tensor2::ZERO;
    for a in 0..4 {
        for b in 0..4 {
            let mut shear = 0.0;
            for s in 0..4 {
                shear += q.0[a][s] * du[s].0[b] + q.0[b][s] * du[s].0[a];
            }
            t.0[a][b] = -eta * shear + (2.0 / 3.0 * eta - zeta) * q.0[a][b] * div;
        }
    }
    Ok(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Terms {
    pressure: bool,
    charge: bool,
    viscous: bool,
}

const DUST: Terms = Terms { pressure: false, charge: false, viscous: false };
const PERFECT: Terms = Terms { pressure: true, charge: false, viscous: false };
const PLASMA: Terms = Terms { pressure: true, charge: true, viscous: false };
const VISCOUS: Terms = Terms { pressure: true, charge: true, viscous: true };

struct Balance {
    continuity: f64,
    euler: FourVector,
}

fn inertia(fields: &FluidFields, x: &FourVector, pressure: bool) -> f64 {
    let rho = (fields.rho)(x);
    if pressure {
        rho + (fields.p)(x) / (fields.c() * fields.c())
    } else {
        rho
    }
}

/// `f^γ = ∂_β(p g^γβ) + J^β F_β^γ / c + ∂_β T_visc^γβ` (each term only when enabled).
fn force_density(fields: &FluidFields, x: &FourVector, h: f64, t: Terms) -> Result<FourVector> {
    let c = fields.c();
    let mut f = FourVector::ZERO;
    if t.pressure {
        for b in 0..4 {
            let xp = shifted(x, b, h);
            let xm = shifted(x, b, -h);
            let gp = fields.metric.inverse(&xp)?;
            let gm = fields.metric.inverse(&xm)?;
            let (pp, pm) = ((fields.p)(&xp), (fields.p)(&xm));
            for g in 0..4 {
                f.0[g] += (pp * gp.0[g][b] - pm * gm.0[g][b]) * (0.5 / h);
            }
        }
    }
    if t.charge {
        // J^β F_β^γ = -F^γ_β J^β
        let j = fields.current(x);
        f = f - (fields.faraday)(x).mixed().apply(&j) * (1.0 / c);
    }
    if t.viscous {
        let mut dv = FourVector::ZERO;
        for b in 0..4 {
            let tp = viscous_stress_energy(fields, &shifted(x, b, h), h)?;
            let tm = viscous_stress_energy(fields, &shifted(x, b, -h), h)?;
            for g in 0..4 {
                dv.0[g] += (tp.0[g][b] - tm.0[g][b]) * (0.5 / h);
            }
        }
        f = f + dv;
    }
    Ok(f)
}

fn balance(fields: &FluidFields, x: &FourVector, h: f64, t: Terms) -> Result<Balance> {
    let c = fields.c();
    let g = fields.metric.metric(x)?;
    let u = (fields.u)(x);
    let ubar = lower_with(&g, &u);
    let f = force_density(fields, x, h, t)?;
    let mut flux = 0.0;
    for b in 0..4 {
        let xp = shifted(x, b, h);
        let xm = shifted(x, b, -h);
        flux += (inertia(fields, &xp, t.pressure) * (fields.u)(&xp).0[b]
            - inertia(fields, &xm, t.pressure) * (fields.u)(&xm).0[b])
            * (0.5 / h);
    }
    let continuity = flux - ubar.contract(&f) / (c * c);
    let euler = convective_derivative(fields, x, h)? * inertia(fields, x, t.pressure) + projector(&u, &ubar, c).apply(&f);
    Ok(Balance { continuity, euler })
}

/// `∂_ν(ρu^ν)`.
pub fn continuity_residual_dust(fields: &FluidFields, x: &FourVector, h: f64) -> Result<f64> {
    Ok(balance(fields, x, h, DUST)?.continuity)
}

/// `∂_t(ρ/√(1-v²/c²)) + ∇·(ρv/√(1-v²/c²))` from ρ and the coordinate velocity, in the units of
/// [`continuity_residual_dust`].
pub fn continuity_residual_dust_3p1(fields: &FluidFields, x: &FourVector, h: f64) -> f64 {
    let c = fields.c();
    let gamma_rho = |y: &FourVector| {
        let v = fields.coordinate_velocity(y);
        (fields.rho)(y) / (1.0 - v.norm_sq() / (c * c)).sqrt()
    };
    let mut r = c * (gamma_rho(&shifted(x, 3, h)) - gamma_rho(&shifted(x, 3, -h))) * (0.5 / h);
    for i in 0..3 {
        let (xp, xm) = (shifted(x, i, h), shifted(x, i, -h));
        r += (gamma_rho(&xp) * fields.coordinate_velocity(&xp).0[i] - gamma_rho(&xm) * fields.coordinate_velocity(&xm).0[i]) * (0.5 / h);
    }
    r
}

/// Dust streamline residual `ρ u^β ∇_β u^α`.
pub fn euler_residual_dust(fields: &FluidFields, x: &FourVector, h: f64) -> Result<FourVector> {
    Ok(balance(fields, x, h, DUST)?.euler)
}

/// `(ρ + p/c²) u^β∇_βu^α + P^α_γ ∂_β(p g^γβ)`.
pub fn euler_residual_perfect_fluid(fields: &FluidFields, x: &FourVector, h: f64) -> Result<FourVector> {
    Ok(balance(fields, x, h, PERFECT)?.euler)
}

/// `∂_β[(ρ + p/c²)u^β] - ū_α ∂_β(p g^αβ)/c²`.
pub fn continuity_residual_perfect_fluid(fields: &FluidFields, x: &FourVector, h: f64) -> Result<f64> {
    Ok(balance(fields, x, h, PERFECT)?.continuity)
}

/// Perfect-fluid residual with the Lorentz force density of `J = σ₀u`.
pub fn plasma_euler_residual(fields: &FluidFields, x: &FourVector, h: f64) -> Result<FourVector> {
    Ok(balance(fields, x, h, PLASMA)?.euler)
}

pub fn plasma_continuity_residual(fields: &FluidFields, x: &FourVector, h: f64) -> Result<f64> {
    Ok(balance(fields, x, h, PLASMA)?.continuity)
}

/// Plasma residual with the divergence of the viscous stress added under the projector.
pub fn navier_stokes_residual(fields: &FluidFields, x: &FourVector, h: f64) -> Result<FourVector> {
    Ok(balance(fields, x, h, VISCOUS)?.euler)
}

pub fn viscous_continuity_residual(fields: &FluidFields, x: &FourVector, h: f64) -> Result<f64> {
    Ok(balance(fields, x, h, VISCOUS)?.continuity)
}

/// Divergence the interaction tensor must carry: `(ρ + p/c²) Γ^α_βγ u^β u^γ`.
pub fn theta_divergence_required(fields: &FluidFields, x: &FourVector) -> Result<FourVector> {
    let u = (fields.u)(x);
    Ok(fields.metric.christoffel(x)?.contract(&u, &u) * inertia(fields, x, true))
}

/// Charged-dust parcel: `mass` holds ρ and `charge` holds σ₀.
/// Integrates `ẍ^α + Γ^α_βγ ẋ^β ẋ^γ = (σ₀/ρc) P^α_γ F^γ_β ẋ^β`.
pub fn charged_dust_streamline<F>(
    parcel: &ParticleState,
    faraday: F,
    metric: &EffectiveMetric,
    ds: f64,
    n: usize,
    settings: IntegratorSettings,
) -> Result<Worldline>
where
    F: Fn(&FourVector) -> FaradayTensor,
{
    if parcel.mass == 0.0 {
        return Err(Error::ZeroDensity);
    }
    let c = metric.c();
    let k = parcel.charge / (parcel.mass * c);
    integrate_second_order(
        &parcel.x,
        &parcel.u,
        parcel.mass,
        parcel.charge,
        c,
        ds,
        n,
        settings,
        |x, u| {
            let a = -metric.christoffel(x)?.contract(u, u);
            let ubar = lower_with(&metric.metric(x)?, u);
            let lorentz = faraday(x).mixed().apply(u);
            Ok(a + projector(u, &ubar, c).apply(&lorentz) * k)
        },
        |x, u| metric.dot(x, u, u),
    )
}

/// Streamline acceleration of a perfect fluid:
/// `-Γ^α_βγ u^β u^γ - P^α_γ ∂_β(p g^γβ) / (ρ + p/c²)`.
pub fn perfect_fluid_acceleration(fields: &FluidFields, x: &FourVector, u: &FourVector, h: f64) -> Result<FourVector> {
    let m = inertia(fields, x, true);
    if !(m > 0.0) {
        return Err(Error::ZeroInertia { value: m });
    }
    let c = fields.c();
    let f = force_density(fields, x, h, PERFECT)?;
    let ubar = lower_with(&fields.metric.metric(x)?, u);
    Ok(-fields.metric.christoffel(x)?.contract(u, u) - projector(u, &ubar, c).apply(&f) * (1.0 / m))
}

/// Integrates a perfect-fluid parcel through the `ρ`, `p` fields; `h` is the pressure-gradient step.
pub fn perfect_fluid_streamline(
    parcel: &ParticleState,
    fields: &FluidFields,
    ds: f64,
    n: usize,
    h: f64,
    settings: IntegratorSettings,
) -> Result<Worldline> {
    perfect_fluid_acceleration(fields, &parcel.x, &parcel.u, h)?;
    integrate_second_order(
        &parcel.x,
        &parcel.u,
        parcel.mass,
        parcel.charge,
        fields.c(),
        ds,
        n,
        settings,
        |x, u| perfect_fluid_acceleration(fields, x, u, h),
        |x, u| fields.metric.dot(x, u, u),
    )
}

/// Time derivative with `x⁴ = ct` stepped by `c·h`, so the step in t is `h`.
fn dt<F: Fn(&FourVector) -> f64>(f: F, x: &FourVector, h: f64, c: f64) -> f64 {
    (f(&shifted(x, 3, c * h)) - f(&shifted(x, 3, -c * h))) * (0.5 / h)
}

/// Static-field perfect-fluid continuity in t and x⃗: the exact form and its `c⁻²` truncation.
/// With `D = √(1 + 2W/c² - (1 - 2W/c²)v²/c²)`:
///
/// - exact: `∂_b[(ρ+p/c²)v^b/D] + ∂_t[(ρ+p/c²)/D] - (1-2W/c²)(v^b/D)∂_b[p/(1-2W/c²)]/c²`
/// - expanded: `∇·(ρv) + ∂_tρ - {-p∇·v + ∇·[ρ(W - v²/2)v] - ∂_tp + ∂_t[ρ(W - v²/2)]}/c²`
pub fn static_continuity_expansion_residual(fields: &FluidFields, x: &FourVector, h: f64) -> Result<(f64, f64)> {
    let c = fields.c();
    let c2 = c * c;
    fields.static_potential(x)?;
    let w = |y: &FourVector| fields.static_potential(y).map(|p| p.0).unwrap_or(f64::NAN);
    let d = |y: &FourVector| {
        let k = 2.0 * w(y) / c2;
        (1.0 + k - (1.0 - k) * fields.coordinate_velocity(y).norm_sq() / c2).sqrt()
    };
    let m = |y: &FourVector| (fields.rho)(y) + (fields.p)(y) / c2;
    let q = |y: &FourVector| (fields.p)(y) / (1.0 - 2.0 * w(y) / c2);
    let v = fields.coordinate_velocity(x);
    let mut exact = dt(|y| m(y) / d(y), x, h, c);
    let mut lead = dt(|y| (fields.rho)(y), x, h, c);
    let mut corr = -dt(|y| (fields.p)(y), x, h, c)
        + dt(|y| (fields.rho)(y) * (w(y) - 0.5 * fields.coordinate_velocity(y).norm_sq()), x, h, c);
    let mut vdq = 0.0;
    let mut divv = 0.0;
    for b in 0..3 {
        let (xp, xm) = (shifted(x, b, h), shifted(x, b, -h));
        let s = 0.5 / h;
        let (vp, vm) = (fields.coordinate_velocity(&xp).0[b], fields.coordinate_velocity(&xm).0[b]);
        exact += (m(&xp) * vp / d(&xp) - m(&xm) * vm / d(&xm)) * s;
        vdq += v.0[b] * (q(&xp) - q(&xm)) * s;
        lead += ((fields.rho)(&xp) * vp - (fields.rho)(&xm) * vm) * s;
        divv += (vp - vm) * s;
        let flux = |y: &FourVector, vy: f64| (fields.rho)(y) * (w(y) - 0.5 * fields.coordinate_velocity(y).norm_sq()) * vy;
        corr += (flux(&xp, vp) - flux(&xm, vm)) * s;
    }
    corr -= (fields.p)(x) * divv;
    exact -= (1.0 - 2.0 * w(x) / c2) * vdq / (d(x) * c2);
    Ok((exact, lead - corr / c2))
}

/// Coordinate acceleration `dV/dt` of a perfect-fluid parcel moving with the field velocity at `x`.
pub fn streamline_coordinate_acceleration(fields: &FluidFields, x: &FourVector, h: f64) -> Result<ThreeVector> {
    let c = fields.c();
    let u = (fields.u)(x);
    let a = perfect_fluid_acceleration(fields, x, &u, h)?;
    let s = c * c / (u.0[3] * u.0[3]);
    Ok(ThreeVector::new(
        s * (a.0[0] - u.0[0] * a.0[3] / u.0[3]),
        s * (a.0[1] - u.0[1] * a.0[3] / u.0[3]),
        s * (a.0[2] - u.0[2] * a.0[3] / u.0[3]),
    ))
}

fn grad_p(fields: &FluidFields, x: &FourVector, h: f64) -> ThreeVector {
    let mut g = ThreeVector::ZERO;
    for i in 0..3 {
        g.0[i] = ((fields.p)(&shifted(x, i, h)) - (fields.p)(&shifted(x, i, -h))) * (0.5 / h);
    }
    g
}

/// Newtonian Euler balance `ρ(dV/dt + ∇W) + ∇p` with `dV/dt` from the relativistic streamline law.
pub fn euler_expansion_bundle(fields: &FluidFields, x: &FourVector, h: f64) -> Result<ThreeVector> {
    let (_, dw) = fields.static_potential(x)?;
    let a = streamline_coordinate_acceleration(fields, x, h)?;
    Ok((a + dw) * (fields.rho)(x) + grad_p(fields, x, h))
}

/// Leading relativistic correction to the Euler balance:
/// `-{ρ[(V·a - 3V·∇W)V + (2W + V²)∇W] + p(a + 3∇W) + (4W - V²)∇p + (V·∇p + ∂_tp)V}/c²`.
pub fn euler_expansion_correction(fields: &FluidFields, x: &FourVector, h: f64) -> Result<ThreeVector> {
    let c = fields.c();
    let (w, dw) = fields.static_potential(x)?;
    weak_field_ratio(w, c)?;
    let a = streamline_coordinate_acceleration(fields, x, h)?;
    let v = fields.coordinate_velocity(x);
    let rho = (fields.rho)(x);
    let p = (fields.p)(x);
    let gp = grad_p(fields, x, h);
    let pt = dt(|y| (fields.p)(y), x, h, c);
    let v2 = v.norm_sq();
    let bracket = (v * (v.dot(&a) - 3.0 * v.dot(&dw)) + dw * (2.0 * w + v2)) * rho
        + (a + dw * 3.0) * p
        + gp * (4.0 * w - v2)
        + v * (v.dot(&gp) + pt);
    Ok(bracket * (-1.0 / (c * c)))
}

pub const RESIDUAL_CSV_HEADER: &str = "eq_tag,x1,x2,x3,x4,h,r1,r2,r3,r4";

/// Residual of a tagged equation at one event; scalar residuals fill `r1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    pub tag: &'static str,
    pub x: FourVector,
    pub h: f64,
    pub r: FourVector,
}

impl Residual {
    pub fn scalar(tag: &'static str, x: FourVector, h: f64, r: f64) -> Self {
        Residual { tag, x, h, r: FourVector::new(r, 0.0, 0.0, 0.0) }
    }

    pub fn csv_row(&self) -> String {
        let mut s = String::from(self.tag);
        for v in self.x.0.iter().chain(std::iter::once(&self.h)).chain(self.r.0.iter()) {
            let _ = write!(s, ",{v:?}");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gravity::{NewtonianPotential, Potential};
    use crate::ode::rk4_step;

    fn flat(c: f64) -> EffectiveMetric {
        EffectiveMetric::flat(c)
    }

    fn static_w(pot: Potential, c: f64) -> EffectiveMetric {
        EffectiveMetric::static_w(Arc::new(pot), c)
    }

    fn uniform(g: f64) -> Potential {
        // W = g x¹
        Potential::Uniform { g: ThreeVector::new(-g, 0.0, 0.0) }
    }

    #[test]
    fn projector_properties() {
        let c = 2.0;
        let g = static_metric_value_for_test(0.1, c);
        for v in [ThreeVector::ZERO, ThreeVector::new(0.5, -0.3, 0.2), ThreeVector::new(1.5, 0.1, 0.0)] {
            let t = FourVector::new(v.0[0], v.0[1], v.0[2], c);
            let u = t * (c / (-g.bilinear(&t, &t)).sqrt());
            let ubar = lower_with(&g, &u);
            let p = projector(&u, &ubar, c);
            assert!(p.apply(&u).max_abs() < 1e-12);
            assert!((p.matmul(&p) - p).max_abs() < 1e-12);
        }
    }

    fn static_metric_value_for_test(w: f64, c: f64) -> Tensor2 {
        crate::gravity::static_metric_value(w, c).unwrap()
    }

    #[test]
    fn dust_continuity() {
        let c = 1.0;
        let f = FluidFields::at_rest(flat(c), constant(2.0));
        let x = FourVector::new(0.1, 0.2, 0.3, 0.4);
        assert_eq!(continuity_residual_dust(&f, &x, 1e-3).unwrap(), 0.0);
        // rigid advection ρ(x¹ - vt)
        let v = 0.6;
        let run = |h: f64| {
            let f = FluidFields::dust(flat(c), Arc::new(move |y: &FourVector| (y.0[0] - v * y.0[3] / c).sin() + 2.0), Arc::new(|_| FourVector::ZERO))
                .with_coordinate_velocity(Arc::new(move |_| ThreeVector::new(v, 0.0, 0.0)));
            continuity_residual_dust(&f, &x, h).unwrap().abs()
        };
        let (e1, e2) = (run(1e-2), run(5e-3));
        assert!(e1 < 1e-4 && ((e1 / e2).log2() - 2.0).abs() < 0.1, "{e1} {e2}");
        let f = FluidFields::dust(flat(c), Arc::new(move |y: &FourVector| (y.0[0] - v * y.0[3] / c).sin() + 2.0), Arc::new(|_| FourVector::ZERO))
            .with_coordinate_velocity(Arc::new(move |_| ThreeVector::new(v, 0.0, 0.0)));
        assert!(continuity_residual_dust_3p1(&f, &x, 1e-3).abs() < 1e-6);
        // ρ = t grows: residual γ·1 > 0 for v = 0.6
        let f = FluidFields::dust(flat(c), Arc::new(move |y: &FourVector| y.0[3] / c), Arc::new(|_| FourVector::ZERO))
            .with_coordinate_velocity(Arc::new(move |_| ThreeVector::new(v, 0.0, 0.0)));
        assert!((continuity_residual_dust(&f, &x, 1e-3).unwrap() - 1.25).abs() < 1e-10);
        assert!((continuity_residual_dust_3p1(&f, &x, 1e-3) - 1.25).abs() < 1e-10);
    }

    fn charged_plasma(c: f64, metric: EffectiveMetric, sigma: f64, eta: f64) -> FluidFields {
        FluidFields::dust(metric, Arc::new(|y: &FourVector| 1.0 + 0.1 * (y.0[0] + y.0[1]).cos()), Arc::new(|_| FourVector::ZERO))
            .with_coordinate_velocity(Arc::new(move |y: &FourVector| {
                ThreeVector::new(0.2 * (y.0[1] + y.0[3] / c).sin(), 0.1 * y.0[0], 0.05 * y.0[2] * y.0[2])
            }))
            .with_pressure(Arc::new(|y: &FourVector| 0.3 + 0.1 * (y.0[0] * y.0[2]).sin() + 0.02 * y.0[3]))
            .with_charge(
                Arc::new(move |_| sigma),
                Arc::new(|y: &FourVector| {
                    FaradayTensor::assemble(ThreeVector::new(0.1, y.0[1] * 0.05, 0.0), ThreeVector::new(0.0, 0.0, 0.7 + 0.1 * y.0[0]))
                }),
            )
            .with_viscosity(Arc::new(move |_| eta), Arc::new(move |_| 0.5 * eta))
    }

    #[test]
    fn degeneration_chain_is_bitwise() {
        let c = 3.0;
        let m = static_w(Potential::PointMass { gm: 0.5 }, c);
        let x = FourVector::new(1.1, -0.4, 0.3, 0.2);
        let h = 1e-3;
        let v = charged_plasma(c, m.clone(), 0.4, 0.0);
        assert_eq!(navier_stokes_residual(&v, &x, h).unwrap(), plasma_euler_residual(&v, &x, h).unwrap());
        assert_eq!(viscous_continuity_residual(&v, &x, h).unwrap(), plasma_continuity_residual(&v, &x, h).unwrap());
        let n = charged_plasma(c, m.clone(), 0.0, 0.3);
        assert_eq!(plasma_euler_residual(&n, &x, h).unwrap(), euler_residual_perfect_fluid(&n, &x, h).unwrap());
        assert_eq!(plasma_continuity_residual(&n, &x, h).unwrap(), continuity_residual_perfect_fluid(&n, &x, h).unwrap());
        let d = charged_plasma(c, m, 0.4, 0.3).with_pressure(constant(0.0));
        assert_eq!(euler_residual_perfect_fluid(&d, &x, h).unwrap(), euler_residual_dust(&d, &x, h).unwrap());
        assert_eq!(continuity_residual_perfect_fluid(&d, &x, h).unwrap(), continuity_residual_dust(&d, &x, h).unwrap());
        // and the switched-on terms do matter
        let full = charged_plasma(c, static_w(Potential::PointMass { gm: 0.5 }, c), 0.4, 0.3);
        assert_ne!(navier_stokes_residual(&full, &x, h).unwrap(), plasma_euler_residual(&full, &x, h).unwrap());
        assert_ne!(plasma_euler_residual(&full, &x, h).unwrap(), euler_residual_perfect_fluid(&full, &x, h).unwrap());
    }

    #[test]
    fn hydrostatics() {
        let c = 5.0;
        let x = FourVector::new(0.3, 0.1, -0.2, 0.0);
        let f = FluidFields::at_rest(flat(c), constant(1.0)).with_pressure(constant(2.0));
        assert_eq!(euler_residual_perfect_fluid(&f, &x, 1e-3).unwrap(), FourVector::ZERO);
        assert_eq!(continuity_residual_perfect_fluid(&f, &x, 1e-3).unwrap(), 0.0);
        // pure pressure gradient, flat, at rest: residual = ∇p
        let f = FluidFields::at_rest(flat(c), constant(1.0)).with_pressure(Arc::new(|y: &FourVector| y.0[0] * y.0[0] + 3.0 * y.0[2]));
        let r = euler_residual_perfect_fluid(&f, &x, 1e-3).unwrap();
        assert!((r.0[0] - 0.6).abs() < 1e-10 && (r.0[2] - 3.0).abs() < 1e-10 && r.0[1].abs() < 1e-12);
        // weak field: residual = ∂_i p (1 + O(φ))
        let f = FluidFields::at_rest(static_w(uniform(0.1), c), constant(0.0)).with_pressure(Arc::new(|y: &FourVector| y.0[2]));
        let r = euler_residual_perfect_fluid(&f, &x, 1e-3).unwrap();
        let k = 2.0 * 0.1 * x.0[0] / (c * c);
        assert!((r.0[2] - 1.0).abs() < 2.0 * k.abs() + 1e-10);
    }

    fn isothermal_fields(c: f64, a2: f64, g: f64, q0: f64) -> FluidFields {
        let pressure = move |y: &FourVector| {
            let k = 2.0 * g * y.0[0] / (c * c);
            q0 * (1.0 + k).powf(-(c * c / a2 + 1.0) / 2.0) * (1.0 - k)
        };
        FluidFields::at_rest(static_w(uniform(g), c), Arc::new(move |y: &FourVector| pressure(y) / a2))
            .with_pressure(Arc::new(pressure))
    }

    #[test]
    fn isothermal_equilibrium() {
        let (c, a2, g, q0) = (4.0, 1.0, 0.5, 1.0);
        let x = FourVector::new(0.7, 0.0, 0.0, 0.0);
        let run = |h: f64| euler_residual_perfect_fluid(&isothermal_fields(c, a2, g, q0), &x, h).unwrap().max_abs();
        let (e1, e2) = (run(1e-2), run(5e-3));
        assert!(e1 < 1e-4 && ((e1 / e2).log2() - 2.0).abs() < 0.1, "{e1} {e2}");
        // independent oracle: integrate dq/dx = -(ρ + p/c²) W' / ((1-k)(1+k)), p = a²ρ
        let f = |xx: f64, y: &[f64; 1]| -> crate::Result<[f64; 1]> {
            let k = 2.0 * g * xx / (c * c);
            let p = y[0] * (1.0 - k);
            Ok([-(p / a2 + p / (c * c)) * g / ((1.0 - k) * (1.0 + k))])
        };
        let mut y = [q0];
        let n = 700;
        let dx = x.0[0] / n as f64;
        for i in 0..n {
            y = rk4_step(&f, i as f64 * dx, &y, dx).unwrap();
        }
        let k = 2.0 * g * x.0[0] / (c * c);
        let closed = q0 * (1.0 + k).powf(-(c * c / a2 + 1.0) / 2.0);
        assert!((y[0] / closed - 1.0).abs() < 1e-12);
    }

    #[test]
    fn isothermal_parcel_stays_at_rest() {
        let (c, a2, g, q0) = (4.0, 1.0, 0.5, 1.0);
        let fields = isothermal_fields(c, a2, g, q0);
        let x = FourVector::new(0.4, 0.0, 0.0, 0.0);
        let u = (fields.u)(&x);
        let parcel = ParticleState { x, u, mass: (fields.rho)(&x), charge: 0.0 };
        let wl = perfect_fluid_streamline(&parcel, &fields, 0.01, 200, 1e-4, Default::default()).unwrap();
        let end = wl.last();
        let drift = (end.x.spatial() - x.spatial()).max_abs();
        assert!(drift < 1e-8, "{drift}");
        let no_p = FluidFields::at_rest(static_w(uniform(g), c), constant(1.0));
        let geo = perfect_fluid_streamline(&parcel, &no_p, 0.01, 200, 1e-3, Default::default()).unwrap();
        let g_only = crate::orbits::integrate_geodesic(&no_p.metric, &parcel, 0.01, 200, Default::default()).unwrap();
        assert!((geo.last().x - g_only.last().x).max_abs() < 1e-14);
        let empty = FluidFields::at_rest(flat(c), constant(0.0));
        assert!(matches!(
            perfect_fluid_streamline(&parcel, &empty, 0.01, 1, 1e-3, Default::default()),
            Err(Error::ZeroInertia { .. })
        ));
    }

    #[test]
    fn theta_divergence() {
        let c = 10.0;
        let x = FourVector::new(2.0, 0.0, 0.0, 0.0);
        let f = FluidFields::at_rest(flat(c), constant(3.0)).with_pressure(constant(1.0));
        assert_eq!(theta_divergence_required(&f, &x).unwrap(), FourVector::ZERO);
        let pot = Potential::PointMass { gm: 1.0 };
        let d = FluidFields::at_rest(static_w(pot, c), constant(3.0));
        let t = theta_divergence_required(&d, &x).unwrap();
        let gw = pot.gradient(&x.spatial());
        assert!((t.0[0] / (3.0 * gw.0[0]) - 1.0).abs() < 3.0 * 2.0 / (c * c * 2.0));
        let u = (d.u)(&x);
        let dust = d.metric.christoffel(&x).unwrap().contract(&u, &u) * 3.0;
        assert_eq!(t, dust);
    }

    #[test]
    fn charged_dust_limits() {
        let c = 1.0;
        let b = |_: &FourVector| FaradayTensor::assemble(ThreeVector::ZERO, ThreeVector::new(0.0, 0.0, 1.0));
        let parcel = ParticleState::from_velocity(&ThreeVector::ZERO, 0.0, &ThreeVector::new(0.3, 0.0, 0.0), 2.0, 0.5, c).unwrap();
        let wl = charged_dust_streamline(&parcel, b, &flat(c), 0.01, 1000, Default::default()).unwrap();
        let lz = crate::electromagnetism::integrate_lorentz(&parcel, b, 0.01, 1000, c, Default::default()).unwrap();
        assert!((wl.last().x - lz.last().x).max_abs() < 1e-10);
        let m = static_w(Potential::PointMass { gm: 0.01 }, c);
        let p0 = ParticleState { x: FourVector::new(1.0, 0.0, 0.0, 0.0), charge: 0.0, ..parcel };
        let p0 = ParticleState { u: FourVector::new(0.0, 0.1, 0.0, 1.0) * (1.0 / (-m.dot(&p0.x, &FourVector::new(0.0, 0.1, 0.0, 1.0), &FourVector::new(0.0, 0.1, 0.0, 1.0)).unwrap()).sqrt()), ..p0 };
        let a = charged_dust_streamline(&p0, b, &m, 0.01, 300, Default::default()).unwrap();
        let g = crate::orbits::integrate_geodesic(&m, &p0, 0.01, 300, Default::default()).unwrap();
        assert_eq!(a.last().x, g.last().x);
        let dry = ParticleState { mass: 0.0, ..parcel };
        assert!(matches!(charged_dust_streamline(&dry, b, &flat(c), 0.01, 1, Default::default()), Err(Error::ZeroDensity)));
    }

    #[test]
    fn charged_dust_newtonian_limit() {
        // uniform E along x², weak uniform field along x¹
        let (c, g, e2, q) = (1e3, 2.0, 3.0, 0.5);
        let m = static_w(uniform(g), c);
        let fe = move |_: &FourVector| FaradayTensor::assemble(ThreeVector::new(0.0, e2, 0.0), ThreeVector::ZERO);
        let x = FourVector::new(0.0, 0.0, 0.0, 0.0);
        let t = FourVector::new(0.0, 0.0, 0.0, c);
        let u = t * (c / (-m.dot(&x, &t, &t).unwrap()).sqrt());
        let parcel = ParticleState { x, u, mass: 1.0, charge: q };
        let ds = 1e-3;
        let wl = charged_dust_streamline(&parcel, fe, &m, ds, 2, Default::default()).unwrap();
        let s = &wl.samples;
        let tt = |k: usize| s[k].x.0[3] / c;
        let acc = |i: usize| {
            let (t0, t1, t2) = (tt(0), tt(1), tt(2));
            let (x0, x1, x2) = (s[0].x.0[i], s[1].x.0[i], s[2].x.0[i]);
            2.0 * ((x2 - x1) / (t2 - t1) - (x1 - x0) / (t1 - t0)) / (t2 - t0)
        };
        assert!((acc(0) + g).abs() < 1e-4 * g);
        assert!((acc(1) - q * e2).abs() < 1e-4 * q * e2);
    }

    #[test]
    fn plasma_residual_flows() {
        // gyration: uniform-in-space velocity rotating in time, p = 0, W = 0
        let (c, b, rho, sigma, v): (f64, f64, f64, f64, f64) = (1.0, 2.0, 1.5, 0.9, 0.4);
        let gamma = 1.0 / (1.0 - v * v).sqrt();
        let omega = sigma * b / (gamma * rho * c);
        let run = |h: f64| {
            let f = FluidFields::dust(flat(c), constant(rho), Arc::new(|_| FourVector::ZERO))
                .with_coordinate_velocity(Arc::new(move |y: &FourVector| {
                    let t = y.0[3] / c;
                    ThreeVector::new(v * (omega * t).cos(), -v * (omega * t).sin(), 0.0)
                }))
                .with_charge(constant(sigma), Arc::new(move |_| FaradayTensor::assemble(ThreeVector::ZERO, ThreeVector::new(0.0, 0.0, b))));
            let x = FourVector::new(0.2, 0.1, 0.0, 0.7);
            (plasma_euler_residual(&f, &x, h).unwrap().max_abs(), plasma_continuity_residual(&f, &x, h).unwrap().abs())
        };
        let ((e1, c1), (e2, _)) = (run(1e-2), run(5e-3));
        assert!(((e1 / e2).log2() - 2.0).abs() < 0.1, "{e1} {e2}");
        assert!(c1 < 1e-12);
        // E×B drift: v = c E×B/B²
        let (e, bb) = (ThreeVector::new(0.0, 0.2, 0.0), ThreeVector::new(0.0, 0.0, 1.0));
        let vd = e.cross(&bb) * (c / bb.norm_sq());
        let f = FluidFields::dust(flat(c), constant(1.0), Arc::new(|_| FourVector::ZERO))
            .with_coordinate_velocity(Arc::new(move |_| vd))
            .with_pressure(constant(0.5))
            .with_charge(constant(0.8), Arc::new(move |_| FaradayTensor::assemble(e, bb)));
        assert!(plasma_euler_residual(&f, &FourVector::new(0.3, 0.2, 0.1, 0.0), 1e-3).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn classical_navier_stokes_limit() {
        // steady v = (k y², 0, 0), p = -λx: residual → ∂p/∂x - η ∂²v/∂y² = -λ - 2ηk
        let (kk, lambda, eta, rho) = (0.3, 0.7, 0.2, 1.0);
        let res = |c: f64| {
            let f = FluidFields::dust(flat(c), constant(rho), Arc::new(|_| FourVector::ZERO))
                .with_coordinate_velocity(Arc::new(move |y: &FourVector| ThreeVector::new(kk * y.0[1] * y.0[1], 0.0, 0.0)))
                .with_pressure(Arc::new(move |y: &FourVector| 10.0 - lambda * y.0[0]))
                .with_viscosity(constant(eta), constant(0.1));
            navier_stokes_residual(&f, &FourVector::new(0.1, 0.5, 0.0, 0.0), 1e-3).unwrap()
        };
        let classical = -lambda - 2.0 * eta * kk;
        let (r1, r2) = (res(100.0), res(200.0));
        let (d1, d2) = (r1.0[0] - classical, r2.0[0] - classical);
        assert!(d1.abs() < 1e-3, "{r1:?}");
        assert!(((d1 / d2).log2() - 2.0).abs() < 0.2, "{d1} {d2}");
        assert!(r1.0[1].abs() < 1e-6 && r1.0[2].abs() < 1e-12);
    }

    #[test]
    fn navier_stokes_rigid_rotation_converges() {
        let (omega, c) = (0.3, 2.0);
        let run = |h: f64| {
            let f = FluidFields::dust(static_w(Potential::PointMass { gm: 0.05 }, c), constant(1.0), Arc::new(|_| FourVector::ZERO))
                .with_coordinate_velocity(Arc::new(move |y: &FourVector| ThreeVector::new(-omega * y.0[1], omega * y.0[0], 0.0)))
                .with_pressure(Arc::new(move |y: &FourVector| 1.0 + 0.5 * omega * omega * (y.0[0] * y.0[0] + y.0[1] * y.0[1])))
                .with_viscosity(constant(0.4), constant(0.2));
            navier_stokes_residual(&f, &FourVector::new(1.0, 0.5, 0.2, 0.0), h).unwrap()
        };
        let (a, b, d) = (run(4e-3), run(2e-3), run(1e-3));
        let ratio = (a - b).max_abs() / (b - d).max_abs();
        assert!((ratio.log2() - 2.0).abs() < 0.15, "{ratio}");
        // classical rigid rotation carries no shear stress
        let f = FluidFields::dust(flat(1e4), constant(1.0), Arc::new(|_| FourVector::ZERO))
            .with_coordinate_velocity(Arc::new(move |y: &FourVector| ThreeVector::new(-omega * y.0[1], omega * y.0[0], 0.0)))
            .with_viscosity(constant(0.4), constant(0.2));
        let t = viscous_stress_energy(&f, &FourVector::new(1.0, 0.5, 0.0, 0.0), 1e-3).unwrap();
        assert!(t.max_abs() < 1e-8, "{t:?}");
    }

    fn expansion_fields(c: f64) -> FluidFields {
        FluidFields::dust(
            static_w(Potential::PointMass { gm: 1.0 }, c),
            Arc::new(move |y: &FourVector| 1.0 + 0.2 * (y.0[0] - 0.5 * y.0[3] / c).sin()),
            Arc::new(|_| FourVector::ZERO),
        )
        .with_coordinate_velocity(Arc::new(move |y: &FourVector| {
            let t = y.0[3] / c;
            ThreeVector::new(0.3 * (y.0[1] + t).cos(), 0.2 * y.0[0], -0.1 * y.0[2] * t)
        }))
        .with_pressure(Arc::new(move |y: &FourVector| 0.5 + 0.1 * (y.0[0] * y.0[1]).cos() + 0.05 * y.0[3] / c))
    }

    #[test]
    fn continuity_expansion_gap_scales_as_c_minus_four() {
        let x = FourVector::new(2.0, 1.0, 0.5, 0.0);
        let gap = |c: f64| {
            let (a, b) = static_continuity_expansion_residual(&expansion_fields(c), &x, 1e-4).unwrap();
            (a - b).abs()
        };
        let (g1, g2, g3) = (gap(20.0), gap(40.0), gap(80.0));
        assert!((g1 / g2 / 16.0 - 1.0).abs() < 0.2, "{}", g1 / g2);
        assert!((g2 / g3 / 16.0 - 1.0).abs() < 0.2, "{}", g2 / g3);
        let rest = FluidFields::at_rest(static_w(Potential::PointMass { gm: 1.0 }, 10.0), constant(1.0)).with_pressure(constant(0.3));
        assert_eq!(static_continuity_expansion_residual(&rest, &x, 1e-4).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn euler_expansion_scaling() {
        let x = FourVector::new(2.0, 1.0, 0.5, 0.0);
        let h = 1e-4;
        let bundle = |c: f64| euler_expansion_bundle(&expansion_fields(c), &x, h).unwrap();
        let rem = |c: f64| {
            let f = expansion_fields(c);
            euler_expansion_bundle(&f, &x, h).unwrap() - euler_expansion_correction(&f, &x, h).unwrap()
        };
        let (b1, b2, b3) = (bundle(20.0).norm(), bundle(40.0).norm(), bundle(80.0).norm());
        assert!((b1 / b2 / 4.0 - 1.0).abs() < 0.15 && (b2 / b3 / 4.0 - 1.0).abs() < 0.15, "{b1} {b2} {b3}");
        let (r1, r2) = (rem(20.0).norm(), rem(40.0).norm());
        assert!(r1 < 0.05 * b1 && (r1 / r2 / 16.0 - 1.0).abs() < 0.2, "{r1} {r2}");
    }

    #[test]
    fn residual_csv_row() {
        let r = Residual::scalar("dust_continuity", FourVector::new(1.0, 2.0, 3.0, 4.0), 0.5, -0.25);
        assert_eq!(r.csv_row(), "dust_continuity,1.0,2.0,3.0,4.0,0.5,-0.25,0.0,0.0,0.0");
        assert_eq!(RESIDUAL_CSV_HEADER.split(',').count(), r.csv_row().split(',').count());
    }
}
