//! Linearized gravity: potentials φ_μν, the trace-reversed effective metric,
//! the static metric of a Newtonian potential W, and Christoffel symbols.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{partial3, second_partial3, shifted};
use crate::minkowski::{FourVector, GeneralTensor, Tensor2, ThreeVector, IDENTITY4, MINKOWSKI};

/// Largest admissible |φ_μν|.
pub const PHI_MAX: f64 = 0.5;
/// Smallest admissible |det g|.
pub const DET_MIN: f64 = 1e-12;

/// Connection coefficients `Γ^α_βγ`, stored as `[α][β][γ]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Christoffel(pub [[[f64; 4]; 4]; 4]);

impl Christoffel {
    pub const ZERO: Christoffel = Christoffel([[[0.0; 4]; 4]; 4]);

    /// `Γ^α_βγ u^β w^γ`.
    pub fn contract(&self, u: &FourVector, w: &FourVector) -> FourVector {
        let mut r = [0.0; 4];
        for (a, ra) in r.iter_mut().enumerate() {
            let mut s = 0.0;
            for b in 0..4 {
                if u.0[b] == 0.0 {
                    continue;
                }
                for g in 0..4 {
                    s += self.0[a][b][g] * u.0[b] * w.0[g];
                }
            }
            *ra = s;
        }
        FourVector(r)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, o: &Christoffel) -> f64 {
        let mut m: f64 = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                for g in 0..4 {
                    m = m.max((self.0[a][b][g] - o.0[a][b][g]).abs());
                }
            }
        }
        m
    }

    pub fn is_symmetric(&self) -> bool {
        (0..4).all(|a| (0..4).all(|b| (0..4).all(|g| self.0[a][b][g] == self.0[a][g][b])))
    }
}

/// Static Newtonian potential `W(x⃗)` in m²/s².
pub trait NewtonianPotential: Send + Sync {
    fn value(&self, x: &ThreeVector) -> f64;
    fn gradient(&self, x: &ThreeVector) -> ThreeVector;
}

/// Built-in potentials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Potential {
    /// `W = -GM/r`.
    PointMass { gm: f64 },
    /// Uniform field of acceleration `g`: `W = -g·x`.
    Uniform { g: ThreeVector },
    Zero,
}

impl NewtonianPotential for Potential {
    fn value(&self, x: &ThreeVector) -> f64 {
        match self {
            Potential::PointMass { gm } => -gm / x.norm(),
            Potential::Uniform { g } => -g.dot(x),
            Potential::Zero => 0.0,
        }
    }

    fn gradient(&self, x: &ThreeVector) -> ThreeVector {
        match self {
            Potential::PointMass { gm } => *x * (gm / x.norm().powi(3)),
            Potential::Uniform { g } => -*g,
            Potential::Zero => ThreeVector::ZERO,
        }
    }
}

/// User potential from a closure, with a central-difference gradient of step `h`.
pub struct FnPotential<F> {
    pub f: F,
    pub h: f64,
}

impl<F: Fn(&ThreeVector) -> f64 + Send + Sync> NewtonianPotential for FnPotential<F> {
    fn value(&self, x: &ThreeVector) -> f64 {
        (self.f)(x)
    }

    fn gradient(&self, x: &ThreeVector) -> ThreeVector {
        let mut g = [0.0; 3];
        for (i, gi) in g.iter_mut().enumerate() {
            *gi = partial3(&self.f, x, i, self.h);
        }
        ThreeVector(g)
    }
}

/// Checks `2|W|/c² < 1` and returns `2W/c²`.
pub fn weak_field_ratio(w: f64, c: f64) -> Result<f64> {
    let k = 2.0 * w / (c * c);
    if !(k.abs() < 1.0) {
        return Err(Error::WeakFieldViolated { quantity: "2|W|/c^2", value: k.abs() });
    }
    Ok(k)
}

/// Symmetric perturbation field φ_μν(x).
pub trait GravPotential: Send + Sync {
    fn phi(&self, x: &FourVector) -> Tensor2;
}

impl<F: Fn(&FourVector) -> Tensor2 + Send + Sync> GravPotential for F {
    fn phi(&self, x: &FourVector) -> Tensor2 {
        self(x)
    }
}

/// `φ - ½ d tr_d(φ)` with `tr_d φ = d^αβ φ_αβ`.
pub fn trace_reverse(phi: &Tensor2) -> Tensor2 {
    let tr: f64 = (0..4).map(|a| MINKOWSKI.0[a][a] * phi.0[a][a]).sum();
    *phi - MINKOWSKI * (0.5 * tr)
}

/// `g = d + φ - ½ d tr_d(φ)` at one event, gated on `max|φ| < φ_max`.
pub fn metric_from_phi_value(phi: &Tensor2) -> Result<Tensor2> {
    let m = phi.max_abs();
    if !(m < PHI_MAX) {
        return Err(Error::WeakFieldViolated { quantity: "max|phi|", value: m });
    }
    Ok(MINKOWSKI + trace_reverse(phi))
}

/// Static metric of a Newtonian potential:
/// `g_ij = (1 - 2W/c²)δ_ij`, `g_44 = -(1 + 2W/c²)`.
pub fn static_metric_value(w: f64, c: f64) -> Result<Tensor2> {
    let k = weak_field_ratio(w, c)?;
    Ok(Tensor2::diag([1.0 - k, 1.0 - k, 1.0 - k, -(1.0 + k)]))
}

/// Inverse of [`static_metric_value`].
pub fn static_inverse_metric_value(w: f64, c: f64) -> Result<Tensor2> {
    let k = weak_field_ratio(w, c)?;
    let s = 1.0 / (1.0 - k);
    Ok(Tensor2::diag([s, s, s, -1.0 / (1.0 + k)]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Flat,
    FromPhi,
    StaticW,
}

#[derive(Clone)]
enum Source {
    Flat,
    FromPhi(Arc<dyn GravPotential>),
    StaticW(Arc<dyn NewtonianPotential>),
}

/// Metric field `g_μν(x)` with inverse and connection.
#[derive(Clone)]
pub struct EffectiveMetric {
    source: Source,
    c: f64,
    /// Step for numeric Christoffels of φ-built metrics.
    pub h: f64,
}

impl EffectiveMetric {
    pub fn flat(c: f64) -> Self {
        EffectiveMetric { source: Source::Flat, c, h: crate::field::DEFAULT_STEP }
    }

    pub fn from_phi(phi: Arc<dyn GravPotential>, c: f64, h: f64) -> Self {
        EffectiveMetric { source: Source::FromPhi(phi), c, h }
    }

    pub fn static_w(w: Arc<dyn NewtonianPotential>, c: f64) -> Self {
        EffectiveMetric { source: Source::StaticW(w), c, h: crate::field::DEFAULT_STEP }
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn provenance(&self) -> Provenance {
        match self.source {
            Source::Flat => Provenance::Flat,
            Source::FromPhi(_) => Provenance::FromPhi,
            Source::StaticW(_) => Provenance::StaticW,
        }
    }

    /// The Newtonian potential behind a static metric.
    pub fn potential(&self) -> Option<&Arc<dyn NewtonianPotential>> {
        match &self.source {
            Source::StaticW(w) => Some(w),
            _ => None,
        }
    }

    pub fn metric(&self, x: &FourVector) -> Result<Tensor2> {
        match &self.source {
            Source::Flat => Ok(MINKOWSKI),
            Source::FromPhi(p) => {
                let g = metric_from_phi_value(&p.phi(x))?;
                let det = g.determinant();
                if !(det.abs() >= DET_MIN) {
                    return Err(Error::SingularMetric { det });
                }
                Ok(g)
            }
            Source::StaticW(w) => static_metric_value(w.value(&x.spatial()), self.c),
        }
    }

    pub fn inverse(&self, x: &FourVector) -> Result<Tensor2> {
        match &self.source {
            Source::Flat => Ok(MINKOWSKI),
            Source::FromPhi(_) => {
                let g = self.metric(x)?;
                g.inverse().ok_or(Error::SingularMetric { det: g.determinant() })
            }
            Source::StaticW(w) => static_inverse_metric_value(w.value(&x.spatial()), self.c),
        }
    }

    /// Connection used by the integrators: zero, exact closed form, or numeric.
    pub fn christoffel(&self, x: &FourVector) -> Result<Christoffel> {
        match &self.source {
            Source::Flat => Ok(Christoffel::ZERO),
            Source::FromPhi(_) => christoffel_numeric(self, x, self.h),
            Source::StaticW(w) => christoffel_static_closed_form(w.as_ref(), &x.spatial(), self.c),
        }
    }

    /// `g_μν u^μ w^ν`.
    pub fn dot(&self, x: &FourVector, u: &FourVector, w: &FourVector) -> Result<f64> {
        match &self.source {
            Source::Flat => Ok(crate::minkowski::inner4(u, w)),
            _ => Ok(self.metric(x)?.bilinear(u, w)),
        }
    }
}

/// Metric of a φ field; see [`EffectiveMetric::from_phi`].
pub fn metric_from_phi(phi: Arc<dyn GravPotential>, c: f64) -> EffectiveMetric {
    EffectiveMetric::from_phi(phi, c, crate::field::DEFAULT_STEP)
}

pub fn static_metric_from_w(w: Arc<dyn NewtonianPotential>, c: f64) -> EffectiveMetric {
    EffectiveMetric::static_w(w, c)
}

/// `Γ^α_βγ = ½ g^αλ (∂_β g_λγ + ∂_γ g_λβ - ∂_λ g_βγ)` with central-difference metric derivatives.
pub fn christoffel_numeric(g: &EffectiveMetric, x: &FourVector, h: f64) -> Result<Christoffel> {
    let ginv = g.inverse(x)?;
    let mut dg = [Tensor2::ZERO; 4];
    for (mu, d) in dg.iter_mut().enumerate() {
        *d = (g.metric(&shifted(x, mu, h))? - g.metric(&shifted(x, mu, -h))?) * (0.5 / h);
    }
    Ok(christoffel_from_derivatives(&ginv, &dg))
}

/// Assembles Γ from `g^αλ` and `dg[μ] = ∂_μ g`; symmetric in the lower pair by construction.
pub fn christoffel_from_derivatives(ginv: &Tensor2, dg: &[Tensor2; 4]) -> Christoffel {
    let mut lowered = [[[0.0; 4]; 4]; 4]; // Γ_λβγ
    for l in 0..4 {
        for b in 0..4 {
            for gm in b..4 {
                let v = 0.5 * (dg[b].0[l][gm] + dg[gm].0[l][b] - dg[l].0[b][gm]);
                lowered[l][b][gm] = v;
                lowered[l][gm][b] = v;
            }
        }
    }
    let mut gam = Christoffel::ZERO;
    for a in 0..4 {
        for b in 0..4 {
            for gm in b..4 {
                let v: f64 = (0..4).map(|l| ginv.0[a][l] * lowered[l][b][gm]).sum();
                gam.0[a][b][gm] = v;
                gam.0[a][gm][b] = v;
            }
        }
    }
    gam
}

/// Exact connection of the static metric of `W`:
///
/// - `Γ^i_jk = [δ_jk ∂_iW - δ_ik ∂_jW - δ_ij ∂_kW] / (c²(1 - 2W/c²))`
/// - `Γ^4_i4 = ∂_iW / (c²(1 + 2W/c²))`
/// - `Γ^i_44 = ∂_iW / (c²(1 - 2W/c²))`
///
/// To leading order `Γ^4_i4 = c⁻²∂_iW`.
pub fn christoffel_static_closed_form(w: &dyn NewtonianPotential, x: &ThreeVector, c: f64) -> Result<Christoffel> {
    let k = weak_field_ratio(w.value(x), c)?;
    let dw = w.gradient(x).0;
    let c2 = c * c;
    let a = 1.0 / (c2 * (1.0 - k));
    let b = 1.0 / (c2 * (1.0 + k));
    let mut g = Christoffel::ZERO;
    for i in 0..3 {
        for j in 0..3 {
            for l in 0..3 {
                let mut v = 0.0;
                if j == l {
                    v += dw[i];
                }
                if i == l {
                    v -= dw[j];
                }
                if i == j {
                    v -= dw[l];
                }
                g.0[i][j][l] = a * v;
            }
        }
        g.0[3][i][3] = b * dw[i];
        g.0[3][3][i] = b * dw[i];
        g.0[i][3][3] = a * dw[i];
    }
    Ok(g)
}

/// Orthonormal-frame components of `T` at a static field point:
/// `T̄ⁱ = √(1 + 2|W|/c²) Tⁱ`, `T̄⁴ = √(1 - 2|W|/c²) T⁴`, written with `|W| = -W`
/// so the result stays the orthonormal projection when `W > 0`.
pub fn physical_components(t: &FourVector, w: &dyn NewtonianPotential, x: &ThreeVector, c: f64) -> Result<FourVector> {
    let k = weak_field_ratio(w.value(x), c)?;
    let s = (1.0 - k).sqrt();
    let s4 = (1.0 + k).sqrt();
    Ok(FourVector([s * t.0[0], s * t.0[1], s * t.0[2], s4 * t.0[3]]))
}

/// Central-difference `∇²W`.
pub fn laplace_residual(w: &dyn NewtonianPotential, x: &ThreeVector, h: f64) -> f64 {
    (0..3).map(|i| second_partial3(|y: &ThreeVector| w.value(y), x, i, i, h)).sum()
}

/// Covariant derivative of a tensor field with connection `gamma` at `x`.
/// The derivative index is appended as the last covariant slot.
pub fn covariant_derivative<T>(t: T, gamma: &Christoffel, x: &FourVector, h: f64) -> Result<GeneralTensor>
where
    T: Fn(&FourVector) -> GeneralTensor,
{
    let t0 = t(x);
    let (r, s) = (t0.contravariant_order(), t0.covariant_order());
    let mut out = GeneralTensor::zeros(r, s + 1)?;
    let n = t0.data().len();
    for alpha in 0..4 {
        let mut d = &t(&shifted(x, alpha, h)) - &t(&shifted(x, alpha, -h));
        for v in d.data_mut() {
            *v *= 0.5 / h;
        }
        let mut m = Tensor2::ZERO; // m[a][l] = Γ^a_{αl}
        for a in 0..4 {
            m.0[a] = gamma.0[a][alpha];
        }
        for slot in 0..r {
            let add = t0.apply_slot(slot, &m, false);
            for (dv, av) in d.data_mut().iter_mut().zip(add.data()) {
                *dv += av;
            }
        }
        for slot in r..r + s {
            let sub = t0.apply_slot(slot, &m, true);
            for (dv, sv) in d.data_mut().iter_mut().zip(sub.data()) {
                *dv -= sv;
            }
        }
        for k in 0..n {
            out.data_mut()[k * 4 + alpha] = d.data()[k];
        }
    }
    Ok(out)
}

/// Metric of `g` as a rank-(0,2) field, erroring outside the weak-field domain.
pub fn metric_tensor_field(g: &EffectiveMetric) -> impl Fn(&FourVector) -> GeneralTensor + '_ {
    move |x| {
        let m = g.metric(x).unwrap_or(IDENTITY4 * f64::NAN);
        GeneralTensor::from_tensor2(&m, 0, 2).expect("rank 2")
    }
}
