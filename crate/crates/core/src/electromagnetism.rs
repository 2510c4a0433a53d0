//! Faraday tensor, Maxwell residuals, electromagnetic stress-energy and the
//! Lorentz equation, in Gaussian units.
//!
//! Layout of `F_μν`: `F₁₂ = B₃`, `F₁₃ = -B₂`, `F₂₃ = B₁`, `F_i4 = E_i`.
//! Indices are raised with the flat metric.

use std::f64::consts::PI;
use std::ops::{Mul, Sub};

use crate::error::Result;
use crate::field::{partial, shifted, ScalarField};
use crate::minkowski::{Covector, FourVector, Tensor2, ThreeVector, MINKOWSKI};
use crate::worldline::{integrate_second_order, IntegratorSettings, ParticleState, Worldline};

/// Antisymmetric field tensor stored as its six independent entries.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FaradayTensor {
    e: ThreeVector,
    b: ThreeVector,
}

impl FaradayTensor {
    pub const ZERO: FaradayTensor = FaradayTensor { e: ThreeVector::ZERO, b: ThreeVector::ZERO };

    pub fn assemble(e: ThreeVector, b: ThreeVector) -> Self {
        FaradayTensor { e, b }
    }

    pub fn disassemble(&self) -> (ThreeVector, ThreeVector) {
        (self.e, self.b)
    }

    pub fn e(&self) -> ThreeVector {
        self.e
    }

    pub fn b(&self) -> ThreeVector {
        self.b
    }

    /// Reads the upper triangle of a covariant antisymmetric array.
    pub fn from_covariant(f: &Tensor2) -> Self {
        FaradayTensor {
            e: ThreeVector([f.0[0][3], f.0[1][3], f.0[2][3]]),
            b: ThreeVector([f.0[1][2], -f.0[0][2], f.0[0][1]]),
        }
    }

    /// `F_μν`.
    pub fn covariant(&self) -> Tensor2 {
        let (e, b) = (self.e.0, self.b.0);
        Tensor2([
            [0.0, b[2], -b[1], e[0]],
            [-b[2], 0.0, b[0], e[1]],
            [b[1], -b[0], 0.0, e[2]],
            [-e[0], -e[1], -e[2], 0.0],
        ])
    }

    /// `F^μν = d^μα d^νβ F_αβ`.
    pub fn contravariant(&self) -> Tensor2 {
        let mut f = self.covariant();
        for i in 0..3 {
            f.0[i][3] = -f.0[i][3];
            f.0[3][i] = -f.0[3][i];
        }
        f
    }

    /// `F^α_λ = d^ακ F_κλ`.
    pub fn mixed(&self) -> Tensor2 {
        let mut f = self.covariant();
        for v in f.0[3].iter_mut() {
            *v = -*v;
        }
        f
    }

    /// `F_μν F^μν = 2(B² - E²)`.
    pub fn invariant(&self) -> f64 {
        2.0 * (self.b.norm_sq() - self.e.norm_sq())
    }
}

impl Sub for FaradayTensor {
    type Output = FaradayTensor;
    fn sub(self, o: FaradayTensor) -> FaradayTensor {
        FaradayTensor { e: self.e - o.e, b: self.b - o.b }
    }
}

impl Mul<f64> for FaradayTensor {
    type Output = FaradayTensor;
    fn mul(self, k: f64) -> FaradayTensor {
        FaradayTensor { e: self.e * k, b: self.b * k }
    }
}

/// Four-current `J = (j, cσ)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ChargeCurrent(pub FourVector);

impl ChargeCurrent {
    pub fn new(j: &ThreeVector, sigma: f64, c: f64) -> Self {
        ChargeCurrent(FourVector([j.0[0], j.0[1], j.0[2], c * sigma]))
    }

    pub fn current_density(&self) -> ThreeVector {
        self.0.spatial()
    }

    pub fn charge_density(&self, c: f64) -> f64 {
        self.0 .0[3] / c
    }
}

impl Sub for ChargeCurrent {
    type Output = ChargeCurrent;
    fn sub(self, o: ChargeCurrent) -> ChargeCurrent {
        ChargeCurrent(self.0 - o.0)
    }
}

impl Mul<f64> for ChargeCurrent {
    type Output = ChargeCurrent;
    fn mul(self, k: f64) -> ChargeCurrent {
        ChargeCurrent(self.0 * k)
    }
}

/// Index triples of the homogeneous equations `∂_λF_μν + ∂_μF_νλ + ∂_νF_λμ = 0`, zero-based.
pub const CYCLIC_TRIPLES: [(usize, usize, usize); 4] = [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxwellResiduals {
    /// `∂_ν F^μν - (4π/c) J^μ`.
    pub inhomogeneous: FourVector,
    /// Cyclic sums of `∂F_μν` over [`CYCLIC_TRIPLES`].
    pub homogeneous: [f64; 4],
    /// `∂_μ J^μ`.
    pub conservation: f64,
}

impl MaxwellResiduals {
    pub fn max_abs(&self) -> f64 {
        let h = self.homogeneous.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        self.inhomogeneous.max_abs().max(h).max(self.conservation.abs())
    }
}

/// `[∂_ν F^μν, ∂_ν F_μν]` for each ν.
fn d_faraday<F>(f: &F, x: &FourVector, h: f64) -> ([Tensor2; 4], [Tensor2; 4])
where
    F: Fn(&FourVector) -> FaradayTensor,
{
    let mut up = [Tensor2::ZERO; 4];
    let mut down = [Tensor2::ZERO; 4];
    for nu in 0..4 {
        let d = (f(&shifted(x, nu, h)) - f(&shifted(x, nu, -h))) * (0.5 / h);
        up[nu] = d.contravariant();
        down[nu] = d.covariant();
    }
    (up, down)
}

fn cyclic(d: &[Tensor2; 4]) -> [f64; 4] {
    let mut r = [0.0; 4];
    for (k, &(a, b, g)) in CYCLIC_TRIPLES.iter().enumerate() {
        r[k] = d[g].0[a][b] + d[a].0[b][g] + d[b].0[g][a];
    }
    r
}

pub fn maxwell_residuals<F, J>(f: F, j: J, x: &FourVector, h: f64, c: f64) -> MaxwellResiduals
where
    F: Fn(&FourVector) -> FaradayTensor,
    J: Fn(&FourVector) -> ChargeCurrent,
{
    let (d, dl) = d_faraday(&f, x, h);
    let j0 = j(x).0;
    let mut inh = [0.0; 4];
    for (mu, r) in inh.iter_mut().enumerate() {
        *r = (0..4).map(|nu| d[nu].0[mu][nu]).sum::<f64>() - 4.0 * PI / c * j0.0[mu];
    }
    let conservation = (0..4).map(|mu| partial(|y: &FourVector| j(y).0 .0[mu], x, mu, h)).sum();
    MaxwellResiduals { inhomogeneous: FourVector(inh), homogeneous: cyclic(&dl), conservation }
}

/// Symmetric `ℳ^αβ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EMStressEnergy(pub Tensor2);

impl EMStressEnergy {
    /// `ℳ⁴⁴ = (E² + B²)/8π`.
    pub fn energy_density(&self) -> f64 {
        self.0 .0[3][3]
    }

    /// Poynting vector `S = (E×B)/4π`, read from `ℳ^i4`.
    pub fn poynting(&self) -> ThreeVector {
        ThreeVector([self.0 .0[0][3], self.0 .0[1][3], self.0 .0[2][3]])
    }

    /// Maxwell stress `M_ij = -ℳ^ij`.
    pub fn maxwell_stress(&self) -> [[f64; 3]; 3] {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = -self.0 .0[i][j];
            }
        }
        m
    }

    /// `d_αβ ℳ^αβ`.
    pub fn trace(&self) -> f64 {
        (0..4).map(|a| MINKOWSKI.0[a][a] * self.0 .0[a][a]).sum()
    }

    /// `ℳ_α^β = d_αγ ℳ^γβ`.
    pub fn mixed(&self) -> Tensor2 {
        MINKOWSKI.matmul(&self.0)
    }
}

pub fn em_stress_energy(f: &FaradayTensor) -> EMStressEnergy {
    let fu = f.contravariant();
    let fl_raised = f.covariant().matmul(&MINKOWSKI); // F_λ^β
    let inv = f.invariant();
    let mut m = Tensor2::ZERO;
    for a in 0..4 {
        for b in 0..4 {
            let mut s = 0.0;
            for l in 0..4 {
                s += fu.0[l][a] * fl_raised.0[l][b];
            }
            m.0[a][b] = (s - 0.25 * MINKOWSKI.0[a][b] * inv) / (4.0 * PI);
        }
    }
    EMStressEnergy(m)
}

/// `∂_β ℳ_α^β - (1/c) F^λ_α J_λ`, index α covariant.
pub fn divergence_identity_residual<F, J>(f: F, j: J, x: &FourVector, h: f64, c: f64) -> Covector
where
    F: Fn(&FourVector) -> FaradayTensor,
    J: Fn(&FourVector) -> ChargeCurrent,
{
    let bianchi = cyclic(&d_faraday(&f, x, h).1);
    let scale = f(x).covariant().max_abs().max(f64::MIN_POSITIVE) / h;
    if bianchi.iter().any(|v| v.abs() > 1e-6 * scale) {
        log::warn!("field violates the homogeneous Maxwell equations at {:?}: {:?}", x.0, bianchi);
    }
    let mut div = [0.0; 4];
    for beta in 0..4 {
        let mp = em_stress_energy(&f(&shifted(x, beta, h))).mixed();
        let mm = em_stress_energy(&f(&shifted(x, beta, -h))).mixed();
        for (a, d) in div.iter_mut().enumerate() {
            *d += (mp.0[a][beta] - mm.0[a][beta]) * (0.5 / h);
        }
    }
    // F^λ_α J_λ = F_κα J^κ
    let fl = f(x).covariant();
    let jv = j(x).0;
    let mut r = [0.0; 4];
    for (a, ra) in r.iter_mut().enumerate() {
        let fj: f64 = (0..4).map(|k| fl.0[k][a] * jv.0[k]).sum();
        *ra = div[a] - fj / c;
    }
    Covector(r)
}

/// Integrates `m d²X/ds² = (e/c) F^α_λ U^λ`.
pub fn integrate_lorentz<F>(
    state0: &ParticleState,
    f: F,
    ds: f64,
    n: usize,
    c: f64,
    settings: IntegratorSettings,
) -> Result<Worldline>
where
    F: Fn(&FourVector) -> FaradayTensor,
{
    let k = state0.charge / (state0.mass * c);
    integrate_second_order(
        &state0.x,
        &state0.u,
        state0.mass,
        state0.charge,
        c,
        ds,
        n,
        settings,
        |x, u| Ok(lorentz_acceleration(&f(x), u, k)),
        |_, u| Ok(crate::minkowski::inner4(u, u)),
    )
}

/// `k F^α_λ U^λ` with `k = e/(mc)`.
pub fn lorentz_acceleration(f: &FaradayTensor, u: &FourVector, k: f64) -> FourVector {
    f.mixed().apply(u) * k
}

/// `F_μν = ∂_μ A_ν - ∂_ν A_μ` by central differences.
pub fn faraday_from_potential<A>(a: A, x: &FourVector, h: f64) -> FaradayTensor
where
    A: Fn(&FourVector) -> Covector,
{
    let mut g = Tensor2::ZERO; // g[μ][ν] = ∂_μ A_ν
    for mu in 0..4 {
        g.0[mu] = partial(&a, x, mu, h).0;
    }
    FaradayTensor::from_covariant(&(g - g.transpose()))
}

/// Potential `A'_μ = A_μ - ∂_μ Λ`.
pub struct GaugeTransformed<A, L> {
    pub potential: A,
    pub gauge: L,
    /// Step used when `Λ` has no analytic gradient.
    pub h: f64,
}

impl<A, L> GaugeTransformed<A, L>
where
    A: Fn(&FourVector) -> Covector,
    L: ScalarField,
{
    pub fn eval(&self, x: &FourVector) -> Covector {
        (self.potential)(x) - self.gauge.gradient(x, self.h)
    }
}

pub fn gauge_transform<A, L>(a: A, lambda: L, h: f64) -> GaugeTransformed<A, L>
where
    A: Fn(&FourVector) -> Covector,
    L: ScalarField,
{
    GaugeTransformed { potential: a, gauge: lambda, h }
}

/// `∂_μ A^μ = Σᵢ ∂ᵢAᵢ - ∂₄A₄`.
pub fn lorenz_gauge_residual<A>(a: A, x: &FourVector, h: f64) -> f64
where
    A: Fn(&FourVector) -> Covector,
{
    (0..4).map(|mu| MINKOWSKI.0[mu][mu] * partial(|y: &FourVector| a(y).0[mu], x, mu, h)).sum()
}
