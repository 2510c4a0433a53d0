//! Spatial curvilinear charts `x̂ⁱ = X̂ⁱ(x⃗)`, `x̂⁴ = x⁴`, with their induced
//! metric, connection, orthonormal triads and the operators of orthogonal
//! coordinates.

use nalgebra::Matrix3;

use crate::error::{Error, Result};
use crate::field::shifted3;
use crate::gravity::{self, christoffel_from_derivatives, Christoffel};
use crate::minkowski::{FourVector, GeneralTensor, Tensor2, ThreeVector};

/// Row-major 3×3 block.
pub type Mat3 = [[f64; 3]; 3];

/// Smallest admissible |det ∂X/∂x̂|.
pub const JACOBIAN_MIN: f64 = 1e-12;
/// Tolerance on `ĝ_ij λ^i_A λ^j_B = δ_AB`.
pub const TRIAD_TOL: f64 = 1e-10;
/// Tolerance on `λ^i_A μ^A_j = δ^i_j`.
pub const TRIAD_INVERSE_TOL: f64 = 1e-12;
/// Tolerance on `γ_ABC + γ_BAC`, relative to `max(1, max|γ|)`.
pub const RICCI_ANTISYMMETRY_TOL: f64 = 1e-6;
/// Default distance kept from the axis and origin of the built-in charts.
pub const DEFAULT_MARGIN: f64 = 1e-9;
/// Central-difference step for charts without an analytic Jacobian.
pub const JACOBIAN_STEP: f64 = 1e-5;

fn to_na(m: &Mat3) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| m[i][j])
}

fn from_na(m: &Matrix3<f64>) -> Mat3 {
    let mut r = [[0.0; 3]; 3];
    for (i, row) in r.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = m[(i, j)];
        }
    }
    r
}

/// Embeds a spatial block in a 4×4 matrix with `[3][3] = corner`.
fn embed(m: &Mat3, corner: f64) -> Tensor2 {
    let mut t = Tensor2::ZERO;
    for i in 0..3 {
        t.0[i][..3].copy_from_slice(&m[i]);
    }
    t.0[3][3] = corner;
    t
}

/// A spatial coordinate chart.
pub trait Chart: Send + Sync {
    fn name(&self) -> &str;

    /// `x̂ = X̂(x⃗)`.
    fn forward(&self, x: &ThreeVector) -> Result<ThreeVector>;

    /// `x⃗ = X(x̂)`.
    fn inverse(&self, xh: &ThreeVector) -> ThreeVector;

    /// Rejects points outside the declared domain.
    fn check(&self, _xh: &ThreeVector) -> Result<()> {
        Ok(())
    }

    /// `∂X^k/∂x̂^i` stored as `[k][i]`. Central differences unless overridden.
    fn jacobian(&self, xh: &ThreeVector) -> Mat3 {
        let mut j = [[0.0; 3]; 3];
        for i in 0..3 {
            let d = (self.inverse(&shifted3(xh, i, JACOBIAN_STEP)) - self.inverse(&shifted3(xh, i, -JACOBIAN_STEP)))
                * (0.5 / JACOBIAN_STEP);
            for (k, row) in j.iter_mut().enumerate() {
                row[i] = d.0[k];
            }
        }
        j
    }

    /// Scale factors, for orthogonal charts.
    fn scale_factors(&self) -> Option<&dyn ScaleFactors> {
        None
    }
}

/// Scale factors `h_i > 0` of an orthogonal chart, `ĝ = diag(h₁², h₂², h₃²)`.
pub trait ScaleFactors: Send + Sync {
    fn factors(&self, xh: &ThreeVector) -> [f64; 3];

    /// `∂h_i/∂x̂^j` stored as `[i][j]`.
    fn gradient(&self, xh: &ThreeVector) -> Mat3 {
        let step = 1e-5;
        let mut g = [[0.0; 3]; 3];
        for j in 0..3 {
            let p = self.factors(&shifted3(xh, j, step));
            let m = self.factors(&shifted3(xh, j, -step));
            for i in 0..3 {
                g[i][j] = (p[i] - m[i]) * (0.5 / step);
            }
        }
        g
    }

    /// Factors at `xh`, failing unless all are positive.
    fn checked(&self, xh: &ThreeVector) -> Result<[f64; 3]> {
        let h = self.factors(xh);
        for (i, v) in h.iter().enumerate() {
            if !(*v > 0.0) {
                return Err(Error::DegenerateScaleFactor { index: i + 1, value: *v });
            }
        }
        Ok(h)
    }
}

/// Identity chart.
#[derive(Debug, Clone, Copy, Default)]
pub struct Cartesian;

impl Chart for Cartesian {
    fn name(&self) -> &str {
        "cartesian"
    }

    fn forward(&self, x: &ThreeVector) -> Result<ThreeVector> {
        Ok(*x)
    }

    fn inverse(&self, xh: &ThreeVector) -> ThreeVector {
        *xh
    }

    fn jacobian(&self, _xh: &ThreeVector) -> Mat3 {
        [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
    }

    fn scale_factors(&self) -> Option<&dyn ScaleFactors> {
        Some(self)
    }
}

impl ScaleFactors for Cartesian {
    fn factors(&self, _xh: &ThreeVector) -> [f64; 3] {
        [1.0; 3]
    }

    fn gradient(&self, _xh: &ThreeVector) -> Mat3 {
        [[0.0; 3]; 3]
    }
}

/// `(r, θ, φ)`, θ from the +z axis. Points with `r ≤ margin` or
/// `sin θ ≤ margin` are outside the domain.
#[derive(Debug, Clone, Copy)]
pub struct Spherical {
    pub margin: f64,
}

impl Default for Spherical {
    fn default() -> Self {
        Spherical { margin: DEFAULT_MARGIN }
    }
}

impl Chart for Spherical {
    fn name(&self) -> &str {
        "spherical"
    }

    fn forward(&self, x: &ThreeVector) -> Result<ThreeVector> {
        let [a, b, z] = x.0;
        let rho = a.hypot(b);
        let xh = ThreeVector::new(x.norm(), rho.atan2(z), b.atan2(a));
        self.check(&xh)?;
        Ok(xh)
    }

    fn inverse(&self, xh: &ThreeVector) -> ThreeVector {
        let [r, th, ph] = xh.0;
        let (st, ct) = th.sin_cos();
        let (sp, cp) = ph.sin_cos();
        ThreeVector::new(r * st * cp, r * st * sp, r * ct)
    }

    fn check(&self, xh: &ThreeVector) -> Result<()> {
        let [r, th, _] = xh.0;
        if !(r > self.margin) || !(th.sin() > self.margin) {
            return Err(Error::SingularJacobian { det: r * r * th.sin() });
        }
        Ok(())
    }

    fn jacobian(&self, xh: &ThreeVector) -> Mat3 {
        let [r, th, ph] = xh.0;
        let (st, ct) = th.sin_cos();
        let (sp, cp) = ph.sin_cos();
        [
            [st * cp, r * ct * cp, -r * st * sp],
            [st * sp, r * ct * sp, r * st * cp],
            [ct, -r * st, 0.0],
        ]
    }

    fn scale_factors(&self) -> Option<&dyn ScaleFactors> {
        Some(self)
    }
}

impl ScaleFactors for Spherical {
    fn factors(&self, xh: &ThreeVector) -> [f64; 3] {
        let [r, th, _] = xh.0;
        [1.0, r, r * th.sin()]
    }

    fn gradient(&self, xh: &ThreeVector) -> Mat3 {
        let [r, th, _] = xh.0;
        let (st, ct) = th.sin_cos();
        [[0.0; 3], [1.0, 0.0, 0.0], [st, r * ct, 0.0]]
    }
}

/// `(ρ, φ, z)`. Points with `ρ ≤ margin` are outside the domain.
#[derive(Debug, Clone, Copy)]
pub struct Cylindrical {
    pub margin: f64,
}

impl Default for Cylindrical {
    fn default() -> Self {
        Cylindrical { margin: DEFAULT_MARGIN }
    }
}

impl Chart for Cylindrical {
    fn name(&self) -> &str {
        "cylindrical"
    }

    fn forward(&self, x: &ThreeVector) -> Result<ThreeVector> {
        let [a, b, z] = x.0;
        let xh = ThreeVector::new(a.hypot(b), b.atan2(a), z);
        self.check(&xh)?;
        Ok(xh)
    }

    fn inverse(&self, xh: &ThreeVector) -> ThreeVector {
        let [rho, ph, z] = xh.0;
        let (sp, cp) = ph.sin_cos();
        ThreeVector::new(rho * cp, rho * sp, z)
    }

    fn check(&self, xh: &ThreeVector) -> Result<()> {
        if !(xh.0[0] > self.margin) {
            return Err(Error::SingularJacobian { det: xh.0[0] });
        }
        Ok(())
    }

    fn jacobian(&self, xh: &ThreeVector) -> Mat3 {
        let [rho, ph, _] = xh.0;
        let (sp, cp) = ph.sin_cos();
        [[cp, -rho * sp, 0.0], [sp, rho * cp, 0.0], [0.0, 0.0, 1.0]]
    }

    fn scale_factors(&self) -> Option<&dyn ScaleFactors> {
        Some(self)
    }
}

impl ScaleFactors for Cylindrical {
    fn factors(&self, xh: &ThreeVector) -> [f64; 3] {
        [1.0, xh.0[0], 1.0]
    }

    fn gradient(&self, _xh: &ThreeVector) -> Mat3 {
        [[0.0; 3], [1.0, 0.0, 0.0], [0.0; 3]]
    }
}

/// User chart from a pair of closures; the Jacobian is taken by central differences.
pub struct FnChart<F, G> {
    pub name: String,
    pub forward: F,
    pub inverse: G,
}

impl<F, G> Chart for FnChart<F, G>
where
    F: Fn(&ThreeVector) -> ThreeVector + Send + Sync,
    G: Fn(&ThreeVector) -> ThreeVector + Send + Sync,
{
    fn name(&self) -> &str {
        &self.name
    }

    fn forward(&self, x: &ThreeVector) -> Result<ThreeVector> {
        Ok((self.forward)(x))
    }

    fn inverse(&self, xh: &ThreeVector) -> ThreeVector {
        (self.inverse)(xh)
    }
}

/// User scale factors from a closure; the gradient is taken by central differences.
pub struct FnScaleFactors<F>(pub F);

impl<F: Fn(&ThreeVector) -> [f64; 3] + Send + Sync> ScaleFactors for FnScaleFactors<F> {
    fn factors(&self, xh: &ThreeVector) -> [f64; 3] {
        (self.0)(xh)
    }
}

/// Built-in chart by name.
pub fn chart_by_name(name: &str, margin: f64) -> Result<Box<dyn Chart>> {
    match name {
        "cartesian" => Ok(Box::new(Cartesian)),
        "spherical" => Ok(Box::new(Spherical { margin })),
        "cylindrical" => Ok(Box::new(Cylindrical { margin })),
        other => Err(Error::InvalidArgument(format!("unknown chart `{other}`"))),
    }
}

/// Spatial block `ĝ_ij` of the metric a chart induces; `ĝ_i4 = 0`, `ĝ₄₄ = -1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InducedMetric {
    g: Mat3,
    inv: Mat3,
    det: f64,
}

impl InducedMetric {
    /// From a spatial block, which must be symmetric positive-definite.
    pub fn new(g: Mat3) -> Result<Self> {
        let m = to_na(&g);
        let det = m.determinant();
        if m.cholesky().is_none() || det.abs() < JACOBIAN_MIN * JACOBIAN_MIN {
            return Err(Error::SingularMetric { det });
        }
        let inv = m.try_inverse().ok_or(Error::SingularMetric { det })?;
        Ok(InducedMetric { g, inv: from_na(&inv), det })
    }

    pub fn spatial(&self) -> &Mat3 {
        &self.g
    }

    pub fn inverse(&self) -> &Mat3 {
        &self.inv
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    pub fn sqrt_det(&self) -> f64 {
        self.det.sqrt()
    }

    /// Full `ĝ_αβ`.
    pub fn spacetime(&self) -> Tensor2 {
        embed(&self.g, -1.0)
    }

    /// Full `ĝ^αβ`.
    pub fn spacetime_inverse(&self) -> Tensor2 {
        embed(&self.inv, -1.0)
    }

    /// `ĝ_ij a^i b^j`.
    pub fn dot(&self, a: &ThreeVector, b: &ThreeVector) -> f64 {
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                s += self.g[i][j] * a.0[i] * b.0[j];
            }
        }
        s
    }
}

/// `ĝ_ij = δ_kl ∂X^k/∂x̂^i ∂X^l/∂x̂^j`.
pub fn induced_metric(chart: &dyn Chart, xh: &ThreeVector) -> Result<InducedMetric> {
    chart.check(xh)?;
    let j = to_na(&chart.jacobian(xh));
    let det = j.determinant();
    if !(det.abs() >= JACOBIAN_MIN) {
        return Err(Error::SingularJacobian { det });
    }
    let g = j.transpose() * j;
    let inv = j.try_inverse().ok_or(Error::SingularJacobian { det })?;
    Ok(InducedMetric { g: from_na(&g), inv: from_na(&(inv * inv.transpose())), det: det * det })
}

/// Christoffel symbols of the induced metric from central differences of `ĝ_ij`
/// with step `h`. Every symbol carrying the index 4 is exactly zero.
pub fn curvilinear_christoffel(chart: &dyn Chart, xh: &ThreeVector, h: f64) -> Result<Christoffel> {
    let ginv = induced_metric(chart, xh)?.spacetime_inverse();
    let mut dg = [Tensor2::ZERO; 4];
    for (i, d) in dg.iter_mut().take(3).enumerate() {
        let p = induced_metric(chart, &shifted3(xh, i, h))?.spacetime();
        let m = induced_metric(chart, &shifted3(xh, i, -h))?.spacetime();
        *d = (p - m) * (0.5 / h);
    }
    Ok(christoffel_from_derivatives(&ginv, &dg))
}

/// Closed-form symbols of an orthogonal chart:
/// `{i;ii} = ∂_i ln h_i`, `{i;ij} = ∂_j ln h_i`, `{i;jj} = -(h_j/h_i²) ∂_i h_j` for `j ≠ i`.
pub fn orthogonal_christoffel(scale: &dyn ScaleFactors, xh: &ThreeVector) -> Result<Christoffel> {
    let h = scale.checked(xh)?;
    let dh = scale.gradient(xh);
    let mut gam = Christoffel::ZERO;
    for i in 0..3 {
        for j in 0..3 {
            let v = dh[i][j] / h[i];
            gam.0[i][i][j] = v;
            gam.0[i][j][i] = v;
            if j != i {
                gam.0[i][j][j] = -h[j] * dh[j][i] / (h[i] * h[i]);
            }
        }
    }
    Ok(gam)
}

/// Connection used for differentiation: the closed form when the chart is
/// orthogonal with known scale factors, central differences of `ĝ` otherwise.
pub fn chart_connection(chart: &dyn Chart, xh: &ThreeVector, h: f64) -> Result<Christoffel> {
    match chart.scale_factors() {
        Some(scale) => {
            induced_metric(chart, xh)?;
            orthogonal_christoffel(scale, xh)
        }
        None => curvilinear_christoffel(chart, xh, h),
    }
}

/// Covariant derivative in chart coordinates. `t` takes `(x̂¹, x̂², x̂³, x⁴)`;
/// the derivative index is appended as the last covariant slot, and `∇̂₄`
/// is the plain `∂/∂x⁴`.
pub fn covariant_derivative<T>(chart: &dyn Chart, t: T, x: &FourVector, h: f64) -> Result<GeneralTensor>
where
    T: Fn(&FourVector) -> GeneralTensor,
{
    let gamma = chart_connection(chart, &x.spatial(), h)?;
    gravity::covariant_derivative(t, &gamma, x, h)
}

/// Cartesian vector components to chart components, `v̂^i = ∂X̂^i/∂x^k v^k`.
pub fn vector_to_chart(chart: &dyn Chart, xh: &ThreeVector, v: &ThreeVector) -> Result<ThreeVector> {
    let j = to_na(&chart.jacobian(xh));
    let det = j.determinant();
    let inv = j.try_inverse().ok_or(Error::SingularJacobian { det })?;
    let r = inv * nalgebra::Vector3::from(v.0);
    Ok(ThreeVector([r[0], r[1], r[2]]))
}

/// Cartesian covector components to chart components, `ŵ_i = ∂X^k/∂x̂^i w_k`.
pub fn covector_to_chart(chart: &dyn Chart, xh: &ThreeVector, w: &ThreeVector) -> ThreeVector {
    let j = chart.jacobian(xh);
    let mut r = [0.0; 3];
    for (i, ri) in r.iter_mut().enumerate() {
        *ri = (0..3).map(|k| j[k][i] * w.0[k]).sum();
    }
    ThreeVector(r)
}

/// Transforms a Cartesian spacetime tensor to chart components at `xh`:
/// spatial slots pick up the Jacobian, the 4-index is left alone.
pub fn tensor_to_chart(chart: &dyn Chart, xh: &ThreeVector, t: &GeneralTensor) -> Result<GeneralTensor> {
    let j = to_na(&chart.jacobian(xh));
    let det = j.determinant();
    let inv = j.try_inverse().ok_or(Error::SingularJacobian { det })?;
    let up = embed(&from_na(&inv), 1.0);
    let down = embed(&from_na(&j), 1.0);
    let r = t.contravariant_order();
    let mut out = t.clone();
    for slot in 0..t.rank() {
        out = if slot < r { out.apply_slot(slot, &up, false) } else { out.apply_slot(slot, &down, true) };
    }
    Ok(out)
}

/// Orthonormal triad `λ^i_A` with inverse `μ^A_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triad {
    lambda: Mat3,
    mu: Mat3,
}

impl Triad {
    /// `lambda[i][A] = λ^i_A`; checked against `metric`.
    pub fn new(lambda: Mat3, metric: &InducedMetric) -> Result<Self> {
        let l = to_na(&lambda);
        let det = l.determinant();
        let mu = l.try_inverse().ok_or(Error::TriadNotOrthonormal { deviation: f64::INFINITY })?;
        let t = Triad { lambda, mu: from_na(&mu) };
        let dev = t.orthonormality_deviation(metric);
        if !(dev <= TRIAD_TOL) {
            return Err(Error::TriadNotOrthonormal { deviation: dev });
        }
        let inv_dev = t.inverse_deviation();
        if !(inv_dev <= TRIAD_INVERSE_TOL) || det == 0.0 {
            return Err(Error::TriadNotOrthonormal { deviation: inv_dev });
        }
        Ok(t)
    }

    /// `λ^i_A = δ^i_A / h_i`.
    pub fn orthogonal(scale: &dyn ScaleFactors, xh: &ThreeVector) -> Result<Self> {
        let h = scale.checked(xh)?;
        let mut lambda = [[0.0; 3]; 3];
        let mut g = [[0.0; 3]; 3];
        for i in 0..3 {
            lambda[i][i] = 1.0 / h[i];
            g[i][i] = h[i] * h[i];
        }
        Triad::new(lambda, &InducedMetric::new(g)?)
    }

    /// Gram–Schmidt on the coordinate basis `∂/∂x̂¹, ∂/∂x̂², ∂/∂x̂³`.
    pub fn gram_schmidt(metric: &InducedMetric) -> Result<Self> {
        let mut cols: Vec<ThreeVector> = Vec::with_capacity(3);
        for a in 0..3 {
            let mut v = ThreeVector::unit(a);
            for e in &cols {
                v = v - *e * metric.dot(e, &v);
            }
            let n = metric.dot(&v, &v).sqrt();
            cols.push(v * (1.0 / n));
        }
        let mut lambda = [[0.0; 3]; 3];
        for (a, e) in cols.iter().enumerate() {
            for (i, row) in lambda.iter_mut().enumerate() {
                row[a] = e.0[i];
            }
        }
        Triad::new(lambda, metric)
    }

    pub fn lambda(&self) -> &Mat3 {
        &self.lambda
    }

    pub fn mu(&self) -> &Mat3 {
        &self.mu
    }

    /// `max |ĝ_ij λ^i_A λ^j_B - δ_AB|`.
    pub fn orthonormality_deviation(&self, metric: &InducedMetric) -> f64 {
        let mut m: f64 = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                let la = ThreeVector([self.lambda[0][a], self.lambda[1][a], self.lambda[2][a]]);
                let lb = ThreeVector([self.lambda[0][b], self.lambda[1][b], self.lambda[2][b]]);
                let d = if a == b { 1.0 } else { 0.0 };
                m = m.max((metric.dot(&la, &lb) - d).abs());
            }
        }
        m
    }

    /// `max |λ^i_A μ^A_j - δ^i_j|`.
    pub fn inverse_deviation(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let s: f64 = (0..3).map(|a| self.lambda[i][a] * self.mu[a][j]).sum();
                m = m.max((s - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
        m
    }

    /// Coordinate components to frame components, `v^A = μ^A_i v^i`.
    pub fn to_frame(&self, v: &ThreeVector) -> ThreeVector {
        let mut r = [0.0; 3];
        for (a, ra) in r.iter_mut().enumerate() {
            *ra = (0..3).map(|i| self.mu[a][i] * v.0[i]).sum();
        }
        ThreeVector(r)
    }

    /// Frame components to coordinate components, `v^i = λ^i_A v^A`.
    pub fn from_frame(&self, v: &ThreeVector) -> ThreeVector {
        let mut r = [0.0; 3];
        for (i, ri) in r.iter_mut().enumerate() {
            *ri = (0..3).map(|a| self.lambda[i][a] * v.0[a]).sum();
        }
        ThreeVector(r)
    }
}

/// Ricci rotation coefficients `γ_ABC`, stored as `[A][B][C]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RicciRotation(pub [[[f64; 3]; 3]; 3]);

impl RicciRotation {
    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, o: &RicciRotation) -> f64 {
        let mut m: f64 = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    m = m.max((self.0[a][b][c] - o.0[a][b][c]).abs());
                }
            }
        }
        m
    }

    /// `max |γ_ABC + γ_BAC|`.
    pub fn antisymmetry_residual(&self) -> f64 {
        let mut m: f64 = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    m = m.max((self.0[a][b][c] + self.0[b][a][c]).abs());
                }
            }
        }
        m
    }
}

/// `γ_ABC = ĝ_jl (∇̂_k λ^l_A) λ^j_B λ^k_C` for a triad field, differentiated
/// with a five-point stencil of step `h`. Fails if the triad is not
/// orthonormal at `xh` or if the result is not antisymmetric in its first pair.
pub fn ricci_rotation<F>(chart: &dyn Chart, triad: F, xh: &ThreeVector, h: f64) -> Result<RicciRotation>
where
    F: Fn(&ThreeVector) -> Result<Triad>,
{
    let metric = induced_metric(chart, xh)?;
    let gamma = chart_connection(chart, xh, h)?;
    let t0 = triad(xh)?;
    let dev = t0.orthonormality_deviation(&metric);
    if !(dev <= TRIAD_TOL) {
        return Err(Error::TriadNotOrthonormal { deviation: dev });
    }
    let l0 = t0.lambda();
    // nabla[k][l][A] = ∇̂_k λ^l_A
    let mut nabla = [[[0.0; 3]; 3]; 3];
    for (k, nk) in nabla.iter_mut().enumerate() {
        let p2 = triad(&shifted3(xh, k, 2.0 * h))?;
        let p1 = triad(&shifted3(xh, k, h))?;
        let m1 = triad(&shifted3(xh, k, -h))?;
        let m2 = triad(&shifted3(xh, k, -2.0 * h))?;
        for l in 0..3 {
            for a in 0..3 {
                let conn: f64 = (0..3).map(|q| gamma.0[l][k][q] * l0[q][a]).sum();
                let d = (8.0 * (p1.lambda()[l][a] - m1.lambda()[l][a]) - (p2.lambda()[l][a] - m2.lambda()[l][a]))
                    / (12.0 * h);
                nk[l][a] = d + conn;
            }
        }
    }
    let g = metric.spatial();
    let mut out = RicciRotation::default();
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                let mut s = 0.0;
                for j in 0..3 {
                    for l in 0..3 {
                        for k in 0..3 {
                            s += g[j][l] * nabla[k][l][a] * l0[j][b] * l0[k][c];
                        }
                    }
                }
                out.0[a][b][c] = s;
            }
        }
    }
    let asym = out.antisymmetry_residual();
    if !(asym <= RICCI_ANTISYMMETRY_TOL * out.max_abs().max(1.0)) {
        return Err(Error::TriadNotOrthonormal { deviation: asym });
    }
    Ok(out)
}

/// Closed-form `γ_ABC` for the triad `λ^i_A = δ^i_A/h_i` of an orthogonal chart.
/// For `A ≠ B` the only nonzero entries are
/// `γ_(A)(B)(A) = -(1/h_B) ∂_B ln h_A = -γ_(B)(A)(A)`.
pub fn orthogonal_ricci_rotation(scale: &dyn ScaleFactors, xh: &ThreeVector) -> Result<RicciRotation> {
    let h = scale.checked(xh)?;
    let dh = scale.gradient(xh);
    let mut out = RicciRotation::default();
    for a in 0..3 {
        for b in 0..3 {
            if a != b {
                let v = dh[a][b] / (h[a] * h[b]);
                out.0[a][b][a] = -v;
                out.0[b][a][a] = v;
            }
        }
    }
    Ok(out)
}

fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// Physical gradient `∇_(A)φ = h_A⁻¹ ∂φ/∂x̂^A`.
pub fn grad_phys<F>(scale: &dyn ScaleFactors, phi: F, xh: &ThreeVector, h: f64) -> Result<ThreeVector>
where
    F: Fn(&ThreeVector) -> f64,
{
    let hs = scale.checked(xh)?;
    let mut r = [0.0; 3];
    for (a, ra) in r.iter_mut().enumerate() {
        *ra = (phi(&shifted3(xh, a, h)) - phi(&shifted3(xh, a, -h))) * (0.5 / h) / hs[a];
    }
    Ok(ThreeVector(r))
}

/// Divergence of coordinate components `T^i`: `(h₁h₂h₃)⁻¹ ∂_i(h₁h₂h₃ T^i)`.
pub fn div<F>(scale: &dyn ScaleFactors, t: F, xh: &ThreeVector, h: f64) -> Result<f64>
where
    F: Fn(&ThreeVector) -> ThreeVector,
{
    let vol = |y: &ThreeVector| scale.factors(y).iter().product::<f64>();
    let v0 = scale.checked(xh)?.iter().product::<f64>();
    let mut s = 0.0;
    for i in 0..3 {
        let p = shifted3(xh, i, h);
        let m = shifted3(xh, i, -h);
        s += (vol(&p) * t(&p).0[i] - vol(&m) * t(&m).0[i]) * (0.5 / h);
    }
    Ok(s / v0)
}

/// Divergence of physical components `v_(A)`, using `T^i = v_(i)/h_i`.
pub fn div_phys<F>(scale: &dyn ScaleFactors, v: F, xh: &ThreeVector, h: f64) -> Result<f64>
where
    F: Fn(&ThreeVector) -> ThreeVector,
{
    div(
        scale,
        |y: &ThreeVector| {
            let hs = scale.factors(y);
            let w = v(y);
            ThreeVector([w.0[0] / hs[0], w.0[1] / hs[1], w.0[2] / hs[2]])
        },
        xh,
        h,
    )
}

/// Contravariant curl of covariant components `A_k`:
/// `(h₁h₂h₃)⁻¹ ε^{ijk} ∂_j A_k`.
pub fn curl<F>(scale: &dyn ScaleFactors, a: F, xh: &ThreeVector, h: f64) -> Result<ThreeVector>
where
    F: Fn(&ThreeVector) -> ThreeVector,
{
    let vol: f64 = scale.checked(xh)?.iter().product();
    let mut d = [[0.0; 3]; 3]; // d[j][k] = ∂_j A_k
    for (j, dj) in d.iter_mut().enumerate() {
        *dj = ((a(&shifted3(xh, j, h)) - a(&shifted3(xh, j, -h))) * (0.5 / h)).0;
    }
    let mut r = [0.0; 3];
    for (i, ri) in r.iter_mut().enumerate() {
        let mut s = 0.0;
        for j in 0..3 {
            for k in 0..3 {
                s += levi_civita(i, j, k) * d[j][k];
            }
        }
        *ri = s / vol;
    }
    Ok(ThreeVector(r))
}

/// Physical curl of physical components:
/// `(∇×A)_(B) = h_B (h₁h₂h₃)⁻¹ ε^{Bjk} ∂_j(h_k A_(k))`.
pub fn curl_phys<F>(scale: &dyn ScaleFactors, a: F, xh: &ThreeVector, h: f64) -> Result<ThreeVector>
where
    F: Fn(&ThreeVector) -> ThreeVector,
{
    let hs = scale.checked(xh)?;
    let covariant = |y: &ThreeVector| {
        let f = scale.factors(y);
        let w = a(y);
        ThreeVector([f[0] * w.0[0], f[1] * w.0[1], f[2] * w.0[2]])
    };
    let c = curl(scale, covariant, xh, h)?;
    Ok(ThreeVector([hs[0] * c.0[0], hs[1] * c.0[1], hs[2] * c.0[2]]))
}

/// `∇²W = (h₁h₂h₃)⁻¹ Σ_i ∂_i((h₁h₂h₃/h_i²) ∂_i W)`, one compact stencil per direction.
pub fn laplacian<F>(scale: &dyn ScaleFactors, w: F, xh: &ThreeVector, h: f64) -> Result<f64>
where
    F: Fn(&ThreeVector) -> f64,
{
    let hs = scale.checked(xh)?;
    let vol: f64 = hs.iter().product();
    let flux = |y: &ThreeVector, i: usize| {
        let f = scale.factors(y);
        f[0] * f[1] * f[2] / (f[i] * f[i])
    };
    let w0 = w(xh);
    let mut s = 0.0;
    for i in 0..3 {
        let fp = flux(&shifted3(xh, i, 0.5 * h), i);
        let fm = flux(&shifted3(xh, i, -0.5 * h), i);
        s += fp * (w(&shifted3(xh, i, h)) - w0) - fm * (w0 - w(&shifted3(xh, i, -h)));
    }
    Ok(s / (h * h * vol))
}
