//! Flat spacetime algebra with signature (+,+,+,-) and x⁴ = ct.
//!
//! Component arrays are stored zero-based, so index `3` holds the fourth
//! (time) component.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Tolerance on `max |LᵀDL - D|` for a matrix to count as a Lorentz transform.
pub const TAU_LORENTZ: f64 = 1e-12;
/// Relative width of the null band used by [`classify`].
pub const TAU_NULL: f64 = 1e-12;

macro_rules! vector_ops {
    ($t:ident, $n:expr) => {
        impl Add for $t {
            type Output = $t;
            fn add(self, o: $t) -> $t {
                let mut r = self;
                for i in 0..$n {
                    r.0[i] += o.0[i];
                }
                r
            }
        }
        impl AddAssign for $t {
            fn add_assign(&mut self, o: $t) {
                for i in 0..$n {
                    self.0[i] += o.0[i];
                }
            }
        }
        impl Sub for $t {
            type Output = $t;
            fn sub(self, o: $t) -> $t {
                let mut r = self;
                for i in 0..$n {
                    r.0[i] -= o.0[i];
                }
                r
            }
        }
        impl Neg for $t {
            type Output = $t;
            fn neg(self) -> $t {
                let mut r = self;
                for i in 0..$n {
                    r.0[i] = -r.0[i];
                }
                r
            }
        }
        impl Mul<f64> for $t {
            type Output = $t;
            fn mul(self, k: f64) -> $t {
                let mut r = self;
                for i in 0..$n {
                    r.0[i] *= k;
                }
                r
            }
        }
        impl Mul<$t> for f64 {
            type Output = $t;
            fn mul(self, v: $t) -> $t {
                v * self
            }
        }
        impl Index<usize> for $t {
            type Output = f64;
            fn index(&self, i: usize) -> &f64 {
                &self.0[i]
            }
        }
        impl IndexMut<usize> for $t {
            fn index_mut(&mut self, i: usize) -> &mut f64 {
                &mut self.0[i]
            }
        }
        impl $t {
            pub const ZERO: $t = $t([0.0; $n]);

            /// Largest absolute component.
            pub fn max_abs(&self) -> f64 {
                self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
            }

            /// Euclidean norm of the raw component array.
            pub fn euclid_norm(&self) -> f64 {
                self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
            }

            pub fn is_finite(&self) -> bool {
                self.0.iter().all(|v| v.is_finite())
            }
        }
    };
}

/// Spatial vector with Euclidean inner product δ_ij.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ThreeVector(pub [f64; 3]);

/// Contravariant four-vector `(x¹, x², x³, x⁴)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FourVector(pub [f64; 4]);

/// Covariant four-vector `(w₁, w₂, w₃, w₄)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Covector(pub [f64; 4]);

vector_ops!(ThreeVector, 3);
vector_ops!(FourVector, 4);
vector_ops!(Covector, 4);

impl ThreeVector {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        ThreeVector([x, y, z])
    }

    pub fn unit(i: usize) -> Self {
        let mut v = [0.0; 3];
        v[i] = 1.0;
        ThreeVector(v)
    }

    pub fn dot(&self, o: &ThreeVector) -> f64 {
        self.0[0] * o.0[0] + self.0[1] * o.0[1] + self.0[2] * o.0[2]
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn cross(&self, o: &ThreeVector) -> ThreeVector {
        epsilon_cross(self, o)
    }
}

impl FourVector {
    pub fn new(x1: f64, x2: f64, x3: f64, x4: f64) -> Self {
        FourVector([x1, x2, x3, x4])
    }

    /// Event at position `x` and coordinate time `t`.
    pub fn event(x: &ThreeVector, t: f64, c: f64) -> Self {
        FourVector([x.0[0], x.0[1], x.0[2], c * t])
    }

    pub fn unit(mu: usize) -> Self {
        let mut v = [0.0; 4];
        v[mu] = 1.0;
        FourVector(v)
    }

    pub fn spatial(&self) -> ThreeVector {
        ThreeVector([self.0[0], self.0[1], self.0[2]])
    }

    pub fn lower(&self) -> Covector {
        lower(self)
    }
}

impl Covector {
    pub fn new(w1: f64, w2: f64, w3: f64, w4: f64) -> Self {
        Covector([w1, w2, w3, w4])
    }

    pub fn raise(&self) -> FourVector {
        raise(self)
    }

    /// Contraction `w_μ v^μ`.
    pub fn contract(&self, v: &FourVector) -> f64 {
        (0..4).map(|i| self.0[i] * v.0[i]).sum()
    }
}

/// Lowers an index with d_μν.
pub fn lower(v: &FourVector) -> Covector {
    Covector([v.0[0], v.0[1], v.0[2], -v.0[3]])
}

/// Raises an index with d^μν.
pub fn raise(w: &Covector) -> FourVector {
    FourVector([w.0[0], w.0[1], w.0[2], -w.0[3]])
}

/// Minkowski inner product `δ_ij a^i b^j - a⁴ b⁴`.
pub fn inner4(a: &FourVector, b: &FourVector) -> f64 {
    a.0[0] * b.0[0] + a.0[1] * b.0[1] + a.0[2] * b.0[2] - a.0[3] * b.0[3]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Causal {
    Timelike,
    Spacelike,
    Null,
}

/// Classifies `v` by the sign of `inner4(v, v)` with the default null band.
pub fn classify(v: &FourVector) -> Causal {
    classify_with(v, TAU_NULL)
}

/// Null band is `rel_tol * max(1, |v|²)` with `|v|²` the Euclidean sum of squares.
pub fn classify_with(v: &FourVector, rel_tol: f64) -> Causal {
    let q = inner4(v, v);
    let band = rel_tol * v.euclid_norm().powi(2).max(1.0);
    if q.abs() <= band {
        Causal::Null
    } else if q < 0.0 {
        Causal::Timelike
    } else {
        Causal::Spacelike
    }
}

/// Dense 4×4 array of real components; index placement is set by context.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Tensor2(pub [[f64; 4]; 4]);

/// The Minkowski metric d_μν. It is its own inverse.
pub const MINKOWSKI: Tensor2 = Tensor2([
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0],
    [0.0, 0.0, 0.0, -1.0],
]);

pub const IDENTITY4: Tensor2 = Tensor2([
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
]);

impl Tensor2 {
    pub const ZERO: Tensor2 = Tensor2([[0.0; 4]; 4]);

    pub fn diag(d: [f64; 4]) -> Self {
        let mut m = Tensor2::ZERO;
        for i in 0..4 {
            m.0[i][i] = d[i];
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut m = Tensor2::ZERO;
        for i in 0..4 {
            for j in 0..4 {
                m.0[i][j] = self.0[j][i];
            }
        }
        m
    }

    pub fn matmul(&self, o: &Tensor2) -> Self {
        let mut m = Tensor2::ZERO;
        for i in 0..4 {
            for j in 0..4 {
                let mut s = 0.0;
                for k in 0..4 {
                    s += self.0[i][k] * o.0[k][j];
                }
                m.0[i][j] = s;
            }
        }
        m
    }

    pub fn apply(&self, v: &FourVector) -> FourVector {
        let mut r = [0.0; 4];
        for (i, ri) in r.iter_mut().enumerate() {
            *ri = (0..4).map(|k| self.0[i][k] * v.0[k]).sum();
        }
        FourVector(r)
    }

    /// `Σ_μν self[μ][ν] a^μ b^ν`.
    pub fn bilinear(&self, a: &FourVector, b: &FourVector) -> f64 {
        let mut s = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                s += self.0[i][j] * a.0[i] * b.0[j];
            }
        }
        s
    }

    pub fn trace(&self) -> f64 {
        (0..4).map(|i| self.0[i][i]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_symmetric(&self) -> bool {
        (0..4).all(|i| (0..4).all(|j| self.0[i][j] == self.0[j][i]))
    }

    pub fn determinant(&self) -> f64 {
        self.to_na().determinant()
    }

    pub fn inverse(&self) -> Option<Tensor2> {
        self.to_na().try_inverse().map(Tensor2::from_na)
    }

    pub fn to_na(&self) -> nalgebra::Matrix4<f64> {
        nalgebra::Matrix4::from_fn(|i, j| self.0[i][j])
    }

    pub fn from_na(m: nalgebra::Matrix4<f64>) -> Self {
        let mut t = Tensor2::ZERO;
        for i in 0..4 {
            for j in 0..4 {
                t.0[i][j] = m[(i, j)];
            }
        }
        t
    }
}

impl Add for Tensor2 {
    type Output = Tensor2;
    fn add(self, o: Tensor2) -> Tensor2 {
        let mut m = self;
        for i in 0..4 {
            for j in 0..4 {
                m.0[i][j] += o.0[i][j];
            }
        }
        m
    }
}

impl Sub for Tensor2 {
    type Output = Tensor2;
    fn sub(self, o: Tensor2) -> Tensor2 {
        let mut m = self;
        for i in 0..4 {
            for j in 0..4 {
                m.0[i][j] -= o.0[i][j];
            }
        }
        m
    }
}

impl Mul<f64> for Tensor2 {
    type Output = Tensor2;
    fn mul(self, k: f64) -> Tensor2 {
        let mut m = self;
        for row in m.0.iter_mut() {
            for v in row.iter_mut() {
                *v *= k;
            }
        }
        m
    }
}

/// Inhomogeneous Lorentz transform `x̂ = L x + c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzTransform {
    l: Tensor2,
    a: Tensor2,
    translation: FourVector,
}

/// `max |LᵀDL - D|`.
pub fn lorentz_residual(l: &Tensor2) -> f64 {
    (l.transpose().matmul(&MINKOWSKI).matmul(l) - MINKOWSKI).max_abs()
}

fn rotation3_to_tensor(r: &nalgebra::Matrix3<f64>) -> Tensor2 {
    let mut m = IDENTITY4;
    for i in 0..3 {
        for j in 0..3 {
            m.0[i][j] = r[(i, j)];
        }
    }
    m
}

impl LorentzTransform {
    pub fn identity() -> Self {
        LorentzTransform { l: IDENTITY4, a: IDENTITY4, translation: FourVector::ZERO }
    }

    /// Builds from a raw matrix, rejecting it when `LᵀDL` misses `D` by more than [`TAU_LORENTZ`].
    pub fn from_matrix(l: Tensor2, translation: FourVector) -> Result<Self> {
        let residual = lorentz_residual(&l);
        if !(residual <= TAU_LORENTZ) {
            return Err(Error::NotLorentz { residual });
        }
        Ok(Self::unchecked(l, translation))
    }

    // A = D Lᵀ D is the exact inverse whenever LᵀDL = D.
    fn unchecked(l: Tensor2, translation: FourVector) -> Self {
        let a = MINKOWSKI.matmul(&l.transpose()).matmul(&MINKOWSKI);
        LorentzTransform { l, a, translation }
    }

    /// Pure boost with frame velocity `v`, passive convention: the new frame moves with `v`.
    pub fn boost(v: &ThreeVector, c: f64) -> Result<Self> {
        let speed = v.norm();
        if !(speed < c) {
            return Err(Error::SpeedNotSubluminal { speed, c });
        }
        if speed == 0.0 {
            return Ok(Self::identity());
        }
        let beta = speed / c;
        let gamma = 1.0 / (1.0 - beta * beta).sqrt();
        let mut b = IDENTITY4;
        b.0[0][0] = gamma;
        b.0[0][3] = -gamma * beta;
        b.0[3][0] = -gamma * beta;
        b.0[3][3] = gamma;
        let r = rotation3_to_tensor(&rotation_onto_e1(&(*v * (1.0 / speed))));
        let l = r.transpose().matmul(&b).matmul(&r);
        Ok(Self::unchecked(l, FourVector::ZERO))
    }

    /// Spatial rotation by `angle` about `axis` (right-handed, active on components).
    pub fn rotation(axis: &ThreeVector, angle: f64) -> Result<Self> {
        let n = axis.norm();
        if !(n > 0.0) {
            return Err(Error::InvalidArgument("rotation axis must be non-zero".into()));
        }
        let ax = nalgebra::Unit::new_normalize(nalgebra::Vector3::from(axis.0));
        let r = nalgebra::Rotation3::from_axis_angle(&ax, angle);
        Ok(Self::unchecked(rotation3_to_tensor(r.matrix()), FourVector::ZERO))
    }

    pub fn with_translation(mut self, c: FourVector) -> Self {
        self.translation = c;
        self
    }

    pub fn matrix(&self) -> &Tensor2 {
        &self.l
    }

    pub fn inverse_matrix(&self) -> &Tensor2 {
        &self.a
    }

    pub fn translation(&self) -> FourVector {
        self.translation
    }

    pub fn verify(&self) -> f64 {
        lorentz_residual(&self.l)
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &LorentzTransform) -> LorentzTransform {
        let l = self.l.matmul(&other.l);
        let a = other.a.matmul(&self.a);
        let translation = self.l.apply(&other.translation) + self.translation;
        LorentzTransform { l, a, translation }
    }

    pub fn inverse(&self) -> LorentzTransform {
        LorentzTransform { l: self.a, a: self.l, translation: -self.a.apply(&self.translation) }
    }

    pub fn apply_event(&self, x: &FourVector) -> FourVector {
        self.l.apply(x) + self.translation
    }

    pub fn apply_vector(&self, v: &FourVector) -> FourVector {
        self.l.apply(v)
    }

    /// `ŵ_β = a^μ_β w_μ`.
    pub fn apply_covector(&self, w: &Covector) -> Covector {
        let mut r = [0.0; 4];
        for (b, rb) in r.iter_mut().enumerate() {
            *rb = (0..4).map(|m| self.a.0[m][b] * w.0[m]).sum();
        }
        Covector(r)
    }

    pub fn transform_tensor(&self, t: &GeneralTensor) -> GeneralTensor {
        transform_tensor(t, self)
    }
}

/// Rotation taking the unit vector `n` onto ê₁.
fn rotation_onto_e1(n: &ThreeVector) -> nalgebra::Matrix3<f64> {
    let from = nalgebra::Vector3::from(n.0);
    let to = nalgebra::Vector3::x();
    match nalgebra::Rotation3::rotation_between(&from, &to) {
        Some(r) => *r.matrix(),
        // antiparallel: half turn about ê₃
        None => *nalgebra::Rotation3::from_axis_angle(&nalgebra::Vector3::z_axis(), std::f64::consts::PI)
            .matrix(),
    }
}

/// Dense tensor with `r` contravariant and `s` covariant slots (contravariant first),
/// components in row-major order over the multi-index.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralTensor {
    r: usize,
    s: usize,
    data: Vec<f64>,
}

impl GeneralTensor {
    pub fn zeros(r: usize, s: usize) -> Result<Self> {
        if r + s > 4 {
            return Err(Error::OrderTooLarge { order: r + s });
        }
        Ok(GeneralTensor { r, s, data: vec![0.0; 4usize.pow((r + s) as u32)] })
    }

    pub fn from_vec(r: usize, s: usize, data: Vec<f64>) -> Result<Self> {
        let mut t = Self::zeros(r, s)?;
        if data.len() != t.data.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} components, got {}",
                t.data.len(),
                data.len()
            )));
        }
        t.data = data;
        Ok(t)
    }

    pub fn scalar(v: f64) -> Self {
        GeneralTensor { r: 0, s: 0, data: vec![v] }
    }

    pub fn from_vector(v: &FourVector) -> Self {
        GeneralTensor { r: 1, s: 0, data: v.0.to_vec() }
    }

    pub fn from_covector(w: &Covector) -> Self {
        GeneralTensor { r: 0, s: 1, data: w.0.to_vec() }
    }

    /// Rank-2 tensor of the given variance from a 4×4 array.
    pub fn from_tensor2(m: &Tensor2, r: usize, s: usize) -> Result<Self> {
        if r + s != 2 {
            return Err(Error::InvalidArgument("rank must be 2".into()));
        }
        Ok(GeneralTensor { r, s, data: m.0.iter().flatten().copied().collect() })
    }

    pub fn contravariant_order(&self) -> usize {
        self.r
    }

    pub fn covariant_order(&self) -> usize {
        self.s
    }

    pub fn rank(&self) -> usize {
        self.r + self.s
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    fn offset(&self, idx: &[usize]) -> usize {
        assert_eq!(idx.len(), self.rank(), "multi-index length must equal rank");
        idx.iter().fold(0, |o, &i| {
            assert!(i < 4, "index out of range");
            o * 4 + i
        })
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: f64) {
        let o = self.offset(idx);
        self.data[o] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Contracts slot `slot` with a matrix: `new[..a..] = Σ_b m[a][b] old[..b..]`,
    /// or with the transpose when `transpose` is set.
    pub fn apply_slot(&self, slot: usize, m: &Tensor2, transpose: bool) -> GeneralTensor {
        let rank = self.rank();
        assert!(slot < rank);
        let stride = 4usize.pow((rank - 1 - slot) as u32);
        let mut out = vec![0.0; self.data.len()];
        for (o, out_v) in out.iter_mut().enumerate() {
            let a = (o / stride) % 4;
            let base = o - a * stride;
            let mut acc = 0.0;
            for b in 0..4 {
                let coef = if transpose { m.0[b][a] } else { m.0[a][b] };
                acc += coef * self.data[base + b * stride];
            }
            *out_v = acc;
        }
        GeneralTensor { r: self.r, s: self.s, data: out }
    }
}

impl Sub for &GeneralTensor {
    type Output = GeneralTensor;
    fn sub(self, o: &GeneralTensor) -> GeneralTensor {
        assert_eq!((self.r, self.s), (o.r, o.s));
        GeneralTensor {
            r: self.r,
            s: self.s,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// `l^α_γ` on each contravariant slot and `a^ν_μ` on each covariant slot.
pub fn transform_tensor(t: &GeneralTensor, lt: &LorentzTransform) -> GeneralTensor {
    let mut out = t.clone();
    for slot in 0..t.r {
        out = out.apply_slot(slot, &lt.l, false);
    }
    for slot in t.r..t.rank() {
        out = out.apply_slot(slot, &lt.a, true);
    }
    out
}

/// ε_ijk with ε₁₂₃ = +1 (zero-based indices).
pub fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// `(v × w)^i = ε_ijk v^j w^k`.
pub fn epsilon_cross(v: &ThreeVector, w: &ThreeVector) -> ThreeVector {
    let mut r = [0.0; 3];
    for (i, ri) in r.iter_mut().enumerate() {
        for j in 0..3 {
            for k in 0..3 {
                let e = levi_civita(i, j, k);
                if e != 0.0 {
                    *ri += e * v.0[j] * w.0[k];
                }
            }
        }
    }
    ThreeVector(r)
}

/// Curl `∇×B` by central differences. Note `ε_ijk ∂_k B^j = -(∇×B)^i`;
/// the returned value is the right-handed curl `ε_ijk ∂_j B^k`.
pub fn epsilon_curl<F>(b: F, x: &ThreeVector, h: f64) -> ThreeVector
where
    F: Fn(&ThreeVector) -> ThreeVector,
{
    let mut grad = [[0.0; 3]; 3]; // grad[k][j] = ∂_k B^j
    for (k, row) in grad.iter_mut().enumerate() {
        let mut xp = *x;
        let mut xm = *x;
        xp.0[k] += h;
        xm.0[k] -= h;
        let d = (b(&xp) - b(&xm)) * (0.5 / h);
        *row = d.0;
    }
    let mut r = [0.0; 3];
    for (i, ri) in r.iter_mut().enumerate() {
        for j in 0..3 {
            for k in 0..3 {
                let e = levi_civita(i, j, k);
                if e != 0.0 {
                    *ri -= e * grad[k][j];
                }
            }
        }
    }
    ThreeVector(r)
}

/// `Σᵢ ∂²W/∂(xⁱ)² - ∂²W/∂(x⁴)²` on the 9-point central stencil.
pub fn dalembertian<F>(w: F, x: &FourVector, h: f64) -> f64
where
    F: Fn(&FourVector) -> f64,
{
    let w0 = w(x);
    let mut acc = 0.0;
    for mu in 0..4 {
        let mut xp = *x;
        let mut xm = *x;
        xp.0[mu] += h;
        xm.0[mu] -= h;
        let d2 = (w(&xp) - 2.0 * w0 + w(&xm)) / (h * h);
        acc += MINKOWSKI.0[mu][mu] * d2;
    }
    acc
}
