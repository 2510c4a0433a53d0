//! Field oracles and the central-difference stencils used on them.
//!
//! Oracles are plain closures `Fn(&FourVector) -> V`. They must be free of side
//! effects and safe to call concurrently.

use std::ops::{Mul, Sub};

use crate::minkowski::{Covector, FourVector, ThreeVector};

/// Default finite-difference step, in the field's own length unit.
pub const DEFAULT_STEP: f64 = 1e-4;

/// `x + d·e_μ`.
pub fn shifted(x: &FourVector, mu: usize, d: f64) -> FourVector {
    let mut y = *x;
    y.0[mu] += d;
    y
}

pub fn shifted3(x: &ThreeVector, i: usize, d: f64) -> ThreeVector {
    let mut y = *x;
    y.0[i] += d;
    y
}

/// Central difference `∂f/∂x^μ`.
pub fn partial<V, F>(f: F, x: &FourVector, mu: usize, h: f64) -> V
where
    F: Fn(&FourVector) -> V,
    V: Sub<Output = V> + Mul<f64, Output = V>,
{
    (f(&shifted(x, mu, h)) - f(&shifted(x, mu, -h))) * (0.5 / h)
}

/// Central difference `∂f/∂xⁱ` for a spatial oracle.
pub fn partial3<V, F>(f: F, x: &ThreeVector, i: usize, h: f64) -> V
where
    F: Fn(&ThreeVector) -> V,
    V: Sub<Output = V> + Mul<f64, Output = V>,
{
    (f(&shifted3(x, i, h)) - f(&shifted3(x, i, -h))) * (0.5 / h)
}

/// Central second difference `∂²f/∂xⁱ∂xʲ` for a spatial scalar oracle.
pub fn second_partial3<F>(f: F, x: &ThreeVector, i: usize, j: usize, h: f64) -> f64
where
    F: Fn(&ThreeVector) -> f64,
{
    if i == j {
        (f(&shifted3(x, i, h)) - 2.0 * f(x) + f(&shifted3(x, i, -h))) / (h * h)
    } else {
        let pp = f(&shifted3(&shifted3(x, i, h), j, h));
        let pm = f(&shifted3(&shifted3(x, i, h), j, -h));
        let mp = f(&shifted3(&shifted3(x, i, -h), j, h));
        let mm = f(&shifted3(&shifted3(x, i, -h), j, -h));
        (pp - pm - mp + mm) / (4.0 * h * h)
    }
}

/// Scalar field over spacetime with an overridable gradient.
pub trait ScalarField: Sync {
    fn value(&self, x: &FourVector) -> f64;

    /// `∂_μ Λ`, central differences unless overridden.
    fn gradient(&self, x: &FourVector, h: f64) -> Covector {
        let mut g = [0.0; 4];
        for (mu, gm) in g.iter_mut().enumerate() {
            *gm = partial(|y: &FourVector| self.value(y), x, mu, h);
        }
        Covector(g)
    }
}

impl<F: Fn(&FourVector) -> f64 + Sync> ScalarField for F {
    fn value(&self, x: &FourVector) -> f64 {
        self(x)
    }
}

/// Scalar field given together with its exact gradient.
pub struct AnalyticScalar<V, G> {
    pub value: V,
    pub gradient: G,
}

impl<V, G> ScalarField for AnalyticScalar<V, G>
where
    V: Fn(&FourVector) -> f64 + Sync,
    G: Fn(&FourVector) -> Covector + Sync,
{
    fn value(&self, x: &FourVector) -> f64 {
        (self.value)(x)
    }

    fn gradient(&self, x: &FourVector, _h: f64) -> Covector {
        (self.gradient)(x)
    }
}
