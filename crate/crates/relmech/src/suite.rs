//! Identity checks shared by the `identity_suite` scenario and the acceptance runner.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relmech_core::curvilinear::{self, chart_by_name, Chart, ScaleFactors};
use relmech_core::electromagnetism::{
    divergence_identity_residual, faraday_from_potential, gauge_transform, integrate_lorentz, ChargeCurrent, FaradayTensor,
};
use relmech_core::field::AnalyticScalar;
use relmech_core::fluids::{self, FluidFields};
use relmech_core::gravity::{EffectiveMetric, Potential};
use relmech_core::minkowski::{classify, inner4, Causal, LorentzTransform};
use relmech_core::orbits::{integrate_geodesic, static_first_integrals, OrbitConfig};
use relmech_core::worldline::{energy, IntegratorSettings, ParticleState, Worldline};
use relmech_core::{Covector, FourVector, Result, ThreeVector};

use crate::report::Check;

/// `c²` in SI units, exactly.
pub const C_SI: f64 = 299_792_458.0;
pub const ONE_KG_REST_ENERGY: f64 = 8.987551787368176e16;

fn order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

fn random_unit(rng: &mut ChaCha8Rng) -> ThreeVector {
    loop {
        let v = ThreeVector::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v * (1.0 / n);
        }
    }
}

fn random_velocity(rng: &mut ChaCha8Rng, c: f64, max_beta: f64) -> ThreeVector {
    random_unit(rng) * (c * rng.gen_range(0.0..max_beta))
}

fn random_four(rng: &mut ChaCha8Rng) -> FourVector {
    FourVector::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn random_transform(rng: &mut ChaCha8Rng, c: f64) -> LorentzTransform {
    if rng.gen_bool(0.5) {
        LorentzTransform::boost(&random_velocity(rng, c, 0.95), c).expect("subluminal")
    } else {
        LorentzTransform::rotation(&random_unit(rng), rng.gen_range(-PI..PI)).expect("non-zero axis")
    }
}

/// Relativistic sum of a frame velocity `u` and a velocity `v` measured in that frame.
pub fn velocity_addition(u: &ThreeVector, v: &ThreeVector, c: f64) -> ThreeVector {
    let c2 = c * c;
    let gu = 1.0 / (1.0 - u.norm_sq() / c2).sqrt();
    let uv = u.dot(v);
    (*u + *v * (1.0 / gu) + *u * (gu / (c2 * (1.0 + gu)) * uv)) * (1.0 / (1.0 + uv / c2))
}

/// Group closure, invariance of the inner product and causal class, and boost composition.
pub fn lorentz_group(seed: u64, transforms: usize, vectors: usize) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = 1.0;
    let mut worst_verify = 0.0f64;
    for _ in 0..transforms {
        let l = random_transform(&mut rng, c);
        worst_verify = worst_verify.max(l.verify());
    }

    let mut worst_inner = 0.0f64;
    let mut flips = 0usize;
    let mut null_missed = 0usize;
    for k in 0..vectors {
        let l = random_transform(&mut rng, c).compose(&random_transform(&mut rng, c));
        let v = random_four(&mut rng);
        let w = random_four(&mut rng);
        let (lv, lw) = (l.apply_vector(&v), l.apply_vector(&w));
        let scale = v.euclid_norm() * w.euclid_norm() + lv.euclid_norm() * lw.euclid_norm();
        worst_inner = worst_inner.max((inner4(&lv, &lw) - inner4(&v, &w)).abs() / scale);
        // every tenth vector is null, so the null class gets exercised too
        let v = if k % 10 == 0 {
            let n = random_unit(&mut rng);
            let n = FourVector::new(n.0[0], n.0[1], n.0[2], 1.0);
            if classify(&n) != Causal::Null {
                null_missed += 1;
            }
            n
        } else {
            v
        };
        if classify(&v) != classify(&l.apply_vector(&v)) {
            flips += 1;
        }
    }

    let mut worst_addition = 0.0f64;
    let mut worst_collinear = 0.0f64;
    for _ in 0..transforms {
        let u = random_velocity(&mut rng, c, 0.9);
        let v = random_velocity(&mut rng, c, 0.9);
        let l = LorentzTransform::boost(&v, c).unwrap().compose(&LorentzTransform::boost(&u, c).unwrap());
        // the composite frame's time axis, seen from the original frame
        let t = l.inverse().apply_vector(&FourVector::new(0.0, 0.0, 0.0, 1.0));
        let measured = t.spatial() * (c / t.0[3]);
        worst_addition = worst_addition.max((measured - velocity_addition(&u, &v, c)).max_abs() / c);

        let dir = random_unit(&mut rng);
        let (a, b) = (rng.gen_range(-0.9..0.9), rng.gen_range(-0.9..0.9));
        let comp = LorentzTransform::boost(&(dir * b), c).unwrap().compose(&LorentzTransform::boost(&(dir * a), c).unwrap());
        let direct = LorentzTransform::boost(&(dir * ((a + b) / (1.0 + a * b))), c).unwrap();
        worst_collinear = worst_collinear.max((*comp.matrix() - *direct.matrix()).max_abs());
    }

    vec![
        Check::at_most("lorentz_verify", worst_verify, 1e-12),
        Check::at_most("inner_product_invariance", worst_inner, 1e-12),
        Check::at_most("classification_flips", flips as f64, 0.0),
        Check::at_most("null_vectors_misclassified", null_missed as f64, 0.0),
        Check::at_most("velocity_addition", worst_addition, 1e-12),
        Check::at_most("collinear_boost_composition", worst_collinear, 1e-12),
    ]
}

/// `(E - mc² - ½mβ²c²) / (mc²β⁴)` for β = 0.2, 0.1, 0.05, 0.025, plus rest energies.
pub fn energy_expansion() -> Vec<Check> {
    let (m, c) = (1.0, C_SI);
    let ratios: Vec<f64> = [0.2, 0.1, 0.05, 0.025]
        .iter()
        .map(|&b| {
            let e = energy(m, &ThreeVector::new(b * c, 0.0, 0.0), c).unwrap();
            (e - m * c * c - 0.5 * m * b * b * c * c) / (m * c * c * b.powi(4))
        })
        .collect();
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    let rest = energy(m, &ThreeVector::ZERO, c).unwrap();
    let one_kg = energy(1.0, &ThreeVector::ZERO, C_SI).unwrap();
    vec![
        Check::at_most("energy_remainder_spread", hi / lo - 1.0, 0.1),
        Check::at_most("energy_remainder_vs_three_eighths", (ratios[3] / 0.375 - 1.0).abs(), 0.1),
        Check::at_most("rest_energy", (rest - m * c * c).abs(), 0.0),
        Check::at_most("one_kg_rest_energy", (one_kg - ONE_KG_REST_ENERGY).abs() / ONE_KG_REST_ENERGY, 1e-15),
    ]
}

/// Field from `A` and from `A - ∂Λ` for random cubic `Λ`.
pub fn gauge_invariance(seed: u64, gauges: usize) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = |x: &FourVector| {
        Covector::new(x.0[1] * x.0[3], -x.0[0] + 0.5 * x.0[2], x.0[2] * x.0[0], x.0[0] * x.0[1] - x.0[3])
    };
    let h = 1e-3;
    let mut worst = 0.0f64;
    for _ in 0..gauges {
        // Λ = Σ a_μ x^μ + Σ b_μν x^μ x^ν + Σ c_μνλ x^μ x^ν x^λ over μ ≤ ν ≤ λ
        let lin: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-2.0..2.0));
        let quad: Vec<(usize, usize, f64)> =
            (0..4).flat_map(|i| (i..4).map(move |j| (i, j))).map(|(i, j)| (i, j, rng.gen_range(-2.0..2.0))).collect();
        let cubic: Vec<(usize, usize, usize, f64)> = (0..4)
            .flat_map(|i| (i..4).flat_map(move |j| (j..4).map(move |k| (i, j, k))))
            .map(|(i, j, k)| (i, j, k, rng.gen_range(-2.0..2.0)))
            .collect();
        let (q2, c2) = (quad.clone(), cubic.clone());
        let value = move |x: &FourVector| {
            let y = &x.0;
            (0..4).map(|i| lin[i] * y[i]).sum::<f64>()
                + q2.iter().map(|&(i, j, b)| b * y[i] * y[j]).sum::<f64>()
                + c2.iter().map(|&(i, j, k, cc)| cc * y[i] * y[j] * y[k]).sum::<f64>()
        };
        let gradient = move |x: &FourVector| {
            let y = &x.0;
            let mut g = lin;
            for &(i, j, b) in &quad {
                g[i] += b * y[j];
                g[j] += b * y[i];
            }
            for &(i, j, k, cc) in &cubic {
                g[i] += cc * y[j] * y[k];
                g[j] += cc * y[i] * y[k];
                g[k] += cc * y[i] * y[j];
            }
            Covector(g)
        };
        let lambda = AnalyticScalar { value, gradient };
        let x = random_four(&mut rng);
        let g = gauge_transform(a, lambda, h);
        let f0 = faraday_from_potential(a, &x, h).covariant();
        let f1 = faraday_from_potential(|y: &FourVector| g.eval(y), &x, h).covariant();
        worst = worst.max((f0 - f1).max_abs() / f0.max_abs().max(1.0));
    }
    vec![Check::at_most("gauge_invariance", worst, 1e-10)]
}

fn no_current(_: &FourVector) -> ChargeCurrent {
    ChargeCurrent::default()
}

/// Observed orders of the stress-energy divergence residual across three halvings of `h`.
pub fn em_divergence_orders() -> Vec<Check> {
    let n = ThreeVector::new(1.0, 2.0, 2.0) * (1.0 / 3.0);
    let pol = ThreeVector::new(2.0, -1.0, 0.0) * (1.0 / 5f64.sqrt());
    let k = 2.0;
    let wave = move |x: &FourVector| {
        let s = (k * (n.dot(&x.spatial()) - x.0[3])).sin();
        FaradayTensor::assemble(pol * s, n.cross(&pol) * s)
    };
    let coulomb = |x: &FourVector| {
        let p = x.spatial();
        FaradayTensor::assemble(p * (1.0 / p.norm().powi(3)), ThreeVector::ZERO)
    };
    let hs = [0.04, 0.02, 0.01];
    let mut checks = Vec::new();
    let xw = FourVector::new(0.3, 0.1, -0.2, 0.7);
    let xc = FourVector::new(0.8, -0.5, 0.4, 0.1);
    let rw: Vec<f64> = hs.iter().map(|&h| divergence_identity_residual(wave, no_current, &xw, h, 1.0).max_abs()).collect();
    let rc: Vec<f64> = hs.iter().map(|&h| divergence_identity_residual(coulomb, no_current, &xc, h, 1.0).max_abs()).collect();
    for (name, r) in [("plane_wave", rw), ("coulomb", rc)] {
        for i in 0..2 {
            checks.push(Check::at_most(format!("em_divergence_order_{name}_{}", i + 1), (order(r[i], r[i + 1]) - 2.0).abs(), 0.2));
        }
    }
    checks
}

/// Smooth flow around a point mass used for the `1/c` scaling checks.
pub fn expansion_fields(c: f64) -> FluidFields {
    FluidFields::dust(
        EffectiveMetric::static_w(Arc::new(Potential::PointMass { gm: 1.0 }), c),
        Arc::new(move |y: &FourVector| 1.0 + 0.2 * (y.0[0] - 0.5 * y.0[3] / c).sin()),
        Arc::new(|_| FourVector::ZERO),
    )
    .with_coordinate_velocity(Arc::new(move |y: &FourVector| {
        let t = y.0[3] / c;
        ThreeVector::new(0.3 * (y.0[1] + t).cos(), 0.2 * y.0[0], -0.1 * y.0[2] * t)
    }))
    .with_pressure(Arc::new(move |y: &FourVector| 0.5 + 0.1 * (y.0[0] * y.0[1]).cos() + 0.05 * y.0[3] / c))
}

/// Relativistic corrections to Euler and continuity fall off as `c⁻²` and `c⁻⁴`.
pub fn newtonian_scaling() -> Result<Vec<Check>> {
    let x = FourVector::new(2.0, 1.0, 0.5, 0.0);
    let h = 1e-4;
    let cs = [20.0, 40.0, 80.0];
    let mut bundle = Vec::new();
    let mut gap = Vec::new();
    let mut remainder = Vec::new();
    for &c in &cs {
        let f = expansion_fields(c);
        let b = fluids::euler_expansion_bundle(&f, &x, h)?;
        bundle.push(b.norm());
        remainder.push((b - fluids::euler_expansion_correction(&f, &x, h)?).norm());
        let (exact, expanded) = fluids::static_continuity_expansion_residual(&f, &x, h)?;
        gap.push((exact - expanded).abs());
    }
    let mut checks = Vec::new();
    for i in 0..2 {
        checks.push(Check::at_most(format!("euler_bundle_ratio_{}", i + 1), (bundle[i] / bundle[i + 1] / 4.0 - 1.0).abs(), 0.15));
    }
    for i in 0..2 {
        checks.push(Check::at_most(format!("continuity_gap_ratio_{}", i + 1), (gap[i] / gap[i + 1] / 16.0 - 1.0).abs(), 0.2));
    }
    checks.push(Check::at_most("euler_remainder_ratio", (remainder[0] / remainder[1] / 16.0 - 1.0).abs(), 0.2));
    Ok(checks)
}

fn charged_plasma(c: f64, sigma: f64, eta: f64, pressure: bool) -> FluidFields {
    let metric = EffectiveMetric::static_w(Arc::new(Potential::PointMass { gm: 0.5 }), c);
    let f = FluidFields::dust(metric, Arc::new(|y: &FourVector| 1.0 + 0.1 * (y.0[0] + y.0[1]).cos()), Arc::new(|_| FourVector::ZERO))
        .with_coordinate_velocity(Arc::new(move |y: &FourVector| {
            ThreeVector::new(0.2 * (y.0[1] + y.0[3] / c).sin(), 0.1 * y.0[0], 0.05 * y.0[2] * y.0[2])
        }));
    let f = if pressure {
        f.with_pressure(Arc::new(|y: &FourVector| 0.3 + 0.1 * (y.0[0] * y.0[2]).sin() + 0.02 * y.0[3]))
    } else {
        f.with_pressure(Arc::new(|_| 0.0))
    };
    f.with_charge(
        Arc::new(move |_| sigma),
        Arc::new(|y: &FourVector| FaradayTensor::assemble(ThreeVector::new(0.1, y.0[1] * 0.05, 0.0), ThreeVector::new(0.0, 0.0, 0.7 + 0.1 * y.0[0]))),
    )
    .with_viscosity(Arc::new(move |_| eta), Arc::new(move |_| 0.5 * eta))
}

/// Residual families with the extra physics switched off must agree bit for bit.
pub fn degeneration_chain(seed: u64, events: usize) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (c, h) = (3.0, 1e-3);
    let mut mismatches = [0usize; 3];
    for _ in 0..events {
        let x = FourVector::new(rng.gen_range(0.8..1.4), rng.gen_range(-0.6..0.6), rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
        let v = charged_plasma(c, 0.4, 0.0, true);
        if fluids::navier_stokes_residual(&v, &x, h)? != fluids::plasma_euler_residual(&v, &x, h)?
            || fluids::viscous_continuity_residual(&v, &x, h)? != fluids::plasma_continuity_residual(&v, &x, h)?
        {
            mismatches[0] += 1;
        }
        let n = charged_plasma(c, 0.0, 0.3, true);
        if fluids::plasma_euler_residual(&n, &x, h)? != fluids::euler_residual_perfect_fluid(&n, &x, h)?
            || fluids::plasma_continuity_residual(&n, &x, h)? != fluids::continuity_residual_perfect_fluid(&n, &x, h)?
        {
            mismatches[1] += 1;
        }
        let d = charged_plasma(c, 0.4, 0.3, false);
        if fluids::euler_residual_perfect_fluid(&d, &x, h)? != fluids::euler_residual_dust(&d, &x, h)?
            || fluids::continuity_residual_perfect_fluid(&d, &x, h)? != fluids::continuity_residual_dust(&d, &x, h)?
        {
            mismatches[2] += 1;
        }
    }
    Ok(vec![
        Check::at_most("viscous_to_plasma_mismatches", mismatches[0] as f64, 0.0),
        Check::at_most("plasma_to_perfect_mismatches", mismatches[1] as f64, 0.0),
        Check::at_most("perfect_to_dust_mismatches", mismatches[2] as f64, 0.0),
    ])
}

type ScalarFn = fn(&ThreeVector) -> f64;
type VectorFn = fn(&ThreeVector) -> ThreeVector;

const P: [f64; 3] = [0.3, -0.2, 2.5];

fn off(x: &ThreeVector) -> ThreeVector {
    *x - ThreeVector(P)
}

/// `(f, ∇f, ∇²f)`: three polynomials and two harmonic functions.
fn scalar_fields() -> [(ScalarFn, VectorFn, ScalarFn); 5] {
    [
        (
            |x| x.0[0] * x.0[0] * x.0[1] + x.0[2].powi(3),
            |x| ThreeVector::new(2.0 * x.0[0] * x.0[1], x.0[0] * x.0[0], 3.0 * x.0[2] * x.0[2]),
            |x| 2.0 * x.0[1] + 6.0 * x.0[2],
        ),
        (
            |x| x.0[0] * x.0[1] * x.0[2] + x.0[0].powi(4),
            |x| ThreeVector::new(x.0[1] * x.0[2] + 4.0 * x.0[0].powi(3), x.0[0] * x.0[2], x.0[0] * x.0[1]),
            |x| 12.0 * x.0[0] * x.0[0],
        ),
        (
            |x| x.0[0] * x.0[0] + 2.0 * x.0[1] * x.0[1] - x.0[2] * x.0[2] + x.0[0] * x.0[2],
            |x| ThreeVector::new(2.0 * x.0[0] + x.0[2], 4.0 * x.0[1], x.0[0] - 2.0 * x.0[2]),
            |_| 4.0,
        ),
        (|x| 1.0 / off(x).norm(), |x| off(x) * (-1.0 / off(x).norm().powi(3)), |_| 0.0),
        (
            |x| x.0[0].exp() * x.0[1].cos(),
            |x| ThreeVector::new(x.0[0].exp() * x.0[1].cos(), -x.0[0].exp() * x.0[1].sin(), 0.0),
            |_| 0.0,
        ),
    ]
}

/// `(A, ∇·A, ∇×A)`: three polynomials and the gradients of the two harmonic functions.
fn vector_fields() -> [(VectorFn, ScalarFn, VectorFn); 5] {
    [
        (
            |x| ThreeVector::new(x.0[1] * x.0[2], x.0[0] * x.0[0], x.0[0] * x.0[1] * x.0[2]),
            |x| x.0[0] * x.0[1],
            |x| ThreeVector::new(x.0[0] * x.0[2], x.0[1] - x.0[1] * x.0[2], 2.0 * x.0[0] - x.0[2]),
        ),
        (
            |x| ThreeVector::new(x.0[0].powi(3), x.0[1] * x.0[2] * x.0[2], -x.0[0] * x.0[1]),
            |x| 3.0 * x.0[0] * x.0[0] + x.0[2] * x.0[2],
            |x| ThreeVector::new(-x.0[0] - 2.0 * x.0[1] * x.0[2], x.0[1], 0.0),
        ),
        (|x| ThreeVector::new(x.0[2], x.0[0], x.0[1] * x.0[1]), |_| 0.0, |x| ThreeVector::new(2.0 * x.0[1], 1.0, 1.0)),
        (|x| off(x) * (-1.0 / off(x).norm().powi(3)), |_| 0.0, |_| ThreeVector::ZERO),
        (
            |x| ThreeVector::new(x.0[0].exp() * x.0[1].cos(), -x.0[0].exp() * x.0[1].sin(), 0.0),
            |_| 0.0,
            |_| ThreeVector::ZERO,
        ),
    ]
}

fn unit_basis(chart: &dyn Chart, xh: &ThreeVector) -> [ThreeVector; 3] {
    let j = chart.jacobian(xh);
    std::array::from_fn(|a| {
        let v = ThreeVector::new(j[0][a], j[1][a], j[2][a]);
        v * (1.0 / v.norm())
    })
}

fn to_physical(chart: &dyn Chart, xh: &ThreeVector, v: &ThreeVector) -> ThreeVector {
    let e = unit_basis(chart, xh);
    ThreeVector::new(e[0].dot(v), e[1].dot(v), e[2].dot(v))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

/// Random points away from the coordinate axes.
pub fn chart_point(name: &str, rng: &mut ChaCha8Rng) -> ThreeVector {
    match name {
        "spherical" => ThreeVector::new(rng.gen_range(0.8..2.0), rng.gen_range(0.3..2.8), rng.gen_range(-3.0..3.0)),
        "cylindrical" => ThreeVector::new(rng.gen_range(0.5..2.0), rng.gen_range(-3.0..3.0), rng.gen_range(-1.0..1.0)),
        _ => ThreeVector::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
    }
}

/// Largest relative disagreement of grad/div/curl/Laplacian in `chart` with Cartesian evaluation.
pub fn curvilinear_mismatch(chart: &dyn Chart, points: &[ThreeVector], h: f64) -> Result<f64> {
    let sf: &dyn ScaleFactors = chart
        .scale_factors()
        .ok_or_else(|| relmech_core::Error::InvalidArgument(format!("chart {} has no scale factors", chart.name())))?;
    let mut worst = 0.0f64;
    for xh in points {
        let x = chart.inverse(xh);
        for (f, grad, lap) in scalar_fields() {
            let fh = |y: &ThreeVector| f(&chart.inverse(y));
            let g = curvilinear::grad_phys(sf, fh, xh, h)?;
            let want = to_physical(chart, xh, &grad(&x));
            for a in 0..3 {
                worst = worst.max(rel(g.0[a], want.0[a]));
            }
            worst = worst.max(rel(curvilinear::laplacian(sf, fh, xh, h)?, lap(&x)));
        }
        for (f, div, curl) in vector_fields() {
            let vh = |y: &ThreeVector| to_physical(chart, y, &f(&chart.inverse(y)));
            worst = worst.max(rel(curvilinear::div_phys(sf, vh, xh, h)?, div(&x)));
            let cu = curvilinear::curl_phys(sf, vh, xh, h)?;
            let want = to_physical(chart, xh, &curl(&x));
            for a in 0..3 {
                worst = worst.max(rel(cu.0[a], want.0[a]));
            }
        }
    }
    Ok(worst)
}

/// Operator agreement in each chart, and the order at which `1/r` is harmonic in spherical coordinates.
pub fn curvilinear_operators(seed: u64, charts: &[&str], points: usize) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    for name in charts {
        let chart = chart_by_name(name, curvilinear::DEFAULT_MARGIN)?;
        let pts: Vec<ThreeVector> = (0..points).map(|_| chart_point(name, &mut rng)).collect();
        checks.push(Check::at_most(format!("operators_{name}"), curvilinear_mismatch(chart.as_ref(), &pts, 1e-4)?, 1e-6));
    }
    let s = curvilinear::Spherical::default();
    let xh = ThreeVector::new(1.3, 1.1, 0.4);
    let lap = |h: f64| curvilinear::laplacian(&s, |y: &ThreeVector| 1.0 / y.0[0], &xh, h).map(f64::abs);
    let r: Vec<f64> = [0.04, 0.02, 0.01].iter().map(|&h| lap(h)).collect::<Result<_>>()?;
    for i in 0..2 {
        checks.push(Check::at_most(format!("inverse_r_harmonic_order_{}", i + 1), (order(r[i], r[i + 1]) - 2.0).abs(), 0.2));
    }
    Ok(checks)
}

/// Initial state at `x` moving with coordinate velocity `v`, normalized with the metric.
pub fn normalized_state(metric: &EffectiveMetric, x: &FourVector, v: &ThreeVector, mass: f64, charge: f64) -> Result<ParticleState> {
    let c = metric.c();
    let t = FourVector::new(v.0[0], v.0[1], v.0[2], c);
    let q = -metric.dot(x, &t, &t)?;
    if !(q > 0.0) {
        return Err(relmech_core::Error::SpeedNotSubluminal { speed: v.norm(), c });
    }
    Ok(ParticleState { x: *x, u: t * (c / q.sqrt()), mass, charge })
}

/// Largest sample-wise gap between two worldlines, positions relative to `max(1, |x|)` and velocities to `c`.
pub fn worldline_deviation(a: &Worldline, b: &Worldline) -> f64 {
    if a.samples.len() != b.samples.len() {
        return f64::INFINITY;
    }
    a.samples.iter().zip(&b.samples).fold(0.0f64, |m, (p, q)| {
        let dx = (p.x - q.x).max_abs() / p.x.max_abs().max(1.0);
        let du = (p.u - q.u).max_abs() / a.c;
        m.max(dx).max(du)
    })
}

/// Charged dust against the Lorentz pusher (flat) and against geodesics (uncharged).
pub fn cross_module(steps: usize) -> Result<Vec<Check>> {
    let settings = IntegratorSettings::default();
    let c = 1.0;
    let flat = EffectiveMetric::flat(c);
    let field = |_: &FourVector| FaradayTensor::assemble(ThreeVector::new(0.2, 0.0, -0.1), ThreeVector::new(0.0, 0.0, 1.0));
    let parcel = normalized_state(&flat, &FourVector::ZERO, &ThreeVector::new(0.3, 0.1, 0.0), 2.0, 0.5)?;
    let dust = fluids::charged_dust_streamline(&parcel, field, &flat, 1e-3, steps, settings)?;
    let lorentz = integrate_lorentz(&parcel, field, 1e-3, steps, c, settings)?;

    let c = 10.0;
    let grav = EffectiveMetric::static_w(Arc::new(Potential::PointMass { gm: 1.0 }), c);
    let parcel = normalized_state(&grav, &FourVector::new(4.0, 0.0, 0.3, 0.0), &ThreeVector::new(0.0, 0.5, 0.05), 1.5, 0.0)?;
    let dust_g = fluids::charged_dust_streamline(&parcel, field, &grav, 1e-2, steps, settings)?;
    let geodesic = integrate_geodesic(&grav, &parcel, 1e-2, steps, settings)?;

    Ok(vec![
        Check::at_most("charged_dust_vs_lorentz", worldline_deviation(&dust, &lorentz), 1e-10),
        Check::at_most("charged_dust_vs_geodesic", worldline_deviation(&dust_g, &geodesic), 1e-12),
    ])
}

/// Largest relative drift of `ε` and `h` along a static-potential worldline.
pub fn first_integral_drift(wl: &Worldline, pot: &Potential) -> Result<(f64, f64)> {
    let c = wl.c;
    let fi0 = static_first_integrals(&wl.state(0), pot, c)?;
    let mut de = 0.0f64;
    let mut dh = 0.0f64;
    for k in 0..wl.samples.len() {
        let fi = static_first_integrals(&wl.state(k), pot, c)?;
        de = de.max(((fi.epsilon - fi0.epsilon) / fi0.epsilon).abs());
        dh = dh.max(((fi.h - fi0.h) / fi0.h).abs());
    }
    Ok((de, dh))
}

/// Kepler revolutions per Julian century.
pub fn revolutions_per_century(cfg: &OrbitConfig) -> f64 {
    36_525.0 * 86_400.0 / cfg.kepler_period()
}

/// Everything that runs in a few seconds.
pub fn identity_checks(seed: u64, chart: &str) -> Result<Vec<Check>> {
    let mut checks = lorentz_group(seed, 1000, 10_000);
    checks.extend(energy_expansion());
    checks.extend(gauge_invariance(seed.wrapping_add(1), 100));
    checks.extend(em_divergence_orders());
    checks.extend(newtonian_scaling()?);
    checks.extend(degeneration_chain(seed.wrapping_add(2), 20)?);
    checks.extend(curvilinear_operators(seed.wrapping_add(3), &[chart], 10)?);
    checks.extend(cross_module(10_000)?);
    Ok(checks)
}
