use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;
use relmech_core::electromagnetism::{em_stress_energy, integrate_lorentz, maxwell_residuals, ChargeCurrent, FaradayTensor};
use relmech_core::fluids::{lower_with, projector};
use relmech_core::gravity::{
    christoffel_numeric, covariant_derivative, metric_from_phi, metric_tensor_field, EffectiveMetric, Potential,
};
use relmech_core::minkowski::{
    classify, dalembertian, inner4, Causal, GeneralTensor, LorentzTransform, MINKOWSKI, TAU_LORENTZ, TAU_NULL,
};
use relmech_core::ode::Method;
use relmech_core::orbits::integrate_geodesic;
use relmech_core::worldline::{
    energy, integrate_relativistic, newtonian_force_to_relativistic, IntegratorSettings, ParticleState,
};
use relmech_core::{FourVector, Tensor2, ThreeVector};

fn three(r: f64) -> impl Strategy<Value = ThreeVector> {
    (-r..r, -r..r, -r..r).prop_map(|(a, b, c)| ThreeVector::new(a, b, c))
}

fn four(r: f64) -> impl Strategy<Value = FourVector> {
    (-r..r, -r..r, -r..r, -r..r).prop_map(|(a, b, c, d)| FourVector::new(a, b, c, d))
}

fn unit_dir() -> impl Strategy<Value = ThreeVector> {
    three(1.0).prop_filter("non-zero", |v| v.norm() > 1e-3).prop_map(|v| v * (1.0 / v.norm()))
}

fn boost(max_beta: f64) -> impl Strategy<Value = LorentzTransform> {
    (unit_dir(), 0.0..max_beta).prop_map(|(n, b)| LorentzTransform::boost(&(n * b), 1.0).unwrap())
}

fn lorentz() -> impl Strategy<Value = LorentzTransform> {
    prop_oneof![
        boost(0.99),
        (unit_dir(), -PI..PI).prop_map(|(n, a)| LorentzTransform::rotation(&n, a).unwrap()),
    ]
}

proptest! {
    #[test]
    fn composition_stays_in_the_group(a in lorentz(), b in lorentz(), c in lorentz()) {
        prop_assert!(a.compose(&b).verify() <= 10.0 * TAU_LORENTZ);
        prop_assert!(a.compose(&b).compose(&c).verify() <= 10.0 * TAU_LORENTZ);
        prop_assert!(a.compose(&a.inverse()).verify() <= 10.0 * TAU_LORENTZ);
    }

    #[test]
    fn inner_product_is_invariant(l in boost(0.99), v in four(10.0), w in four(10.0)) {
        let (lv, lw) = (l.apply_vector(&v), l.apply_vector(&w));
        let scale = lv.euclid_norm() * lw.euclid_norm();
        prop_assert!((inner4(&lv, &lw) - inner4(&v, &w)).abs() <= 1e-10 * scale.max(1e-300));
    }

    #[test]
    fn classification_is_invariant(l in lorentz(), v in four(10.0)) {
        let q = inner4(&v, &v);
        let lv = l.apply_vector(&v);
        // stay clear of the null band in both frames
        prop_assume!(q.abs() > 10.0 * TAU_NULL * lv.euclid_norm().powi(2).max(1.0) * 1e3);
        prop_assert_eq!(classify(&lv), classify(&v));
        prop_assert_ne!(classify(&v), Causal::Null);
    }

    #[test]
    fn wave_operator_is_invariant(l in boost(0.9), x in four(1.0), k in three(2.0)) {
        let w = move |y: &FourVector| (k.0[0] * y.0[0] + k.0[1] * y.0[1]).sin() * y.0[3] * y.0[3] + y.0[2] * y.0[0] * y.0[3];
        let inv = l.inverse();
        let boosted = |xh: &FourVector| w(&inv.apply_event(xh));
        let h = 1e-3;
        let a = dalembertian(w, &x, h);
        let b = dalembertian(boosted, &l.apply_event(&x), h);
        prop_assert!((a - b).abs() < 1e-4 * (1.0 + a.abs()), "{} vs {}", a, b);
    }

    #[test]
    fn em_stress_energy_is_symmetric_and_traceless(e in three(5.0), b in three(5.0)) {
        let m = em_stress_energy(&FaradayTensor::assemble(e, b));
        prop_assert!(m.0.is_symmetric());
        prop_assert!(m.trace().abs() <= 1e-12 * m.0.max_abs().max(1e-300));
    }

    #[test]
    fn projector_annihilates_u_and_is_idempotent(v in three(0.6), w in -0.2f64..0.0, x in three(1.0)) {
        let c = 1.0;
        let g = EffectiveMetric::static_w(Arc::new(Potential::Uniform { g: ThreeVector::new(0.0, 0.0, -w) }), c);
        let xe = FourVector::event(&x, 0.0, c);
        let gm = g.metric(&xe).unwrap();
        let t = FourVector::new(v.0[0], v.0[1], v.0[2], c);
        prop_assume!(gm.bilinear(&t, &t) < -0.1);
        let u = t * (c / (-gm.bilinear(&t, &t)).sqrt());
        let p = projector(&u, &lower_with(&gm, &u), c);
        prop_assert!(p.apply(&u).max_abs() < 1e-12);
        prop_assert!((p.matmul(&p) - p).max_abs() < 1e-12);
    }

    #[test]
    fn weak_metric_inverse_and_compatibility(coef in proptest::collection::vec(-0.05f64..0.05, 10), x in four(1.0)) {
        let phi = move |y: &FourVector| {
            let s = 1.0 + 0.5 * (y.0[0] + y.0[1] * y.0[3]).sin();
            let mut p = Tensor2::ZERO;
            let mut k = 0;
            for a in 0..4 {
                for b in a..4 {
                    p.0[a][b] = coef[k] * s;
                    p.0[b][a] = coef[k] * s;
                    k += 1;
                }
            }
            p
        };
        let g = metric_from_phi(Arc::new(phi), 1.0);
        let prod = g.inverse(&x).unwrap().matmul(&g.metric(&x).unwrap());
        prop_assert!((prod - relmech_core::minkowski::IDENTITY4).max_abs() < 1e-12);
        let h = 1e-4;
        let gamma = christoffel_numeric(&g, &x, h).unwrap();
        let dg = covariant_derivative(metric_tensor_field(&g), &gamma, &x, h).unwrap();
        prop_assert!(dg.max_abs() < 1e-8, "{}", dg.max_abs());
    }
}

#[test]
fn flat_metric_is_not_parallel_in_a_point_mass_field() {
    let g = EffectiveMetric::static_w(Arc::new(Potential::PointMass { gm: 0.01 }), 1.0);
    let x = FourVector::new(1.0, 0.5, -0.3, 0.0);
    let gamma = g.christoffel(&x).unwrap();
    let d = |_: &FourVector| GeneralTensor::from_tensor2(&MINKOWSKI, 0, 2).unwrap();
    assert!(covariant_derivative(d, &gamma, &x, 1e-4).unwrap().max_abs() > 1e-3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lorentz_worldlines_keep_acceleration_orthogonal(e in three(1.0), b in three(1.0), v in three(0.5)) {
        let c = 1.0;
        let f = FaradayTensor::assemble(e, b);
        let s0 = ParticleState::from_velocity(&ThreeVector::ZERO, 0.0, &v, 1.0, 1.0, c).unwrap();
        let ds = 1e-3;
        let wl = integrate_lorentz(&s0, |_| f, ds, 2000, c, IntegratorSettings::default()).unwrap();
        for k in 1..wl.samples.len() - 1 {
            let u = wl.samples[k].u;
            let a = (wl.samples[k + 1].u - wl.samples[k - 1].u) * (0.5 / ds);
            prop_assert!(inner4(&u, &a).abs() <= 1e-8 * c * a.euclid_norm().max(1e-300));
            // ds/dt in (0, 1]
            let rate = c / u.0[3];
            prop_assert!(rate > 0.0 && rate <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn magnetic_field_does_no_work(b in three(3.0), v in three(0.55)) {
        let c = 1.0;
        let f = FaradayTensor::assemble(ThreeVector::ZERO, b);
        let s0 = ParticleState::from_velocity(&ThreeVector::ZERO, 0.0, &v, 1.0, 1.0, c).unwrap();
        let wl = integrate_lorentz(&s0, |_| f, 1e-3, 5000, c, IntegratorSettings::default()).unwrap();
        let e0 = s0.u.0[3];
        for s in &wl.samples {
            prop_assert!((s.u.0[3] - e0).abs() <= 1e-9 * e0);
        }
    }

    #[test]
    fn electric_work_rate(e in three(1.0), v in three(0.5)) {
        let c = 1.0;
        let (m, q) = (1.0, 1.0);
        let f = FaradayTensor::assemble(e, ThreeVector::ZERO);
        let s0 = ParticleState::from_velocity(&ThreeVector::ZERO, 0.0, &v, m, q, c).unwrap();
        let wl = integrate_lorentz(&s0, |_| f, 1e-3, 500, c, IntegratorSettings::default()).unwrap();
        for k in 1..wl.samples.len() - 1 {
            let (a, z) = (&wl.samples[k - 1], &wl.samples[k + 1]);
            let de_dt = m * c * (z.u.0[3] - a.u.0[3]) / (z.t - a.t);
            let vk = wl.state(k).coordinate_velocity(c);
            prop_assert!((de_dt - q * e.dot(&vk)).abs() <= 1e-5 * (1.0 + e.norm()));
        }
    }

    #[test]
    fn newtonian_force_energy_balance(f in three(1.0), v in three(0.5), k in 0.1f64..2.0) {
        // spring plus constant push, mapped to a four-force
        let c = 1.0;
        let m = 1.0;
        let force = move |x: &FourVector, u: &FourVector| {
            let vel = u.spatial() * (c / u.0[3]);
            let fn_ = f - x.spatial() * k;
            newtonian_force_to_relativistic(&fn_, &vel, c).unwrap()
        };
        let s0 = ParticleState::from_velocity(&ThreeVector::ZERO, 0.0, &v, m, 0.0, c).unwrap();
        let wl = integrate_relativistic(&s0, &force, 1e-3, 1000, c, IntegratorSettings::default()).unwrap();
        for j in 1..wl.samples.len() - 1 {
            let (a, z) = (&wl.samples[j - 1], &wl.samples[j + 1]);
            let ea = energy(m, &wl.state(j - 1).coordinate_velocity(c), c).unwrap();
            let ez = energy(m, &wl.state(j + 1).coordinate_velocity(c), c).unwrap();
            let s = wl.state(j);
            let vel = s.coordinate_velocity(c);
            let power = vel.dot(&(f - s.x.spatial() * k));
            prop_assert!(((ez - ea) / (z.t - a.t) - power).abs() <= 1e-5 * (1.0 + power.abs()));
        }
    }

    #[test]
    fn equatorial_orbits_stay_equatorial(r in 8.0f64..20.0, vt in 0.8f64..1.2, vr in -0.1f64..0.1) {
        let c = 1.0;
        let gm = 0.1;
        let g = EffectiveMetric::static_w(Arc::new(Potential::PointMass { gm }), c);
        let v = ThreeVector::new(vr, vt * (gm / r).sqrt(), 0.0);
        let x0 = FourVector::new(r, 0.0, 0.0, 0.0);
        let t = FourVector::new(v.0[0], v.0[1], 0.0, c);
        let u = t * (c / (-g.dot(&x0, &t, &t).unwrap()).sqrt());
        let s0 = ParticleState { x: x0, u, mass: 1.0, charge: 0.0 };
        let settings = IntegratorSettings { method: Method::Rk4, projection: true };
        let wl = integrate_geodesic(&g, &s0, 0.5, 2000, settings).unwrap();
        for s in &wl.samples {
            prop_assert!(s.u.0[2].abs() <= 1e-10 * s.u.euclid_norm());
            prop_assert!(s.x.0[2].abs() <= 1e-10 * r);
        }
    }
}

#[test]
fn newtonian_trajectory_is_recovered_as_c_grows() {
    let (m, f, v0) = (1.0, ThreeVector::new(1.0, 0.0, 0.0), ThreeVector::new(0.0, 1.0, 0.0));
    let t_end = 1.0;
    let newton = v0 * t_end + f * (0.5 * t_end * t_end / m);
    let discrepancy = |c: f64| {
        let force = move |_: &FourVector, u: &FourVector| {
            newtonian_force_to_relativistic(&f, &(u.spatial() * (c / u.0[3])), c).unwrap()
        };
        let s0 = ParticleState::from_velocity(&ThreeVector::ZERO, 0.0, &v0, m, 0.0, c).unwrap();
        let wl = integrate_relativistic(&s0, &force, 1e-3, 1100, c, IntegratorSettings::default()).unwrap();
        let k = wl.samples.iter().position(|s| s.t >= t_end).unwrap();
        // cubic Hermite in t between samples k-1 and k
        let (a, b) = (wl.state(k - 1), wl.state(k));
        let (ta, tb) = (wl.samples[k - 1].t, wl.samples[k].t);
        let dt = tb - ta;
        let s = (t_end - ta) / dt;
        let (h00, h10, h01, h11) =
            (2.0 * s.powi(3) - 3.0 * s * s + 1.0, s.powi(3) - 2.0 * s * s + s, -2.0 * s.powi(3) + 3.0 * s * s, s.powi(3) - s * s);
        let x = a.x.spatial() * h00 + a.coordinate_velocity(c) * (h10 * dt) + b.x.spatial() * h01
            + b.coordinate_velocity(c) * (h11 * dt);
        (x - newton).norm()
    };
    let (d1, d2, d3) = (discrepancy(10.0), discrepancy(20.0), discrepancy(40.0));
    for r in [d1 / d2, d2 / d3] {
        assert!((r - 4.0).abs() < 0.6, "ratio {r}");
    }
}

#[test]
fn conserved_current_has_second_order_residual() {
    let c = 2.0;
    let vel = ThreeVector::new(0.3, -0.2, 0.1);
    let sigma = move |x: &FourVector| {
        let t = x.0[3] / c;
        let d = x.spatial() - vel * t;
        (-d.norm_sq()).exp()
    };
    let j = move |x: &FourVector| ChargeCurrent::new(&(vel * sigma(x)), sigma(x), c);
    let x = FourVector::new(0.4, 0.1, -0.3, 0.5);
    let r = |h: f64| maxwell_residuals(|_| FaradayTensor::ZERO, j, &x, h, c).conservation.abs();
    let (r1, r2, r3) = (r(4e-2), r(2e-2), r(1e-2));
    for q in [r1 / r2, r2 / r3] {
        assert!((q.log2() - 2.0).abs() < 0.2, "order {}", q.log2());
    }
}
