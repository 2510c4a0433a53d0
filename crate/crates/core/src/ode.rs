//! Explicit Runge–Kutta steppers on fixed-size states.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Rk4,
    Rkf45 { atol: f64, rtol: f64 },
}

impl Method {
    pub fn rkf45_default() -> Self {
        Method::Rkf45 { atol: 1e-10, rtol: 1e-10 }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Method::Rk4 => "rk4",
            Method::Rkf45 { .. } => "rkf45",
        }
    }
}

impl Default for Method {
    fn default() -> Self {
        Method::Rk4
    }
}

fn axpy<const N: usize>(y: &[f64; N], terms: &[(f64, &[f64; N])], h: f64) -> [f64; N] {
    let mut out = *y;
    for (coef, k) in terms {
        for i in 0..N {
            out[i] += h * coef * k[i];
        }
    }
    out
}

/// One classical RK4 step.
pub fn rk4_step<const N: usize, F>(f: &F, t: f64, y: &[f64; N], h: f64) -> Result<[f64; N]>
where
    F: Fn(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let k1 = f(t, y)?;
    let k2 = f(t + 0.5 * h, &axpy(y, &[(0.5, &k1)], h))?;
    let k3 = f(t + 0.5 * h, &axpy(y, &[(0.5, &k2)], h))?;
    let k4 = f(t + h, &axpy(y, &[(1.0, &k3)], h))?;
    let mut out = *y;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(out)
}

/// One Fehlberg 4(5) step; returns the fifth-order solution and the error estimate.
pub fn rkf45_step<const N: usize, F>(f: &F, t: f64, y: &[f64; N], h: f64) -> Result<([f64; N], [f64; N])>
where
    F: Fn(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let k1 = f(t, y)?;
    let k2 = f(t + h / 4.0, &axpy(y, &[(1.0 / 4.0, &k1)], h))?;
    let k3 = f(t + 3.0 * h / 8.0, &axpy(y, &[(3.0 / 32.0, &k1), (9.0 / 32.0, &k2)], h))?;
    let k4 = f(
        t + 12.0 * h / 13.0,
        &axpy(y, &[(1932.0 / 2197.0, &k1), (-7200.0 / 2197.0, &k2), (7296.0 / 2197.0, &k3)], h),
    )?;
    let k5 = f(
        t + h,
        &axpy(y, &[(439.0 / 216.0, &k1), (-8.0, &k2), (3680.0 / 513.0, &k3), (-845.0 / 4104.0, &k4)], h),
    )?;
    let k6 = f(
        t + h / 2.0,
        &axpy(
            y,
            &[
                (-8.0 / 27.0, &k1),
                (2.0, &k2),
                (-3544.0 / 2565.0, &k3),
                (1859.0 / 4104.0, &k4),
                (-11.0 / 40.0, &k5),
            ],
            h,
        ),
    )?;
    let b5 = [16.0 / 135.0, 0.0, 6656.0 / 12825.0, 28561.0 / 56430.0, -9.0 / 50.0, 2.0 / 55.0];
    let b4 = [25.0 / 216.0, 0.0, 1408.0 / 2565.0, 2197.0 / 4104.0, -1.0 / 5.0, 0.0];
    let ks = [&k1, &k2, &k3, &k4, &k5, &k6];
    let mut y5 = *y;
    let mut err = [0.0; N];
    for i in 0..N {
        let mut s5 = 0.0;
        let mut s4 = 0.0;
        for (j, k) in ks.iter().enumerate() {
            s5 += b5[j] * k[i];
            s4 += b4[j] * k[i];
        }
        y5[i] += h * s5;
        err[i] = h * (s5 - s4);
    }
    Ok((y5, err))
}

/// Advances from `t` to `t + span` with adaptive RKF45 substeps.
/// `h_hint` carries the last accepted substep between calls.
pub fn rkf45_advance<const N: usize, F, P>(
    f: &F,
    t: f64,
    y: &[f64; N],
    span: f64,
    atol: f64,
    rtol: f64,
    h_hint: &mut f64,
    post_step: P,
) -> Result<[f64; N]>
where
    F: Fn(f64, &[f64; N]) -> Result<[f64; N]>,
    P: Fn(&mut [f64; N]) -> Result<()>,
{
    let t_end = t + span;
    let h_min = span.abs() * 1e-12;
    let mut tc = t;
    let mut yc = *y;
    let mut h = if *h_hint > 0.0 { h_hint.min(span) } else { span };
    while tc < t_end {
        let last = tc + h >= t_end;
        let step = if last { t_end - tc } else { h };
        let (y_new, err) = rkf45_step(f, tc, &yc, step)?;
        let mut ratio: f64 = 0.0;
        for i in 0..N {
            let scale = atol + rtol * yc[i].abs().max(y_new[i].abs());
            ratio = ratio.max(err[i].abs() / scale);
        }
        if ratio <= 1.0 {
            tc = if last { t_end } else { tc + step };
            yc = y_new;
            post_step(&mut yc)?;
            if !last || step >= h {
                *h_hint = step;
            }
        }
        let factor = if ratio == 0.0 { 4.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 4.0) };
        h = step * factor;
        if ratio > 1.0 && h < h_min {
            return Err(Error::StepRejected { s: tc, step: h });
        }
    }
    Ok(yc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decay(_t: f64, y: &[f64; 1]) -> Result<[f64; 1]> {
        Ok([-y[0]])
    }

    #[test]
    fn rk4_is_fourth_order() {
        let run = |n: usize| {
            let h = 1.0 / n as f64;
            let mut y = [1.0];
            for k in 0..n {
                y = rk4_step(&decay, k as f64 * h, &y, h).unwrap();
            }
            (y[0] - (-1.0f64).exp()).abs()
        };
        let ratio = run(20) / run(40);
        assert!((ratio.log2() - 4.0).abs() < 0.1, "ratio {ratio}");
    }

    #[test]
    fn rkf45_meets_tolerance() {
        let mut hint = 0.0;
        let y = rkf45_advance(&decay, 0.0, &[1.0], 3.0, 1e-12, 1e-12, &mut hint, |_| Ok(())).unwrap();
        assert!((y[0] - (-3.0f64).exp()).abs() < 1e-10);
        assert!(hint > 0.0);
    }

    #[test]
    fn rkf45_rejects_nonsmooth_blowup() {
        // y' = y², y(0) = 1 blows up at t = 1
        let f = |_t: f64, y: &[f64; 1]| -> Result<[f64; 1]> { Ok([y[0] * y[0]]) };
        let mut hint = 0.0;
        let r = rkf45_advance(&f, 0.0, &[1.0], 2.0, 1e-10, 1e-10, &mut hint, |_| Ok(()));
        assert!(matches!(r, Err(Error::StepRejected { .. })));
    }
}
