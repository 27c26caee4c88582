//! Explicit Runge–Kutta integrators: classical RK4 with a fixed step and the
//! Dormand–Prince 5(4) pair with adaptive steps. Both report the solution on
//! a uniform output grid through an observer callback.

use num_traits::Float;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances<F> {
    pub abs: F,
    pub rel: F,
}

impl<F: Float> Default for Tolerances<F> {
    fn default() -> Self {
        let t = F::from(1e-10).unwrap();
        Self { abs: t, rel: t }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

fn axpy<F: Float>(y: &[F], h: F, terms: &[(F, &[F])]) -> Vec<F> {
    let mut out = y.to_vec();
    for (c, k) in terms {
        let hc = h * *c;
        for (o, v) in out.iter_mut().zip(k.iter()) {
            *o = *o + hc * *v;
        }
    }
    out
}

fn c<F: Float>(v: f64) -> F {
    F::from(v).unwrap()
}

pub fn rk4_step<F: Float>(
    f: &mut impl FnMut(F, &[F]) -> Result<Vec<F>>,
    t: F,
    y: &[F],
    h: F,
) -> Result<Vec<F>> {
    let half = c::<F>(0.5);
    let k1 = f(t, y)?;
    let k2 = f(t + half * h, &axpy(y, h, &[(half, &k1)]))?;
    let k3 = f(t + half * h, &axpy(y, h, &[(half, &k2)]))?;
    let k4 = f(t + h, &axpy(y, h, &[(F::one(), &k3)]))?;
    let sixth = c::<F>(1.0 / 6.0);
    let third = c::<F>(1.0 / 3.0);
    Ok(axpy(y, h, &[(sixth, &k1), (third, &k2), (third, &k3), (sixth, &k4)]))
}

fn grid<F: Float>(t_end: F, dt: F) -> Result<usize> {
    if !(dt > F::zero()) || !dt.is_finite() {
        return Err(Error::Integrator("step must be positive and finite".into()));
    }
    if t_end < F::zero() || !t_end.is_finite() {
        return Err(Error::Integrator("end time must be non-negative and finite".into()));
    }
    let steps = (t_end / dt - c(1e-9)).ceil().max(F::zero());
    steps
        .to_usize()
        .ok_or_else(|| Error::Integrator("too many steps".into()))
}

fn check_finite<F: Float>(t: F, y: &[F]) -> Result<()> {
    if y.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(t.to_f64().unwrap_or(f64::NAN)))
    }
}

/// Fixed-step RK4 on `[0, t_end]`. The observer sees `t = 0` and every step;
/// the final step is shortened to land on `t_end`.
pub fn solve_rk4<F: Float>(
    mut f: impl FnMut(F, &[F]) -> Result<Vec<F>>,
    y0: &[F],
    t_end: F,
    dt: F,
    mut observer: impl FnMut(F, &[F]) -> Result<()>,
) -> Result<Stats> {
    let steps = grid(t_end, dt)?;
    let mut y = y0.to_vec();
    check_finite(F::zero(), &y)?;
    observer(F::zero(), &y)?;
    let mut stats = Stats::default();
    for k in 0..steps {
        let t = F::from(k).unwrap() * dt;
        let h = if k + 1 == steps { t_end - t } else { dt };
        y = rk4_step(&mut f, t, &y, h)?;
        stats.accepted += 1;
        stats.evaluations += 4;
        let t_next = if k + 1 == steps { t_end } else { t + h };
        check_finite(t_next, &y)?;
        observer(t_next, &y)?;
    }
    Ok(stats)
}

// Dormand–Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
/// Fifth-order weights minus fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct Dopri<F> {
    y: Vec<F>,
    error: F,
}

fn dopri_step<F: Float>(
    f: &mut impl FnMut(F, &[F]) -> Result<Vec<F>>,
    t: F,
    y: &[F],
    k1: &[F],
    h: F,
    tol: &Tolerances<F>,
) -> Result<(Dopri<F>, Vec<F>)> {
    let mut ks: Vec<Vec<F>> = vec![k1.to_vec()];
    for stage in 0..6 {
        let terms: Vec<(F, &[F])> = (0..=stage)
            .map(|j| (c(A[stage][j]), ks[j].as_slice()))
            .collect();
        let yi = axpy(y, h, &terms);
        ks.push(f(t + c::<F>(C[stage]) * h, &yi)?);
    }
    // The last stage is evaluated at the fifth-order solution (FSAL).
    let y_new = axpy(y, h, &(0..6).map(|j| (c(A[5][j]), ks[j].as_slice())).collect::<Vec<_>>());
    let mut err = F::zero();
    for i in 0..y.len() {
        let e = (0..7).fold(F::zero(), |acc, j| acc + c::<F>(E[j]) * ks[j][i]) * h;
        let scale = tol.abs + tol.rel * y[i].abs().max(y_new[i].abs());
        let r = e / scale;
        err = err + r * r;
    }
    let error = (err / F::from(y.len().max(1)).unwrap()).sqrt();
    let k7 = ks.pop().expect("seven stages");
    Ok((Dopri { y: y_new, error }, k7))
}

/// Adaptive Dormand–Prince on `[0, t_end]`, stepping exactly onto each
/// point of the output grid `k · dt`.
pub fn solve_rk45<F: Float>(
    mut f: impl FnMut(F, &[F]) -> Result<Vec<F>>,
    y0: &[F],
    t_end: F,
    dt: F,
    tol: Tolerances<F>,
    mut observer: impl FnMut(F, &[F]) -> Result<()>,
) -> Result<Stats> {
    if !(tol.abs > F::zero()) || !(tol.rel >= F::zero()) {
        return Err(Error::Integrator("tolerances must be positive".into()));
    }
    let outputs = grid(t_end, dt)?;
    let mut y = y0.to_vec();
    check_finite(F::zero(), &y)?;
    observer(F::zero(), &y)?;
    let mut stats = Stats::default();
    let mut t = F::zero();
    let mut k1 = f(t, &y)?;
    stats.evaluations += 1;
    let mut h = dt.min(c(1e-2));
    let h_min = c::<F>(1e-14) * (F::one() + t_end);
    let safety = c::<F>(0.9);
    for k in 1..=outputs {
        let target = if k == outputs { t_end } else { F::from(k).unwrap() * dt };
        while t < target {
            let remaining = target - t;
            let last = h >= remaining;
            let step = if last { remaining } else { h };
            let (trial, k7) = dopri_step(&mut f, t, &y, &k1, step, &tol)?;
            stats.evaluations += 6;
            if !trial.error.is_finite() {
                if step <= h_min {
                    return Err(Error::NonFinite(t.to_f64().unwrap_or(f64::NAN)));
                }
                h = step * c(0.25);
                stats.rejected += 1;
                continue;
            }
            let factor = if trial.error == F::zero() {
                c(5.0)
            } else {
                (safety * trial.error.powf(c(-0.2))).max(c(0.2)).min(c(5.0))
            };
            if trial.error <= F::one() {
                t = if last { target } else { t + step };
                y = trial.y;
                k1 = k7;
                stats.accepted += 1;
                check_finite(t, &y)?;
                if !last {
                    h = step * factor;
                }
            } else {
                stats.rejected += 1;
                h = step * factor;
                if h < h_min {
                    return Err(Error::Integrator(format!(
                        "step size underflow at t = {}",
                        t.to_f64().unwrap_or(f64::NAN)
                    )));
                }
            }
        }
        observer(t, &y)?;
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oscillator(_t: f64, y: &[f64]) -> Result<Vec<f64>> {
        Ok(vec![y[1], -y[0]])
    }

    #[test]
    fn rk4_oscillator() {
        let mut last = vec![];
        solve_rk4(oscillator, &[1.0, 0.0], 1.0, 1e-3, |_, y| {
            last = y.to_vec();
            Ok(())
        })
        .unwrap();
        assert!((last[0] - 1f64.cos()).abs() < 1e-12);
        assert!((last[1] + 1f64.sin()).abs() < 1e-12);
    }

    #[test]
    fn rk45_grid_and_accuracy() {
        let mut times = vec![];
        let mut last = vec![];
        let stats = solve_rk45(oscillator, &[1.0, 0.0], 10.0, 0.5, Tolerances::default(), |t, y| {
            times.push(t);
            last = y.to_vec();
            Ok(())
        })
        .unwrap();
        assert_eq!(times.len(), 21);
        assert_eq!(*times.last().unwrap(), 10.0);
        assert!((last[0] - 10f64.cos()).abs() < 1e-8);
        assert!(stats.accepted > 0);
    }

    #[test]
    fn rk4_in_single_precision() {
        let mut last = vec![];
        solve_rk4(|_, y: &[f32]| Ok(vec![-y[0]]), &[1.0f32], 1.0, 1e-2, |_, y| {
            last = y.to_vec();
            Ok(())
        })
        .unwrap();
        assert!((last[0] - (-1f32).exp()).abs() < 1e-5);
    }

    #[test]
    fn blow_up_reported() {
        let r = solve_rk4(|_, y: &[f64]| Ok(vec![y[0] * y[0]]), &[1.0], 2.0, 1e-2, |_, _| Ok(()));
        assert!(matches!(r, Err(Error::NonFinite(_))));
        assert!(solve_rk4(oscillator, &[1.0, 0.0], 1.0, 0.0, |_, _| Ok(())).is_err());
    }
}
