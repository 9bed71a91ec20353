//! Method-of-steps reference integrator.
//!
//! Classical RK4 on a grid of step `h/m`, so every multiple of `h` is a grid
//! point and no step straddles a breakpoint of the solution. Delayed values at
//! full steps are read straight off the grid; the half-step stages use cubic
//! Hermite interpolation between stored values and one-sided derivatives.

use crate::error::{Error, Result};
use crate::model::{DelaySystem, InputSignal, Preshape};
use crate::response::{Trajectory, TrajectoryMeta};
use crate::scalar::Scalar;

/// Integrated solution with enough data for dense evaluation.
#[derive(Clone, Debug)]
pub struct DenseHistory<T> {
    dt: T,
    values: Vec<T>,
    /// `x'(t_p⁺)`.
    d_right: Vec<T>,
    /// `x'(t_p⁻)`; unused at `p = 0`.
    d_left: Vec<T>,
    pre: Preshape<T>,
}

impl<T: Scalar> DenseHistory<T> {
    pub fn step(&self) -> T {
        self.dt
    }

    /// Last grid time.
    pub fn t_end(&self) -> T {
        self.time(self.values.len() - 1)
    }

    pub fn grid_values(&self) -> &[T] {
        &self.values
    }

    fn time(&self, p: usize) -> T {
        T::of(p as i64) * self.dt
    }

    /// `x(t)`: the history for `t < 0`, Hermite interpolation between grid points otherwise.
    pub fn eval(&self, t: T) -> Result<T> {
        if t < T::zero() {
            return Ok(self.pre.eval(t));
        }
        let last = self.values.len() - 1;
        let pos = t / self.dt;
        let p = pos.floor().to_usize().unwrap_or(usize::MAX);
        if p > last || (p == last && pos > T::of(last as i64)) {
            return Err(Error::InvalidArgument("time beyond the integrated range".into()));
        }
        if p == last {
            return Ok(self.values[last]);
        }
        Ok(self.hermite(p, pos - T::of(p as i64)))
    }

    fn hermite(&self, p: usize, th: T) -> T {
        let (x0, x1) = (self.values[p], self.values[p + 1]);
        let (d0, d1) = (self.d_right[p] * self.dt, self.d_left[p + 1] * self.dt);
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        let th2 = th * th;
        let th3 = th2 * th;
        x0 * (two * th3 - three * th2 + T::one())
            + d0 * (th3 - two * th2 + th)
            + x1 * (three * th2 - two * th3)
            + d1 * (th3 - th2)
    }

    /// The full integration grid as a trajectory.
    pub fn to_trajectory(&self) -> Trajectory<T> {
        Trajectory {
            times: (0..self.values.len()).map(|p| self.time(p)).collect(),
            values: self.values.clone(),
            meta: TrajectoryMeta::default(),
        }
    }

    /// Dense values at arbitrary times in `[0, t_end]`.
    pub fn sample(&self, times: &[T]) -> Result<Trajectory<T>> {
        let values = times.iter().map(|&t| self.eval(t)).collect::<Result<_>>()?;
        Ok(Trajectory { times: times.to_vec(), values, meta: TrajectoryMeta::default() })
    }
}

struct Rhs<'a, T> {
    sys: &'a DelaySystem<T>,
    pre: &'a Preshape<T>,
    m: usize,
    dt: T,
}

impl<T: Scalar> Rhs<'_, T> {
    /// Delayed term `Σ a_jd x(t_q - jh)` at grid index `q`, one-sided.
    fn delayed_at_grid(&self, values: &[T], q: usize, right: bool) -> T {
        let mut acc = T::zero();
        for (j, &c) in self.sys.delay_coeffs().iter().enumerate() {
            let back = (j + 1) * self.m;
            let x = if q > back || (right && q == back) {
                values[q - back]
            } else {
                let tau = -T::of((back - q) as i64) * self.dt;
                if right {
                    self.pre.eval(tau)
                } else {
                    self.pre.eval_left(tau)
                }
            };
            acc = acc + c * x;
        }
        acc
    }

    /// Delayed term at the midpoint of step `[t_n, t_{n+1}]`.
    fn delayed_at_mid(&self, hist: &DenseHistory<T>, n: usize) -> T {
        let half = T::lit(0.5);
        let mut acc = T::zero();
        for (j, &c) in self.sys.delay_coeffs().iter().enumerate() {
            let back = (j + 1) * self.m;
            let x = if n >= back {
                hist.hermite(n - back, half)
            } else {
                let tau = -(T::of((back - n) as i64) - half) * self.dt;
                self.pre.eval(tau)
            };
            acc = acc + c * x;
        }
        acc
    }
}

/// Integrates `x' = a x + Σ a_jd x(t - jh) + b u(t)` from the given history.
///
/// The grid runs from 0 in steps of `h/m` up to the first grid point at or past `t_end`.
pub fn integrate<T: Scalar>(
    sys: &DelaySystem<T>,
    pre: &Preshape<T>,
    u: &InputSignal<T>,
    t_end: T,
    m: usize,
) -> Result<DenseHistory<T>> {
    if m < 4 {
        return Err(Error::InvalidArgument(format!("steps per delay must be at least 4, got {m}")));
    }
    if !(t_end > T::zero()) || !t_end.is_finite() {
        return Err(Error::InvalidArgument("t_end must be positive and finite".into()));
    }
    pre.check_against(sys)?;
    u.validate()?;

    let dt = sys.h() / T::of(m as i64);
    let steps = (t_end / dt - T::tol(1e-12)).ceil().to_usize().unwrap_or(0).max(1);
    let rhs = Rhs { sys, pre, m, dt };
    let (a, b) = (sys.a(), sys.b());
    let half = T::lit(0.5);
    let sixth = T::one() / T::lit(6.0);

    let mut hist = DenseHistory {
        dt,
        values: Vec::with_capacity(steps + 1),
        d_right: Vec::with_capacity(steps + 1),
        d_left: Vec::with_capacity(steps + 1),
        pre: pre.clone(),
    };
    hist.values.push(pre.x0());
    hist.d_left.push(T::nan());

    for n in 0..steps {
        let t = T::of(n as i64) * dt;
        let t_mid = t + half * dt;
        let t_next = T::of(n as i64 + 1) * dt;
        let x = hist.values[n];

        let k1 = a * x + rhs.delayed_at_grid(&hist.values, n, true) + b * u.eval(t);
        hist.d_right.push(k1);
        let mid = rhs.delayed_at_mid(&hist, n) + b * u.eval(t_mid);
        let k2 = a * (x + half * dt * k1) + mid;
        let k3 = a * (x + half * dt * k2) + mid;
        let end = rhs.delayed_at_grid(&hist.values, n + 1, false) + b * u.eval_left(t_next);
        let k4 = a * (x + dt * k3) + end;
        let next = x + dt * sixth * (k1 + T::lit(2.0) * (k2 + k3) + k4);
        if !next.is_finite() {
            return Err(Error::BlowUp { time: t_next.to_f64().unwrap_or(f64::NAN) });
        }
        hist.values.push(next);
        hist.d_left.push(a * next + end);
    }
    // Right derivative at the final point, for completeness of the dense data.
    let last = hist.values.len() - 1;
    let t_last = T::of(last as i64) * dt;
    let fr = a * hist.values[last] + rhs.delayed_at_grid(&hist.values, last, true) + b * u.eval(t_last);
    hist.d_right.push(fr);
    Ok(hist)
}

/// The fundamental solution: zero history, `x(0) = 1`, no input.
pub fn psi_oracle<T: Scalar>(sys: &DelaySystem<T>, t_end: T, m: usize) -> Result<DenseHistory<T>> {
    let pre = Preshape::zero(sys.history_span(), T::one())?;
    integrate(sys, &pre, &InputSignal::Zero, t_end, m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(a: f64, ad: Vec<f64>) -> DelaySystem<f64> {
        DelaySystem::new(a, ad, 1.0, 1.0).unwrap()
    }

    #[test]
    fn constant_history_gives_linear_first_interval() {
        let s = sys(0.0, vec![-1.0]);
        let pre = Preshape::constant(1.0, 1.0, 1.0).unwrap();
        let hist = integrate(&s, &pre, &InputSignal::Zero, 1.0, 8).unwrap();
        for (p, &x) in hist.grid_values().iter().enumerate() {
            let t = p as f64 / 8.0;
            assert!((x - (1.0 - t)).abs() < 1e-15, "t={t} x={x}");
        }
    }

    #[test]
    fn psi_is_exponential_before_first_delay() {
        let s = sys(-0.7, vec![0.4, -0.3]);
        let hist = psi_oracle(&s, 1.0, 64).unwrap();
        for p in 0..64 {
            let t = p as f64 / 64.0;
            assert!((hist.grid_values()[p] - (-0.7 * t).exp()).abs() < 1e-10);
        }
    }

    #[test]
    fn hand_stepped_psi() {
        // Ψ = 1 on [0,1], then Ψ' = Ψ(t-1) = 1 gives Ψ = t on [1,2].
        let s = sys(0.0, vec![1.0]);
        let hist = psi_oracle(&s, 2.0, 16).unwrap();
        assert!((hist.eval(2.0).unwrap() - 2.0).abs() < 1e-14);
        assert!((hist.eval(1.5).unwrap() - 1.5).abs() < 1e-14);
        // Unit history, x0 = 1: x = 1 + t on [0,1], then 2 + (t-1) + (t-1)²/2 ... = 3.5 at t = 2.
        let pre = Preshape::constant(1.0, 1.0, 1.0).unwrap();
        let hist = integrate(&s, &pre, &InputSignal::Zero, 2.0, 16).unwrap();
        assert!((hist.eval(2.0).unwrap() - 3.5).abs() < 1e-13);
    }

    #[test]
    fn grid_covers_t_end() {
        let s = sys(-1.0, vec![0.5]);
        let hist = psi_oracle(&s, 1.01, 4).unwrap();
        assert_eq!(hist.grid_values().len(), 6);
        assert!((hist.t_end() - 1.25).abs() < 1e-15);
        assert!(hist.eval(1.3).is_err());
    }

    #[test]
    fn rejects_coarse_grid_and_reports_blow_up() {
        let s = sys(0.0, vec![1.0]);
        assert!(matches!(psi_oracle(&s, 1.0, 3), Err(Error::InvalidArgument(_))));
        let wild = sys(400.0, vec![1.0]);
        assert!(matches!(psi_oracle(&wild, 100.0, 4), Err(Error::BlowUp { .. })));
    }
}
