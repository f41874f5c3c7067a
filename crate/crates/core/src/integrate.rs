//! Fixed-step classical Runge-Kutta integration.
//!
//! The step size is fixed so that trajectories land on deterministic grids:
//! the oracle comparisons subtract whole trajectories pointwise, which
//! adaptive stepping would misalign. If the requested end time is not a
//! multiple of the step, one shorter final step closes the gap.

use crate::{Error, Result};

/// Sampled solution of an autonomous first-order system.
#[derive(Debug, Clone)]
pub struct Trajectory<T> {
    pub times: Vec<f64>,
    pub states: Vec<T>,
    pub step: f64,
    pub method: &'static str,
}

impl<T> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> &T {
        self.states.last().expect("non-empty trajectory")
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Trajectory<U> {
        Trajectory {
            times: self.times.clone(),
            states: self.states.iter().map(f).collect(),
            step: self.step,
            method: self.method,
        }
    }
}

fn rk4_step<F>(y: &[f64], h: f64, rhs: &F) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = y.len();
    let k1 = rhs(y)?;
    let mut stage = vec![0.0; n];
    for i in 0..n {
        stage[i] = y[i] + 0.5 * h * k1[i];
    }
    let k2 = rhs(&stage)?;
    for i in 0..n {
        stage[i] = y[i] + 0.5 * h * k2[i];
    }
    let k3 = rhs(&stage)?;
    for i in 0..n {
        stage[i] = y[i] + h * k3[i];
    }
    let k4 = rhs(&stage)?;
    let mut out = vec![0.0; n];
    for i in 0..n {
        out[i] = y[i] + h * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0;
    }
    Ok(out)
}

/// Integrate `y' = rhs(y)` from 0 to `t_max` with step `h`, sampling every
/// step. Domain errors from the right-hand side are reported as
/// [`Error::LeftDomain`] with the time of the offending step; non-finite
/// states reject the step.
pub fn rk4<F>(y0: Vec<f64>, t_max: f64, h: f64, rhs: F) -> Result<(Vec<f64>, Vec<Vec<f64>>)>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidArgument {
            reason: format!("step size must be positive and finite, got {h}"),
        });
    }
    if !(t_max >= 0.0) || !t_max.is_finite() {
        return Err(Error::InvalidArgument {
            reason: format!("t_max must be non-negative and finite, got {t_max}"),
        });
    }

    let full_steps = ((t_max + 1e-9 * h) / h).floor() as usize;
    let remainder = t_max - full_steps as f64 * h;
    let tail = remainder > 1e-9 * h;

    let mut times = Vec::with_capacity(full_steps + 2);
    let mut states = Vec::with_capacity(full_steps + 2);
    times.push(0.0);
    states.push(y0);

    let advance = |y: &[f64], step: f64, t_next: f64| -> Result<Vec<f64>> {
        let next = rk4_step(y, step, &rhs).map_err(|e| match e {
            Error::OutsideDomain { model } => Error::LeftDomain { model, t: t_next },
            other => other,
        })?;
        if !next.iter().all(|c| c.is_finite()) {
            return Err(Error::StepRejected { t: t_next });
        }
        Ok(next)
    };

    for i in 0..full_steps {
        let t_next = (i + 1) as f64 * h;
        let next = advance(states.last().expect("state"), h, t_next)?;
        times.push(t_next);
        states.push(next);
    }
    if tail {
        let next = advance(states.last().expect("state"), remainder, t_max)?;
        times.push(t_max);
        states.push(next);
    }
    Ok((times, states))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_on_linear_flow() {
        // y' = (v, 0): straight line, no truncation error. A dyadic step
        // keeps the accumulation exact in floating point too.
        let h = 1.0 / 1024.0;
        let rhs = |y: &[f64]| Ok(vec![y[1], 0.0]);
        let (times, states) = rk4(vec![0.0, 1.0], 1.0, h, rhs).unwrap();
        assert_eq!(times.len(), 1025);
        assert_eq!(states.last().unwrap()[0], 1.0);

        // with a non-dyadic step only summation roundoff remains
        let (_, states) = rk4(vec![0.0, 1.0], 1.0, 1e-3, rhs).unwrap();
        assert!((states.last().unwrap()[0] - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn fourth_order_on_exponential() {
        let rhs = |y: &[f64]| Ok(vec![y[0]]);
        let exact = f64::exp(1.0);
        let mut errs = Vec::new();
        for h in [2e-2, 1e-2] {
            let (_, states) = rk4(vec![1.0], 1.0, h, rhs).unwrap();
            errs.push((states.last().unwrap()[0] - exact).abs());
        }
        assert!(errs[0] / errs[1] > 14.0);
    }

    #[test]
    fn partial_final_step() {
        let rhs = |_: &[f64]| Ok(vec![1.0]);
        let (times, states) = rk4(vec![0.0], 0.25, 0.1, rhs).unwrap();
        assert_eq!(times.len(), 4);
        assert!((times[3] - 0.25).abs() < 1e-15);
        assert!((states[3][0] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_finite_states() {
        // y' = y^2 from y(0) = 1 blows up at t = 1.
        let rhs = |y: &[f64]| Ok(vec![y[0] * y[0]]);
        let err = rk4(vec![1.0], 2.0, 1e-3, rhs).unwrap_err();
        assert!(matches!(err, Error::StepRejected { .. }));
    }

    #[test]
    fn invalid_step_is_usage_error() {
        let rhs = |_: &[f64]| Ok(vec![0.0]);
        assert!(rk4(vec![0.0], 1.0, 0.0, rhs).is_err());
    }
}
