//! Adaptive Dormand–Prince 5(4) stepping for autonomous ODE systems.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy)]
pub struct Dopri5<T> {
    pub rtol: T,
    pub atol: T,
    pub max_steps: usize,
}

impl<T: Real> Default for Dopri5<T> {
    fn default() -> Self {
        Self {
            rtol: T::tol(1e-9),
            atol: T::tol(1e-12),
            max_steps: 10_000_000,
        }
    }
}

struct Tableau<T> {
    a: [[T; 6]; 7],
    err: [T; 7],
}

fn tableau<T: Real>() -> Tableau<T> {
    let f = T::of;
    let z = T::zero();
    Tableau {
        a: [
            [z, z, z, z, z, z],
            [f(1.0 / 5.0), z, z, z, z, z],
            [f(3.0 / 40.0), f(9.0 / 40.0), z, z, z, z],
            [f(44.0 / 45.0), f(-56.0 / 15.0), f(32.0 / 9.0), z, z, z],
            [
                f(19372.0 / 6561.0),
                f(-25360.0 / 2187.0),
                f(64448.0 / 6561.0),
                f(-212.0 / 729.0),
                z,
                z,
            ],
            [
                f(9017.0 / 3168.0),
                f(-355.0 / 33.0),
                f(46732.0 / 5247.0),
                f(49.0 / 176.0),
                f(-5103.0 / 18656.0),
                z,
            ],
            // fifth-order weights; row 7 doubles as the FSAL stage
            [
                f(35.0 / 384.0),
                z,
                f(500.0 / 1113.0),
                f(125.0 / 192.0),
                f(-2187.0 / 6784.0),
                f(11.0 / 84.0),
            ],
        ],
        err: [
            f(71.0 / 57600.0),
            z,
            f(-71.0 / 16695.0),
            f(71.0 / 1920.0),
            f(-17253.0 / 339200.0),
            f(22.0 / 525.0),
            f(-1.0 / 40.0),
        ],
    }
}

impl<T: Real> Dopri5<T> {
    fn error_norm(&self, err: &DVector<T>, y: &DVector<T>, y_new: &DVector<T>) -> T {
        let n = err.len();
        if n == 0 {
            return T::zero();
        }
        let sum = (0..n).fold(T::zero(), |acc, i| {
            let sc = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
            let e = err[i] / sc;
            acc + e * e
        });
        (sum / T::of(n as f64)).sqrt()
    }

    /// Integrates `y' = f(y)` from `t = 0` and returns `y` at each of
    /// `times` (non-negative, strictly increasing).
    pub fn integrate<F>(&self, f: F, y0: DVector<T>, times: &[T]) -> Result<Vec<DVector<T>>>
    where
        F: Fn(&DVector<T>) -> DVector<T>,
    {
        check_grid(times)?;
        let tab = tableau::<T>();
        let mut out = Vec::with_capacity(times.len());
        let mut t = T::zero();
        let mut y = y0;
        let mut k1 = f(&y);

        let scale0 = self.error_norm(&y, &y, &y);
        let slope0 = self.error_norm(&k1, &y, &y);
        let mut h = if scale0 < T::of(1e-5) || slope0 < T::of(1e-5) {
            T::of(1e-6)
        } else {
            T::of(0.01) * scale0 / slope0
        };

        let mut steps = 0usize;
        for &target in times {
            while t < target {
                if steps >= self.max_steps {
                    return Err(Error::TooManySteps(self.max_steps));
                }
                let remaining = target - t;
                let last = h >= remaining;
                let step = if last { remaining } else { h };
                let floor = T::default_epsilon() * T::of(10.0) * t.abs().max(T::one());
                if step < floor && !last {
                    return Err(Error::StepSizeUnderflow {
                        t: t.as_f64(),
                        h: step.as_f64(),
                    });
                }

                let mut k: Vec<DVector<T>> = Vec::with_capacity(7);
                k.push(k1.clone());
                for s in 1..7 {
                    let mut ys = y.clone();
                    for (j, kj) in k.iter().enumerate().take(s) {
                        let a = tab.a[s][j];
                        if a != T::zero() {
                            ys.axpy(step * a, kj, T::one());
                        }
                    }
                    if s == 6 {
                        // y_{n+1}
                        let k7 = f(&ys);
                        k.push(k7);
                        let mut err = DVector::zeros(y.len());
                        for (j, kj) in k.iter().enumerate() {
                            if tab.err[j] != T::zero() {
                                err.axpy(step * tab.err[j], kj, T::one());
                            }
                        }
                        let norm = self.error_norm(&err, &y, &ys);
                        steps += 1;
                        if norm <= T::one() {
                            t = if last { target } else { t + step };
                            y = ys;
                            k1 = k.pop().expect("seven stages");
                        }
                        let factor = if norm == T::zero() {
                            T::of(5.0)
                        } else {
                            (T::of(0.9) * norm.powf(T::of(-0.2))).clamp(T::of(0.2), T::of(5.0))
                        };
                        if norm > T::one() {
                            h = step * factor.min(T::one());
                        } else if last {
                            // a step clipped to the output grid says little about the next one
                            h = h.max(step * factor);
                        } else {
                            h = step * factor;
                        }
                        break;
                    }
                    k.push(f(&ys));
                }
            }
            out.push(y.clone());
        }
        Ok(out)
    }
}

pub(crate) fn check_grid<T: Real>(times: &[T]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::InvalidTimeGrid("no output times".into()));
    }
    if times[0] < T::zero() || !times.iter().all(|t| t.is_finite()) {
        return Err(Error::InvalidTimeGrid("times must be finite and non-negative".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidTimeGrid("times must be strictly increasing".into()));
    }
    Ok(())
}
