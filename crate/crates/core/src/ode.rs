//! Adaptive Dormand–Prince 5(4) integration of two-component real systems.

use crate::error::{Error, Result};

pub type State = [f64; 2];

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Stateful integrator that can be advanced through successive targets.
///
/// The local error is measured against a single scale shared by both
/// components, `rtol · max(|y|, |y_new|)`, so that a component passing
/// through zero does not stall the step size.
pub struct Integrator<F> {
    rhs: F,
    t: f64,
    y: State,
    h: f64,
    rtol: f64,
    /// Accepted steps so far.
    pub steps: usize,
    /// Strict sign changes of the first component over accepted steps.
    pub sign_changes: usize,
}

impl<F> Integrator<F>
where
    F: Fn(f64, &State) -> State,
{
    pub fn new(rhs: F, t0: f64, y0: State, h0: f64, rtol: f64) -> Self {
        Self {
            rhs,
            t: t0,
            y: y0,
            h: h0,
            rtol,
            steps: 0,
            sign_changes: 0,
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn state(&self) -> State {
        self.y
    }

    fn trial(&self, h: f64) -> (State, f64) {
        let mut k = [[0.0; 2]; 7];
        k[0] = (self.rhs)(self.t, &self.y);
        for i in 1..7 {
            let mut yi = self.y;
            for (j, kj) in k.iter().enumerate().take(i) {
                yi[0] += h * A[i][j] * kj[0];
                yi[1] += h * A[i][j] * kj[1];
            }
            k[i] = (self.rhs)(self.t + C[i] * h, &yi);
        }
        let mut y5 = self.y;
        let mut err = [0.0; 2];
        for i in 0..7 {
            y5[0] += h * B5[i] * k[i][0];
            y5[1] += h * B5[i] * k[i][1];
            err[0] += h * (B5[i] - B4[i]) * k[i][0];
            err[1] += h * (B5[i] - B4[i]) * k[i][1];
        }
        let scale = self.rtol * norm(&self.y).max(norm(&y5)) + f64::MIN_POSITIVE;
        (y5, norm(&err) / scale)
    }

    /// Advances exactly to `target`.
    pub fn advance_to(&mut self, target: f64) -> Result<()> {
        let dir = (target - self.t).signum();
        if target == self.t {
            return Ok(());
        }
        if self.h == 0.0 || self.h.signum() != dir {
            self.h = dir * 1e-3 * (target - self.t).abs().max(1e-6);
        }
        let mut guard = 0usize;
        while (target - self.t) * dir > 0.0 {
            guard += 1;
            if guard > 2_000_000 {
                return Err(Error::Integration("step budget exhausted".into()));
            }
            let remaining = target - self.t;
            let last = self.h.abs() >= remaining.abs();
            let h = if last { remaining } else { self.h };
            let min_step = 1e-14 * self.t.abs().max(1.0);
            if h.abs() < min_step && !last {
                return Err(Error::Integration(format!("step size underflow at t = {}", self.t)));
            }
            let (y_new, err) = self.trial(h);
            if !err.is_finite() || !y_new.iter().all(|v| v.is_finite()) {
                self.h = 0.25 * h;
                continue;
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 {
                if self.y[0] * y_new[0] < 0.0 {
                    self.sign_changes += 1;
                }
                self.t = if last { target } else { self.t + h };
                self.y = y_new;
                self.steps += 1;
                if !last {
                    self.h = h * factor;
                }
            } else {
                self.h = h * factor.min(1.0);
            }
        }
        Ok(())
    }
}

fn norm(v: &State) -> f64 {
    v[0].hypot(v[1])
}
