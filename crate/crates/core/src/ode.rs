//! Adaptive Dormand-Prince 5(4) integrator for the profile ODEs.

use serde::{Deserialize, Serialize};

/// Step-size control parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-12,
            atol: 1e-14,
            h_init: 1e-3,
            h_min: 1e-12,
            h_max: 0.05,
            max_steps: 2_000_000,
        }
    }
}

/// Why an integration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Reached,
    Observer,
    StepCollapse,
    NonFinite,
    MaxSteps,
}

#[derive(Debug, Clone)]
pub struct OdeOutcome {
    pub t: f64,
    pub state: Vec<f64>,
    pub reason: StopReason,
    /// Last accepted step, usable as the initial step of a continuation.
    pub h_last: f64,
    pub steps: usize,
}

/// Whether the observer wants to continue after an accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates u' = rhs(t, u) from `t0` to `t_end > t0`.
///
/// The observer sees every accepted step as (t_prev, u_prev, t, u) and may
/// stop the integration. A step below `h_min` ends with `StepCollapse`.
pub fn integrate<F, O>(
    mut rhs: F,
    t0: f64,
    u0: &[f64],
    t_end: f64,
    opts: &OdeOptions,
    mut observer: O,
) -> OdeOutcome
where
    F: FnMut(f64, &[f64], &mut [f64]),
    O: FnMut(f64, &[f64], f64, &[f64]) -> Control,
{
    let n = u0.len();
    let mut t = t0;
    let mut u = u0.to_vec();
    let mut h = opts.h_init.min(opts.h_max).min(t_end - t0);
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 7];
    let mut tmp = vec![0.0; n];
    let mut unew = vec![0.0; n];
    rhs(t, &u, &mut k[0]);
    let mut steps = 0;
    let mut h_last = h;
    let done = |t: f64| t >= t_end - 1e-14 * t_end.abs().max(1.0);
    while !done(t) {
        if steps >= opts.max_steps {
            return OdeOutcome {
                t,
                state: u,
                reason: StopReason::MaxSteps,
                h_last,
                steps,
            };
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }
        macro_rules! stage {
            ($dst:expr, $c:expr, $($a:expr => $ki:expr),+) => {{
                for i in 0..n {
                    tmp[i] = u[i] + h * (0.0 $(+ $a * k[$ki][i])+);
                }
                let (head, tail) = k.split_at_mut($dst);
                let _ = head;
                rhs(t + $c * h, &tmp, &mut tail[0]);
            }};
        }
        stage!(1, C2, A21 => 0);
        stage!(2, C3, A31 => 0, A32 => 1);
        stage!(3, C4, A41 => 0, A42 => 1, A43 => 2);
        stage!(4, C5, A51 => 0, A52 => 1, A53 => 2, A54 => 3);
        stage!(5, 1.0, A61 => 0, A62 => 1, A63 => 2, A64 => 3, A65 => 4);
        for i in 0..n {
            unew[i] = u[i]
                + h * (B1 * k[0][i] + B3 * k[2][i] + B4 * k[3][i] + B5 * k[4][i] + B6 * k[5][i]);
        }
        {
            let (head, tail) = k.split_at_mut(6);
            let _ = head;
            rhs(t + h, &unew, &mut tail[0]);
        }
        let mut err = 0.0;
        let mut finite = true;
        for i in 0..n {
            let e = h
                * (E1 * k[0][i]
                    + E3 * k[2][i]
                    + E4 * k[3][i]
                    + E5 * k[4][i]
                    + E6 * k[5][i]
                    + E7 * k[6][i]);
            let sc = opts.atol + opts.rtol * u[i].abs().max(unew[i].abs());
            err += (e / sc) * (e / sc);
            finite &= unew[i].is_finite();
        }
        let err = (err / n as f64).sqrt();
        if !finite || !err.is_finite() {
            if h <= opts.h_min {
                return OdeOutcome {
                    t,
                    state: u,
                    reason: StopReason::NonFinite,
                    h_last,
                    steps,
                };
            }
            h *= 0.25;
            continue;
        }
        if err <= 1.0 {
            let t_prev = t;
            let u_prev = std::mem::replace(&mut u, unew.clone());
            t = if last { t_end } else { t + h };
            k.swap(0, 6);
            steps += 1;
            h_last = h;
            if observer(t_prev, &u_prev, t, &u) == Control::Stop {
                return OdeOutcome {
                    t,
                    state: u,
                    reason: StopReason::Observer,
                    h_last,
                    steps,
                };
            }
            let fac = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h = (h * fac).min(opts.h_max);
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            if h < opts.h_min {
                return OdeOutcome {
                    t,
                    state: u,
                    reason: StopReason::StepCollapse,
                    h_last,
                    steps,
                };
            }
        }
    }
    OdeOutcome {
        t,
        state: u,
        reason: StopReason::Reached,
        h_last,
        steps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_period() {
        let opts = OdeOptions {
            rtol: 1e-12,
            atol: 1e-14,
            h_max: 0.1,
            ..Default::default()
        };
        let out = integrate(
            |_, u, du| {
                du[0] = u[1];
                du[1] = -u[0];
            },
            0.0,
            &[1.0, 0.0],
            2.0 * std::f64::consts::PI,
            &opts,
            |_, _, _, _| Control::Continue,
        );
        assert_eq!(out.reason, StopReason::Reached);
        assert!((out.state[0] - 1.0).abs() < 1e-10);
        assert!(out.state[1].abs() < 1e-10);
    }

    #[test]
    fn observer_stops() {
        let out = integrate(
            |_, _, du| du[0] = 1.0,
            0.0,
            &[0.0],
            10.0,
            &OdeOptions::default(),
            |_, _, _, u| {
                if u[0] > 1.0 {
                    Control::Stop
                } else {
                    Control::Continue
                }
            },
        );
        assert_eq!(out.reason, StopReason::Observer);
        assert!(out.t > 1.0 && out.t < 1.2);
    }

    #[test]
    fn blow_up_collapses_step() {
        let opts = OdeOptions {
            h_min: 1e-10,
            ..Default::default()
        };
        let out = integrate(
            |_, u, du| du[0] = u[0] * u[0],
            0.0,
            &[1.0],
            2.0,
            &opts,
            |_, _, _, _| Control::Continue,
        );
        assert_ne!(out.reason, StopReason::Reached);
        assert!(out.t < 1.0);
    }
}
