//! Two-sided shooting with an embedded Dormand–Prince 5(4) integrator.
//!
//! The mismatch function is the Wronskian of the two boundary solutions at a
//! fixed matching point, divided by the norms of both state vectors. It is
//! continuous in `Lambda` and vanishes exactly at eigenvalues.

use serde::Serialize;

use super::RadialProblem;
use crate::error::{Error, Result};

const RTOL: f64 = 1e-12;
const SCAN_INTERVALS: usize = 64;
/// Relative bisection tolerance on `Lambda`.
pub const SHOOT_TOLERANCE: f64 = 1e-12;
const MAX_STEPS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ShootOptions {
    /// Exchange the roles of the two boundary solutions and mirror the
    /// matching point within the classically allowed interval.
    pub swapped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShootResult {
    pub lambda: f64,
    pub nodes: usize,
    pub matching_point: f64,
    pub evaluations: usize,
}

// Dormand–Prince tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// Fifth-order weights are the last row of A; E = b5 - b4.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

type State = [f64; 2];

/// Integrates `psi'' = (q - lambda rho) psi` from `t0` to `t1` and returns
/// the final state and the number of sign changes of `psi` on the way.
/// The state is rescaled freely; only its direction is meaningful.
fn integrate(problem: &RadialProblem, lambda: f64, t0: f64, y0: State, t1: f64) -> Result<(State, usize)> {
    let f = |t: f64, y: State| -> State {
        let (q, rho) = problem.coefficients(t);
        [y[1], (q - lambda * rho) * y[0]]
    };
    let span = t1 - t0;
    let dir = span.signum();
    let h_max = span.abs() / 200.0;
    let mut h = (span.abs() / 1000.0).min(h_max) * dir;
    let mut t = t0;
    let mut y = y0;
    let mut k = [[0.0; 2]; 7];
    k[0] = f(t, y);
    let mut sign_changes = 0;
    let mut last_sign = 0.0_f64;
    let mut steps = 0;
    while (t1 - t) * dir > 0.0 {
        steps += 1;
        if steps > MAX_STEPS {
            return Err(Error::SolverFailure {
                iterations: steps,
                message: format!("step limit reached at t = {t}"),
            });
        }
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }
        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                ys[0] += h * A[s][j] * kj[0];
                ys[1] += h * A[s][j] * kj[1];
            }
            k[s] = f(t + C[s] * h, ys);
        }
        let mut y_new = y;
        let mut err = [0.0; 2];
        for s in 0..7 {
            let b = if s < 6 { A[6][s] } else { 0.0 };
            y_new[0] += h * b * k[s][0];
            y_new[1] += h * b * k[s][1];
            err[0] += h * E[s] * k[s][0];
            err[1] += h * E[s] * k[s][1];
        }
        let scale = y[0].hypot(y[1]).max(y_new[0].hypot(y_new[1]));
        let ratio = err[0].hypot(err[1]) / (RTOL * scale + f64::MIN_POSITIVE);
        if ratio <= 1.0 || h.abs() <= 1e-14 * span.abs() {
            t += h;
            y = y_new;
            k[0] = k[6];
            let norm = y[0].hypot(y[1]);
            if norm > 1e100 || (norm < 1e-100 && norm > 0.0) {
                let s = 1.0 / norm;
                y = [y[0] * s, y[1] * s];
                k[0] = [k[0][0] * s, k[0][1] * s];
            }
            if y[0] != 0.0 {
                let sign = y[0].signum();
                if last_sign != 0.0 && sign != last_sign {
                    sign_changes += 1;
                }
                last_sign = sign;
            }
        }
        let factor = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
        h = (h * factor).abs().min(h_max) * dir;
        if !h.is_finite() || h == 0.0 {
            return Err(Error::SolverFailure {
                iterations: steps,
                message: format!("step size collapsed at t = {t}"),
            });
        }
    }
    Ok((y, sign_changes))
}

struct Shooter<'a> {
    problem: &'a RadialProblem,
    a: f64,
    b: f64,
    matching: f64,
    swapped: bool,
}

impl Shooter<'_> {
    fn left_start(&self) -> State {
        if self.problem.left_is_neumann() {
            [1.0, 0.0]
        } else {
            [0.0, 1.0]
        }
    }

    /// Normalized Wronskian and the node count of the glued solution.
    fn mismatch(&self, lambda: f64) -> Result<(f64, usize)> {
        let (yl, nl) = integrate(self.problem, lambda, self.a, self.left_start(), self.matching)?;
        let (yr, nr) = integrate(self.problem, lambda, self.b, [0.0, -1.0], self.matching)?;
        let (p, q) = if self.swapped { (yr, yl) } else { (yl, yr) };
        let w = p[0] * q[1] - p[1] * q[0];
        let norm = p[0].hypot(p[1]) * q[0].hypot(q[1]);
        let sign = if self.swapped { -1.0 } else { 1.0 };
        Ok((sign * w / norm, nl + nr))
    }
}

/// Matching point: where `lambda rho - q` is largest, i.e. deep in the
/// classically allowed region for the window centre.
fn matching_point(problem: &RadialProblem, lambda: f64, a: f64, b: f64, swapped: bool) -> f64 {
    const SAMPLES: usize = 400;
    let mut best = (f64::NEG_INFINITY, 0.5 * (a + b));
    let mut allowed: Option<(f64, f64)> = None;
    for i in 1..SAMPLES {
        let t = a + (b - a) * i as f64 / SAMPLES as f64;
        let (q, rho) = problem.coefficients(t);
        let k2 = lambda * rho - q;
        if k2 > best.0 {
            best = (k2, t);
        }
        if k2 > 0.0 {
            allowed = Some(match allowed {
                None => (t, t),
                Some((lo, _)) => (lo, t),
            });
        }
    }
    let t = if best.0 > 0.0 { best.1 } else { 0.5 * (a + b) };
    match (swapped, allowed) {
        (true, Some((lo, hi))) => lo + hi - t,
        _ => t,
    }
}

pub fn shoot(problem: &RadialProblem, window: (f64, f64), node_target: usize) -> Result<ShootResult> {
    shoot_with(problem, window, node_target, ShootOptions::default())
}

pub fn shoot_with(
    problem: &RadialProblem,
    window: (f64, f64),
    node_target: usize,
    options: ShootOptions,
) -> Result<ShootResult> {
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(Error::InvalidInput(format!("shooting window [{lo}, {hi}] is empty")));
    }
    let (a, b) = problem.mapped_interval();
    let shooter = Shooter {
        problem,
        a,
        b,
        matching: matching_point(problem, 0.5 * (lo + hi), a, b, options.swapped),
        swapped: options.swapped,
    };
    let mut evaluations = 0;
    let mut eval = |x: f64| {
        evaluations += 1;
        shooter.mismatch(x)
    };
    let mut trace = Vec::new();
    let mut prev = (lo, eval(lo)?.0);
    let mut found = Vec::new();
    for i in 1..=SCAN_INTERVALS {
        let x = lo + (hi - lo) * i as f64 / SCAN_INTERVALS as f64;
        let fx = eval(x)?.0;
        if (fx < 0.0) != (prev.1 < 0.0) || fx == 0.0 {
            // Bisect the bracket.
            let (mut l, mut r, mut fl) = (prev.0, x, prev.1);
            while r - l > SHOOT_TOLERANCE * l.abs().max(r.abs()).max(f64::MIN_POSITIVE) {
                let m = 0.5 * (l + r);
                if m <= l || m >= r {
                    break;
                }
                let fm = eval(m)?.0;
                if fm == 0.0 {
                    l = m;
                    r = m;
                    break;
                }
                if (fm < 0.0) == (fl < 0.0) {
                    l = m;
                    fl = fm;
                } else {
                    r = m;
                }
            }
            let root = 0.5 * (l + r);
            let nodes = eval(root)?.1;
            trace.push(format!("root {root} with {nodes} nodes"));
            if nodes == node_target {
                found.push(root);
                break;
            }
        }
        prev = (x, fx);
    }
    match found.first() {
        Some(&lambda) => Ok(ShootResult {
            lambda,
            nodes: node_target,
            matching_point: shooter.matching,
            evaluations,
        }),
        None => Err(Error::NotFound(format!(
            "no eigenvalue with {node_target} nodes in [{lo}, {hi}] ({} scan points; {})",
            SCAN_INTERVALS + 1,
            if trace.is_empty() { "no sign change".to_string() } else { trace.join(", ") }
        ))),
    }
}
