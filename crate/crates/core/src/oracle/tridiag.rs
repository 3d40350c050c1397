//! Sturm-sequence bisection for the pencil `A - x B`.
//!
//! With `B` diagonal and positive, the number of negative pivots of the
//! `LDL^T` factorization of `A - x B` equals the number of eigenvalues of
//! `B^{-1/2} A B^{-1/2}` below `x`. Working on the pencil avoids the huge
//! entries the similarity transform produces where the weight is small.

use super::TridiagonalPencil;
use crate::error::{Error, Result};

const MAX_BRACKET_DOUBLINGS: usize = 2000;
const MAX_BISECTIONS: usize = 400;

pub(crate) fn count_below(p: &TridiagonalPencil, x: f64) -> usize {
    let mut count = 0;
    let mut pivot = 1.0;
    for i in 0..p.len() {
        let e2 = if i == 0 { 0.0 } else { p.off[i - 1] * p.off[i - 1] };
        pivot = p.diag[i] - x * p.weight[i] - if i == 0 { 0.0 } else { e2 / pivot };
        if pivot == 0.0 {
            // Perturb an exact zero pivot; it only decides ties.
            pivot = -f64::EPSILON * (p.diag[i].abs() + x.abs() * p.weight[i]).max(f64::MIN_POSITIVE);
        }
        if pivot < 0.0 {
            count += 1;
        }
    }
    count
}

fn bracket(p: &TridiagonalPencil, count: usize) -> Result<(f64, f64)> {
    let mut lo = -1.0;
    let mut it = 0;
    while count_below(p, lo) > 0 {
        lo *= 2.0;
        it += 1;
        if it > MAX_BRACKET_DOUBLINGS || !lo.is_finite() {
            return Err(Error::SolverFailure {
                iterations: it,
                message: "no lower bound for the spectrum".into(),
            });
        }
    }
    let mut hi = 1.0;
    it = 0;
    while count_below(p, hi) < count {
        hi *= 2.0;
        it += 1;
        if it > MAX_BRACKET_DOUBLINGS || !hi.is_finite() {
            return Err(Error::SolverFailure {
                iterations: it,
                message: format!("fewer than {count} eigenvalues below {hi}"),
            });
        }
    }
    Ok((lo, hi))
}

/// The lowest `count` eigenvalues, ascending.
pub(crate) fn lowest_eigenvalues(p: &TridiagonalPencil, count: usize) -> Result<Vec<f64>> {
    let (lo, hi) = bracket(p, count)?;
    let mut out = Vec::with_capacity(count);
    let mut floor = lo;
    for k in 0..count {
        // Smallest x with more than k eigenvalues below it.
        let (mut a, mut b) = (floor, hi);
        let mut it = 0;
        while b - a > 2.0 * f64::EPSILON * a.abs().max(b.abs()) + f64::MIN_POSITIVE {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if count_below(p, mid) > k {
                b = mid;
            } else {
                a = mid;
            }
            it += 1;
            if it > MAX_BISECTIONS {
                return Err(Error::SolverFailure {
                    iterations: it,
                    message: format!("bisection for eigenvalue {k} did not converge in [{a}, {b}]"),
                });
            }
        }
        let value = 0.5 * (a + b);
        out.push(value);
        floor = a;
    }
    Ok(out)
}
