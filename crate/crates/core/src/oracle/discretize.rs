use serde::Serialize;

use super::{RadialProblem, MIN_GRID};
use crate::error::{Error, Result};

/// Generalized symmetric tridiagonal eigenproblem `A psi = Lambda B psi`
/// with diagonal positive `B`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TridiagonalPencil {
    /// Diagonal of `A`.
    pub diag: Vec<f64>,
    /// Off-diagonal of `A` (length `n - 1`).
    pub off: Vec<f64>,
    /// Diagonal of `B`.
    pub weight: Vec<f64>,
    /// Cell-centred nodes in the mapped variable.
    pub nodes: Vec<f64>,
    pub step: f64,
}

impl TridiagonalPencil {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `(diag, off)` of `B^{-1/2} A B^{-1/2}`.
    pub fn symmetric_form(&self) -> (Vec<f64>, Vec<f64>) {
        let s: Vec<f64> = self.weight.iter().map(|w| w.sqrt().recip()).collect();
        let diag = self.diag.iter().zip(&s).map(|(a, si)| a * si * si).collect();
        let off = self
            .off
            .iter()
            .enumerate()
            .map(|(i, e)| e * s[i] * s[i + 1])
            .collect();
        (diag, off)
    }

    /// Dense copy of `A`, for inspection of small problems.
    pub fn dense(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            m[i][i] = self.diag[i];
            if i + 1 < n {
                m[i][i + 1] = self.off[i];
                m[i + 1][i] = self.off[i];
            }
        }
        m
    }
}

/// Second-order central differences on `n` cell-centred nodes. The defect
/// end uses a mirror ghost node (Neumann) or an antisymmetric ghost node
/// (Dirichlet); the far end is always Dirichlet.
pub fn discretize(problem: &RadialProblem, n: usize) -> Result<TridiagonalPencil> {
    if n < MIN_GRID {
        return Err(Error::InvalidInput(format!("grid size {n} must be at least {MIN_GRID}")));
    }
    let (a, b) = problem.mapped_interval();
    if !(b > a) || !a.is_finite() || !b.is_finite() {
        return Err(Error::Domain(format!("empty mapped interval [{a}, {b}]")));
    }
    let h = (b - a) / n as f64;
    let inv_h2 = 1.0 / (h * h);
    let mut diag = Vec::with_capacity(n);
    let mut weight = Vec::with_capacity(n);
    let mut nodes = Vec::with_capacity(n);
    for i in 0..n {
        let t = a + (i as f64 + 0.5) * h;
        let (q, rho) = problem.coefficients(t);
        let mut d = 2.0 * inv_h2 + q;
        if i == 0 {
            d += if problem.left_is_neumann() { -inv_h2 } else { inv_h2 };
        }
        if i == n - 1 {
            d += inv_h2;
        }
        diag.push(d);
        weight.push(rho);
        nodes.push(t);
    }
    if weight.iter().any(|w| !(*w > 0.0)) || diag.iter().any(|d| !d.is_finite()) {
        return Err(Error::Domain("degenerate weight or coefficient on the grid".into()));
    }
    Ok(TridiagonalPencil {
        diag,
        off: vec![-inv_h2; n - 1],
        weight,
        nodes,
        step: h,
    })
}
