//! Independent eigenvalue oracle for the radial equation.
//!
//! The radial operator `psi'' + r/(r^2 - beta^2) psi'` is
//! `(1/w) (w psi')'` with `w = sqrt(|r^2 - beta^2|)`, singular at `r = beta`.
//! Rather than cutting the domain at `r = beta (1 +- m)`, both sides are
//! mapped to a regular Sturm–Liouville problem:
//!
//! ```text
//! outer  r = beta cosh u,  u >= 0:        -psi_uu + [V rho + iota^2] psi = Lambda rho psi
//! inner  r = beta cos t,   0 <= t < pi/2: -psi_tt + [V rho - iota^2] psi = Lambda rho psi
//! ```
//!
//! with `rho = beta^2 sinh^2 u` (resp. `beta^2 sin^2 t`) and
//! `V = 2 M eta r^2 + 2 M gamma / r^2`. Both equations are smooth at the
//! image of `r = beta`; the solution that is analytic in `x = r^2/beta^2`
//! there is even in `u` (or `t`), i.e. satisfies a Neumann condition. That is
//! the default [`DefectBoundary::Regular`]. A Dirichlet condition at a
//! relative margin from `r = beta` is available as
//! [`DefectBoundary::Dirichlet`].
//!
//! The far end (`r = R` outside, `r = eps` inside) is Dirichlet.

mod discretize;
mod shoot;
mod tridiag;

pub use discretize::{discretize, TridiagonalPencil};
pub use shoot::{shoot, shoot_with, ShootOptions, ShootResult};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::DerivedParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainSide {
    /// `0 < r < beta`.
    Inner,
    /// `r > beta`.
    Outer,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum DefectBoundary {
    /// Solution analytic in `x` at `r = beta`.
    Regular,
    /// `psi = 0` at `r = beta (1 +- margin)`.
    Dirichlet { margin: f64 },
}

/// Smallest accepted Dirichlet margin around `r = beta`.
pub const MIN_DEFECT_MARGIN: f64 = 1e-4;
/// Inner cutoff `eps` as a fraction of `beta` when `gamma > 0`. A Dirichlet
/// cutoff moves eigenvalues by `O(eps^(2j))`; without an inverse-square term
/// `r = 0` is a regular point and the cutoff sits exactly there.
pub const DEFAULT_INNER_FRACTION: f64 = 1e-9;
/// The outer radius is this multiple of the estimated turning point.
pub const TURNING_POINT_FACTOR: f64 = 4.0;
/// Outer radius used when there is no confining term.
pub const DEFAULT_BOX_RADIUS: f64 = 20.0;
pub const MAX_EIGENVALUES: usize = 20;
pub const MIN_GRID: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialProblem {
    pub derived: DerivedParams,
    pub side: DomainSide,
    pub boundary: DefectBoundary,
    /// Far radius: `R` on the outer side, `eps` on the inner side.
    pub far_radius: f64,
}

/// Rough radius of the `count`-th classical turning point for the
/// confined problem.
fn turning_point_estimate(d: &DerivedParams, count: usize) -> Option<f64> {
    if d.two_m_eta <= 0.0 {
        return None;
    }
    let a = d.two_m_eta.powf(-0.25);
    let nu = (d.iota * d.iota + d.two_m_gamma).sqrt();
    Some(a * (4.0 * count as f64 + 2.0 * nu + 2.0).sqrt())
}

impl RadialProblem {
    /// Problem with default domain for the lowest `MAX_EIGENVALUES` levels.
    pub fn new(derived: DerivedParams, side: DomainSide) -> Result<Self> {
        let far_radius = match side {
            DomainSide::Inner if derived.two_m_gamma == 0.0 => 0.0,
            DomainSide::Inner => DEFAULT_INNER_FRACTION * derived.beta,
            DomainSide::Outer => match turning_point_estimate(&derived, MAX_EIGENVALUES) {
                Some(rt) => (TURNING_POINT_FACTOR * rt).max(2.0 * derived.beta),
                None => DEFAULT_BOX_RADIUS.max(2.0 * derived.beta),
            },
        };
        let p = Self {
            derived,
            side,
            boundary: DefectBoundary::Regular,
            far_radius,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_boundary(mut self, boundary: DefectBoundary) -> Result<Self> {
        self.boundary = boundary;
        self.validate()?;
        Ok(self)
    }

    pub fn with_far_radius(mut self, far_radius: f64) -> Result<Self> {
        self.far_radius = far_radius;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        let beta = self.derived.beta;
        let margin = match self.boundary {
            DefectBoundary::Regular => 0.0,
            DefectBoundary::Dirichlet { margin } => {
                if !(MIN_DEFECT_MARGIN..1.0).contains(&margin) {
                    return Err(Error::InvalidInput(format!(
                        "defect margin {margin} must lie in [{MIN_DEFECT_MARGIN}, 1)"
                    )));
                }
                margin
            }
        };
        if !self.far_radius.is_finite() {
            return Err(Error::NonFinite("far radius"));
        }
        match self.side {
            DomainSide::Outer if self.far_radius <= beta * (1.0 + margin) => Err(Error::Domain(format!(
                "outer domain [{}, {}] crosses r = beta",
                beta * (1.0 + margin),
                self.far_radius
            ))),
            DomainSide::Inner if !(self.far_radius >= 0.0 && self.far_radius < beta * (1.0 - margin)) => {
                Err(Error::Domain(format!(
                    "inner domain [{}, {}] must lie in [0, beta)",
                    self.far_radius,
                    beta * (1.0 - margin)
                )))
            }
            DomainSide::Inner if self.far_radius == 0.0 && self.derived.two_m_gamma != 0.0 => Err(Error::Domain(
                "the inverse-square term is singular at r = 0; use a positive inner cutoff".into(),
            )),
            _ => Ok(()),
        }
    }

    /// Interval in the mapped variable, ordered from the defect radius
    /// outwards.
    pub fn mapped_interval(&self) -> (f64, f64) {
        let beta = self.derived.beta;
        let m = match self.boundary {
            DefectBoundary::Regular => 0.0,
            DefectBoundary::Dirichlet { margin } => margin,
        };
        match self.side {
            DomainSide::Outer => ((1.0 + m).acosh(), (self.far_radius / beta).acosh()),
            DomainSide::Inner => ((1.0 - m).acos(), (self.far_radius / beta).acos()),
        }
    }

    /// Radial domain `(r_lo, r_hi)`.
    pub fn radial_domain(&self) -> (f64, f64) {
        let (a, b) = self.mapped_interval();
        let (ra, rb) = (self.radius_at(a), self.radius_at(b));
        (ra.min(rb), ra.max(rb))
    }

    pub fn radius_at(&self, t: f64) -> f64 {
        let beta = self.derived.beta;
        match self.side {
            DomainSide::Outer => beta * t.cosh(),
            DomainSide::Inner => beta * t.cos(),
        }
    }

    /// `(q(t), rho(t))` of `-psi'' + q psi = Lambda rho psi`.
    pub fn coefficients(&self, t: f64) -> (f64, f64) {
        let d = &self.derived;
        let beta = d.beta;
        let iota2 = d.iota * d.iota;
        match self.side {
            DomainSide::Outer => {
                let s = beta * t.sinh();
                let rho = s * s;
                let r = beta * t.cosh();
                (d.scaled_potential(r) * rho + iota2, rho)
            }
            DomainSide::Inner => {
                let s = beta * t.sin();
                let rho = s * s;
                let r = beta * t.cos();
                (d.scaled_potential(r) * rho - iota2, rho)
            }
        }
    }

    pub fn left_is_neumann(&self) -> bool {
        matches!(self.boundary, DefectBoundary::Regular)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleMethod {
    FiniteDifference,
    Shooting,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleSpectrum {
    pub side: DomainSide,
    pub boundary: DefectBoundary,
    pub method: OracleMethod,
    /// `(r_lo, r_hi)`.
    pub domain: (f64, f64),
    /// Coarsest grid; the solve also uses `2N` and `4N`.
    pub grid_n: usize,
    /// Richardson-extrapolated eigenvalues (`Lambda` or `Theta`).
    pub eigenvalues: Vec<f64>,
    /// Eigenvalues on the finest grid.
    pub finest: Vec<f64>,
    /// `|E_2N - E_4N| / 3`.
    pub error_estimates: Vec<f64>,
    /// `log2((E_N - E_2N) / (E_2N - E_4N))`.
    pub convergence_order: Vec<f64>,
}

/// Lowest `count` eigenvalues from grids `n`, `2n`, `4n`.
pub fn eigen_solve(problem: &RadialProblem, n: usize, count: usize) -> Result<OracleSpectrum> {
    if count == 0 || count > MAX_EIGENVALUES {
        return Err(Error::InvalidInput(format!(
            "eigenvalue count {count} must lie in 1..={MAX_EIGENVALUES}"
        )));
    }
    if n < MIN_GRID {
        return Err(Error::InvalidInput(format!("grid size {n} must be at least {MIN_GRID}")));
    }
    let levels = [n, 2 * n, 4 * n]
        .iter()
        .map(|&m| discretize(problem, m).and_then(|p| tridiag::lowest_eigenvalues(&p, count)))
        .collect::<Result<Vec<_>>>()?;
    let (coarse, mid, fine) = (&levels[0], &levels[1], &levels[2]);
    let mut eigenvalues = Vec::with_capacity(count);
    let mut error_estimates = Vec::with_capacity(count);
    let mut convergence_order = Vec::with_capacity(count);
    for k in 0..count {
        let d1 = coarse[k] - mid[k];
        let d2 = mid[k] - fine[k];
        eigenvalues.push(fine[k] - d2 / 3.0);
        error_estimates.push(d2.abs() / 3.0);
        convergence_order.push((d1 / d2).abs().log2());
    }
    if eigenvalues.windows(2).any(|w| !(w[1] > w[0])) {
        // Extrapolation must not reorder nearly degenerate levels.
        eigenvalues = fine.clone();
    }
    if eigenvalues.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::SolverFailure {
            iterations: 0,
            message: "discrete spectrum is not strictly increasing".into(),
        });
    }
    Ok(OracleSpectrum {
        side: problem.side,
        boundary: problem.boundary,
        method: OracleMethod::FiniteDifference,
        domain: problem.radial_domain(),
        grid_n: n,
        eigenvalues,
        finest: fine.clone(),
        error_estimates,
        convergence_order,
    })
}

/// Refines every finite-difference eigenvalue by shooting with the node
/// count of its index.
pub fn shoot_spectrum(problem: &RadialProblem, fd: &OracleSpectrum) -> Result<OracleSpectrum> {
    let mut eigenvalues = Vec::with_capacity(fd.eigenvalues.len());
    for (k, &e) in fd.eigenvalues.iter().enumerate() {
        let gap = |other: Option<&f64>| other.map(|o| (o - e).abs()).unwrap_or(e.abs().max(1.0));
        let half = 0.25 * gap(fd.eigenvalues.get(k + 1)).min(gap(k.checked_sub(1).and_then(|i| fd.eigenvalues.get(i))));
        let r = shoot(problem, (e - half, e + half), k)?;
        eigenvalues.push(r.lambda);
    }
    Ok(OracleSpectrum {
        method: OracleMethod::Shooting,
        finest: eigenvalues.clone(),
        error_estimates: vec![0.0; eigenvalues.len()],
        convergence_order: vec![f64::NAN; eigenvalues.len()],
        eigenvalues,
        ..fd.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DefectGeometry, FluxField, ParticleConfig};
    use crate::potentials::{AnharmonicParams, PotentialModel};

    pub(super) fn problem(eta: f64, gamma: f64, beta: f64, l: i64, side: DomainSide) -> RadialProblem {
        let d = PotentialModel::Anharmonic(AnharmonicParams { eta, gamma, delta: 0.0 })
            .derive(
                &DefectGeometry::new(beta, 1.0).unwrap(),
                &FluxField::zero(),
                &ParticleConfig::new(1.0, l, 1).unwrap(),
            )
            .unwrap();
        RadialProblem::new(d, side).unwrap()
    }

    #[test]
    fn domain_validation() {
        let p = problem(1.0, 0.5, 0.5, 0, DomainSide::Outer);
        assert!(p.with_far_radius(0.4).is_err());
        assert!(p.with_boundary(DefectBoundary::Dirichlet { margin: 1e-6 }).is_err());
        assert!(p.with_boundary(DefectBoundary::Dirichlet { margin: 1e-3 }).is_ok());
        let q = problem(1.0, 0.5, 0.5, 0, DomainSide::Inner);
        assert!(q.with_far_radius(0.6).is_err());
        assert!(q.with_far_radius(0.0).is_err());
        assert!(q.with_far_radius(-1.0).is_err());
        let free = problem(1.0, 0.0, 0.5, 0, DomainSide::Inner);
        assert_eq!(free.far_radius, 0.0);
        let (lo, hi) = q.radial_domain();
        assert!(lo > 0.0 && hi <= 0.5);
    }

    #[test]
    fn outer_radius_encloses_turning_point() {
        let p = problem(1.0, 0.5, 0.5, 0, DomainSide::Outer);
        let rt = turning_point_estimate(&p.derived, MAX_EIGENVALUES).unwrap();
        assert!(p.far_radius >= 3.0 * rt);
        let b = problem(0.0, 0.0, 0.5, 0, DomainSide::Outer);
        assert_eq!(b.far_radius, DEFAULT_BOX_RADIUS);
    }

    #[test]
    fn spectrum_is_increasing_and_second_order() {
        let p = problem(1.0, 0.5, 0.5, 1, DomainSide::Outer);
        let s = eigen_solve(&p, 400, 6).unwrap();
        assert!(s.eigenvalues.windows(2).all(|w| w[1] > w[0]));
        for order in &s.convergence_order {
            assert!((1.8..=2.2).contains(order), "order {order}");
        }
        assert!(eigen_solve(&p, 50, 3).is_err());
        assert!(eigen_solve(&p, 400, 0).is_err());
        assert!(eigen_solve(&p, 400, 21).is_err());
    }

    #[test]
    fn shooting_agrees_with_finite_differences() {
        for side in [DomainSide::Outer, DomainSide::Inner] {
            let p = problem(1.0, 0.5, 0.5, 1, side);
            let fd = eigen_solve(&p, 1000, 3).unwrap();
            let sh = shoot_spectrum(&p, &fd).unwrap();
            for (a, b) in fd.eigenvalues.iter().zip(&sh.eigenvalues) {
                assert!((a - b).abs() <= 1e-6 * b.abs().max(1.0), "{side:?}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn dirichlet_variant_solves() {
        let p = problem(1.0, 0.5, 0.5, 1, DomainSide::Outer)
            .with_boundary(DefectBoundary::Dirichlet { margin: 1e-3 })
            .unwrap();
        let fd = eigen_solve(&p, 400, 2).unwrap();
        let regular = eigen_solve(&problem(1.0, 0.5, 0.5, 1, DomainSide::Outer), 400, 2).unwrap();
        // Clamping the defect end raises the levels.
        assert!(fd.eigenvalues[0] > regular.eigenvalues[0]);
    }
}
