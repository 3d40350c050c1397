//! Cross-solver checks: Aharonov–Bohm periodicity, effective angular
//! momentum, normalization, the closed-form / series / oracle comparison and
//! parameter sweeps.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closed_form::{corrected_for_model, for_model, ClosedFormResult};
use crate::error::{Error, Result};
use crate::model::{energy_from_quantized, DefectGeometry, DerivedParams, FluxField, ParticleConfig};
use crate::numerics::integrate;
use crate::oracle::{eigen_solve, shoot_spectrum, DomainSide, OracleSpectrum, RadialProblem};
use crate::potentials::{AnharmonicParams, PotentialModel};
use crate::series::{
    coefficients, quantize, wavefunction, QuantizationResult, QuantizeMethod, SearchWindow, SeriesCoefficients, SeriesRoot,
};

/// Relative agreement required between solvers.
pub const AGREEMENT_TOLERANCE: f64 = 1e-4;
/// Relative tolerance for formula-level identities.
pub const IDENTITY_TOLERANCE: f64 = 1e-12;
/// Relative tolerance for oracle-level identities.
pub const ORACLE_IDENTITY_TOLERANCE: f64 = 1e-10;

/// `l - phi - beta k`, split the same way as the derived `iota`.
pub fn effective_l(l: i64, flux: &FluxField, geom: &DefectGeometry) -> f64 {
    (l - flux.whole_quanta()) as f64 - flux.fractional_part() - geom.beta() * geom.k()
}

/// Raw, unvalidated description of one physical setup.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub potential: PotentialModel,
    pub beta: f64,
    pub k: f64,
    pub phi_ab: f64,
    pub phi0: f64,
    pub mass: f64,
    pub l: i64,
    pub n: u32,
    /// Accept `beta >= 1` (and keep only `beta > 0`).
    #[serde(default)]
    pub unsafe_beta: bool,
}

impl SystemSpec {
    pub fn resolve(&self) -> Result<System> {
        let geom = if self.unsafe_beta {
            DefectGeometry::new_unchecked_beta(self.beta, self.k)?
        } else {
            DefectGeometry::new(self.beta, self.k)?
        };
        self.potential.validate()?;
        Ok(System {
            model: self.potential,
            geom,
            flux: FluxField::new(self.phi_ab, self.phi0)?,
            particle: ParticleConfig::new(self.mass, self.l, self.n)?,
        })
    }
}

/// Validated setup.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct System {
    pub model: PotentialModel,
    pub geom: DefectGeometry,
    pub flux: FluxField,
    pub particle: ParticleConfig,
}

impl System {
    pub fn derive(&self) -> Result<DerivedParams> {
        self.model.derive(&self.geom, &self.flux, &self.particle)
    }

    pub fn with_l(&self, l: i64) -> Self {
        Self {
            particle: self.particle.with_l(l),
            ..*self
        }
    }

    /// Flux shifted by whole quanta, exactly.
    pub fn with_flux_quanta(&self, nu: i64) -> Self {
        Self {
            flux: self.flux.shifted(nu),
            ..*self
        }
    }

    /// Flux rebuilt from `phi_ab + nu phi0`, as a user would enter it.
    pub fn with_flux_rebuilt(&self, nu: i64) -> Result<Self> {
        let phi0 = self.flux.phi0();
        Ok(Self {
            flux: FluxField::new(self.flux.phi_ab() + nu as f64 * phi0, phi0)?,
            ..*self
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Closed,
    Series,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverSelection {
    pub closed: bool,
    pub series: bool,
    pub oracle: bool,
}

impl SolverSelection {
    pub const ALL: Self = Self {
        closed: true,
        series: true,
        oracle: true,
    };

    pub fn only(kind: SolverKind) -> Self {
        Self {
            closed: kind == SolverKind::Closed,
            series: kind == SolverKind::Series,
            oracle: kind == SolverKind::Oracle,
        }
    }

    pub fn kinds(&self) -> Vec<SolverKind> {
        let mut out = Vec::new();
        if self.closed {
            out.push(SolverKind::Closed);
        }
        if self.series {
            out.push(SolverKind::Series);
        }
        if self.oracle {
            out.push(SolverKind::Oracle);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub solvers: SolverSelection,
    /// Coarsest oracle grid.
    pub grid_n: usize,
    pub oracle_levels: usize,
    pub window: SearchWindow,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            solvers: SolverSelection::ALL,
            grid_n: 1000,
            oracle_levels: 6,
            window: SearchWindow::default(),
        }
    }
}

fn relative_gap(a: Complex64, b: Complex64) -> f64 {
    let d = (a - b).norm();
    if d == 0.0 {
        0.0
    } else {
        d / a.norm().max(b.norm())
    }
}

fn lists_gap(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(x, y)| relative_gap(*x, *y)).fold(0.0, f64::max)
}

/// Energies one solver produces for a setup, in a fixed order.
pub fn solver_energies(system: &System, kind: SolverKind, options: &SolveOptions) -> Result<Vec<Complex64>> {
    let d = system.derive()?;
    match kind {
        SolverKind::Closed => {
            let r = for_model(&system.model, &system.geom, &system.flux, &system.particle)?;
            Ok(vec![r.e_plus, r.e_minus])
        }
        SolverKind::Series => {
            let q = quantize(&d, system.particle.n(), QuantizeMethod::Cnp1Root, &options.window)?;
            q.roots
                .iter()
                .map(|r| energy_from_quantized(r.lambda, &d).map(|e| Complex64::new(e, 0.0)))
                .collect()
        }
        SolverKind::Oracle => {
            let p = RadialProblem::new(d, DomainSide::Outer)?;
            let s = eigen_solve(&p, options.grid_n, options.oracle_levels)?;
            s.eigenvalues
                .iter()
                .map(|v| energy_from_quantized(*v, &d).map(|e| Complex64::new(e, 0.0)))
                .collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodicityRow {
    pub nu: i64,
    /// `max |E(l, phi_ab + nu phi0) - E(l - nu, phi_ab)|`, relative.
    pub deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Level shift at fixed `l`, `max |E(l, phi_ab + nu phi0) - E(l, phi_ab)|`;
    /// recorded, not asserted.
    pub fixed_l_shift: f64,
    /// `exp(2 pi i l_eff)` is unchanged under `(l, phi) -> (l + nu, phi + nu)`.
    pub phase_invariant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodicityReport {
    pub solver: SolverKind,
    pub rows: Vec<PeriodicityRow>,
    pub passed: bool,
}

pub fn periodicity_check(
    kind: SolverKind,
    base: &System,
    nu_max: u32,
    options: &SolveOptions,
) -> Result<PeriodicityReport> {
    let tolerance = match kind {
        SolverKind::Closed | SolverKind::Series => IDENTITY_TOLERANCE,
        SolverKind::Oracle => ORACLE_IDENTITY_TOLERANCE,
    };
    let l = base.particle.l();
    let reference = solver_energies(base, kind, options)?;
    let nu_max = nu_max as i64;
    let mut rows = Vec::new();
    for nu in -nu_max..=nu_max {
        let shifted = base.with_flux_rebuilt(nu)?;
        let lhs = solver_energies(&shifted, kind, options)?;
        let rhs = solver_energies(&base.with_l(l - nu), kind, options)?;
        let deviation = lists_gap(&lhs, &rhs);
        let phase_before = effective_l(l, &base.flux, &base.geom);
        let phase_after = effective_l(l + nu, &base.flux.shifted(nu), &base.geom);
        rows.push(PeriodicityRow {
            nu,
            deviation,
            tolerance,
            pass: deviation <= tolerance,
            fixed_l_shift: lists_gap(&lhs, &reference),
            phase_invariant: phase_factor(phase_before) == phase_factor(phase_after),
        });
    }
    let passed = rows.iter().all(|r| r.pass && r.phase_invariant);
    Ok(PeriodicityReport { solver: kind, rows, passed })
}

fn phase_factor(l_eff: f64) -> (u64, u64) {
    let z = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * l_eff);
    (z.re.to_bits(), z.im.to_bits())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "status")]
pub enum Normalization {
    Normalized {
        constant: f64,
        /// `int |psi|^2 sqrt|r^2 - beta^2| dr` before scaling.
        integral: f64,
        error_estimate: f64,
        domain: (f64, f64),
    },
    NotNormalizable {
        reason: String,
    },
}

/// Relative quadrature tolerance.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-10;
const DECAY_THRESHOLD: f64 = 1e-12;

/// Constant `Nc` with `int |Nc psi|^2 sqrt|r^2 - beta^2| dr = 1`, over
/// `[beta, r_max]` outside the defect or `[0, beta]` inside. The measure is
/// handled through `r = beta cosh u` (resp. `beta cos t`), which turns it
/// into `beta^2 sinh^2 u du`.
pub fn normalize(coeffs: &SeriesCoefficients, side: DomainSide, r_max: f64) -> Result<Normalization> {
    let beta = coeffs.derived.beta;
    type Map = fn(f64) -> f64;
    let (a, b, measure, x_of): (f64, f64, Map, Map) = match side {
        DomainSide::Outer => {
            if coeffs.derived.omega == 0.0 {
                return Ok(Normalization::NotNormalizable {
                    reason: "no exponential decay (omega = 0): the polynomial series grows".into(),
                });
            }
            if !(r_max > beta) || !r_max.is_finite() {
                return Err(Error::Domain(format!("cutoff {r_max} must exceed beta = {beta}")));
            }
            (0.0, (r_max / beta).acosh(), |u: f64| u.sinh().powi(2), |u: f64| u.cosh().powi(2))
        }
        DomainSide::Inner => (
            0.0,
            std::f64::consts::FRAC_PI_2,
            |t: f64| t.sin().powi(2),
            |t: f64| t.cos().powi(2),
        ),
    };
    let density = |t: f64| {
        let psi = wavefunction(coeffs, x_of(t));
        psi * psi * beta * beta * measure(t)
    };
    if side == DomainSide::Outer {
        const SAMPLES: usize = 2000;
        let peak = (0..=SAMPLES)
            .map(|i| {
                let psi = wavefunction(coeffs, x_of(a + (b - a) * i as f64 / SAMPLES as f64));
                psi * psi
            })
            .fold(0.0, f64::max);
        let end = wavefunction(coeffs, x_of(b)).powi(2);
        if !(end < DECAY_THRESHOLD * peak) {
            return Ok(Normalization::NotNormalizable {
                reason: format!("|psi(R)|^2 = {end:e} has not decayed below {DECAY_THRESHOLD:e} of its peak {peak:e}"),
            });
        }
    }
    let q = integrate(density, a, b, NORMALIZATION_TOLERANCE);
    if !(q.value > 0.0) || !q.value.is_finite() {
        return Err(Error::SolverFailure {
            iterations: q.segments,
            message: format!("normalization integral is {}", q.value),
        });
    }
    let r_at = |t: f64| x_of(t).sqrt() * beta;
    let (ra, rb) = (r_at(a), r_at(b));
    Ok(Normalization::Normalized {
        constant: q.value.sqrt().recip(),
        integral: q.value,
        error_estimate: q.error_estimate,
        domain: (ra.min(rb), ra.max(rb)),
    })
}

/// A solver's output or the reason it has none.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "status", content = "value")]
pub enum Outcome<T> {
    Ok(T),
    Failed(String),
    Skipped,
}

impl<T> Outcome<T> {
    fn from_result(r: Result<T>) -> Self {
        match r {
            Ok(v) => Outcome::Ok(v),
            Err(e) => Outcome::Failed(e.to_string()),
        }
    }

    pub fn ok(&self) -> Option<&T> {
        match self {
            Outcome::Ok(v) => Some(v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosedFormSummary {
    pub printed: ClosedFormResult,
    pub derived: ClosedFormResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesSummary {
    pub cnp1: QuantizationResult,
    pub two_condition: QuantizationResult,
    /// Present for `n = 1` only.
    pub n1_comparison: Option<QuantizationResult>,
    /// Energies of the `c_{n+1} = 0` roots.
    pub energies: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleSummary {
    pub outer: Outcome<OracleSpectrum>,
    pub inner: Outcome<OracleSpectrum>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RowInputs {
    pub spec: SystemSpec,
    pub iota: Option<f64>,
    pub j: Option<f64>,
    pub omega: Option<f64>,
}

/// Smallest relative gap between any pair drawn from two solvers, in the
/// spectral parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Deviations {
    pub closed_vs_series: Option<f64>,
    pub closed_vs_oracle: Option<f64>,
    pub series_vs_oracle: Option<f64>,
    pub corrected_vs_oracle: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// A printed branch, a series root and an oracle level agree.
    Consistent,
    /// Series and oracle agree but no printed branch does, or the printed
    /// branches are real and nothing corroborates them.
    FormulaMismatch,
    /// The printed formula has a negative radicand (complex branches).
    NonPhysical,
    /// A solver was skipped or failed, so no three-way verdict exists.
    Incomplete,
    /// The grid point itself is invalid.
    InvalidInput,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub inputs: RowInputs,
    pub closed_form: Outcome<ClosedFormSummary>,
    pub series: Outcome<SeriesSummary>,
    pub oracle: Outcome<OracleSummary>,
    pub deviations: Deviations,
    pub verdict: Verdict,
    pub verdict_reason: String,
}

fn agree(a: f64, b: f64) -> bool {
    (a - b).abs() <= AGREEMENT_TOLERANCE * a.abs().max(b.abs()).max(1.0)
}

fn gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

fn min_gap(a: &[f64], b: &[f64]) -> Option<f64> {
    a.iter()
        .flat_map(|x| b.iter().map(move |y| gap(*x, *y)))
        .min_by(f64::total_cmp)
}

fn real_spectral(r: &ClosedFormResult) -> Vec<f64> {
    r.real_spectral().map(|(p, m)| vec![p, m]).unwrap_or_default()
}

fn series_summary(d: &DerivedParams, n: u32, window: &SearchWindow) -> Result<SeriesSummary> {
    let cnp1 = quantize(d, n, QuantizeMethod::Cnp1Root, window)?;
    let two_condition = quantize(d, n, QuantizeMethod::TwoCondition, window)?;
    let n1_comparison = if n == 1 {
        Some(quantize(d, 1, QuantizeMethod::N1Comparison, window)?)
    } else {
        None
    };
    let energies = cnp1
        .roots
        .iter()
        .map(|r| energy_from_quantized(r.lambda, d))
        .collect::<Result<Vec<_>>>()?;
    Ok(SeriesSummary {
        cnp1,
        two_condition,
        n1_comparison,
        energies,
    })
}

fn oracle_summary(d: &DerivedParams, options: &SolveOptions) -> OracleSummary {
    let side = |s: DomainSide| {
        Outcome::from_result(
            RadialProblem::new(*d, s).and_then(|p| eigen_solve(&p, options.grid_n, options.oracle_levels)),
        )
    };
    OracleSummary {
        outer: side(DomainSide::Outer),
        inner: side(DomainSide::Inner),
    }
}

/// All requested solvers on one setup, with a verdict.
pub fn compare_spec(spec: &SystemSpec, options: &SolveOptions) -> ComparisonRow {
    let mut inputs = RowInputs {
        spec: *spec,
        iota: None,
        j: None,
        omega: None,
    };
    let resolved = spec.resolve().and_then(|s| s.derive().map(|d| (s, d)));
    let (system, d) = match resolved {
        Ok(v) => v,
        Err(e) => {
            let reason = e.to_string();
            return ComparisonRow {
                inputs,
                closed_form: Outcome::Failed(reason.clone()),
                series: Outcome::Failed(reason.clone()),
                oracle: Outcome::Failed(reason.clone()),
                deviations: Deviations {
                    closed_vs_series: None,
                    closed_vs_oracle: None,
                    series_vs_oracle: None,
                    corrected_vs_oracle: None,
                },
                verdict: Verdict::InvalidInput,
                verdict_reason: reason,
            };
        }
    };
    inputs.iota = Some(d.iota);
    inputs.j = Some(d.j);
    inputs.omega = Some(d.omega);

    let closed_form = if options.solvers.closed {
        Outcome::from_result((|| {
            Ok(ClosedFormSummary {
                printed: for_model(&system.model, &system.geom, &system.flux, &system.particle)?,
                derived: corrected_for_model(&system.model, &system.geom, &system.flux, &system.particle)?,
            })
        })())
    } else {
        Outcome::Skipped
    };
    let series = if options.solvers.series {
        Outcome::from_result(series_summary(&d, system.particle.n(), &options.window))
    } else {
        Outcome::Skipped
    };
    let oracle = if options.solvers.oracle {
        Outcome::Ok(oracle_summary(&d, options))
    } else {
        Outcome::Skipped
    };
    let (deviations, verdict, verdict_reason) = adjudicate(&closed_form, &series, &oracle);
    ComparisonRow {
        inputs,
        closed_form,
        series,
        oracle,
        deviations,
        verdict,
        verdict_reason,
    }
}

pub fn compare(system: &System, spec_unsafe_beta: bool, options: &SolveOptions) -> ComparisonRow {
    compare_spec(&spec_of(system, spec_unsafe_beta), options)
}

/// The raw description of a validated system.
pub fn spec_of(system: &System, unsafe_beta: bool) -> SystemSpec {
    SystemSpec {
        potential: system.model,
        beta: system.geom.beta(),
        k: system.geom.k(),
        phi_ab: system.flux.phi_ab(),
        phi0: system.flux.phi0(),
        mass: system.particle.mass(),
        l: system.particle.l(),
        n: system.particle.n(),
        unsafe_beta,
    }
}

fn adjudicate(
    closed: &Outcome<ClosedFormSummary>,
    series: &Outcome<SeriesSummary>,
    oracle: &Outcome<OracleSummary>,
) -> (Deviations, Verdict, String) {
    let printed = closed.ok().map(|c| real_spectral(&c.printed));
    let corrected = closed.ok().map(|c| real_spectral(&c.derived));
    let series_vals = series.ok().map(|s| {
        let mut v: Vec<f64> = s.cnp1.roots.iter().map(|r| r.lambda).collect();
        if let Some(q) = &s.n1_comparison {
            v.extend(q.roots.iter().map(|r| r.lambda));
        }
        v
    });
    let oracle_vals = oracle.ok().map(|o| {
        let mut v = Vec::new();
        for side in [&o.outer, &o.inner] {
            if let Some(s) = side.ok() {
                v.extend_from_slice(&s.eigenvalues);
            }
        }
        v
    });
    let pair = |a: &Option<Vec<f64>>, b: &Option<Vec<f64>>| match (a, b) {
        (Some(a), Some(b)) => min_gap(a, b),
        _ => None,
    };
    let deviations = Deviations {
        closed_vs_series: pair(&printed, &series_vals),
        closed_vs_oracle: pair(&printed, &oracle_vals),
        series_vs_oracle: pair(&series_vals, &oracle_vals),
        corrected_vs_oracle: pair(&corrected, &oracle_vals),
    };

    if let (Some(p), Some(s), Some(o)) = (&printed, &series_vals, &oracle_vals) {
        for c in p {
            for x in s.iter().filter(|x| agree(*c, **x)) {
                if let Some(y) = o.iter().find(|y| agree(*c, **y) && agree(*x, **y)) {
                    return (
                        deviations,
                        Verdict::Consistent,
                        format!("printed branch {c}, series root {x} and oracle level {y} agree"),
                    );
                }
            }
        }
    }
    let corroborated = deviations.series_vs_oracle.is_some_and(|g| g <= AGREEMENT_TOLERANCE);
    if corroborated {
        let printed = closed.ok().map(|c| &c.printed);
        return (
            deviations,
            Verdict::FormulaMismatch,
            match printed {
                Some(p) if p.complex_branch => format!(
                    "series and oracle agree but the printed radicand {} < 0 gives branches {} and {}",
                    p.radicand, p.spectral_plus, p.spectral_minus
                ),
                _ => "series and oracle agree but no printed branch does".to_string(),
            },
        );
    }
    if let Some(c) = closed.ok() {
        if c.printed.complex_branch {
            return (
                deviations,
                Verdict::NonPhysical,
                format!(
                    "printed radicand {} < 0: branches {} and {}",
                    c.printed.radicand, c.printed.spectral_plus, c.printed.spectral_minus
                ),
            );
        }
    }
    let missing: Vec<&str> = [
        ("closed form", closed.ok().is_none()),
        ("series", series.ok().is_none()),
        ("oracle", oracle_vals.as_ref().is_none_or(|v| v.is_empty())),
    ]
    .iter()
    .filter(|(_, m)| *m)
    .map(|(n, _)| *n)
    .collect();
    if !missing.is_empty() {
        return (deviations, Verdict::Incomplete, format!("no output from: {}", missing.join(", ")));
    }
    (
        deviations,
        Verdict::FormulaMismatch,
        "no two solvers agree: no printed branch, series root and oracle level coincide".to_string(),
    )
}

/// The series state a setup is sampled at: the `c_{n+1} = 0` root with the
/// smallest ODE residual, truncated at degree `n`.
pub fn series_state(system: &System, window: &SearchWindow) -> Result<(SeriesRoot, SeriesCoefficients)> {
    let d = system.derive()?;
    let n = system.particle.n();
    let q = quantize(&d, n, QuantizeMethod::Cnp1Root, window)?;
    let root = q
        .roots
        .iter()
        .min_by(|a, b| a.ode.worst_relative_residual.total_cmp(&b.ode.worst_relative_residual))
        .cloned()
        .ok_or_else(|| {
            Error::NotFound(format!(
                "no c_{} = 0 root in [{}, {}]",
                n + 1,
                window.lo,
                window.hi
            ))
        })?;
    let coeffs = coefficients(&d, root.lambda, n as usize)?.truncated(n as usize);
    Ok((root, coeffs))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WavefunctionSample {
    pub side: DomainSide,
    pub r: f64,
    pub psi: f64,
    /// `|psi|^2 sqrt|r^2 - beta^2|`.
    pub density: f64,
    /// Whether `psi` carries the normalization constant of its side.
    pub normalized: bool,
}

/// `samples` points on `[0, beta]` and on `[beta, r_max]` each.
pub fn sample_wavefunction(coeffs: &SeriesCoefficients, r_max: f64, samples: usize) -> Result<Vec<WavefunctionSample>> {
    if samples < 2 {
        return Err(Error::InvalidInput("need at least 2 samples per side".into()));
    }
    let beta = coeffs.derived.beta;
    let mut out = Vec::with_capacity(2 * samples);
    for (side, lo, hi) in [(DomainSide::Inner, 0.0, beta), (DomainSide::Outer, beta, r_max)] {
        let (scale, normalized) = match normalize(coeffs, side, r_max)? {
            Normalization::Normalized { constant, .. } => (constant, true),
            Normalization::NotNormalizable { .. } => (1.0, false),
        };
        for i in 0..samples {
            let r = lo + (hi - lo) * i as f64 / (samples - 1) as f64;
            let psi = scale * wavefunction(coeffs, (r / beta).powi(2));
            out.push(WavefunctionSample {
                side,
                r,
                psi,
                density: psi * psi * (r * r - beta * beta).abs().sqrt(),
                normalized,
            });
        }
    }
    Ok(out)
}

/// Solver outputs without the cross-solver verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub inputs: RowInputs,
    pub closed_form: Outcome<ClosedFormSummary>,
    pub series: Outcome<SeriesSummary>,
    pub oracle: Outcome<OracleSummary>,
}

impl SolveReport {
    /// Whether a requested solver (or oracle side) failed.
    pub fn any_failed(&self) -> bool {
        let failed = |o: &Outcome<OracleSpectrum>| matches!(o, Outcome::Failed(_));
        matches!(self.closed_form, Outcome::Failed(_))
            || matches!(self.series, Outcome::Failed(_))
            || match &self.oracle {
                Outcome::Failed(_) => true,
                Outcome::Ok(o) => failed(&o.outer) || failed(&o.inner),
                Outcome::Skipped => false,
            }
    }
}

impl From<ComparisonRow> for SolveReport {
    fn from(r: ComparisonRow) -> Self {
        Self {
            inputs: r.inputs,
            closed_form: r.closed_form,
            series: r.series,
            oracle: r.oracle,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleSideReport {
    pub side: DomainSide,
    pub finite_difference: Outcome<OracleSpectrum>,
    pub shooting: Outcome<OracleSpectrum>,
    /// Largest relative gap between the two methods, level by level.
    pub max_relative_gap: Option<f64>,
    /// Energies of the finite-difference levels.
    pub energies: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub sides: Vec<OracleSideReport>,
}

impl OracleReport {
    pub fn any_failed(&self) -> bool {
        self.sides.iter().any(|s| {
            matches!(s.finite_difference, Outcome::Failed(_)) || matches!(s.shooting, Outcome::Failed(_))
        })
    }
}

/// Finite-difference spectra on both sides, each cross-checked by shooting.
pub fn oracle_report(system: &System, options: &SolveOptions) -> Result<OracleReport> {
    let d = system.derive()?;
    let mut sides = Vec::new();
    for side in [DomainSide::Outer, DomainSide::Inner] {
        let problem = RadialProblem::new(d, side);
        let fd = problem
            .as_ref()
            .map_err(Clone::clone)
            .and_then(|p| eigen_solve(p, options.grid_n, options.oracle_levels));
        let shooting = match (&problem, &fd) {
            (Ok(p), Ok(f)) => Outcome::from_result(shoot_spectrum(p, f)),
            (_, Err(e)) => Outcome::Failed(format!("no finite-difference spectrum to refine: {e}")),
            (Err(e), _) => Outcome::Failed(e.to_string()),
        };
        let finite_difference = Outcome::from_result(fd);
        let max_relative_gap = match (finite_difference.ok(), shooting.ok()) {
            (Some(a), Some(b)) => Some(
                a.eigenvalues
                    .iter()
                    .zip(&b.eigenvalues)
                    .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()))
                    .fold(0.0, f64::max),
            ),
            _ => None,
        };
        let energies = finite_difference
            .ok()
            .map(|s| s.eigenvalues.iter().filter_map(|v| energy_from_quantized(*v, &d).ok()).collect())
            .unwrap_or_default();
        sides.push(OracleSideReport {
            side,
            finite_difference,
            shooting,
            max_relative_gap,
            energies,
        });
    }
    Ok(OracleReport { sides })
}

/// Axis values for a sweep; a missing axis keeps the base value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_ab: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub de: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<Vec<i64>>,
}

fn axis<T: Copy>(name: &str, values: &Option<Vec<T>>, base: T) -> Result<Vec<T>> {
    match values {
        None => Ok(vec![base]),
        Some(v) if v.is_empty() => Err(Error::InvalidInput(format!("sweep axis `{name}` is empty"))),
        Some(v) => Ok(v.clone()),
    }
}

fn not_applicable(name: &str, model: &PotentialModel) -> Error {
    Error::InvalidInput(format!("sweep axis `{name}` does not apply to the {} potential", model.name()))
}

impl SweepGrid {
    /// Grid points in lexicographic order over
    /// `(beta, phi_ab, gamma, eta, De, r0, l)`, `l` varying fastest.
    pub fn points(&self, base: &SystemSpec) -> Result<Vec<SystemSpec>> {
        let model = base.potential;
        let (base_gamma, base_eta, base_de, base_r0) = match model {
            PotentialModel::Anharmonic(p) => (Some(p.gamma), Some(p.eta), None, None),
            PotentialModel::InverseSquare { gamma } => (Some(gamma), None, None, None),
            PotentialModel::Pseudoharmonic { de, r0 } | PotentialModel::ShiftedPseudoharmonic { de, r0 } => {
                (None, None, Some(de), Some(r0))
            }
        };
        let optional_axis = |name: &str, values: &Option<Vec<f64>>, base: Option<f64>| -> Result<Vec<Option<f64>>> {
            match base {
                Some(b) => Ok(axis(name, values, b)?.into_iter().map(Some).collect()),
                None if values.is_some() => Err(not_applicable(name, &model)),
                None => Ok(vec![None]),
            }
        };
        let betas = axis("beta", &self.beta, base.beta)?;
        let phis = axis("phi_ab", &self.phi_ab, base.phi_ab)?;
        let gammas = optional_axis("gamma", &self.gamma, base_gamma)?;
        let etas = optional_axis("eta", &self.eta, base_eta)?;
        let des = optional_axis("de", &self.de, base_de)?;
        let r0s = optional_axis("r0", &self.r0, base_r0)?;
        let ls = axis("l", &self.l, base.l)?;
        let mut out = Vec::new();
        for &beta in &betas {
            for &phi_ab in &phis {
                for &gamma in &gammas {
                    for &eta in &etas {
                        for &de in &des {
                            for &r0 in &r0s {
                                for &l in &ls {
                                    let potential = match model {
                                        PotentialModel::Anharmonic(p) => PotentialModel::Anharmonic(AnharmonicParams {
                                            eta: eta.unwrap_or(p.eta),
                                            gamma: gamma.unwrap_or(p.gamma),
                                            delta: p.delta,
                                        }),
                                        PotentialModel::InverseSquare { gamma: g } => PotentialModel::InverseSquare {
                                            gamma: gamma.unwrap_or(g),
                                        },
                                        PotentialModel::Pseudoharmonic { de: d0, r0: q0 } => {
                                            PotentialModel::Pseudoharmonic {
                                                de: de.unwrap_or(d0),
                                                r0: r0.unwrap_or(q0),
                                            }
                                        }
                                        PotentialModel::ShiftedPseudoharmonic { de: d0, r0: q0 } => {
                                            PotentialModel::ShiftedPseudoharmonic {
                                                de: de.unwrap_or(d0),
                                                r0: r0.unwrap_or(q0),
                                            }
                                        }
                                    };
                                    out.push(SystemSpec {
                                        potential,
                                        beta,
                                        phi_ab,
                                        l,
                                        ..*base
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

/// One comparison row per grid point, in grid order. Rows are computed in
/// parallel on the current rayon pool; per-point failures stay in their row.
pub fn sweep(grid: &SweepGrid, base: &SystemSpec, options: &SolveOptions) -> Result<Vec<ComparisonRow>> {
    let points = grid.points(base)?;
    Ok(points.par_iter().map(|p| compare_spec(p, options)).collect())
}

/// [`sweep`] on a dedicated pool of `threads` workers.
pub fn sweep_with_threads(
    grid: &SweepGrid,
    base: &SystemSpec,
    options: &SolveOptions,
    threads: usize,
) -> Result<Vec<ComparisonRow>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::SolverFailure {
            iterations: 0,
            message: format!("cannot start worker pool: {e}"),
        })?;
    pool.install(|| sweep(grid, base, options))
}
