//! Confluent-Heun power-series machinery.
//!
//! With `x = r^2 / beta^2` the radial equation becomes
//!
//! ```text
//! 4x psi'' + (4x - 2)/(x - 1) psi' + [L - omega^2 x - 2 M gamma / x - iota^2 / (x - 1)] psi = 0,
//! ```
//!
//! where `L = Lambda beta^2` (or `Theta beta^2` for the inverse-square family).
//! The ansatz `psi = x^(1/4 + j/2) e^(-omega x / 2) G(x)` with
//! `G = sum c_i x^i` turns it into a three-term recurrence. Truncating the
//! series at degree `n` quantizes `L`.
//!
//! Two printed recurrences exist: one for `omega > 0` (coefficients `d1, d2,
//! d3`) and one for the inverse-square family (`h1, h2, h3`). They are kept
//! exactly as printed and evaluated at the running series index `i`. The
//! substituted equation gives `d3 = (i + 2 + j)(i + 2)`, which agrees with `h3`
//! but not with the printed `d3 = (i + 3/2 + j)(i + 2)`; [`Route::Corrected`]
//! carries that version so the two can be compared.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{finite, Error, Result};
use crate::model::{DerivedParams, Family};
use crate::numerics::CompensatedSum;

/// Which recurrence generates `c_2, c_3, ...`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    /// `c_1` and `d1, d2, d3` as printed for the anharmonic family.
    AnharmonicPrinted,
    /// `c_1` and `h1, h2, h3` as printed for the inverse-square family.
    InverseSquarePrinted,
    /// `c_1`, `d1`, `d2` as printed with `d3 = (i + 2 + j)(i + 2)`.
    Corrected,
}

impl Route {
    pub fn printed_for(family: Family) -> Self {
        match family {
            Family::Anharmonic => Route::AnharmonicPrinted,
            Family::InverseSquare => Route::InverseSquarePrinted,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesCoefficients {
    /// `c_0 .. c_N`, normalized to `c_0 = 1`.
    pub c: Vec<f64>,
    /// Spectral parameter `Lambda` (or `Theta`), not multiplied by `beta^2`.
    pub lambda: f64,
    pub derived: DerivedParams,
    pub route: Route,
}

impl SeriesCoefficients {
    /// Exponent of the `x^s` prefactor.
    pub fn exponent(&self) -> f64 {
        0.25 + 0.5 * self.derived.j
    }

    pub fn degree(&self) -> usize {
        self.c.len() - 1
    }

    /// The same series cut down to `c_0 .. c_degree`.
    pub fn truncated(&self, degree: usize) -> Self {
        let mut out = self.clone();
        out.c.truncate(degree + 1);
        out
    }
}

/// `c_1 / c_0` for the route.
fn first_ratio(d: &DerivedParams, l: f64, route: Route) -> f64 {
    let (iota2, j, w) = (d.iota * d.iota, d.j, d.omega);
    match route {
        Route::AnharmonicPrinted | Route::Corrected => {
            (2.0 * w * (1.0 + j) - iota2 - l + 0.5 + j) / (4.0 * (1.0 + j))
        }
        Route::InverseSquarePrinted => (j + 0.5 - l - iota2) / (4.0 * (1.0 + j)),
    }
}

/// `(a1, a2, a3)` with `c_{i+2} = (a1 c_{i+1} + a2 c_i) / a3`.
fn step_coefficients(d: &DerivedParams, l: f64, route: Route, i: usize) -> (f64, f64, f64) {
    let (iota2, j, w) = (d.iota * d.iota, d.j, d.omega);
    let i = i as f64;
    match route {
        Route::AnharmonicPrinted | Route::Corrected => {
            let d1 = (i + w + 1.5 + j) * (i + 1.0) - (iota2 + l - 0.5 - j - 2.0 * w * (1.0 + j)) / 4.0;
            let d2 = -w * i + (l - w * (3.0 + 2.0 * j)) / 4.0;
            let d3 = if route == Route::Corrected {
                (i + 2.0 + j) * (i + 2.0)
            } else {
                (i + (3.0 + 2.0 * j) / 2.0) * (i + 2.0)
            };
            (d1, d2, d3)
        }
        Route::InverseSquarePrinted => {
            let h1 = (i + j + 1.5) * (i + 1.0) - (l + iota2 - 0.5 - j) / 4.0;
            let h2 = l / 4.0;
            let h3 = (i + 2.0 + j) * (i + 2.0);
            (h1, h2, h3)
        }
    }
}

/// The companion termination term: the `c_{i}` weight of the recurrence at
/// `i = n`, which must vanish for a degree-`n` polynomial.
fn companion_term(d: &DerivedParams, l: f64, route: Route, n: usize) -> f64 {
    step_coefficients(d, l, route, n).1
}

fn coefficient_list(d: &DerivedParams, l: f64, max_index: usize, route: Route) -> Result<Vec<f64>> {
    let mut c = Vec::with_capacity(max_index + 1);
    c.push(1.0);
    let denom = 4.0 * (1.0 + d.j);
    if denom == 0.0 || !denom.is_finite() {
        return Err(Error::SingularRecurrence { index: 1 });
    }
    c.push(first_ratio(d, l, route));
    for i in 0..max_index.saturating_sub(1) {
        let (a1, a2, a3) = step_coefficients(d, l, route, i);
        if a3 == 0.0 || !a3.is_finite() {
            return Err(Error::SingularRecurrence { index: i + 2 });
        }
        c.push((a1 * c[i + 1] + a2 * c[i]) / a3);
    }
    Ok(c)
}

/// Series coefficients `c_0 ..= c_max_index` at spectral parameter `lambda`,
/// using the printed recurrence of the family.
pub fn coefficients(derived: &DerivedParams, lambda: f64, max_index: usize) -> Result<SeriesCoefficients> {
    coefficients_with(derived, lambda, max_index, Route::printed_for(derived.family))
}

pub fn coefficients_with(
    derived: &DerivedParams,
    lambda: f64,
    max_index: usize,
    route: Route,
) -> Result<SeriesCoefficients> {
    finite("lambda", lambda)?;
    for (name, v) in [("iota", derived.iota), ("j", derived.j), ("omega", derived.omega), ("beta", derived.beta)] {
        finite(name, v)?;
    }
    if max_index < 1 {
        return Err(Error::InvalidInput("series needs at least c_0 and c_1".into()));
    }
    let l = lambda * derived.beta * derived.beta;
    Ok(SeriesCoefficients {
        c: coefficient_list(derived, l, max_index, route)?,
        lambda,
        derived: *derived,
        route,
    })
}

/// `(P, P', P'')` of the polynomial part, summed with compensation.
fn polynomial_and_derivatives(c: &[f64], x: f64) -> (f64, f64, f64) {
    let mut p = CompensatedSum::new();
    let mut dp = CompensatedSum::new();
    let mut ddp = CompensatedSum::new();
    let mut pow = 1.0; // x^i
    let mut pow_m1 = 0.0; // x^(i-1)
    let mut pow_m2 = 0.0; // x^(i-2)
    for (i, &ci) in c.iter().enumerate() {
        let fi = i as f64;
        p.add(ci * pow);
        dp.add(fi * ci * pow_m1);
        ddp.add(fi * (fi - 1.0) * ci * pow_m2);
        pow_m2 = pow_m1;
        pow_m1 = pow;
        pow *= x;
    }
    (p.value(), dp.value(), ddp.value())
}

/// `psi(x) = x^(1/4 + j/2) e^(-omega x / 2) sum c_i x^i`. Returns NaN for
/// negative `x`.
pub fn wavefunction(coeffs: &SeriesCoefficients, x: f64) -> f64 {
    if x < 0.0 || x.is_nan() {
        return f64::NAN;
    }
    let s = coeffs.exponent();
    if x == 0.0 {
        return if s > 0.0 { 0.0 } else { coeffs.c[0] };
    }
    let (p, _, _) = polynomial_and_derivatives(&coeffs.c, x);
    let envelope = if coeffs.derived.omega == 0.0 {
        1.0
    } else {
        (-0.5 * coeffs.derived.omega * x).exp()
    };
    x.powf(s) * envelope * p
}

/// Left side of the transformed radial equation evaluated on the series
/// ansatz, together with the largest individual term magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residual {
    pub value: f64,
    pub scale: f64,
}

impl Residual {
    pub fn relative(&self) -> f64 {
        if self.scale == 0.0 {
            self.value.abs()
        } else {
            self.value.abs() / self.scale
        }
    }
}

/// Distance kept from the regular singular points `x = 0` and `x = 1`.
pub const RESIDUAL_WINDOW_MARGIN: f64 = 1e-3;

pub fn ode_residual(coeffs: &SeriesCoefficients, x: f64) -> Result<Residual> {
    if !(RESIDUAL_WINDOW_MARGIN..=1.0 - RESIDUAL_WINDOW_MARGIN).contains(&x) {
        return Err(Error::Domain(format!(
            "residual sample x = {x} outside [{RESIDUAL_WINDOW_MARGIN}, {}]",
            1.0 - RESIDUAL_WINDOW_MARGIN
        )));
    }
    let d = &coeffs.derived;
    let s = coeffs.exponent();
    let w = d.omega;
    let l = coeffs.lambda * d.beta * d.beta;
    let (p, dp, ddp) = polynomial_and_derivatives(&coeffs.c, x);
    // psi = f P with f = x^s e^{-w x/2}; everything below is divided by f.
    let g = s / x - 0.5 * w;
    let psi = p;
    let dpsi = dp + g * p;
    let ddpsi = ddp + 2.0 * g * dp + (g * g - s / (x * x)) * p;
    let terms = [
        4.0 * x * ddpsi,
        (4.0 * x - 2.0) / (x - 1.0) * dpsi,
        l * psi,
        -w * w * x * psi,
        -d.two_m_gamma / x * psi,
        -d.iota * d.iota / (x - 1.0) * psi,
    ];
    let value = terms.iter().copied().collect::<CompensatedSum>().value();
    let scale = terms.iter().fold(0.0_f64, |m, t| m.max(t.abs()));
    let f = x.powf(s) * (-0.5 * w * x).exp();
    Ok(Residual {
        value: value * f,
        scale: scale * f,
    })
}

/// Relative residual threshold used to accept a truncated series as a
/// solution of the radial equation.
pub const ODE_RESIDUAL_TOLERANCE: f64 = 1e-8;
pub const ODE_SAMPLE_COUNT: usize = 20;
pub const ODE_SAMPLE_RANGE: (f64, f64) = (0.05, 0.9);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OdeVerdict {
    Confirmed,
    FormulaMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OdeCheck {
    pub worst_relative_residual: f64,
    pub verdict: OdeVerdict,
}

/// Samples the residual of the degree-`degree` truncation at the fixed
/// comparison points.
pub fn check_truncation(coeffs: &SeriesCoefficients, degree: usize) -> Result<OdeCheck> {
    let poly = coeffs.truncated(degree);
    let (lo, hi) = ODE_SAMPLE_RANGE;
    let mut worst = 0.0_f64;
    for k in 0..ODE_SAMPLE_COUNT {
        let x = lo + (hi - lo) * k as f64 / (ODE_SAMPLE_COUNT - 1) as f64;
        let r = ode_residual(&poly, x)?.relative();
        worst = if r.is_nan() { f64::INFINITY } else { worst.max(r) };
    }
    Ok(OdeCheck {
        worst_relative_residual: worst,
        verdict: if worst <= ODE_RESIDUAL_TOLERANCE {
            OdeVerdict::Confirmed
        } else {
            OdeVerdict::FormulaMismatch
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuantizeMethod {
    /// Equate the two printed expressions for `c_1` (`n = 1` only).
    N1Comparison,
    /// Roots of `c_{n+1}(L)`.
    Cnp1Root,
    /// `c_{n+1} = 0` and the companion term at `i = n` vanishes.
    TwoCondition,
}

/// Search window on `L = Lambda beta^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchWindow {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Default for SearchWindow {
    fn default() -> Self {
        Self {
            lo: -100.0,
            hi: 100.0,
            step: 1e-2,
        }
    }
}

impl SearchWindow {
    pub fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.step.is_finite()) {
            return Err(Error::InvalidInput("search window must be finite".into()));
        }
        if !(self.hi > self.lo) || !(self.step > 0.0) {
            return Err(Error::InvalidInput(format!(
                "search window [{}, {}] with step {} is empty",
                self.lo, self.hi, self.step
            )));
        }
        if (self.hi - self.lo) / self.step > 1e8 {
            return Err(Error::InvalidInput("search window needs more than 1e8 scan points".into()));
        }
        Ok(())
    }
}

/// Absolute bisection tolerance on `L`.
pub const ROOT_TOLERANCE: f64 = 1e-12;
const COMPANION_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesRoot {
    /// `Lambda` (or `Theta`).
    pub lambda: f64,
    /// `Lambda beta^2`.
    pub scaled: f64,
    /// `|c_{n+1}| / max |c_i|` of the rebuilt series.
    pub truncation_residual: f64,
    /// The companion term (`d2` or `h2` at `i = n`).
    pub companion: f64,
    pub companion_satisfied: bool,
    pub ode: OdeCheck,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport {
    pub window: SearchWindow,
    pub points: usize,
    pub sign_changes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantizationResult {
    pub n: u32,
    pub method: QuantizeMethod,
    pub route: Route,
    pub roots: Vec<SeriesRoot>,
    /// Set when the `n = 1` quadratic has a negative discriminant; both
    /// complex roots (as `Lambda`) are reported and `roots` is empty.
    pub complex_pair: Option<[Complex64; 2]>,
    pub scan: Option<ScanReport>,
}

impl QuantizationResult {
    pub fn is_non_physical(&self) -> bool {
        self.complex_pair.is_some()
    }

    /// Roots that pass the method's acceptance rule.
    pub fn accepted(&self) -> impl Iterator<Item = &SeriesRoot> {
        let need_companion = self.method == QuantizeMethod::TwoCondition;
        self.roots
            .iter()
            .filter(move |r| !need_companion || r.companion_satisfied)
    }

    /// Roots with `c_{n+1} = 0` that fail the companion condition.
    pub fn discrepancies(&self) -> Vec<&SeriesRoot> {
        self.roots.iter().filter(|r| !r.companion_satisfied).collect()
    }
}

fn build_root(d: &DerivedParams, n: usize, l: f64, route: Route) -> Result<SeriesRoot> {
    let beta2 = d.beta * d.beta;
    let coeffs = coefficients_with(d, l / beta2, n + 1, route)?;
    let max_c = coeffs.c.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    let truncation_residual = coeffs.c[n + 1].abs() / max_c;
    let companion = companion_term(d, l, route, n);
    let companion_scale = 1.0_f64
        .max(l.abs() / 4.0)
        .max(d.omega * (n as f64 + (3.0 + 2.0 * d.j) / 4.0));
    Ok(SeriesRoot {
        lambda: l / beta2,
        scaled: l,
        truncation_residual,
        companion,
        companion_satisfied: companion.abs() <= COMPANION_TOLERANCE * companion_scale,
        ode: check_truncation(&coeffs, n)?,
    })
}

/// Roots of `L^2 - b L + c = 0`, ordered `(+, -)`, or the complex pair.
fn quadratic_roots(b: f64, c: f64) -> std::result::Result<(f64, f64), [Complex64; 2]> {
    let disc = b * b - 4.0 * c;
    if disc < 0.0 {
        let re = 0.5 * b;
        let im = 0.5 * (-disc).sqrt();
        return Err([Complex64::new(re, im), Complex64::new(re, -im)]);
    }
    let sq = disc.sqrt();
    // Avoid cancellation in the smaller-magnitude root.
    let q = 0.5 * (b + b.signum() * sq);
    if q == 0.0 {
        return Ok((0.0, 0.0));
    }
    let (r1, r2) = (q, c / q);
    Ok(if r1 >= r2 { (r1, r2) } else { (r2, r1) })
}

/// Coefficients `(b, c)` of the quadratic in `L` obtained by equating the
/// first-step expression for `c_1` with its `n = 1` truncation form.
pub(crate) fn n1_quadratic(d: &DerivedParams) -> (f64, f64) {
    let (iota2, j, w) = (d.iota * d.iota, d.j, d.omega);
    match d.family {
        Family::Anharmonic => {
            // (K0 - L) / (4(1+j)) = (w(3+2j) - L) / (A - L)
            let k0 = 2.0 * w * (1.0 + j) - iota2 + j + 0.5;
            let a = 6.0 + 2.0 * w * (j + 3.0) + 5.0 * j - iota2 + 0.5;
            let p = w * (3.0 + 2.0 * j);
            (k0 + a - 4.0 * (1.0 + j), k0 * a - 4.0 * (1.0 + j) * p)
        }
        Family::InverseSquare => {
            // (K0 - L) / (4(1+j)) = -L / (A - L)
            let k0 = j + 0.5 - iota2;
            let a = 5.0 * j - iota2 + 6.5;
            (k0 + a - 4.0 * (1.0 + j), k0 * a)
        }
    }
}

fn bisect<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64, mut f_lo: f64) -> f64 {
    while hi - lo > ROOT_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn quantize(
    derived: &DerivedParams,
    n: u32,
    method: QuantizeMethod,
    window: &SearchWindow,
) -> Result<QuantizationResult> {
    quantize_with_route(derived, n, method, window, Route::printed_for(derived.family))
}

pub fn quantize_with_route(
    derived: &DerivedParams,
    n: u32,
    method: QuantizeMethod,
    window: &SearchWindow,
    route: Route,
) -> Result<QuantizationResult> {
    if n < 1 {
        return Err(Error::InvalidInput("radial mode n must be >= 1".into()));
    }
    let nu = n as usize;
    let beta2 = derived.beta * derived.beta;
    match method {
        QuantizeMethod::N1Comparison => {
            if n != 1 {
                return Err(Error::InvalidInput(
                    "the c_1 comparison method only exists for n = 1".into(),
                ));
            }
            let (b, c) = n1_quadratic(derived);
            match quadratic_roots(b, c) {
                Ok((plus, minus)) => {
                    let roots = [plus, minus]
                        .into_iter()
                        .map(|l| build_root(derived, 1, l, route))
                        .collect::<Result<Vec<_>>>()?;
                    Ok(QuantizationResult {
                        n,
                        method,
                        route,
                        roots,
                        complex_pair: None,
                        scan: None,
                    })
                }
                Err(pair) => Ok(QuantizationResult {
                    n,
                    method,
                    route,
                    roots: Vec::new(),
                    complex_pair: Some([pair[0] / beta2, pair[1] / beta2]),
                    scan: None,
                }),
            }
        }
        QuantizeMethod::Cnp1Root | QuantizeMethod::TwoCondition => {
            window.validate()?;
            let last = |l: f64| -> f64 {
                coefficient_list(derived, l, nu + 1, route)
                    .map(|c| c[nu + 1])
                    .unwrap_or(f64::NAN)
            };
            // Surface a singular recurrence as an error rather than NaNs.
            coefficient_list(derived, window.lo, nu + 1, route)?;
            let points = ((window.hi - window.lo) / window.step).ceil() as usize + 1;
            let mut roots = Vec::new();
            let mut sign_changes = 0;
            let mut prev_l = window.lo;
            let mut prev_f = last(prev_l);
            for k in 1..points {
                let l = (window.lo + k as f64 * window.step).min(window.hi);
                let f = last(l);
                if prev_f == 0.0 {
                    roots.push(prev_l);
                    sign_changes += 1;
                } else if f != 0.0 && (f < 0.0) != (prev_f < 0.0) {
                    roots.push(bisect(&last, prev_l, l, prev_f));
                    sign_changes += 1;
                }
                prev_l = l;
                prev_f = f;
            }
            if prev_f == 0.0 {
                roots.push(prev_l);
                sign_changes += 1;
            }
            let roots = roots
                .into_iter()
                .map(|l| build_root(derived, nu, l, route))
                .collect::<Result<Vec<_>>>()?;
            Ok(QuantizationResult {
                n,
                method,
                route,
                roots,
                complex_pair: None,
                scan: Some(ScanReport {
                    window: *window,
                    points,
                    sign_changes,
                }),
            })
        }
    }
}

/// Side-by-side coefficient lists of the two printed recurrences at
/// `omega = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegenerationReport {
    pub anharmonic: Vec<f64>,
    pub inverse_square: Vec<f64>,
    pub first_mismatch: Option<Mismatch>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mismatch {
    pub index: usize,
    pub anharmonic: f64,
    pub inverse_square: f64,
    pub magnitude: f64,
}

/// Relative agreement considered "the same coefficient".
pub const DEGENERATION_TOLERANCE: f64 = 1e-12;

/// Compares the anharmonic recurrence with `omega` forced to zero against the
/// inverse-square recurrence.
pub fn omega_zero_degeneration(
    derived: &DerivedParams,
    lambda: f64,
    max_index: usize,
) -> Result<DegenerationReport> {
    let mut d = *derived;
    d.omega = 0.0;
    d.two_m_eta = 0.0;
    let anharmonic = coefficients_with(&d, lambda, max_index, Route::AnharmonicPrinted)?.c;
    let inverse_square = coefficients_with(&d, lambda, max_index, Route::InverseSquarePrinted)?.c;
    let scale = anharmonic
        .iter()
        .chain(inverse_square.iter())
        .fold(0.0_f64, |m, c| m.max(c.abs()));
    let first_mismatch = anharmonic
        .iter()
        .zip(inverse_square.iter())
        .enumerate()
        .find(|(_, (a, b))| (*a - *b).abs() > DEGENERATION_TOLERANCE * scale)
        .map(|(index, (&a, &b))| Mismatch {
            index,
            anharmonic: a,
            inverse_square: b,
            magnitude: (a - b).abs(),
        });
    Ok(DegenerationReport {
        anharmonic,
        inverse_square,
        first_mismatch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DefectGeometry, FluxField, ParticleConfig};
    use crate::potentials::{AnharmonicParams, PotentialModel};
    use proptest::prelude::*;

    fn derive(model: PotentialModel, beta: f64, k: f64, l: i64, phi: f64, mass: f64) -> DerivedParams {
        model
            .derive(
                &DefectGeometry::new(beta, k).unwrap(),
                &FluxField::from_reduced(phi, 1.0).unwrap(),
                &ParticleConfig::new(mass, l, 1).unwrap(),
            )
            .unwrap()
    }

    fn anharmonic(eta: f64, gamma: f64, delta: f64) -> PotentialModel {
        PotentialModel::Anharmonic(AnharmonicParams { eta, gamma, delta })
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
    }

    #[test]
    fn printed_recurrence_matches_high_precision_reference() {
        // Reference values from a 40-digit evaluation of the printed recurrence.
        let expected = [
            1.0,
            0.135_110_028_629_970_214_43,
            0.060_454_338_786_633_495_776,
            0.039_551_775_166_812_492_036,
            0.029_723_758_261_968_847_54,
            0.023_859_526_439_106_621_234,
            0.019_935_711_929_670_253_244,
        ];
        let d = derive(anharmonic(1.0, 0.0, 0.0), 0.5, 1.0, 0, 0.0, 1.0);
        let s = coefficients(&d, 4.0, 6).unwrap();
        assert_eq!(s.c.len(), 7);
        for (got, want) in s.c.iter().zip(expected) {
            assert!(close(*got, want, 1e-14), "{got} vs {want}");
        }
    }

    #[test]
    fn c1_agrees_between_families_at_zero_omega() {
        let d = derive(anharmonic(0.0, 1.3, 0.0), 0.4, 1.1, 2, 0.3, 1.0);
        let theta = 3.7;
        let a = coefficients_with(&d, theta, 1, Route::AnharmonicPrinted).unwrap();
        let b = coefficients_with(&d, theta, 1, Route::InverseSquarePrinted).unwrap();
        let l = theta * d.beta * d.beta;
        let formula = (d.j + 0.5 - l - d.iota * d.iota) / (4.0 * (1.0 + d.j));
        // The numerator cancels strongly here; compare on the scale of its terms.
        let scale = (d.j + 0.5 + l + d.iota * d.iota) / (4.0 * (1.0 + d.j));
        assert!((a.c[1] - formula).abs() <= 1e-14 * scale);
        assert!((b.c[1] - formula).abs() <= 1e-14 * scale);
    }

    #[test]
    fn c1_vanishes_at_numerator_zero() {
        let d = derive(anharmonic(1.0, 0.5, 0.0), 0.5, 1.0, 1, 0.0, 1.0);
        let l = 2.0 * d.omega * (1.0 + d.j) - d.iota * d.iota + 0.5 + d.j;
        let s = coefficients(&d, l / (d.beta * d.beta), 3).unwrap();
        assert!(s.c[1].abs() < 1e-15);
    }

    #[test]
    fn singular_recurrence_names_index() {
        let mut d = derive(anharmonic(1.0, 0.0, 0.0), 0.5, 1.0, 0, 0.0, 1.0);
        d.j = -1.0;
        assert_eq!(
            coefficients(&d, 1.0, 4).unwrap_err(),
            Error::SingularRecurrence { index: 1 }
        );
        d.j = -1.5;
        assert_eq!(
            coefficients(&d, 1.0, 4).unwrap_err(),
            Error::SingularRecurrence { index: 2 }
        );
        assert!(coefficients(&d, f64::NAN, 4).is_err());
        assert!(coefficients(&d, 1.0, 0).is_err());
    }

    #[test]
    fn degeneration_reports_first_disagreement() {
        // 40-digit references: printed d3 and h3 differ from c_2 onwards.
        let d = derive(anharmonic(0.0, 1.0, 0.0), 0.5, 1.0, 1, 0.0, 1.0);
        let rep = omega_zero_degeneration(&d, 2.0, 6).unwrap();
        let m = rep.first_mismatch.expect("printed recurrences disagree");
        assert_eq!(m.index, 2);
        assert!(close(m.anharmonic, 0.089_843_75, 1e-14));
        assert!(close(m.inverse_square, 0.077_008_928_571_428_571_429, 1e-14));
        assert!(close(m.magnitude, 0.012_834_821_428_571_428_571, 1e-12));
        assert_eq!(rep.anharmonic[1], 0.125);
        assert_eq!(rep.inverse_square[1], 0.125);
    }

    #[test]
    fn wavefunction_special_points() {
        let d = derive(anharmonic(0.0, 0.0, 0.0), 0.5, 1.0, 0, 0.0, 1.0);
        let s = SeriesCoefficients { c: vec![1.0], lambda: 0.0, derived: d, route: Route::Corrected };
        assert_eq!(wavefunction(&s, 0.0), 0.0);
        assert_eq!(wavefunction(&s, 1.0), 1.0);
        assert!(wavefunction(&s, -1.0).is_nan());
    }

    #[test]
    fn ground_state_wavefunction_form() {
        let d = derive(anharmonic(0.7, 0.4, 0.0), 0.5, 1.0, 2, 0.0, 1.0);
        let q = quantize(&d, 1, QuantizeMethod::N1Comparison, &SearchWindow::default()).unwrap();
        let root = &q.roots[0];
        let l = root.scaled;
        let c1 = (d.omega * (3.0 + 2.0 * d.j) - l)
            / (6.0 + 2.0 * d.omega * (d.j + 3.0) + 5.0 * d.j - d.iota * d.iota - l + 0.5);
        let s = coefficients(&d, root.lambda, 1).unwrap();
        assert!(close(s.c[1], c1, 1e-10));
        let x: f64 = 0.7;
        let expected = x.powf(0.25 + d.j / 2.0) * (-d.omega * x / 2.0).exp() * (1.0 + c1 * x);
        assert!(close(wavefunction(&s, x), expected, 1e-10));
    }

    #[test]
    fn residual_domain_and_determinism() {
        let d = derive(anharmonic(1.0, 0.0, 0.0), 0.5, 1.0, 0, 0.0, 1.0);
        let s = coefficients(&d, 4.0, 6).unwrap();
        assert!(ode_residual(&s, 0.0).is_err());
        assert!(ode_residual(&s, 0.9995).is_err());
        assert!(ode_residual(&s, 1.5).is_err());
        let a = ode_residual(&s, 0.5).unwrap();
        let b = ode_residual(&s, 0.5).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }

    #[test]
    fn residual_of_constant_series_matches_hand_expansion() {
        // With c = [1] the ansatz leaves, after dividing by x^s e^{-wx/2},
        // the remainder [(x-1)(L - (2j+3) w) x ... ]; evaluate it by hand:
        // R/f = 4x(g^2 - s/x^2) + (4x-2)/(x-1) g + L - w^2 x - 2Mγ/x - ι²/(x-1).
        let d = derive(anharmonic(0.5, 0.3, 0.0), 0.6, 1.0, 1, 0.0, 1.0);
        let l = 2.0 * d.omega * (1.0 + d.j) - d.iota * d.iota + 0.5 + d.j;
        let s = SeriesCoefficients { c: vec![1.0, 0.0], lambda: l / (d.beta * d.beta), derived: d, route: Route::Corrected };
        let x = 0.3;
        let sx = 0.25 + d.j / 2.0;
        // Multiplying the remainder by x(x-1) gives the x^1 coefficient of the
        // G-equation: (L - (2j+3) w) x^2 / (x (x - 1)) after the x^0 term cancels.
        let leftover = (l - (2.0 * d.j + 3.0) * d.omega) * x / (x - 1.0);
        let r = ode_residual(&s, x).unwrap();
        let f = x.powf(sx) * (-0.5 * d.omega * x).exp();
        assert!(close(r.value / f, leftover, 1e-12), "{} vs {}", r.value / f, leftover);
    }

    #[test]
    fn n1_comparison_inverse_square_differs_from_printed_theta() {
        // l = 3 gives a real quadratic for gamma = 1.
        let d = derive(PotentialModel::InverseSquare { gamma: 1.0 }, 0.5, 1.0, 3, 0.0, 1.0);
        let q = quantize(&d, 1, QuantizeMethod::N1Comparison, &SearchWindow::default()).unwrap();
        assert_eq!(q.roots.len(), 2);
        let (j, i2, b2) = (d.j, d.iota * d.iota, d.beta * d.beta);
        let b = 2.0 * j - 2.0 * i2 + 3.0;
        let derived = 16.0 * i2 * (1.0 + j) - 16.0 * j * j - 24.0 * j - 4.0;
        let plus = (b + derived.sqrt()) / (2.0 * b2);
        assert!(close(q.roots[0].lambda, plus, 1e-12));
        let printed = (b + (i2 + 4.0 * j * i2 - 4.0 * j * j - 6.0 * j - 1.0).sqrt()) / (2.0 * b2);
        assert!(!close(q.roots[0].lambda, printed, 1e-3));
        for r in &q.roots {
            assert!(r.truncation_residual < 1e-10);
        }
    }

    #[test]
    fn n1_comparison_anharmonic_complex_branch_is_flagged() {
        // Reference: Lambda = 25 +- 11.661903789690600942 i.
        let d = derive(anharmonic(2.0, 1.0, 0.0), 0.5, 1.0, 1, 0.0, 1.0);
        let q = quantize(&d, 1, QuantizeMethod::N1Comparison, &SearchWindow::default()).unwrap();
        assert!(q.is_non_physical());
        assert!(q.roots.is_empty());
        let pair = q.complex_pair.unwrap();
        assert!(close(pair[0].re, 25.0, 1e-14));
        assert!(close(pair[0].im, 11.661_903_789_690_600_942, 1e-14));
        assert_eq!(pair[0].re, pair[1].re);
        assert_eq!(pair[0].im, -pair[1].im);
        assert!(quantize(&d, 2, QuantizeMethod::N1Comparison, &SearchWindow::default()).is_err());
    }

    fn dense_scan_c2_roots(d: &DerivedParams, lo: f64, hi: f64, step: f64) -> Vec<f64> {
        // Independent closed form of c_2 from the printed first step.
        let c2 = |l: f64| {
            let (i2, j, w) = (d.iota * d.iota, d.j, d.omega);
            let c1 = (2.0 * w * (1.0 + j) - i2 - l + 0.5 + j) / (4.0 * (1.0 + j));
            let d1 = (w + 1.5 + j) - (i2 + l - 0.5 - j - 2.0 * w * (1.0 + j)) / 4.0;
            let d2 = (l - w * (3.0 + 2.0 * j)) / 4.0;
            d1 * c1 + d2
        };
        let mut out = Vec::new();
        let steps = ((hi - lo) / step).round() as usize;
        let mut prev = c2(lo);
        for k in 1..=steps {
            let l = lo + k as f64 * step;
            let v = c2(l);
            if (v < 0.0) != (prev < 0.0) {
                out.push(l - 0.5 * step);
            }
            prev = v;
        }
        out
    }

    #[test]
    fn cnp1_roots_match_dense_scan() {
        // Spec configuration: no sign change of c_2 in the window.
        let d = derive(anharmonic(1.0, 0.5, 0.0), 0.5, 1.0, 0, 0.0, 1.0);
        let q = quantize(&d, 1, QuantizeMethod::Cnp1Root, &SearchWindow::default()).unwrap();
        assert!(dense_scan_c2_roots(&d, -100.0, 100.0, 1e-4).is_empty());
        assert!(q.roots.is_empty());
        assert_eq!(q.scan.as_ref().unwrap().sign_changes, 0);

        // Larger |iota| has two real roots.
        let d = derive(anharmonic(1.0, 0.5, 0.0), 0.5, 1.0, 3, 0.0, 1.0);
        let q = quantize(&d, 1, QuantizeMethod::Cnp1Root, &SearchWindow::default()).unwrap();
        let scan = dense_scan_c2_roots(&d, -100.0, 100.0, 1e-4);
        assert_eq!(scan.len(), 2);
        assert_eq!(q.roots.len(), 2);
        for (r, s) in q.roots.iter().zip(&scan) {
            assert!((r.scaled - s).abs() <= 1e-4);
            assert!(r.truncation_residual <= 1e-10);
        }
        // The same roots come out of the n = 1 comparison quadratic.
        let p = quantize(&d, 1, QuantizeMethod::N1Comparison, &SearchWindow::default()).unwrap();
        let mut from_quadratic: Vec<f64> = p.roots.iter().map(|r| r.scaled).collect();
        from_quadratic.sort_by(f64::total_cmp);
        for (a, b) in from_quadratic.iter().zip(q.roots.iter()) {
            assert!((a - b.scaled).abs() < 1e-10);
        }
    }

    fn quasi_exact() -> DerivedParams {
        // omega = 0.2, j = 1/2, iota tuned so that the n = 1 polynomial
        // satisfies both termination conditions at L = omega (2j + 7) = 1.6.
        let beta: f64 = 0.5;
        let eta = 0.32;
        let (w, j) = (0.2_f64, 0.5_f64);
        let big_b = 6.0 + 4.0 * w + 4.0 * j;
        let u = (-big_b + (big_b * big_b - 64.0 * w * (1.0 + j)).sqrt()) / 2.0;
        let iota2 = 2.0 * w * (1.0 + j) + j + 0.5 - w * (2.0 * j + 7.0) - u;
        let phi = -(-iota2.sqrt()) - beta;
        derive(anharmonic(eta, 0.0, 0.0), beta, 1.0, 0, phi, 1.0)
    }

    #[test]
    fn quasi_exact_root_is_confirmed_by_ode_residual() {
        let d = quasi_exact();
        assert!((d.omega - 0.2).abs() < 1e-15);
        let q = quantize(&d, 1, QuantizeMethod::N1Comparison, &SearchWindow::default()).unwrap();
        let confirmed: Vec<_> = q.roots.iter().filter(|r| r.ode.verdict == OdeVerdict::Confirmed).collect();
        assert_eq!(confirmed.len(), 1);
        assert!((confirmed[0].lambda - 6.4).abs() < 1e-9);
        assert!(confirmed[0].companion_satisfied);
        let other: Vec<_> = q.roots.iter().filter(|r| r.ode.verdict == OdeVerdict::FormulaMismatch).collect();
        assert_eq!(other.len(), 1);

        let t = quantize(&d, 1, QuantizeMethod::TwoCondition, &SearchWindow::default()).unwrap();
        assert_eq!(t.accepted().count(), 1);
        assert_eq!(t.discrepancies().len(), 1);
    }

    #[test]
    fn generic_roots_fail_companion_condition() {
        let d = derive(anharmonic(1.0, 0.5, 0.0), 0.5, 1.0, 3, 0.0, 1.0);
        let t = quantize(&d, 1, QuantizeMethod::TwoCondition, &SearchWindow::default()).unwrap();
        assert_eq!(t.roots.len(), 2);
        assert_eq!(t.accepted().count(), 0);
        assert!(t.roots.iter().all(|r| r.ode.verdict == OdeVerdict::FormulaMismatch));
    }

    #[test]
    fn higher_modes_scan_polynomial_roots() {
        let d = derive(anharmonic(1.0, 0.5, 0.0), 0.5, 1.0, 4, 0.0, 1.0);
        for n in 2..=4 {
            let q = quantize(&d, n, QuantizeMethod::Cnp1Root, &SearchWindow::default()).unwrap();
            assert!(q.roots.len() <= n as usize + 1);
            for r in &q.roots {
                assert!(r.truncation_residual <= 1e-10, "n={n} residual {}", r.truncation_residual);
            }
        }
    }

    #[test]
    fn window_validation() {
        let d = derive(anharmonic(1.0, 0.5, 0.0), 0.5, 1.0, 0, 0.0, 1.0);
        let bad = SearchWindow { lo: 1.0, hi: 1.0, step: 0.1 };
        assert!(quantize(&d, 1, QuantizeMethod::Cnp1Root, &bad).is_err());
        let bad = SearchWindow { lo: 0.0, hi: f64::INFINITY, step: 0.1 };
        assert!(quantize(&d, 1, QuantizeMethod::Cnp1Root, &bad).is_err());
        assert!(quantize(&d, 0, QuantizeMethod::Cnp1Root, &SearchWindow::default()).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn coefficients_are_deterministic(
            eta in 0.0f64..3.0, gamma in 0.0f64..3.0, beta in 0.05f64..0.95,
            l in -4i64..4, phi in 0.0f64..1.0, lambda in -40.0f64..40.0,
        ) {
            let d = derive(anharmonic(eta, gamma, 0.0), beta, 1.0, l, phi, 1.0);
            let a = coefficients(&d, lambda, 12).unwrap();
            let b = coefficients(&d, lambda, 12).unwrap();
            prop_assert_eq!(a.c.len(), 13);
            prop_assert_eq!(a.c[0], 1.0);
            for (x, y) in a.c.iter().zip(&b.c) {
                prop_assert_eq!(x.to_bits(), y.to_bits());
            }
        }

        #[test]
        fn cnp1_roots_satisfy_truncation(
            eta in 0.1f64..3.0, gamma in 0.0f64..2.0, l in 2i64..6, n in 1u32..4,
        ) {
            let d = derive(anharmonic(eta, gamma, 0.0), 0.5, 1.0, l, 0.0, 1.0);
            let window = SearchWindow { lo: -50.0, hi: 50.0, step: 5e-2 };
            let q = quantize(&d, n, QuantizeMethod::Cnp1Root, &window).unwrap();
            for r in &q.roots {
                prop_assert!(r.truncation_residual <= 1e-10);
            }
        }
    }
}
