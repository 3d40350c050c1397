//! Ground-state (`n = 1`) energies evaluated directly from the printed closed
//! forms, plus the variant obtained by solving the `n = 1` truncation
//! quadratic exactly.
//!
//! Printed forms, with `iota`, `j`, `omega` as in [`DerivedParams`]:
//!
//! ```text
//! anharmonic      lambda = [3 - 2 iota^2 + 4 omega (2 + j) + 2 j +- sqrt(Delta)] / beta^2
//!                 Delta  = 16 iota^2 (1 + j) + 16 omega (2 + j) + 14 omega^2 - 44 j - 32 M gamma - 8
//! pseudoharmonic  chi    = same shape with j -> sigma, 14 -> 12 in Pi
//!                 sigma  = sqrt(2 M De / r0^2 + 1/4),  gamma = De r0^2
//! inverse square  Theta  = [(2 j - 2 iota^2 + 3) +- sqrt(iota^2 + 4 j iota^2 - 4 j^2 - 6 j - 1)] / (2 beta^2)
//! ```
//!
//! Energies follow as `E = k^2/2M + value/2M + delta`, with `delta = -2 De`
//! for the plain pseudoharmonic potential and zero for the shifted one and
//! the inverse-square family.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{DefectGeometry, DerivedParams, Family, FluxField, ParticleConfig};
use crate::potentials::PotentialModel;
use crate::series::n1_quadratic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormulaFamily {
    Anharmonic,
    Pseudoharmonic,
    ShiftedPseudoharmonic,
    InverseSquare,
}

impl FormulaFamily {
    pub fn of(model: &PotentialModel) -> Self {
        match model {
            PotentialModel::Anharmonic(_) => FormulaFamily::Anharmonic,
            PotentialModel::Pseudoharmonic { .. } => FormulaFamily::Pseudoharmonic,
            PotentialModel::ShiftedPseudoharmonic { .. } => FormulaFamily::ShiftedPseudoharmonic,
            PotentialModel::InverseSquare { .. } => FormulaFamily::InverseSquare,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormulaVariant {
    /// Coefficients exactly as printed.
    Printed,
    /// Roots of the `n = 1` truncation quadratic solved from the recurrence.
    Derived,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedFormResult {
    pub family: FormulaFamily,
    pub variant: FormulaVariant,
    pub e_plus: Complex64,
    pub e_minus: Complex64,
    /// `lambda`, `chi` or `Theta` on the `+` and `-` branches.
    pub spectral_plus: Complex64,
    pub spectral_minus: Complex64,
    /// `Delta`, `Pi`, or the inverse-square radicand.
    pub radicand: f64,
    pub iota: f64,
    pub j: f64,
    pub omega: f64,
    /// Pseudoharmonic index `sigma`; absent for the other families.
    pub sigma: Option<f64>,
    pub complex_branch: bool,
}

impl ClosedFormResult {
    /// Both energies when the radicand is non-negative, `(plus, minus)`.
    pub fn real_energies(&self) -> Option<(f64, f64)> {
        (!self.complex_branch).then_some((self.e_plus.re, self.e_minus.re))
    }

    pub fn real_spectral(&self) -> Option<(f64, f64)> {
        (!self.complex_branch).then_some((self.spectral_plus.re, self.spectral_minus.re))
    }
}

/// `(center +- sqrt(radicand)) / denom`, complex when the radicand is negative.
fn branches(center: f64, radicand: f64, denom: f64) -> (Complex64, Complex64) {
    let root = if radicand >= 0.0 {
        Complex64::new(radicand.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-radicand).sqrt())
    };
    let c = Complex64::new(center, 0.0);
    ((c + root) / denom, (c - root) / denom)
}

fn energy(value: Complex64, d: &DerivedParams) -> Complex64 {
    let two_m = 2.0 * d.mass;
    value / two_m + (d.k * d.k / two_m + d.energy_shift)
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    family: FormulaFamily,
    variant: FormulaVariant,
    d: &DerivedParams,
    center: f64,
    radicand: f64,
    denom: f64,
    sigma: Option<f64>,
) -> ClosedFormResult {
    let (spectral_plus, spectral_minus) = branches(center, radicand, denom);
    ClosedFormResult {
        family,
        variant,
        e_plus: energy(spectral_plus, d),
        e_minus: energy(spectral_minus, d),
        spectral_plus,
        spectral_minus,
        radicand,
        iota: d.iota,
        j: d.j,
        omega: d.omega,
        sigma,
        complex_branch: radicand < 0.0,
    }
}

fn require_family(d: &DerivedParams, family: Family) -> Result<()> {
    if d.family != family {
        return Err(Error::InvalidInput(format!(
            "closed form for {family:?} applied to {:?} parameters",
            d.family
        )));
    }
    Ok(())
}

/// Printed anharmonic ground state.
pub fn anharmonic_ground(d: &DerivedParams) -> Result<ClosedFormResult> {
    require_family(d, Family::Anharmonic)?;
    Ok(anharmonic_shape(FormulaFamily::Anharmonic, d, d.j, 14.0, None))
}

/// The shared printed shape of the anharmonic and pseudoharmonic formulas,
/// with index `idx` (`j` or `sigma`) and the `omega^2` coefficient.
fn anharmonic_shape(
    family: FormulaFamily,
    d: &DerivedParams,
    idx: f64,
    omega_sq_coefficient: f64,
    sigma: Option<f64>,
) -> ClosedFormResult {
    let (iota2, w) = (d.iota * d.iota, d.omega);
    // 32 M gamma = 16 (2 M gamma)
    let radicand = 16.0 * iota2 * (1.0 + idx) + 16.0 * w * (2.0 + idx) + omega_sq_coefficient * w * w
        - 44.0 * idx
        - 16.0 * d.two_m_gamma
        - 8.0;
    let center = 3.0 - 2.0 * iota2 + 4.0 * w * (2.0 + idx) + 2.0 * idx;
    assemble(family, FormulaVariant::Printed, d, center, radicand, d.beta * d.beta, sigma)
}

fn pseudoharmonic_shape(
    family: FormulaFamily,
    model: PotentialModel,
    geom: &DefectGeometry,
    flux: &FluxField,
    particle: &ParticleConfig,
) -> Result<ClosedFormResult> {
    let d = model.derive(geom, flux, particle)?;
    // sigma = sqrt(2 M De / r0^2 + 1/4) = sqrt(2 M eta + 1/4).
    let sigma = (d.two_m_eta + 0.25).sqrt();
    Ok(anharmonic_shape(family, &d, sigma, 12.0, Some(sigma)))
}

/// Printed pseudoharmonic ground state, including the `-2 De` offset.
pub fn pseudoharmonic_ground(
    de: f64,
    r0: f64,
    geom: &DefectGeometry,
    flux: &FluxField,
    particle: &ParticleConfig,
) -> Result<ClosedFormResult> {
    pseudoharmonic_shape(
        FormulaFamily::Pseudoharmonic,
        PotentialModel::Pseudoharmonic { de, r0 },
        geom,
        flux,
        particle,
    )
}

pub fn shifted_pseudoharmonic_ground(
    de: f64,
    r0: f64,
    geom: &DefectGeometry,
    flux: &FluxField,
    particle: &ParticleConfig,
) -> Result<ClosedFormResult> {
    pseudoharmonic_shape(
        FormulaFamily::ShiftedPseudoharmonic,
        PotentialModel::ShiftedPseudoharmonic { de, r0 },
        geom,
        flux,
        particle,
    )
}

/// Printed inverse-square ground state.
pub fn inverse_square_ground(
    gamma: f64,
    geom: &DefectGeometry,
    flux: &FluxField,
    particle: &ParticleConfig,
) -> Result<ClosedFormResult> {
    let d = PotentialModel::InverseSquare { gamma }.derive(geom, flux, particle)?;
    Ok(inverse_square_from_derived(&d))
}

fn inverse_square_from_derived(d: &DerivedParams) -> ClosedFormResult {
    let (iota2, j) = (d.iota * d.iota, d.j);
    let radicand = iota2 + 4.0 * j * iota2 - 4.0 * j * j - 6.0 * j - 1.0;
    let center = 2.0 * j - 2.0 * iota2 + 3.0;
    assemble(
        FormulaFamily::InverseSquare,
        FormulaVariant::Printed,
        d,
        center,
        radicand,
        2.0 * d.beta * d.beta,
        None,
    )
}

/// Printed formula matching the model.
pub fn for_model(
    model: &PotentialModel,
    geom: &DefectGeometry,
    flux: &FluxField,
    particle: &ParticleConfig,
) -> Result<ClosedFormResult> {
    match *model {
        PotentialModel::Anharmonic(_) => anharmonic_ground(&model.derive(geom, flux, particle)?),
        PotentialModel::Pseudoharmonic { de, r0 } => pseudoharmonic_ground(de, r0, geom, flux, particle),
        PotentialModel::ShiftedPseudoharmonic { de, r0 } => {
            shifted_pseudoharmonic_ground(de, r0, geom, flux, particle)
        }
        PotentialModel::InverseSquare { gamma } => inverse_square_ground(gamma, geom, flux, particle),
    }
}

/// Ground state from the exact `n = 1` truncation quadratic, for the errata
/// comparison. `radicand` is the quadratic's discriminant in `Lambda beta^2`.
pub fn corrected_ground(family: FormulaFamily, d: &DerivedParams) -> ClosedFormResult {
    let (b, c) = n1_quadratic(d);
    assemble(
        family,
        FormulaVariant::Derived,
        d,
        b,
        b * b - 4.0 * c,
        2.0 * d.beta * d.beta,
        None,
    )
}

pub fn corrected_for_model(
    model: &PotentialModel,
    geom: &DefectGeometry,
    flux: &FluxField,
    particle: &ParticleConfig,
) -> Result<ClosedFormResult> {
    Ok(corrected_ground(FormulaFamily::of(model), &model.derive(geom, flux, particle)?))
}
