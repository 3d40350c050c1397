//! Physical parameters of the problem and the reduction to the composite
//! symbols (`iota`, `j`, `omega`, ...) consumed by every solver.
//!
//! Natural units are used throughout (`hbar = c = 1`).

use serde::{Deserialize, Serialize};

use crate::error::{finite, Error, Result};
use crate::potentials::AnharmonicParams;

/// Screw-dislocation background: dislocation strength `beta` and the axial
/// wavenumber `k` of the separated `e^{ikz}` factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DefectGeometry {
    beta: f64,
    k: f64,
}

impl DefectGeometry {
    /// Requires `0 < beta < 1` and `k > 0`.
    pub fn new(beta: f64, k: f64) -> Result<Self> {
        let geom = Self::new_unchecked_beta(beta, k)?;
        if beta >= 1.0 {
            return Err(Error::InvalidInput(format!(
                "dislocation parameter beta = {beta} must lie in (0, 1); use the unsafe-beta override for limit studies"
            )));
        }
        Ok(geom)
    }

    /// Only requires `beta > 0`; used for flat-space limit studies and
    /// `beta >= 1` explorations.
    pub fn new_unchecked_beta(beta: f64, k: f64) -> Result<Self> {
        finite("beta", beta)?;
        finite("k", k)?;
        if beta <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "dislocation parameter beta = {beta} must be positive"
            )));
        }
        if k <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "axial wavenumber k = {k} must be positive"
            )));
        }
        Ok(Self { beta, k })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn k(&self) -> f64 {
        self.k
    }
}

/// Aharonov–Bohm flux. The reduced flux `phi = phi_ab / phi0` is stored as an
/// integer number of flux quanta plus a fractional remainder, so that shifting
/// by whole quanta is exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxField {
    phi0: f64,
    quanta: i64,
    fraction: f64,
}

impl FluxField {
    pub fn new(phi_ab: f64, phi0: f64) -> Result<Self> {
        finite("phi_ab", phi_ab)?;
        finite("phi0", phi0)?;
        if phi0 <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "flux quantum phi0 = {phi0} must be positive"
            )));
        }
        Self::from_reduced(phi_ab / phi0, phi0)
    }

    pub fn from_reduced(phi: f64, phi0: f64) -> Result<Self> {
        finite("phi", phi)?;
        finite("phi0", phi0)?;
        if phi0 <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "flux quantum phi0 = {phi0} must be positive"
            )));
        }
        if phi.abs() >= 2f64.powi(52) {
            return Err(Error::InvalidInput(format!("reduced flux {phi} is too large")));
        }
        let whole = phi.floor();
        Ok(Self {
            phi0,
            quanta: whole as i64,
            fraction: phi - whole,
        })
    }

    pub fn zero() -> Self {
        Self {
            phi0: 1.0,
            quanta: 0,
            fraction: 0.0,
        }
    }

    /// The same field threaded by `nu` additional flux quanta.
    pub fn shifted(&self, nu: i64) -> Self {
        Self {
            quanta: self.quanta + nu,
            ..*self
        }
    }

    pub fn phi0(&self) -> f64 {
        self.phi0
    }

    /// Reduced flux `phi_ab / phi0`.
    pub fn phi(&self) -> f64 {
        self.quanta as f64 + self.fraction
    }

    pub fn phi_ab(&self) -> f64 {
        self.phi() * self.phi0
    }

    pub fn whole_quanta(&self) -> i64 {
        self.quanta
    }

    pub fn fractional_part(&self) -> f64 {
        self.fraction
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParticleConfig {
    mass: f64,
    l: i64,
    n: u32,
}

impl ParticleConfig {
    /// `mass > 0`, angular number `l`, radial mode `n >= 1` (the ground state
    /// is `n = 1`).
    pub fn new(mass: f64, l: i64, n: u32) -> Result<Self> {
        finite("mass", mass)?;
        if mass <= 0.0 {
            return Err(Error::InvalidInput(format!("mass M = {mass} must be positive")));
        }
        if n == 0 {
            return Err(Error::InvalidInput(
                "radial mode n must be >= 1 (ground state is n = 1)".into(),
            ));
        }
        Ok(Self {
            mass,
            l,
            n,
        })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn l(&self) -> i64 {
        self.l
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn with_l(&self, l: i64) -> Self {
        Self { l, ..*self }
    }

    pub fn with_n(&self, n: u32) -> Result<Self> {
        Self::new(self.mass(), self.l, n)
    }
}

/// Which radial equation the derived symbols feed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// `eta r^2 + gamma / r^2 + delta`, including the molecular mappings.
    Anharmonic,
    /// `gamma / r^2` only; spectral parameter is `Theta = 2 M E - k^2`.
    InverseSquare,
}

/// Composite symbols shared by every solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedParams {
    /// Shifted angular number `l - phi - beta k`.
    pub iota: f64,
    /// Index exponent `sqrt(2 M gamma + 1/4)`.
    pub j: f64,
    /// Scaled oscillator parameter `sqrt(2 M eta) beta^2`.
    pub omega: f64,
    /// Constant offset `delta` of the potential.
    pub energy_shift: f64,
    /// `2 M gamma`, kept alongside `j` so formulas that use it directly do
    /// not go through `j^2 - 1/4`.
    pub two_m_gamma: f64,
    /// `2 M eta`.
    pub two_m_eta: f64,
    pub mass: f64,
    pub beta: f64,
    pub k: f64,
    pub family: Family,
}

impl DerivedParams {
    /// `2 M eta r^2 + 2 M gamma / r^2`: the scaled potential without the
    /// constant offset.
    pub fn scaled_potential(&self, r: f64) -> f64 {
        let r2 = r * r;
        self.two_m_eta * r2 + self.two_m_gamma / r2
    }
}

pub fn derive_parameters(
    geom: &DefectGeometry,
    flux: &FluxField,
    particle: &ParticleConfig,
    pot: &AnharmonicParams,
) -> Result<DerivedParams> {
    let mass = particle.mass();
    finite("eta", pot.eta)?;
    finite("gamma", pot.gamma)?;
    finite("delta", pot.delta)?;
    if pot.eta < 0.0 {
        return Err(Error::InvalidInput(format!(
            "quadratic strength eta = {} must be non-negative",
            pot.eta
        )));
    }
    let two_m_gamma = 2.0 * mass * pot.gamma;
    let radicand = two_m_gamma + 0.25;
    if radicand < 0.0 {
        return Err(Error::NonPhysical(format!(
            "gamma = {} < -1/(8M) makes the index exponent j complex",
            pot.gamma
        )));
    }
    let two_m_eta = 2.0 * mass * pot.eta;
    let beta = geom.beta();
    let k = geom.k();
    let iota = (particle.l() - flux.whole_quanta()) as f64 - flux.fractional_part() - beta * k;
    Ok(DerivedParams {
        iota,
        j: radicand.sqrt(),
        omega: two_m_eta.sqrt() * beta * beta,
        energy_shift: pot.delta,
        two_m_gamma,
        two_m_eta,
        mass,
        beta,
        k,
        family: Family::Anharmonic,
    })
}

/// `E = k^2/(2M) + value/(2M) + delta` for a quantized `Lambda` (or `Theta`,
/// where `delta = 0`).
pub fn energy_from_quantized(value: f64, derived: &DerivedParams) -> Result<f64> {
    finite("quantized value", value)?;
    let two_m = 2.0 * derived.mass;
    Ok(derived.k * derived.k / two_m + value / two_m + derived.energy_shift)
}

/// Inverse of [`energy_from_quantized`].
pub fn quantized_from_energy(energy: f64, derived: &DerivedParams) -> Result<f64> {
    finite("energy", energy)?;
    Ok(2.0 * derived.mass * (energy - derived.energy_shift) - derived.k * derived.k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pot(eta: f64, gamma: f64, delta: f64) -> AnharmonicParams {
        AnharmonicParams { eta, gamma, delta }
    }

    #[test]
    fn zero_cases_substitute_directly() {
        let geom = DefectGeometry::new(0.5, 2.0).unwrap();
        let flux = FluxField::new(1.0, 1.0).unwrap();
        let p = ParticleConfig::new(1.0, 2, 1).unwrap();
        let d = derive_parameters(&geom, &flux, &p, &pot(0.0, 0.0, 0.0)).unwrap();
        assert_eq!(d.iota, 0.0);
        assert_eq!(d.j, 0.5);
        assert_eq!(d.omega, 0.0);
    }

    #[test]
    fn omega_from_eta_and_beta() {
        let geom = DefectGeometry::new(0.5, 1.0).unwrap();
        let p = ParticleConfig::new(1.0, 0, 1).unwrap();
        let d = derive_parameters(&geom, &FluxField::zero(), &p, &pot(2.0, 0.0, 0.0)).unwrap();
        assert_eq!(d.omega, 0.5);
        assert_eq!(d.energy_shift, 0.0);
    }

    #[test]
    fn energy_from_quantized_arithmetic() {
        let geom = DefectGeometry::new(0.5, 1.0).unwrap();
        let p = ParticleConfig::new(0.5, 0, 1).unwrap();
        let d = derive_parameters(&geom, &FluxField::zero(), &p, &pot(0.0, 0.0, 0.0)).unwrap();
        assert_eq!(energy_from_quantized(2.0, &d).unwrap(), 3.0);
        assert!(energy_from_quantized(f64::NAN, &d).is_err());
        let e = energy_from_quantized(7.25, &d).unwrap();
        assert_eq!(quantized_from_energy(e, &d).unwrap(), 7.25);
    }

    #[test]
    fn theta_zero_with_vanishing_k_gives_zero_energy() {
        let p = ParticleConfig::new(3.0, 0, 1).unwrap();
        let mut last = f64::INFINITY;
        for k in [1e-2, 1e-4, 1e-8] {
            let geom = DefectGeometry::new(0.5, k).unwrap();
            let d = derive_parameters(&geom, &FluxField::zero(), &p, &pot(0.0, 1.0, 0.0)).unwrap();
            let e = energy_from_quantized(0.0, &d).unwrap();
            assert!(e < last);
            last = e;
        }
        assert!(last < 1e-16);
    }

    #[test]
    fn rejects_invalid_inputs() {
        assert!(DefectGeometry::new(1.0, 1.0).is_err());
        assert!(DefectGeometry::new(0.0, 1.0).is_err());
        assert!(DefectGeometry::new(0.5, 0.0).is_err());
        assert!(DefectGeometry::new(f64::NAN, 1.0).is_err());
        assert!(DefectGeometry::new_unchecked_beta(1e-9, 1.0).is_ok());
        assert!(DefectGeometry::new_unchecked_beta(1.5, 1.0).is_ok());
        assert!(FluxField::new(1.0, 0.0).is_err());
        assert!(ParticleConfig::new(1.0, 0, 0).is_err());
        assert!(ParticleConfig::new(-1.0, 0, 1).is_err());

        let geom = DefectGeometry::new(0.5, 1.0).unwrap();
        let p = ParticleConfig::new(1.0, 0, 1).unwrap();
        let err = derive_parameters(&geom, &FluxField::zero(), &p, &pot(0.0, -0.2, 0.0));
        assert!(matches!(err, Err(Error::NonPhysical(_))));
        // gamma slightly negative but above -1/(8M) is still a real exponent.
        assert!(derive_parameters(&geom, &FluxField::zero(), &p, &pot(0.0, -0.1, 0.0)).is_ok());
        assert!(derive_parameters(&geom, &FluxField::zero(), &p, &pot(f64::INFINITY, 0.0, 0.0)).is_err());
    }

    #[test]
    fn reduced_flux_is_quotient() {
        let f = FluxField::new(3.5, 2.0).unwrap();
        assert_eq!(f.phi(), 1.75);
        assert_eq!(f.phi_ab(), 3.5);
        assert_eq!(f.shifted(2).phi(), 3.75);
    }

    proptest! {
        #[test]
        fn derived_depends_on_l_minus_phi_only(
            l in -20i64..20,
            phi in -5.0f64..5.0,
            nu in -10i64..10,
            beta in 0.01f64..0.99,
            k in 0.01f64..5.0,
            eta in 0.0f64..5.0,
            gamma in 0.0f64..5.0,
        ) {
            let geom = DefectGeometry::new(beta, k).unwrap();
            let flux = FluxField::from_reduced(phi, 1.0).unwrap();
            let p = ParticleConfig::new(1.3, l, 1).unwrap();
            let pv = pot(eta, gamma, 0.1);
            let a = derive_parameters(&geom, &flux, &p, &pv).unwrap();
            let b = derive_parameters(&geom, &flux.shifted(nu), &p.with_l(l + nu), &pv).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn energy_is_affine_with_slope_inverse_two_m(
            mass in 0.1f64..10.0,
            a in -50.0f64..50.0,
            b in -50.0f64..50.0,
        ) {
            prop_assume!((a - b).abs() > 1e-3);
            let geom = DefectGeometry::new(0.4, 1.2).unwrap();
            let p = ParticleConfig::new(mass, 0, 1).unwrap();
            let d = derive_parameters(&geom, &FluxField::zero(), &p, &pot(1.0, 1.0, 0.7)).unwrap();
            let slope = (energy_from_quantized(a, &d).unwrap() - energy_from_quantized(b, &d).unwrap()) / (a - b);
            prop_assert!((slope - 1.0 / (2.0 * mass)).abs() <= 1e-9 / (2.0 * mass));
        }
    }
}
