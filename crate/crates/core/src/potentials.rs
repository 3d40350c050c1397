//! Potential families: the anharmonic oscillator `eta r^2 + gamma/r^2 + delta`
//! and the models that embed into it.

use serde::{Deserialize, Serialize};

use crate::error::{finite, Error, Result};
use crate::model::{derive_parameters, DefectGeometry, DerivedParams, Family, FluxField, ParticleConfig};

/// Strengths of `V(r) = eta r^2 + gamma / r^2 + delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnharmonicParams {
    pub eta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl AnharmonicParams {
    pub fn new(eta: f64, gamma: f64, delta: f64) -> Result<Self> {
        let p = Self { eta, gamma, delta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        finite("eta", self.eta)?;
        finite("gamma", self.gamma)?;
        finite("delta", self.delta)?;
        if self.eta < 0.0 || self.gamma < 0.0 {
            return Err(Error::InvalidInput(format!(
                "eta = {} and gamma = {} must be non-negative",
                self.eta, self.gamma
            )));
        }
        Ok(())
    }

    pub fn evaluate(&self, r: f64) -> f64 {
        self.eta * r * r + self.gamma / (r * r) + self.delta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum PotentialModel {
    Anharmonic(AnharmonicParams),
    /// `De (r/r0 - r0/r)^2`.
    Pseudoharmonic { de: f64, r0: f64 },
    /// `De (r/r0 - r0/r)^2 + 2 De`.
    ShiftedPseudoharmonic { de: f64, r0: f64 },
    InverseSquare { gamma: f64 },
}

impl PotentialModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            PotentialModel::Anharmonic(p) => p.validate(),
            PotentialModel::Pseudoharmonic { de, r0 }
            | PotentialModel::ShiftedPseudoharmonic { de, r0 } => {
                finite("de", de)?;
                finite("r0", r0)?;
                if de <= 0.0 || r0 <= 0.0 {
                    return Err(Error::InvalidInput(format!(
                        "dissociation energy De = {de} and equilibrium separation r0 = {r0} must be positive"
                    )));
                }
                Ok(())
            }
            PotentialModel::InverseSquare { gamma } => {
                finite("gamma", gamma)?;
                if gamma < 0.0 {
                    return Err(Error::InvalidInput(format!(
                        "inverse-square strength gamma = {gamma} must be non-negative"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn family(&self) -> Family {
        match self {
            PotentialModel::InverseSquare { .. } => Family::InverseSquare,
            _ => Family::Anharmonic,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PotentialModel::Anharmonic(_) => "anharmonic",
            PotentialModel::Pseudoharmonic { .. } => "pseudoharmonic",
            PotentialModel::ShiftedPseudoharmonic { .. } => "shifted-pseudoharmonic",
            PotentialModel::InverseSquare { .. } => "inverse-square",
        }
    }

    /// The `(eta, gamma, delta)` triple reproducing this model.
    pub fn to_anharmonic(&self) -> AnharmonicParams {
        match *self {
            PotentialModel::Anharmonic(p) => p,
            PotentialModel::Pseudoharmonic { de, r0 } => AnharmonicParams {
                eta: de / (r0 * r0),
                gamma: de * r0 * r0,
                delta: -2.0 * de,
            },
            PotentialModel::ShiftedPseudoharmonic { de, r0 } => AnharmonicParams {
                eta: de / (r0 * r0),
                gamma: de * r0 * r0,
                delta: 0.0,
            },
            PotentialModel::InverseSquare { gamma } => AnharmonicParams {
                eta: 0.0,
                gamma,
                delta: 0.0,
            },
        }
    }

    pub fn evaluate(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::Domain(format!("potential evaluated at r = {r}; need r > 0")));
        }
        Ok(match *self {
            PotentialModel::Anharmonic(p) => p.evaluate(r),
            PotentialModel::Pseudoharmonic { de, r0 } => {
                let t = r / r0 - r0 / r;
                de * t * t
            }
            PotentialModel::ShiftedPseudoharmonic { de, r0 } => {
                let t = r / r0 - r0 / r;
                de * t * t + 2.0 * de
            }
            PotentialModel::InverseSquare { gamma } => gamma / (r * r),
        })
    }

    /// Validates the model and reduces it to the solver symbols.
    pub fn derive(
        &self,
        geom: &DefectGeometry,
        flux: &FluxField,
        particle: &ParticleConfig,
    ) -> Result<DerivedParams> {
        self.validate()?;
        let mut d = derive_parameters(geom, flux, particle, &self.to_anharmonic())?;
        d.family = self.family();
        Ok(d)
    }
}
