//! Job description shared by the command line and library callers.
//!
//! A job is read from TOML (sections `[potential]`, `[geometry]`, `[flux]`,
//! `[particle]`, `[solver]`, optional `[sweep]` and `[output]`) or from the
//! equivalent JSON object.
//!
//! ```
//! use defect_spectra::config::JobConfig;
//!
//! let job = JobConfig::from_toml(r#"
//! [potential]
//! family = "pseudoharmonic"
//! de = 2.0
//! r0 = 1.5
//!
//! [geometry]
//! beta = 0.5
//!
//! [particle]
//! l = 1
//! "#).unwrap();
//! assert_eq!(job.particle.mass, 1.0);
//! assert_eq!(JobConfig::from_toml(&job.to_toml().unwrap()).unwrap(), job);
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::{SolveOptions, SolverKind, SolverSelection, SweepGrid, System, SystemSpec};
use crate::error::{Error, Result};
use crate::potentials::PotentialModel;
use crate::series::SearchWindow;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    pub beta: f64,
    #[serde(default = "one")]
    pub k: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluxSection {
    #[serde(default)]
    pub phi_ab: f64,
    #[serde(default = "one")]
    pub phi0: f64,
}

impl Default for FluxSection {
    fn default() -> Self {
        Self { phi_ab: 0.0, phi0: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticleSection {
    #[serde(default = "one")]
    pub mass: f64,
    #[serde(default)]
    pub l: i64,
    #[serde(default = "one_u32")]
    pub n: u32,
}

impl Default for ParticleSection {
    fn default() -> Self {
        Self { mass: 1.0, l: 0, n: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SolverChoice {
    Closed,
    Series,
    Oracle,
    #[default]
    All,
}

impl SolverChoice {
    pub fn selection(self) -> SolverSelection {
        match self {
            SolverChoice::Closed => SolverSelection::only(SolverKind::Closed),
            SolverChoice::Series => SolverSelection::only(SolverKind::Series),
            SolverChoice::Oracle => SolverSelection::only(SolverKind::Oracle),
            SolverChoice::All => SolverSelection::ALL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default)]
    pub solver: SolverChoice,
    #[serde(default = "default_grid_n")]
    pub grid_n: usize,
    #[serde(default = "default_levels")]
    pub oracle_levels: usize,
    #[serde(default = "default_nu_max")]
    pub nu_max: u32,
    #[serde(default)]
    pub window: SearchWindow,
    #[serde(default)]
    pub unsafe_beta: bool,
    /// Outer cutoff for `wavefunction` sampling and normalization.
    #[serde(default = "default_r_max")]
    pub r_max: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            solver: SolverChoice::All,
            grid_n: default_grid_n(),
            oracle_levels: default_levels(),
            nu_max: default_nu_max(),
            window: SearchWindow::default(),
            unsafe_beta: false,
            r_max: default_r_max(),
            samples: default_samples(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<OutputFormat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub potential: PotentialModel,
    pub geometry: GeometrySection,
    #[serde(default)]
    pub flux: FluxSection,
    #[serde(default)]
    pub particle: ParticleSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepGrid>,
    #[serde(default)]
    pub output: OutputSection,
}

fn one() -> f64 {
    1.0
}
fn one_u32() -> u32 {
    1
}
fn default_grid_n() -> usize {
    1000
}
fn default_levels() -> usize {
    6
}
fn default_nu_max() -> u32 {
    3
}
fn default_r_max() -> f64 {
    10.0
}
fn default_samples() -> usize {
    201
}

impl JobConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidInput(format!("config: {}", e.message())))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("config: {e}")))
    }

    /// JSON when the file ends in `.json` or its first non-blank byte is `{`,
    /// TOML otherwise.
    pub fn parse(text: &str, path: Option<&Path>) -> Result<Self> {
        let json = path.and_then(|p| p.extension()).is_some_and(|e| e == "json")
            || text.trim_start().starts_with('{');
        if json {
            Self::from_json(text)
        } else {
            Self::from_toml(text)
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, Some(path))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::InvalidInput(format!("config is not representable as TOML: {e}")))
    }

    pub fn system_spec(&self) -> SystemSpec {
        SystemSpec {
            potential: self.potential,
            beta: self.geometry.beta,
            k: self.geometry.k,
            phi_ab: self.flux.phi_ab,
            phi0: self.flux.phi0,
            mass: self.particle.mass,
            l: self.particle.l,
            n: self.particle.n,
            unsafe_beta: self.solver.unsafe_beta,
        }
    }

    pub fn system(&self) -> Result<System> {
        self.system_spec().resolve()
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            solvers: self.solver.solver.selection(),
            grid_n: self.solver.grid_n,
            oracle_levels: self.solver.oracle_levels,
            window: self.solver.window,
        }
    }

    /// Checks everything that does not need a solver run.
    pub fn validate(&self) -> Result<()> {
        self.system()?;
        self.validate_solver()
    }

    /// The `[solver]` section alone; sweeps check each point in its row.
    pub fn validate_solver(&self) -> Result<()> {
        let s = &self.solver;
        if s.grid_n < crate::oracle::MIN_GRID {
            return Err(Error::InvalidInput(format!(
                "grid_n = {} is below the minimum {}",
                s.grid_n,
                crate::oracle::MIN_GRID
            )));
        }
        if s.oracle_levels == 0 || s.oracle_levels > crate::oracle::MAX_EIGENVALUES {
            return Err(Error::InvalidInput(format!(
                "oracle_levels must be in 1..={}",
                crate::oracle::MAX_EIGENVALUES
            )));
        }
        s.window.validate()?;
        if !(s.r_max.is_finite() && s.r_max > 0.0) {
            return Err(Error::InvalidInput(format!("r_max = {} must be positive", s.r_max)));
        }
        if s.samples < 2 {
            return Err(Error::InvalidInput("samples must be at least 2".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::AnharmonicParams;
    use proptest::prelude::*;

    #[test]
    fn minimal_toml_fills_defaults() {
        let job = JobConfig::from_toml(
            "[potential]\nfamily = \"inverse-square\"\ngamma = 1.0\n[geometry]\nbeta = 0.5\n",
        )
        .unwrap();
        assert_eq!(job.flux, FluxSection::default());
        assert_eq!(job.particle, ParticleSection::default());
        assert_eq!(job.solver, SolverSection::default());
        assert!(job.sweep.is_none());
        job.validate().unwrap();
    }

    #[test]
    fn toml_and_json_agree() {
        let toml = "[potential]\nfamily = \"anharmonic\"\neta = 1.0\ngamma = 0.5\ndelta = 0.0\n\
                    [geometry]\nbeta = 0.5\nk = 1.0\n[sweep]\nbeta = [0.1, 0.2]\n";
        let json = r#"{"potential": {"family": "anharmonic", "eta": 1.0, "gamma": 0.5, "delta": 0.0},
                       "geometry": {"beta": 0.5, "k": 1.0}, "sweep": {"beta": [0.1, 0.2]}}"#;
        assert_eq!(JobConfig::parse(toml, None).unwrap(), JobConfig::parse(json, None).unwrap());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = JobConfig::from_toml("[potential]\nfamily = \"inverse-square\"\ngamma = 1.0\n[geometry]\nbeta = 0.5\nbta = 1\n")
            .unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)), "{err}");
        assert!(JobConfig::from_toml("[geometry]\nbeta = 0.5\n").is_err());
    }

    fn finite() -> impl Strategy<Value = f64> {
        prop_oneof![-1e6f64..1e6, (1e-300f64..1e300), Just(0.0), Just(-0.0)]
    }

    fn model() -> impl Strategy<Value = PotentialModel> {
        prop_oneof![
            (finite(), finite(), finite())
                .prop_map(|(eta, gamma, delta)| PotentialModel::Anharmonic(AnharmonicParams { eta, gamma, delta })),
            (finite(), finite()).prop_map(|(de, r0)| PotentialModel::Pseudoharmonic { de, r0 }),
            (finite(), finite()).prop_map(|(de, r0)| PotentialModel::ShiftedPseudoharmonic { de, r0 }),
            finite().prop_map(|gamma| PotentialModel::InverseSquare { gamma }),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn round_trip_is_lossless(
            potential in model(),
            beta in finite(), k in finite(), phi_ab in finite(), phi0 in finite(),
            mass in finite(), l in any::<i32>(), n in 0u32..50,
            grid_n in 100usize..100_000, nu_max in 0u32..10, unsafe_beta in any::<bool>(),
            betas in proptest::option::of(proptest::collection::vec(finite(), 0..5)),
            ls in proptest::option::of(proptest::collection::vec(-20i64..20, 1..5)),
            csv in any::<bool>(),
        ) {
            let job = JobConfig {
                potential,
                geometry: GeometrySection { beta, k },
                flux: FluxSection { phi_ab, phi0 },
                particle: ParticleSection { mass, l: l as i64, n },
                solver: SolverSection { grid_n, nu_max, unsafe_beta, ..SolverSection::default() },
                sweep: Some(SweepGrid { beta: betas, l: ls, ..SweepGrid::default() }),
                output: OutputSection {
                    format: Some(if csv { OutputFormat::Csv } else { OutputFormat::Json }),
                    path: Some("out/table.csv".into()),
                },
            };
            let text = job.to_toml().unwrap();
            let back = JobConfig::from_toml(&text).unwrap();
            // Compare bit patterns so that the sign of zero counts too.
            prop_assert_eq!(serde_json::to_string(&back).unwrap(), serde_json::to_string(&job).unwrap());
            prop_assert_eq!(back.geometry.beta.to_bits(), job.geometry.beta.to_bits());
            let json = serde_json::to_string(&job).unwrap();
            prop_assert_eq!(JobConfig::from_json(&json).unwrap(), job);
        }
    }
}
