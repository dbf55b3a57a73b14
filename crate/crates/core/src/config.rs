//! File form of a thermal simulation.

use serde::{Deserialize, Serialize};

use crate::defects::{DefectConfig, Defects};
use crate::error::{Error, Result};
use crate::lattice::TorusLattice;
use crate::masses::{MassSpec, MassTable};
use crate::qudit::PauliError;
use crate::thermal::{DecoderKind, RateModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub lx: usize,
    pub ly: usize,
    pub d: u32,
    pub masses: MassSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub defects: Option<DefectConfig>,
    pub rate: RateModel<f64>,
    pub max_time: f64,
    pub trajectories: usize,
    pub seed: u64,
    pub decoder: DecoderKind,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.masses.d != self.d {
            return Err(Error::Config(format!("masses are for d={}, config says d={}", self.masses.d, self.d)));
        }
        if let Some(df) = &self.defects {
            if df.d != self.d {
                return Err(Error::Config(format!("defects are for d={}, config says d={}", df.d, self.d)));
            }
        }
        if self.trajectories == 0 {
            return Err(Error::Config("at least one trajectory is needed".into()));
        }
        if !(self.max_time >= 0.0) || !self.max_time.is_finite() {
            return Err(Error::Config(format!("max_time must be finite and non-negative, got {}", self.max_time)));
        }
        RateModel::new(self.rate.kind, self.rate.beta)?;
        Ok(())
    }

    pub fn lattice(&self) -> Result<TorusLattice> {
        TorusLattice::new(self.lx, self.ly)
    }

    pub fn mass_table(&self) -> Result<MassTable<f64>> {
        self.masses.to_table(self.lx * self.ly)
    }

    /// Validated defect lines, if any.
    pub fn defect_lines(&self, lattice: &TorusLattice) -> Result<Option<Defects>> {
        self.defects.as_ref().map(|cfg| Defects::validate(cfg, lattice)).transpose()
    }

    pub fn with_beta(&self, beta: f64) -> Self {
        let mut out = self.clone();
        out.rate.beta = beta;
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SimConfig = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// File form of a single error on a lattice.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorFile {
    pub lx: usize,
    pub ly: usize,
    /// `d=<d>;Z=<e,...>;X=<e,...>` with one exponent per qudit.
    pub pauli: String,
}

impl ErrorFile {
    pub fn new(lattice: &TorusLattice, p: &PauliError) -> Self {
        ErrorFile {
            lx: lattice.lx(),
            ly: lattice.ly(),
            pauli: p.to_string(),
        }
    }

    pub fn from_json(text: &str) -> Result<(TorusLattice, PauliError)> {
        let file: ErrorFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let lattice = TorusLattice::new(file.lx, file.ly)?;
        let p: PauliError = file.pauli.parse()?;
        if p.num_qudits() != lattice.num_qudits() {
            return Err(Error::Dimension(format!(
                "error has {} qudits, a {}x{} torus has {}",
                p.num_qudits(),
                file.lx,
                file.ly,
                lattice.num_qudits()
            )));
        }
        Ok((lattice, p))
    }
}
