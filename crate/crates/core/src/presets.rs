//! Named two-level models.
//!
//! All three share `H = E|1⟩⟨1| + Ω(|0⟩⟨1| + |1⟩⟨0|)`. `decaying_driven_tls`
//! adds spontaneous emission `(Γ, σ⁻)`; `thermal_tls` couples to a bath with
//! mean occupation `n` through `(Γ(1+n), σ⁻)` and `(Γn, σ⁺)`.

use std::fmt;
use std::str::FromStr;

use crate::error::PresetError;
use crate::liouville::{JumpOperator, LindbladModel};
use crate::matrix::ComplexMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PresetName {
    DrivenTls,
    DecayingDrivenTls,
    ThermalTls,
}

impl PresetName {
    pub const ALL: [PresetName; 3] = [Self::DrivenTls, Self::DecayingDrivenTls, Self::ThermalTls];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::DrivenTls => "driven_tls",
            Self::DecayingDrivenTls => "decaying_driven_tls",
            Self::ThermalTls => "thermal_tls",
        }
    }
}

impl fmt::Display for PresetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PresetName {
    type Err = PresetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| PresetError::UnknownName(s.to_owned()))
    }
}

/// Parameters for a named model. Unused ones are ignored by `make`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PresetSpec {
    pub name: PresetName,
    /// Excited-state energy `E`.
    pub energy: f64,
    /// Drive amplitude `Ω`.
    pub drive: f64,
    /// Decay rate `Γ`.
    pub rate: f64,
    /// Bath occupation `n`.
    pub occupation: f64,
}

impl PresetSpec {
    pub fn new(name: PresetName) -> Self {
        Self {
            name,
            energy: 1.0,
            drive: 1.0,
            rate: 0.1,
            occupation: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), PresetError> {
        for (name, value) in [("E", self.energy), ("Omega", self.drive)] {
            if !value.is_finite() {
                return Err(PresetError::InvalidParameter { name, value });
            }
        }
        for (name, value) in [("Gamma", self.rate), ("n", self.occupation)] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(PresetError::InvalidParameter { name, value });
            }
        }
        Ok(())
    }

    pub fn make(&self) -> Result<LindbladModel, PresetError> {
        self.validate()?;
        let (e, omega, gamma, n) = (self.energy, self.drive, self.rate, self.occupation);
        let model = match self.name {
            PresetName::DrivenTls => driven_tls(e, omega),
            PresetName::DecayingDrivenTls => decaying_driven_tls(e, omega, gamma),
            PresetName::ThermalTls => thermal_tls(e, omega, gamma, n),
        }?;
        Ok(model.with_label(self.name.as_str()))
    }
}

pub fn make(spec: &PresetSpec) -> Result<LindbladModel, PresetError> {
    spec.make()
}

/// `σ⁻ = |0⟩⟨1|`.
pub fn sigma_minus() -> ComplexMatrix {
    ComplexMatrix::unit(2, 0, 1)
}

/// `σ⁺ = |1⟩⟨0|`.
pub fn sigma_plus() -> ComplexMatrix {
    ComplexMatrix::unit(2, 1, 0)
}

pub fn tls_hamiltonian(energy: f64, drive: f64) -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[[0.0, drive], [drive, energy]])
}

pub fn driven_tls(energy: f64, drive: f64) -> Result<LindbladModel, PresetError> {
    Ok(LindbladModel::hamiltonian_only(tls_hamiltonian(energy, drive))?)
}

pub fn decaying_driven_tls(energy: f64, drive: f64, rate: f64) -> Result<LindbladModel, PresetError> {
    Ok(LindbladModel::new(
        tls_hamiltonian(energy, drive),
        vec![JumpOperator::new(rate, sigma_minus())],
    )?)
}

/// With `n = 0` the absorption channel has zero rate and is dropped, so the
/// model coincides with [`decaying_driven_tls`].
pub fn thermal_tls(energy: f64, drive: f64, rate: f64, occupation: f64) -> Result<LindbladModel, PresetError> {
    let mut jumps = vec![JumpOperator::new(rate * (1.0 + occupation), sigma_minus())];
    if occupation > 0.0 {
        jumps.push(JumpOperator::new(rate * occupation, sigma_plus()));
    }
    Ok(LindbladModel::new(tls_hamiltonian(energy, drive), jumps)?)
}
