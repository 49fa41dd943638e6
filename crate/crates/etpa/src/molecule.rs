//! Three-level molecular response.

use crate::error::{require, Result};
use crate::specfun::lorentzian;

#[derive(Clone, Debug, PartialEq)]
pub struct MoleculeParams {
    /// Final-state frequency `omega_fg`.
    pub omega_fg: f64,
    /// Dephasing half width `gamma_fg`.
    pub gamma_fg: f64,
    /// Aggregate of the intermediate-state dipole sum and field prefactors.
    pub coupling: f64,
}

impl MoleculeParams {
    pub fn new(omega_fg: f64, gamma_fg: f64) -> Self {
        MoleculeParams { omega_fg, gamma_fg, coupling: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        require(self.omega_fg.is_finite() && self.omega_fg > 0.0, || {
            format!("omega_fg must be positive, got {}", self.omega_fg)
        })?;
        require(self.gamma_fg.is_finite() && self.gamma_fg > 0.0, || {
            format!("gamma_fg must be positive, got {}", self.gamma_fg)
        })?;
        require(self.coupling.is_finite() && self.coupling > 0.0, || {
            format!("coupling must be positive, got {}", self.coupling)
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleParams {
    /// Number density `m_0`.
    pub m_0: f64,
    /// Slab thickness.
    pub delta_z: f64,
}

impl Default for SampleParams {
    fn default() -> Self {
        SampleParams { m_0: 1.0, delta_z: 1.0 }
    }
}

impl SampleParams {
    pub fn validate(&self) -> Result<()> {
        require(self.m_0 > 0.0 && self.delta_z > 0.0 && self.m_0.is_finite() && self.delta_z.is_finite(), || {
            format!("sample density and thickness must be positive ({}, {})", self.m_0, self.delta_z)
        })
    }

    /// Molecules inside the beam, `m_0 delta_z A_p`.
    pub fn n_mol(&self, pump_area: f64) -> f64 {
        self.m_0 * self.delta_z * pump_area
    }
}

/// `sigma^(2) = coupling / (2 gamma_fg)`.
pub fn classical_tpa_cross_section(mol: &MoleculeParams) -> Result<f64> {
    mol.validate()?;
    Ok(mol.coupling / (2.0 * mol.gamma_fg))
}

/// Normalized absorption line at total two-photon frequency `omega_sum`.
pub fn lineshape(mol: &MoleculeParams, omega_sum: f64) -> Result<f64> {
    lorentzian(mol.omega_fg - omega_sum, mol.gamma_fg)
}
