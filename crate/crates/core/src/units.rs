//! Internal unit convention and conversion constants.
//!
//! All geometry is in micrometers, time in seconds, force in piconewtons,
//! torque in pN·µm. Viscosity passed around in user-facing structs is in
//! mPa·s and converted to pN·s/µm² (= 1e-3 of the mPa·s value) right where
//! hydrodynamic kernels consume it. With this triple every Stokes-flow
//! formula keeps its textbook form.

/// Boltzmann constant, J/K.
pub const BOLTZMANN_J_PER_K: f64 = 1.380_649e-23;

/// Default absolute temperature for the stress scale M = kT/v, K.
pub const DEFAULT_TEMPERATURE_K: f64 = 298.0;

/// Default solvent molecule volume v, m³ (one water-like molecule).
pub const DEFAULT_SOLVENT_VOLUME_M3: f64 = 3.0e-29;

/// Default stress scale M = kT/v in Pa for the defaults above (~1.37e5 Pa).
pub fn default_stress_scale_pa() -> f64 {
    BOLTZMANN_J_PER_K * DEFAULT_TEMPERATURE_K / DEFAULT_SOLVENT_VOLUME_M3
}

/// mPa·s to internal viscosity (pN·s/µm²).
pub const VISCOSITY_MPAS_TO_INTERNAL: f64 = 1e-3;

/// 1 emu = 1e-3 A·m².
pub const EMU_TO_A_M2: f64 = 1e-3;

/// Torque in pN·µm produced by a moment of 1 A·m² in a field of 1 mT.
///
/// m[A·m²] × B[mT] × 1e-3 = torque in N·m; 1 N·m = 1e18 pN·µm.
pub const TORQUE_PNUM_PER_AM2_MT: f64 = 1e15;

/// Fluid constants: density in kg/m³, dynamic viscosity in mPa·s.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Fluid {
    pub density_kg_m3: f64,
    pub viscosity_mpa_s: f64,
}

impl Fluid {
    /// Water at 25 °C.
    pub fn water() -> Self {
        Fluid {
            density_kg_m3: 997.0,
            viscosity_mpa_s: 0.89,
        }
    }

    /// Isopropyl alcohol at 25 °C.
    pub fn ipa() -> Self {
        Fluid {
            density_kg_m3: 786.0,
            viscosity_mpa_s: 2.2,
        }
    }

    /// Viscosity in internal units (pN·s/µm²).
    pub fn viscosity_internal(&self) -> f64 {
        self.viscosity_mpa_s * VISCOSITY_MPAS_TO_INTERNAL
    }
}
