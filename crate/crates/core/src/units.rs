use serde::{Deserialize, Serialize};

/// Angular frequency in rad/ps corresponding to 1 cm⁻¹ (2π · c · 100 m⁻¹).
pub const CM_TO_RAD_PER_PS: f64 = 0.1883651567;

/// Unit system of a network description.
///
/// `Spectroscopic` energies are wavenumbers (cm⁻¹); times are ps and rates
/// ps⁻¹. `Dimensionless` uses the coupling as the energy unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum UnitSystem {
    #[default]
    #[serde(rename = "dimensionless")]
    Dimensionless,
    #[serde(rename = "cm-1")]
    Spectroscopic,
}

impl UnitSystem {
    /// Conversion from an energy value to an angular frequency.
    pub fn kappa(self) -> f64 {
        match self {
            UnitSystem::Dimensionless => 1.0,
            UnitSystem::Spectroscopic => CM_TO_RAD_PER_PS,
        }
    }

    pub fn time_unit(self) -> &'static str {
        match self {
            UnitSystem::Dimensionless => "1/J",
            UnitSystem::Spectroscopic => "ps",
        }
    }
}

/// How a rate quoted in cm⁻¹ turns into an inverse time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RateConvention {
    /// Multiply by κ (angular convention, same as energies).
    #[default]
    Kappa,
    /// Multiply by κ/2π (ordinary frequency).
    KappaOver2Pi,
}

impl RateConvention {
    pub fn factor(self, units: UnitSystem) -> f64 {
        match self {
            RateConvention::Kappa => units.kappa(),
            RateConvention::KappaOver2Pi => units.kappa() / (2.0 * std::f64::consts::PI),
        }
    }
}
