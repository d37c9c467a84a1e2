//! Beer–Lambert propagation and water-type presets.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{non_negative, Error, Result};

/// Laser colour used for the link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelLabel {
    Red,
    Green,
    Blue,
    Custom,
}

impl fmt::Display for ChannelLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChannelLabel::Red => "red",
            ChannelLabel::Green => "green",
            ChannelLabel::Blue => "blue",
            ChannelLabel::Custom => "custom",
        })
    }
}

/// A wavelength together with its composite beam attenuation coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelPreset {
    pub label: ChannelLabel,
    pub wavelength_nm: f64,
    /// Beam attenuation coefficient `K`, 1/m.
    pub k_per_meter: f64,
}

impl ChannelPreset {
    pub const RED: ChannelPreset = ChannelPreset {
        label: ChannelLabel::Red,
        wavelength_nm: 650.0,
        k_per_meter: 0.3,
    };
    pub const GREEN: ChannelPreset = ChannelPreset {
        label: ChannelLabel::Green,
        wavelength_nm: 550.0,
        k_per_meter: 0.07,
    };
    pub const BLUE: ChannelPreset = ChannelPreset {
        label: ChannelLabel::Blue,
        wavelength_nm: 450.0,
        k_per_meter: 0.02,
    };

    /// The three laser presets in red, green, blue order.
    pub const RGB: [ChannelPreset; 3] = [Self::RED, Self::GREEN, Self::BLUE];

    /// A user-specified attenuation. The wavelength is unknown and set to NaN.
    pub fn custom(k_per_meter: f64) -> Result<Self> {
        if !k_per_meter.is_finite() {
            return Err(Error::domain("K_per_meter", k_per_meter, "must be finite"));
        }
        Ok(ChannelPreset {
            label: ChannelLabel::Custom,
            wavelength_nm: f64::NAN,
            k_per_meter: non_negative("K_per_meter", k_per_meter)?,
        })
    }
}

impl FromStr for ChannelPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "red" => Ok(Self::RED),
            "green" => Ok(Self::GREEN),
            "blue" => Ok(Self::BLUE),
            other => Err(Error::Config(format!(
                "unknown channel `{other}` (expected red, green or blue)"
            ))),
        }
    }
}

/// Temperature-dependent absorption plus a scattering term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbsorptionModel {
    /// Temperature-independent absorption, 1/m.
    pub k_a0: f64,
    /// Water temperature, °C.
    pub temperature_c: f64,
    /// Temperature coefficient, 1/(m·°C).
    pub temp_coeff: f64,
    /// Scattering coefficient, 1/m.
    pub k_s: f64,
}

impl AbsorptionModel {
    /// Composite beam attenuation `K_A + K_S` for this model.
    pub fn beam_attenuation(&self) -> Result<f64> {
        beam_attenuation(absorption_coefficient(self)?, self.k_s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WaterType {
    PureSeafloor,
    ShallowSea,
    Dirty,
}

/// Relative concentration of chlorophyll, gelbstoff and plankton.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Turbidity {
    Low,
    High,
    VeryHigh,
}

impl WaterType {
    /// Best transmission wavelength band in nm, inclusive.
    pub fn optimum_band_nm(self) -> (f64, f64) {
        match self {
            WaterType::PureSeafloor => (450.0, 500.0),
            WaterType::ShallowSea | WaterType::Dirty => (520.0, 570.0),
        }
    }

    pub fn turbidity(self) -> Turbidity {
        match self {
            WaterType::PureSeafloor => Turbidity::Low,
            WaterType::ShallowSea => Turbidity::High,
            WaterType::Dirty => Turbidity::VeryHigh,
        }
    }
}

/// Power left after `distance_m` of propagation: `P0·exp(−K·d)`.
pub fn received_power(p0_watts: f64, k_t: f64, distance_m: f64) -> Result<f64> {
    let p0 = non_negative("P0", p0_watts)?;
    let k = non_negative("K_T", k_t)?;
    let d = non_negative("d", distance_m)?;
    Ok(p0 * (-k * d).exp())
}

pub fn beam_attenuation(k_a: f64, k_s: f64) -> Result<f64> {
    Ok(non_negative("K_A", k_a)? + non_negative("K_S", k_s)?)
}

/// `K_A = K_A0 + T·a`; rejects models that come out negative.
pub fn absorption_coefficient(model: &AbsorptionModel) -> Result<f64> {
    non_negative("K_A0", model.k_a0)?;
    non_negative("K_S", model.k_s)?;
    let k_a = model.k_a0 + model.temperature_c * model.temp_coeff;
    if k_a.is_nan() || k_a < 0.0 {
        return Err(Error::domain("K_A", k_a, "unphysical negative absorption"));
    }
    Ok(k_a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn received_power_examples() {
        assert_eq!(received_power(0.5, 0.02, 0.0).unwrap(), 0.5);
        assert_eq!(received_power(0.5, 0.0, 100.0).unwrap(), 0.5);
        let v = received_power(0.5, 0.02, 50.0).unwrap();
        assert!((v - 0.18394).abs() < 5e-6, "{v}");
        assert!(received_power(-1.0, 0.1, 1.0).is_err());
        assert!(received_power(1.0, -0.1, 1.0).is_err());
        assert!(received_power(1.0, 0.1, -1.0).is_err());
    }

    #[test]
    fn beam_attenuation_examples() {
        assert_eq!(beam_attenuation(0.0, 0.0).unwrap(), 0.0);
        assert!((beam_attenuation(0.05, 0.02).unwrap() - 0.07).abs() < 1e-15);
        assert!((beam_attenuation(0.25, 0.05).unwrap() - 0.30).abs() < 1e-15);
        assert!(beam_attenuation(-0.1, 0.0).is_err());
    }

    #[test]
    fn absorption_examples() {
        let m = |k_a0, t| AbsorptionModel {
            k_a0,
            temperature_c: t,
            temp_coeff: 0.001,
            k_s: 0.0,
        };
        assert_eq!(absorption_coefficient(&m(0.02, 0.0)).unwrap(), 0.02);
        assert!((absorption_coefficient(&m(0.02, 10.0)).unwrap() - 0.03).abs() < 1e-15);
        assert!(matches!(
            absorption_coefficient(&m(0.01, -20.0)),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn presets() {
        assert_eq!(ChannelPreset::RED.k_per_meter, 0.3);
        assert_eq!(ChannelPreset::GREEN.k_per_meter, 0.07);
        assert_eq!(ChannelPreset::BLUE.k_per_meter, 0.02);
        assert_eq!("Blue".parse::<ChannelPreset>().unwrap(), ChannelPreset::BLUE);
        assert!("violet".parse::<ChannelPreset>().is_err());
        assert_eq!(ChannelPreset::custom(0.0).unwrap().k_per_meter, 0.0);
        assert!(ChannelPreset::custom(-0.1).is_err());
    }

    #[test]
    fn water_bands() {
        assert_eq!(WaterType::PureSeafloor.optimum_band_nm(), (450.0, 500.0));
        assert_eq!(WaterType::ShallowSea.optimum_band_nm(), (520.0, 570.0));
        assert_eq!(WaterType::Dirty.optimum_band_nm(), (520.0, 570.0));
        assert!(WaterType::Dirty.turbidity() > WaterType::ShallowSea.turbidity());
    }

    proptest! {
        #[test]
        fn power_decreases_with_distance(p0 in 1e-6f64..10.0, k in 1e-4f64..2.0, d in 0.0f64..100.0, dd in 1e-3f64..10.0) {
            let near = received_power(p0, k, d).unwrap();
            let far = received_power(p0, k, d + dd).unwrap();
            prop_assert!(far < near);
            prop_assert!(near <= p0);
        }

        #[test]
        fn attenuation_is_multiplicative(a in 0.0f64..1.0, s in 0.0f64..1.0, d in 0.0f64..50.0) {
            let joint = received_power(1.0, beam_attenuation(a, s).unwrap(), d).unwrap();
            let staged = received_power(received_power(1.0, a, d).unwrap(), s, d).unwrap();
            prop_assert!((joint - staged).abs() <= 1e-12 * joint.max(f64::MIN_POSITIVE));
        }
    }
}
