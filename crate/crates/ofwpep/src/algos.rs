//! Named schedule presets.

use ofwpep_core::model::{
    preset_anytime, preset_hazan, preset_ofw_new, preset_tabulated, AnytimeBase, HazanVariant,
    ParamSchedule,
};

use crate::error::{AppError, AppResult};

pub const NAMES: &[&str] = &[
    "ofw-new",
    "hazan-thm44",
    "hazan-alg27",
    "anytime-ofw-new",
    "anytime-hazan-alg27",
    "zero",
    "b3-opt",
    "hazan-b3-opt",
];

/// Builds the schedule registered under `name`.
pub fn resolve(
    name: &str,
    horizon: usize,
    lipschitz: f64,
    diameter: f64,
) -> AppResult<ParamSchedule> {
    let s = match name {
        "ofw-new" => preset_ofw_new(horizon, lipschitz, diameter)?,
        "hazan-thm44" => preset_hazan(horizon, lipschitz, diameter, HazanVariant::Thm44)?,
        "hazan-alg27" => preset_hazan(horizon, lipschitz, diameter, HazanVariant::Alg27)?,
        "anytime-ofw-new" => preset_anytime(AnytimeBase::OfwNew, horizon, lipschitz, diameter)?,
        "anytime-hazan-alg27" => {
            preset_anytime(AnytimeBase::HazanAlg27, horizon, lipschitz, diameter)?
        }
        "zero" => ParamSchedule::zeros(horizon)?,
        "b3-opt" | "hazan-b3-opt" => preset_tabulated(horizon, lipschitz, diameter)?,
        other => {
            return Err(AppError::Input(format!(
                "unknown algorithm '{other}' (known: {})",
                NAMES.join(", ")
            )))
        }
    };
    Ok(s)
}
