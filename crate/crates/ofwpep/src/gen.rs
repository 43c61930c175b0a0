//! Seeded gradient sequences.

use ofwpep_core::simulate::GradientSequence;
use rand::rngs::StdRng;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{AppError, AppResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GradientDistribution {
    UniformOnSphere,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientSpec {
    pub seed: u64,
    pub d: usize,
    #[serde(rename = "T")]
    pub horizon: usize,
    #[serde(rename = "L")]
    pub radius: f64,
    pub distribution: GradientDistribution,
}

/// Draws the gradients; identical specs give identical sequences.
pub fn generate(spec: &GradientSpec) -> AppResult<GradientSequence> {
    if spec.d == 0 || !(spec.radius.is_finite() && spec.radius >= 0.0) {
        return Err(AppError::Input(
            "gradient spec needs d ≥ 1 and L ≥ 0".into(),
        ));
    }
    let mut rng = StdRng::seed_from_u64(spec.seed);
    let grads = (0..spec.horizon)
        .map(|_| loop {
            let v: Vec<f64> = (0..spec.d)
                .map(|_| StandardNormal.sample(&mut rng))
                .collect();
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n > 1e-300 {
                break v.iter().map(|x| spec.radius * x / n).collect();
            }
        })
        .collect();
    Ok(GradientSequence(grads))
}
