use super::model::RbfDeepOnet;
use crate::error::{Error, Result};
use crate::forward::FarFieldMatrix;
use crate::noisenet::NoiseNet;
use crate::regsolve::{IndicatorField, RegField, SamplingGrid};

/// Lower bound on the learned field, relative to the estimated noise level.
pub const ALPHA_FLOOR: f64 = 1e-8;

/// `alpha(z) = delta * I(z)`, floored at `ALPHA_FLOOR * delta` so the field
/// stays strictly positive away from the obstacle.
pub fn regularizer_from_parts(delta: f64, indicator: &IndicatorField) -> Result<RegField> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::Domain(format!("noise estimate {delta}")));
    }
    let floor = ALPHA_FLOOR * delta;
    let alpha = indicator.values.iter().map(|&v| (delta * v).max(floor)).collect();
    RegField::new(indicator.grid.clone(), alpha)
}

/// Learned regularization field from the noise estimate and the DeepONet
/// indicator of the same measurement.
pub fn learned_regularizer(
    model: &RbfDeepOnet,
    noise: &NoiseNet,
    f: &FarFieldMatrix,
    grid: &SamplingGrid,
) -> Result<RegField> {
    let delta = noise.predict_delta(f)?;
    regularizer_from_parts(delta, &model.indicator_eval(f, grid)?)
}
