//! Closed-form constants and bound evaluators.

pub mod bounds;
pub mod constants;
pub mod moments;
pub mod tv;

pub use bounds::*;
pub use constants::*;
pub use moments::*;
pub use tv::*;

use crate::error::{usage, Result};

/// Contraction constants over the grid `start, start + step, ..., <= stop`.
pub fn contraction_constants_grid(start: f64, stop: f64, step: f64) -> Result<Vec<ContractionConstants>> {
    if !(step > 0.0) || !(start <= stop) {
        return usage(format!("invalid grid {start}:{stop}:{step}"));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    (0..count)
        .map(|i| contraction_constants(start + step * i as f64))
        .collect()
}

/// Grid point with the largest rate.
pub fn optimal_p(grid: &[ContractionConstants]) -> Option<ContractionConstants> {
    grid.iter()
        .copied()
        .max_by(|a, b| a.lambda.total_cmp(&b.lambda))
}
