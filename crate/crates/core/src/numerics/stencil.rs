//! Central finite-difference stencils as `(offset, weight)` pairs, in units of the step.

use crate::{Error, Result};

/// Second-order first derivative.
pub const D1_O2: [(f64, f64); 2] = [(-1.0, -0.5), (1.0, 0.5)];
/// Fourth-order first derivative.
pub const D1_O4: [(f64, f64); 4] = [
    (-2.0, 1.0 / 12.0),
    (-1.0, -8.0 / 12.0),
    (1.0, 8.0 / 12.0),
    (2.0, -1.0 / 12.0),
];
/// Fourth-order second derivative.
pub const D2_O4: [(f64, f64); 5] = [
    (-2.0, -1.0 / 12.0),
    (-1.0, 16.0 / 12.0),
    (0.0, -30.0 / 12.0),
    (1.0, 16.0 / 12.0),
    (2.0, -1.0 / 12.0),
];

/// Smallest admissible base step.
pub const MIN_STEP: f64 = 1e-12;

/// Step `base * max(1, |x|)`; errors if `base` underflows.
pub fn scaled_step(base: f64, x: f64) -> Result<f64> {
    if !(base >= MIN_STEP) {
        return Err(Error::StepUnderflow { step: base });
    }
    Ok(base * x.abs().max(1.0))
}

/// Derivative of a scalar function with the given stencil.
pub fn derivative<F>(mut f: F, x: f64, h: f64, stencil: &[(f64, f64)], order: i32) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut acc = 0.0;
    for &(o, w) in stencil {
        acc += w * f(x + o * h)?;
    }
    Ok(acc / h.powi(order))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencils_are_accurate() {
        let f = |x: f64| Ok(x.exp());
        let d1 = derivative(f, 0.3, 1e-3, &D1_O4, 1).unwrap();
        assert!((d1 - 0.3f64.exp()).abs() < 1e-12);
        let d2 = derivative(f, 0.3, 1e-3, &D2_O4, 2).unwrap();
        assert!((d2 - 0.3f64.exp()).abs() < 1e-8);
        let d = derivative(f, 0.3, 1e-5, &D1_O2, 1).unwrap();
        assert!((d - 0.3f64.exp()).abs() < 1e-9);
    }

    #[test]
    fn underflow() {
        assert!(matches!(
            scaled_step(1e-13, 1.0),
            Err(Error::StepUnderflow { .. })
        ));
        assert!((scaled_step(1e-5, 3.0).unwrap() - 3e-5).abs() < 1e-20);
    }
}
