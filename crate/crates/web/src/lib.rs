//! WebAssembly bindings for the demo page in `www/`.
//!
//! Each exported function is a thin wrapper over a plain Rust function so the
//! numerics can be tested natively.

use qtop::classical::{self, ClassicalPoint, FIXED_POINT_XZ, FIXED_POINT_Y};
use qtop::edge::oo_coherent_state;
use qtop::evolution::{fidelity_series_with, OverlapSeries};
use qtop::kicked_top::{KickedTop, KickedTopSpec};
use qtop::nonextensive::{classify_decay, fit_qexp, FitOptions, TimePower};
use qtop::Spin;
use wasm_bindgen::prelude::*;

/// Largest spin the page accepts; the oo block then has 100 states.
pub const MAX_SPIN: u32 = 200;

pub fn portrait_points(x: f64, y: f64, z: f64, alpha: f64, n: usize) -> Result<Vec<f64>, String> {
    let p0 = ClassicalPoint::normalized(x, y, z).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(2 * (n + 1));
    for p in classical::orbit(&p0, alpha, n) {
        let (px, pz) = classical::project(&p);
        out.push(px);
        out.push(pz);
    }
    Ok(out)
}

pub fn overlap_values(j: u32, alpha: f64, delta: f64, offset: f64, steps: usize) -> Result<Vec<f64>, String> {
    if j > MAX_SPIN {
        return Err(format!("J = {j} is too large for the browser demo (max {MAX_SPIN})"));
    }
    let run = || -> qtop::Result<Vec<f64>> {
        let spin = Spin::new(j)?;
        let top = KickedTop::new(spin)?;
        let spec = KickedTopSpec::new(spin, alpha, delta)?;
        let p = ClassicalPoint::at_height(FIXED_POINT_Y, FIXED_POINT_XZ - offset)?;
        let state = oo_coherent_state(&top, &p)?;
        Ok(fidelity_series_with(&top, &spec, &state, steps)?.values)
    };
    run().map_err(|e| e.to_string())
}

/// `[q_rel, tau, linearity]` of the fit on steps `lo..=hi`.
pub fn qexp_fit(values: &[f64], lo: usize, hi: usize) -> Result<Vec<f64>, String> {
    let series = OverlapSeries::from_values((0..values.len()).collect(), values.to_vec()).map_err(|e| e.to_string())?;
    let fit = fit_qexp(&series, (lo, hi), TimePower::Two, &FitOptions::default()).map_err(|e| e.to_string())?;
    Ok(vec![fit.q_rel, fit.tau, fit.linearity])
}

pub fn decay_class(values: &[f64]) -> Result<String, String> {
    let series = OverlapSeries::from_values((0..values.len()).collect(), values.to_vec()).map_err(|e| e.to_string())?;
    let c = classify_decay(&series, &Default::default()).map_err(|e| e.to_string())?;
    Ok(c.class.name().to_string())
}

/// Projected classical orbit as interleaved `x, z` pairs.
#[wasm_bindgen]
pub fn portrait(x: f64, y: f64, z: f64, alpha: f64, n: usize) -> Result<Vec<f64>, JsError> {
    portrait_points(x, y, z, alpha, n).map_err(|e| JsError::new(&e))
}

/// Overlap series for a coherent state at `z_f - offset` on the line `y = y_f`.
#[wasm_bindgen]
pub fn overlap(j: u32, alpha: f64, delta: f64, offset: f64, steps: usize) -> Result<Vec<f64>, JsError> {
    overlap_values(j, alpha, delta, offset, steps).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn fit(values: Vec<f64>, lo: usize, hi: usize) -> Result<Vec<f64>, JsError> {
    qexp_fit(&values, lo, hi).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn classify(values: Vec<f64>) -> Result<String, JsError> {
    decay_class(&values).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn fixed_point() -> Vec<f64> {
    let p = ClassicalPoint::fixed_point(1.0);
    vec![p.x, p.y, p.z]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn portrait_stays_in_projected_disc() {
        let pts = portrait_points(0.6, 0.48, 0.64, 3.0, 500).unwrap();
        assert_eq!(pts.len(), 1002);
        assert!(pts.chunks(2).all(|c| c[0].hypot(c[1]) <= 2.0 + 1e-12));
    }

    #[test]
    fn overlap_starts_at_one_and_stays_bounded() {
        let v = overlap_values(40, 3.0, 0.01, 0.1, 100).unwrap();
        assert_eq!(v.len(), 101);
        assert!((v[0] - 1.0).abs() < 1e-12);
        assert!(v.iter().all(|o| (0.0..=1.0 + 1e-12).contains(o)));
        assert!(overlap_values(MAX_SPIN + 2, 3.0, 0.01, 0.1, 10).is_err());
    }

    #[test]
    fn fit_and_classify_synthetic_decay() {
        let values: Vec<f64> = (0..400).map(|t| qtop::nonextensive::e_q(-(t as f64 / 60.0).powi(2), 3.0)).collect();
        let f = qexp_fit(&values, 1, 399).unwrap();
        assert!((f[0] - 3.0).abs() < 1e-3 && (f[1] - 60.0).abs() < 0.05, "{f:?}");
        let flat = vec![1.0; 100];
        assert_eq!(decay_class(&flat).unwrap(), "regular");
    }
}
