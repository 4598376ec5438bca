use crate::error::{Error, Result};

/// Coefficient of determination of `predicted` as a model of `observed`,
/// `1 − SS_res / SS_tot`. Negative when the prediction is worse than the
/// observed mean.
pub fn r2_score(predicted: &[f64], observed: &[f64]) -> Result<f64> {
    if predicted.len() != observed.len() {
        return Err(Error::InsufficientData(format!(
            "{} predictions for {} observations",
            predicted.len(),
            observed.len()
        )));
    }
    if observed.len() < 2 {
        return Err(Error::InsufficientData("R² needs at least two points".into()));
    }
    if predicted.iter().chain(observed).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("score input"));
    }
    let mean = observed.iter().sum::<f64>() / observed.len() as f64;
    let ss_tot: f64 = observed.iter().map(|y| (y - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(Error::UndefinedScore("observed values are all equal"));
    }
    let ss_res: f64 = predicted.iter().zip(observed).map(|(p, y)| (y - p).powi(2)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        let y = [1.0, 2.0, 4.0, 3.0];
        assert_eq!(r2_score(&y, &y).unwrap(), 1.0);
        assert!(r2_score(&[2.5; 4], &y).unwrap().abs() < 1e-15);
        assert!(r2_score(&[4.0, 3.0, 1.0, 2.0], &y).unwrap() < 0.0);
    }

    #[test]
    fn errors() {
        assert!(matches!(r2_score(&[1.0], &[1.0]), Err(Error::InsufficientData(_))));
        assert!(matches!(r2_score(&[1.0, 2.0], &[1.0]), Err(Error::InsufficientData(_))));
        assert!(matches!(r2_score(&[1.0, 2.0], &[3.0, 3.0]), Err(Error::UndefinedScore(_))));
        assert!(matches!(r2_score(&[1.0, f64::NAN], &[1.0, 2.0]), Err(Error::NonFinite(_))));
    }

    fn non_constant() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-1e3f64..1e3, 2..40)
            .prop_filter("non-constant", |v| v.iter().any(|x| (x - v[0]).abs() > 1e-3))
    }

    proptest! {
        #[test]
        fn perfect_prediction(y in non_constant()) {
            prop_assert_eq!(r2_score(&y, &y).unwrap(), 1.0);
        }

        #[test]
        fn affine_invariance(
            y in non_constant(),
            noise in prop::collection::vec(-10.0f64..10.0, 40),
            scale in prop_oneof![1e-12f64..1e-6, 0.1f64..100.0],
            shift in -1e3f64..1e3,
        ) {
            let p: Vec<f64> = y.iter().zip(&noise).map(|(a, b)| a + b).collect();
            let base = r2_score(&p, &y).unwrap();
            let tp: Vec<f64> = p.iter().map(|v| v * scale + shift * scale).collect();
            let ty: Vec<f64> = y.iter().map(|v| v * scale + shift * scale).collect();
            let moved = r2_score(&tp, &ty).unwrap();
            prop_assert!((base - moved).abs() <= 1e-6 * (1.0 + base.abs()), "{} vs {}", base, moved);
        }
    }
}
