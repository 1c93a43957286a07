//! Small statistics helpers shared by the store and the coverage mapper.

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StatsError {
    #[error("need at least {needed} paired points, have {have}")]
    Insufficient { needed: usize, have: usize },
    #[error("a series has zero variance")]
    Degenerate,
}

/// Pearson correlation of paired samples.
pub fn pearson<F: Scalar>(xs: &[F], ys: &[F]) -> Result<F, StatsError> {
    let n = xs.len().min(ys.len());
    if n < 3 {
        return Err(StatsError::Insufficient { needed: 3, have: n });
    }
    let nf = F::from_usize(n).unwrap();
    let mx = xs[..n].iter().fold(F::zero(), |a, &b| a + b) / nf;
    let my = ys[..n].iter().fold(F::zero(), |a, &b| a + b) / nf;
    let (mut sxy, mut sxx, mut syy) = (F::zero(), F::zero(), F::zero());
    for (&x, &y) in xs[..n].iter().zip(&ys[..n]) {
        let (dx, dy) = (x - mx, y - my);
        sxy = sxy + dx * dy;
        sxx = sxx + dx * dx;
        syy = syy + dy * dy;
    }
    if sxx <= F::zero() || syy <= F::zero() {
        return Err(StatsError::Degenerate);
    }
    let r = sxy / (sxx.sqrt() * syy.sqrt());
    Ok(r.max(-F::one()).min(F::one()))
}

/// Median of a non-empty slice (mean of the middle pair for even lengths).
pub fn median<F: Scalar>(values: &[F]) -> Option<F> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("median of NaN"));
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / F::lit(2.0) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn self_and_negation() {
        let x = [1.0f64, 3.0, 2.0, 7.0, 5.0];
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson(&x, &x).unwrap() - 1.0).abs() < 1e-12);
        assert!((pearson(&x, &neg).unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(pearson(&x, &[2.0; 5]), Err(StatsError::Degenerate));
        assert_eq!(pearson(&x[..2], &x[..2]), Err(StatsError::Insufficient { needed: 3, have: 2 }));
    }

    #[test]
    fn f32_works_too() {
        let x = [1.0f32, 2.0, 3.0, 4.0];
        let y = [2.0f32, 4.1, 5.9, 8.0];
        assert!(pearson(&x, &y).unwrap() > 0.99);
        assert_eq!(median(&[3.0f32, 1.0, 2.0]), Some(2.0));
    }

    #[test]
    fn medians() {
        assert_eq!(median::<f64>(&[]), None);
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), Some(2.5));
    }

    proptest! {
        #[test]
        fn pearson_bounded(pts in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 3..50)) {
            let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
            if let Ok(r) = pearson(&x, &y) {
                prop_assert!((-1.0..=1.0).contains(&r));
            }
        }
    }
}
