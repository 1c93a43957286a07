//! Throughput-rule adaptive bitrate selection.

use serde::{Deserialize, Serialize};

use crate::dash::{Manifest, Representation};
use crate::scalar::Scalar;

/// Index of the highest rung with `bitrate ≤ safety · estimate`, or 0 when
/// none qualifies. `ladder_kbps` must be ascending and non-empty.
pub fn abr_select<F: Scalar>(ladder_kbps: &[u32], throughput_est_mbps: F, safety: F) -> usize {
    assert!(!ladder_kbps.is_empty(), "empty ladder");
    let budget = (safety * throughput_est_mbps * F::lit(1000.0)).to_f64_lossy();
    // Tolerate rounding when the budget lands exactly on a rung.
    let budget = budget + budget.abs() * 1e-12;
    ladder_kbps.iter().rposition(|&r| f64::from(r) <= budget).unwrap_or(0)
}

pub fn select_representation(manifest: &Manifest, throughput_est_mbps: f64, safety: f64) -> &Representation {
    let ladder = manifest.ladder_kbps();
    &manifest.representations()[abr_select(&ladder, throughput_est_mbps, safety)]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ewma<F = f64> {
    pub alpha: F,
    pub value: Option<F>,
}

impl<F: Scalar> Ewma<F> {
    pub fn new(alpha: F) -> Self {
        Self { alpha, value: None }
    }

    pub fn with_initial(alpha: F, initial: F) -> Self {
        Self { alpha, value: Some(initial) }
    }

    pub fn update(&mut self, sample: F) -> F {
        let v = match self.value {
            None => sample,
            Some(prev) => self.alpha * sample + (F::one() - self.alpha) * prev,
        };
        self.value = Some(v);
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const LADDER: [u32; 15] =
        [145, 211, 307, 446, 649, 944, 1373, 1997, 2904, 4224, 6144, 8937, 12999, 18907, 27500];

    #[test]
    fn top_rung_at_forty_mbps() {
        assert_eq!(LADDER[abr_select(&LADDER, 40.0, 0.8)], 27500);
    }

    #[test]
    fn floor_when_starved() {
        assert_eq!(abr_select(&LADDER, 0.1, 0.8), 0);
        assert_eq!(abr_select(&LADDER, 0.0, 0.8), 0);
    }

    #[test]
    fn tie_is_inclusive() {
        assert_eq!(LADDER[abr_select(&LADDER, 1.373, 1.0)], 1373);
        assert_eq!(LADDER[abr_select(&LADDER, 1.373 / 0.8, 0.8)], 1373);
        assert_eq!(LADDER[abr_select(&LADDER, 1.372, 1.0)], 944);
    }

    #[test]
    fn ewma_smooths() {
        let mut e = Ewma::<f64>::new(0.3);
        assert_eq!(e.update(10.0), 10.0);
        assert!((e.update(20.0) - 13.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn selection_is_monotone_and_within_budget(a in 0.0f64..100.0, b in 0.0f64..100.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let (i, j) = (abr_select(&LADDER, lo, 0.8), abr_select(&LADDER, hi, 0.8));
            prop_assert!(i <= j);
            if i > 0 {
                prop_assert!(f64::from(LADDER[i]) <= 0.8 * lo * 1000.0 * (1.0 + 1e-9));
            }
        }
    }
}
