//! Mapping between the 0–100 quality rating scale and MOS.
//!
//! `MOS(R) = m0 + (m1 − m0)/100·R + k·R(R − 60)(100 − R)` for `0 < R < 100`,
//! saturating at `m0` and `m1` outside. The inverse solves the cubic on its
//! increasing branch.

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy)]
pub(crate) struct RatingScale<F> {
    pub mos_min: F,
    pub mos_max: F,
    pub k: F,
}

impl<F: Scalar> RatingScale<F> {
    pub fn mos_from_r(&self, r: F) -> F {
        let l = F::lit;
        if r <= F::zero() {
            self.mos_min
        } else if r >= l(100.0) {
            self.mos_max
        } else {
            self.mos_min + (self.mos_max - self.mos_min) / l(100.0) * r + self.k * r * (r - l(60.0)) * (l(100.0) - r)
        }
    }

    /// Polynomial coefficients `[a, b, c]` of `a·R³ + b·R² + c·R + m0`.
    fn cubic(&self) -> (F, F, F) {
        let l = F::lit;
        (-self.k, l(160.0) * self.k, (self.mos_max - self.mos_min) / l(100.0) - l(6000.0) * self.k)
    }

    /// Start of the increasing branch of the polynomial on `[0, 100]`.
    pub fn branch_start(&self) -> F {
        let (a, b, c) = self.cubic();
        // 3a·R² + 2b·R + c = 0, smaller root (a < 0).
        let three = F::lit(3.0);
        let disc = (F::lit(4.0) * b * b - F::lit(12.0) * a * c).sqrt();
        let r1 = (-F::lit(2.0) * b + disc) / (F::lit(2.0) * three * a);
        let r2 = (-F::lit(2.0) * b - disc) / (F::lit(2.0) * three * a);
        r1.min(r2).max(F::zero())
    }

    pub fn r_from_mos(&self, mos: F) -> F {
        let l = F::lit;
        let mos = mos.max(self.mos_min).min(self.mos_max);
        if mos >= self.mos_max {
            return l(100.0);
        }
        let (a, b, c) = self.cubic();
        let d = self.mos_min - mos;
        // Depressed cubic via R = x − b/(3a).
        let shift = b / (l(3.0) * a);
        let p = (l(3.0) * a * c - b * b) / (l(3.0) * a * a);
        let q = (l(2.0) * b * b * b - l(9.0) * a * b * c + l(27.0) * a * a * d) / (l(27.0) * a * a * a);
        let lo = self.branch_start();
        let mut roots = Vec::with_capacity(3);
        if p < F::zero() && l(4.0) * p * p * p + l(27.0) * q * q <= F::zero() {
            let m = l(2.0) * (-p / l(3.0)).sqrt();
            let arg = (l(3.0) * q / (p * m)).max(-F::one()).min(F::one());
            let theta = arg.acos() / l(3.0);
            for k in 0..3 {
                let x = m * (theta - l(2.0) * F::from_usize(k).unwrap() * l(std::f64::consts::PI) / l(3.0)).cos();
                roots.push(x - shift);
            }
        } else {
            let h = (q * q / l(4.0) + p * p * p / l(27.0)).sqrt();
            let x = (-q / l(2.0) + h).cbrt() + (-q / l(2.0) - h).cbrt();
            roots.push(x - shift);
        }
        let tol = l(1e-6);
        roots
            .into_iter()
            .filter(|r| *r >= lo - tol && *r <= l(100.0) + tol)
            .fold(None, |best: Option<F>, r| Some(best.map_or(r, |b| b.max(r))))
            .unwrap_or(lo)
            .max(F::zero())
            .min(l(100.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scale() -> RatingScale<f64> {
        RatingScale { mos_min: 1.05, mos_max: 4.9, k: 7e-6 }
    }

    #[test]
    fn inverse_round_trips_on_increasing_branch() {
        let s = scale();
        let mut m = 1.05;
        while m < 4.9 {
            let r = s.r_from_mos(m);
            assert!(r >= s.branch_start() - 1e-9 && r <= 100.0);
            assert!((s.mos_from_r(r) - m).abs() < 1e-9, "m={m} r={r}");
            m += 0.01;
        }
        assert_eq!(s.r_from_mos(4.9), 100.0);
        assert_eq!(s.r_from_mos(7.0), 100.0);
    }

    #[test]
    fn inverse_is_monotone() {
        let s = scale();
        let mut prev = -1.0;
        for i in 0..=385 {
            let r = s.r_from_mos(1.05 + i as f64 * 0.01);
            assert!(r > prev - 1e-9);
            prev = r;
        }
    }

    #[test]
    fn branch_start_is_derivative_root() {
        // d/dR = −3k R² + 320k R + (0.0385 − 6000k), smaller root ≈ 1.586.
        assert!((scale().branch_start() - 1.586).abs() < 1e-3);
    }

    #[test]
    fn f32_inverse_close() {
        let s = RatingScale::<f32> { mos_min: 1.05, mos_max: 4.9, k: 7e-6 };
        let r = s.r_from_mos(4.0);
        assert!((s.mos_from_r(r) - 4.0).abs() < 1e-3);
    }
}
