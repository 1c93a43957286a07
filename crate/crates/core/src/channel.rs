//! Channel model used to synthesize drive traces: log-distance path loss
//! with shadow fading, SINR/RSRQ derivation and a Shannon-style capacity map.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::radio::{RSRP_RANGE_DBM as RSRP_RANGE, RSRQ_RANGE_DB as RSRQ_RANGE, SINR_RANGE_DB as SINR_RANGE};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "F: Scalar + serde::de::DeserializeOwned"))]
pub struct PathLoss<F = f64> {
    pub p0_dbm_at_d0: F,
    pub d0_m: F,
    pub exponent: F,
    pub shadow_sigma_db: F,
    /// Decorrelation distance of the shadowing process.
    #[serde(default = "default_decorrelation")]
    pub decorrelation_m: F,
}

fn default_decorrelation<F: Scalar>() -> F {
    F::lit(50.0)
}

impl<F: Scalar> Default for PathLoss<F> {
    fn default() -> Self {
        Self {
            p0_dbm_at_d0: F::lit(-60.0),
            d0_m: F::lit(10.0),
            exponent: F::lit(2.2),
            shadow_sigma_db: F::lit(4.0),
            decorrelation_m: default_decorrelation(),
        }
    }
}

fn clamp_to<F: Scalar>(v: F, range: (f64, f64)) -> F {
    v.max(F::lit(range.0)).min(F::lit(range.1))
}

fn standard_normal<F: Scalar, R: Rng + ?Sized>(rng: &mut R) -> F {
    F::lit(rng.sample::<f64, _>(StandardNormal))
}

impl<F: Scalar> PathLoss<F> {
    /// Median RSRP at `distance_m` (no shadowing, no clamp).
    pub fn mean_rsrp(&self, distance_m: F) -> F {
        let d = distance_m.max(F::one());
        self.p0_dbm_at_d0 - F::lit(10.0) * self.exponent * (d / self.d0_m).log10()
    }

    /// Independent draw: mean path loss plus normal shadowing, clamped to the
    /// reportable RSRP range.
    pub fn rsrp_at<R: Rng + ?Sized>(&self, distance_m: F, rng: &mut R) -> F {
        let shadow = if self.shadow_sigma_db > F::zero() {
            self.shadow_sigma_db * standard_normal::<F, R>(rng)
        } else {
            F::zero()
        };
        clamp_to(self.mean_rsrp(distance_m) + shadow, RSRP_RANGE)
    }
}

/// Spatially correlated shadowing: a first-order autoregressive process in
/// travelled distance with the marginal `N(0, σ²)` of [`PathLoss::rsrp_at`].
#[derive(Debug, Clone)]
pub struct ShadowProcess<F = f64> {
    sigma: F,
    decorrelation_m: F,
    value: Option<F>,
}

impl<F: Scalar> ShadowProcess<F> {
    pub fn new(sigma: F, decorrelation_m: F) -> Self {
        Self { sigma, decorrelation_m, value: None }
    }

    /// Shadow value after moving `moved_m` metres since the previous call.
    pub fn next<R: Rng + ?Sized>(&mut self, moved_m: F, rng: &mut R) -> F {
        let z = standard_normal::<F, R>(rng);
        let v = match self.value {
            None => self.sigma * z,
            Some(prev) => {
                let rho = if self.decorrelation_m > F::zero() {
                    (-moved_m.abs() / self.decorrelation_m).exp()
                } else {
                    F::zero()
                };
                rho * prev + (F::one() - rho * rho).sqrt() * self.sigma * z
            }
        };
        self.value = Some(v);
        v
    }
}

/// Maps RSRP to SINR and RSRQ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadioDerivation<F = f64> {
    pub noise_floor_dbm: F,
    pub interference_db: F,
    pub rsrq_at_zero_sinr_db: F,
    pub rsrq_per_sinr_db: F,
}

impl<F: Scalar> Default for RadioDerivation<F> {
    fn default() -> Self {
        Self {
            noise_floor_dbm: F::lit(-105.0),
            interference_db: F::lit(5.0),
            rsrq_at_zero_sinr_db: F::lit(-15.0),
            rsrq_per_sinr_db: F::lit(0.4),
        }
    }
}

impl<F: Scalar> RadioDerivation<F> {
    pub fn sinr(&self, rsrp_dbm: F) -> F {
        clamp_to(rsrp_dbm - self.noise_floor_dbm - self.interference_db, SINR_RANGE)
    }

    pub fn rsrq(&self, sinr_db: F) -> F {
        // Realistic reports stay within [-20, -3] dB.
        let v = self.rsrq_at_zero_sinr_db + self.rsrq_per_sinr_db * sinr_db;
        clamp_to(v.max(F::lit(-20.0)).min(F::lit(-3.0)), RSRQ_RANGE)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkParams<F = f64> {
    pub bandwidth_mhz: F,
    pub efficiency: F,
    pub max_mbps: F,
}

impl<F: Scalar> Default for LinkParams<F> {
    fn default() -> Self {
        Self { bandwidth_mhz: F::lit(100.0), efficiency: F::lit(0.4), max_mbps: F::lit(200.0) }
    }
}

/// `min(max, η·B·log2(1 + 10^(sinr/10)))`, never negative.
pub fn link_capacity<F: Scalar>(sinr_db: F, link: &LinkParams<F>) -> F {
    let linear = F::lit(10.0).powf(sinr_db / F::lit(10.0));
    let shannon = link.efficiency * link.bandwidth_mhz * (F::one() + linear).log2();
    shannon.min(link.max_mbps).max(F::zero())
}
