//! Drive-trace synthesis from a scenario's route and channel model.

use edgewatch_core::channel::{link_capacity, ShadowProcess};
use edgewatch_core::radio::{RSRP_RANGE_DBM, RSRQ_RANGE_DB, SINR_RANGE_DB};
use edgewatch_core::{RadioSample, RadioSource};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::scenario::{Scenario, ScenarioError};

/// One second of the synthesized channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSample {
    pub radio: RadioSample,
    pub distance_m: f64,
    pub capacity_mbps: f64,
}

/// 1 Hz samples over the waypoint span, starting at the first waypoint.
/// All randomness comes from `scenario.seed`.
pub fn synthesize(sc: &Scenario) -> Result<Vec<ChannelSample>, ScenarioError> {
    let mut rng = ChaCha8Rng::seed_from_u64(sc.seed);
    let mut shadow = ShadowProcess::new(sc.pathloss.shadow_sigma_db, sc.pathloss.decorrelation_m);
    let link = sc.link.params();
    let (start, end) = sc.span();
    let n = (end - start).floor() as usize + 1;
    let mut out = Vec::with_capacity(n);
    let mut prev = sc.position(start)?;
    for k in 0..n {
        let t = start + k as f64;
        let pos = sc.position(t)?;
        let moved = prev.distance_m(&pos);
        prev = pos;
        let s = if sc.pathloss.shadow_sigma_db > 0.0 { shadow.next(moved, &mut rng) } else { 0.0 };
        let distance_m = pos.distance_m(&sc.antenna).max(1.0);
        let rsrp = (sc.pathloss.mean_rsrp(distance_m) + s).clamp(RSRP_RANGE_DBM.0, RSRP_RANGE_DBM.1);
        let sinr = sc.radio.sinr(rsrp).clamp(SINR_RANGE_DB.0, SINR_RANGE_DB.1);
        let rsrq = sc.radio.rsrq(sinr).clamp(RSRQ_RANGE_DB.0, RSRQ_RANGE_DB.1);
        out.push(ChannelSample {
            radio: RadioSample {
                t,
                rsrp_dbm: rsrp,
                rsrq_db: rsrq,
                sinr_db: sinr,
                position: Some(pos),
                source: RadioSource::Simulated,
            },
            distance_m,
            capacity_mbps: link_capacity(sinr, &link),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use edgewatch_core::GeoPoint;

    fn straight(sigma: f64) -> Scenario {
        let mut sc: Scenario = toml::from_str(
            r#"
            name = "line"
            seed = 7
            dataset = "x.mpd"
            antenna = { lat = 43.3, lon = -1.98 }
            waypoints = [
                { t_s = 0.0, lat = 43.3, lon = -1.98 },
                { t_s = 100.0, lat = 43.3, lon = -1.97 },
            ]
            "#,
        )
        .unwrap();
        sc.pathloss.shadow_sigma_db = sigma;
        sc
    }

    #[test]
    fn one_sample_per_second_with_positions() {
        let tr = synthesize(&straight(4.0)).unwrap();
        assert_eq!(tr.len(), 101);
        assert!(tr.iter().enumerate().all(|(k, c)| c.radio.t == k as f64));
        assert!(tr.iter().all(|c| c.radio.validate().is_ok()));
        assert_eq!(tr[0].radio.position, Some(GeoPoint::new(43.3, -1.98)));
    }

    #[test]
    fn same_seed_same_trace() {
        assert_eq!(synthesize(&straight(4.0)).unwrap(), synthesize(&straight(4.0)).unwrap());
        let mut other = straight(4.0);
        other.seed = 8;
        assert_ne!(synthesize(&straight(4.0)).unwrap(), synthesize(&other).unwrap());
    }

    #[test]
    fn without_shadowing_rsrp_falls_with_distance() {
        let tr = synthesize(&straight(0.0)).unwrap();
        assert!(tr.windows(2).all(|w| w[1].radio.rsrp_dbm <= w[0].radio.rsrp_dbm));
        assert!(tr.windows(2).all(|w| w[1].capacity_mbps <= w[0].capacity_mbps));
    }
}
