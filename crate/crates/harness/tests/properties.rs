use edgewatch_core::StallEvent;
use edgewatch_harness::analysis::{stall_seconds, stall_total_series};
use edgewatch_harness::Scenario;
use proptest::prelude::*;

fn line(t_end: f64) -> Scenario {
    toml::from_str(&format!(
        r#"
        name = "p"
        seed = 1
        dataset = "x.mpd"
        antenna = {{ lat = 43.3, lon = -1.98 }}
        waypoints = [
            {{ t_s = 0.0, lat = 43.30, lon = -1.98 }},
            {{ t_s = {t_end}, lat = 43.31, lon = -1.97 }},
        ]
        "#
    ))
    .unwrap()
}

fn stalls() -> impl Strategy<Value = Vec<StallEvent>> {
    prop::collection::vec((0.0f64..50.0, 0.0f64..10.0), 0..6).prop_map(|v| {
        let mut t = 0.0;
        v.into_iter()
            .map(|(gap, d)| {
                t += gap;
                let e = StallEvent { t_start: t, duration_s: d, media_position_s: t };
                t += d;
                e
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn position_stays_on_segment(t_end in 1.0f64..1000.0, f in 0.0f64..=1.0) {
        let sc = line(t_end);
        let p = sc.position(f * t_end).unwrap();
        prop_assert!((43.30 - 1e-12..=43.31 + 1e-12).contains(&p.lat));
        prop_assert!((-1.98 - 1e-12..=-1.97 + 1e-12).contains(&p.lon));
        prop_assert!(sc.position(t_end + 1.0).is_err());
    }

    #[test]
    fn stall_total_is_monotone(st in stalls()) {
        let s = stall_total_series(&st, 0.0, 120.0);
        prop_assert!(s.windows(2).all(|w| w[1].1 >= w[0].1));
        let total: f64 = st.iter().map(|e| e.duration_s).sum();
        let weights: f64 = stall_seconds(&st).iter().map(|s| s.1).sum();
        prop_assert!((weights - total).abs() < 1e-9);
    }
}
