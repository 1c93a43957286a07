//! Series derived from run observations, shared by reports and checks.

use edgewatch_core::coverage::CoverageCell;
use edgewatch_core::{GeoPoint, LinkSample, RadioSample, SegmentRecord, StallEvent};

fn grid(t0: f64, t_end: f64) -> impl Iterator<Item = f64> {
    let n = (t_end - t0 + 1e-9).floor().max(0.0) as usize;
    (0..=n).map(move |k| t0 + k as f64)
}

/// Bitrate the player holds at each whole second: that of the latest
/// segment completed by then, or 0 before any (and after a failed one).
pub fn bitrate_series(records: &[SegmentRecord], t0: f64, t_end: f64) -> Vec<(f64, u32)> {
    let mut done: Vec<(f64, u32)> = records.iter().map(|r| (r.t_complete, r.selected_bitrate_kbps())).collect();
    done.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut i = 0;
    let mut current = 0;
    grid(t0, t_end)
        .map(|t| {
            while i < done.len() && done[i].0 <= t {
                current = done[i].1;
                i += 1;
            }
            (t, current)
        })
        .collect()
}

/// Stall time accumulated by `t`, counting a stall in progress up to `t`.
pub fn stall_total_at(stalls: &[StallEvent], t: f64) -> f64 {
    stalls.iter().map(|e| (t - e.t_start).clamp(0.0, e.duration_s)).sum()
}

pub fn stall_total_series(stalls: &[StallEvent], t0: f64, t_end: f64) -> Vec<(f64, f64)> {
    grid(t0, t_end).map(|t| (t, stall_total_at(stalls, t))).collect()
}

/// Midpoints of the whole seconds spent stalled, weighted by the stalled
/// fraction of each second.
pub fn stall_seconds(stalls: &[StallEvent]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for e in stalls {
        let end = e.t_start + e.duration_s;
        let mut k = e.t_start.floor();
        while k < end {
            let overlap = (end.min(k + 1.0) - e.t_start.max(k)).max(0.0);
            if overlap > 0.0 {
                out.push((k + 0.5, overlap));
            }
            k += 1.0;
        }
    }
    out
}

/// Most recent radio sample at or before `t` (the first one before that).
pub fn radio_at(radio: &[RadioSample], t: f64) -> Option<&RadioSample> {
    let i = radio.partition_point(|s| s.t <= t);
    radio.get(i.saturating_sub(1))
}

/// Time-weighted mean L3 throughput over `[a, b]` from the windows
/// overlapping it.
pub fn mean_l3_over(link: &[LinkSample], a: f64, b: f64) -> Option<f64> {
    let (mut num, mut den) = (0.0, 0.0);
    for s in link {
        let overlap = (b.min(s.t) - a.max(s.window_start())).max(0.0);
        num += overlap * s.rx_throughput_mbps;
        den += overlap;
    }
    (den > 0.0).then(|| num / den)
}

/// `(record, L7 Mbps, mean L3 Mbps over its span)` for successful segments.
pub fn l7_against_l3<'a>(records: &'a [SegmentRecord], link: &[LinkSample]) -> Vec<(&'a SegmentRecord, f64, f64)> {
    records
        .iter()
        .filter_map(|r| {
            let l7 = r.l7_throughput_mbps()?;
            let l3 = mean_l3_over(link, r.t_request, r.t_complete)?;
            Some((r, l7, l3))
        })
        .collect()
}

/// L3 samples with (near) zero traffic falling strictly between two
/// segment downloads.
pub fn idle_l3_between_downloads<'a>(records: &[SegmentRecord], link: &'a [LinkSample], idle_mbps: f64) -> Vec<&'a LinkSample> {
    let first = records.iter().map(|r| r.t_complete).fold(f64::INFINITY, f64::min);
    let last = records.iter().map(|r| r.t_request).fold(f64::NEG_INFINITY, f64::max);
    link.iter().filter(|s| s.rx_throughput_mbps <= idle_mbps && s.window_start() >= first && s.t <= last).collect()
}

/// Cells whose centre lies within one cell size of the farthest centre from `antenna`.
pub fn farthest_cells<'a>(cells: &'a [CoverageCell], antenna: &GeoPoint, cell_size_m: f64) -> Vec<&'a CoverageCell> {
    let far = cells.iter().map(|c| c.center.distance_m(antenna)).fold(0.0, f64::max);
    cells.iter().filter(|c| c.center.distance_m(antenna) >= far - cell_size_m).collect()
}
