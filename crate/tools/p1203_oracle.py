#!/usr/bin/env python3
"""Reference computation for the QoE golden corpus.

Implements the mode-0 video pipeline (coding quality, upscaling and frame
rate degradations on the rating scale), temporal pooling and the stalling
impairment with numpy/scipy, independently of the Rust engine. The rating
scale inverse is found numerically with Brent's method rather than in
closed form.

Usage: python3 tools/p1203_oracle.py [--out golden/qoe]
"""

import argparse
import json
import math
import pathlib

import numpy as np
from scipy.optimize import brentq

ROOT = pathlib.Path(__file__).resolve().parent.parent
COEFF_FILE = ROOT / "crates" / "core" / "coefficients" / "p1203.json"

# Standard mode-0 constants, written out here and compared against the
# coefficient file so drift in either is caught.
MOS_MIN, MOS_MAX, R_CUBIC = 1.05, 4.9, 7e-6
A1, A2, A3, A4 = 11.9983519, -2.99991847, 41.2475074375, 0.13183165769
Q1, Q2, Q3 = 4.66, -0.07, 4.06
U1, U2 = 72.61, 0.32
T1, T2, T3, FR_THRESHOLD = 30.98, 1.29, 64.65, 24.0
HTV = (-0.60293, 2.12382, -0.36936, 0.03409)
TEMPORAL = (0.00666620027943848, 0.0000404018840273729, 0.156497800436237, 0.143179744942738, 0.0238641564518876)
S1, S2, S3 = 9.35158684, 0.91890815, 11.0567558


def check_coefficient_file():
    c = json.loads(COEFF_FILE.read_text())
    v = c["video_mode0"]
    pairs = [
        (c["mos_min"], MOS_MIN), (c["mos_max"], MOS_MAX), (c["r_cubic"], R_CUBIC),
        (v["a1"], A1), (v["a2"], A2), (v["a3"], A3), (v["a4"], A4),
        (v["q1"], Q1), (v["q2"], Q2), (v["q3"], Q3),
        (c["upscaling"]["u1"], U1), (c["upscaling"]["u2"], U2),
        (c["framerate"]["t1"], T1), (c["framerate"]["t2"], T2), (c["framerate"]["t3"], T3),
        (c["framerate"]["threshold_fps"], FR_THRESHOLD),
        (c["stalling"]["s1"], S1), (c["stalling"]["s2"], S2), (c["stalling"]["s3"], S3),
    ]
    pairs += list(zip(c["handheld"], HTV))
    t = c["temporal"]
    pairs += list(zip([t["t1"], t["t2"], t["t3"], t["t4"], t["t5"]], TEMPORAL))
    for got, want in pairs:
        assert got == want, f"coefficient file drifted: {got} != {want}"
    return c["version"]


def mos_from_r(r):
    if r <= 0:
        return MOS_MIN
    if r >= 100:
        return MOS_MAX
    return MOS_MIN + (MOS_MAX - MOS_MIN) / 100 * r + R_CUBIC * r * (r - 60) * (100 - r)


def r_from_mos(mos):
    mos = min(max(mos, MOS_MIN), MOS_MAX)
    if mos >= MOS_MAX:
        return 100.0
    # The polynomial dips just above zero before rising; search the rising part.
    grid = np.linspace(0, 100, 10001)
    vals = np.array([mos_from_r(x) for x in grid])
    lo = float(grid[int(np.argmin(vals))])
    if mos <= mos_from_r(lo):
        return lo
    return brentq(lambda x: mos_from_r(x) - mos, lo, 100.0, xtol=1e-13, rtol=1e-15)


def clip(x, lo, hi):
    return min(max(x, lo), hi)


def video_quality(bitrate_kbps, width, height, fps, display=(3840, 2160), device="pc"):
    coded = width * height
    quant = A1 + A2 * math.log(A3 + math.log(bitrate_kbps) + math.log(bitrate_kbps ** 2 / (coded * fps) + A4))
    mos_cod = clip(Q1 + Q2 * math.exp(Q3 * quant), 1, 5)
    d_cod = clip(100 - r_from_mos(mos_cod), 0, 100)
    scale = max(display[0] * display[1] / coded, 1)
    d_scal = clip(U1 * math.log10(U2 * (scale - 1) + 1), 0, 100)
    d_fr = 0.0
    if fps < FR_THRESHOLD:
        d_fr = clip((100 - d_cod - d_scal) * (T1 - T2 * fps) / (T3 + fps), 0, 100)
    q = mos_from_r(100 - clip(d_cod + d_scal + d_fr, 0, 100))
    if device == "mobile":
        q = clip(HTV[0] + HTV[1] * q + HTV[2] * q ** 2 + HTV[3] * q ** 3, 1, 5)
    return q


def stall_factor(events, length):
    if not events:
        return 1.0
    n = len(events)
    total = sum(e["duration_s"] for e in events)
    pos = sorted(e["media_position_s"] for e in events)
    avg = (pos[-1] - pos[0]) / (n - 1) if n > 1 else 0.0
    return math.exp(-n / S1) * math.exp(-(total / length) / S2) * math.exp(-(avg / length) / S3)


def pooled(segments, horizon):
    used = [s for s in segments if s["media_start_s"] + s["duration_s"] <= horizon + 1e-9]
    if not used:
        return None
    end = max(s["media_start_s"] + s["duration_s"] for s in used)
    centers = np.arange(math.ceil(end - 1e-9)) + 0.5
    per_second = []
    for c in centers:
        for s in used:
            if s["media_start_s"] <= c < s["media_start_s"] + s["duration_s"]:
                per_second.append(s["score"])
                break
    q = np.array(per_second)
    u = np.arange(1, len(q) + 1) / len(q)
    w = (TEMPORAL[0] + TEMPORAL[1] * np.exp(u / TEMPORAL[2])) * (TEMPORAL[3] - TEMPORAL[4] * q)
    return clip(float(np.sum(w * q) / np.sum(w)), 1, 5), float(np.mean(q)), sum(s["duration_s"] for s in used)


def session_mos(segments, events, horizon):
    p = pooled(segments, horizon)
    if p is None:
        return None
    o35, mean_q, length = p
    inside = [e for e in events if e["media_position_s"] <= horizon + 1e-9]
    mos = clip(1 + (o35 - 1) * stall_factor(inside, length), 1, 5)
    return {
        "mos": mos,
        "video_quality_mean": clip(mean_q, 1, 5),
        "stall_count": len(inside),
        "stall_total_s": sum(e["duration_s"] for e in inside),
    }


LADDER = [
    (145, 320, 180), (211, 384, 216), (307, 480, 270), (446, 640, 360), (649, 768, 432),
    (944, 960, 540), (1373, 1280, 720), (1997, 1600, 900), (2904, 1920, 1080), (4224, 2560, 1440),
    (6144, 3200, 1800), (8937, 3840, 2160), (12999, 5120, 2880), (18907, 6400, 3600), (27500, 7680, 4320),
]


def segment_inputs(rungs, fps=30.0, seg=4.0, last=None):
    out = []
    for i, k in enumerate(rungs):
        br, w, h = LADDER[k]
        d = last if (last is not None and i == len(rungs) - 1) else seg
        out.append({"media_start_s": i * seg, "duration_s": d, "bitrate_kbps": br, "width": w, "height": h, "framerate": fps})
    return out


def scored(segs, display, device):
    return [dict(s, score=video_quality(s["bitrate_kbps"], s["width"], s["height"], s["framerate"], display, device)) for s in segs]


def stall(t, d, pos):
    return {"t_start": t, "duration_s": d, "media_position_s": pos}


def video_cases():
    picks = [
        (27500, 7680, 4320, 30), (145, 320, 180, 30), (944, 960, 540, 30), (2904, 1920, 1080, 30),
        (8937, 3840, 2160, 30), (4224, 2560, 1440, 30), (649, 768, 432, 30), (18907, 6400, 3600, 30),
        (500, 1920, 1080, 30), (20000, 1280, 720, 30), (3000, 1920, 1080, 60), (3000, 1920, 1080, 15),
        (1200, 1280, 720, 12), (300, 640, 360, 25), (6000, 3840, 2160, 24), (100, 320, 180, 10),
        (50000, 3840, 2160, 30), (1500, 1920, 1080, 30), (800, 854, 480, 30), (12000, 3840, 2160, 50),
    ]
    cases = []
    for br, w, h, fps in picks:
        cases.append({"bitrate_kbps": br, "width": w, "height": h, "framerate": float(fps),
                      "display": [3840, 2160], "device": "pc",
                      "expected": video_quality(br, w, h, fps)})
    for br, w, h, fps in picks[:4]:
        cases.append({"bitrate_kbps": br, "width": w, "height": h, "framerate": float(fps),
                      "display": [1920, 1080], "device": "mobile",
                      "expected": video_quality(br, w, h, fps, (1920, 1080), "mobile")})
    return cases


def stall_cases():
    patterns = [
        ([], 322.0),
        ([stall(20.0, 2.0, 16.0)], 322.0),
        ([stall(20.0, 10.0, 16.0)], 322.0),
        ([stall(20.0, 2.0, 16.0), stall(120.0, 2.0, 114.0)], 322.0),
        ([stall(20.0, 2.0, 16.0), stall(120.0, 2.0, 114.0), stall(250.0, 3.0, 242.0)], 322.0),
        ([stall(0.0, 1.5, 0.0)], 60.0),
        ([stall(30.0, 20.0, 28.0)], 60.0),
        ([stall(10.0 + 12.0 * k, 1.0, 8.0 + 11.0 * k) for k in range(6)], 120.0),
        ([stall(100.0, 0.5, 96.0), stall(101.0, 0.5, 96.0)], 322.0),
        ([stall(200.0, 30.0, 180.0)], 322.0),
    ]
    return [{"events": ev, "playback_duration_s": t, "expected": 1.0 - stall_factor(ev, t)} for ev, t in patterns]


def session_cases():
    rng = np.random.default_rng(1203)
    cases = []

    def add(name, rungs, events, horizon, display=(3840, 2160), device="pc", fps=30.0, last=None):
        segs = segment_inputs(rungs, fps=fps, last=last)
        expected = session_mos(scored(segs, display, device), events, horizon)
        cases.append({"name": name, "display": list(display), "device": device, "segments": segs,
                      "stalls": events, "horizon_s": horizon, "expected": expected})

    full = [14] * 80 + [14]
    add("top_rung_no_stalls", full, [], 322.0, last=2.0)
    add("top_rung_ten_seconds_stalled", full, [stall(100.0, 10.0, 96.0)], 322.0, last=2.0)
    add("floor_rung_no_stalls", [0] * 81, [], 322.0, last=2.0)
    add("middle_rung", [8] * 81, [], 322.0, last=2.0)
    add("ramp_up", [min(k // 4, 14) for k in range(81)], [], 322.0, last=2.0)
    add("ramp_down", [max(14 - k // 5, 0) for k in range(81)], [], 322.0, last=2.0)
    add("drop_late", [14] * 60 + [2] * 21, [stall(260.0, 4.0, 240.0)], 322.0, last=2.0)
    add("drop_early", [2] * 20 + [14] * 61, [stall(10.0, 3.0, 8.0)], 322.0, last=2.0)
    add("far_path_like",
        [14] * 20 + [11, 9, 7, 5, 3, 1, 0, 0, 0, 0] + [0] * 15 + [2, 4, 6, 8, 10, 12, 14] + [14] * 29,
        [stall(130.0, 6.0, 116.0), stall(170.0, 4.0, 150.0)], 324.0)
    add("many_short_stalls", [10] * 40, [stall(10.0 + 15.0 * k, 1.0, 8.0 + 14.0 * k) for k in range(8)], 160.0)
    add("one_long_stall", [12] * 40, [stall(60.0, 25.0, 56.0)], 160.0)
    add("short_clip", [14, 14, 14], [], 12.0)
    add("single_segment", [7], [], 4.0)
    add("horizon_cuts_tail", [9] * 30, [], 61.0)
    add("low_framerate", [9] * 30, [], 120.0, fps=15.0)
    add("mobile_device", [6] * 30, [stall(40.0, 2.0, 36.0)], 120.0, display=(1920, 1080), device="mobile")
    add("hd_display", [10] * 30, [], 120.0, display=(1920, 1080))
    for k in range(6):
        n = int(rng.integers(10, 80))
        rungs = [int(x) for x in np.clip(np.cumsum(rng.integers(-2, 3, size=n)) + int(rng.integers(0, 15)), 0, 14)]
        count = int(rng.integers(0, 4))
        positions = sorted(float(4 * int(p)) for p in rng.choice(np.arange(1, n), size=min(count, n - 1), replace=False))
        events, t = [], 0.0
        for p in positions:
            d = float(np.round(rng.uniform(0.5, 8.0), 3))
            t = max(t, p + 4.0)
            events.append(stall(t, d, p))
            t += d + 1.0
        add(f"random_{k}", rungs, events, 4.0 * n)
    return cases


def series_cases():
    out = []
    for name, rung, events in [("flat_top", 14, []), ("flat_middle", 8, []), ("stall_at_100", 11, [stall(100.0, 5.0, 92.0)])]:
        segs = scored(segment_inputs([rung] * 60), (3840, 2160), "pc")
        for i, s in enumerate(segs):
            s["t_complete"] = 2.0 + 3.0 * i
        step = 5.0
        end = max([s["t_complete"] for s in segs] + [e["t_start"] + e["duration_s"] for e in events])
        grid = [step * k for k in range(1, int(end // step) + 1) if step * k < end - 1e-9] + [end]
        points = []
        for t in grid:
            done = [s for s in segs if s["t_complete"] <= t + 1e-9]
            if not done:
                continue
            horizon = max(s["media_start_s"] + s["duration_s"] for s in done)
            started = [e for e in events if e["t_start"] <= t + 1e-9]
            r = session_mos(done, started, horizon)
            if r is None:
                continue
            points.append({"t": t, "mos": r["mos"], "stall_total_s": sum(e["duration_s"] for e in started)})
        for s in segs:
            del s["score"]
        out.append({"name": name, "segments": segs, "stalls": events, "step_s": step, "session_start": 0.0,
                    "display": [3840, 2160], "device": "pc", "expected": points})
    return out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(ROOT / "golden" / "qoe"))
    args = ap.parse_args()
    version = check_coefficient_file()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    files = {
        "video_quality.json": video_cases(),
        "stall_degradation.json": stall_cases(),
        "sessions.json": session_cases(),
        "series.json": series_cases(),
    }
    for name, cases in files.items():
        doc = {"coefficients": version, "generator": "tools/p1203_oracle.py", "cases": cases}
        (out / name).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
        print(f"{name}: {len(cases)} cases")


if __name__ == "__main__":
    main()
