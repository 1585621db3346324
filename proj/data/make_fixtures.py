"""Regenerates the bundled scenario fixtures.

The day profiles only mimic the shape of a residential feeder: two price
peaks (late morning, evening), a midday solar bump and a flatter wind unit.
"""
import json
import math
import pathlib

import numpy as np

HERE = pathlib.Path(__file__).resolve().parent
FORMAT = "coopgrid-scenario/1"


def r6(v):
    return [round(float(x), 6) for x in v]


def bump(t, center, width):
    return math.exp(-((t - center) / width) ** 2)


def shapes(widths_by_t, corr):
    """Per-period Q = (W C W)^-1 so the r = 1 ellipsoid sits inside the box."""
    out = []
    for w in widths_by_t:
        w = np.asarray(w)
        q = np.linalg.inv(np.outer(w, w) * corr)
        q = (q + q.T) / 2
        out.append([[float(f"{x:.12g}") for x in row] for row in q])
    return out


def desk1():
    return {
        "format": FORMAT,
        "name": "desk1",
        "seed": 1,
        "time": {"periods": 1},
        "prosumers": [{
            "id": "home",
            "pd_min": 1.0, "pd_max": 1.0, "lambda": 10.0, "beta": 0.0,
            "pi_d_up": 0.0, "pi_d_dw": 0.0,
            "drgs": [{"pw0": 0.4, "dpw_max": 0.1}],
        }],
        "tariff": {"pi_buy": 5.0, "pi_sell": 1.0, "pi_m_up": 1.0, "pi_m_dw": 1.0},
        "uncertainty": {"kind": "ellipsoid", "shapes": [[[100.0]]], "centers": [[0.0]]},
        "contributions": {"k_h": 1.0, "terms": []},
    }


def desk3():
    T = 24
    hours = range(T)
    peak = [bump(t, 11, 2.0) + 1.2 * bump(t, 19, 2.0) for t in hours]
    buy = [0.55 + 0.45 * p for p in peak]
    sell = [0.35 * b for b in buy]
    op = [0.8 * b for b in buy]
    solar = [max(0.0, math.sin(math.pi * (t - 6) / 13)) if 6 <= t <= 19 else 0.0 for t in hours]
    load = [0.75 + 0.25 * bump(t, 12, 3.0) + 0.4 * bump(t, 19, 2.5) for t in hours]

    pv0 = [140 * s for s in solar]
    wind = [55 + 15 * math.sin(2 * math.pi * t / 24) for t in hours]
    pv2 = [45 * s for s in solar]
    units = [pv0, wind, pv2]
    widths = [[max(0.3 * u[t], 2.0) for u in units] for t in hours]

    def prosumer(pid, scale, lam, mt, drg):
        p = {
            "id": pid,
            "pd_min": r6(0.85 * scale * l for l in load),
            "pd_max": r6(1.05 * scale * l for l in load),
            "lambda": r6(lam * (0.9 + 0.2 * l) for l in load),
            "beta": 0.002,
            "pi_d_up": 0.12, "pi_d_dw": 0.12,
            "machines": [],
            "drgs": [{"pw0": r6(drg[0]), "dpw_max": r6(drg[1])}],
        }
        if mt:
            p["machines"].append({"pg_max": mt, "a": 0.0015, "b": 0.42, "c": 3.0,
                                  "pi_g_up": 0.1, "pi_g_dw": 0.1})
        return p

    corr = np.array([[1.0, 0.2, 0.6], [0.2, 1.0, 0.2], [0.6, 0.2, 1.0]])
    return {
        "format": FORMAT,
        "name": "desk3",
        "seed": 3,
        "time": {"periods": T},
        "prosumers": [
            prosumer("solar-mt", 70, 1.1, 25, (pv0, [w[0] for w in widths])),
            prosumer("wind-mt", 90, 1.0, 20, (wind, [w[1] for w in widths])),
            prosumer("solar-only", 110, 1.2, None, (pv2, [w[2] for w in widths])),
        ],
        "tariff": {"pi_buy": r6(buy), "pi_sell": r6(sell), "pi_m_up": r6(op), "pi_m_dw": r6(op)},
        "uncertainty": {"kind": "ellipsoid", "scope": "per-period",
                        "centers": [[0.0] * 3 for _ in hours], "shapes": shapes(widths, corr)},
        "contributions": {"k_h": 1.0, "terms": [
            {"members": [0], "k": 0.25}, {"members": [1], "k": 0.25},
            {"members": [2], "k": 0.2}]},
        "config": {"sweep_multipliers": [0.5, 1.0, 1.5, 2.0]},
    }


def desk16():
    T = 4
    N = 16
    rng = np.random.default_rng(16)
    profile = [0.8, 1.2, 1.0, 0.7]
    buy = [0.6, 0.9, 1.0, 0.7]
    prosumers = []
    base_w = []
    for i in range(N):
        scale = float(rng.uniform(20, 60))
        w = float(rng.uniform(2.0, 6.0))
        base_w.append(w)
        p = {
            "id": f"p{i:02d}",
            "pd_min": r6(0.5 * scale * f for f in profile),
            "pd_max": r6(1.1 * scale * f for f in profile),
            "lambda": r6(rng.uniform(1.0, 1.3, T)),
            "beta": 0.003,
            "pi_d_up": 0.12, "pi_d_dw": 0.12,
            "machines": [],
            "drgs": [{"pw0": r6(rng.uniform(0.2, 0.8) * scale * np.array(profile)),
                      "dpw_max": r6(w * np.array(profile))}],
        }
        if i % 3 != 2:
            p["machines"].append({"pg_max": round(float(rng.uniform(10, 30)), 6),
                                  "a": 0.002, "b": round(float(rng.uniform(0.35, 0.5)), 6),
                                  "c": 1.0, "pi_g_up": 0.1, "pi_g_dw": 0.1})
        prosumers.append(p)
    a = rng.uniform(-0.25, 0.25, (N, N)) + np.eye(N)
    cov = a @ a.T
    sd = np.sqrt(np.diag(cov))
    corr = cov / np.outer(sd, sd)
    widths = [[w * f for w in base_w] for f in profile]
    return {
        "format": FORMAT,
        "name": "desk16",
        "seed": 16,
        "time": {"periods": T},
        "prosumers": prosumers,
        "tariff": {"pi_buy": buy, "pi_sell": r6(0.35 * b for b in buy),
                   "pi_m_up": r6(0.8 * b for b in buy), "pi_m_dw": r6(0.8 * b for b in buy)},
        "uncertainty": {"kind": "ellipsoid", "scope": "per-period",
                        "centers": [[0.0] * N for _ in range(T)], "shapes": shapes(widths, corr)},
        "contributions": {"k_h": 1.0, "terms": [
            {"members": [i], "k": round(0.6 / N, 6)} for i in range(N)]},
    }


def main():
    for name, build in (("desk1", desk1), ("desk3", desk3), ("desk16", desk16)):
        path = HERE / f"{name}.scn"
        path.write_text(json.dumps(build(), indent=1) + "\n")
        print(path)


if __name__ == "__main__":
    main()
