#!/usr/bin/env python3
"""Writes the bundled study cases data/iegs5_7.json and data/iegs5_7_w6.json.

Five-bus power network with one coal unit, two gas-fired units and wind
farms, coupled to a seven-node gas network with one compressor. Gas-fired
units are cheaper than coal but the gas source cannot feed them at full
output, so ignoring the gas network yields a cheaper but gas-infeasible
schedule.
"""

import argparse
import json
import math
from pathlib import Path

HOURS = 24

LOAD = [262, 252, 246, 244, 250, 268, 300, 338, 372, 392, 404, 412,
        410, 402, 396, 392, 398, 416, 420, 408, 380, 344, 306, 278]
LOAD_SHARE = {"B2": 0.3, "B3": 0.3, "B4": 0.4}

WIND_SHAPE = [0.70, 0.72, 0.74, 0.73, 0.70, 0.66, 0.60, 0.55, 0.50, 0.46, 0.44, 0.42,
              0.40, 0.42, 0.45, 0.48, 0.52, 0.56, 0.60, 0.63, 0.66, 0.68, 0.69, 0.70]

GAS_LOAD = [14, 13, 13, 13, 14, 16, 19, 21, 22, 22, 21, 20,
            20, 20, 21, 22, 23, 24, 24, 23, 21, 19, 17, 15]


def generators():
    def unit(uid, kind, bus, pmin, pmax, h, rmax, energy, no_load, su, sd, pfr, gas=None):
        g = {
            "id": uid, "kind": kind, "bus": bus,
            "p_min": pmin, "p_max": pmax, "ramp_up": 120, "ramp_down": 120,
            "min_up": 3, "min_down": 2, "inertia": h, "reserve_max": rmax,
            "cost": {"energy": energy, "no_load": no_load, "startup": su, "shutdown": sd, "pfr": pfr},
            "initial": {"on": True},
        }
        if gas:
            g["gas_node"], g["gas_rate"] = gas
        return g

    return [
        unit("G1", "non-gfu", "B1", 80, 220, 8.0, 40, 42.0, 600, 3000, 300, 6.0),
        unit("G2", "gfu", "B2", 40, 150, 6.0, 35, 18.0, 260, 900, 100, 4.0, ("N4", 0.2)),
        unit("G3", "gfu", "B5", 45, 170, 6.0, 35, 19.0, 280, 1000, 100, 4.0, ("N7", 0.2)),
    ]


def wind_farms(count, capacity, level):
    farms = []
    buses = ["B3", "B5", "B4", "B3", "B5", "B4"]
    for w in range(count):
        phase = 2 * w
        forecast = [round(capacity * level * WIND_SHAPE[(t + phase) % HOURS], 3) for t in range(HOURS)]
        farms.append({
            "id": f"W{w + 1}", "bus": buses[w], "capacity": capacity,
            "vi_inertia": 7.0, "reserve_max": round(0.15 * capacity, 3),
            "cost": {"vi": 150.0, "pfr": 3.0}, "forecast": forecast,
        })
    return farms


def power_network():
    lines = [
        ("L1", "B1", "B2", 0.0281, 400), ("L2", "B1", "B4", 0.0304, 400),
        ("L3", "B1", "B5", 0.0064, 400), ("L4", "B2", "B3", 0.0108, 400),
        ("L5", "B3", "B4", 0.0297, 400), ("L6", "B4", "B5", 0.0297, 240),
    ]
    return {
        "buses": [{"id": f"B{i}"} for i in range(1, 6)],
        "reference_bus": "B1",
        "lines": [{"id": i, "from": a, "to": b, "reactance": x, "capacity": c} for i, a, b, x, c in lines],
        "loads": [{"id": f"D{b}", "bus": b, "demand": [round(s * d, 3) for d in LOAD]}
                  for b, s in LOAD_SHARE.items()],
    }


def gas_network(source_max):
    nodes = [("N1", 50, 70), ("N2", 35, 70), ("N3", 40, 70), ("N4", 30, 70),
             ("N5", 30, 70), ("N6", 30, 70), ("N7", 30, 70)]
    pipes = [("P1", "N1", "N2", 1.6, 1.0), ("P2", "N3", "N4", 1.4, 0.8), ("P3", "N3", "N5", 1.5, 0.9),
             ("P4", "N5", "N6", 1.5, 0.9), ("P5", "N6", "N7", 1.5, 0.9)]
    # Initial linepack from a flat 55 bar profile.
    return {
        "nodes": [{"id": n, "pressure_min": lo, "pressure_max": hi} for n, lo, hi in nodes],
        "pipelines": [{"id": i, "from": a, "to": b, "weymouth": c, "linepack": k, "initial_linepack": k * 55.0}
                      for i, a, b, c, k in pipes],
        "compressors": [{"id": "K1", "inlet": "N2", "outlet": "N3", "flow_max": 120, "consumption": 0.03,
                         "ratio_min": 1.0, "ratio_max": 1.6}],
        "sources": [{"id": "S1", "node": "N1", "output_min": 0, "output_max": round(0.85 * source_max, 3)},
                    {"id": "S2", "node": "N7", "output_min": 0, "output_max": round(0.15 * source_max, 3)}],
        "loads": [{"id": "GL1", "node": "N5", "demand": [round(0.45 * d, 3) for d in GAS_LOAD]},
                  {"id": "GL2", "node": "N6", "demand": [round(0.35 * d, 3) for d in GAS_LOAD]},
                  {"id": "GL3", "node": "N4", "demand": [round(0.2 * d, 3) for d in GAS_LOAD]}],
    }


def frequency(loss_share):
    return {
        "D": 0.01, "f0": 50.0, "df_db": 0.015, "t_db": 0.1, "Td": 10.0,
        "rocof_max": 0.125, "f_min": 49.2, "df_qss_max": 0.2,
        "dP_loss": [round(loss_share * d, 3) for d in LOAD],
    }


def instance(name, farms, capacity, level, epsilon, epsilon_individual, dispersion, source_max, loss_share):
    return {
        "schema_version": 1,
        "name": name,
        "horizon": HOURS,
        "generators": generators(),
        "wind_farms": wind_farms(farms, capacity, level),
        "power_network": power_network(),
        "gas_network": gas_network(source_max),
        "frequency": frequency(loss_share),
        "uncertainty": {
            "epsilon": epsilon,
            "epsilon_individual": epsilon_individual,
            "samples": {"variance_mode": "std_fraction", "dispersion": dispersion,
                        "in_sample": 10000, "out_of_sample": 10000, "moment_samples": 20, "seed": 2021},
        },
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "data")
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    cases = {
        "iegs5_7.json": instance("iegs5_7", 2, 100.0, 1.0, 0.05, None, 0.1, 60.0, 0.04),
        "iegs5_7_w6.json": instance("iegs5_7_w6", 6, 34.0, 1.0, 0.1, 0.1, 0.1, 60.0, 0.04),
    }
    for fname, doc in cases.items():
        (args.out / fname).write_text(json.dumps(doc, indent=2) + "\n")
        print("wrote", args.out / fname)


if __name__ == "__main__":
    main()
