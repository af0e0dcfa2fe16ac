#!/usr/bin/env python3
"""Regenerates the shipped scenario files from one shared parameter set."""
import json, copy, os

OUT = os.path.join(os.path.dirname(__file__), "..", "scenarios")

BASE = {
    "name": "",
    "sim": {
        "dt": 2e-05, "t_end": 10.0, "t_preroll": 0.5, "log_decimation": 50,
        "collapse_threshold": 0.7, "power_filter_omega": 62.83185307179586,
    },
    "network": "ieee9",
    "network_overrides": {
        "loads.bus5.p": 0.0, "loads.bus5.q": 0.0,
        "loads.bus6.p": 0.0, "loads.bus6.q": 0.0,
        "loads.bus8.p": 0.0, "loads.bus8.q": 0.0,
    },
    "devices": {},
    "events": [{"t": 1.0, "bus": "bus8", "p_before": 0.0, "p_after": 0.9, "q_after": 0.0}],
}

CONVERTER = {
    "c_dc": 0.03, "x_f": 0.15, "b_f": 0.05, "r_f": 0.005,
    "i_dc_max": 0.11, "v_dc_ref": 3.4, "k_dc": 0.3, "tau_dc": 0.15,
}
INNER = {"kp_v": 1.0, "ki_v": 5.0, "kp_i": 1.0, "ki_i": 10.0, "i_ac_max": 10.0}
SM = {"type": "sm", "bus": "bus1", "inertia_h": 3.0, "d_damp": 0.05,
      "x_t": 0.1, "e_mag": 1.0, "governor_droop": 0.2, "p_set": 0.0}

CONTROLLERS = {
    "vsg": {"kind": "vsg", "j": 3e-05, "d_p": 0.001},
    "droop": {"kind": "droop", "d_omega": 3.141592653589793},
    "dvoc": {"kind": "dvoc", "eta": 3.141592653589793, "mu": 2000.0,
             "phase_law": "consistent"},
}

def gfc(bus, kind, alpha):
    ctrl = dict(CONTROLLERS[kind])
    ctrl["alpha"] = alpha
    return {"type": "gfc", "bus": bus, "converter": dict(CONVERTER),
            "controller": ctrl, "inner": dict(INNER)}

def scenario(name, kind, alpha, p_step, i_ac_max=None):
    s = copy.deepcopy(BASE)
    s["name"] = name
    s["devices"]["gfc1"] = gfc("bus2", kind, alpha)
    s["devices"]["gfc2"] = gfc("bus3", kind, alpha)
    s["devices"]["sm1"] = dict(SM)
    s["events"][0]["p_after"] = p_step
    if i_ac_max is not None:
        for g in ("gfc1", "gfc2"):
            s["devices"][g]["inner"]["i_ac_max"] = i_ac_max
    return s

SCENARIOS = [
    scenario("ieee9_vsg_small", "vsg", 1.0, 0.78),
    scenario("ieee9_vsg_collapse", "vsg", 1.0, 0.9),
    scenario("ieee9_vsg_collapse_aclimit", "vsg", 1.0, 0.9, i_ac_max=1.2),
    scenario("ieee9_vsg_feedback", "vsg", 0.5, 0.9),
    scenario("ieee9_droop_feedback", "droop", 0.5, 0.9),
    scenario("ieee9_dvoc_feedback", "dvoc", 0.5, 0.9),
]

for s in SCENARIOS:
    path = os.path.join(OUT, s["name"] + ".json")
    with open(path, "w") as f:
        json.dump(s, f, indent=2)
        f.write("\n")
    print(path)
