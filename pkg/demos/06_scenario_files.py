"""Scenario files and reports, the same path the command line uses.

Equivalent shell commands:

    qhistory presets
    qhistory run triple_shifted_d3 --json report.json
    qhistory compare double_tele double_tele_swap
"""

import json

from qhistory.cli import Report, build_report, compare_scenarios, render_report
from qhistory.scenario_file import load, loads, preset_names

print("bundled:", ", ".join(preset_names()))

sc, opts = load("triple_shifted_d3")
rep = build_report(sc, samples=5000, seed=opts["seed"])
text = render_report(rep)
print("\n".join(text.splitlines()[:4] + ["..."] + text.splitlines()[-8:]))

again = Report.from_json(rep.to_json())
print("json round trip exact:", again.to_dict() == rep.to_dict())

diff = compare_scenarios(load("double_tele")[0], load("double_tele_swap")[0])
print("double teleportation orders, max probability gap:", diff["max_delta"], "min fidelity:", diff["min_fidelity"])

custom = {
    "name": "qutrit_relay",
    "kind": "double_teleportation",
    "dimension": 3,
    "input": [[0.6, 0], [0, 0.48], [0.64, 0]],
    "sources": {"12": "shift", "34": "weyl:1,2"},
    "order": ["victor_23", "alice_01"],
    "apply_corrections": True,
}
sc, _ = loads(json.dumps(custom))
verdict = build_report(sc).verdict
print("custom file agrees with oracle:", verdict["agrees"], "| worst corrected fidelity:", verdict["min_corrected_fidelity"])
