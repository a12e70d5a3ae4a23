"""Scenario files: JSON documents describing one set-up.

Complex numbers are ``[re, im]`` pairs (a bare real number is accepted);
matrices are row-major lists of rows. Matrix fields also accept the named
presets ``identity``, ``shift``, ``weyl:a,b`` and, at ``d = 2``,
``bell:phi+``, ``bell:phi-``, ``bell:psi+``, ``bell:psi-``.

Example::

    {
      "name": "teleport_d2",
      "kind": "teleportation",
      "dimension": 2,
      "input": [[0.7071067811865476, 0], [0, 0.7071067811865476]],
      "sources": {"23": "identity"},
      "apply_corrections": true
    }
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

from .isometry import Isometry, isometry_from_state, shift, weyl
from .scenarios import (
    Scenario,
    ScenarioError,
    build_double_teleportation,
    build_swapping,
    build_teleportation,
    build_triple_teleportation,
)
from .tensor_core import Ket

KINDS = ("teleportation", "swapping", "double_teleportation", "triple_teleportation")

_BELL2 = {
    "phi+": [[1, 0], [0, 1]],
    "phi-": [[1, 0], [0, -1]],
    "psi+": [[0, 1], [1, 0]],
    "psi-": [[0, 1], [-1, 0]],
}


class ScenarioFileError(ValueError):
    """A scenario document that does not describe a valid scenario.

    ``where`` names the offending field (``sources.12[0][1]``) or the
    ``line:column`` of a syntax error.
    """

    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")
        self.where = where


def _complex(x: Any, where: str) -> complex:
    if isinstance(x, bool):
        raise ScenarioFileError(where, "expected a number or [re, im] pair")
    if isinstance(x, (int, float)):
        return complex(x)
    if isinstance(x, list) and len(x) == 2 and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in x):
        return complex(x[0], x[1])
    raise ScenarioFileError(where, "expected a number or [re, im] pair")


def _vector(x: Any, d: int, where: str) -> np.ndarray:
    if not isinstance(x, list) or len(x) != d:
        raise ScenarioFileError(where, f"expected {d} amplitudes")
    return np.array([_complex(v, f"{where}[{i}]") for i, v in enumerate(x)])


def _matrix(x: Any, d: int, where: str) -> np.ndarray:
    if isinstance(x, str):
        return _named_matrix(x, d, where)
    if not isinstance(x, list) or len(x) != d:
        raise ScenarioFileError(where, f"expected {d} rows or a preset name")
    rows = []
    for i, row in enumerate(x):
        if not isinstance(row, list) or len(row) != d:
            raise ScenarioFileError(f"{where}[{i}]", f"expected {d} entries")
        rows.append([_complex(v, f"{where}[{i}][{j}]") for j, v in enumerate(row)])
    m = np.array(rows)
    if np.max(np.abs(m.conj().T @ m - np.eye(d))) > 1e-9:
        raise ScenarioFileError(where, "matrix is not unitary")
    return m


def _named_matrix(name: str, d: int, where: str) -> np.ndarray:
    if name == "identity":
        return np.eye(d, dtype=complex)
    if name == "shift":
        return shift(d)
    if name.startswith("weyl:"):
        try:
            a, b = (int(t) for t in name[5:].split(","))
        except ValueError:
            raise ScenarioFileError(where, f"bad preset {name!r}, expected weyl:a,b") from None
        return weyl(d, a, b)
    if name.startswith("bell:"):
        key = name[5:]
        if d != 2 or key not in _BELL2:
            raise ScenarioFileError(where, f"preset {name!r} needs d = 2 and one of {sorted(_BELL2)}")
        # isometry of the named Bell state, so the source emits exactly that state
        ket = Ket((0, 1), np.array(_BELL2[key], dtype=complex) / np.sqrt(2))
        return isometry_from_state(ket, source=0).matrix
    raise ScenarioFileError(where, f"unknown matrix preset {name!r}")


def _pair_iso(doc: dict, field: str, key: str, d: int) -> Isometry | None:
    table = doc.get(field, {})
    if not isinstance(table, dict):
        raise ScenarioFileError(field, "expected an object keyed by factor pair, e.g. {\"12\": \"identity\"}")
    unknown = set(table) - _ALLOWED_PAIRS[field]
    if unknown:
        raise ScenarioFileError(f"{field}.{sorted(unknown)[0]}", "unknown factor pair for this field")
    if key not in table:
        return None
    src, tgt = int(key[0]), int(key[1])
    return Isometry(src, tgt, _matrix(table[key], d, f"{field}.{key}"))


_ALLOWED_PAIRS = {
    "sources": {"12", "23", "34"},
    "bell_seeds": {"12", "01", "23"},
    "orientations": {"1", "4"},
}


def _get(doc: dict, key: str, types, default=None, required=False, prefix=""):
    where = prefix + key
    if key not in doc:
        if required:
            raise ScenarioFileError(where, "missing required field")
        return default
    v = doc[key]
    if not isinstance(v, types) or (types is int and isinstance(v, bool)):
        raise ScenarioFileError(where, f"wrong type {type(v).__name__}")
    return v


# factor pairs each kind reads from "sources" and "bell_seeds"
_KIND_PAIRS = {
    "teleportation": {"sources": {"23"}, "bell_seeds": {"12"}},
    "swapping": {"sources": {"12", "34"}, "bell_seeds": {"23"}},
    "double_teleportation": {"sources": {"12", "34"}, "bell_seeds": {"01", "23"}},
    "triple_teleportation": {"sources": {"12", "34"}, "bell_seeds": {"01", "23"}},
}


_FIELDS = {
    "name", "figure", "description", "kind", "dimension", "input", "sources",
    "bell_seeds", "order", "iso20", "victor_choice", "orientations",
    "apply_corrections", "include_q02", "sampling",
}


def scenario_from_dict(doc: Any) -> tuple[Scenario, dict]:
    """Build a :class:`Scenario`; also returns the sampling options."""
    if not isinstance(doc, dict):
        raise ScenarioFileError("<root>", "expected a JSON object")
    extra = set(doc) - _FIELDS
    if extra:
        raise ScenarioFileError(sorted(extra)[0], "unknown field")
    kind = _get(doc, "kind", str, required=True)
    if kind not in KINDS:
        raise ScenarioFileError("kind", f"must be one of {KINDS}")
    d = _get(doc, "dimension", int, required=True)
    if not 2 <= d <= 8:
        raise ScenarioFileError("dimension", "must be between 2 and 8")
    corrections = _get(doc, "apply_corrections", bool, False)

    vec = None
    if kind != "swapping":
        if "input" not in doc:
            raise ScenarioFileError("input", "missing required field")
        vec = _vector(doc["input"], d, "input")
        if abs(np.linalg.norm(vec) - 1.0) > 1e-9:
            raise ScenarioFileError("input", f"amplitudes must be normalized (norm {np.linalg.norm(vec):.12g})")
    elif "input" in doc:
        raise ScenarioFileError("input", "swapping scenarios take no input state")

    for f in ("sources", "bell_seeds", "orientations"):
        if f in doc and not isinstance(doc[f], dict):
            raise ScenarioFileError(f, "expected an object")
    for f, allowed in _KIND_PAIRS[kind].items():
        for k in doc.get(f, {}):
            if k in _ALLOWED_PAIRS[f] and k not in allowed:
                raise ScenarioFileError(f"{f}.{k}", f"not used by {kind} scenarios")
    if kind != "swapping":
        for f in ("orientations", "victor_choice"):
            if f in doc:
                raise ScenarioFileError(f, "only applies to swapping")
    if "iso20" in doc and kind != "triple_teleportation":
        raise ScenarioFileError("iso20", "only applies to triple teleportation")

    try:
        if kind == "teleportation":
            sc = build_teleportation(
                d, vec,
                source=_pair_iso(doc, "sources", "23", d),
                bell_seed=_pair_iso(doc, "bell_seeds", "12", d),
                apply_corrections=corrections,
            )
        elif kind == "swapping":
            ors = doc.get("orientations", {})
            unknown = set(ors) - _ALLOWED_PAIRS["orientations"]
            if unknown:
                raise ScenarioFileError(f"orientations.{sorted(unknown)[0]}", "unknown factor")
            orientations = tuple(
                _matrix(ors[k], d, f"orientations.{k}") if k in ors else np.eye(d) for k in ("1", "4")
            )
            choice = _get(doc, "victor_choice", str, "entangled")
            if choice not in ("entangled", "separable"):
                raise ScenarioFileError("victor_choice", "must be 'entangled' or 'separable'")
            sc = build_swapping(
                d,
                source12=_pair_iso(doc, "sources", "12", d),
                source34=_pair_iso(doc, "sources", "34", d),
                victor_choice=choice,
                orientations=orientations,
                victor_seed=_pair_iso(doc, "bell_seeds", "23", d),
            )
        elif kind == "double_teleportation":
            sc = build_double_teleportation(
                d, vec,
                source12=_pair_iso(doc, "sources", "12", d),
                source34=_pair_iso(doc, "sources", "34", d),
                alice_seed=_pair_iso(doc, "bell_seeds", "01", d),
                victor_seed=_pair_iso(doc, "bell_seeds", "23", d),
                apply_corrections=corrections,
            )
        else:
            variant = doc.get("iso20", "default")
            if not isinstance(variant, str):
                variant = _matrix(variant, d, "iso20")
            elif variant not in ("default", "shifted"):
                raise ScenarioFileError("iso20", "must be 'default', 'shifted' or a unitary matrix")
            sc = build_triple_teleportation(
                d, vec,
                iso20_variant=variant,
                source12=_pair_iso(doc, "sources", "12", d),
                source34=_pair_iso(doc, "sources", "34", d),
                alice01_seed=_pair_iso(doc, "bell_seeds", "01", d),
                victor_seed=_pair_iso(doc, "bell_seeds", "23", d),
                apply_corrections=corrections,
            )
    except (ScenarioError, ValueError) as exc:
        if isinstance(exc, ScenarioFileError):
            raise
        raise ScenarioFileError("<scenario>", str(exc)) from None

    sc = _reorder(sc, doc)
    if not _get(doc, "include_q02", bool, True):
        if kind != "triple_teleportation":
            raise ScenarioFileError("include_q02", "only applies to triple teleportation")
        sc = sc.with_order([m for m in sc.measurement_order if m.name != "alice_02"])
    name = _get(doc, "name", str, sc.name)
    sc = sc.with_order(sc.measurement_order, name=name)

    sampling = _get(doc, "sampling", dict, {})
    extra = set(sampling) - {"samples", "seed"}
    if extra:
        raise ScenarioFileError(f"sampling.{sorted(extra)[0]}", "unknown field")
    opts = {
        "samples": _get(sampling, "samples", int, 0, prefix="sampling."),
        "seed": _get(sampling, "seed", int, 0, prefix="sampling."),
    }
    if opts["samples"] < 0 or opts["seed"] < 0:
        raise ScenarioFileError("sampling", "samples and seed must be non-negative")
    return sc, opts


def _reorder(sc: Scenario, doc: dict) -> Scenario:
    sets = {m.name: m for m in sc.measurement_order}
    available = list(sets)
    if sc.meta.get("iso20_variant") is not None:
        available = ["alice_02", "alice_01", "victor_23"]
    order = doc.get("order")
    if order is None:
        return sc
    if isinstance(order, str):
        if order in ("forward", "default"):
            return sc
        if order == "reversed":
            return sc.reversed()
        raise ScenarioFileError("order", "expected 'forward', 'reversed' or a list of set names")
    if not isinstance(order, list) or not all(isinstance(o, str) for o in order):
        raise ScenarioFileError("order", "expected a list of measurement set names")
    if len(set(order)) != len(order):
        raise ScenarioFileError("order", "repeated measurement set")
    for i, name in enumerate(order):
        if name not in sets:
            raise ScenarioFileError(f"order[{i}]", f"unknown set {name!r}; available: {available}")
    if sc.meta.get("iso20_variant") is None and set(order) != set(sets):
        missing = sorted(set(sets) - set(order))
        raise ScenarioFileError("order", f"missing measurement sets {missing}")
    if sc.meta.get("iso20_variant") is not None and not {"alice_01", "victor_23"} <= set(order):
        raise ScenarioFileError("order", "triple teleportation needs alice_01 and victor_23")
    return sc.with_order([sets[n] for n in order])


def loads(text: str) -> tuple[Scenario, dict]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioFileError(f"line {exc.lineno}, column {exc.colno}", exc.msg) from None
    return scenario_from_dict(doc)


PRESET_FIGURES = {
    "teleport_d2": 1,
    "swap_d2": 2,
    "delayed_swap_separable": 3,
    "double_tele": 4,
    "double_tele_swap": 5,
    "triple_shifted_d3": 6,
    "triple_shifted_d3_swap": 7,
}


def preset_names() -> list[str]:
    return sorted(PRESET_FIGURES, key=PRESET_FIGURES.get)


def preset_text(name: str) -> str:
    if name not in PRESET_FIGURES:
        raise KeyError(name)
    return resources.files("qhistory").joinpath("presets", f"{name}.json").read_text()


def preset_document(name: str) -> dict:
    return json.loads(preset_text(name))


def load(path_or_preset: str | Path) -> tuple[Scenario, dict]:
    """Load a scenario file, or a bundled preset by name."""
    p = Path(path_or_preset)
    if p.exists():
        return loads(p.read_text())
    if str(path_or_preset) in PRESET_FIGURES:
        return loads(preset_text(str(path_or_preset)))
    raise ScenarioFileError(str(path_or_preset), "no such file or preset")
