"""Run configuration: a strict line-based block format.

    [freestream]
    mach = 0.729
    attack_angle_deg = 2.31
    ...
    [target]            # repeatable, one block per functional
    kind = drag
    marker = wall

Unknown sections or keys are errors; every violation found is reported
at once with its line number. Angles are degrees in the file, radians
internally.
"""

import math
import os
from dataclasses import dataclass, field

from .driver import AdaptationConfig
from .errors import ConfigError
from .euler import FreestreamSpec
from .functionals import CompositeFunctional, TargetFunctional
from .meshgen import builtin_airfoil_omesh, builtin_channel_bump
from .meshio import read_meshfile
from .newton import NewtonConfig


def _as_bool(s):
    if s.lower() in ("true", "yes", "on", "1"):
        return True
    if s.lower() in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _as_vec2(s):
    parts = s.split()
    if len(parts) != 2:
        raise ValueError("expected two numbers")
    return (float(parts[0]), float(parts[1]))


# section -> key -> (converter, default); REQUIRED means no default
REQUIRED = object()
SCHEMA = {
    "freestream": {
        "mach": (float, REQUIRED),
        "attack_angle_deg": (float, 0.0),
        "p_inf": (float, 1.0),
        "rho_inf": (float, 1.4),
        "gamma": (float, 1.4),
    },
    "geometry": {
        "case": (str, None),            # "bump" or "naca"
        "mesh": (str, None),            # or a mesh file path
        "nx": (int, 16),
        "ny": (int, 8),
        "bump_height": (float, 0.05),
        "code": (str, "0012"),
        "n_around": (int, 64),
        "n_radial": (int, 12),
        "outer_radius": (float, 35.0),
        "chord": (float, 1.0),
        "refine": (int, 0),             # uniform refinements after build
    },
    "target": {
        "kind": (str, REQUIRED),
        "marker": (str, REQUIRED),
        "chord": (float, 1.0),
        "x_ref": (_as_vec2, None),
        "scale": (float, 1.0),
        "exponent": (float, 1.0),
        "weight": (float, 1.0),
        "name": (str, None),
    },
    "composite": {
        "form": (str, "product"),
    },
    "solver": {
        "newton_tol": (float, 1e-10),
        "max_newton": (int, 200),
        "alpha": (float, 2.0),
        "gmg_tol": (float, 1e-6),
        "gmg_max_cycles": (int, 200),
        "max_halvings": (int, 8),
    },
    "adaptation": {
        "theta": (float, 0.2),
        "tol": (float, 0.0),
        "max_iterations": (int, 5),
        "max_cells": (int, 500_000),
        "dual_tol": (float, 1e-9),
        "dual_state": (str, "resolve"),
    },
    "output": {
        "directory": (str, "out"),
        "vtk": (_as_bool, True),
    },
}


@dataclass
class RunConfig:
    sections: dict
    targets_raw: list
    base_dir: str = "."
    source: dict = field(default_factory=dict)

    def freestream(self):
        f = self.sections["freestream"]
        return FreestreamSpec(mach=f["mach"],
                              attack_angle=math.radians(f["attack_angle_deg"]),
                              p_inf=f["p_inf"], rho_inf=f["rho_inf"], gamma=f["gamma"])

    def build_tree(self):
        g = self.sections["geometry"]
        if g["mesh"]:
            tree = read_meshfile(os.path.join(self.base_dir, g["mesh"]))
        elif g["case"] == "bump":
            tree = builtin_channel_bump(g["nx"], g["ny"], g["bump_height"])
        elif g["case"] == "naca":
            tree = builtin_airfoil_omesh(g["code"], g["n_around"], g["n_radial"],
                                         g["outer_radius"], chord=g["chord"])
        else:
            raise ConfigError([(None, f"unknown geometry case {g['case']!r}")])
        if g["refine"]:
            tree = tree.uniform_refine(g["refine"])
        return tree

    def targets(self):
        fs = self.freestream()
        out = []
        for t in self.targets_raw:
            out.append(TargetFunctional(
                t["kind"], t["marker"], attack_angle=fs.attack_angle,
                gamma=fs.gamma, p_inf=fs.p_inf, mach=fs.mach, chord=t["chord"],
                x_ref=t["x_ref"], scale=t["scale"], name=t["name"]))
        return out

    def composite(self):
        form = self.sections["composite"]["form"]
        specs = self.targets()
        if form == "product":
            coeffs = [t["exponent"] for t in self.targets_raw]
        else:
            coeffs = [t["weight"] for t in self.targets_raw]
        return CompositeFunctional(list(zip(specs, coeffs)), form=form)

    def weights(self):
        return [t["weight"] for t in self.targets_raw]

    def newton(self):
        s = self.sections["solver"]
        return NewtonConfig(newton_tol=s["newton_tol"], max_newton=s["max_newton"],
                            alpha=s["alpha"], gmg_tol=s["gmg_tol"],
                            gmg_max_cycles=s["gmg_max_cycles"],
                            max_halvings=s["max_halvings"])

    def adaptation(self):
        a = self.sections["adaptation"]
        try:
            return AdaptationConfig(theta=a["theta"], tol=a["tol"],
                                    max_iterations=a["max_iterations"],
                                    max_cells=a["max_cells"], dual_tol=a["dual_tol"],
                                    dual_state=a["dual_state"], newton=self.newton())
        except ValueError as e:
            raise ConfigError([(None, str(e))]) from None

    def output_dir(self):
        return os.environ.get("DWRFLOW_OUTPUT",
                              os.path.join(self.base_dir, self.sections["output"]["directory"]))

    def echo(self):
        """Config as plain data for the run manifest."""
        return {"sections": self.sections, "targets": self.targets_raw}


def parse_config(text, base_dir="."):
    """Parse and validate; raises ConfigError listing every violation."""
    violations = []
    sections = {}
    targets_raw = []
    source = {}
    current = None       # (section_name, dict, line)
    seen_sections = set()

    def close_current():
        if current is None:
            return
        name, data, line = current
        schema = SCHEMA[name]
        for key, (conv, default) in schema.items():
            if key not in data:
                if default is REQUIRED:
                    violations.append((line, f"[{name}] is missing required key '{key}'"))
                else:
                    data[key] = default
        if name == "target":
            targets_raw.append(data)
        else:
            sections[name] = data

    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            close_current()
            name = line[1:-1].strip()
            if name not in SCHEMA:
                violations.append((ln, f"unknown section [{name}]"))
                current = None
                continue
            if name != "target" and name in seen_sections:
                violations.append((ln, f"duplicate section [{name}]"))
            seen_sections.add(name)
            current = (name, {}, ln)
            continue
        if "=" not in line:
            violations.append((ln, f"expected 'key = value', got {line!r}"))
            continue
        if current is None:
            violations.append((ln, "key outside of any section"))
            continue
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        name, data, _ = current
        if key not in SCHEMA[name]:
            violations.append((ln, f"unknown key '{key}' in [{name}]"))
            continue
        if key in data:
            violations.append((ln, f"duplicate key '{key}' in [{name}]"))
            continue
        conv, _ = SCHEMA[name][key]
        try:
            data[key] = conv(value)
        except (ValueError, TypeError) as e:
            violations.append((ln, f"bad value for '{key}': {e}"))
            continue
        source[f"{name}.{key}"] = ln
    close_current()

    if "freestream" not in sections:
        violations.append((None, "missing required section [freestream]"))
    for name in SCHEMA:
        if name in ("target", "freestream") or name in sections:
            continue
        sections[name] = {k: d for k, (c, d) in SCHEMA[name].items() if d is not REQUIRED}

    geometry = sections.get("geometry")
    if geometry and not geometry.get("mesh") and not geometry.get("case"):
        violations.append((None, "[geometry] needs either 'case' or 'mesh'"))

    for t in targets_raw:
        if t.get("kind") not in (None, "lift", "drag", "moment"):
            violations.append((None, f"unknown target kind {t['kind']!r}"))
        if t.get("kind") == "moment" and t.get("x_ref") is None:
            violations.append((None, "moment target needs x_ref"))
        if t.get("name") is None and t.get("kind") and t.get("marker"):
            t["name"] = f"{t['kind']}:{t['marker']}"

    if violations:
        raise ConfigError(violations)
    return RunConfig(sections=sections, targets_raw=targets_raw, base_dir=base_dir,
                     source=source)


def load_config(path):
    with open(path) as fh:
        text = fh.read()
    return parse_config(text, base_dir=os.path.dirname(os.path.abspath(path)))
