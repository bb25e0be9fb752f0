"""INI-style simulation configuration with strict parsing and cross-field validation.

Every recognised key, its type and its default live in :data:`DEFAULTS`.
Unknown sections or keys are errors. Errors carry the dotted field path
(``material.k``) and, where the text is available, the line number.

Initial-data families
---------------------
``u0_family = linear-sine``
    ``u0 = stretch * x + amplitude * sin(pi x)``; ``u0_xx`` vanishes at both ends.
``u0_family = quarter-sine``
    ``u0 = stretch * x + amplitude * sin(pi x / 2)``; accepted only when the
    end condition ``u0_xx(1) = 0`` holds, i.e. for ``amplitude = 0``.
``p0_family = constant | cosine``
    ``p0 = mean`` or ``p0 = mean + amplitude * cos(pi x)`` on the reference grid.
"""
from __future__ import annotations

import configparser
import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import constitutive as cl
from .beam import BeamProblem, InitialDeformation, compatibility_residual, compatible_velocity_slope
from .coupling import CoupledState, CouplingConfig
from .deformation import DeformationSnapshot, MIN_CELLS
from .pore import DiffusionProblem

COMPATIBILITY_TOL = 1e-8


class ConfigError(ValueError):
    """Invalid configuration; ``path`` is the offending field, ``line`` its source line."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None,
                 column: int | None = None):
        where = []
        if path:
            where.append(path)
        if line is not None:
            where.append(f"line {line}" + (f", column {column}" if column is not None else ""))
        super().__init__(f"{': '.join([', '.join(where), message]) if where else message}")
        self.path = path
        self.line = line
        self.column = column


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _choice(*options):
    def parse(text: str) -> str:
        t = text.strip()
        if t not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {t!r}")
        return t
    return parse


def _table(text: str):
    """``"0.5"`` or ``"0:0, 0.1:1, 0.2:0"`` into a (times, values) pair."""
    t = text.strip()
    if ":" not in t:
        return ((0.0,), (float(t),))
    times, values = [], []
    for item in t.split(","):
        a, b = item.split(":")
        times.append(float(a))
        values.append(float(b))
    return (tuple(times), tuple(values))


# section -> key -> (parser, default, description)
DEFAULTS: dict[str, dict[str, tuple]] = {
    "material": {
        "m": (float, 1.0, "mass density"),
        "gamma": (float, 0.01, "bending stiffness"),
        "k": (float, 1.0, "elastic constant"),
        "k_v": (float, 0.5, "viscous constant"),
        "kappa": (float, 1.0, "permeability"),
        "rho_family": (_choice("linear", "tanh-augmented"), "tanh-augmented", "density law family"),
        "rho_a": (float, 1.0, "density slope (lower bound of rho')"),
        "rho_b": (float, 0.5, "tanh amplitude of the density law"),
        "rho_scale": (float, 1.0, "tanh scale of the density law"),
        "rho_w0": (float, 1.0, "density offset"),
        "nu_c": (float, 0.1, "pressure-load amplitude"),
        "nu_scale": (float, 1.0, "pressure-load scale"),
        "nu_shift": (float, 0.0, "pressure-load shift"),
        "phi_c": (float, 0.1, "swelling-force amplitude"),
        "phi_scale": (float, 1.0, "swelling-force scale"),
        "phi_shift": (float, 1.0, "swelling-force shift"),
        "psi_c": (float, 0.2, "pore-storage amplitude"),
        "psi_scale": (float, 1.0, "pore-storage scale"),
        "psi_shift": (float, 0.0, "pore-storage shift"),
        "h0": (_table, ((0.0,), (0.0,)), "left boundary flux: constant or 't:v, t:v, ...'"),
    },
    "discretization": {
        "n_beam": (int, 128, "beam cells"),
        "n_pore": (int, 128, "pressure cells"),
        "dt": (float, 1e-3, "time step"),
        "t_final": (float, 1.0, "final time"),
        "newton_tol": (float, 1e-11, "Newton tolerance (scaled residual)"),
        "newton_max_iter": (int, 30, "Newton iteration cap"),
        "gradient_floor": (float, 1e-8, "line-search floor on cell gradients"),
        "advection": (_choice("central", "upwind"), "central", "face density scheme"),
    },
    "coupling": {
        "tol": (float, 1e-8, "Picard tolerance"),
        "max_iter": (int, 30, "Picard iteration cap"),
        "relaxation": (float, 1.0, "initial relaxation factor"),
    },
    "initial": {
        "u0_family": (_choice("linear-sine", "quarter-sine"), "linear-sine", "deformation family"),
        "u0_stretch": (float, 1.0, "linear part of u0"),
        "u0_amplitude": (float, 0.1, "sine amplitude of u0"),
        "p0_family": (_choice("constant", "cosine"), "cosine", "pressure family"),
        "p0_mean": (float, 0.0, "mean of p0"),
        "p0_amplitude": (float, 0.5, "cosine amplitude of p0"),
        "auto_compatibility": (_bool, True, "solve for v0 = beta x from the end balance"),
        "v0_slope": (float, 0.0, "beta in v0 = beta x when auto_compatibility is off"),
    },
    "checks": {
        "enabled": (_bool, True, "run invariant checks after the simulation"),
        "strain_floor": (float, 0.0, "required lower bound on the minimum cell gradient"),
        "mass_rel_tol": (float, 1e-3, "allowed mass drift relative to the initial mass"),
    },
    "output": {
        "directory": (str, "out", "output directory (FOAMSWELL_OUT overrides)"),
        "snapshot_stride": (int, 100, "steps between snapshots (0 disables)"),
    },
}


def defaults_table() -> str:
    """Plain-text table of every key, its default and meaning."""
    lines = []
    for sec, keys in DEFAULTS.items():
        lines.append(f"[{sec}]")
        for key, (_, default, desc) in keys.items():
            if key == "h0":
                default = "0"
            lines.append(f"  {key:<20} {str(default):<16} {desc}")
    return "\n".join(lines)


@dataclass
class SimConfig:
    material: dict = field(default_factory=dict)
    discretization: dict = field(default_factory=dict)
    coupling: dict = field(default_factory=dict)
    initial: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {sec: dict(getattr(self, sec)) for sec in DEFAULTS}

    @property
    def hash(self) -> str:
        """SHA-256 of the resolved physics and numerics (the output block is excluded)."""
        d = self.to_dict()
        d.pop("output")
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"), default=list)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    # -- builders --------------------------------------------------------
    def material_system(self) -> cl.MaterialSystem:
        m = self.material
        times, values = m["h0"]
        return cl.MaterialSystem(
            constants=cl.PhysicalConstants(m["m"], m["gamma"], m["k"], m["k_v"], m["kappa"]),
            rho=cl.DensityLaw(m["rho_a"], m["rho_b"], m["rho_scale"], m["rho_w0"], m["rho_family"]),
            nu=cl.BoundedLipschitzLaw(m["nu_c"], m["nu_scale"], m["nu_shift"]),
            phi=cl.BoundedLipschitzLaw(m["phi_c"], m["phi_scale"], m["phi_shift"]),
            psi=cl.BoundedLipschitzLaw(m["psi_c"], m["psi_scale"], m["psi_shift"]),
            h0=cl.BoundarySource(times, values),
        )

    def problems(self) -> tuple[BeamProblem, DiffusionProblem, CouplingConfig]:
        sysm = self.material_system()
        d, c = self.discretization, self.coupling
        beam = BeamProblem(sysm.constants, sysm.phi, sysm.nu, d["n_beam"], d["dt"],
                           d["newton_tol"], d["newton_max_iter"], d["gradient_floor"])
        pore = DiffusionProblem(sysm.constants, sysm.rho, sysm.psi, sysm.h0, d["n_pore"],
                                d["dt"], d["newton_tol"], d["newton_max_iter"], d["advection"])
        return beam, pore, CouplingConfig(c["tol"], c["max_iter"], c["relaxation"])

    def initial_profile(self):
        """``(u0, u0_x, u0_xx, u0_xxx)`` callables of the configured family."""
        i = self.initial
        lam, a = i["u0_stretch"], i["u0_amplitude"]
        w = math.pi if i["u0_family"] == "linear-sine" else 0.5 * math.pi
        return (lambda x: lam * x + a * np.sin(w * x),
                lambda x: lam + a * w * np.cos(w * x),
                lambda x: -a * w**2 * np.sin(w * x),
                lambda x: -a * w**3 * np.cos(w * x))

    def initial_pressure(self, x) -> np.ndarray:
        i = self.initial
        x = np.asarray(x, dtype=float)
        if i["p0_family"] == "constant":
            return np.full_like(x, i["p0_mean"])
        return i["p0_mean"] + i["p0_amplitude"] * np.cos(np.pi * x)

    def velocity_slope(self) -> float:
        """``beta`` in ``v0 = beta x``: solved for, or as configured."""
        sysm = self.material_system()
        p1 = float(self.initial_pressure(1.0))
        u0 = self._deformation()
        if self.initial["auto_compatibility"]:
            return compatible_velocity_slope(u0, p1, sysm.constants, sysm.phi, sysm.nu)
        return self.initial["v0_slope"]

    def compatibility_residual(self) -> float:
        sysm = self.material_system()
        return compatibility_residual(self._deformation(), self.velocity_slope(),
                                      float(self.initial_pressure(1.0)), sysm.constants,
                                      sysm.phi, sysm.nu)

    def _deformation(self):
        """An object with ``u``, ``ux``, ``uxx``, ``uxxx`` and ``s0`` for the family."""
        if self.initial["u0_family"] == "linear-sine":
            return InitialDeformation(self.initial["u0_stretch"], self.initial["u0_amplitude"])
        u, ux, uxx, uxxx = self.initial_profile()
        return _Profile(u, ux, uxx, uxxx)

    def initial_state(self) -> CoupledState:
        d = self.discretization
        u, _, _, _ = self.initial_profile()
        xb = np.linspace(0.0, 1.0, d["n_beam"] + 1)
        beta = self.velocity_slope()
        snap = DeformationSnapshot(u(xb), beta * xb)
        p0 = self.initial_pressure(np.linspace(0.0, 1.0, d["n_pore"] + 1))
        return CoupledState.build(0.0, snap, p0)


@dataclass(frozen=True)
class _Profile:
    u: object
    ux: object
    uxx: object
    uxxx: object

    @property
    def s0(self) -> float:
        return float(self.u(1.0))


def _key_lines(text: str) -> dict:
    """Map ``section.key`` to its 1-based source line."""
    out, sec = {}, None
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.startswith("[") and line.endswith("]"):
            sec = line[1:-1].strip()
        elif sec and line and line[0] not in "#;" and ("=" in line or ":" in line):
            key = line.split("=", 1)[0] if "=" in line else line.split(":", 1)[0]
            out.setdefault(f"{sec}.{key.strip().lower()}", no)
    return out


def parse_config(text: str) -> SimConfig:
    """Parse and validate configuration text; raise :class:`ConfigError` on any problem."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("key outside any [section]", line=exc.lineno, column=1) from exc
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f"duplicate section [{exc.section}]", line=exc.lineno, column=1) from exc
    except configparser.DuplicateOptionError as exc:
        raise ConfigError("duplicate key", f"{exc.section}.{exc.option}", exc.lineno, 1) from exc
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0]
        line = text.splitlines()[lineno - 1]  # configparser stores a repr, not the raw line
        col = len(line) - len(line.lstrip()) + 1
        raise ConfigError(f"cannot parse {line.strip()!r}", line=lineno, column=col) from exc

    lines = _key_lines(text)
    cfg = SimConfig()
    for sec in parser.sections():
        if sec not in DEFAULTS:
            raise ConfigError(f"unknown section [{sec}]", sec)
        for key in parser[sec]:
            if key not in DEFAULTS[sec]:
                raise ConfigError("unknown key", f"{sec}.{key}", lines.get(f"{sec}.{key}"))
    for sec, keys in DEFAULTS.items():
        values = {}
        for key, (parse, default, _) in keys.items():
            if parser.has_option(sec, key):
                raw = parser.get(sec, key)
                try:
                    values[key] = parse(raw)
                except (ValueError, TypeError) as exc:
                    raise ConfigError(f"bad value {raw!r} ({exc})", f"{sec}.{key}",
                                      lines.get(f"{sec}.{key}")) from exc
            else:
                values[key] = default
        setattr(cfg, sec, values)
    validate(cfg, lines)
    return cfg


def load_config(path) -> SimConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def validate(cfg: SimConfig, lines: dict | None = None) -> None:
    """Cross-field checks; raise :class:`ConfigError` naming the first offending field."""
    lines = lines or {}

    def fail(path, msg):
        raise ConfigError(msg, path, lines.get(path))

    m, d, c, i, o = cfg.material, cfg.discretization, cfg.coupling, cfg.initial, cfg.output
    for key in ("m", "gamma", "k", "k_v", "kappa", "rho_a", "rho_scale", "nu_scale",
                "phi_scale", "psi_scale"):
        if not (math.isfinite(m[key]) and m[key] > 0.0):
            fail(f"material.{key}", f"must be positive, got {m[key]!r}")
    for key in ("rho_b", "nu_c", "phi_c", "psi_c"):
        if not (math.isfinite(m[key]) and m[key] >= 0.0):
            fail(f"material.{key}", f"must be non-negative, got {m[key]!r}")
    if m["rho_family"] == "linear" and m["rho_b"] != 0.0:
        fail("material.rho_b", "must be 0 for the linear density family")
    times, _ = m["h0"]
    if any(b <= a for a, b in zip(times[:-1], times[1:])):
        fail("material.h0", "table times must be strictly increasing")

    for key in ("n_beam", "n_pore"):
        if d[key] < MIN_CELLS:
            fail(f"discretization.{key}", f"must be >= {MIN_CELLS}, got {d[key]}")
    for key in ("dt", "t_final", "newton_tol"):
        if not (math.isfinite(d[key]) and d[key] > 0.0):
            fail(f"discretization.{key}", f"must be positive, got {d[key]!r}")
    if d["newton_max_iter"] < 1:
        fail("discretization.newton_max_iter", "must be >= 1")
    if not d["gradient_floor"] >= 0.0:
        fail("discretization.gradient_floor", "must be non-negative")

    if not 0.0 < c["tol"] < 1.0:
        fail("coupling.tol", f"must lie in (0, 1), got {c['tol']!r}")
    if c["max_iter"] < 1:
        fail("coupling.max_iter", "must be >= 1")
    if not 0.0 < c["relaxation"] <= 1.0:
        fail("coupling.relaxation", f"must lie in (0, 1], got {c['relaxation']!r}")

    if o["snapshot_stride"] < 0:
        fail("output.snapshot_stride", "must be >= 0")
    if not cfg.checks["mass_rel_tol"] > 0.0:
        fail("checks.mass_rel_tol", "must be positive")

    # initial data: u0 in X with u0_x > 0 on [0, 1] and u0_xx = 0 at both ends
    u, ux, uxx, _ = cfg.initial_profile()
    xs = np.linspace(0.0, 1.0, 4001)
    gmin = float(np.min(ux(xs)))
    if i["u0_family"] == "linear-sine":
        gmin = min(gmin, i["u0_stretch"] - abs(i["u0_amplitude"]) * math.pi)
    if not gmin > 0.0:
        fail("initial.u0_amplitude",
             f"initial deformation violates u_{{0x}} > 0 on [0,1] (min u_0x = {gmin:.6g})")
    for end in (0.0, 1.0):
        val = float(uxx(end))
        if abs(val) > 1e-12:
            fail("initial.u0_family",
                 f"initial deformation violates u_{{0xx}}(0) = u_{{0xx}}(1) = 0 "
                 f"(u_0xx({end:g}) = {val:.6g})")
    if not i["auto_compatibility"]:
        r = cfg.compatibility_residual()
        if not abs(r) < COMPATIBILITY_TOL:
            fail("initial.v0_slope",
                 f"initial data break the end compatibility identity (residual {r:.3e}, "
                 f"need < {COMPATIBILITY_TOL:g}); set auto_compatibility = true or "
                 f"v0_slope = {_slope_hint(cfg):.12g}")


def _slope_hint(cfg: SimConfig) -> float:
    sysm = cfg.material_system()
    return compatible_velocity_slope(cfg._deformation(), float(cfg.initial_pressure(1.0)),
                                     sysm.constants, sysm.phi, sysm.nu)
