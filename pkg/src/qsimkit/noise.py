"""Kraus channels, angle-error processes and their stochastic application.

Channels are unravelled along a single state-vector trajectory: branch
``alpha`` is picked with probability ``<psi|K_a^dag K_a|psi>`` and the state
is renormalised.  All randomness comes from the shot-local generator.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import jsonschema
import numpy as np

from .core import ConsistencyError, StateVector, apply_matrix, reduced_density_matrix
from .gates import I2, PAULI, X, Y, Z, rx_matrix, ry_matrix, rz_matrix
from .qasm import UNITARY_KINDS, Instruction

__all__ = [
    "AngleError",
    "GateNoise",
    "KrausSet",
    "NoiseModel",
    "NoiseSchemaError",
    "ShotContext",
    "apply_channel_stochastic",
    "build_channel",
    "dephasing_time",
    "perturb_angles",
]

COMPLETENESS_TOL = 1e-12


class NoiseSchemaError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class KrausSet:
    operators: tuple
    label: str = "channel"

    def __post_init__(self):
        ops = tuple(np.asarray(k, dtype=complex) for k in self.operators)
        if not ops:
            raise ValueError("a channel needs at least one Kraus operator")
        d = ops[0].shape[0]
        if d not in (2, 4) or any(k.shape != (d, d) for k in ops):
            raise ValueError("Kraus operators must all be 2x2 or all 4x4")
        total = sum(k.conj().T @ k for k in ops)
        err = np.abs(total - np.eye(d)).max()
        if err > COMPLETENESS_TOL:
            raise ValueError(f"{self.label}: sum K^dag K deviates from identity by {err:.2e}")
        object.__setattr__(self, "operators", ops)
        # mixed-unitary channels have state-independent branch weights
        weights, unitaries = [], []
        for k in ops:
            kk = k.conj().T @ k
            w = kk[0, 0].real
            if np.abs(kk - w * np.eye(d)).max() > 1e-12:
                weights = None
                break
            weights.append(w)
            unitaries.append(k / math.sqrt(w) if w > 0 else k)
        if weights is not None:
            w = np.array(weights)
            object.__setattr__(self, "_mixture", (w / w.sum(), tuple(unitaries)))
        else:
            object.__setattr__(self, "_mixture", None)

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    @property
    def n_qubits(self) -> int:
        return 1 if self.dim == 2 else 2

    @property
    def is_mixed_unitary(self) -> bool:
        return self._mixture is not None

    def superoperator(self) -> np.ndarray:
        """Row-major ``vec(rho) -> vec(E(rho))`` matrix."""
        return sum(np.kron(k, k.conj()) for k in self.operators)

    def compose(self, after: "KrausSet", label: str | None = None) -> "KrausSet":
        """Channel ``after o self``."""
        ops = [b @ a for a in self.operators for b in after.operators]
        return KrausSet(tuple(ops), label or f"{after.label}*{self.label}")


def _prob(p, name):
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"{name} = {p} outside [0, 1]")
    return p


def dephasing_time(t1: float, t2: float) -> float:
    """Pure-dephasing constant ``T1*T2 / (2*T1 - T2)``; infinite when ``T2 == 2*T1``."""
    if t1 <= 0 or t2 <= 0:
        raise ValueError("T1 and T2 must be positive")
    if t2 > 2 * t1 + 1e-12:
        raise ValueError(f"T2 = {t2} exceeds 2*T1 = {2 * t1}")
    denom = 2 * t1 - t2
    return math.inf if denom <= 0 else t1 * t2 / denom


def amplitude_damping(a: float) -> KrausSet:
    a = _prob(a, "a")
    return KrausSet(
        (np.array([[1, 0], [0, math.sqrt(1 - a)]]), np.array([[0, math.sqrt(a)], [0, 0]])),
        f"amplitude({a:g})",
    )


def phase_damping(b: float) -> KrausSet:
    b = _prob(b, "b")
    return KrausSet(
        (np.array([[1, 0], [0, math.sqrt(1 - b)]]), np.array([[0, 0], [0, math.sqrt(b)]])),
        f"phase({b:g})",
    )


def t1t2_channel(t1: float, t2: float, t: float) -> KrausSet:
    """Amplitude damping with ``a = 1 - exp(-t/T1)`` followed by phase damping with ``b = 1 - exp(-t/Tphi)``."""
    if t < 0:
        raise ValueError("duration must be non-negative")
    t_phi = dephasing_time(t1, t2)
    a = 1 - math.exp(-t / t1)
    b = 0.0 if math.isinf(t_phi) else 1 - math.exp(-t / t_phi)
    return amplitude_damping(a).compose(phase_damping(b), f"t1t2(T1={t1:g},T2={t2:g},t={t:g})")


def depolarizing1(p: float) -> KrausSet:
    p = _prob(p, "p")
    ops = [math.sqrt(1 - p) * I2] + [math.sqrt(p / 3) * P for P in (X, Y, Z)]
    return KrausSet(tuple(ops), f"depolarizing1({p:g})")


def depolarizing2(p: float) -> KrausSet:
    p = _prob(p, "p")
    ops = [math.sqrt(1 - p) * np.eye(4)]
    for a, b in itertools.product("IXYZ", repeat=2):
        if a == b == "I":
            continue
        ops.append(math.sqrt(p / 15) * np.kron(PAULI[a], PAULI[b]))
    return KrausSet(tuple(ops), f"depolarizing2({p:g})")


def pauli_channel(px: float, py: float, pz: float) -> KrausSet:
    px, py, pz = (_prob(v, n) for v, n in ((px, "p_X"), (py, "p_Y"), (pz, "p_Z")))
    rest = 1 - px - py - pz
    if rest < -1e-15:
        raise ValueError("Pauli error probabilities sum above 1")
    ops = [math.sqrt(max(rest, 0.0)) * I2, math.sqrt(px) * X, math.sqrt(py) * Y, math.sqrt(pz) * Z]
    return KrausSet(tuple(ops), f"pauli({px:g},{py:g},{pz:g})")


def readout_flip(p: float) -> KrausSet:
    p = _prob(p, "p")
    return KrausSet((math.sqrt(1 - p) * I2, math.sqrt(p) * X), f"readout_flip({p:g})")


_CHANNEL_ARGS = {
    "amplitude": (amplitude_damping, ("a",)),
    "phase": (phase_damping, ("b",)),
    "t1t2": (t1t2_channel, ("T1", "T2", "t")),
    "depolarizing1": (depolarizing1, ("p",)),
    "depolarizing2": (depolarizing2, ("p",)),
    "pauli": (pauli_channel, ("px", "py", "pz")),
    "readout_flip": (readout_flip, ("p",)),
}


def build_channel(spec) -> KrausSet:
    """Build a channel from ``{"type": name, **params}`` or ``(name, *params)``.

    Names: ``amplitude(a)``, ``phase(b)``, ``t1t2(T1, T2, t)``,
    ``depolarizing1(p)``, ``depolarizing2(p)``, ``pauli(px, py, pz)``,
    ``readout_flip(p)``.
    """
    if isinstance(spec, KrausSet):
        return spec
    if isinstance(spec, dict):
        spec = dict(spec)
        name = spec.pop("type", None)
        if name not in _CHANNEL_ARGS:
            raise ValueError(f"unknown channel type {name!r}")
        fn, names = _CHANNEL_ARGS[name]
        extra = set(spec) - set(names)
        missing = [n for n in names if n not in spec and n not in ("px", "py", "pz")]
        if extra or missing:
            raise ValueError(f"{name} channel takes parameters {names}, got {sorted(spec)}")
        if name == "pauli":
            return fn(spec.get("px", 0.0), spec.get("py", 0.0), spec.get("pz", 0.0))
        return fn(*(spec[n] for n in names))
    name, *args = spec
    if name not in _CHANNEL_ARGS:
        raise ValueError(f"unknown channel type {name!r}")
    return _CHANNEL_ARGS[name][0](*args)


def _choose(weights: np.ndarray, rng: np.random.Generator) -> int:
    u = rng.random() * weights.sum()
    idx = int(np.searchsorted(np.cumsum(weights), u, side="right"))
    return min(idx, len(weights) - 1)


def apply_channel_stochastic(state: StateVector, kraus: KrausSet, targets, rng: np.random.Generator) -> StateVector:
    """One stochastic Kraus branch on ``targets`` (first listed = most significant)."""
    targets = tuple(targets)
    if kraus.dim != 2 ** len(targets):
        raise ValueError(f"{kraus.label} acts on {kraus.n_qubits} qubit(s), got targets {targets}")
    if kraus.is_mixed_unitary:
        weights, unitaries = kraus._mixture
        alpha = _choose(weights, rng)
        u = unitaries[alpha]
        if np.abs(u - np.eye(kraus.dim)).max() < 1e-15:
            return state
        return apply_matrix(state, u, targets)
    rho = reduced_density_matrix(state, targets)
    probs = np.array([np.trace(k.conj().T @ k @ rho).real for k in kraus.operators])
    total = probs.sum()
    if abs(total - 1) > 1e-9 or (probs < -1e-9).any():
        raise ConsistencyError(f"{kraus.label}: branch probabilities sum to {total!r}")
    probs = np.clip(probs, 0, None)
    alpha = _choose(probs, rng)
    return apply_matrix(state, kraus.operators[alpha] / math.sqrt(probs[alpha]), targets)


# ---------------------------------------------------------------- angle errors


@dataclass(frozen=True)
class AngleError:
    theta_c: float = 0.0
    sigma_m: float = 0.0
    sigma_nm: float = 0.0

    def __post_init__(self):
        if self.sigma_m < 0 or self.sigma_nm < 0:
            raise ValueError("angle-error standard deviations must be >= 0")

    @property
    def is_zero(self) -> bool:
        return self.theta_c == 0 and self.sigma_m == 0 and self.sigma_nm == 0


# angle names per kind, in parameter order
PARAM_NAMES = {
    "U": ("theta", "phi", "lam"),
    "R": ("theta", "phi"),
    "RX": ("theta",),
    "RY": ("theta",),
    "RZ": ("theta",),
    "RXX": ("theta",),
    "RZZ": ("theta",),
    "CX": (),
}


@dataclass
class ShotContext:
    """Per-trajectory cache of non-Markovian angle offsets."""

    non_markov: dict = field(default_factory=dict)

    def offset(self, key, sigma: float, rng: np.random.Generator) -> float:
        if key not in self.non_markov:
            self.non_markov[key] = sigma * rng.standard_normal()
        return self.non_markov[key]

    def clear(self):
        self.non_markov.clear()


def perturb_angles(instr: Instruction, model: "NoiseModel", ctx: ShotContext, rng: np.random.Generator) -> Instruction:
    """Replace each configured angle by ``theta + theta_c + theta_m + theta_nm``.

    ``theta_m`` is fresh on every application; ``theta_nm`` is drawn once per
    ``(kind, qubits, angle)`` and reused until ``ctx`` is cleared.
    """
    gn = model.gates.get(instr.kind)
    if gn is None or not gn.angle_errors:
        return instr
    params = list(instr.params)
    for idx, err in gn.angle_errors.items():
        delta = err.theta_c
        if err.sigma_m:
            delta += err.sigma_m * rng.standard_normal()
        if err.sigma_nm:
            delta += ctx.offset((instr.kind, instr.qubits, idx), err.sigma_nm, rng)
        params[idx] += delta
    return Instruction(instr.kind, instr.qubits, tuple(params), instr.clbits)


# ---------------------------------------------------------------- noise model

_AXIS = {"x": rx_matrix, "y": ry_matrix, "z": rz_matrix}


@dataclass
class GateNoise:
    channels: tuple = ()
    angle_errors: dict = field(default_factory=dict)  # param index -> AngleError
    coherent: tuple = ()  # fixed 2x2 unitaries applied to every target after the gate


_ANGLE_ERR_SCHEMA = {
    "type": "object",
    "properties": {k: {"type": "number"} for k in ("theta_c", "sigma_m", "sigma_nm")},
    "additionalProperties": False,
}

_CHANNEL_SCHEMA = {
    "type": "object",
    "properties": {
        "type": {"enum": sorted(_CHANNEL_ARGS)},
        **{p: {"type": "number"} for p in ("a", "b", "T1", "T2", "t", "p", "px", "py", "pz")},
    },
    "required": ["type"],
    "additionalProperties": False,
}

_PROB_OR_MAP = {
    "oneOf": [
        {"type": "number", "minimum": 0, "maximum": 1},
        {
            "type": "object",
            "patternProperties": {r"^\d+$": {"type": "number", "minimum": 0, "maximum": 1}},
            "additionalProperties": False,
        },
    ]
}

NOISE_SCHEMA = {
    "type": "object",
    "properties": {
        "gates": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "properties": {
                    "channel": {"oneOf": [_CHANNEL_SCHEMA, {"type": "array", "items": _CHANNEL_SCHEMA}]},
                    "angle_errors": {
                        "oneOf": [
                            _ANGLE_ERR_SCHEMA,
                            {
                                "type": "object",
                                "propertyNames": {"enum": ["theta", "phi", "lam"]},
                                "additionalProperties": _ANGLE_ERR_SCHEMA,
                            },
                        ]
                    },
                    "coherent": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "properties": {"axis": {"enum": ["x", "y", "z"]}, "angle": {"type": "number"}},
                            "required": ["axis", "angle"],
                            "additionalProperties": False,
                        },
                    },
                },
                "additionalProperties": False,
            },
        },
        "qubits": {
            "type": "object",
            "patternProperties": {
                r"^\d+$": {
                    "type": "object",
                    "properties": {"T1": {"type": "number", "exclusiveMinimum": 0},
                                   "T2": {"type": "number", "exclusiveMinimum": 0}},
                    "required": ["T1", "T2"],
                    "additionalProperties": False,
                }
            },
            "additionalProperties": False,
        },
        "durations": {"type": "object", "additionalProperties": {"type": "number", "minimum": 0}},
        "spam": {
            "type": "object",
            "properties": {"prep": _PROB_OR_MAP, "readout": _PROB_OR_MAP},
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}

_KIND_ALIASES = {"u": "U", "u3": "U", "cx": "CX", "r": "R", "rx": "RX", "ry": "RY", "rz": "RZ",
                 "rxx": "RXX", "rzz": "RZZ"}


def _kind(name: str) -> str:
    kind = _KIND_ALIASES.get(name, name)
    if kind not in UNITARY_KINDS:
        raise NoiseSchemaError(f"unknown gate kind {name!r}")
    return kind


def _per_qubit(value) -> tuple[float, dict]:
    if value is None:
        return 0.0, {}
    if isinstance(value, dict):
        return 0.0, {int(k): float(v) for k, v in value.items()}
    return float(value), {}


class NoiseModel:
    """Immutable noise configuration shared by all trajectories.

    Parameters
    ----------
    gates : dict
        kind -> :class:`GateNoise`.
    relaxation : dict
        qubit -> ``(T1, T2)`` in microseconds.
    durations : dict
        kind -> gate duration in microseconds; with ``relaxation`` this adds a
        ``t1t2`` channel on every target after the gate.
    prep, readout : float or dict
        bit-flip probabilities after initialisation / on the read-out bit,
        either global or per qubit.
    """

    def __init__(self, gates=None, relaxation=None, durations=None, prep=0.0, readout=0.0):
        self.gates = {_kind(k): v for k, v in (gates or {}).items()}
        self.relaxation = {int(q): (float(a), float(b)) for q, (a, b) in (relaxation or {}).items()}
        self.durations = {_kind(k): float(v) for k, v in (durations or {}).items()}
        self.prep_default, self.prep = _per_qubit(prep)
        self.readout_default, self.readout_p = _per_qubit(readout)
        for kind, gn in self.gates.items():
            arity = 2 if kind in ("CX", "RXX", "RZZ") else 1
            for ch in gn.channels:
                if ch.n_qubits > arity:
                    raise NoiseSchemaError(f"{ch.label} is a two-qubit channel attached to one-qubit gate {kind}")
            for idx in gn.angle_errors:
                if idx >= len(PARAM_NAMES[kind]):
                    raise NoiseSchemaError(f"{kind} has no angle #{idx}")
        for q, (t1, t2) in self.relaxation.items():
            try:
                dephasing_time(t1, t2)
            except ValueError as exc:
                raise NoiseSchemaError(f"qubit {q}: {exc}") from None
        for p in [self.prep_default, self.readout_default, *self.prep.values(), *self.readout_p.values()]:
            if not 0 <= p <= 1:
                raise NoiseSchemaError(f"SPAM probability {p} outside [0, 1]")
        self._relax_cache: dict = {}

    # -- construction helpers
    @classmethod
    def depolarizing(cls, p1: float = 0.0, p2: float = 0.0, **kwargs) -> "NoiseModel":
        """Depolarizing channel after every one-qubit (``p1``) and two-qubit (``p2``) gate."""
        gates = {}
        for kind in UNITARY_KINDS:
            two = kind in ("CX", "RXX", "RZZ")
            p = p2 if two else p1
            if p:
                gates[kind] = GateNoise(channels=(depolarizing2(p) if two else depolarizing1(p),))
        return cls(gates=gates, **kwargs)

    @classmethod
    def from_dict(cls, data: dict) -> "NoiseModel":
        try:
            jsonschema.validate(data, NOISE_SCHEMA)
        except jsonschema.ValidationError as exc:
            path = "/".join(str(p) for p in exc.absolute_path)
            raise NoiseSchemaError(f"noise config invalid at '{path}': {exc.message}") from None
        gates = {}
        try:
            for name, cfg in data.get("gates", {}).items():
                kind = _kind(name)
                specs = cfg.get("channel", [])
                if isinstance(specs, dict):
                    specs = [specs]
                channels = tuple(build_channel(s) for s in specs)
                angle_errors = {}
                ae = cfg.get("angle_errors")
                if ae:
                    if set(ae) <= {"theta_c", "sigma_m", "sigma_nm"}:
                        ae = {"theta": ae}
                    for pname, e in ae.items():
                        if pname not in PARAM_NAMES[kind]:
                            raise NoiseSchemaError(f"{name} has no angle {pname!r}")
                        err = AngleError(**e)
                        if not err.is_zero:
                            angle_errors[PARAM_NAMES[kind].index(pname)] = err
                coherent = tuple(_AXIS[c["axis"]](c["angle"]) for c in cfg.get("coherent", []))
                gates[kind] = GateNoise(channels, angle_errors, coherent)
        except (ValueError, TypeError) as exc:
            if isinstance(exc, NoiseSchemaError):
                raise
            raise NoiseSchemaError(str(exc)) from None
        relaxation = {int(q): (v["T1"], v["T2"]) for q, v in data.get("qubits", {}).items()}
        spam = data.get("spam", {})
        return cls(gates, relaxation, data.get("durations", {}), spam.get("prep"), spam.get("readout"))

    @classmethod
    def from_json(cls, path) -> "NoiseModel":
        with open(path, encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise NoiseSchemaError(f"noise config is not valid JSON: {exc}") from None
        return cls.from_dict(data)

    # -- queries
    def is_trivial(self) -> bool:
        has_gate_noise = any(g.channels or g.angle_errors or g.coherent for g in self.gates.values())
        has_relax = bool(self.relaxation) and any(v > 0 for v in self.durations.values())
        has_spam = bool(self.prep_default or self.readout_default
                        or any(self.prep.values()) or any(self.readout_p.values()))
        return not (has_gate_noise or has_relax or has_spam)

    def relaxation_channel(self, q: int, kind: str):
        """Cached ``t1t2`` channel for qubit ``q`` idling through a ``kind`` gate, or None."""
        key = (q, kind)
        if key not in self._relax_cache:
            t = self.durations.get(kind, 0.0)
            if q in self.relaxation and t > 0:
                self._relax_cache[key] = t1t2_channel(*self.relaxation[q], t)
            else:
                self._relax_cache[key] = None
        return self._relax_cache[key]
