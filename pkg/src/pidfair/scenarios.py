"""Canonical and parameterized joint distributions of ``(Z, Yhat, Y)``.

Single-distribution kinds return one :class:`JointDist`; sweep kinds return a
list of ``(params, JointDist)`` pairs ordered by the swept parameter.

========================  ==================================================
kind                      distribution
========================  ==================================================
``example1``              ``Yhat = Z``, ``Y`` uniform and independent of ``Z``
``example2``              ``Yhat = Y``, ``P(Y = Z) = rho``
``example3``              ``Yhat = Z XNOR Y``, ``Z``, ``Y`` independent uniform
``example4``              ``P(Y = Z) = rho``, ``Yhat`` uniform, independent
``motivational``          ``Z = (z1, z2, z3)``, ``Yhat = (z1, z2, z3 xor N)``,
                          ``Y = (z2, N)``, all bits uniform
``markov_sweep``          ``Z -> Y -> Yhat``: ``P(Y = Z) = rho``, ``Yhat`` is
                          ``Y`` sent through a binary symmetric channel with
                          flip rate ``q`` swept over ``[q_min, q_max]``
``sp_zero_family``        random joints ``P(z) P(yhat) P(y | z, yhat)``, kept
                          when ``I(Z; Yhat) < 1e-8``
``custom``                Dirichlet-random joint of the given alphabet sizes
========================  ==================================================
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .dist import Alphabet, JointDist, mutual_information

SP_ZERO_THRESHOLD = 1e-8


class ScenarioError(ValueError):
    """Unknown scenario kind or parameter out of range."""


def _unit(x):
    return 0.0 <= x <= 1.0


def _count(lo):
    return lambda x: float(x).is_integer() and x >= lo


# kind -> {param: (default, validator, description)}
_PARAMS = {
    "example1": {},
    "example2": {"rho": (0.9, _unit, "P(Y = Z), in [0, 1]")},
    "example3": {},
    "example4": {"rho": (0.9, _unit, "P(Y = Z), in [0, 1]")},
    "motivational": {},
    "markov_sweep": {
        "rho": (0.9, _unit, "P(Y = Z), in [0, 1]"),
        "q_min": (0.5, _unit, "first flip rate, in [0, 1]"),
        "q_max": (1.0, _unit, "last flip rate, in [0, 1]"),
        "steps": (11, _count(1), "number of sweep points, integer >= 1"),
    },
    "sp_zero_family": {
        "samples": (50, _count(1), "number of joints, integer >= 1"),
        "seed": (0, _count(0), "random seed, integer >= 0"),
        "nz": (2, _count(2), "|Z|, integer >= 2"),
        "nyhat": (2, _count(2), "|Yhat|, integer >= 2"),
        "ny": (2, _count(2), "|Y|, integer >= 2"),
    },
    "custom": {
        "seed": (0, _count(0), "random seed, integer >= 0"),
        "nz": (2, _count(1), "|Z|, integer >= 1"),
        "nyhat": (2, _count(1), "|Yhat|, integer >= 1"),
        "ny": (2, _count(1), "|Y|, integer >= 1"),
        "concentration": (1.0, lambda x: x > 0, "Dirichlet concentration, > 0"),
    },
}

KINDS = tuple(_PARAMS)
SWEEP_KINDS = ("markov_sweep", "sp_zero_family")


@dataclass(frozen=True)
class ScenarioSpec:
    """Scenario kind plus named numeric parameters; missing ones take defaults."""

    kind: str
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in _PARAMS:
            raise ScenarioError(f"unknown scenario kind {self.kind!r}; expected one of {KINDS}")
        allowed = _PARAMS[self.kind]
        resolved = {}
        for name, value in self.params.items():
            if name not in allowed:
                known = ", ".join(allowed) or "none"
                raise ScenarioError(f"{self.kind} has no parameter {name!r} (accepted: {known})")
            try:
                value = float(value)
            except (TypeError, ValueError):
                raise ScenarioError(f"parameter {name!r} must be numeric, got {value!r}") from None
            _, check, desc = allowed[name]
            if not (math.isfinite(value) and check(value)):
                raise ScenarioError(f"parameter {name!r}={value!r} out of range: {desc}")
            resolved[name] = value
        for name, (default, _, _) in allowed.items():
            resolved.setdefault(name, float(default))
        object.__setattr__(self, "params", MappingProxyType(resolved))

    @property
    def is_sweep(self) -> bool:
        return self.kind in SWEEP_KINDS

    @staticmethod
    def describe(kind: str) -> dict[str, str]:
        return {name: desc for name, (_, _, desc) in _PARAMS[kind].items()}


def _binary(probs) -> JointDist:
    return JointDist.from_array(np.asarray(probs, dtype=float))


def _correlated(rho: float) -> np.ndarray:
    """``P(z, y)`` for uniform binary ``Z`` with ``P(Y = Z) = rho``."""
    return 0.5 * np.array([[rho, 1 - rho], [1 - rho, rho]])


def example1() -> JointDist:
    p = np.zeros((2, 2, 2))
    for z, y in itertools.product(range(2), repeat=2):
        p[z, z, y] = 0.25
    return _binary(p)


def example2(rho: float = 0.9) -> JointDist:
    pzy = _correlated(rho)
    p = np.zeros((2, 2, 2))
    for z, y in itertools.product(range(2), repeat=2):
        p[z, y, y] = pzy[z, y]
    return _binary(p)


def example3() -> JointDist:
    p = np.zeros((2, 2, 2))
    for z, y in itertools.product(range(2), repeat=2):
        p[z, int(z == y), y] = 0.25
    return _binary(p)


def example4(rho: float = 0.9) -> JointDist:
    pzy = _correlated(rho)
    p = 0.5 * pzy[:, None, :] * np.ones((1, 2, 1))
    return _binary(p)


def motivational() -> JointDist:
    """8 x 8 x 4 construction carrying one bit of each PID term except ``Uni_B``."""
    p = np.zeros((8, 8, 4))
    for z1, z2, z3, n in itertools.product(range(2), repeat=4):
        z = 4 * z1 + 2 * z2 + z3
        a = 4 * z1 + 2 * z2 + (z3 ^ n)
        b = 2 * z2 + n
        p[z, a, b] += 1 / 16
    bits = lambda k: Alphabet(tuple(format(i, f"0{k}b") for i in range(2**k)))  # noqa: E731
    return JointDist((bits(3), bits(3), bits(2)), p)


def markov(rho: float, q: float) -> JointDist:
    """``Z -> Y -> Yhat`` with ``P(Y = Z) = rho`` and flip rate ``q`` from ``Y`` to ``Yhat``."""
    pzy = _correlated(rho)
    channel = np.array([[1 - q, q], [q, 1 - q]])  # channel[y, yhat]
    p = pzy[:, None, :] * channel.T[None, :, :]
    return _binary(p)


def random_joint(rng: np.random.Generator, shape=(2, 2, 2), concentration: float = 1.0) -> JointDist:
    """Dirichlet-distributed joint over ``shape``."""
    p = rng.dirichlet(np.full(int(np.prod(shape)), concentration)).reshape(shape)
    return JointDist.from_array(p / p.sum())


def degraded_joint(rng: np.random.Generator, shape=(2, 2, 2), concentration: float = 1.0) -> JointDist:
    """Random joint where ``Yhat`` is a garbling of ``Y`` (``Z -> Y -> Yhat``).

    ``Y`` is then Blackwell sufficient for ``Yhat`` with respect to ``Z``.
    """
    nz, na, nb = shape
    pzy = rng.dirichlet(np.full(nz * nb, concentration)).reshape(nz, nb)
    channel = rng.dirichlet(np.full(na, concentration), size=nb)  # channel[y, yhat]
    p = pzy[:, None, :] * channel.T[None, :, :]
    return JointDist.from_array(p / p.sum())


def sp_zero_joint(rng: np.random.Generator, shape=(2, 2, 2), concentration: float = 1.0) -> JointDist:
    """Random joint with ``Z`` independent of ``Yhat``."""
    nz, na, nb = shape
    p_z = rng.dirichlet(np.full(nz, concentration))
    p_a = rng.dirichlet(np.full(na, concentration))
    p_y = rng.dirichlet(np.full(nb, concentration), size=(nz, na))
    p = p_z[:, None, None] * p_a[None, :, None] * p_y
    return JointDist.from_array(p / p.sum())


def generate_scenario(spec: ScenarioSpec):
    """Materialize ``spec``; see the module table for the available kinds."""
    prm = spec.params
    kind = spec.kind
    if kind == "example1":
        return example1()
    if kind == "example2":
        return example2(prm["rho"])
    if kind == "example3":
        return example3()
    if kind == "example4":
        return example4(prm["rho"])
    if kind == "motivational":
        return motivational()
    if kind == "custom":
        rng = np.random.default_rng(int(prm["seed"]))
        shape = (int(prm["nz"]), int(prm["nyhat"]), int(prm["ny"]))
        return random_joint(rng, shape, prm["concentration"])
    if kind == "markov_sweep":
        steps = int(prm["steps"])
        qs = np.linspace(prm["q_min"], prm["q_max"], steps) if steps > 1 else np.array([prm["q_min"]])
        return [({"rho": prm["rho"], "q": float(q)}, markov(prm["rho"], float(q))) for q in qs]
    # sp_zero_family
    rng = np.random.default_rng(int(prm["seed"]))
    shape = (int(prm["nz"]), int(prm["nyhat"]), int(prm["ny"]))
    out = []
    while len(out) < int(prm["samples"]):
        dist = sp_zero_joint(rng, shape)
        if mutual_information(dist, "z", "yhat") < SP_ZERO_THRESHOLD:
            out.append(({"sample": float(len(out))}, dist))
    return out
