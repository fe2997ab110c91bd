"""Discrete three-variable joint distributions and plug-in information measures.

A :class:`JointDist` holds a dense probability tensor indexed ``(z, yhat, y)``:
sensitive attribute, model prediction, true label. Every information quantity
here is returned in bits.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

VARIABLES = ("z", "yhat", "y")
AXIS = {name: i for i, name in enumerate(VARIABLES)}

SUM_TOL = 1e-12
CLAMP_TOL = 1e-12


class EstimationError(ValueError):
    """Raised when a distribution cannot be estimated from the given records."""


def _axis(var: str) -> int:
    try:
        return AXIS[var]
    except KeyError:
        raise ValueError(f"unknown variable {var!r}; expected one of {VARIABLES}") from None


@dataclass(frozen=True)
class Alphabet:
    """Ordered set of distinct string labels, sorted lexicographically."""

    symbols: tuple[str, ...]

    def __post_init__(self):
        symbols = tuple(str(s) for s in self.symbols)
        if not symbols:
            raise ValueError("alphabet needs at least one symbol")
        if len(set(symbols)) != len(symbols):
            raise ValueError(f"duplicate labels in alphabet {symbols}")
        if list(symbols) != sorted(symbols):
            raise ValueError(f"alphabet labels must be in lexicographic order: {symbols}")
        object.__setattr__(self, "symbols", symbols)

    @classmethod
    def from_labels(cls, labels: Iterable[str]) -> "Alphabet":
        return cls(tuple(sorted({str(s) for s in labels})))

    @classmethod
    def range(cls, n: int) -> "Alphabet":
        # zero-padded so that lexicographic and numeric order agree
        width = len(str(n - 1))
        return cls(tuple(str(i).zfill(width) for i in range(n)))

    def __len__(self):
        return len(self.symbols)

    def index(self, label: str) -> int:
        return self.symbols.index(label)


@dataclass(frozen=True, eq=False)
class JointDist:
    """Joint pmf of ``(Z, Yhat, Y)`` over labelled finite alphabets.

    ``probs`` is stored as a read-only float array of shape
    ``(len(alphabets[0]), len(alphabets[1]), len(alphabets[2]))``.
    """

    alphabets: tuple[Alphabet, Alphabet, Alphabet]
    probs: np.ndarray

    def __post_init__(self):
        probs = np.array(self.probs, dtype=float)
        if len(self.alphabets) != 3:
            raise ValueError("JointDist needs exactly three alphabets")
        shape = tuple(len(a) for a in self.alphabets)
        if probs.shape != shape:
            raise ValueError(f"probability tensor shape {probs.shape} does not match alphabets {shape}")
        if not np.all(np.isfinite(probs)) or probs.min() < 0:
            raise ValueError("probabilities must be finite and nonnegative")
        total = probs.sum()
        if abs(total - 1.0) > SUM_TOL:
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        probs.setflags(write=False)
        object.__setattr__(self, "alphabets", tuple(self.alphabets))
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_array(cls, probs, alphabets: Sequence[Alphabet] | None = None, normalize: bool = False) -> "JointDist":
        """Build from a 3-D array; default labels are ``0..n-1``."""
        probs = np.asarray(probs, dtype=float)
        if probs.ndim != 3:
            raise ValueError("expected a 3-D probability tensor")
        if normalize:
            probs = probs / probs.sum()
        if alphabets is None:
            alphabets = tuple(Alphabet.range(n) for n in probs.shape)
        return cls(tuple(alphabets), probs)

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.probs.shape

    def prob(self, z: str, yhat: str, y: str) -> float:
        za, ha, ya = self.alphabets
        return float(self.probs[za.index(z), ha.index(yhat), ya.index(y)])

    def __eq__(self, other):
        if not isinstance(other, JointDist):
            return NotImplemented
        return self.alphabets == other.alphabets and np.array_equal(self.probs, other.probs)

    __hash__ = None


@dataclass(frozen=True)
class SampleRecord:
    z: str
    y: str
    yhat: str

    def __post_init__(self):
        for name in ("z", "y", "yhat"):
            value = getattr(self, name)
            if value is None or str(value) == "":
                raise ValueError(f"empty label for {name!r}")
            object.__setattr__(self, name, str(value))


def from_samples(
    records: Sequence[SampleRecord],
    smoothing: float = 0.0,
    alphabets: Sequence[Alphabet] | None = None,
) -> JointDist:
    """Plug-in estimate with additive smoothing.

    ``probs[z, yhat, y] = (count + alpha) / (n + alpha * |Z||Yhat||Y|)``.
    Alphabets are the sorted distinct labels per column unless given.
    """
    if smoothing < 0:
        raise ValueError("smoothing must be nonnegative")
    records = list(records)
    if not records and smoothing == 0:
        raise EstimationError("no records and no smoothing: distribution is undefined")
    if alphabets is None:
        if not records:
            raise EstimationError("alphabets must be given when there are no records")
        alphabets = (
            Alphabet.from_labels(r.z for r in records),
            Alphabet.from_labels(r.yhat for r in records),
            Alphabet.from_labels(r.y for r in records),
        )
    alphabets = tuple(alphabets)
    counts = np.zeros(tuple(len(a) for a in alphabets))
    lookup = [{s: i for i, s in enumerate(a.symbols)} for a in alphabets]
    for key, n in Counter((r.z, r.yhat, r.y) for r in records).items():
        try:
            idx = tuple(lookup[k][label] for k, label in enumerate(key))
        except KeyError as exc:
            raise EstimationError(f"label {exc.args[0]!r} not in the supplied alphabet") from None
        counts[idx] = n
    denom = len(records) + smoothing * counts.size
    return JointDist(alphabets, (counts + smoothing) / denom)


def marginal(dist: JointDist, keep: Iterable[str]) -> np.ndarray:
    """Marginal over the kept variables; axes stay in ``(z, yhat, y)`` order."""
    axes = sorted({_axis(v) for v in keep})
    if not axes or len(axes) == 3:
        raise ValueError("keep must be a nonempty proper subset of the variables")
    drop = tuple(i for i in range(3) if i not in axes)
    return dist.probs.sum(axis=drop)


def entropy(p) -> float:
    """Shannon entropy in bits of a probability tensor of any shape."""
    p = np.asarray(p, dtype=float).ravel()
    p = p[p > 0]
    return max(float(-np.sum(p * np.log2(p))), 0.0)


def _clamp(value: float) -> float:
    if -CLAMP_TOL < value < 0:
        return 0.0
    return value


def mutual_information(dist: JointDist, a: str, b: str) -> float:
    """I(A;B) = H(A) + H(B) - H(A,B)."""
    if _axis(a) == _axis(b):
        raise ValueError("mutual information needs two distinct variables")
    return _clamp(entropy(marginal(dist, [a])) + entropy(marginal(dist, [b])) - entropy(marginal(dist, [a, b])))


def conditional_mutual_information(dist: JointDist, a: str, b: str, given: str) -> float:
    """I(A;B|C) = H(A,C) + H(B,C) - H(A,B,C) - H(C)."""
    if len({_axis(a), _axis(b), _axis(given)}) != 3:
        raise ValueError("a, b and given must be distinct variables")
    value = (
        entropy(marginal(dist, [a, given]))
        + entropy(marginal(dist, [b, given]))
        - entropy(dist.probs)
        - entropy(marginal(dist, [given]))
    )
    return _clamp(value)


def joint_mutual_information(dist: JointDist, target: str = "z") -> float:
    """I(target; other two variables jointly)."""
    t = _axis(target)
    others = [v for v in VARIABLES if AXIS[v] != t]
    return _clamp(entropy(marginal(dist, [target])) + entropy(marginal(dist, others)) - entropy(dist.probs))


def cmi_array(q: np.ndarray) -> float:
    """I(X;Y|W) in bits for a 3-D array indexed ``(x, y, w)``, without clamping."""
    q = np.asarray(q, dtype=float)
    return (
        entropy(q.sum(axis=1)) + entropy(q.sum(axis=0)) - entropy(q) - entropy(q.sum(axis=(0, 1)))
    )


def mi_array(p: np.ndarray) -> float:
    """I(X;Y) in bits for a 2-D joint array, without clamping."""
    p = np.asarray(p, dtype=float)
    return entropy(p.sum(axis=1)) + entropy(p.sum(axis=0)) - entropy(p)


def reorder(dist: JointDist, target: str, first: str) -> np.ndarray:
    """Probability tensor transposed to ``(target, first, remaining)`` axes."""
    t, f = _axis(target), _axis(first)
    if t == f:
        raise ValueError("target and source must differ")
    rest = 3 - t - f
    return np.transpose(dist.probs, (t, f, rest))
