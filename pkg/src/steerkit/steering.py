"""Coherence-based steering inequalities for three qubits.

Alice always evaluates l1-norm coherence in her canonical Pauli bases; Bob
and Charlie measure in rotated triads. Conditional ensembles here are built
by explicit projector arithmetic and serve as the reference path for the
batched kernels in :mod:`steerkit.kernels`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Mapping, Sequence

import numpy as np

from ._catalog import DIAG_MASK, IDS, OFF_MASK, PAIR_MASKS
from .core import (
    AXES,
    CANONICAL_TRIAD,
    DensityMatrix,
    FrameAngle,
    StateValidationError,
    StateVector,
    as_density,
    axis_index,
    bloch_vector,
    density_from_bloch,
    ptrace_array,
    rotated_pauli_triad,
)

EPSILON = math.sqrt(6.0)
ZERO_PROB = 1e-14

_I2 = np.eye(2, dtype=np.complex128)


@dataclass(frozen=True)
class InequalitySpec:
    id: str
    scope: str  # "pair", "bob-only" or "charlie-only"
    multiplier: int
    rule: str
    epsilon: float = EPSILON

    @property
    def bound(self) -> float:
        return self.multiplier * self.epsilon

    @property
    def set_name(self) -> str:
        return "I" if self.scope == "pair" else "II"

    def admits(self, *idx: int) -> bool:
        return _RULES[self.id](*idx)

    def admitted(self) -> list[tuple[int, ...]]:
        n = 3 if self.scope == "pair" else 2
        return [t for t in product(range(3), repeat=n) if self.admits(*t)]

    @property
    def theoretical_max(self) -> float:
        """Number of admitted index tuples; each contributes at most 1."""
        return float(len(self.admitted()))


_RULES = {
    "s1-bob-offdiag": lambda i, j, k: i != k,
    "s1-diag": lambda i, j, k: i == j == k,
    "s1-charlie-offdiag": lambda i, j, k: j != k,
    "s1-ij-eq-neqk": lambda i, j, k: i == j != k,
    "s1-jk-eq-neqi": lambda i, j, k: i != j == k,
    "s1-ik-eq-neqj": lambda i, j, k: i == k != j,
    "s2b-diag": lambda i, k: i == k,
    "s2b-off": lambda i, k: i != k,
    "s2c-diag": lambda j, k: j == k,
    "s2c-off": lambda j, k: j != k,
}

CATALOG: dict[str, InequalitySpec] = {
    spec.id: spec
    for spec in (
        InequalitySpec("s1-bob-offdiag", "pair", 6, "i != k, j free"),
        InequalitySpec("s1-diag", "pair", 1, "i = j = k"),
        InequalitySpec("s1-charlie-offdiag", "pair", 6, "i free, j != k"),
        InequalitySpec("s1-ij-eq-neqk", "pair", 2, "i = j != k"),
        InequalitySpec("s1-jk-eq-neqi", "pair", 2, "i != j = k"),
        InequalitySpec("s1-ik-eq-neqj", "pair", 2, "i = k != j"),
        InequalitySpec("s2b-diag", "bob-only", 1, "i = k"),
        InequalitySpec("s2b-off", "bob-only", 2, "i != k"),
        InequalitySpec("s2c-diag", "charlie-only", 1, "j = k"),
        InequalitySpec("s2c-off", "charlie-only", 2, "j != k"),
    )
}
assert tuple(CATALOG) == IDS

SET_I = tuple(i for i in IDS if CATALOG[i].scope == "pair")
SET_II = tuple(i for i in IDS if CATALOG[i].scope != "pair")


def get_spec(spec: InequalitySpec | str) -> InequalitySpec:
    if isinstance(spec, InequalitySpec):
        return spec
    key = str(spec).lower().replace("_", "-")
    if key not in CATALOG:
        raise StateValidationError(f"unknown inequality {spec!r}; choose from {list(IDS)}")
    return CATALOG[key]


# coherence


def l1_coherence(rho: DensityMatrix | np.ndarray, basis: Sequence[np.ndarray]) -> float:
    """Sum of absolute off-diagonal entries of ``rho`` written in ``basis``."""
    mat = rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho)
    u = np.column_stack(basis)
    if not np.allclose(u.conj().T @ u, np.eye(u.shape[1]), atol=1e-9):
        raise StateValidationError("basis is not orthonormal")
    m = u.conj().T @ mat @ u
    return float(np.sum(np.abs(m)) - np.sum(np.abs(np.diag(m))))


def canonical_coherence(rho: DensityMatrix | np.ndarray, axis: str | int) -> float:
    return l1_coherence(rho, CANONICAL_TRIAD.basis(axis))


# conditional ensembles


@dataclass(frozen=True)
class Branch:
    outcome: tuple[int, ...]
    probability: float
    state: DensityMatrix
    defined: bool = True


@dataclass(frozen=True)
class ConditionalEnsemble:
    conditioning: dict
    branches: tuple[Branch, ...]

    def __post_init__(self) -> None:
        total = sum(b.probability for b in self.branches)
        if abs(total - 1.0) > 1e-9:
            raise StateValidationError(f"branch probabilities sum to {total!r}")

    def branch(self, *outcome: int) -> Branch:
        for b in self.branches:
            if b.outcome == tuple(outcome):
                return b
        raise KeyError(outcome)

    def weighted_coherence(self, axis: str | int) -> float:
        """Sum over branches of p * C_axis(state); undefined branches count zero."""
        return sum(
            b.probability * canonical_coherence(b.state, axis)
            for b in self.branches
            if b.defined
        )


def _branch(outcome: tuple[int, ...], sigma: np.ndarray) -> Branch:
    p = float(np.real(np.trace(sigma)))
    if p <= ZERO_PROB:
        return Branch(outcome, 0.0, DensityMatrix(_I2 / 2), defined=False)
    s = sigma / p
    return Branch(outcome, p, DensityMatrix(0.5 * (s + s.conj().T)))


def _kron3(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    return np.kron(np.kron(a, b), c)


def _normalize_probs(branches: list[Branch]) -> tuple[Branch, ...]:
    # absorb roundoff so the ensemble invariant holds exactly
    total = sum(b.probability for b in branches)
    return tuple(
        Branch(b.outcome, b.probability / total, b.state, b.defined) for b in branches
    )


def conditional_ensemble_pair(
    state: DensityMatrix | StateVector,
    i: str | int,
    j: str | int,
    frame_b: FrameAngle,
    frame_c: FrameAngle | None = None,
) -> ConditionalEnsemble:
    """Alice's conditional states after Bob measures axis ``i`` and Charlie axis ``j``."""
    rho = as_density(state)
    if rho.dim != 8:
        raise StateValidationError("expected a three-qubit state")
    frame_c = frame_b if frame_c is None else frame_c
    tb, tc = rotated_pauli_triad(frame_b), rotated_pauli_triad(frame_c)
    branches = []
    for b, c in product((0, 1), repeat=2):
        proj = _kron3(_I2, tb.projector(i, b), tc.projector(j, c))
        sigma = ptrace_array(proj @ rho.entries @ proj, (0,))
        branches.append(_branch((b, c), sigma))
    cond = {
        "parties": "BC",
        "axes": (AXES[axis_index(i)], AXES[axis_index(j)]),
        "frames": (frame_b, frame_c),
    }
    return ConditionalEnsemble(cond, _normalize_probs(branches))


def conditional_ensemble_single(
    state: DensityMatrix | StateVector,
    party: str,
    i: str | int,
    frame: FrameAngle,
) -> ConditionalEnsemble:
    """Alice's conditional states when only ``party`` ('B' or 'C') reports an outcome."""
    rho = as_density(state)
    if rho.dim != 8:
        raise StateValidationError("expected a three-qubit state")
    if party not in ("B", "C"):
        raise StateValidationError(f"party must be 'B' or 'C', got {party!r}")
    triad = rotated_pauli_triad(frame)
    branches = []
    for b in (0, 1):
        p = triad.projector(i, b)
        proj = _kron3(_I2, p, _I2) if party == "B" else _kron3(_I2, _I2, p)
        sigma = ptrace_array(proj @ rho.entries @ proj, (0,))
        branches.append(_branch((b,), sigma))
    cond = {"parties": party, "axes": (AXES[axis_index(i)],), "frames": (frame,)}
    return ConditionalEnsemble(cond, _normalize_probs(branches))


# evaluation


@dataclass(frozen=True)
class ViolationReport:
    inequality: str
    lhs: float
    bound: float
    violated: bool
    frames: dict[str, FrameAngle]
    state_label: str | None = None

    def to_dict(self) -> dict:
        return {
            "inequality": self.inequality,
            "lhs": self.lhs,
            "bound": self.bound,
            "violated": self.violated,
            "frames": {
                k: {"theta": round(f.theta, 6), "phi": round(f.phi, 6)}
                for k, f in self.frames.items()
            },
            "state": self.state_label,
        }


def lhs_from_ensembles(
    spec: InequalitySpec | str,
    pair: Mapping[tuple[int, int], ConditionalEnsemble] | None = None,
    single: Mapping[int, ConditionalEnsemble] | None = None,
) -> float:
    """Assemble an inequality's left-hand side from per-axis conditional ensembles."""
    spec = get_spec(spec)
    total = 0.0
    if spec.scope == "pair":
        for i, j, k in spec.admitted():
            total += pair[(i, j)].weighted_coherence(k)
    else:
        for i, k in spec.admitted():
            total += single[i].weighted_coherence(k)
    return total


def _make_report(spec, lhs, frames, label) -> ViolationReport:
    return ViolationReport(spec.id, lhs, spec.bound, bool(lhs > spec.bound), frames, label)


def evaluate_inequality(
    state: DensityMatrix | StateVector,
    spec: InequalitySpec | str,
    frame_b: FrameAngle,
    frame_c: FrameAngle | None = None,
) -> ViolationReport:
    """Evaluate one catalogued inequality; Charlie shares Bob's frame unless given."""
    spec = get_spec(spec)
    frame_c = frame_b if frame_c is None else frame_c
    label = getattr(state, "label", None)
    if spec.scope == "pair":
        pair = {
            (i, j): conditional_ensemble_pair(state, i, j, frame_b, frame_c)
            for i, j in product(range(3), repeat=2)
        }
        lhs = lhs_from_ensembles(spec, pair=pair)
        frames = {"bob": frame_b, "charlie": frame_c}
    else:
        party, frame = ("B", frame_b) if spec.scope == "bob-only" else ("C", frame_c)
        single = {i: conditional_ensemble_single(state, party, i, frame) for i in range(3)}
        lhs = lhs_from_ensembles(spec, single=single)
        frames = {"bob" if party == "B" else "charlie": frame}
    return _make_report(spec, lhs, frames, label)


# local hidden state models


@dataclass(frozen=True, eq=False)
class LHSEnsemble:
    """Pre-existing hidden states of Alice plus Bob and Charlie's joint response.

    ``response[lam, i, j, b, c]`` is the probability of announcing (b, c)
    when asked for axes (i, j) given hidden variable ``lam``.
    """

    weights: np.ndarray
    hidden_states: tuple[DensityMatrix, ...]
    response: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=float)
        r = np.asarray(self.response, dtype=float)
        if w.ndim != 1 or np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
            raise StateValidationError("weights must form a probability distribution")
        if len(self.hidden_states) != w.size:
            raise StateValidationError("one hidden state per weight is required")
        if any(s.dim != 2 for s in self.hidden_states):
            raise StateValidationError("hidden states must be single-qubit")
        if r.shape != (w.size, 3, 3, 2, 2) or np.any(r < 0):
            raise StateValidationError("response must have shape (n, 3, 3, 2, 2) and be nonnegative")
        if np.max(np.abs(r.sum(axis=(3, 4)) - 1.0)) > 1e-9:
            raise StateValidationError("every response slice must sum to 1 over (b, c)")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "response", r)

    @property
    def size(self) -> int:
        return int(self.weights.size)


def lhs_joint_model(ens: LHSEnsemble, i: str | int, j: str | int) -> ConditionalEnsemble:
    """Conditional ensemble predicted by a hidden-state model for axes (i, j)."""
    i, j = axis_index(i), axis_index(j)
    hidden = np.array([s.entries for s in ens.hidden_states])
    branches = []
    for b, c in product((0, 1), repeat=2):
        w = ens.weights * ens.response[:, i, j, b, c]
        sigma = np.einsum("l,lxy->xy", w, hidden)
        branches.append(_branch((b, c), sigma))
    cond = {"parties": "BC", "axes": (AXES[i], AXES[j]), "model": "lhs"}
    return ConditionalEnsemble(cond, _normalize_probs(branches))


def lhs_single_model(ens: LHSEnsemble, party: str, i: str | int) -> ConditionalEnsemble:
    """Single-party marginal of a hidden-state model.

    The silent party's axis is averaged out, which is itself a valid
    stochastic response of the reporting party alone.
    """
    i = axis_index(i)
    hidden = np.array([s.entries for s in ens.hidden_states])
    if party == "B":
        marg = ens.response[:, i, :, :, :].sum(axis=3).mean(axis=1)  # [lam, b]
    elif party == "C":
        marg = ens.response[:, :, i, :, :].sum(axis=2).mean(axis=1)  # [lam, c]
    else:
        raise StateValidationError(f"party must be 'B' or 'C', got {party!r}")
    branches = []
    for b in (0, 1):
        sigma = np.einsum("l,lxy->xy", ens.weights * marg[:, b], hidden)
        branches.append(_branch((b,), sigma))
    cond = {"parties": party, "axes": (AXES[i],), "model": "lhs"}
    return ConditionalEnsemble(cond, _normalize_probs(branches))


def evaluate_lhs_model(ens: LHSEnsemble, spec: InequalitySpec | str) -> float:
    spec = get_spec(spec)
    if spec.scope == "pair":
        pair = {(i, j): lhs_joint_model(ens, i, j) for i, j in product(range(3), repeat=2)}
        return lhs_from_ensembles(spec, pair=pair)
    party = "B" if spec.scope == "bob-only" else "C"
    return lhs_from_ensembles(spec, single={i: lhs_single_model(ens, party, i) for i in range(3)})


def random_lhs_ensemble(
    rng: np.random.Generator,
    size: int,
    frame_b: FrameAngle | None = None,
    frame_c: FrameAngle | None = None,
) -> LHSEnsemble:
    """Random hidden-state model.

    Responses mix an arbitrary stochastic table with a separable quantum-like
    response (Bob and Charlie each hold a hidden qubit measured in their
    frames), so the frames influence the model when they are given.
    """
    weights = rng.dirichlet(np.ones(size))
    hidden = []
    for _ in range(size):
        r = rng.normal(size=3)
        r *= rng.uniform() ** (1 / 3) / np.linalg.norm(r)
        hidden.append(density_from_bloch(r))
    table = rng.dirichlet(np.ones(4), size=(size, 3, 3)).reshape(size, 3, 3, 2, 2)
    if frame_b is not None:
        frame_c = frame_b if frame_c is None else frame_c
        tb, tc = rotated_pauli_triad(frame_b), rotated_pauli_triad(frame_c)
        mix = rng.uniform(size=size)
        sep = np.empty_like(table)
        for lam in range(size):
            hb = _random_pure(rng)
            hc = _random_pure(rng)
            pb = np.abs(np.einsum("ibm,m->ib", tb.vectors.conj(), hb)) ** 2
            pc = np.abs(np.einsum("jcm,m->jc", tc.vectors.conj(), hc)) ** 2
            sep[lam] = np.einsum("ib,jc->ijbc", pb, pc)
        table = mix[:, None, None, None, None] * table + (1 - mix[:, None, None, None, None]) * sep
        table /= table.sum(axis=(3, 4), keepdims=True)
    return LHSEnsemble(weights, tuple(hidden), table)


def _coherence_triple(sigma: np.ndarray) -> np.ndarray:
    """Weighted coherences p*C_k for unnormalized qubit operators ``[..., 2, 2]``."""
    x = 2 * sigma[..., 0, 1].real
    y = -2 * sigma[..., 0, 1].imag
    z = (sigma[..., 0, 0] - sigma[..., 1, 1]).real
    return np.stack([np.hypot(y, z), np.hypot(x, z), np.hypot(x, y)], axis=-1)


def lhs_model_values(ens: LHSEnsemble) -> np.ndarray:
    """All ten left-hand sides of a hidden-state model, in catalog order."""
    hidden = np.array([s.entries for s in ens.hidden_states])
    sigma = np.einsum("l,lijbc,lxy->ijbcxy", ens.weights, ens.response, hidden)
    q = _coherence_triple(sigma).sum(axis=(2, 3))  # [i, j, k]
    out = [float(np.sum(m * q)) for m in PAIR_MASKS]
    marg_b = ens.response.sum(axis=4).mean(axis=2)  # [lam, i, b]
    marg_c = ens.response.sum(axis=3).mean(axis=1)  # [lam, j, c]
    for marg in (marg_b, marg_c):
        s1 = np.einsum("l,lib,lxy->ibxy", ens.weights, marg, hidden)
        q1 = _coherence_triple(s1).sum(axis=1)  # [i, k]
        out += [float(np.sum(DIAG_MASK * q1)), float(np.sum(OFF_MASK * q1))]
    return np.array(out)


def _random_frame(rng: np.random.Generator) -> FrameAngle:
    return FrameAngle(float(rng.uniform(0, math.pi)), float(rng.uniform(0, 2 * math.pi)))


def lhs_soundness_check(trials: int = 1000, seed: int = 0, frames_per_trial: int = 10) -> dict:
    """Search random hidden-state models for a violation of any inequality.

    Each trial fixes one model (size 1 to 8) and re-evaluates it at
    ``frames_per_trial`` random frame pairs; only the frame-dependent part
    of the response changes between frame pairs.
    """
    if trials < 1 or frames_per_trial < 1:
        raise StateValidationError("trials and frames_per_trial must be positive")
    master = np.random.default_rng(seed)
    bounds = np.array([CATALOG[i].bound for i in IDS])
    violations = []
    worst = 0.0
    for t in range(trials):
        trial_seed = int(master.integers(2**63))
        size = int(master.integers(1, 9))
        for _ in range(frames_per_trial):
            fb, fc = _random_frame(master), _random_frame(master)
            ens = random_lhs_ensemble(np.random.default_rng(trial_seed), size, fb, fc)
            vals = lhs_model_values(ens)
            worst = max(worst, float(np.max(vals / bounds)))
            for i in np.nonzero(vals > bounds)[0]:
                violations.append({"trial": t, "inequality": IDS[i], "lhs": float(vals[i])})
    return {
        "trials": trials,
        "frames_per_trial": frames_per_trial,
        "seed": seed,
        "evaluations": trials * frames_per_trial * len(IDS),
        "violations": len(violations),
        "violation_details": violations,
        "max_lhs_over_bound": worst,
    }


def _random_pure(rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    return v / np.linalg.norm(v)


# entanglement


_SYSY = np.kron(np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]]))


def concurrence(rho: DensityMatrix | StateVector) -> float:
    """Two-qubit concurrence max(0, l1 - l2 - l3 - l4)."""
    rho = as_density(rho)
    if rho.dim != 4:
        raise StateValidationError("concurrence expects a two-qubit state")
    r = rho.entries
    tilde = _SYSY @ r.conj() @ _SYSY
    ev = np.sort(np.abs(np.linalg.eigvals(r @ tilde).real))[::-1]
    lam = np.sqrt(ev)
    return float(min(1.0, max(0.0, lam[0] - lam[1] - lam[2] - lam[3])))


def evaluate_all(
    state: DensityMatrix | StateVector,
    frame_b: FrameAngle,
    frame_c: FrameAngle | None = None,
    ids: Iterable[str] = IDS,
) -> dict[str, ViolationReport]:
    return {i: evaluate_inequality(state, i, frame_b, frame_c) for i in ids}


def alice_bloch(branch: Branch) -> np.ndarray:
    return bloch_vector(branch.state.entries)
