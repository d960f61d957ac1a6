"""Frame optimization, alpha scans, and collective-steerability classification."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from . import kernels
from ._catalog import IDS
from .core import (
    DensityMatrix,
    FrameAngle,
    StateValidationError,
    StateVector,
    as_density,
    generalized_ghz,
    named_state,
    ptrace_array,
)
from .steering import SET_I, SET_II, evaluate_all, get_spec

EQUAL_TOL = 1e-9


@dataclass(frozen=True)
class SearchConfig:
    """Grid-then-simplex search settings.

    ``grid`` points per angle are used when Bob and Charlie share a frame (or
    for a single-party inequality); ``independent_grid`` per angle when their
    frames are searched independently, where a full 64^4 grid is impractical.
    """

    grid: int = 64
    refine_iters: int = 200
    tol: float = 1e-9
    independent_frames: bool = False
    independent_grid: int = 16
    starts: int = 8
    workers: int = 1

    def __post_init__(self) -> None:
        if self.grid < 2 or self.independent_grid < 2:
            raise StateValidationError("grid resolution must be at least 2")
        if self.refine_iters < 0 or self.starts < 1 or self.workers < 1:
            raise StateValidationError("refine_iters >= 0, starts >= 1 and workers >= 1 required")

    def to_dict(self) -> dict:
        return asdict(self)


class _Objective:
    """Kernel-backed lhs for one state, mapping search coordinates to frame rows."""

    def __init__(self, state, spec, independent: bool):
        rho = as_density(state)
        if rho.dim != 8:
            raise StateValidationError("expected a three-qubit state")
        self.rho = rho.entries
        self.rho_ab = ptrace_array(rho.entries, (0, 1))
        self.rho_ac = ptrace_array(rho.entries, (0, 2))
        self.spec = get_spec(spec)
        self.column = IDS.index(self.spec.id)
        self.scope = self.spec.scope
        self.dim = 4 if (self.scope == "pair" and independent) else 2
        self.evaluations = 0

    def frames(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(x)
        z = np.zeros_like(x[:, :2])
        if self.dim == 4:
            return x
        if self.scope == "pair":
            return np.hstack([x, x])
        if self.scope == "bob-only":
            return np.hstack([x, z])
        return np.hstack([z, x])

    def batch(self, x: np.ndarray, workers: int = 1) -> np.ndarray:
        rows = self.frames(x)
        self.evaluations += rows.shape[0]
        if workers == 1 or rows.shape[0] < 4 * workers:
            return kernels.lhs_batch(self.rho, self.rho_ab, self.rho_ac, rows)[:, self.column]
        chunks = np.array_split(rows, workers)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(
                lambda ch: kernels.lhs_batch(self.rho, self.rho_ab, self.rho_ac, ch), chunks
            )
            return np.concatenate(list(parts))[:, self.column]

    def __call__(self, x: np.ndarray) -> float:
        return float(self.batch(np.asarray(x, dtype=float)[None, :])[0])


def frame_grid(n: int, dim: int) -> np.ndarray:
    """Lexicographically ordered grid over (theta, phi) per party."""
    thetas = np.linspace(0.0, math.pi, n)
    phis = 2 * math.pi * np.arange(n) / n
    axes = [thetas, phis] * (dim // 2)
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


@dataclass(frozen=True)
class MaximizeResult:
    inequality: str
    lhs: float
    bound: float
    frame_b: FrameAngle | None
    frame_c: FrameAngle | None
    evaluations: int
    config: SearchConfig

    @property
    def violated(self) -> bool:
        return self.lhs > self.bound

    @property
    def frames(self) -> dict[str, FrameAngle]:
        out = {}
        if self.frame_b is not None:
            out["bob"] = self.frame_b
        if self.frame_c is not None:
            out["charlie"] = self.frame_c
        return out

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
            "evaluations": self.evaluations,
        }


def _refine(obj: _Objective, x0: np.ndarray, step: float, cfg: SearchConfig) -> tuple[np.ndarray, float]:
    if cfg.refine_iters == 0:
        return x0, obj(x0)
    simplex = np.vstack([x0] + [x0 + step * e for e in np.eye(x0.size)])
    res = minimize(
        lambda x: -obj(x),
        x0,
        method="Nelder-Mead",
        options={
            "maxiter": cfg.refine_iters,
            "xatol": cfg.tol,
            "fatol": cfg.tol,
            "initial_simplex": simplex,
        },
    )
    return np.asarray(res.x), -float(res.fun)


def _distinct_top(points: np.ndarray, values: np.ndarray, k: int, min_sep: float) -> list[int]:
    # stable sort keeps lexicographic order among ties
    order = np.argsort(-values, kind="stable")
    picked: list[int] = []
    for idx in order:
        if all(np.linalg.norm(points[idx] - points[p]) > min_sep for p in picked):
            picked.append(int(idx))
            if len(picked) == k:
                break
    return picked


def maximize_violation(
    state: DensityMatrix | StateVector,
    spec,
    config: SearchConfig | None = None,
) -> MaximizeResult:
    """Maximize an inequality's left-hand side over Bob's and Charlie's frames."""
    cfg = config or SearchConfig()
    obj = _Objective(state, spec, cfg.independent_frames)
    n = cfg.independent_grid if obj.dim == 4 else cfg.grid
    grid = frame_grid(n, obj.dim)
    values = obj.batch(grid, cfg.workers)
    best_i = int(np.argmax(values))
    best_x, best_v = grid[best_i], float(values[best_i])

    step = 0.5 * math.pi / (n - 1)
    for idx in _distinct_top(grid, values, cfg.starts, min_sep=1.5 * step):
        x, v = _refine(obj, grid[idx], step, cfg)
        if v > best_v:
            best_x, best_v = x, v
    if cfg.refine_iters:
        x, v = _refine(obj, best_x, 0.1 * step, cfg)
        if v > best_v:
            best_x, best_v = x, v

    fb = fc = None
    if obj.dim == 4:
        fb, fc = FrameAngle.wrap(*best_x[:2]), FrameAngle.wrap(*best_x[2:])
    elif obj.scope == "pair":
        fb = fc = FrameAngle.wrap(*best_x)
    elif obj.scope == "bob-only":
        fb = FrameAngle.wrap(*best_x)
    else:
        fc = FrameAngle.wrap(*best_x)
    return MaximizeResult(obj.spec.id, best_v, obj.spec.bound, fb, fc, obj.evaluations, cfg)


# alpha scans


@dataclass(frozen=True)
class ScanCurve:
    parameter: str
    samples: tuple[tuple[float, float, float], ...]
    policy: str
    inequality: str

    def to_csv(self) -> str:
        lines = [f"{self.parameter},lhs,bound"]
        for a, lhs, bound in self.samples:
            lines.append(f"{a:.9g},{lhs:.9g},{bound:.9g}")
        return "\n".join(lines) + "\n"

    def violation_interval(self) -> tuple[float, float] | None:
        """Bounds of the contiguous run of samples with lhs > bound (None if absent)."""
        hits = [a for a, lhs, bound in self.samples if lhs > bound]
        if not hits:
            return None
        inside = [lhs > bound for a, lhs, bound in self.samples]
        first = inside.index(True)
        last = len(inside) - 1 - inside[::-1].index(True)
        if not all(inside[first : last + 1]):
            raise ValueError("violation region is not contiguous")
        return self.samples[first][0], self.samples[last][0]


def alpha_grid(steps: int, spacing: str = "angle") -> np.ndarray:
    """Amplitude grid on [0, 1].

    ``angle`` spacing puts alpha = sin(t) with t uniform on [0, pi/2]; the
    grid is closed under alpha -> sqrt(1 - alpha^2) and holds 1/sqrt(2) for
    odd ``steps``. ``uniform`` spacing is plain linspace.
    """
    if steps < 2:
        raise StateValidationError("an alpha grid needs at least 2 points")
    if spacing == "uniform":
        return np.linspace(0.0, 1.0, steps)
    if spacing != "angle":
        raise StateValidationError(f"unknown alpha spacing {spacing!r}")
    t = np.linspace(0.0, math.pi / 2, steps)
    grid = np.sin(t)
    grid[0], grid[-1] = 0.0, 1.0
    if steps % 2:
        grid[steps // 2] = 1 / math.sqrt(2)
    return grid


def alpha_scan(
    spec="s1-diag",
    policy: str = "optimized",
    alphas: Sequence[float] | None = None,
    frame: FrameAngle | None = None,
    config: SearchConfig | None = None,
) -> ScanCurve:
    """lhs of ``spec`` along the generalized GHZ family.

    ``policy`` is ``"optimized"`` (frames searched per point) or ``"fixed"``
    (Bob and Charlie both at ``frame``).
    """
    spec = get_spec(spec)
    alphas = alpha_grid(201) if alphas is None else np.asarray(alphas, dtype=float)
    if np.any(alphas < 0) or np.any(alphas > 1):
        raise StateValidationError("alpha grid must lie within [0, 1]")
    if np.any(np.diff(alphas) <= 0):
        raise StateValidationError("alpha grid must be strictly increasing")
    samples = []
    if policy == "fixed":
        if frame is None:
            raise StateValidationError("fixed policy needs a frame")
        for a in alphas:
            state = generalized_ghz(float(a))
            obj = _Objective(state, spec, False)
            lhs = obj(np.array(frame.as_tuple()))
            samples.append((float(a), lhs, spec.bound))
        label = f"fixed(theta={frame.theta:.6f},phi={frame.phi:.6f})"
    elif policy == "optimized":
        for a in alphas:
            res = maximize_violation(generalized_ghz(float(a)), spec, config)
            samples.append((float(a), res.lhs, spec.bound))
        label = "optimized"
    else:
        raise StateValidationError(f"unknown frame policy {policy!r}")
    return ScanCurve("alpha", tuple(samples), label, spec.id)


# classification

LABELS = ("collective-witnessed", "individually-steerable", "both-sets-violated", "inconclusive")


@dataclass(frozen=True)
class ClassificationResult:
    label: str
    results: dict[str, MaximizeResult]
    decoupled: dict[str, dict[str, float]] = field(default_factory=dict)

    @property
    def values(self) -> dict[str, float]:
        return {k: r.lhs for k, r in self.results.items()}

    def set_violated(self, which: str) -> bool:
        ids = SET_I if which == "I" else SET_II
        return any(self.results[i].violated for i in ids)

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "set_I_violated": self.set_violated("I"),
            "set_II_violated": self.set_violated("II"),
            "inequalities": {k: r.to_dict() for k, r in self.results.items()},
            "decoupled_set_I": self.decoupled,
        }


def decoupled_state(state, party: str) -> DensityMatrix:
    """rho_{A,party} tensor rho_{other}, reordered to A, B, C."""
    rho = as_density(state).entries
    if party == "B":
        return DensityMatrix(np.kron(ptrace_array(rho, (0, 1)), ptrace_array(rho, (2,))))
    if party == "C":
        t = np.kron(ptrace_array(rho, (0, 2)), ptrace_array(rho, (1,)))  # order A, C, B
        t = t.reshape((2,) * 6).transpose(0, 2, 1, 3, 5, 4).reshape(8, 8)
        return DensityMatrix(t)
    raise StateValidationError(f"party must be 'B' or 'C', got {party!r}")


def classify_collective(
    state: DensityMatrix | StateVector, config: SearchConfig | None = None
) -> ClassificationResult:
    """Label a state by which inequality sets it violates at optimized frames.

    Set-II violation implies set-I violation (conditioning on an extra
    outcome cannot lower the average coherence), so a set-II violation is
    split further: if replacing the state by rho_{A,X} (x) rho_{rest} for a
    set-II-violating party X reproduces every set-I optimum, all the
    evidence is individual steering by X; otherwise both sets carry
    independent evidence.
    """
    cfg = config or SearchConfig()
    results = {i: maximize_violation(state, i, cfg) for i in IDS}
    set1 = any(results[i].violated for i in SET_I)
    set2 = any(results[i].violated for i in SET_II)
    decoupled: dict[str, dict[str, float]] = {}
    if set1 and not set2:
        label = "collective-witnessed"
    elif not set1 and not set2:
        label = "inconclusive"
    else:
        label = "both-sets-violated"
        for party, ids in (("B", ("s2b-diag", "s2b-off")), ("C", ("s2c-diag", "s2c-off"))):
            if not any(results[i].violated for i in ids):
                continue
            dec = decoupled_state(state, party)
            vals = {i: maximize_violation(dec, i, cfg).lhs for i in SET_I}
            decoupled[party] = vals
            if all(results[i].lhs <= vals[i] + 1e-6 for i in SET_I):
                label = "individually-steerable"
    return ClassificationResult(label, results, decoupled)


# fixed-frame maxima listed for the zero-bipartite-entanglement examples

APPENDIX_B_CASES = (
    ("bell_ab_times_0", math.pi, math.pi),
    ("bell_ac_times_1", math.pi, math.pi),
    ("ghz", math.pi / 2, 0.0),
    ("plus_one_plus", math.pi / 2, math.pi),
    ("bell_ab_times_0", math.pi / 2, 3 * math.pi / 2),
    ("plus_one_plus", 0.0, 3 * math.pi / 2),
)


def appendix_b_check(tol: float = 1e-9) -> list[dict]:
    """Evaluate all ten inequalities at each listed (state, frame) pair.

    Each entry records the values, the inequalities sitting at their
    theoretical maximum, and the inequality closest to its maximum.
    """
    report = []
    for name, theta, phi in APPENDIX_B_CASES:
        state = named_state(name)
        frame = FrameAngle(theta, phi)
        reps = evaluate_all(state, frame)
        at_max = [
            i for i, r in reps.items() if abs(r.lhs - get_spec(i).theoretical_max) <= tol
        ]
        closest = max(IDS, key=lambda i: (reps[i].lhs / get_spec(i).theoretical_max, -IDS.index(i)))
        report.append(
            {
                "state": name,
                "theta": round(theta, 6),
                "phi": round(phi, 6),
                "values": {i: r.lhs for i, r in reps.items()},
                "violated": [i for i, r in reps.items() if r.violated],
                "at_theoretical_max": at_max,
                "closest_to_max": closest,
            }
        )
    return report
