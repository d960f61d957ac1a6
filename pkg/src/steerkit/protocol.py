"""Key-authentication (QKA) and private-comparison (QPC) protocol simulation.

Every party behavior is reduced to POVM effects ``E[claimed_axis, announced_bit]``
on that party's qubit, so honest, lying, lazy and misaligned parties all go
through the same joint-distribution code. Random draws come from named
substreams of one seed so transcripts are reproducible bit for bit.
"""

from __future__ import annotations

import json
import math
import warnings
import zlib
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

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
    named_state,
    triad_vectors,
)

PROTOCOL_FRAME = FrameAngle(math.pi / 2, 0.0)
DEFAULT_THRESHOLD = 2.9
MAX_STDERR = 0.05
PROB_FLOOR = 1e-14

_I2 = np.eye(2, dtype=np.complex128)
# sign of the Bloch component along each canonical axis for outcome 0
_CANON_SIGN = np.array(
    [np.sign(bloch_vector(CANONICAL_TRIAD.projector(t, 0))[t]) for t in range(3)]
)
_PAULI_X = np.array([[1, 1], [1, -1]], dtype=np.complex128).T / math.sqrt(2)  # columns |+>, |->


def substream(seed: int, name: str) -> np.random.Generator:
    """Independent generator for one named role (party, protocol step, ...)."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(zlib.crc32(name.encode()),)))


# party behaviors


def pauli_to_triad(frame: FrameAngle) -> tuple[int, int, int]:
    """Triad axis best aligned with each lab Pauli axis (exact at the protocol frame)."""
    vecs = triad_vectors(frame.theta, frame.phi)
    dirs = np.array([bloch_vector(np.outer(vecs[i, 0], vecs[i, 0].conj())) for i in range(3)])
    return tuple(int(np.argmax(np.abs(dirs[:, p]))) for p in range(3))


@dataclass(frozen=True)
class PartyBehavior:
    kind: str = "honest"
    axis_map: tuple[int, int, int] = (0, 1, 2)
    bit: int = 0
    offset: tuple[float, float] = (0.0, 0.0)

    KINDS = ("honest", "basis-liar", "fixed-outcome", "misaligned")

    def __post_init__(self) -> None:
        if self.kind not in self.KINDS:
            raise StateValidationError(f"unknown behavior {self.kind!r}")
        if len(self.axis_map) != 3:
            raise StateValidationError("axis map must assign a measured axis to x, y and z")
        if any(a not in (0, 1, 2) for a in self.axis_map):
            raise StateValidationError("axis map values must be axes x, y or z")
        if self.bit not in (0, 1):
            raise StateValidationError("fixed outcome must be 0 or 1")

    @classmethod
    def parse(cls, text: str, frame: FrameAngle | None = None) -> "PartyBehavior":
        """Parse a behavior string.

        ``honest``, ``fixed:1``, ``misaligned:dtheta,dphi``,
        ``liar:x=z[,...]`` with lab Pauli names (claimed=measured) mapped onto
        the triad of ``frame`` (default the protocol frame), or
        ``triad-liar:x=z`` with rotated-triad labels used directly.
        """
        kind, _, arg = text.strip().partition(":")
        kind = kind.lower()
        if kind == "honest" and not arg:
            return cls()
        if kind in ("liar", "basis-liar", "triad-liar"):
            pauli = kind != "triad-liar"
            to_triad = pauli_to_triad(frame or PROTOCOL_FRAME) if pauli else (0, 1, 2)
            if not arg:
                raise StateValidationError("a liar needs at least one claimed=measured pair")
            amap = [0, 1, 2]
            for part in filter(None, arg.split(",")):
                claimed, sep, measured = part.partition("=")
                if not sep:
                    raise StateValidationError(f"liar entries look like claimed=measured, got {part!r}")
                amap[to_triad[axis_index(claimed.strip())]] = to_triad[axis_index(measured.strip())]
            return cls("basis-liar", tuple(amap))
        if kind in ("fixed", "fixed-outcome"):
            if arg not in ("0", "1"):
                raise StateValidationError("fixed-outcome needs a bit, e.g. fixed:0")
            return cls("fixed-outcome", bit=int(arg))
        if kind == "misaligned":
            try:
                dt, dp = (float(v) for v in arg.split(","))
            except ValueError:
                raise StateValidationError("misaligned needs two radians, e.g. misaligned:0.1,0") from None
            return cls("misaligned", offset=(dt, dp))
        raise StateValidationError(f"cannot parse behavior {text!r}")

    def describe(self) -> str:
        if self.kind == "basis-liar":
            pairs = [f"{AXES[c]}={AXES[m]}" for c, m in enumerate(self.axis_map) if c != m]
            return "triad-liar:" + ",".join(pairs)
        if self.kind == "fixed-outcome":
            return f"fixed:{self.bit}"
        if self.kind == "misaligned":
            return f"misaligned:{self.offset[0]!r},{self.offset[1]!r}"
        return "honest"

    def effects(self, frame: FrameAngle) -> np.ndarray:
        """POVM elements ``[claimed_axis, announced, 2, 2]``."""
        out = np.zeros((3, 2, 2, 2), dtype=np.complex128)
        if self.kind == "fixed-outcome":
            out[:, self.bit] = _I2
            return out
        theta, phi = frame.theta, frame.phi
        if self.kind == "misaligned":
            theta, phi = theta + self.offset[0], phi + self.offset[1]
        vecs = triad_vectors(theta, phi)
        for claimed in range(3):
            measured = self.axis_map[claimed] if self.kind == "basis-liar" else claimed
            for b in range(2):
                v = vecs[measured, b]
                out[claimed, b] = np.outer(v, v.conj())
        return out


HONEST = PartyBehavior()


def _alice_operators(rho, eff_b, eff_c) -> np.ndarray:
    """Unnormalized Alice operators ``[i, b, c, 2, 2]`` for announced outcomes."""
    r = rho.reshape(2, 2, 2, 2, 2, 2)
    return np.einsum("ibnm,icpq,amqAnp->ibcaA", eff_b, eff_c, r, optimize=True)


def _joint_table(sigma: np.ndarray, alice_basis: np.ndarray) -> np.ndarray:
    """p(b, c, a) from Alice operators ``[..., b, c, 2, 2]`` and basis vectors ``[a, 2]``."""
    p = np.einsum("am,...mn,an->...a", alice_basis.conj(), sigma, alice_basis).real
    p = np.where(p < PROB_FLOOR, 0.0, p)
    return p


def _coherence_sum(sigma: np.ndarray, axes: Sequence[int]) -> float:
    total = 0.0
    for i in axes:
        for b in range(2):
            for c in range(2):
                r = bloch_vector(sigma[i, b, c])
                u, v = [t for t in range(3) if t != i]
                total += math.hypot(r[u], r[v])
    return total


# entropies and key rate


def conditional_entropy(joint) -> float:
    """H(X|Y) in bits for a table ``joint[x, y]``."""
    p = np.asarray(joint, dtype=float)
    if p.ndim != 2 or not np.all(np.isfinite(p)) or np.any(p < 0):
        raise StateValidationError("joint table must be a finite nonnegative 2-d array")
    if abs(p.sum() - 1.0) > 1e-9:
        raise StateValidationError(f"joint table sums to {p.sum()!r}, not 1")
    py = p.sum(axis=0)
    h = 0.0
    for y in range(p.shape[1]):
        if py[y] <= 0:
            continue
        for x in range(p.shape[0]):
            if p[x, y] > 0:
                h -= p[x, y] * math.log2(p[x, y] / py[y])
    return max(h, 0.0) + 0.0


@dataclass(frozen=True)
class KeyRateReport:
    h_k: float
    h_kprime: float
    v: float
    uncertainty_floor: float
    r_min: float
    basis_k: str
    basis_kprime: str
    identical_bases: bool = False
    notes: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "H_k_given_bc": self.h_k,
            "H_kprime_given_bc": self.h_kprime,
            "v": self.v,
            "uncertainty_floor": self.uncertainty_floor,
            "r_min": self.r_min,
            "basis_k": self.basis_k,
            "basis_kprime": self.basis_kprime,
            "identical_bases": self.identical_bases,
            "notes": list(self.notes),
        }


V_NOTE = (
    "v is the largest squared overlap between eigenvectors of the two bases and "
    "lies in (0, 1]; for mutually unbiased qubit bases v = 1/2, so a quoted value "
    "v = 2 is not admissible and is not used"
)


def _basis_vectors(basis) -> tuple[str, np.ndarray]:
    if isinstance(basis, (str, int, np.integer)):
        idx = axis_index(basis)
        return AXES[idx], np.array(CANONICAL_TRIAD.basis(idx))
    vecs = np.asarray(basis, dtype=np.complex128)
    if vecs.shape != (2, 2):
        raise StateValidationError("a basis is two qubit vectors")
    return "custom", vecs


def key_rate_bound(joint_k, joint_kprime, basis_k="z", basis_kprime="x") -> KeyRateReport:
    """Lower bound r_min = log2(1/v) - H(k|bc) - H(k'|bc); may be negative."""
    name_k, vk = _basis_vectors(basis_k)
    name_kp, vkp = _basis_vectors(basis_kprime)
    overlaps = np.abs(vk.conj() @ vkp.T) ** 2
    # strip roundoff so MUB overlaps land exactly on 1/2
    v = round(float(overlaps.max()), 12)
    if not 0 < v <= 1:
        raise StateValidationError(f"overlap {v!r} outside (0, 1]")
    floor = math.log2(1.0 / v)
    h_k = conditional_entropy(joint_k)
    h_kp = conditional_entropy(joint_kprime)
    identical = v >= 1.0
    notes = [V_NOTE]
    if identical:
        notes.append("identical bases: uncertainty floor is 0, no key can be certified")
    return KeyRateReport(
        h_k, h_kp, v, floor, floor - h_k - h_kp, name_k, name_kp, identical, tuple(notes)
    )


# QKA


@dataclass(frozen=True)
class QkaRound:
    index: int
    axis: str
    b: int
    c: int
    alice_axis: str
    a: int
    alice_action: str  # "probe" (sampled) or "key-record" (exact)


@dataclass(frozen=True, eq=False)
class Transcript:
    """Columnar per-round record; iterate for :class:`QkaRound` objects."""

    axis: np.ndarray
    b: np.ndarray
    c: np.ndarray
    alice_axis: np.ndarray
    a: np.ndarray
    mode: str

    def __len__(self) -> int:
        return int(self.axis.size)

    def __iter__(self) -> Iterator[QkaRound]:
        action = "probe" if self.mode == "sampled" else "key-record"
        for n in range(len(self)):
            yield QkaRound(
                n, AXES[self.axis[n]], int(self.b[n]), int(self.c[n]),
                AXES[self.alice_axis[n]], int(self.a[n]), action,
            )

    def to_jsonl(self) -> str:
        lines = []
        for r in self:
            lines.append(
                json.dumps(
                    {
                        "index": r.index,
                        "axis": r.axis,
                        "b": r.b,
                        "c": r.c,
                        "alice_axis": r.alice_axis,
                        "a": r.a,
                        "claimed_axes": {"bob": r.axis, "charlie": r.axis},
                    },
                    separators=(",", ":"),
                )
            )
        return "\n".join(lines) + ("\n" if lines else "")


@dataclass(frozen=True)
class KeyMaterial:
    role: str
    bits: tuple[int, ...]
    partner_bits: tuple[int, ...]
    description: str

    @property
    def mismatches(self) -> int:
        return sum(x != y for x, y in zip(self.bits, self.partner_bits))

    def to_dict(self) -> dict:
        return {
            "role": self.role,
            "description": self.description,
            "length": len(self.bits),
            "mismatches": self.mismatches,
            "bits": "".join(map(str, self.bits)),
        }


@dataclass(frozen=True, eq=False)
class QkaResult:
    transcript: Transcript
    lhs_estimate: float
    stderr: float
    authenticated: bool
    threshold: float
    key: KeyMaterial
    key_rate: KeyRateReport
    empty_cells: tuple[tuple[str, int, int], ...] = ()
    config: dict = field(default_factory=dict)

    @property
    def key_bits(self) -> tuple[int, ...]:
        return self.key.bits

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "lhs_estimate": self.lhs_estimate,
            "stderr": self.stderr,
            "threshold": self.threshold,
            "authenticated": self.authenticated,
            "key_role": self.key.role,
            "key": self.key.to_dict(),
            "r_min": self.key_rate.r_min,
            "key_rate": self.key_rate.to_dict(),
            "empty_cells": [list(c) for c in self.empty_cells],
        }


class _Model:
    """Quantum joint statistics of one protocol configuration."""

    def __init__(self, state, bob: PartyBehavior, charlie: PartyBehavior, frame: FrameAngle):
        rho = as_density(state)
        if rho.dim != 8:
            raise StateValidationError("protocol source must be a three-qubit state")
        self.rho = rho.entries
        self.sigma = _alice_operators(self.rho, bob.effects(frame), charlie.effects(frame))
        # p[i, t, b, c, a]: Alice measures canonical axis t
        self.table = np.stack(
            [_joint_table(self.sigma, CANONICAL_TRIAD.vectors[t]) for t in range(3)], axis=1
        )
        honest = _alice_operators(self.rho, HONEST.effects(frame), HONEST.effects(frame))
        self.honest_table = np.stack(
            [_joint_table(honest, CANONICAL_TRIAD.vectors[t]) for t in range(3)], axis=1
        )

    def exact_lhs(self, axes: Sequence[int] = (0, 1, 2)) -> float:
        return _coherence_sum(self.sigma, axes)

    def key_source_axis(self, alice_axis: int) -> int:
        """Bob/Charlie axis whose honest outcomes best determine Alice's ``alice_axis`` outcome."""
        ents = []
        for i in range(3):
            joint = self.honest_table[i, alice_axis].reshape(4, 2).T
            ents.append(conditional_entropy(joint / joint.sum()))
        return int(np.argmin(ents))

    def joint_alice_vs_bc(self, i: int, t: int) -> np.ndarray:
        joint = self.table[i, t].reshape(4, 2).T  # [a, 2b + c]
        return joint / joint.sum()


def _sample_outcomes(table: np.ndarray, i: np.ndarray, t: np.ndarray, rng) -> np.ndarray:
    cdf = np.cumsum(table.reshape(3, 3, 8), axis=-1)
    u = rng.random(i.size)
    idx = (u[:, None] >= cdf[i, t][:, :7]).sum(axis=1)
    return idx  # b * 4 + c * 2 + a


def estimate_from_counts(counts: np.ndarray, axes: Sequence[int] = (0, 1, 2)):
    """Tomographic s1-diag estimate from ``counts[..., i, t, b, c, a]``.

    Returns ``(lhs, empty)`` where ``empty[..., i, b, c]`` flags cells that
    occurred but lack a probe along one of the two axes their coherence needs.
    """
    counts = np.asarray(counts, dtype=float)
    n_i = counts.sum(axis=(-4, -3, -2, -1))  # [..., i]
    cell = counts.sum(axis=(-4, -1))  # [..., i, b, c]
    m = counts.sum(axis=-1)  # [..., i, t, b, c]
    diff = counts[..., 0] - counts[..., 1]
    with np.errstate(invalid="ignore", divide="ignore"):
        r = np.where(m > 0, diff / m, 0.0) * _CANON_SIGN[:, None, None]
        p = np.where(n_i[..., None, None] > 0, cell / n_i[..., None, None], 0.0)
    r = np.moveaxis(r, -3, -1)  # [..., i, b, c, t]
    norm = np.linalg.norm(r, axis=-1, keepdims=True)
    r = np.where(norm > 1.0, r / np.maximum(norm, 1e-300), r)
    present = np.moveaxis(m > 0, -3, -1)
    lhs = np.zeros(counts.shape[:-5])
    empty = np.zeros(counts.shape[:-5] + (3, 2, 2), dtype=bool)
    for i in axes:
        u, v = [t for t in range(3) if t != i]
        coh = np.hypot(r[..., i, :, :, u], r[..., i, :, :, v])
        missing = (cell[..., i, :, :] > 0) & ~(present[..., i, :, :, u] & present[..., i, :, :, v])
        empty[..., i, :, :] = missing
        lhs = lhs + np.where(missing, 0.0, p[..., i, :, :] * coh).sum(axis=(-2, -1))
    return lhs, empty


def _bootstrap_stderr(counts: np.ndarray, rng, n_boot: int, axes=(0, 1, 2)) -> float:
    flat = counts.ravel()
    n = int(flat.sum())
    if n == 0 or n_boot < 2:
        return 0.0
    sims = rng.multinomial(n, flat / n, size=n_boot).reshape((n_boot,) + counts.shape)
    vals, _ = estimate_from_counts(sims, axes)
    return float(np.std(vals, ddof=1))


def _resolve_state(state) -> DensityMatrix:
    if state is None:
        return as_density(named_state("ghz"))
    return as_density(state)


def run_qka(
    rounds: int,
    state: StateVector | DensityMatrix | None = None,
    bob: PartyBehavior = HONEST,
    charlie: PartyBehavior = HONEST,
    mode: str = "exact",
    seed: int = 0,
    threshold: float = DEFAULT_THRESHOLD,
    frame: FrameAngle = PROTOCOL_FRAME,
    key_role: str = "escrow",
    bootstrap: int = 200,
    max_stderr: float = MAX_STDERR,
) -> QkaResult:
    """Simulate one key-authentication run.

    Each round draws a shared axis for Bob and Charlie. In ``exact`` mode
    Alice's s1-diag value is computed from the analytic conditional states
    implied by the parties' actual behavior, and she measures the key axis
    for that round. In ``sampled`` mode she measures a random canonical axis
    every round and reconstructs each conditional cell tomographically.
    """
    if rounds < 1:
        raise StateValidationError("rounds must be at least 1")
    if mode not in ("exact", "sampled"):
        raise StateValidationError(f"mode must be 'exact' or 'sampled', got {mode!r}")
    if key_role not in ("escrow", "collective"):
        raise StateValidationError(f"key role must be 'escrow' or 'collective', got {key_role!r}")
    if mode == "sampled" and rounds <= 1000:
        warnings.warn("sampled mode with <= 1000 rounds gives unreliable estimates", stacklevel=2)
    rho = _resolve_state(state)
    model = _Model(rho, bob, charlie, frame)
    key_axis = [min(range(3), key=lambda t: _alice_entropy(model, i, t)) for i in range(3)]

    axis = substream(seed, "protocol").integers(0, 3, size=rounds)
    if mode == "sampled":
        alice_axis = substream(seed, "alice").integers(0, 3, size=rounds)
    else:
        alice_axis = np.array(key_axis)[axis]
    outcome = _sample_outcomes(model.table, axis, alice_axis, substream(seed, "source"))
    b, c, a = outcome // 4, (outcome // 2) % 2, outcome % 2
    transcript = Transcript(axis, b, c, alice_axis, a, mode)

    empty: list[tuple[str, int, int]] = []
    if mode == "exact":
        lhs, stderr = model.exact_lhs(), 0.0
        authenticated = lhs >= threshold
    else:
        counts = np.zeros((3, 3, 2, 2, 2))
        np.add.at(counts, (axis, alice_axis, b, c, a), 1)
        lhs_arr, empty_mask = estimate_from_counts(counts)
        lhs = float(lhs_arr)
        stderr = _bootstrap_stderr(counts, substream(seed, "bootstrap"), bootstrap)
        empty = [(AXES[i], int(bb), int(cc)) for i, bb, cc in zip(*np.nonzero(empty_mask))]
        if empty:
            warnings.warn(f"{len(empty)} conditional cells lack tomography data and were excluded", stacklevel=2)
        authenticated = lhs >= threshold and stderr < max_stderr

    key_rate = _key_rate(model, transcript, mode)
    key = _extract_key(model, transcript, key_role, key_axis)
    config = {
        "rounds": rounds,
        "state": rho.label or "custom",
        "bob": bob.describe(),
        "charlie": charlie.describe(),
        "mode": mode,
        "seed": seed,
        "threshold": threshold,
        "frame": {"theta": round(frame.theta, 6), "phi": round(frame.phi, 6)},
        "key_role": key_role,
        "bootstrap": bootstrap,
        "max_stderr": max_stderr,
    }
    return QkaResult(
        transcript, float(lhs), stderr, bool(authenticated), threshold, key, key_rate,
        tuple(empty), config,
    )


def _alice_entropy(model: _Model, i: int, t: int) -> float:
    joint = model.honest_table[i, t].reshape(4, 2).T
    return conditional_entropy(joint / joint.sum())


def _key_rate(model: _Model, tr: Transcript, mode: str, k: int = 2, kp: int = 0) -> KeyRateReport:
    tables = []
    for alice in (k, kp):
        src = model.key_source_axis(alice)
        if mode == "exact":
            tables.append(model.joint_alice_vs_bc(src, alice))
        else:
            sel = (tr.axis == src) & (tr.alice_axis == alice)
            joint = np.zeros((2, 4))
            np.add.at(joint, (tr.a[sel], 2 * tr.b[sel] + tr.c[sel]), 1)
            tables.append(joint / joint.sum() if joint.sum() else np.full((2, 4), 0.125))
    return key_rate_bound(tables[0], tables[1], AXES[k], AXES[kp])


def _extract_key(model: _Model, tr: Transcript, role: str, key_axis: list[int]) -> KeyMaterial:
    if role == "escrow":
        src = model.key_source_axis(2)
        sel = tr.axis == src
        return KeyMaterial(
            "escrow", tuple(int(x) for x in tr.b[sel]), tuple(int(x) for x in tr.c[sel]),
            f"Bob/Charlie outcomes on axis {AXES[src]} rounds (partner bits are Charlie's)",
        )
    # collective: Alice's key-axis outcome, rebuilt by Bob and Charlie from (b, c) jointly
    escrow_axis = model.key_source_axis(2)
    sel = (tr.alice_axis == np.array(key_axis)[tr.axis]) & (tr.axis != escrow_axis)
    guess = model.honest_table.argmax(axis=-1)  # most likely a given (i, t, b, c)
    rebuilt = guess[tr.axis[sel], tr.alice_axis[sel], tr.b[sel], tr.c[sel]]
    return KeyMaterial(
        "collective", tuple(int(x) for x in tr.a[sel]), tuple(int(x) for x in rebuilt),
        "Alice's outcomes; partner bits are the Bob+Charlie reconstruction from (b, c)",
    )


# QPC


@dataclass(frozen=True)
class QpcResult:
    verdicts: tuple[str, ...] | None
    overall: str
    authenticated: bool
    check_lhs: float
    check_stderr: float
    check_threshold: float
    total: int
    checked: int
    compared: int
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "authenticated": self.authenticated,
            "check_lhs": self.check_lhs,
            "check_stderr": self.check_stderr,
            "check_threshold": self.check_threshold,
            "overall": self.overall,
            "verdicts": list(self.verdicts) if self.verdicts is not None else None,
            "unequal_positions": (
                [n for n, v in enumerate(self.verdicts) if v == "unequal"]
                if self.verdicts is not None else None
            ),
            "L": self.total,
            "l": self.checked,
            "compared": self.compared,
        }


def hex_to_bits(text: str) -> tuple[int, ...]:
    text = text.strip().lower().removeprefix("0x")
    if not text or any(ch not in "0123456789abcdef" for ch in text):
        raise StateValidationError(f"not a hexadecimal string: {text!r}")
    return tuple(int(bit) for ch in text for bit in format(int(ch, 16), "04b"))


def run_qpc(
    secret_b: Sequence[int],
    secret_c: Sequence[int],
    total: int,
    check: int | None = None,
    bob: PartyBehavior = HONEST,
    charlie: PartyBehavior = HONEST,
    seed: int = 0,
    mode: str = "exact",
    threshold: float = DEFAULT_THRESHOLD,
    bootstrap: int = 200,
    max_stderr: float = MAX_STDERR,
    bias: float = 3.0,
) -> QpcResult:
    """Private equality comparison of two bit strings over ``total`` GHZ states.

    ``check // 2`` rounds are designated Pauli-z and all of them, plus an
    equal share of Pauli-x rounds, form the authentication subsequence. Bob
    and Charlie announce ``x_B ^ s_B`` and ``x_C ^ s_C`` on the comparison
    rounds; Alice's own Pauli-x outcome closes the parity. Without an explicit
    ``check`` the z-designated share is ``total / (1 + bias)`` so x rounds
    outnumber z rounds ``bias`` to one.
    """
    if bias <= 0:
        raise StateValidationError("bias must be positive")
    if check is None:
        check = 2 * int(round(total / (1.0 + bias)))
    sb, sc = tuple(int(x) for x in secret_b), tuple(int(x) for x in secret_c)
    if len(sb) != len(sc):
        raise StateValidationError("secrets must have equal length")
    if any(x not in (0, 1) for x in sb + sc):
        raise StateValidationError("secrets must be bit sequences")
    if check < 2:
        raise StateValidationError("the check subsequence needs at least 2 rounds")
    if check >= total:
        raise StateValidationError("check count l must be smaller than L")
    if total < check + len(sb):
        raise StateValidationError("L must cover the check rounds plus every secret bit")
    if mode not in ("exact", "sampled"):
        raise StateValidationError(f"mode must be 'exact' or 'sampled', got {mode!r}")

    ghz = as_density(named_state("ghz"))
    model = _Model(ghz, bob, charlie, PROTOCOL_FRAME)
    # at the protocol frame triad x is the Pauli-z basis and triad z the Pauli-x basis
    ax_z, ax_x = 0, 2
    n_z = check // 2
    n_xc = check - n_z

    order = substream(seed, "designation").permutation(total)
    z_pos = np.sort(order[:n_z])
    x_pos = order[n_z:]
    x_check = np.sort(x_pos[:n_xc])
    compare_pos = np.sort(x_pos[n_xc:])[: len(sb)]
    check_axes = np.zeros(total, dtype=np.int64)
    check_axes[z_pos] = ax_z
    check_axes[x_check] = ax_x
    check_idx = np.sort(np.concatenate([z_pos, x_check]))

    axes_used = (ax_z, ax_x)
    check_thr = threshold * len(axes_used) / 3.0
    if mode == "exact":
        check_lhs, check_se = model.exact_lhs(axes_used), 0.0
        authenticated = check_lhs >= check_thr
    else:
        i = check_axes[check_idx]
        t = substream(seed, "alice").integers(0, 3, size=i.size)
        out = _sample_outcomes(model.table, i, t, substream(seed, "source-check"))
        counts = np.zeros((3, 3, 2, 2, 2))
        np.add.at(counts, (i, t, out // 4, (out // 2) % 2, out % 2), 1)
        check_lhs = float(estimate_from_counts(counts, axes_used)[0])
        check_se = _bootstrap_stderr(counts, substream(seed, "bootstrap"), bootstrap, axes_used)
        authenticated = check_lhs >= check_thr and check_se < max_stderr

    # comparison rounds: Bob and Charlie on their claimed Pauli-x axis, Alice in Pauli x
    cmp_table = _joint_table(model.sigma[ax_x], _PAULI_X.T)  # [b, c, a]
    cdf = np.cumsum(cmp_table.ravel())
    u = substream(seed, "source-compare").random(len(sb))
    idx = (u[:, None] >= cdf[None, :7]).sum(axis=1)
    xb, xc, xa = idx // 4, (idx // 2) % 2, idx % 2
    rb = xb ^ np.array(sb, dtype=np.int64)
    rc = xc ^ np.array(sc, dtype=np.int64)
    parity = xa ^ rb ^ rc
    config = {
        "bob": bob.describe(),
        "charlie": charlie.describe(),
        "seed": seed,
        "mode": mode,
        "threshold": threshold,
        "L": total,
        "l": check,
        "z_designated": int(n_z),
        "x_check": int(n_xc),
        "secret_bits": len(sb),
        "bias": bias,
    }
    if authenticated:
        verdicts = tuple("equal" if p == 0 else "unequal" for p in parity)
        overall = "equal" if all(v == "equal" for v in verdicts) else "unequal"
    else:
        verdicts, overall = None, "withheld"
    return QpcResult(
        verdicts, overall, bool(authenticated), float(check_lhs), check_se, check_thr,
        total, check, int(compare_pos.size), config,
    )
