"""Three-qubit state representation and manipulation.

Qubit ordering is A (most significant), B, C (least significant), so the
amplitude index of ``|abc>`` is ``4a + 2b + c``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

VALIDATION_TOL = 1e-9
AXES = ("x", "y", "z")
PARTIES = ("A", "B", "C")


class StateValidationError(ValueError):
    """Raised when a state, frame, or state file violates its invariants."""


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=np.complex128, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized pure state of one to three qubits."""

    amplitudes: np.ndarray
    label: str | None = None

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes)
        if amps.ndim != 1:
            raise StateValidationError("amplitudes must be a flat sequence")
        if not _is_power_of_two(amps.size) or amps.size > 8 or amps.size < 2:
            raise StateValidationError(
                f"dim must be a power of two between 2 and 8, got {amps.size}"
            )
        if not np.all(np.isfinite(amps)):
            raise StateValidationError("amplitudes must be finite")
        norm2 = float(np.sum(np.abs(amps) ** 2))
        if abs(norm2 - 1.0) > VALIDATION_TOL:
            raise StateValidationError(
                f"state is not normalized: squared norm {norm2!r} differs from 1"
            )
        object.__setattr__(self, "amplitudes", _frozen(amps))

    @property
    def dim(self) -> int:
        return int(self.amplitudes.size)

    @property
    def n_qubits(self) -> int:
        return self.dim.bit_length() - 1

    @classmethod
    def normalized(cls, amplitudes: Iterable[complex], label: str | None = None) -> "StateVector":
        amps = np.asarray(list(amplitudes), dtype=np.complex128)
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise StateValidationError("cannot normalize the zero vector")
        return cls(amps / norm, label)

    def density(self) -> "DensityMatrix":
        return density_from_vector(self)

    def __repr__(self) -> str:
        name = f" {self.label!r}" if self.label else ""
        return f"StateVector{name}(dim={self.dim})"


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Mixed state: Hermitian, positive semidefinite, unit trace."""

    entries: np.ndarray
    label: str | None = None

    def __post_init__(self) -> None:
        rho = np.asarray(self.entries)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise StateValidationError("density matrix must be square")
        if not _is_power_of_two(rho.shape[0]) or not 2 <= rho.shape[0] <= 8:
            raise StateValidationError(f"unsupported dimension {rho.shape[0]}")
        if not np.all(np.isfinite(rho)):
            raise StateValidationError("density matrix entries must be finite")
        if np.max(np.abs(rho - rho.conj().T)) > VALIDATION_TOL:
            raise StateValidationError("density matrix is not Hermitian")
        tr = np.trace(rho)
        if abs(tr - 1.0) > VALIDATION_TOL:
            raise StateValidationError(f"density matrix trace {tr.real!r} differs from 1")
        if np.min(np.linalg.eigvalsh(rho)) < -VALIDATION_TOL:
            raise StateValidationError("density matrix has a negative eigenvalue")
        object.__setattr__(self, "entries", _frozen(rho))

    @property
    def dim(self) -> int:
        return int(self.entries.shape[0])

    @property
    def n_qubits(self) -> int:
        return self.dim.bit_length() - 1

    def purity(self) -> float:
        return float(np.real(np.trace(self.entries @ self.entries)))

    def __repr__(self) -> str:
        name = f" {self.label!r}" if self.label else ""
        return f"DensityMatrix{name}(dim={self.dim})"


@dataclass(frozen=True)
class FrameAngle:
    """Orientation (theta, phi) of a measurement triad relative to the canonical Pauli frame."""

    theta: float
    phi: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.theta) and math.isfinite(self.phi)):
            raise StateValidationError("frame angles must be finite")
        if not 0.0 <= self.theta <= math.pi:
            raise StateValidationError(f"theta={self.theta!r} outside [0, pi]")
        if not 0.0 <= self.phi < 2 * math.pi:
            raise StateValidationError(f"phi={self.phi!r} outside [0, 2pi)")

    @classmethod
    def wrap(cls, theta: float, phi: float) -> "FrameAngle":
        """Map arbitrary real angles onto the canonical range.

        (2pi - theta, phi + pi) describes the same triad with outcome labels
        swapped, which leaves every outcome-summed quantity unchanged.
        """
        theta = math.fmod(theta, 2 * math.pi)
        if theta < 0:
            theta += 2 * math.pi
        if theta > math.pi:
            theta = 2 * math.pi - theta
            phi += math.pi
        phi = math.fmod(phi, 2 * math.pi)
        if phi < 0:
            phi += 2 * math.pi
        if phi >= 2 * math.pi:
            phi = 0.0
        return cls(min(theta, math.pi), phi)

    def as_tuple(self) -> tuple[float, float]:
        return (self.theta, self.phi)


CANONICAL_FRAME = FrameAngle(0.0, 0.0)


def frame_unitary(theta: float, phi: float) -> np.ndarray:
    """Columns are the z(theta, phi) eigenvectors ``|z+>``, ``|z->``."""
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    e = complex(math.cos(phi), -math.sin(phi))
    return np.array([[c, s], [e * s, -e * c]], dtype=np.complex128)


def triad_vectors(theta: float, phi: float) -> np.ndarray:
    """Basis vectors of the rotated triad as an array indexed ``[axis, outcome, component]``.

    Axis order is x, y, z; outcome 0 is the + eigenvector.
    """
    u = frame_unitary(theta, phi)
    zp, zm = u[:, 0], u[:, 1]
    r = 1 / math.sqrt(2)
    return np.array(
        [
            [r * (zp + zm), r * (zp - zm)],
            [r * (zp + 1j * zm), r * (zp - 1j * zm)],
            [zp, zm],
        ]
    )


@dataclass(frozen=True, eq=False)
class MeasurementTriad:
    frame: FrameAngle
    vectors: np.ndarray  # [axis, outcome, component]

    def basis(self, axis: str | int) -> tuple[np.ndarray, np.ndarray]:
        idx = axis_index(axis)
        return self.vectors[idx, 0], self.vectors[idx, 1]

    def projector(self, axis: str | int, outcome: int) -> np.ndarray:
        v = self.vectors[axis_index(axis), outcome]
        return np.outer(v, v.conj())

    @property
    def bases(self) -> dict[str, tuple[np.ndarray, np.ndarray]]:
        return {a: self.basis(a) for a in AXES}


def axis_index(axis: str | int) -> int:
    if isinstance(axis, (int, np.integer)):
        if 0 <= int(axis) < 3:
            return int(axis)
    elif axis in AXES:
        return AXES.index(axis)
    raise StateValidationError(f"unknown axis {axis!r}")


def rotated_pauli_triad(frame: FrameAngle) -> MeasurementTriad:
    vecs = triad_vectors(frame.theta, frame.phi)
    vecs.setflags(write=False)
    return MeasurementTriad(frame, vecs)


CANONICAL_TRIAD = rotated_pauli_triad(CANONICAL_FRAME)


def tensor_product(a: StateVector, b: StateVector) -> StateVector:
    out = np.kron(a.amplitudes, b.amplitudes)
    if out.size > 8:
        raise StateValidationError("tensor product exceeds three qubits")
    return StateVector(out)


def density_from_vector(psi: StateVector) -> DensityMatrix:
    if not isinstance(psi, StateVector):
        raise StateValidationError("expected a StateVector")
    return DensityMatrix(np.outer(psi.amplitudes, psi.amplitudes.conj()), psi.label)


def as_density(state: StateVector | DensityMatrix) -> DensityMatrix:
    if isinstance(state, DensityMatrix):
        return state
    if isinstance(state, StateVector):
        return density_from_vector(state)
    raise StateValidationError(f"expected a quantum state, got {type(state).__name__}")


def _parse_keep(keep: Iterable[str] | str) -> tuple[int, ...]:
    labels = list(keep)
    if not labels or any(lab not in PARTIES for lab in labels):
        raise StateValidationError(f"invalid subsystem labels {keep!r}; use A, B, C")
    if len(set(labels)) != len(labels):
        raise StateValidationError(f"duplicate subsystem labels in {keep!r}")
    if len(labels) == 3:
        raise StateValidationError("keep must be a proper subset of {A, B, C}")
    return tuple(sorted(PARTIES.index(lab) for lab in labels))


def ptrace_array(arr: np.ndarray, kept: Sequence[int]) -> np.ndarray:
    """Partial trace of a raw three-qubit operator onto qubit indices ``kept`` (sorted)."""
    t = np.asarray(arr).reshape((2,) * 6)
    letters = "abcdef"
    row = list(letters[:3])
    col = list(letters[3:])
    for q in range(3):
        if q not in kept:
            col[q] = row[q]
    out_idx = "".join(row[q] for q in kept) + "".join(col[q] for q in kept)
    reduced = np.einsum("".join(row) + "".join(col) + "->" + out_idx, t)
    d = 2 ** len(kept)
    return reduced.reshape(d, d)


def partial_trace(rho: DensityMatrix | StateVector, keep: Iterable[str] | str) -> DensityMatrix:
    """Reduced state of a three-qubit ``rho`` on the parties in ``keep``."""
    rho = as_density(rho)
    if rho.dim != 8:
        raise StateValidationError("partial_trace expects a three-qubit state")
    return DensityMatrix(ptrace_array(rho.entries, _parse_keep(keep)))


def generalized_ghz(alpha: float) -> StateVector:
    if not 0.0 <= alpha <= 1.0:
        raise StateValidationError(f"alpha={alpha!r} outside [0, 1]")
    amps = np.zeros(8, dtype=np.complex128)
    amps[0] = alpha
    amps[7] = math.sqrt(max(0.0, 1.0 - alpha * alpha))
    return StateVector(amps, f"generalized_ghz({alpha!r})")


def _ket_sum(terms: dict[str, complex], label: str) -> StateVector:
    amps = np.zeros(8, dtype=np.complex128)
    for bits, amp in terms.items():
        amps[int(bits, 2)] = amp
    return StateVector.normalized(amps, label)


def generalized_w(c1: float, c2: float, c3: float) -> StateVector:
    """c1|001> + c2|010> + c3|100>; coefficients must already be normalized."""
    amps = np.zeros(8, dtype=np.complex128)
    amps[1], amps[2], amps[4] = c1, c2, c3
    return StateVector(amps, f"generalized_w({c1!r}, {c2!r}, {c3!r})")


_R2 = 1 / math.sqrt(2)

NAMED_STATES = {
    "ghz": lambda: _ket_sum({"000": 1, "111": 1}, "ghz"),
    "w": lambda: _ket_sum({"001": 1, "010": 1, "100": 1}, "w"),
    "generalized_w_example": lambda: generalized_w(0.2, math.sqrt(0.6), 0.6),
    "bell_ab_times_0": lambda: _ket_sum({"000": 1, "110": 1}, "bell_ab_times_0"),
    "bell_ac_times_1": lambda: _ket_sum({"010": 1, "111": 1}, "bell_ac_times_1"),
    "plus_one_plus": lambda: _ket_sum(
        {"010": 1, "011": 1, "110": 1, "111": 1}, "plus_one_plus"
    ),
    "product_000": lambda: _ket_sum({"000": 1}, "product_000"),
}


def named_state(name: str, *params: float) -> StateVector:
    """Look up a catalogued state.

    ``generalized_w`` and ``generalized_ghz`` take coefficients as extra
    positional arguments; everything else is parameter-free.
    """
    key = name.lower().replace("-", "_")
    if key == "generalized_w":
        if len(params) != 3:
            raise StateValidationError("generalized_w needs three coefficients")
        return generalized_w(*params)
    if key == "generalized_ghz":
        if len(params) != 1:
            raise StateValidationError("generalized_ghz needs alpha")
        return generalized_ghz(params[0])
    if key not in NAMED_STATES:
        raise StateValidationError(
            f"unknown state {name!r}; choose from {sorted(NAMED_STATES) + ['generalized_w', 'generalized_ghz']}"
        )
    if params:
        raise StateValidationError(f"state {name!r} takes no parameters")
    return NAMED_STATES[key]()


def apply_local_unitary(
    state: DensityMatrix | StateVector, party: str, unitary: np.ndarray
) -> DensityMatrix:
    rho = as_density(state)
    ops = [np.eye(2)] * 3
    ops[PARTIES.index(party)] = np.asarray(unitary)
    full = np.kron(np.kron(ops[0], ops[1]), ops[2])
    out = full @ rho.entries @ full.conj().T
    return DensityMatrix(0.5 * (out + out.conj().T))


def bloch_vector(rho: np.ndarray) -> np.ndarray:
    """(rx, ry, rz) of a 2x2 operator, scaled by its trace."""
    return np.array(
        [2 * rho[0, 1].real, -2 * rho[0, 1].imag, (rho[0, 0] - rho[1, 1]).real]
    )


def density_from_bloch(r: Sequence[float]) -> DensityMatrix:
    x, y, z = r
    return DensityMatrix(0.5 * np.array([[1 + z, x - 1j * y], [x + 1j * y, 1 - z]]))


# state file (structured text) I/O


def state_to_document(psi: StateVector) -> dict:
    doc = {
        "dim": psi.dim,
        "amplitudes": [[float(a.real), float(a.imag)] for a in psi.amplitudes],
    }
    if psi.label is not None:
        doc["label"] = psi.label
    return doc


def state_from_document(doc: dict) -> StateVector:
    if not isinstance(doc, dict):
        raise StateValidationError("state document must be an object")
    try:
        dim = doc["dim"]
        pairs = doc["amplitudes"]
    except KeyError as exc:
        raise StateValidationError(f"state document missing field {exc.args[0]!r}") from None
    if not isinstance(dim, int) or isinstance(dim, bool):
        raise StateValidationError("field 'dim' must be an integer")
    if not isinstance(pairs, list) or len(pairs) != dim:
        raise StateValidationError(f"'amplitudes' must hold exactly dim={dim} [re, im] pairs")
    amps = []
    for pair in pairs:
        if (
            not isinstance(pair, list)
            or len(pair) != 2
            or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in pair)
        ):
            raise StateValidationError("each amplitude must be a [re, im] number pair")
        amps.append(complex(pair[0], pair[1]))
    label = doc.get("label")
    if label is not None and not isinstance(label, str):
        raise StateValidationError("'label' must be a string")
    return StateVector(np.array(amps, dtype=np.complex128), label)


def save_state(psi: StateVector, path: str | Path) -> None:
    Path(path).write_text(json.dumps(state_to_document(psi), indent=2) + "\n")


def load_state(path: str | Path) -> StateVector:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise StateValidationError(f"state file is not valid JSON: {exc}") from None
    return state_from_document(doc)
