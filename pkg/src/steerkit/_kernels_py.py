"""Pure numpy implementation of the hot kernels.

Every function is vectorized over a leading batch of frames so a grid can
be scored in one call. The compiled module ``_kernels_c`` provides a drop-in
``lhs_batch`` with the same signature.
"""

import numpy as np

from ._catalog import DIAG_MASK, OFF_MASK, PAIR_MASKS

_R2 = 1.0 / np.sqrt(2.0)


def triad_batch(angles):
    """Triad vectors for an ``(N, 2)`` array of (theta, phi): shape ``(N, 3, 2, 2)``."""
    angles = np.asarray(angles, dtype=np.float64)
    half = 0.5 * angles[:, 0]
    c, s = np.cos(half), np.sin(half)
    e = np.exp(-1j * angles[:, 1])
    zp = np.stack([c + 0j, e * s], axis=-1)
    zm = np.stack([s + 0j, -e * c], axis=-1)
    out = np.empty((angles.shape[0], 3, 2, 2), dtype=np.complex128)
    out[:, 0, 0] = _R2 * (zp + zm)
    out[:, 0, 1] = _R2 * (zp - zm)
    out[:, 1, 0] = _R2 * (zp + 1j * zm)
    out[:, 1, 1] = _R2 * (zp - 1j * zm)
    out[:, 2, 0] = zp
    out[:, 2, 1] = zm
    return out


def _bloch_unnormalized(sig):
    s01 = sig[..., 0, 1]
    return np.stack(
        [2.0 * s01.real, -2.0 * s01.imag, (sig[..., 0, 0] - sig[..., 1, 1]).real], axis=-1
    )


def _coherences(s):
    # coherence about axis k uses the two Bloch components orthogonal to k
    sq = s * s
    return np.sqrt(np.stack([sq[..., 1] + sq[..., 2], sq[..., 0] + sq[..., 2], sq[..., 0] + sq[..., 1]], axis=-1))


def pair_bloch(rho, vb, vc):
    """Unnormalized Alice Bloch vectors after Bob and Charlie project.

    ``rho`` is the 8x8 state, ``vb``/``vc`` hold triad vectors
    ``[..., axis, outcome, 2]``. Returns ``[..., i, b, j, c, 3]`` where the
    vector's norm scale is the branch probability.
    """
    r = np.asarray(rho).reshape(2, 2, 2, 2, 2, 2)
    vb = np.asarray(vb)
    vc = np.asarray(vc)
    sig = np.einsum(
        "...ibm,...jcn,amnApq,...ibp,...jcq->...ibjcaA",
        vb.conj(), vc.conj(), r, vb, vc, optimize=True,
    )
    return _bloch_unnormalized(sig)


def single_bloch(rho2, v):
    """Same as :func:`pair_bloch` for a two-qubit (Alice, X) state: ``[..., i, b, 3]``."""
    r = np.asarray(rho2).reshape(2, 2, 2, 2)
    v = np.asarray(v)
    sig = np.einsum("...ibm,amAp,...ibp->...ibaA", v.conj(), r, v, optimize=True)
    return _bloch_unnormalized(sig)


def lhs_batch(rho, rho_ab, rho_ac, frames):
    """All ten inequality left-hand sides for each row (thB, phB, thC, phC) of ``frames``."""
    frames = np.atleast_2d(np.asarray(frames, dtype=np.float64))
    vb = triad_batch(frames[:, 0:2])
    vc = triad_batch(frames[:, 2:4])
    q = _coherences(pair_bloch(rho, vb, vc)).sum(axis=(2, 4))  # [N, i, j, k]
    out = np.empty((frames.shape[0], 10))
    out[:, :6] = np.einsum("nijk,mijk->nm", q, PAIR_MASKS)
    qb = _coherences(single_bloch(rho_ab, vb)).sum(axis=2)  # [N, i, k]
    qc = _coherences(single_bloch(rho_ac, vc)).sum(axis=2)
    out[:, 6] = np.einsum("nik,ik->n", qb, DIAG_MASK)
    out[:, 7] = np.einsum("nik,ik->n", qb, OFF_MASK)
    out[:, 8] = np.einsum("nik,ik->n", qc, DIAG_MASK)
    out[:, 9] = np.einsum("nik,ik->n", qc, OFF_MASK)
    return out
