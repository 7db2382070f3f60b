"""Hot inner loops, each with a numba and a pure-numpy implementation.

The public names (``xxz_dense``, ``midpoint_product``, ``keep_probability``)
dispatch on every call according to ``SPINLAB_BACKEND``. Both variants stay
reachable through :data:`NUMPY` and :data:`NUMBA` so tests and the benchmark
can compare them in one process.

Basis convention shared with the rest of the package: site 0 is the most
significant bit of the basis index and a cleared bit means spin up.
"""
from __future__ import annotations

from types import SimpleNamespace

import numpy as np

from ._config import HAVE_NUMBA, backend

# ---------------------------------------------------------------------------
# numpy implementations


def _xxz_dense_np(n, ei, ej, jxy, jz, zeeman):
    dim = 1 << n
    states = np.arange(dim)
    shifts = n - 1 - np.arange(n)
    bits = (states[:, None] >> shifts[None, :]) & 1
    spins = 1.0 - 2.0 * bits
    diag = spins @ np.asarray(zeeman, dtype=np.float64)
    H = np.zeros((dim, dim), dtype=np.complex128)
    for e in range(len(ei)):
        i, j = int(ei[e]), int(ej[e])
        diag = diag + jz[e] * spins[:, i] * spins[:, j]
        flip = bits[:, i] != bits[:, j]
        src = states[flip]
        dst = src ^ ((1 << int(shifts[i])) | (1 << int(shifts[j])))
        # np.add.at keeps duplicated bonds (e.g. a two-site ring) additive
        np.add.at(H, (dst, src), 2.0 * jxy[e])
    H[states, states] += diag
    return H


def _midpoint_product_np(h0, drive, coeffs, dt):
    dim = h0.shape[0]
    stack = np.broadcast_to(h0, (len(coeffs), dim, dim)).copy()
    idx = np.arange(dim)
    stack[:, idx, idx] += np.outer(coeffs, drive)
    w, v = np.linalg.eigh(stack)
    steps = np.einsum("kij,kj,klj->kil", v, np.exp(-1j * w * dt), v.conj())
    U = np.eye(dim, dtype=np.complex128)
    for step in steps:
        U = step @ U
    return U


def _keep_probability_np(evals, evecs, psi0, keep, times):
    c = evecs.conj().T @ psi0
    phases = np.exp(-1j * np.outer(evals, times)) * c[:, None]
    amps = evecs[keep] @ phases
    return np.sum(amps.real**2 + amps.imag**2, axis=0)


NUMPY = SimpleNamespace(
    xxz_dense=_xxz_dense_np,
    midpoint_product=_midpoint_product_np,
    keep_probability=_keep_probability_np,
)

# ---------------------------------------------------------------------------
# numba implementations

if HAVE_NUMBA:
    import numba as nb

    _jit = nb.njit(cache=True, nogil=True)
    _REANCHOR = 64

    @_jit
    def _xxz_fill_nb(n, ei, ej, jxy, jz, zeeman, H):
        dim = 1 << n
        for s in range(dim):
            diag = 0.0
            for k in range(n):
                diag += zeeman[k] * (1.0 - 2.0 * ((s >> (n - 1 - k)) & 1))
            for e in range(ei.size):
                si = n - 1 - ei[e]
                sj = n - 1 - ej[e]
                if ((s >> si) & 1) == ((s >> sj) & 1):
                    diag += jz[e]
                else:
                    diag -= jz[e]
                    t = s ^ ((1 << si) | (1 << sj))
                    H[t, s] += 2.0 * jxy[e]
            H[s, s] += diag

    @_jit
    def _midpoint_product_nb(h0, drive, coeffs, dt):
        dim = h0.shape[0]
        U = np.eye(dim, dtype=np.complex128)
        H = h0.copy()
        for k in range(coeffs.size):
            for i in range(dim):
                H[i, i] = h0[i, i] + coeffs[k] * drive[i]
            w, v = np.linalg.eigh(H)
            vp = v * np.exp(-1j * w * dt)
            U = (vp @ v.conj().T) @ U
        return U

    @_jit
    def _keep_probability_nb(evals, evecs, psi0, keep, times):
        dim = evals.size
        nk = keep.size
        c = evecs.conj().T @ psi0
        vk = np.empty((dim, nk), dtype=np.complex128)
        for n_ in range(dim):
            for j in range(nk):
                vk[n_, j] = evecs[keep[j], n_] * c[n_]
        nt = times.size
        # on a uniform grid advance phases by one multiplication per step
        uniform = nt > 2
        step = 0.0
        if uniform:
            step = times[1] - times[0]
            for ti in range(2, nt):
                if abs(times[ti] - times[0] - ti * step) > 1e-12 * max(1.0, abs(times[ti])):
                    uniform = False
                    break
        rot = np.exp(-1j * evals * step)
        ph = np.empty(dim, dtype=np.complex128)
        amp = np.empty(nk, dtype=np.complex128)
        out = np.empty(nt)
        for ti in range(nt):
            if not uniform or ti % _REANCHOR == 0:
                for n_ in range(dim):
                    ph[n_] = np.exp(-1j * evals[n_] * times[ti])
            else:
                for n_ in range(dim):
                    ph[n_] *= rot[n_]
            amp[:] = 0.0
            for n_ in range(dim):
                p_ = ph[n_]
                for j in range(nk):
                    amp[j] += vk[n_, j] * p_
            p = 0.0
            for j in range(nk):
                p += amp[j].real * amp[j].real + amp[j].imag * amp[j].imag
            out[ti] = p
        return out

    def _xxz_dense_nb_alloc(n, ei, ej, jxy, jz, zeeman):
        # numpy's zeros gets lazily zeroed pages; allocating inside the jit would memset
        H = np.zeros((1 << n, 1 << n), dtype=np.complex128)
        _xxz_fill_nb(n, ei, ej, jxy, jz, zeeman, H)
        return H

    NUMBA = SimpleNamespace(
        xxz_dense=_xxz_dense_nb_alloc,
        midpoint_product=_midpoint_product_nb,
        keep_probability=_keep_probability_nb,
    )
else:  # pragma: no cover
    NUMBA = None


def _arg(x, dtype):
    # writeable C arrays only, so numba compiles one specialisation per kernel
    return np.require(x, dtype=dtype, requirements=["C", "W"])


def _active():
    return NUMBA if backend() == "numba" and NUMBA is not None else NUMPY


def xxz_dense(n: int, ei, ej, jxy, jz, zeeman) -> np.ndarray:
    """Dense XXZ Hamiltonian on ``n`` sites from a bond list.

    Bond ``e`` joins sites ``ei[e]`` and ``ej[e]`` with in-plane coupling
    ``jxy[e]`` (flip-flop amplitude ``2*jxy``) and longitudinal coupling
    ``jz[e]``; ``zeeman[k]`` multiplies sigma^Z on site ``k``.
    """
    return _active().xxz_dense(
        int(n),
        _arg(ei, np.int64),
        _arg(ej, np.int64),
        _arg(jxy, np.float64),
        _arg(jz, np.float64),
        _arg(zeeman, np.float64),
    )


def midpoint_product(h0, drive, coeffs, dt: float) -> np.ndarray:
    """Ordered product of ``exp(-i (h0 + c_k diag(drive)) dt)`` over ``coeffs``."""
    return _active().midpoint_product(
        _arg(h0, np.complex128),
        _arg(drive, np.float64),
        _arg(coeffs, np.float64),
        float(dt),
    )


def keep_probability(evals, evecs, psi0, keep, times) -> np.ndarray:
    """Population of the basis states ``keep`` at each of ``times``."""
    return _active().keep_probability(
        _arg(evals, np.float64),
        _arg(evecs, np.complex128),
        _arg(psi0, np.complex128),
        _arg(keep, np.int64),
        _arg(times, np.float64),
    )
