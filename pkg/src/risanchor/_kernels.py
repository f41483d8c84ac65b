"""Hot numeric kernels with a numba path and a pure-numpy fallback.

Set ``RISANCHOR_DISABLE_NUMBA=1`` (before import) to force the numpy path.
Both paths are always importable as ``*_numpy`` / ``*_numba`` so they can be
compared directly; the unsuffixed names dispatch to the active backend.
"""

import os

import numpy as np

TWO_PI = 2.0 * np.pi


def _numba_wanted():
    return os.environ.get("RISANCHOR_DISABLE_NUMBA", "").strip().lower() not in ("1", "true", "yes")


try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None


# ---------------------------------------------------------------- numpy path

def synth_grid_numpy(amp, tau, nu, freqs, times):
    """H[k, i] = sum_n amp[k, n] exp(-j2pi tau_n f_k) exp(+j2pi nu_n t_i)."""
    left = amp * np.exp(-1j * TWO_PI * np.outer(freqs, tau))
    right = np.exp(1j * TWO_PI * np.outer(nu, times))
    return left @ right


def periodogram_grid_numpy(z, fb, tb, taus, nus):
    """|sum_{k,i} z[k,i] exp(+j2pi(tau fb_k - nu tb_i))|^2 on a tau x nu grid."""
    ef = np.exp(1j * TWO_PI * np.outer(taus, fb))
    et = np.exp(-1j * TWO_PI * np.outer(tb, nus))
    s = ef @ z @ et
    return s.real ** 2 + s.imag ** 2


def periodogram_points_numpy(z, fb, tb, taus, nus):
    """Same objective as :func:`periodogram_grid_numpy` at paired (tau, nu) points."""
    ef = np.exp(1j * TWO_PI * np.outer(taus, fb))
    et = np.exp(-1j * TWO_PI * np.outer(nus, tb))
    s = np.einsum("pk,ki,pi->p", ef, z, et)
    return s.real ** 2 + s.imag ** 2


# ---------------------------------------------------------------- numba path

if numba is not None:

    @numba.njit(cache=True)
    def _phasors(a, b, sign):
        """exp(sign * j2pi * a_p * b_q) as a contiguous (P, Q) array."""
        out = np.empty((a.shape[0], b.shape[0]), dtype=np.complex128)
        for p in range(a.shape[0]):
            for q in range(b.shape[0]):
                ph = sign * TWO_PI * a[p] * b[q]
                out[p, q] = complex(np.cos(ph), np.sin(ph))
        return out

    @numba.njit(cache=True)
    def synth_grid_numba(amp, tau, nu, freqs, times):
        left = np.ascontiguousarray(amp) * _phasors(freqs, tau, -1.0)
        return np.dot(left, _phasors(nu, times, 1.0))

    @numba.njit(cache=True)
    def periodogram_grid_numba(z, fb, tb, taus, nus):
        s = np.dot(np.dot(_phasors(taus, fb, 1.0), np.ascontiguousarray(z)), _phasors(tb, nus, -1.0))
        return s.real ** 2 + s.imag ** 2

    @numba.njit(cache=True)
    def periodogram_points_numba(z, fb, tb, taus, nus):
        nf, nt = z.shape
        ef = _phasors(taus, fb, 1.0)
        et = _phasors(nus, tb, -1.0)
        out = np.empty(taus.shape[0])
        for p in range(taus.shape[0]):
            acc = 0.0 + 0.0j
            for k in range(nf):
                row = 0.0 + 0.0j
                for i in range(nt):
                    row += z[k, i] * et[p, i]
                acc += ef[p, k] * row
            out[p] = acc.real * acc.real + acc.imag * acc.imag
        return out

else:  # pragma: no cover
    synth_grid_numba = synth_grid_numpy
    periodogram_grid_numba = periodogram_grid_numpy
    periodogram_points_numba = periodogram_points_numpy


USE_NUMBA = numba is not None and _numba_wanted()
BACKEND = "numba" if USE_NUMBA else "numpy"

if USE_NUMBA:
    synth_grid = synth_grid_numba
    periodogram_grid = periodogram_grid_numba
    periodogram_points = periodogram_points_numba
else:
    synth_grid = synth_grid_numpy
    periodogram_grid = periodogram_grid_numpy
    periodogram_points = periodogram_points_numpy
