"""Independent dense grid-search maxima for the two-setting correlators.

This is the reference the optimizer is judged against, so everything here
is rebuilt from scratch with plain numpy: basis states, Bell projectors,
staging unitaries and expectation values never touch the package internals.

For fixed Bob directions the CHSH combination splits into a part depending
only on Alice's first setting plus a part depending only on her second, so
the exact maximum over the full Cartesian settings grid factorizes into
per-pair maxima.  That lets a >= 12-points-per-dimension product grid
(10^8-ish points for the teleportation scenario) be searched exactly
without enumerating it.  One zoom refinement re-runs the same search on
local grids of the same size around the winning configuration.
"""

from __future__ import annotations

import math

import numpy as np

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
I2 = np.eye(2, dtype=complex)

_S2 = 1.0 / math.sqrt(2.0)
_BELL = np.array(
    [
        [_S2, 0, 0, _S2],   # phi+
        [_S2, 0, 0, -_S2],  # phi-
        [0, _S2, _S2, 0],   # psi+
        [0, _S2, -_S2, 0],  # psi-
    ],
    dtype=complex,
)
_PROJ = np.einsum("ki,kj->kij", _BELL, _BELL.conj())
A1_ORACLE = _PROJ[1] + _PROJ[3] - _PROJ[0] - _PROJ[2]
A2_ORACLE = -_PROJ[1] + _PROJ[3] + _PROJ[0] - _PROJ[2]


class _AngleGrid:
    """Cartesian (polar, azimuth) grid flattened to parallel angle arrays."""

    def __init__(self, polars: np.ndarray, azimuths: np.ndarray):
        p, a = np.meshgrid(polars, azimuths, indexing="ij")
        self.polar = p.ravel()
        self.azimuth = a.ravel()

    def __len__(self) -> int:
        return len(self.polar)

    def kets(self) -> np.ndarray:
        return np.column_stack(
            [np.cos(self.polar / 2.0), np.exp(1j * self.azimuth) * np.sin(self.polar / 2.0)]
        )

    def sigmas(self) -> np.ndarray:
        p, a = self.polar, self.azimuth
        nx, ny, nz = np.sin(p) * np.cos(a), np.sin(p) * np.sin(a), np.cos(p)
        return nx[:, None, None] * SX + ny[:, None, None] * SY + nz[:, None, None] * SZ


def _pair_axes(n_polar: int, n_azim: int):
    return np.linspace(0.0, math.pi, n_polar), np.arange(n_azim) * (2.0 * math.pi / n_azim)


def _local(value: float, spacing: float, points: int) -> np.ndarray:
    return value + np.linspace(-spacing, spacing, points)


def _tele_states(theta: float, alice: _AngleGrid) -> np.ndarray:
    d = np.array([math.cos(theta), 0, 0, math.sin(theta)], dtype=complex)
    return np.einsum("si,j->sij", alice.kets(), d).reshape(-1, 8)


def _vn_states(theta: float, phases: np.ndarray) -> np.ndarray:
    d = np.array([math.cos(theta), 0, 0, math.sin(theta)], dtype=complex)
    h = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2.0)
    out = []
    for phi in phases:
        u = h @ np.array([[1, 0], [0, np.exp(1j * phi)]], dtype=complex)
        out.append(np.kron(u, I2) @ d)
    return np.array(out)


def _table(states: np.ndarray, alice_op: np.ndarray, sigmas: np.ndarray) -> np.ndarray:
    """E[s, k] = <state_s| alice_op (x) sigma_k |state_s>."""
    da = alice_op.shape[0]
    e = states.reshape(len(states), da, 2)
    m = np.einsum("sdj,de,sel->sjl", e.conj(), alice_op, e)
    return np.real(np.einsum("sjl,kjl->sk", m, sigmas))


def _grid_max(e1_k1, e1_k2, e2_k1, e2_k2, chunk: int = 32):
    """Exact max of |E1(i,k1) + E1(i,k2) + E2(j,k1) - E2(j,k2)| with each
    argument ranging over its own grid.  Returns (value, (i, j, k1, k2))."""
    nk1 = e1_k1.shape[1]
    best, best_idx = -1.0, None
    for lo in range(0, nk1, chunk):
        hi = min(lo + chunk, nk1)
        s = e1_k1[:, lo:hi, None] + e1_k2[:, None, :]
        d = e2_k1[:, lo:hi, None] - e2_k2[:, None, :]
        for sgn in (1.0, -1.0):
            smax, imax = (sgn * s).max(axis=0), (sgn * s).argmax(axis=0)
            dmax, jmax = (sgn * d).max(axis=0), (sgn * d).argmax(axis=0)
            tot = smax + dmax
            flat = int(tot.argmax())
            k1c, k2 = np.unravel_index(flat, tot.shape)
            if float(tot[k1c, k2]) > best:
                best = float(tot[k1c, k2])
                best_idx = (int(imax[k1c, k2]), int(jmax[k1c, k2]), lo + int(k1c), int(k2))
    return best, best_idx


def _tele_search(theta, alice1, alice2, bob1, bob2):
    s1, s2 = _tele_states(theta, alice1), _tele_states(theta, alice2)
    g1, g2 = bob1.sigmas(), bob2.sigmas()
    return _grid_max(
        _table(s1, A1_ORACLE, g1), _table(s1, A1_ORACLE, g2),
        _table(s2, A2_ORACLE, g1), _table(s2, A2_ORACLE, g2),
    )


def _vn_search(theta, phases1, phases2, bob1, bob2):
    s1, s2 = _vn_states(theta, phases1), _vn_states(theta, phases2)
    g1, g2 = bob1.sigmas(), bob2.sigmas()
    return _grid_max(
        _table(s1, SZ, g1), _table(s1, SZ, g2),
        _table(s2, SZ, g1), _table(s2, SZ, g2),
    )


def grid_reference_max(
    kind: str,
    theta: float,
    azimuthal_points: int = 16,
    polar_points: int = 17,
    refine: bool = True,
) -> float:
    """Dense-grid maximum (optionally refined once) of a CHSH scenario."""
    polars, azims = _pair_axes(polar_points, azimuthal_points)
    coarse_pair = _AngleGrid(polars, azims)
    sp_p = math.pi / (polar_points - 1)
    sp_a = 2.0 * math.pi / azimuthal_points

    def local_pair(grid: _AngleGrid, idx: int) -> _AngleGrid:
        return _AngleGrid(
            _local(grid.polar[idx], sp_p, polar_points),
            _local(grid.azimuth[idx], sp_a, azimuthal_points),
        )

    if kind == "tele-chsh":
        value, (i, j, k1, k2) = _tele_search(
            theta, coarse_pair, coarse_pair, coarse_pair, coarse_pair
        )
        if not refine:
            return value
        refined, _ = _tele_search(
            theta,
            local_pair(coarse_pair, i), local_pair(coarse_pair, j),
            local_pair(coarse_pair, k1), local_pair(coarse_pair, k2),
        )
        return max(value, refined)

    if kind == "rsp-vn-chsh":
        value, (i, j, k1, k2) = _vn_search(theta, azims, azims, coarse_pair, coarse_pair)
        if not refine:
            return value
        refined, _ = _vn_search(
            theta,
            _local(azims[i], sp_a, azimuthal_points),
            _local(azims[j], sp_a, azimuthal_points),
            local_pair(coarse_pair, k1), local_pair(coarse_pair, k2),
        )
        return max(value, refined)

    raise ValueError(f"no grid oracle for {kind!r}")
