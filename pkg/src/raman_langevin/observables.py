"""Observables of the Gaussian fluctuation state.

Quadratures are ``x = (a + a+)/sqrt(2)`` and ``p = -i(a - a+)/sqrt(2)``, so
the vacuum variance is 1/2 and uncorrelated vacua sit at ``2 eta = 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import G2UndefinedError, NonPhysicalCovarianceError
from .moments import MomentMatrix
from .params import BOSONIC_MODES, ModeId
from .steady_state import SteadyState

G2_EPS = 1e-12
ETA_EPS = 1e-12

# rows: sqrt(2) * (x, p) in terms of (da, da+); the 1/2 is applied once at
# the end so that vacuum comes out as exactly 1/2
_T1 = np.array([[1.0, 1.0], [-1j, 1j]])
_OMEGA1 = np.array([[0.0, 1.0], [-1.0, 0.0]])


@dataclass(frozen=True)
class QuadratureVariances:
    mode: ModeId
    varX: float
    varP: float
    t: float = 0.0

    @property
    def product(self) -> float:
        return self.varX * self.varP


@dataclass(frozen=True, eq=False)
class PairCorrelation:
    """Two-mode correlation matrix and its partial-transpose symplectic values.

    ``eta`` is the smaller (decisive) value and ``eta_plus`` the larger one.
    """

    pair: tuple[ModeId, ModeId]
    V: np.ndarray
    eta: float
    eta_plus: float

    @property
    def two_eta(self) -> float:
        return 2.0 * self.eta

    @property
    def entangled(self) -> bool:
        return self.two_eta < 1.0


@dataclass(frozen=True, eq=False)
class ObservableRecord:
    """Everything measured at one time point.

    ``occupation`` is the fluctuation number ``<da+ da>``; ``g2`` values are
    None where the mode is (numerically) empty.
    """

    t: float
    variances: dict = field(default_factory=dict)
    occupation: dict = field(default_factory=dict)
    g2: dict = field(default_factory=dict)
    pairs: dict = field(default_factory=dict)


def _matrix(M) -> np.ndarray:
    return M.M if isinstance(M, MomentMatrix) else np.asarray(M)


def _time(M) -> float:
    return M.t if isinstance(M, MomentMatrix) else 0.0


def _bosonic(mode) -> ModeId:
    mode = ModeId.parse(mode)
    if mode not in BOSONIC_MODES:
        raise ValueError(f"{mode.value} is not a bosonic mode")
    return mode


def quadrature_covariance(M, modes: Sequence) -> np.ndarray:
    """Symmetrised real covariance of ``(x_1, p_1, x_2, p_2, ...)``.

    Means of the fluctuations vanish, so this is just the symmetric part of
    the quadrature second moments.
    """
    Mm = _matrix(M)
    modes = [_bosonic(m) for m in modes]
    slots = [s for m in modes for s in m.slots]
    T = np.kron(np.eye(len(modes)), _T1)
    S = T @ Mm[np.ix_(slots, slots)] @ T.T
    return np.real(S + S.T) / 4.0


def quadrature_variance(M, mode) -> QuadratureVariances:
    mode = _bosonic(mode)
    i, j = mode.slots
    Mm = _matrix(M)
    m = Mm[i, i]
    anti_normal = Mm[i, j]
    normal = Mm[j, i]
    var_x = float(np.real(m + np.conj(m) + anti_normal + normal)) / 2.0
    var_p = float(np.real(-m - np.conj(m) + anti_normal + normal)) / 2.0
    return QuadratureVariances(mode, var_x, var_p, _time(M))


def occupation(M, mode) -> float:
    i, j = _bosonic(mode).slots
    return float(np.real(_matrix(M)[j, i]))


def normal_fourth_moment(alpha: complex, n: float, m: complex) -> float:
    """``<a+ a+ a a>`` of a Gaussian state with mean ``alpha``.

    ``n = <da+ da>`` and ``m = <da da>`` are the fluctuation moments.
    """
    a2 = abs(alpha) ** 2
    cross = np.conj(alpha) ** 2 * m + alpha**2 * np.conj(m)
    return float(a2 * a2 + 4.0 * a2 * n + np.real(cross) + 2.0 * n * n + abs(m) ** 2)


def g2_zero(M, ss: SteadyState | None, mode, include_mean: bool = True, eps: float = G2_EPS) -> float:
    """Zero-delay second-order correlation ``<a+^2 a^2> / <a+ a>^2``.

    With ``include_mean`` the field is ``alpha + da`` with ``alpha`` taken
    from ``ss``; otherwise only the fluctuations are counted. Fourth moments
    follow from Gaussian factorisation.

    Raises
    ------
    G2UndefinedError
        The mean photon number is not above ``eps``.
    """
    mode = _bosonic(mode)
    i, j = mode.slots
    Mm = _matrix(M)
    n = float(np.real(Mm[j, i]))
    m = complex(Mm[i, i])
    alpha = complex(ss.mean(mode)) if (include_mean and ss is not None) else 0j
    total = abs(alpha) ** 2 + n
    if not total > eps:
        raise G2UndefinedError(
            f"g2 undefined for {mode.value}: mean photon number {total:.3e} <= {eps:g}"
        )
    return normal_fourth_moment(alpha, n, m) / total**2


def correlation_matrix(M, pair) -> np.ndarray:
    """4x4 covariance ``[[A, C], [C^T, B]]`` of the two modes in ``pair``."""
    a, b = (_bosonic(p) for p in pair)
    if a is b:
        raise ValueError(f"pair needs two distinct modes, got {a.value} twice")
    return quadrature_covariance(M, (a, b))


def _det(m):
    """Exact determinant of a small matrix of Fractions (cofactor expansion)."""
    if len(m) == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    total = Fraction(0)
    for j, a in enumerate(m[0]):
        if a:
            minor = [row[:j] + row[j + 1:] for row in m[1:]]
            total += (-1) ** j * a * _det(minor)
    return total


def symplectic_eta(V, pair=None, eps: float = ETA_EPS) -> PairCorrelation:
    """Partial-transpose symplectic eigenvalues of a two-mode covariance.

    ``sigma = det A + det B - 2 det C`` and
    ``eta_-+ = sqrt(sigma -+ sqrt(sigma^2 - 4 det V)) / sqrt(2)``.

    Near a degenerate pair (vacuum, thermal products) the discriminant is a
    difference of two nearly equal numbers, and rounding there would leak
    into eta as its square root. The invariants are therefore evaluated
    exactly from the binary values of ``V``; ``eta_-`` then follows from
    ``eta_- eta_+ = sqrt(det V)`` to avoid the remaining cancellation.

    Raises
    ------
    NonPhysicalCovarianceError
        ``sigma^2 - 4 det V`` is below ``-eps`` (relative to ``sigma^2``).
    """
    V = np.asarray(V, dtype=float)
    if V.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got shape {V.shape}")
    if not np.all(np.isfinite(V)):
        raise NonPhysicalCovarianceError("correlation matrix has non-finite entries")
    if np.any(np.diag(V) <= 0):
        raise NonPhysicalCovarianceError("correlation matrix needs a positive diagonal")
    F = [[Fraction(float(x)) for x in row] for row in V]
    blk = lambda r, c: [F[r][c:c + 2], F[r + 1][c:c + 2]]
    sigma_q = _det(blk(0, 0)) + _det(blk(2, 2)) - 2 * _det(blk(0, 2))
    det_q = _det(F)
    disc_q = sigma_q * sigma_q - 4 * det_q
    sigma, det_v, disc = float(sigma_q), float(det_q), float(disc_q)
    if disc < 0:
        if disc < -eps * max(sigma * sigma, 1.0):
            raise NonPhysicalCovarianceError(
                f"non-physical correlation matrix: sigma^2 - 4 det V = {disc:.3e}", violation=-disc
            )
        disc = 0.0
    plus_sq = (sigma + math.sqrt(disc)) / 2.0
    if plus_sq <= 0:
        raise NonPhysicalCovarianceError(f"non-physical correlation matrix: sigma = {sigma:.3e}", violation=-sigma)
    eta_plus = math.sqrt(plus_sq)
    eta = math.sqrt(max(det_v, 0.0) / plus_sq)
    if pair is not None:
        pair = tuple(_bosonic(p) for p in pair)
    return PairCorrelation(pair, V, eta, eta_plus)


def pair_correlation(M, pair) -> PairCorrelation:
    return symplectic_eta(correlation_matrix(M, pair), pair)


def symplectic_spectrum(V) -> np.ndarray:
    """Symplectic eigenvalues (ascending, one per mode) of a covariance.

    They are the moduli of the eigenvalues of ``i Omega V``, which come in
    +- pairs.
    """
    V = np.asarray(V, dtype=float)
    n = V.shape[0] // 2
    Omega = np.kron(np.eye(n), _OMEGA1)
    ev = np.sort(np.abs(np.linalg.eigvals(1j * Omega @ V)))
    return ev[::2]


def single_mode_symplectic(M, mode) -> float:
    """``sqrt(det V)`` of one mode; at least 1/2 for any physical state."""
    V = quadrature_covariance(M, (mode,))
    return math.sqrt(max(np.linalg.det(V), 0.0))


def min_symplectic(M) -> float:
    """Smallest symplectic eigenvalue of the full five-mode covariance."""
    return float(symplectic_spectrum(quadrature_covariance(M, BOSONIC_MODES))[0])


def parse_pair(text) -> tuple[ModeId, ModeId]:
    if isinstance(text, str):
        parts = text.split(":")
        if len(parts) != 2:
            raise ValueError(f"pair must look like 'signal:idler', got {text!r}")
    else:
        parts = list(text)
    a, b = (_bosonic(p) for p in parts)
    if a is b:
        raise ValueError(f"pair needs two distinct modes, got {text!r}")
    return a, b


def record(
    M,
    ss: SteadyState | None,
    pairs: Iterable = (),
    include_mean: bool = True,
    eps: float = G2_EPS,
) -> ObservableRecord:
    """All per-mode and per-pair observables at ``M.t``."""
    variances, occ, g2 = {}, {}, {}
    for mode in BOSONIC_MODES:
        variances[mode] = quadrature_variance(M, mode)
        occ[mode] = occupation(M, mode)
        try:
            g2[mode] = g2_zero(M, ss, mode, include_mean, eps)
        except G2UndefinedError:
            g2[mode] = None
    out_pairs = {}
    for p in pairs:
        p = parse_pair(p)
        out_pairs[p] = pair_correlation(M, p)
    return ObservableRecord(_time(M), variances, occ, g2, out_pairs)
