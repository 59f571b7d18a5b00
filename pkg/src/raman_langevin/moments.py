"""Second moments of the fluctuation vector and their time evolution.

``M_ij(t) = <u_i(t) u_j(t)>`` with the conjugate components stored as
separate entries, so the evolution uses ``A^T`` (never ``A^H``)::

    dM/dt = A M + M A^T + D
    M(t)  = e^{At} M0 e^{A^T t} + int_0^t e^{As} D e^{A^T s} ds
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import InstabilityError, PropagatorOverflowError
from .linear_system import PAIR_SWAP, stability
from .params import N_FLUCT

# largest exponent of the fastest-growing mode we allow before refusing
_MAX_GROWTH = 700.0


@dataclass(frozen=True, eq=False)
class MomentMatrix:
    M: np.ndarray
    t: float = 0.0

    def __array__(self, dtype=None, copy=None):
        return self.M if dtype is None else self.M.astype(dtype)

    def occupation(self, k: int) -> float:
        """``<du_k+ du_k>`` of bosonic mode ``k``."""
        return float(self.M[2 * k + 1, 2 * k].real)

    def pair_conjugation_error(self) -> float:
        """``max |S M S - M^H|``.

        Swapping every operator for its adjoint and conjugating the
        expectation reverses the operator order, hence the transpose.
        """
        return float(np.max(np.abs(PAIR_SWAP @ self.M @ PAIR_SWAP - self.M.conj().T)))


def _arr(x) -> np.ndarray:
    if isinstance(x, np.ndarray):
        return x
    return np.asarray(x)


def initial_moments() -> MomentMatrix:
    """Vacuum fluctuations: ``<du du+> = 1`` for every mode, all else 0."""
    M = np.zeros((N_FLUCT, N_FLUCT), dtype=complex)
    for k in range(5):
        M[2 * k, 2 * k + 1] = 1.0
    return MomentMatrix(M, 0.0)


def _check_growth(A: np.ndarray, t: float) -> None:
    ev = np.linalg.eigvals(A)
    worst = ev[np.argmax(ev.real)]
    if worst.real * t > _MAX_GROWTH:
        raise PropagatorOverflowError(
            f"exp(A t) overflows: eigenvalue {worst:.6g} at t={t:.6g} s "
            f"(growth exponent {worst.real * t:.3g})",
            max_real=float(worst.real),
        )


def propagator(A, t: float) -> np.ndarray:
    """``exp(A t)`` by scaling and squaring with a degree-13 Pade approximant.

    Time is measured in units of the fastest rate in ``A`` before
    exponentiating, which keeps the scaled matrix norm of order one.
    """
    A = _arr(A)
    t = float(t)
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t!r}")
    if t == 0:
        return np.eye(A.shape[0], dtype=complex)
    _check_growth(A, t)
    rate = float(np.max(np.abs(A))) or 1.0
    return sla.expm((A / rate) * (rate * t))


def evolve(M0, A, D, t: float) -> MomentMatrix:
    """Exact second moments at time ``t`` from ``M0`` at time 0.

    The noise integral comes from one exponential of a block matrix
    ``[[-A, D], [0, A^T]]`` over a short step ``h`` (Van Loan), and the step
    is then doubled ``k`` times using

        Phi(2h) = Phi(h)^2,   Q(2h) = Phi(h) Q(h) Phi(h)^T + Q(h),

    which avoids the overflow of ``exp(-A t)`` for large ``|A| t``.

    Slow modes next to fast ones have ``Phi`` within a few ulps of the
    identity, and squaring it would lose their decay. The doubling therefore
    carries ``Psi = Phi - I`` (``Psi(2h) = 2 Psi + Psi^2``), seeded from
    ``h A phi1(h A)`` where ``phi1(z) = (e^z - 1)/z`` comes out of a third
    block row of the same exponential.
    """
    M0 = _arr(M0)
    A = _arr(A)
    D = _arr(D)
    t = float(t)
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t!r}")
    if t == 0:
        return MomentMatrix(np.array(M0, dtype=complex), 0.0)
    _check_growth(A, t)
    n = A.shape[0]
    rate = float(np.linalg.norm(A, 1)) or 1.0
    a = A / rate
    d = D / rate
    tau = rate * t
    k = max(0, math.ceil(math.log2(tau))) if tau > 1.0 else 0
    h = tau / 2.0**k
    block = np.zeros((3 * n, 3 * n), dtype=complex)
    block[:n, :n] = -a * h
    block[:n, n:2 * n] = d * h
    block[n:2 * n, n:2 * n] = a.T * h
    block[n:2 * n, 2 * n:] = np.eye(n)
    E = sla.expm(block)
    psi = (a.T * h @ E[n:2 * n, 2 * n:]).T
    Q = (psi @ E[:n, n:2 * n]) + E[:n, n:2 * n]
    for _ in range(k):
        phi = psi + np.eye(n)
        Q = phi @ Q @ phi.T + Q
        psi = 2.0 * psi + psi @ psi
    M = M0 + (psi @ M0 + M0 @ psi.T + psi @ M0 @ psi.T) + Q
    return MomentMatrix(M, t)


def steady_moments(A, D) -> MomentMatrix:
    """Stationary moments: the solution of ``A M + M A^T + D = 0``.

    Raises
    ------
    InstabilityError
        ``A`` has an eigenvalue with non-negative real part.
    """
    A = _arr(A)
    D = _arr(D)
    rep = stability(A)
    if not rep.stable:
        raise InstabilityError(
            f"no stationary state: max Re(eig A) = {rep.max_real:.6g} >= 0", max_real=rep.max_real
        )
    try:
        M = sla.solve_sylvester(A, A.T, -D)
    except (np.linalg.LinAlgError, sla.LinAlgError) as exc:
        raise np.linalg.LinAlgError(f"singular Lyapunov operator: {exc}") from exc
    return MomentMatrix(M, math.inf)


def lyapunov_residual(M, A, D) -> np.ndarray:
    M, A, D = _arr(M), _arr(A), _arr(D)
    return A @ M + M @ A.T + D


def commutator_drift(M) -> float:
    """``max_k |(M[2k,2k+1] - M[2k+1,2k]) - 1|``: 0 when commutators hold."""
    M = _arr(M)
    return float(max(abs(M[2 * k, 2 * k + 1] - M[2 * k + 1, 2 * k] - 1.0) for k in range(5)))
