"""Drift and diffusion matrices of the linearised fluctuation dynamics.

The fluctuation vector is ``u = [da_s, da_s+, da_i, da_i+, db, db+, dc, dc+,
dd, dd+]`` and obeys ``du/dt = A u + n(t)`` with delta-correlated noise
``<n_i(s) n_j(s')> = D_ij delta(s - s')``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import N_FLUCT, SystemParams, thermal_occupation
from .steady_state import SteadyState

#: permutation swapping every (2k, 2k+1) pair
PAIR_SWAP = np.kron(np.eye(5), np.array([[0.0, 1.0], [1.0, 0.0]]))

#: commutator matrix <[u_i, u_j]> of ten independent bosonic components
COMMUTATOR = np.kron(np.eye(5), np.array([[0.0, 1.0], [-1.0, 0.0]]))


@dataclass(frozen=True, eq=False)
class DriftMatrix:
    """Drift matrix together with the rates it was assembled from."""

    A: np.ndarray
    Gamma_s: complex
    Gamma_i: complex
    Gamma_b: complex
    Gamma_c: complex
    Gamma_ph: complex
    Pi1: complex
    Pi2: complex

    def __array__(self, dtype=None, copy=None):
        return self.A if dtype is None else self.A.astype(dtype)


@dataclass(frozen=True, eq=False)
class DiffusionMatrix:
    """Diffusion matrix plus the per-mode bath rates and occupations."""

    D: np.ndarray
    rates: tuple[float, ...]
    occupations: tuple[float, ...]
    T: float

    def __array__(self, dtype=None, copy=None):
        return self.D if dtype is None else self.D.astype(dtype)


@dataclass(frozen=True, eq=False)
class StabilityReport:
    max_real: float
    spectrum: np.ndarray
    stable: bool

    @property
    def margin(self) -> float:
        """Distance of the slowest mode from the stability boundary (1/s)."""
        return -self.max_real


def _fill_conjugate_rows(A: np.ndarray) -> None:
    """Complete rows 2k+1 from rows 2k using the pair-conjugation symmetry."""
    for k in range(5):
        a, c = 2 * k, 2 * k + 1
        A[c, 0::2] = np.conj(A[a, 1::2])
        A[c, 1::2] = np.conj(A[a, 0::2])


def build_drift(params: SystemParams, ss: SteadyState) -> DriftMatrix:
    """Assemble the 10x10 drift matrix linearised about ``ss``.

    Only the annihilation rows are written explicitly; each conjugate row is
    its partner's complex conjugate with the pair columns swapped.
    """
    G = params.G
    chi = params.chi_E
    ks, ki, kas, kai = params.kappa_s, params.kappa_i, params.kappa_as, params.kappa_ai
    a_s, a_i, B, C, D = ss.alpha_s, ss.alpha_i, ss.B, ss.C, ss.D
    r31 = ss.rho31
    r13 = ss.rho13

    g_s = params.kappa + 1j * params.delta_sp
    g_i = params.kappa + 1j * params.delta_ip
    g_b = params.gamma_s + 1j * params.delta_stoke
    g_c = params.gamma_as + 1j * params.delta_as
    g_ph = params.gamma_ph + 1j * params.delta_ph
    pi1 = -1j * (ks * a_s + ki * a_i)
    pi2 = -1j * (kas * a_s + kai * a_i)
    # dc enters dd with the conjugated pump means (from a_s+ c, a_i+ c)
    pi2_d = -1j * (kas * np.conj(a_s) + kai * np.conj(a_i))

    A = np.zeros((N_FLUCT, N_FLUCT), dtype=complex)
    # signal
    A[0, 0] = -g_s
    A[0, 2] = -1j * G * r31
    A[0, 3] = -1j * chi
    A[0, 4] = -1j * ks * D
    A[0, 6] = -1j * kas * np.conj(D)
    A[0, 8] = -1j * ks * B
    A[0, 9] = -1j * kas * C
    # idler
    A[2, 0] = -1j * G * r13
    A[2, 1] = -1j * chi
    A[2, 2] = -g_i
    A[2, 4] = -1j * ki * D
    A[2, 6] = -1j * kai * np.conj(D)
    A[2, 8] = -1j * ki * B
    A[2, 9] = -1j * kai * C
    # Stokes
    A[4, 0] = -1j * ks * np.conj(D)
    A[4, 2] = -1j * ki * np.conj(D)
    A[4, 4] = -g_b
    A[4, 9] = pi1
    # anti-Stokes
    A[6, 0] = -1j * kas * D
    A[6, 2] = -1j * kai * D
    A[6, 6] = -g_c
    A[6, 8] = pi2
    # phonon
    A[8, 0] = -1j * ks * np.conj(B)
    A[8, 1] = -1j * kas * C
    A[8, 2] = -1j * ki * np.conj(B)
    A[8, 3] = -1j * kai * C
    A[8, 5] = pi1
    A[8, 6] = pi2_d
    A[8, 8] = -g_ph
    _fill_conjugate_rows(A)
    return DriftMatrix(A, g_s, g_i, g_b, g_c, g_ph, pi1, pi2)


def bath_rates(params: SystemParams) -> tuple[float, ...]:
    """Noise strength of each bosonic bath, in mode order.

    The optical inputs use ``2 kappa`` so that they match the amplitude
    damping ``kappa`` (vacuum stays vacuum); the Raman baths use the
    configured reservoir couplings.
    """
    return (
        2.0 * params.kappa,
        2.0 * params.kappa,
        params.kappa_stoke,
        params.kappa_astoke,
        params.kappa_ph,
    )


def bath_frequencies(params: SystemParams) -> tuple[float, ...]:
    return (params.omega_sL, params.omega_iL, params.omega_stoke, params.omega_as, params.omega_ph)


def build_diffusion(params: SystemParams, T: float | None = None) -> DiffusionMatrix:
    """Phase-insensitive thermal diffusion matrix at temperature ``T``.

    ``D[2k, 2k+1] = rate_k (N_k + 1)`` and ``D[2k+1, 2k] = rate_k N_k``. With
    ``params.correlated_input_noise`` the signal and idler inputs are treated
    as one and the same bath, which fills the signal-idler cross entries.
    """
    T = params.T if T is None else float(T)
    if T < 0:
        raise ValueError(f"temperature must be >= 0, got {T!r}")
    rates = bath_rates(params)
    occ = tuple(thermal_occupation(w, T) for w in bath_frequencies(params))
    D = np.zeros((N_FLUCT, N_FLUCT), dtype=complex)
    for k, (rate, n) in enumerate(zip(rates, occ)):
        D[2 * k, 2 * k + 1] = rate * (n + 1.0)
        D[2 * k + 1, 2 * k] = rate * n
    if params.correlated_input_noise:
        n_bar = np.sqrt(occ[0] * occ[1])
        rate = np.sqrt(rates[0] * rates[1])
        D[0, 3] = D[2, 1] = rate * (n_bar + 1.0)
        D[1, 2] = D[3, 0] = rate * n_bar
    return DiffusionMatrix(D, rates, occ, T)


def stability(A) -> StabilityReport:
    """Eigenvalue stability verdict; strict ``max Re(lambda) < 0``.

    The spectrum is sorted by real part (descending), ties by imaginary part.
    """
    A = np.asarray(A)
    try:
        ev = np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(f"eigenvalue iteration did not converge: {exc}") from exc
    order = np.lexsort((-ev.imag, -ev.real))
    ev = ev[order]
    max_real = float(ev.real[0])
    return StabilityReport(max_real, ev, max_real < 0)


def fdt_warnings(params: SystemParams, rtol: float = 1e-9) -> list[str]:
    """Baths whose noise strength is not twice the mode's amplitude damping."""
    pairs = [
        ("stoke", "kappa_stoke", "gamma_s"),
        ("antistoke", "kappa_astoke", "gamma_as"),
        ("phonon", "kappa_ph", "gamma_ph"),
    ]
    out = []
    for mode, k_name, g_name in pairs:
        k, g = getattr(params, k_name), getattr(params, g_name)
        if abs(k - 2.0 * g) > rtol * max(abs(k), abs(2.0 * g), 1e-300):
            out.append(
                f"{mode}: {k_name}={k:.6g} but 2*{g_name}={2 * g:.6g}; "
                "the bath will not drive this mode to its thermal occupation "
                "and commutators are not preserved"
            )
    return out
