"""Mean-field steady state of the driven Raman/plasmon system.

Unknowns are the six complex means ``alpha_s, alpha_i, B, C, D, rho31`` and
the real inversion ``rho2``; ``rho13`` is always ``conj(rho31)``. The same
right-hand side serves as the residual of the stationarity equations and as
the noise-free mean-field ODE used to verify a solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import ConvergenceError, IntegrationError, SingularJacobianError
from .params import ModeId, SystemParams

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 200
_FD_STEP = 1e-8
_ARMIJO_C = 1e-4
_HOMOTOPY_STEPS = 10
_HOMOTOPY_START = 1e-9


@dataclass(frozen=True)
class SteadyState:
    """Mean-field amplitudes at a fixed point.

    ``tol`` is the residual tolerance the state was certified against (None
    for hand-made guesses) and ``residual_norm`` the achieved max-norm.
    """

    alpha_s: complex = 0j
    alpha_i: complex = 0j
    B: complex = 0j
    C: complex = 0j
    D: complex = 0j
    rho31: complex = 0j
    rho2: float = -1.0
    tol: float | None = None
    residual_norm: float = math.nan
    iterations: int = 0

    @property
    def rho13(self) -> complex:
        return self.rho31.conjugate()

    def mean(self, mode: ModeId) -> complex:
        mode = ModeId.parse(mode)
        return {
            ModeId.SIGNAL: self.alpha_s,
            ModeId.IDLER: self.alpha_i,
            ModeId.STOKE: self.B,
            ModeId.ANTISTOKE: self.C,
            ModeId.PHONON: self.D,
            ModeId.ATOM: self.rho31,
        }[mode]

    def to_real(self) -> np.ndarray:
        z = [self.alpha_s, self.alpha_i, self.B, self.C, self.D, self.rho31]
        out = np.empty(13)
        out[0:12:2] = np.real(z)
        out[1:12:2] = np.imag(z)
        out[12] = self.rho2
        return out

    @classmethod
    def from_real(cls, x, **extra) -> "SteadyState":
        x = np.asarray(x, dtype=float)
        z = x[0:12:2] + 1j * x[1:12:2]
        return cls(*(complex(v) for v in z), rho2=float(x[12]), **extra)

    def as_dict(self) -> dict:
        out = {}
        for name in ("alpha_s", "alpha_i", "B", "C", "D", "rho31"):
            v = getattr(self, name)
            out[name] = [v.real, v.imag]
        out["rho2"] = self.rho2
        out["residual_norm"] = self.residual_norm
        out["tol"] = self.tol
        out["iterations"] = self.iterations
        return out


def _rates(params: SystemParams):
    """Complex diagonal rates of the seven mean-field equations."""
    return (
        params.kappa + 1j * params.delta_sp,
        params.kappa + 1j * params.delta_ip,
        params.gamma_s + 1j * params.delta_stoke,
        params.gamma_as + 1j * params.delta_as,
        params.gamma_ph + 1j * params.delta_ph,
        params.gamma_z + 1j * params.delta_0,
    )


def _scales(params: SystemParams) -> np.ndarray:
    mags = [abs(r) for r in _rates(params)] + [params.gamma_z]
    return np.array([m if m > 0 else 1.0 for m in mags])


def mean_field_rhs(z, rho2, params: SystemParams, drive_scale: float = 1.0) -> np.ndarray:
    """Time derivatives of the means, returned as 7 complex numbers.

    ``z`` holds ``(alpha_s, alpha_i, B, C, D, rho31)``; the last entry of the
    result is d(rho2)/dt, which is real for any input.
    """
    a_s, a_i, B, C, D, r31 = z
    r13 = np.conj(r31)
    G_s, G_i, G_b, G_c, G_ph, G_0 = _rates(params)
    G = params.G
    chi = params.chi_E
    ks, ki, kas, kai = params.kappa_s, params.kappa_i, params.kappa_as, params.kappa_ai
    e_s = params.E_cs * drive_scale
    e_i = params.E_ci * drive_scale
    Dc = np.conj(D)
    out = np.empty(7, dtype=complex)
    out[0] = -G_s * a_s - 1j * ks * B * D - 1j * kas * Dc * C - 1j * G * r31 * a_i - 1j * chi * np.conj(a_i) + e_s
    out[1] = -G_i * a_i - 1j * ki * B * D - 1j * kai * Dc * C - 1j * G * r13 * a_s - 1j * chi * np.conj(a_s) + e_i
    out[2] = -G_b * B - 1j * ks * a_s * Dc - 1j * ki * a_i * Dc
    out[3] = -G_c * C - 1j * kas * a_s * D - 1j * kai * a_i * D
    out[4] = (
        -G_ph * D
        - 1j * ks * a_s * np.conj(B) - 1j * kas * np.conj(a_s) * C
        - 1j * ki * a_i * np.conj(B) - 1j * kai * np.conj(a_i) * C
    )
    # +i G: the sign the interaction Hamiltonian gives, consistent with the
    # field and inversion rows
    out[5] = -G_0 * r31 + 1j * G * a_s * np.conj(a_i) * rho2
    out[6] = -params.gamma_z * (rho2 + 1.0) + 2j * G * (r31 * a_i * np.conj(a_s) - r13 * a_s * np.conj(a_i))
    return out


def residual(state: SteadyState, params: SystemParams, drive_scale: float = 1.0) -> np.ndarray:
    """Rate-normalised stationarity residuals (7 complex values).

    Each equation is divided by the modulus of its own damping rate, so the
    entries are dimensionless and comparable with the amplitudes themselves.
    Exactly zero at a fixed point.
    """
    z = (state.alpha_s, state.alpha_i, state.B, state.C, state.D, state.rho31)
    return mean_field_rhs(z, state.rho2, params, drive_scale) / _scales(params)


def _real_residual(x, params, drive_scale):
    z = x[0:12:2] + 1j * x[1:12:2]
    r = mean_field_rhs(z, x[12], params, drive_scale) / _scales(params)
    out = np.empty(13)
    out[0:12:2] = r[:6].real
    out[1:12:2] = r[:6].imag
    out[12] = r[6].real
    return out, float(np.max(np.abs(r)))


def _fd_jacobian(x, f0, fun):
    J = np.empty((f0.size, x.size))
    for j in range(x.size):
        h = _FD_STEP * max(abs(x[j]), 1.0)
        xp = x.copy()
        xp[j] += h
        J[:, j] = (fun(xp)[0] - f0) / h
    return J


def _newton(x0, params, drive_scale, tol, max_iter):
    fun = lambda x: _real_residual(x, params, drive_scale)
    x = np.array(x0, dtype=float)
    f, norm = fun(x)
    for it in range(max_iter + 1):
        if norm < tol:
            return x, norm, it
        if it == max_iter:
            break
        J = _fd_jacobian(x, f, fun)
        try:
            step = np.linalg.solve(J, -f)
        except np.linalg.LinAlgError as exc:
            raise SingularJacobianError(
                f"singular Jacobian at iteration {it} (residual {norm:.3e})",
                residual_norm=norm, iterations=it,
            ) from exc
        if not np.all(np.isfinite(step)):
            raise SingularJacobianError(
                f"non-finite Newton step at iteration {it}", residual_norm=norm, iterations=it
            )
        phi = 0.5 * float(f @ f)
        lam = 1.0
        while True:
            x_new = x + lam * step
            f_new, norm_new = fun(x_new)
            if 0.5 * float(f_new @ f_new) <= (1.0 - 2.0 * _ARMIJO_C * lam) * phi:
                break
            lam *= 0.5
            if lam < 1e-12:
                # No sufficient decrease; take the tiny step and let the
                # iteration budget decide.
                break
        x, f, norm = x_new, f_new, norm_new
    raise ConvergenceError(
        f"Newton did not converge in {max_iter} iterations (residual {norm:.3e})",
        residual_norm=norm, iterations=max_iter,
    )


def solve(
    params: SystemParams,
    guess: SteadyState | None = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> SteadyState:
    """Damped Newton solve of the stationarity equations.

    Starts from ``guess`` (default: empty modes, atom in the ground state).
    If the direct solve fails, the drive power is ramped geometrically from
    ``1e-9`` of its value up to full power, re-solving at every step.

    Raises
    ------
    ConvergenceError
        Residual still above ``tol`` after ``max_iter`` iterations.
    SingularJacobianError
        The finite-difference Jacobian could not be solved.
    """
    if not tol > 0:
        raise ValueError("tol must be > 0")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    x0 = (guess or SteadyState()).to_real()
    try:
        x, norm, its = _newton(x0, params, 1.0, tol, max_iter)
    except ConvergenceError as direct:
        x = SteadyState().to_real()
        its = 0
        try:
            for s in np.geomspace(_HOMOTOPY_START, 1.0, _HOMOTOPY_STEPS):
                x, norm, k = _newton(x, params, math.sqrt(s), tol, max_iter)
                its += k
        except ConvergenceError as exc:
            raise type(exc)(
                f"{direct}; drive-power continuation also failed: {exc}",
                residual_norm=min(direct.residual_norm, exc.residual_norm),
                iterations=direct.iterations + its + exc.iterations,
            ) from exc
    return SteadyState.from_real(x, tol=tol, residual_norm=norm, iterations=its)


def default_horizon(params: SystemParams) -> float:
    """Ten decay times of the slowest driven (optical or atomic) mean."""
    rates = [r for r in (params.kappa, params.gamma_z) if r > 0]
    return 10.0 / min(rates)


def verify_fixed_point(
    state: SteadyState,
    params: SystemParams,
    horizon: float | None = None,
    n_samples: int = 200,
) -> float:
    """Integrate the noise-free mean-field equations starting at ``state``.

    Returns the largest relative deviation of any single mean over
    ``horizon`` seconds: ``|z_k(t) - z_k*| / |z_k*|`` for every complex mean
    and for ``rho2`` (absolute for means that are exactly zero). A stable
    fixed point gives a value at the integrator's noise level.
    """
    horizon = default_horizon(params) if horizon is None else float(horizon)
    if not horizon > 0:
        raise ValueError("horizon must be > 0")
    x_star = state.to_real()
    t_unit = 1.0 / max(abs(r) for r in _rates(params) + (params.gamma_z, 1.0))

    def rhs(tau, x):
        z = x[0:12:2] + 1j * x[1:12:2]
        dz = mean_field_rhs(z, x[12], params) * t_unit
        out = np.empty(13)
        out[0:12:2] = dz[:6].real
        out[1:12:2] = dz[:6].imag
        out[12] = dz[6].real
        return out

    tau_end = horizon / t_unit
    t_eval = np.linspace(0.0, tau_end, n_samples)
    z_star = np.append(x_star[0:12:2] + 1j * x_star[1:12:2], x_star[12])
    mags = np.abs(z_star)
    atol = 1e-12 * np.repeat(np.where(mags > 0, mags, 1.0), [2] * 6 + [1])
    sol = solve_ivp(rhs, (0.0, tau_end), x_star, method="LSODA", t_eval=t_eval, rtol=1e-10, atol=atol)
    if not sol.success:
        raise IntegrationError(f"mean-field integration failed: {sol.message}")
    y = sol.y
    z = np.vstack([y[0:12:2] + 1j * y[1:12:2], y[12:13]])
    dev = np.abs(z - z_star[:, None]).max(axis=1)
    rel = np.where(mags > 0, dev / np.where(mags > 0, mags, 1.0), dev)
    return float(rel.max())
