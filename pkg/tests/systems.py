"""Random but physically valid systems shared by several test modules."""

from dataclasses import replace

import numpy as np

from raman_langevin.linear_system import build_diffusion, build_drift, stability
from raman_langevin.params import SystemParams
from raman_langevin.steady_state import SteadyState


def loguniform(rng, lo, hi):
    return float(np.exp(rng.uniform(np.log(lo), np.log(hi))))


def random_params(rng, fdt=True):
    """Parameters over a compressed rate range (1e8..1e11 1/s)."""
    kappa = loguniform(rng, 1e9, 1e11)
    ks = {name: loguniform(rng, 1e8, 1e10) for name in ("kappa_stoke", "kappa_astoke", "kappa_ph")}
    p = replace(
        SystemParams(),
        kappa=kappa,
        chi_E=rng.uniform(0, 0.8) * kappa,
        delta_sp=rng.normal() * kappa,
        delta_ip=rng.normal() * kappa,
        delta_stoke=rng.normal() * 1e10,
        delta_as=rng.normal() * 1e10,
        delta_ph=rng.normal() * 1e10,
        kappa_s=loguniform(rng, 1e6, 1e8),
        kappa_i=loguniform(rng, 1e6, 1e8),
        kappa_as=loguniform(rng, 1e6, 1e8),
        kappa_ai=loguniform(rng, 1e6, 1e8),
        g_s=loguniform(rng, 1e8, 1e10),
        T=rng.uniform(0, 20),
        **ks,
    )
    if fdt:
        p = replace(p, gamma_s=p.kappa_stoke / 2, gamma_as=p.kappa_astoke / 2, gamma_ph=p.kappa_ph / 2)
    else:
        p = replace(p, gamma_s=loguniform(rng, 1e8, 1e10), gamma_as=loguniform(rng, 1e8, 1e10),
                    gamma_ph=loguniform(rng, 1e8, 1e10))
    return p


def random_state(rng, scale=1.0):
    z = scale * (rng.normal(size=6) + 1j * rng.normal(size=6))
    return SteadyState(*z[:5], rho31=0.3 * z[5] / max(abs(z[5]), 1.0), rho2=rng.uniform(-1, 0))


def random_stable_system(rng, max_tries=200):
    """``(params, state, A, D)`` with a strictly stable drift matrix."""
    for _ in range(max_tries):
        p = random_params(rng)
        ss = random_state(rng, scale=rng.choice([1.0, 10.0, 100.0]))
        A = build_drift(p, ss).A
        if stability(A).max_real < 0:
            return p, ss, A, build_diffusion(p).D
    raise RuntimeError("no stable draw found")


def parametric_block(chi, kappa=0.0, noise=True):
    """Signal/idler two-mode squeezer; the Raman slots just decay.

    ``kappa = 0`` gives the undamped, noiseless (pure-state) evolution.
    """
    A = np.zeros((10, 10), dtype=complex)
    A[0, 3] = A[2, 1] = -1j * chi
    A[1, 2] = A[3, 0] = 1j * chi
    for i in range(10):
        A[i, i] = -kappa
    D = np.zeros((10, 10), dtype=complex)
    if noise:
        for k in range(5):
            D[2 * k, 2 * k + 1] = 2 * kappa
    return A, D


# rotation of the idler quadratures mapping the -i chi phase onto the
# conventional C = s * diag(1, -1) form
IDLER_QUARTER_TURN = np.block([
    [np.eye(2), np.zeros((2, 2))],
    [np.zeros((2, 2)), np.array([[0.0, -1.0], [1.0, 0.0]])],
])


def standard_phase(V):
    R = IDLER_QUARTER_TURN
    return R @ V @ R.T
