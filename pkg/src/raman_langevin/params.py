"""Physical constants, model parameters and configuration I/O.

All frequencies, detunings and rates are angular (rad/s) and every quantity
is SI. The configuration file is TOML with flat sections::

    [geometry] [frequencies] [detunings] [couplings]
    [decays]   [drive]       [environment] [profile]

Keys are named exactly like the :class:`SystemParams` fields, except that
``[drive]`` also accepts ``E_p`` (pump field in V/m) as an alternative to
``chi_E``, and ``[profile]`` holds the two arrays ``r`` and ``scale``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Mapping

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ConfigError


class PhysicalConstants:
    """CODATA 2018 exact/recommended values. Not configurable."""

    hbar = 1.054571817e-34  # J s
    k_B = 1.380649e-23  # J / K
    c = 2.99792458e8  # m / s


HBAR = PhysicalConstants.hbar
K_B = PhysicalConstants.k_B
C_LIGHT = PhysicalConstants.c


class ModeId(enum.Enum):
    """Physical modes of the model.

    The five bosonic modes own two consecutive slots of the fluctuation
    vector ``[da_s, da_s+, da_i, da_i+, db, db+, dc, dc+, dd, dd+]``: slot
    ``2k`` is the annihilation-type fluctuation and ``2k + 1`` its conjugate.
    The atom has no slot.
    """

    SIGNAL = "signal"
    IDLER = "idler"
    STOKE = "stoke"
    ANTISTOKE = "antistoke"
    PHONON = "phonon"
    ATOM = "atom"

    @property
    def index(self) -> int:
        """Bosonic index ``k`` (0..4); the annihilation slot is ``2k``."""
        if self is ModeId.ATOM:
            raise ValueError("the atom is not part of the fluctuation vector")
        return _BOSONIC_ORDER.index(self)

    @property
    def slots(self) -> tuple[int, int]:
        k = self.index
        return 2 * k, 2 * k + 1

    @classmethod
    def parse(cls, name: "str | ModeId") -> "ModeId":
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower().replace("-", "").replace("_", "")
        aliases = {"stokes": "stoke", "antistokes": "antistoke"}
        key = aliases.get(key, key)
        for mode in cls:
            if mode.value == key:
                return mode
        raise ValueError(f"unknown mode {name!r}")


BOSONIC_MODES = (ModeId.SIGNAL, ModeId.IDLER, ModeId.STOKE, ModeId.ANTISTOKE, ModeId.PHONON)
_BOSONIC_ORDER = list(BOSONIC_MODES)
N_FLUCT = 10


def thermal_occupation(omega, T):
    """Bose-Einstein occupation ``1 / (exp(hbar*omega / (k_B*T)) - 1)``.

    Parameters
    ----------
    omega : float
        Angular frequency in rad/s, must be positive.
    T : float
        Temperature in K, ``T >= 0``. ``T = 0`` gives exactly 0.
    """
    omega = float(omega)
    T = float(T)
    if not omega > 0:
        raise ValueError(f"thermal_occupation needs omega > 0, got {omega!r}")
    if T < 0:
        raise ValueError(f"thermal_occupation needs T >= 0, got {T!r}")
    if T == 0:
        return 0.0
    # divide by T last: K_B*T underflows to 0 for subnormal T
    x = (HBAR * omega / K_B) / T
    # e^-x / (1 - e^-x) does not overflow for large x
    return math.exp(-x) / -math.expm1(-x)


def drive_amplitude(P_c, kappa, omega):
    """Classical drive rate ``sqrt(2 P_c kappa / (hbar omega))`` in 1/s."""
    if P_c < 0:
        raise ValueError(f"drive power must be >= 0, got {P_c!r}")
    if not kappa > 0:
        raise ValueError(f"kappa must be > 0, got {kappa!r}")
    if not omega > 0:
        raise ValueError(f"omega must be > 0, got {omega!r}")
    return math.sqrt(2.0 * P_c * kappa / (HBAR * omega))


def angular_frequency(wavelength):
    return 2.0 * math.pi * C_LIGHT / wavelength


@dataclass(frozen=True)
class CouplingProfile:
    """Tabulated multiplicative scale for the molecule couplings ``g_s, g_i``.

    Piecewise linear in ``r`` between knots and clamped to the end values
    outside them.
    """

    r: tuple[float, ...]
    scale: tuple[float, ...]

    def __post_init__(self):
        r = tuple(float(v) for v in self.r)
        s = tuple(float(v) for v in self.scale)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "scale", s)
        if len(r) == 0 or len(r) != len(s):
            raise ConfigError("profile needs equally long, non-empty r and scale", key="profile")
        if any(not math.isfinite(v) for v in r + s):
            raise ConfigError("profile values must be finite", key="profile")
        if any(b <= a for a, b in zip(r, r[1:])):
            raise ConfigError("profile knots r must be strictly increasing", key="profile.r")
        if any(v < 0 for v in s):
            raise ConfigError("profile scale must be >= 0 at every knot", key="profile.scale")

    def __call__(self, r_mol: float) -> float:
        return float(np.interp(float(r_mol), self.r, self.scale))


_OMEGA_S_DEFAULT = angular_frequency(532e-9)
_OMEGA_I_DEFAULT = angular_frequency(650e-9)
_OMEGA_PH_DEFAULT = 1e9


@dataclass(frozen=True)
class SystemParams:
    """Every model input. Defaults are the reference parameter set.

    Instances are immutable; derive variants with :func:`dataclasses.replace`.
    Dependent defaults (mode frequencies from the wavelengths) are only
    resolved by :func:`load_config`, so replacing ``lambda_s`` does not move
    ``omega_sp``.
    """

    # frequencies
    lambda_s: float = 532e-9
    lambda_i: float = 650e-9
    omega_sp: float = _OMEGA_S_DEFAULT
    omega_ip: float = _OMEGA_I_DEFAULT
    omega_stoke: float = _OMEGA_S_DEFAULT - _OMEGA_PH_DEFAULT
    omega_as: float = _OMEGA_S_DEFAULT + _OMEGA_PH_DEFAULT
    omega_ph: float = _OMEGA_PH_DEFAULT
    omega_0: float = _OMEGA_S_DEFAULT - _OMEGA_I_DEFAULT
    # detunings
    delta_sp: float = 0.0
    delta_ip: float = 0.0
    delta_stoke: float = 1e12
    delta_as: float = 0.0
    delta_ph: float = 0.0
    delta_0: float = 0.0
    # couplings
    kappa_s: float = 2.5e8
    kappa_i: float = 2.5e8
    kappa_as: float = 0.5e8
    kappa_ai: float = 0.5e8
    g_s: float = 1e9
    g_i: float = 1e9
    delta_adb: float = 1e11
    # decays
    kappa: float = 1e13
    gamma_s: float = 5e8
    gamma_as: float = 5e7
    gamma_ph: float = 50.0
    gamma_z: float = 5e7
    kappa_stoke: float = 1e9
    kappa_astoke: float = 1e8
    kappa_ph: float = 1e2
    gamma_21: float = 1e5
    gamma_23: float = 1e6
    # drive
    chi2: float = 1e-12
    chi_E: float = 1e11
    P_c: float = 10e-3
    # environment
    T: float = 0.1
    correlated_input_noise: bool = False
    # geometry
    r0: float = 15e-9
    r1: float = 25e-9
    r2: float = 30e-9
    r_mol: float = 20e-9
    profile: CouplingProfile | None = None
    # names of fields that were filled from defaults by load_config
    defaulted: frozenset = field(default=frozenset(), compare=False, repr=False)

    def __post_init__(self):
        for f in fields(self):
            if f.name in ("profile", "defaulted", "correlated_input_noise"):
                continue
            v = getattr(self, f.name)
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"{f.name} must be a real number, got {v!r}", key=f.name)
            if not math.isfinite(v):
                raise ConfigError(f"{f.name} must be finite, got {v!r}", key=f.name)
            object.__setattr__(self, f.name, float(v))
        if not isinstance(self.correlated_input_noise, bool):
            raise ConfigError("correlated_input_noise must be a boolean", key="correlated_input_noise")
        for name in _NONNEGATIVE_KEYS:
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0, got {getattr(self, name)!r}", key=name)
        for name in ("kappa", "lambda_s", "lambda_i"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be > 0, got {getattr(self, name)!r}", key=name)
        for name in ("omega_sp", "omega_ip", "omega_stoke", "omega_as", "omega_ph"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be > 0, got {getattr(self, name)!r}", key=name)
        if not (0 <= self.r0 < self.r1 < self.r2):
            raise ConfigError(
                f"geometry must satisfy 0 <= r0 < r1 < r2, got r0={self.r0}, r1={self.r1}, r2={self.r2}",
                key="r0" if self.r0 < 0 else ("r1" if self.r0 >= self.r1 else "r2"),
            )
        if self.g_s * self.g_i != 0 and self.delta_adb == 0:
            raise ConfigError("delta_adb must be nonzero when g_s*g_i != 0", key="delta_adb")
        if self.chi2 == 0 and self.chi_E != 0:
            raise ConfigError("chi_E != 0 requires a nonzero chi2", key="chi_E")
        if self.profile is not None and not isinstance(self.profile, CouplingProfile):
            raise ConfigError("profile must be a CouplingProfile", key="profile")

    # -- derived quantities ------------------------------------------------
    @property
    def omega_sL(self) -> float:
        return angular_frequency(self.lambda_s)

    @property
    def omega_iL(self) -> float:
        return angular_frequency(self.lambda_i)

    @property
    def E_cs(self) -> float:
        return drive_amplitude(self.P_c, self.kappa, self.omega_sL)

    @property
    def E_ci(self) -> float:
        return drive_amplitude(self.P_c, self.kappa, self.omega_iL)

    @property
    def E_f(self) -> float:
        """Nonlinear drive field ``chi_E / chi2`` (0 when ``chi2 = 0``)."""
        return self.chi_E / self.chi2 if self.chi2 != 0 else 0.0

    @property
    def E_p(self) -> float:
        """Pump magnitude giving ``E_f = |E_p|/2 * sqrt(omega_sp omega_ip)``."""
        return 2.0 * self.E_f / math.sqrt(self.omega_sp * self.omega_ip)

    @property
    def G(self) -> float:
        return effective_couplings(self, self.r_mol)[0]

    def derived(self) -> dict[str, float]:
        return {
            "omega_sL": self.omega_sL,
            "omega_iL": self.omega_iL,
            "E_cs": self.E_cs,
            "E_ci": self.E_ci,
            "E_f": self.E_f,
            "E_p": self.E_p,
            "G": self.G,
        }


def effective_couplings(params: SystemParams, r_mol: float | None = None):
    """Location-scaled couplings ``(G, g_s_eff, g_i_eff)``.

    ``g_eff = g * profile(r_mol)`` and ``G = 2 g_s_eff g_i_eff / delta_adb``.
    Without a profile the scale is 1.
    """
    r = params.r_mol if r_mol is None else r_mol
    scale = params.profile(r) if params.profile is not None else 1.0
    gs = params.g_s * scale
    gi = params.g_i * scale
    if gs * gi == 0:
        return 0.0, gs, gi
    if params.delta_adb == 0:
        raise ConfigError("delta_adb must be nonzero when g_s*g_i != 0", key="delta_adb")
    return 2.0 * gs * gi / params.delta_adb, gs, gi


# -- configuration documents ---------------------------------------------

_NONNEGATIVE_KEYS = (
    "gamma_s", "gamma_as", "gamma_ph", "gamma_z", "gamma_21", "gamma_23",
    "kappa_stoke", "kappa_astoke", "kappa_ph", "T", "P_c", "chi2", "r_mol",
)

SECTIONS: dict[str, tuple[str, ...]] = {
    "geometry": ("r0", "r1", "r2", "r_mol"),
    "frequencies": (
        "lambda_s", "lambda_i", "omega_sp", "omega_ip",
        "omega_stoke", "omega_as", "omega_ph", "omega_0",
    ),
    "detunings": ("delta_sp", "delta_ip", "delta_stoke", "delta_as", "delta_ph", "delta_0"),
    "couplings": ("kappa_s", "kappa_i", "kappa_as", "kappa_ai", "g_s", "g_i", "delta_adb"),
    "decays": (
        "kappa", "gamma_s", "gamma_as", "gamma_ph", "gamma_z",
        "kappa_stoke", "kappa_astoke", "kappa_ph", "gamma_21", "gamma_23",
    ),
    "drive": ("chi2", "chi_E", "E_p", "P_c"),
    "environment": ("T", "correlated_input_noise"),
    "profile": ("r", "scale"),
}

# Measured inputs without a sensible generic default; a document must state them.
REQUIRED_KEYS = (
    "lambda_s", "lambda_i", "omega_ph", "kappa", "kappa_stoke", "kappa_astoke",
    "kappa_ph", "kappa_s", "kappa_i", "kappa_as", "kappa_ai", "P_c", "chi2", "gamma_z",
)


def _resolve_defaults(values: dict) -> dict:
    """Fill absent keys; dependent defaults follow the supplied primaries."""
    base = SystemParams()
    out = dict(values)
    w_sL = angular_frequency(out["lambda_s"])
    w_iL = angular_frequency(out["lambda_i"])
    dependent = {
        "omega_sp": lambda: w_sL + out["delta_sp"],
        "omega_ip": lambda: w_iL + out["delta_ip"],
        "omega_stoke": lambda: w_sL - out["omega_ph"],
        "omega_as": lambda: w_sL + out["omega_ph"],
        "omega_0": lambda: out["omega_sp"] - out["omega_ip"],
        # fluctuation-dissipation partner of each reservoir coupling
        "gamma_s": lambda: out["kappa_stoke"] / 2.0,
        "gamma_as": lambda: out["kappa_astoke"] / 2.0,
        "gamma_ph": lambda: out["kappa_ph"] / 2.0,
    }
    order = [
        "delta_sp", "delta_ip", "delta_stoke", "delta_as", "delta_ph", "delta_0",
        "omega_sp", "omega_ip", "omega_stoke", "omega_as", "omega_0",
        "gamma_s", "gamma_as", "gamma_ph",
    ]
    defaulted = set()
    for name in order:
        if name not in out:
            out[name] = dependent[name]() if name in dependent else getattr(base, name)
            defaulted.add(name)
    for f in fields(SystemParams):
        if f.name in ("defaulted", "profile") or f.name in out:
            continue
        out[f.name] = getattr(base, f.name)
        defaulted.add(f.name)
    out["defaulted"] = frozenset(defaulted)
    return out


def params_from_mapping(doc: Mapping) -> SystemParams:
    """Validate a parsed configuration mapping and build :class:`SystemParams`."""
    if not isinstance(doc, Mapping):
        raise ConfigError("configuration must be a table of sections")
    values: dict = {}
    profile = None
    for section, body in doc.items():
        if section not in SECTIONS:
            raise ConfigError(f"unknown section [{section}]", key=section)
        if not isinstance(body, Mapping):
            raise ConfigError(f"[{section}] must be a table", key=section)
        for key, val in body.items():
            if key not in SECTIONS[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]", key=key)
            if section == "profile":
                continue
            values[key] = val
        if section == "profile":
            if "r" not in body or "scale" not in body:
                raise ConfigError("[profile] needs both r and scale", key="profile")
            profile = CouplingProfile(tuple(body["r"]), tuple(body["scale"]))

    missing = [k for k in REQUIRED_KEYS if k not in values]
    if missing:
        raise ConfigError("missing required keys: " + ", ".join(missing), keys=missing)

    for key, val in values.items():
        if key == "correlated_input_noise":
            if not isinstance(val, bool):
                raise ConfigError("correlated_input_noise must be true or false", key=key)
        elif isinstance(val, bool) or not isinstance(val, (int, float)):
            raise ConfigError(f"{key} must be a number, got {val!r}", key=key)

    if "E_p" in values:
        if "chi_E" in values:
            raise ConfigError("give either E_p or chi_E, not both", key="E_p")
        e_p = float(values.pop("E_p"))
        omega_sp = values.get("omega_sp", angular_frequency(values["lambda_s"]) + values.get("delta_sp", 0.0))
        omega_ip = values.get("omega_ip", angular_frequency(values["lambda_i"]) + values.get("delta_ip", 0.0))
        values["chi_E"] = values["chi2"] * abs(e_p) / 2.0 * math.sqrt(omega_sp * omega_ip)

    for name in ("lambda_s", "lambda_i"):
        if not values[name] > 0:
            raise ConfigError(f"{name} must be > 0, got {values[name]!r}", key=name)

    resolved = _resolve_defaults(values)
    resolved["profile"] = profile
    return SystemParams(**resolved)


def load_config(source: str) -> SystemParams:
    """Parse a TOML configuration document (the text, not a path)."""
    try:
        doc = tomllib.loads(source)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse configuration: {exc}") from exc
    return params_from_mapping(doc)


def read_config(path) -> SystemParams:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read configuration {path}: {exc}") from exc
    return load_config(text)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    return repr(float(value))


def dump_config(params: SystemParams) -> str:
    """Serialise to a TOML document that :func:`load_config` reads back exactly."""
    lines = []
    for section, keys in SECTIONS.items():
        if section == "profile":
            if params.profile is not None:
                lines.append("[profile]")
                lines.append("r = [" + ", ".join(_fmt(v) for v in params.profile.r) + "]")
                lines.append("scale = [" + ", ".join(_fmt(v) for v in params.profile.scale) + "]")
                lines.append("")
            continue
        lines.append(f"[{section}]")
        for key in keys:
            if key == "E_p":
                continue
            value = getattr(params, key)
            lines.append(f"{key} = {_fmt(value)}")
        lines.append("")
    return "\n".join(lines)


def defaults_document() -> str:
    """The full defaulted configuration (what ``print-defaults`` emits)."""
    return dump_config(SystemParams())


def with_defaults_flagged(params: SystemParams, **changes) -> SystemParams:
    """``dataclasses.replace`` that keeps the ``defaulted`` bookkeeping."""
    flagged = params.defaulted - set(changes)
    return replace(params, defaulted=frozenset(flagged), **changes)
