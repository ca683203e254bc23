"""System parameters with Table-style defaults and their linear-unit view."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field, fields
from pathlib import Path


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def dbw_to_mw(x_dbw: float) -> float:
    return 1e3 * db_to_linear(x_dbw)


@dataclass(frozen=True)
class SystemParams:
    """All physical constants of the routing model, in configuration units.

    Keys are the flat names accepted by config files and ``--set`` flags.
    Logarithmic quantities (dB, dBi, dBW) are converted once, by
    :meth:`channel`.
    """

    n_g: int = 1000
    n_s: int = 1000
    r_earth_km: float = 6371.0
    h_s_km: float = 1000.0
    theta_big: float = math.pi
    omega: float = 1.29
    b0: float = 0.158
    n0: float = 19.4
    eta_s: float = 1.00526
    a0: float = 3.2120
    sigma_jitter_rad: float = 0.015
    lambda_st_nm: float = 1550.0
    lambda_ss_nm: float = 1550.0
    zeta_st_db: float = -2.0
    zeta_ss_db: float = 0.0
    g_st_dbi: float = 41.7
    g_ss_dbi: float = 41.7
    b_st_hz: float = 20e6
    b_ss_hz: float = 20e6
    noise_sat_mw: float = 1e-10
    noise_gnd_mw: float = 1e-10
    p_t1_dbw: float = 15.0
    p_t2_dbw: float = 15.0
    p_t3_dbw: float = 15.0
    lmax1_km: float = 3000.0
    lmax2_km: float = 3000.0
    lmax3_km: float = 3000.0
    beta: float = 5.0
    epsilon: float = 0.05
    n_in: int = 20

    @property
    def r_sat_km(self) -> float:
        return self.r_earth_km + self.h_s_km

    def replace(self, **changes) -> "SystemParams":
        return dataclasses.replace(self, **changes)

    def at_altitude(self, h_s_km: float) -> "SystemParams":
        """Same parameters at another altitude, with range limits clamped so
        ground links stay above the horizon and inter-satellite links clear
        the Earth's shadow chord."""
        r_sat = self.r_earth_km + h_s_km
        horizon = math.sqrt(r_sat**2 - self.r_earth_km**2)
        return self.replace(h_s_km=h_s_km, lmax1_km=min(self.lmax1_km, horizon),
                            lmax2_km=min(self.lmax2_km, horizon),
                            lmax3_km=min(self.lmax3_km, 2.0 * horizon))

    def channel(self) -> "ChannelParams":
        return ChannelParams(
            r_earth=self.r_earth_km,
            r_sat=self.r_sat_km,
            omega=self.omega,
            b0=self.b0,
            n0=self.n0,
            eta_s=self.eta_s,
            a0=self.a0,
            sigma_jitter=self.sigma_jitter_rad,
            lambda_st=self.lambda_st_nm * 1e-9,
            lambda_ss=self.lambda_ss_nm * 1e-9,
            zeta_st=db_to_linear(self.zeta_st_db),
            zeta_ss=db_to_linear(self.zeta_ss_db),
            g_st=db_to_linear(self.g_st_dbi),
            g_ss=db_to_linear(self.g_ss_dbi),
            b_st=self.b_st_hz,
            b_ss=self.b_ss_hz,
            noise_sat=self.noise_sat_mw,
            noise_gnd=self.noise_gnd_mw,
            p1=dbw_to_mw(self.p_t1_dbw),
            p2=dbw_to_mw(self.p_t2_dbw),
            p3=dbw_to_mw(self.p_t3_dbw),
            lmax1=self.lmax1_km,
            lmax2=self.lmax2_km,
            lmax3=self.lmax3_km,
            beta=self.beta,
        )

    def scaling_context(self) -> "ScalingContext":
        return ScalingContext(self.n_s, self.n_g, self.r_earth_km, self.r_sat_km)


@dataclass(frozen=True)
class ChannelParams:
    """Linear-unit channel constants. Lengths in km, wavelengths in m, powers in mW."""

    r_earth: float
    r_sat: float
    omega: float
    b0: float
    n0: float
    eta_s: float
    a0: float
    sigma_jitter: float
    lambda_st: float
    lambda_ss: float
    zeta_st: float
    zeta_ss: float
    g_st: float
    g_ss: float
    b_st: float
    b_ss: float
    noise_sat: float
    noise_gnd: float
    p1: float
    p2: float
    p3: float
    lmax1: float
    lmax2: float
    lmax3: float
    beta: float

    def __post_init__(self):
        positive = ("lambda_st", "lambda_ss", "g_st", "g_ss", "b_st", "b_ss",
                    "noise_sat", "noise_gnd", "p1", "p2", "p3", "zeta_st",
                    "lmax1", "lmax2", "lmax3", "eta_s", "a0", "n0")
        for name in positive:
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")
        if self.omega < 0 or self.b0 < 0 or self.omega + self.b0 <= 0:
            raise ValueError("shadowed-Rician parameters must be non-negative, not both zero")
        if self.sigma_jitter < 0:
            raise ValueError("jitter std must be non-negative")
        if abs(self.zeta_ss - 1.0) > 1e-12:
            raise ValueError("inter-satellite air attenuation must be 0 dB")
        if self.beta < 1.0:
            raise ValueError("price ratio factor must be >= 1")
        if not self.r_sat > self.r_earth > 0:
            raise ValueError("satellite radius must exceed Earth radius")
        horizon = math.sqrt(self.r_sat**2 - self.r_earth**2)
        if self.lmax1 > horizon * (1 + 1e-12) or self.lmax2 > horizon * (1 + 1e-12):
            raise ValueError(f"ground-satellite max distance exceeds horizon {horizon:.1f} km")
        if self.lmax3 > 2 * horizon * (1 + 1e-12):
            raise ValueError(f"inter-satellite max distance exceeds {2 * horizon:.1f} km")

    @property
    def h_s(self) -> float:
        return self.r_sat - self.r_earth

    def replace(self, **changes) -> "ChannelParams":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class ScalingContext:
    n_sat: int
    n_gw: int
    r_earth: float
    r_sat: float


PARAM_NAMES = tuple(f.name for f in fields(SystemParams))


def _coerce(name: str, raw: str):
    kind = type(getattr(SystemParams(), name))
    if kind is int:
        return int(float(raw))
    return float(raw)


def parse_overrides(pairs) -> dict:
    """Parse ``key=value`` strings (config lines or ``--set`` flags)."""
    out = {}
    for item in pairs:
        if "=" not in item:
            raise ValueError(f"expected key=value, got {item!r}")
        key, raw = (s.strip() for s in item.split("=", 1))
        if key not in PARAM_NAMES:
            raise KeyError(f"unknown parameter {key!r}")
        out[key] = _coerce(key, raw)
    return out


def load_config(path: str | Path | None, overrides=()) -> SystemParams:
    """Defaults, then the key-value file, then ``overrides`` on top."""
    values = {}
    if path is not None:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        cleaned = [ln.split("#", 1)[0].strip() for ln in lines]
        values.update(parse_overrides([ln for ln in cleaned if ln]))
    values.update(parse_overrides(overrides))
    params = SystemParams(**values)
    params.channel()  # validate eagerly
    return params
