"""Device fleet, inter-device data rates, and stochastic request arrivals.

Device mobility is represented only through re-sampling the rate matrix each
round; there is no channel or mobility model beyond that.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

DEFAULT_RATE_LO = 7.2e6   # bits/s
DEFAULT_RATE_HI = 72.2e6  # bits/s
DEFAULT_P_COMPUTE = 8.0   # watts
DEFAULT_P_TRANSMIT = 10.0 # watts


@dataclass(frozen=True)
class DeviceSpec:
    """One device's budgets: memory and compute/energy per round, plus speed."""

    device_id: int
    memory_cap: float      # bytes
    compute_cap: float     # multiplications per round
    energy_cap: float      # joules per round
    mult_rate: float       # multiplications per second

    def __post_init__(self):
        if self.device_id < 1:
            raise ValueError("device_id must be >= 1")
        for name in ("memory_cap", "compute_cap", "energy_cap", "mult_rate"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")


@dataclass(frozen=True)
class Fleet:
    """Ordered device list with array views the cost engine can vectorize over."""

    devices: tuple[DeviceSpec, ...]

    def __post_init__(self):
        ids = [d.device_id for d in self.devices]
        if ids != list(range(1, len(ids) + 1)):
            raise ValueError("device ids must form a contiguous 1..N sequence")

    @property
    def n_devices(self) -> int:
        return len(self.devices)

    def _array(self, attr: str) -> np.ndarray:
        a = np.array([getattr(d, attr) for d in self.devices], dtype=float)
        a.flags.writeable = False
        return a

    @property
    def memory_caps(self) -> np.ndarray:
        return self._array("memory_cap")

    @property
    def compute_caps(self) -> np.ndarray:
        return self._array("compute_cap")

    @property
    def energy_caps(self) -> np.ndarray:
        return self._array("energy_cap")

    @property
    def mult_rates(self) -> np.ndarray:
        return self._array("mult_rate")

    def scaled(self, memory: float = 1.0, compute: float = 1.0,
               energy: float = 1.0, rate: float = 1.0) -> "Fleet":
        """Same fleet with every budget multiplied by the given factor."""
        return Fleet(tuple(
            DeviceSpec(
                device_id=d.device_id,
                memory_cap=d.memory_cap * memory,
                compute_cap=d.compute_cap * compute,
                energy_cap=d.energy_cap * energy,
                mult_rate=d.mult_rate * rate,
            )
            for d in self.devices
        ))


def two_tier_fleet(n_devices: int,
                   memory_caps: Sequence[float],
                   compute_caps: Sequence[float],
                   energy_caps: Sequence[float],
                   mult_rates: Sequence[float]) -> Fleet:
    """Mixed fleet cycling through the given tier values (low, high, low, ...)."""
    if n_devices < 1:
        raise ValueError("n_devices must be >= 1")
    return Fleet(tuple(
        DeviceSpec(
            device_id=i + 1,
            memory_cap=memory_caps[i % len(memory_caps)],
            compute_cap=compute_caps[i % len(compute_caps)],
            energy_cap=energy_caps[i % len(energy_caps)],
            mult_rate=mult_rates[i % len(mult_rates)],
        )
        for i in range(n_devices)
    ))


@dataclass(frozen=True)
class RateMatrix:
    """Bits-per-second between device pairs for one round.

    The diagonal is never read: a transfer between blocks on the same device
    costs nothing by contract.
    """

    rho: np.ndarray
    round_index: int = 0

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=float)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise ValueError("rho must be a square matrix")
        off = ~np.eye(rho.shape[0], dtype=bool)
        if np.any(rho[off] <= 0):
            raise ValueError("off-diagonal rates must be > 0")
        rho = rho.copy()
        rho.flags.writeable = False
        object.__setattr__(self, "rho", rho)

    @property
    def n_devices(self) -> int:
        return self.rho.shape[0]


@dataclass(frozen=True)
class RequestBatch:
    """How many inference requests arrived this round."""

    round_index: int
    count: int

    def __post_init__(self):
        if self.count < 0:
            raise ValueError("count must be >= 0")


@dataclass(frozen=True)
class EnergyParams:
    """Power draw while computing and while transmitting."""

    p_compute: float = DEFAULT_P_COMPUTE
    p_transmit: float = DEFAULT_P_TRANSMIT

    def __post_init__(self):
        if self.p_compute <= 0 or self.p_transmit <= 0:
            raise ValueError("power draws must be > 0")


def sample_rates(n_devices: int, lo: float = DEFAULT_RATE_LO, hi: float = DEFAULT_RATE_HI,
                 rng: np.random.Generator | None = None, symmetric: bool = True,
                 round_index: int = 0) -> RateMatrix:
    """Draw each pairwise rate uniformly from [lo, hi]; symmetric by default."""
    if not 0 < lo <= hi:
        raise ValueError("need 0 < lo <= hi")
    rng = np.random.default_rng() if rng is None else rng
    rho = rng.uniform(lo, hi, size=(n_devices, n_devices))
    if symmetric:
        iu = np.triu_indices(n_devices, k=1)
        rho[(iu[1], iu[0])] = rho[iu]
    np.fill_diagonal(rho, 0.0)
    if n_devices == 1:
        rho = np.zeros((1, 1))
    return RateMatrix(rho=rho, round_index=round_index)


def sample_requests(lam: float, rng: np.random.Generator | None = None,
                    round_index: int = 0) -> RequestBatch:
    """Poisson-distributed request count for one round."""
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    rng = np.random.default_rng() if rng is None else rng
    return RequestBatch(round_index=round_index, count=int(rng.poisson(lam)))
