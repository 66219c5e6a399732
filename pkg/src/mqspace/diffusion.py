"""Longitudinal magnetization transfer runs over a time grid.

A run starts from a diagonal base operator, evolves it under a
zero-quantum Hamiltonian and records the amplitude bins at every grid
point. Two engines produce the same trace: a full-space conjugation per
time point, and a block-wise path that evolves each magnetization block
independently and therefore touches far fewer matrix entries. Purging
is modeled algebraically by zeroing the spin-order and coherence bins.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import ConfigurationError
from .operators import (
    CARTESIAN,
    BaseOperatorSpec,
    Operator,
    SpinSystem,
    build_operator,
)
from .subspaces import decompose_zq, selective_blocks, zq_offdiagonal_cells
from .dynamics import (
    AmplitudeProfile,
    HamiltonianSpec,
    _diagonal_labels,
    _profile_of,
    amplitude_profile,
    blockwise_conjugate,
    build_hamiltonian,
)

__all__ = [
    "DiffusionConfig",
    "DiffusionTrace",
    "linear_times",
    "purge",
    "run_diffusion",
    "run_blockwise",
    "channel_discrepancy",
]

TrackSpec = Union[str, tuple]


def linear_times(start: float, end: float, points: int) -> tuple[float, ...]:
    """Uniform grid of ``points`` times from ``start`` to ``end`` inclusive."""
    if points < 2:
        raise ConfigurationError(f"a time grid needs at least 2 points, got {points}")
    if not 0 <= start < end:
        raise ConfigurationError(
            f"need 0 <= start < end, got start={start!r} end={end!r}"
        )
    return tuple(float(t) for t in np.linspace(start, end, points))


def _channel_labels(n: int) -> tuple[tuple[str, ...], tuple[str, ...], tuple[str, ...]]:
    """Label universe: longitudinal, spin-order, coherence channels."""
    diagonal = _diagonal_labels(n)
    longitudinal = tuple(
        diagonal[s] for s in range(1, 1 << n) if s.bit_count() == 1
    )
    orders = tuple(diagonal[s] for s in range(1, 1 << n) if s.bit_count() > 1)
    _, _, units = zq_offdiagonal_cells(n)
    return longitudinal, orders, units


@dataclass(frozen=True)
class DiffusionConfig:
    """Frozen description of one transfer experiment.

    ``times`` is always an explicit grid here; use :func:`linear_times`
    to build a uniform one. ``track`` is either the string ``"all"`` or
    a tuple of channel labels; ``initial`` must name a traceless
    diagonal base operator (so ``"E/2"`` is rejected).
    """

    system: SpinSystem
    hamiltonian: HamiltonianSpec
    times: tuple[float, ...]
    initial: str = "I1z"
    purge: bool = False
    track: TrackSpec = "all"

    def __post_init__(self) -> None:
        times = tuple(float(t) for t in self.times)
        if not times:
            raise ConfigurationError("time grid is empty")
        if times[0] < 0:
            raise ConfigurationError(f"times must be non-negative, got {times[0]!r}")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ConfigurationError("time grid must be strictly increasing")
        object.__setattr__(self, "times", times)

        spec = BaseOperatorSpec.from_label(self.initial, self.system.n)
        if spec.kind != CARTESIAN or any(f not in ("e", "z") for f in spec.factors):
            raise ConfigurationError(
                f"initial operator {self.initial!r} is not diagonal"
            )
        if all(f == "e" for f in spec.factors):
            raise ConfigurationError(
                "initial operator 'E/2' has trace; transfer runs start from "
                "a traceless diagonal base operator"
            )

        if self.track != "all":
            track = tuple(str(lab) for lab in self.track)
            if not track:
                raise ConfigurationError("track list is empty; use 'all' or labels")
            longitudinal, orders, units = _channel_labels(self.system.n)
            known = set(longitudinal) | set(orders) | set(units)
            for lab in track:
                if lab not in known:
                    raise ConfigurationError(
                        f"unknown channel label {lab!r} for n={self.system.n}"
                    )
            if len(set(track)) != len(track):
                raise ConfigurationError("track list repeats a label")
            object.__setattr__(self, "track", track)

    def tracked_labels(self) -> tuple[str, ...]:
        longitudinal, orders, units = _channel_labels(self.system.n)
        if self.track == "all":
            return longitudinal + orders + units
        return self.track


@dataclass(frozen=True)
class DiffusionTrace:
    """Time series produced by one run.

    ``channels`` maps each tracked label to a real array over the grid;
    coherence channels report magnitudes since their amplitudes are
    complex. ``conserved`` is the inner product of the total-z operator
    with the evolved state, constant whenever the Hamiltonian commutes
    with total z. ``block_sizes`` reports the d(k)^2 arithmetic cost per
    magnetization block for the block-wise engine and is None otherwise.
    """

    times: tuple[float, ...]
    profiles: tuple[AmplitudeProfile, ...]
    channels: dict[str, np.ndarray]
    conserved: np.ndarray
    undesired: tuple[str, ...]
    engine: str
    block_sizes: dict[int, int] | None = None


def purge(profile: AmplitudeProfile) -> AmplitudeProfile:
    """Zero the spin-order and coherence bins, keeping their keys.

    The longitudinal bin and the identity coefficient pass through
    untouched, so purging is idempotent and never grows the norm of the
    reconstructed operator.
    """
    return AmplitudeProfile(
        time=profile.time,
        identity=profile.identity,
        longitudinal=dict(profile.longitudinal),
        spin_orders={lab: 0.0 for lab in profile.spin_orders},
        zqc={lab: 0j for lab in profile.zqc},
        residual=profile.residual,
    )


def _initial_operator(config: DiffusionConfig) -> Operator:
    spec = BaseOperatorSpec.from_label(config.initial, config.system.n)
    return build_operator(config.system, spec)


def _assemble(
    config: DiffusionConfig,
    profiles: list[AmplitudeProfile],
    engine: str,
    block_sizes: dict[int, int] | None,
) -> DiffusionTrace:
    if config.purge:
        profiles = [purge(p) for p in profiles]
    n = config.system.n
    _, orders, units = _channel_labels(n)
    order_set, unit_set = set(orders), set(units)

    tracked = config.tracked_labels()
    channels: dict[str, np.ndarray] = {}
    for lab in tracked:
        if lab in unit_set:
            series = [abs(p.zqc[lab]) for p in profiles]
        elif lab in order_set:
            series = [p.spin_orders[lab] for p in profiles]
        else:
            series = [p.longitudinal[lab] for p in profiles]
        channels[lab] = np.array(series, dtype=float)

    # conserved = <F_z, rho(t)>; each I_kz has squared norm 2^(n-2)
    weight = 2.0 ** (n - 2)
    conserved = np.array(
        [weight * sum(p.longitudinal.values()) for p in profiles], dtype=float
    )
    undesired = tuple(lab for lab in tracked if lab in order_set or lab in unit_set)
    return DiffusionTrace(
        times=config.times,
        profiles=tuple(profiles),
        channels=channels,
        conserved=conserved,
        undesired=undesired,
        engine=engine,
        block_sizes=block_sizes,
    )


def run_diffusion(config: DiffusionConfig) -> DiffusionTrace:
    """Full-space engine: one propagator conjugation per grid point."""
    h = build_hamiltonian(config.system, config.hamiltonian)
    q0 = _initial_operator(config)
    profiles = [amplitude_profile(h, q0, t) for t in config.times]
    return _assemble(config, profiles, "full", None)


def run_blockwise(config: DiffusionConfig) -> DiffusionTrace:
    """Block-wise engine: each magnetization block evolves on its own.

    The initial operator splits exactly across the blocks, every block
    is conjugated by its own small propagator and the pieces are summed
    before binning, so the arithmetic touches sum-of-d(k)^2 entries per
    grid point instead of the full squared dimension.
    """
    h = build_hamiltonian(config.system, config.hamiltonian)
    q0 = _initial_operator(config)
    parts = decompose_zq(q0)
    profiles = []
    for t in config.times:
        evolved = None
        for k, component in parts:
            piece = blockwise_conjugate(h, component, k, t)
            evolved = piece if evolved is None else evolved + piece
        profiles.append(_profile_of(evolved, t))
    sizes = {b.k: b.dimension**2 for b in selective_blocks(config.system)}
    return _assemble(config, profiles, "blockwise", sizes)


def channel_discrepancy(a: DiffusionTrace, b: DiffusionTrace) -> np.ndarray:
    """Per-grid-point max absolute channel difference between two traces."""
    if a.times != b.times:
        raise ConfigurationError("traces cover different time grids")
    if set(a.channels) != set(b.channels):
        raise ConfigurationError("traces track different channels")
    if not a.channels:
        return np.zeros(len(a.times))
    stacked = np.stack(
        [np.abs(a.channels[lab] - b.channels[lab]) for lab in a.channels]
    )
    return stacked.max(axis=0)
