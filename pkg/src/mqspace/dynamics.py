"""Zero-quantum Hamiltonians, exact propagators and amplitude profiles.

Propagators are built from Hermitian eigendecompositions rather than
scaling and squaring, which keeps them exactly unitary up to roundoff
and lets every requested time reuse one cached decomposition. For
zero-quantum generators the exponential factorizes over the selective
blocks, so the propagator is assembled block by block and an operator
confined to a single block can be evolved while touching only that
block's entries.

Conjugating a diagonal operator by a zero-quantum propagator scatters
its weight over three kinds of terms: single-spin longitudinal
amplitudes, multi-spin longitudinal product amplitudes and zero-quantum
coherence amplitudes. :func:`amplitude_profile` reports exactly that
split and the Frobenius weight, if any, left outside the zero-quantum
pattern.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConfigurationError, InvariantError, ToleranceError
from .operators import (
    Operator,
    OperatorExpansion,
    SpinSystem,
    _adopt,
    _ensure_hermitian,
    reconstruct,
    spin_operator,
)
from .subspaces import (
    MEMBERSHIP_TOL,
    SubspaceTag,
    is_member,
    selective_blocks,
    support_mask,
    zq_offdiagonal_cells,
)

__all__ = [
    "HamiltonianSpec",
    "AmplitudeProfile",
    "HAMILTONIAN_MODELS",
    "build_hamiltonian",
    "expm_hermitian",
    "zq_propagator",
    "conjugate",
    "amplitude_profile",
    "blockwise_conjugate",
    "reconstruct_profile",
]

HAMILTONIAN_MODELS = ("flipflop", "dipolar_secular", "isotropic_j", "offsets", "custom")

HERMITICITY_TOL = 1e-10


@dataclass(frozen=True)
class HamiltonianSpec:
    """Declarative description of a coupling Hamiltonian.

    ``couplings`` holds ``(k, l, value)`` triples with 1-indexed spins
    and is used by the pairwise models; ``offsets`` holds ``(k, value)``
    pairs for the longitudinal model; ``custom`` supplies an explicit
    operator expansion. Fields not used by the chosen model must stay
    empty, and each spin pair or spin may appear only once.
    """

    model: str
    couplings: tuple[tuple[int, int, float], ...] = ()
    offsets: tuple[tuple[int, float], ...] = ()
    custom: OperatorExpansion | None = None

    def __post_init__(self):
        if self.model not in HAMILTONIAN_MODELS:
            raise ConfigurationError(
                f"unknown hamiltonian model {self.model!r}; "
                f"expected one of {', '.join(HAMILTONIAN_MODELS)}"
            )
        couplings = tuple(
            (int(k), int(l), float(j)) for (k, l, j) in self.couplings
        )
        offsets = tuple((int(k), float(w)) for (k, w) in self.offsets)
        object.__setattr__(self, "couplings", couplings)
        object.__setattr__(self, "offsets", offsets)

        seen_pairs = set()
        for k, l, _ in couplings:
            if k < 1 or l < 1:
                raise ConfigurationError("spin indices are 1-based")
            if k == l:
                raise ConfigurationError(f"coupling of spin {k} with itself")
            pair = (min(k, l), max(k, l))
            if pair in seen_pairs:
                raise ConfigurationError(f"duplicate coupling for spins {pair}")
            seen_pairs.add(pair)
        seen_spins = set()
        for k, _ in offsets:
            if k < 1:
                raise ConfigurationError("spin indices are 1-based")
            if k in seen_spins:
                raise ConfigurationError(f"duplicate offset for spin {k}")
            seen_spins.add(k)

        if self.model == "offsets":
            if couplings or self.custom is not None:
                raise ConfigurationError(
                    "the offsets model takes only the offsets field"
                )
        elif self.model == "custom":
            if self.custom is None:
                raise ConfigurationError("the custom model needs an expansion")
            if couplings or offsets:
                raise ConfigurationError(
                    "the custom model takes only the custom field"
                )
        else:
            if offsets or self.custom is not None:
                raise ConfigurationError(
                    f"the {self.model} model takes only the couplings field"
                )


def build_hamiltonian(system: SpinSystem, spec: HamiltonianSpec) -> Operator:
    """Realize a Hamiltonian spec as a dense Hermitian operator.

    The named pairwise models are exactly zero-quantum by construction;
    a custom expansion is rebuilt from its coefficients, verified to be
    Hermitian within 1e-10 and then symmetrized.
    """
    n = system.n
    for k, l, _ in spec.couplings:
        if k > n or l > n:
            raise ConfigurationError(f"coupling ({k}, {l}) exceeds system size {n}")
    for k, _ in spec.offsets:
        if k > n:
            raise ConfigurationError(f"offset spin {k} exceeds system size {n}")

    dim = system.dim
    h = np.zeros((dim, dim), dtype=complex)
    if spec.model == "offsets":
        for k, w in spec.offsets:
            h += w * spin_operator(system, k, "z").entries
    elif spec.model == "custom":
        realized = reconstruct(system, spec.custom)
        defect = realized.hermiticity_defect()
        scale = realized.norm()
        if defect > HERMITICITY_TOL * max(scale, 1.0):
            raise ToleranceError(
                f"custom hamiltonian asymmetry {defect:.3e} exceeds "
                f"{HERMITICITY_TOL:.0e} relative tolerance"
            )
        h = 0.5 * (realized.entries + realized.entries.conj().T)
    else:
        for k, l, j in spec.couplings:
            if spec.model in ("flipflop", "dipolar_secular"):
                kp = spin_operator(system, k, "+").entries
                km = spin_operator(system, k, "-").entries
                lp = spin_operator(system, l, "+").entries
                lm = spin_operator(system, l, "-").entries
                flip = 0.5 * (kp @ lm + km @ lp)
                if spec.model == "flipflop":
                    h += j * flip
                else:
                    kz = spin_operator(system, k, "z").entries
                    lz = spin_operator(system, l, "z").entries
                    h += j * (2.0 * kz @ lz - flip)
            else:  # isotropic_j
                term = np.zeros((dim, dim), dtype=complex)
                for axis in ("x", "y", "z"):
                    term += (
                        spin_operator(system, k, axis).entries
                        @ spin_operator(system, l, axis).entries
                    )
                h += j * term
    return Operator(system, h, True)


def _checked_hermitian(h: Operator, what: str) -> None:
    _ensure_hermitian(h, HERMITICITY_TOL, what)


def _checked_zq(z: Operator, what: str, tol: float = MEMBERSHIP_TOL) -> None:
    residual = z._memo.get("zq_residual")
    if residual is None:
        residual = is_member(z, SubspaceTag.ZERO_QUANTUM, tol).residual
        z._memo["zq_residual"] = residual
    if residual > tol * z.norm():
        raise ToleranceError(
            f"{what} is not zero-quantum: out-of-pattern residual "
            f"{residual:.3e} exceeds {tol:.0e} * {z.norm():.3e}"
        )


def _eigh_cached(h: Operator):
    if h._eig is None:
        w, v = np.linalg.eigh(h.entries)
        h._eig = (w, v)
    return h._eig


def _block_eigh_cached(z: Operator):
    if z._block_eig is None:
        decomps = []
        for block in selective_blocks(z.system):
            idx = np.array(block.state_indices)
            sub = z.entries[np.ix_(idx, idx)]
            sub = 0.5 * (sub + sub.conj().T)
            w, v = np.linalg.eigh(sub)
            decomps.append((idx, w, v))
        z._block_eig = decomps
    return z._block_eig


def expm_hermitian(h: Operator, t: float) -> Operator:
    """Unitary ``exp(-i h t)`` from the eigendecomposition of ``h``.

    The decomposition is cached on the operator instance, so sweeping
    many times over one generator pays the cubic cost once.
    """
    _checked_hermitian(h, "exponential generator")
    w, v = _eigh_cached(h)
    u = (v * np.exp(-1j * w * t)) @ v.conj().T
    return Operator(h.system, u)


def zq_propagator(z: Operator, t: float) -> Operator:
    """Propagator of a zero-quantum generator, assembled block by block.

    Requires ``z`` to be Hermitian and to pass the zero-quantum
    membership test; anything else is rejected. The result carries
    weight only inside the zero-quantum pattern.
    """
    _checked_hermitian(z, "propagator generator")
    _checked_zq(z, "propagator generator")
    u = np.zeros((z.system.dim, z.system.dim), dtype=complex)
    for idx, w, v in _block_eigh_cached(z):
        u[np.ix_(idx, idx)] = (v * np.exp(-1j * w * t)) @ v.conj().T
    return Operator(z.system, u)


def conjugate(u: Operator, q: Operator) -> Operator:
    """Similarity transform ``u @ q @ adjoint(u)``.

    ``u`` is taken to be unitary; Hermitian inputs give exactly
    Hermitian outputs (the roundoff asymmetry is folded away).
    """
    u._require_same_system(q)
    r = u.entries @ q.entries @ u.entries.conj().T
    if q.hermitian_hint is True:
        r = 0.5 * (r + r.conj().T)
        return Operator(u.system, r, True)
    return Operator(u.system, r)


def blockwise_conjugate(z: Operator, q_k: Operator, k: int, t: float) -> Operator:
    """Evolve an operator confined to selective block ``k``.

    Only the ``binomial(n, k)`` square block of the generator is
    exponentiated and only that block of ``q_k`` is transformed, so the
    arithmetic touches ``binomial(n, k)**2`` entries instead of the full
    ``4**n``. The result is exact for block-confined operators because a
    zero-quantum propagator never mixes blocks; input support outside
    block ``k`` is rejected at a relative 1e-12 tolerance.
    """
    _checked_hermitian(z, "propagator generator")
    _checked_zq(z, "propagator generator")
    z._require_same_system(q_k)
    if not 0 <= k <= z.system.n:
        raise ConfigurationError(f"block index {k} outside 0..{z.system.n}")

    decomps = _block_eigh_cached(z)
    idx, w, v = decomps[k]
    sub = q_k.entries[np.ix_(idx, idx)]

    # support check: when every stored nonzero sits inside the block the
    # out-of-block weight is exactly zero and no full-size pass is needed
    nnz_total = q_k._memo.get("nnz")
    if nnz_total is None:
        nnz_total = int(np.count_nonzero(q_k.entries))
        q_k._memo["nnz"] = nnz_total
    if int(np.count_nonzero(sub)) != nnz_total:
        outside = q_k.entries.copy()
        outside[np.ix_(idx, idx)] = 0.0
        support_residual = float(np.linalg.norm(outside))
        if support_residual > 1e-12 * q_k.norm():
            raise ToleranceError(
                f"operator carries weight {support_residual:.3e} outside "
                f"selective block k={k} (dimension {len(idx)})"
            )

    u_small = (v * np.exp(-1j * w * t)) @ v.conj().T
    r_small = u_small @ sub @ u_small.conj().T
    hint = None
    if q_k.hermitian_hint is True:
        r_small = 0.5 * (r_small + r_small.conj().T)
        hint = True
    out = np.zeros((z.system.dim, z.system.dim), dtype=complex)
    out[np.ix_(idx, idx)] = r_small
    return _adopt(z.system, out, hint)


@dataclass(frozen=True)
class AmplitudeProfile:
    """Amplitudes of one conjugated operator at one time point.

    ``identity`` is the coefficient of the unit base operator and stays
    at zero for traceless inputs. ``longitudinal`` maps single-spin
    ``Ikz`` labels to real amplitudes, ``spin_orders`` does the same for
    products of two or more ``z`` factors and ``zqc`` maps off-diagonal
    zero-quantum unit labels to complex amplitudes. ``residual`` is the
    Frobenius weight outside the zero-quantum pattern, which vanishes
    for zero-quantum dynamics: within that pattern the bins are a
    complete, exact expansion.
    """

    time: float
    identity: float
    longitudinal: dict[str, float]
    spin_orders: dict[str, float]
    zqc: dict[str, complex]
    residual: float


@lru_cache(maxsize=16)
def _walsh_matrix(n: int) -> np.ndarray:
    """Signs (-1)**popcount(S & i) for subset rows and state columns."""
    idx = np.arange(1 << n, dtype=np.uint32)
    parity = np.bitwise_count(idx[:, None] & idx[None, :]) & 1
    signs = 1.0 - 2.0 * parity
    signs.setflags(write=False)
    return signs


@lru_cache(maxsize=16)
def _diagonal_labels(n: int) -> tuple[str, ...]:
    """Label of the all-z Cartesian base operator for every spin subset."""
    labels = []
    for subset in range(1 << n):
        spins = [k for k in range(1, n + 1) if (subset >> (n - k)) & 1]
        if not spins:
            labels.append("E/2")
        elif len(spins) == 1:
            labels.append(f"I{spins[0]}z")
        else:
            pref = str(2 ** (len(spins) - 1))
            labels.append(pref + "".join(f"I{k}z" for k in spins))
    return tuple(labels)


def _profile_of(qc: Operator, t: float) -> AmplitudeProfile:
    """Bin one already-evolved operator into an amplitude profile."""
    n = qc.system.n
    diag = np.diag(qc.entries)
    coeff = _walsh_matrix(n) @ diag / float(2 ** (n - 1))
    imag_peak = float(np.max(np.abs(coeff.imag))) if coeff.size else 0.0
    if imag_peak > HERMITICITY_TOL * max(qc.norm(), 1.0):
        raise InvariantError(
            f"longitudinal amplitudes acquired imaginary parts ({imag_peak:.3e})"
        )
    coeff = coeff.real
    labels = _diagonal_labels(n)
    identity = float(coeff[0])
    longitudinal = {}
    spin_orders = {}
    for subset in range(1, 1 << n):
        weight = int(subset).bit_count()
        if weight == 1:
            longitudinal[labels[subset]] = float(coeff[subset])
        else:
            spin_orders[labels[subset]] = float(coeff[subset])

    rows, cols, unit_labels = zq_offdiagonal_cells(n)
    values = qc.entries[rows, cols]
    zqc = {lab: complex(v) for lab, v in zip(unit_labels, values)}

    outside = np.where(
        support_mask(SubspaceTag.ZERO_QUANTUM, qc.system), 0.0, qc.entries
    )
    residual = float(np.linalg.norm(outside))
    return AmplitudeProfile(t, identity, longitudinal, spin_orders, zqc, residual)


def amplitude_profile(z: Operator, q: Operator, t: float) -> AmplitudeProfile:
    """Conjugate ``q`` by the propagator of ``z`` and bin the result.

    ``z`` must satisfy the :func:`zq_propagator` preconditions; ``q``
    must be Hermitian, traceless and a zero-quantum member. Violations
    are rejected with the measured residual. The longitudinal and
    spin-order amplitudes of the result are real within 1e-10.
    """
    _checked_hermitian(q, "expanded operator")
    tr = abs(q.trace())
    if tr > 1e-10 * max(q.norm(), 1.0):
        raise ToleranceError(f"expanded operator has trace {tr:.3e}, expected 0")
    report = is_member(q, SubspaceTag.ZERO_QUANTUM)
    if not report:
        raise ToleranceError(
            "expanded operator is not zero-quantum: residual "
            f"{report.residual:.3e} exceeds {report.tolerance:.0e} relative"
        )
    u = zq_propagator(z, t)
    qc = conjugate(u, q)
    return _profile_of(qc, t)


def reconstruct_profile(system: SpinSystem, profile: AmplitudeProfile) -> Operator:
    """Dense operator described by the bins of an amplitude profile."""
    n = system.n
    labels = _diagonal_labels(n)
    coeff = np.zeros(1 << n)
    index = {lab: s for s, lab in enumerate(labels)}
    coeff[0] = profile.identity
    for source in (profile.longitudinal, profile.spin_orders):
        for lab, value in source.items():
            if lab not in index:
                raise ConfigurationError(f"label {lab!r} is not diagonal for n={n}")
            coeff[index[lab]] = value
    diag = 0.5 * (_walsh_matrix(n) @ coeff)
    entries = np.diag(diag.astype(complex))
    rows, cols, unit_labels = zq_offdiagonal_cells(n)
    unit_index = {lab: pos for pos, lab in enumerate(unit_labels)}
    for lab, value in profile.zqc.items():
        try:
            pos = unit_index[lab]
        except KeyError:
            raise ConfigurationError(
                f"label {lab!r} is not an off-diagonal zero-quantum unit for n={n}"
            ) from None
        entries[rows[pos], cols[pos]] = value
    return Operator(system, entries)
