"""Nested operator subspaces selected by element support patterns.

Four nested families are distinguished by which matrix elements they
allow. Diagonal operators commute with every longitudinal term and form
the smallest family; zero-quantum operators only connect basis states
with equal down-spin counts; even-order operators only connect states
whose down-spin counts agree modulo two; the full space allows
everything. Membership is a property of the element support pattern, so
it is checked by measuring how much Frobenius weight an operator carries
outside the pattern.

The zero-quantum family splits further into independent blocks, one per
down-spin count ``k``, each of dimension ``binomial(n, k)``. Those
blocks drive every block-wise algorithm in the package.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import ConfigurationError, ToleranceError
from .operators import (
    Operator,
    SpinSystem,
    _down_counts,
    identity_operator,
    random_operator,
)

__all__ = [
    "SubspaceTag",
    "Membership",
    "SelectiveBlock",
    "ClosureReport",
    "support_mask",
    "block_dimension",
    "subspace_dims",
    "is_member",
    "project",
    "selective_blocks",
    "decompose_zq",
    "zq_offdiagonal_cells",
    "verify_closure",
]

MEMBERSHIP_TOL = 1e-10


class SubspaceTag(enum.Enum):
    """The four nested support patterns, smallest to largest."""

    LOMSO = "LOMSO"
    ZERO_QUANTUM = "ZeroQuantum"
    EVEN_MQ = "EvenMQ"
    FULL = "Full"


@lru_cache(maxsize=None)
def _mask(tag: SubspaceTag, n: int) -> np.ndarray:
    pc = _down_counts(n)
    if tag is SubspaceTag.LOMSO:
        mask = np.eye(1 << n, dtype=bool)
    elif tag is SubspaceTag.ZERO_QUANTUM:
        mask = pc[:, None] == pc[None, :]
    elif tag is SubspaceTag.EVEN_MQ:
        mask = (pc[:, None] - pc[None, :]) % 2 == 0
    else:
        mask = np.ones((1 << n, 1 << n), dtype=bool)
    mask.setflags(write=False)
    return mask


def support_mask(tag: SubspaceTag, system: SpinSystem) -> np.ndarray:
    """Boolean element-support pattern of a subspace (read only)."""
    return _mask(tag, system.n)


def block_dimension(n: int, k: int) -> int:
    """Dimension of the selective zero-quantum block with ``k`` down spins."""
    if not 0 <= k <= n:
        raise ConfigurationError(f"block index {k} outside 0..{n}")
    return math.comb(n, k)


def subspace_dims(n: int) -> dict[SubspaceTag, int]:
    """Element-pattern dimension of each subspace for an ``n`` spin system.

    The closed forms are ``2**n``, ``binomial(2n, n)``, ``2**(2n-1)``
    and ``4**n``; the middle one equals the sum of the squared selective
    block dimensions.
    """
    if n < 1:
        raise ConfigurationError(f"spin count must be positive, got {n}")
    return {
        SubspaceTag.LOMSO: 2 ** n,
        SubspaceTag.ZERO_QUANTUM: math.comb(2 * n, n),
        SubspaceTag.EVEN_MQ: 2 ** (2 * n - 1),
        SubspaceTag.FULL: 4 ** n,
    }


@dataclass(frozen=True)
class Membership:
    """Outcome of a membership test, truthy when the operator belongs."""

    tag: SubspaceTag
    member: bool
    residual: float
    norm: float
    tolerance: float

    def __bool__(self) -> bool:
        return self.member


def is_member(q: Operator, tag: SubspaceTag, tol: float = MEMBERSHIP_TOL) -> Membership:
    """Test whether ``q`` carries weight only inside a support pattern.

    The residual is the Frobenius norm of the out-of-pattern part and
    membership requires ``residual <= tol * norm(q)``. The zero operator
    belongs to every subspace.
    """
    mask = _mask(tag, q.system.n)
    outside = np.where(mask, 0.0, q.entries)
    residual = float(np.linalg.norm(outside))
    norm = q.norm()
    return Membership(tag, residual <= tol * norm, residual, norm, tol)


def project(q: Operator, tag: SubspaceTag) -> Operator:
    """Zero every matrix element outside the subspace support pattern."""
    mask = _mask(tag, q.system.n)
    hint = True if q.hermitian_hint is True else None
    return Operator(q.system, np.where(mask, q.entries, 0.0), hint)


@dataclass(frozen=True)
class SelectiveBlock:
    """One zero-quantum block: the states with exactly ``k`` down spins."""

    k: int
    state_indices: tuple[int, ...]

    @property
    def dimension(self) -> int:
        return len(self.state_indices)


def selective_blocks(system: SpinSystem) -> list[SelectiveBlock]:
    """The ``n + 1`` selective blocks, ``k`` ascending, indices ascending."""
    pc = _down_counts(system.n)
    blocks = []
    for k in range(system.n + 1):
        idx = tuple(int(i) for i in np.nonzero(pc == k)[0])
        blocks.append(SelectiveBlock(k, idx))
    return blocks


def decompose_zq(
    z: Operator, tol: float = MEMBERSHIP_TOL
) -> list[tuple[int, Operator]]:
    """Split a zero-quantum operator into its per-block components.

    Returns ``n + 1`` pairs ``(k, component)`` where each component is a
    full-dimension operator supported only on block ``k``. Components of
    distinct blocks commute and they sum back to the projection of ``z``
    onto the zero-quantum pattern. Operators failing the membership test
    are rejected.
    """
    report = is_member(z, SubspaceTag.ZERO_QUANTUM, tol)
    if not report:
        raise ToleranceError(
            "operator is not zero-quantum: out-of-pattern residual "
            f"{report.residual:.3e} exceeds {tol:.0e} * {report.norm:.3e}"
        )
    hint = True if z.hermitian_hint is True else None
    out = []
    for block in selective_blocks(z.system):
        comp = np.zeros_like(z.entries)
        idx = np.array(block.state_indices)
        comp[np.ix_(idx, idx)] = z.entries[np.ix_(idx, idx)]
        out.append((block.k, Operator(z.system, comp, hint)))
    return out


@lru_cache(maxsize=16)
def zq_offdiagonal_cells(n: int):
    """Index pairs and unit labels of the off-diagonal zero-quantum cells.

    Returns ``(rows, cols, labels)`` where the label of each ``(i, j)``
    cell is the shift base operator equal to the elementary matrix unit
    supported there. These are the coherence carriers of the
    zero-quantum space: everything zero-quantum that is not diagonal.
    """
    pc = _down_counts(n)
    mask = (pc[:, None] == pc[None, :]) & ~np.eye(1 << n, dtype=bool)
    rows, cols = np.nonzero(mask)
    labels = []
    for i, j in zip(rows, cols):
        parts = []
        for k in range(1, n + 1):
            row_bit = (int(i) >> (n - k)) & 1
            col_bit = (int(j) >> (n - k)) & 1
            if row_bit == 0 and col_bit == 0:
                parts.append(f"a{k}")
            elif row_bit == 1 and col_bit == 1:
                parts.append(f"b{k}")
            elif row_bit == 0 and col_bit == 1:
                parts.append(f"I{k}+")
            else:
                parts.append(f"I{k}-")
        labels.append("".join(parts))
    rows.setflags(write=False)
    cols.setflags(write=False)
    return rows, cols, tuple(labels)


@dataclass
class ClosureReport:
    """Statistics from randomized closure checks of one subspace."""

    tag: SubspaceTag
    n: int
    trials: int
    tolerance: float
    checks: int = 0
    max_residual: float = 0.0
    identity_member: bool = False
    violations: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.identity_member and not self.violations


def verify_closure(
    tag: SubspaceTag,
    system: SpinSystem,
    trials: int = 100,
    seed: int = 0,
    tol: float = MEMBERSHIP_TOL,
) -> ClosureReport:
    """Check closure of a subspace under the operations that matter.

    Random members are produced by projecting dense Gaussian draws onto
    the support pattern. Every trial checks the product, the commutator
    and a real linear combination of a Hermitian pair; each result must
    pass the membership test. The identity operator must belong as well,
    whatever the tag: a closed operator algebra needs its unit.
    """
    rng = np.random.default_rng(seed)
    report = ClosureReport(tag, system.n, trials, tol)
    report.identity_member = bool(is_member(identity_operator(system), tag, tol))
    if not report.identity_member:
        report.violations.append("identity operator failed membership")

    def _check(name: str, q: Operator):
        m = is_member(q, tag, tol)
        report.checks += 1
        report.max_residual = max(report.max_residual, m.residual)
        if not m:
            report.violations.append(
                f"trial {trial}: {name} left the subspace (residual {m.residual:.3e})"
            )

    for trial in range(trials):
        a = project(random_operator(system, rng), tag)
        b = project(random_operator(system, rng), tag)
        ha = project(random_operator(system, rng, hermitian=True), tag)
        hb = project(random_operator(system, rng, hermitian=True), tag)
        w = rng.standard_normal(2)
        _check("product", a @ b)
        _check("commutator", a @ b - b @ a)
        _check("hermitian combination", w[0] * ha + w[1] * hb)
    return report
