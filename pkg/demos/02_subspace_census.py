#!/usr/bin/env python3
"""Dimension census of the nested operator subspaces.

Tabulates how the four pattern classes grow with the number of spins
and how much of the full operator space the zero-quantum blocks occupy
once the system gets large.
"""

from math import comb

from mqspace import SpinSystem, SubspaceTag, block_dimension, selective_blocks, subspace_dims

print("n   diagonal  zero-quantum  even-order  full")
for n in range(1, 9):
    dims = subspace_dims(n)
    print(
        f"{n}   {dims[SubspaceTag.LOMSO]:8d}  {dims[SubspaceTag.ZERO_QUANTUM]:12d}"
        f"  {dims[SubspaceTag.EVEN_MQ]:10d}  {dims[SubspaceTag.FULL]:4d}"
    )

print()
print("selective blocks at n = 4 (block k holds states with k down spins)")
for block in selective_blocks(SpinSystem(4)):
    d = block.dimension
    print(f"  k={block.k}  states {list(block.state_indices)}  cells {d * d}")

n = 12
zq = sum(block_dimension(n, k) ** 2 for k in range(n + 1))
full = 4**n
print()
print(f"n = {n}: zero-quantum cells {zq} of {full} "
      f"({zq / full:.4%}), largest block {comb(n, n // 2)}")
