#!/usr/bin/env python3
"""Three-stage reduction of a random Hermitian operator.

Each stage conjugates the operator into a smaller pattern class:
even-order first, then zero-quantum, then fully diagonal. The stage
unitaries themselves stay inside the class they preserve.
"""

import numpy as np

from mqspace import SpinSystem, cascade, conjugate, random_operator

rng = np.random.default_rng(4)
system = SpinSystem(3)
h = random_operator(system, rng, hermitian=True)

result = cascade(h)

print(f"input norm {h.norm():.3f}, dimension {system.dim}")
print("stage residuals (weight left outside each target pattern):")
for stage, residual in result.residuals.items():
    print(f"  {stage:13s} {residual:.2e}")
print(f"stage-2 unitary confined to even-order pattern: {result.stage_classes['v2_even_mq'].member}")
print(f"stage-3 unitary confined to zero-quantum pattern: {result.stage_classes['v3_zero_quantum'].member}")
print(f"eigenvalue drift through all three stages: {result.spectrum_error:.2e}")
print(f"direct-rotation fallbacks used: {result.fallbacks}")

final = conjugate(result.overall_unitary, h)
off_diag = final.entries - np.diag(np.diag(final.entries))
print(f"combined unitary leaves off-diagonal weight {np.linalg.norm(off_diag):.2e}")
print(f"sorted spectrum: {np.round(np.sort(np.real(np.diag(final.entries))), 3)}")
