"""Continuity and jump residuals of the series at x = 0 by order and time.

    python scripts/boundary_scan.py [eta]
"""
import sys

from rtnls.classical_field import boundary_residuals, build_profiles
from rtnls.config import RunConfig
from rtnls.kernels import ModelParams

cfg = RunConfig.from_dict()
eta = float(sys.argv[1]) if len(sys.argv) > 1 else cfg.params().eta
prof = build_profiles(cfg.seeds(), ModelParams(cfg.params().g, eta))
quad = cfg.quadrature()
print(" N    t    continuity   jump        ratios")
for N in (0, 1, 2):
    for t in (0.0, 0.5, 1.0):
        b = boundary_residuals(t, prof, N, quad)
        print(f" {N}  {t:4.1f}   {b.continuity:.3e}   {b.jump:.3e}   "
              f"{b.continuity_ratio:.2f} {b.jump_ratio:.2f}")
