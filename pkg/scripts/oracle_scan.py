"""Series vs Crank-Nicolson deviation as a function of g and truncation order.

    python scripts/oracle_scan.py

Small grid (X=20, dx=5e-3) so the scan finishes in a few minutes.
"""
from rtnls.classical_field import build_profiles
from rtnls.config import RunConfig
from rtnls.kernels import ModelParams
from rtnls.pde_oracle import OracleGrid, compare_series

cfg = RunConfig.from_dict()
grid = OracleGrid(X=20.0, dx=5e-3, dt=1e-3, compare_X=15.0)
seeds, quad, eta = cfg.seeds(), cfg.quadrature(), cfg.params().eta
print("   g      N=0        N=1        N=2")
for g in (0.0125, 0.025, 0.05, 0.1):
    par = ModelParams(g, eta)
    prof = build_profiles(seeds, par)
    devs = [compare_series(prof, N, quad, par, 0.5, grid) for N in (0, 1, 2)]
    print(f"{g:7.4f}  " + "  ".join(f"{d:.3e}" for d in devs))
