"""Field commutators on ordered one- and two-particle states.

    python scripts/ccr_check.py [config.json]

Prints the four CCR quantities for the configured layout, then repeats the
one-particle commutator for a few cutoffs s_max to show the tail decay.
"""
import sys
import time

from rtnls.cli import fock_ccr
from rtnls.config import RunConfig


def main():
    cfg = RunConfig.load(sys.argv[1] if len(sys.argv) > 1 else None)
    t0 = time.perf_counter()
    res = fock_ccr(cfg)
    print(f"layout f1={cfg['fock']['f1']} f2={cfg['fock']['f2']} h1={cfg['fock']['h1']} h2={cfg['fock']['h2']}"
          f"  ({time.perf_counter() - t0:.0f} s)")
    for k, v in res.items():
        print(f"  {k:12s} {v:.3e}")
    print("s_max scan (ccr_1p)")
    for s in (10.0, 20.0, 30.0):
        r = fock_ccr(cfg.override(**{"fock.s_max": s}))
        print(f"  s_max={s:5.1f}  {r['ccr_1p']:.3e}")


if __name__ == "__main__":
    main()
