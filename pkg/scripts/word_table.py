"""Rewrite engine vs Fock matrix elements, word by word.

    python scripts/word_table.py [bindings] [max_length]
"""
import sys

from rtnls.cli import word_cross_check
from rtnls.config import RunConfig

n = int(sys.argv[1]) if len(sys.argv) > 1 else 10
L = int(sys.argv[2]) if len(sys.argv) > 2 else 4
cfg = RunConfig.from_dict({"algebra": {"bindings": n, "word_length": L}})
stats = word_cross_check(cfg)
nonzero = 0
for kinds, (d, v) in sorted(stats.items(), key=lambda kv: (len(kv[0]), kv[0])):
    if v > 0:
        nonzero += 1
        print(f"{' '.join(kinds):16s} max|diff| {d:.2e}  max|value| {v:.3e}")
print(f"{len(stats)} words, {nonzero} with nonzero vacuum value, "
      f"worst {max(d for d, _ in stats.values()):.2e} over {n} bindings")
