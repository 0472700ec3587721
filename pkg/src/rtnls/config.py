"""Run configuration: one JSON document, one documented default block.

Every number a subcommand uses is read from a RunConfig.  A user file only
needs the keys it changes; it is merged over DEFAULTS section by section
and unknown keys are rejected, so a typo cannot silently fall back to a
default.  The environment variable RTNLS_CONFIG names a default file.
"""
from __future__ import annotations

import copy
import json
import os
from dataclasses import dataclass

import numpy as np

from .classical_field import Quadrature, SeedProfiles
from .kernels import ModelParams
from .pde_oracle import OracleGrid
from .profiles import AnalyticProfile

ENV_VAR = "RTNLS_CONFIG"

# The only place defaults live.  Profiles are lists of
# [re(amp), im(amp), width, center, degree] Gaussian-polynomial terms.
DEFAULTS = {
    "seed": 20240611,
    "output": "rtnls-out",
    "model": {"g": 0.05, "eta": 1.0},
    "quadrature": {"P": 8.0, "M": 129, "M2": 49, "eps_factors": [4, 2, 1], "h0": 1e-3,
                   "method": "laplace"},
    "N": 2,
    "profiles": {"mu0": [[1.0, 0.0, 1.0, 0.0, 0]], "mu1": []},
    "kernels": {"g_values": [0.05, 0.5, 1.0], "eta_values": [0.0, 0.5, 1.0, 2.0],
                "samples": 1000, "spread": 10.0},
    "classical": {"times": [0.0, 0.5, 1.0], "x_max": 4.0, "x_step": 0.5,
                  "identity_seeds": 1000},
    "oracle": {"X": 40.0, "dx": 2.5e-3, "dt": 1e-3, "t_final": 1.0,
               "scaling_N": 1},
    "algebra": {"word_length": 4, "bindings": 100, "P": 6.0, "M": 41,
                "g": 0.7, "eta": 1.3},
    "fock": {"g": 2.0, "eta": 2.0, "P": 6.0, "M": 141, "s_max": 30.0, "t": 0.0,
             "f1": [4.0, 1.0, 1.0], "f2": [4.2, 1.0, 0.5], "h1": [20.0, 1.0, 1.0],
             "h2": [12.0, 1.0, 1.0], "ordering_tol": 1e-6,
             "random_P": 8.0, "random_M": 41, "random_states": 1000, "max_n": 3},
    "scatter": {"g": 0.5, "eta": 1.0, "P": 3.6, "M": 361, "dp": 0.01,
                "residual_packet": [1.0, 2.0], "t_residual": 20.0,
                "ladder_t0": 1.0, "ladder_ratio": 2.0, "ladder_count": 6},
    "tolerances": {
        "kernels": 1e-12, "identities": 1e-12, "boundary": 1e-6, "richardson_min": 3.0,
        "oracle_free": 1e-5, "oracle_coupled": 5e-3, "oracle_scaling": 4.0,
        "oracle_scaling_band": 1.0, "energy_drift": 1e-4,
        "cross_module": 1e-9, "fock_props": 1e-10, "fock_adjoint": 1e-10,
        "fock_ccr": 1e-7, "fock_bc": 1e-7, "fock_bound_ratio": 1.0 + 1e-12,
        "scatter_closed": 1e-9, "scatter_unitarity": 1e-9, "scatter_residual": 1e-6,
    },
}


class ConfigError(ValueError):
    """Invalid or inconsistent configuration."""


def _merge(base, over, path=""):
    out = copy.deepcopy(base)
    for k, v in over.items():
        if k not in base:
            raise ConfigError(f"unknown config key {path + k!r}")
        if isinstance(base[k], dict) and k != "profiles":
            if not isinstance(v, dict):
                raise ConfigError(f"config key {path + k!r} must be a table")
            out[k] = _merge(base[k], v, path + k + ".")
        else:
            out[k] = copy.deepcopy(v)
    return out


def _positive(name, v, integer=False, odd=False):
    if integer and (isinstance(v, bool) or int(v) != v):
        raise ConfigError(f"{name} must be an integer, got {v!r}")
    if not (isinstance(v, (int, float)) and np.isfinite(v) and v > 0):
        raise ConfigError(f"{name} must be positive, got {v!r}")
    if odd and int(v) % 2 != 1:
        raise ConfigError(f"{name} must be odd, got {v!r}")


@dataclass(frozen=True)
class RunConfig:
    data: dict

    # --- construction -------------------------------------------------------
    @classmethod
    def from_dict(cls, d=None):
        cfg = cls(_merge(DEFAULTS, d or {}))
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path=None):
        path = path or os.environ.get(ENV_VAR)
        if not path:
            return cls.from_dict({})
        try:
            with open(path) as fh:
                d = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(d, dict):
            raise ConfigError("config root must be a JSON object")
        return cls.from_dict(d)

    def override(self, **kw):
        """Dotted keys, e.g. override(**{"model.g": 0.1})."""
        d = copy.deepcopy(self.data)
        for key, v in kw.items():
            node, parts = d, key.split(".")
            for p in parts[:-1]:
                if p not in node or not isinstance(node[p], dict):
                    raise ConfigError(f"unknown config key {key!r}")
                node = node[p]
            if parts[-1] not in node:
                raise ConfigError(f"unknown config key {key!r}")
            node[parts[-1]] = v
        cfg = RunConfig(d)
        cfg.validate()
        return cfg

    def dumps(self):
        return json.dumps(self.data, indent=2, sort_keys=True)

    def __getitem__(self, k):
        return self.data[k]

    # --- validation -----------------------------------------------------------
    def validate(self):
        d = self.data
        try:
            self.params()
            self.quadrature()
            self.seeds()
            self.oracle_grid()
            ModelParams(d["fock"]["g"], d["fock"]["eta"])
            ModelParams(d["scatter"]["g"], d["scatter"]["eta"])
            ModelParams(d["algebra"]["g"], d["algebra"]["eta"])
        except ConfigError:
            raise
        except (ValueError, TypeError, KeyError) as exc:
            raise ConfigError(str(exc)) from exc
        seed = d["seed"]
        if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2 ** 64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
        N, top = d["N"], self.quadrature().max_order
        if isinstance(N, bool) or not isinstance(N, int) or not 0 <= N <= top:
            raise ConfigError(f"N must be an integer in [0, {top}], got {N!r}")
        times = d["classical"]["times"]
        if not times or any(not np.isfinite(t) for t in times):
            raise ConfigError("classical.times must be a non-empty list of finite times")
        for sec, keys in (("classical", ("x_max", "x_step")),
                          ("oracle", ("t_final",)),
                          ("kernels", ("spread",)),
                          ("fock", ("P", "s_max", "random_P", "ordering_tol")),
                          ("scatter", ("P", "dp", "t_residual", "ladder_t0")),
                          ("algebra", ("P",))):
            for k in keys:
                _positive(f"{sec}.{k}", d[sec][k])
        for sec, k, odd in (("kernels", "samples", False), ("classical", "identity_seeds", False),
                            ("fock", "M", True), ("fock", "random_M", True),
                            ("fock", "random_states", False), ("scatter", "M", True),
                            ("scatter", "ladder_count", False), ("algebra", "M", True),
                            ("algebra", "bindings", False), ("algebra", "word_length", False)):
            _positive(f"{sec}.{k}", d[sec][k], integer=True, odd=odd)
        if d["scatter"]["ladder_ratio"] <= 1:
            raise ConfigError("scatter.ladder_ratio must exceed 1")
        if not 0 <= d["fock"]["max_n"] <= 3:
            raise ConfigError("fock.max_n must be in [0, 3]")
        if d["oracle"]["scaling_N"] not in (0, 1, 2):
            raise ConfigError("oracle.scaling_N must be 0, 1 or 2")
        lo, hi = d["scatter"]["residual_packet"]
        if not 0 < lo < hi:
            raise ConfigError("scatter.residual_packet must be an interval (lo, hi) with 0 < lo < hi")
        for name in ("f1", "f2", "h1", "h2"):
            spec = d["fock"][name]
            if len(spec) != 3 or spec[1] <= 0:
                raise ConfigError(f"fock.{name} must be [center, width, amplitude] with width > 0")
        for k, v in d["tolerances"].items():
            _positive(f"tolerances.{k}", v)

    # --- typed views --------------------------------------------------------
    def params(self):
        m = self.data["model"]
        return ModelParams(float(m["g"]), float(m["eta"]))

    def quadrature(self):
        q = self.data["quadrature"]
        return Quadrature(P=float(q["P"]), M=int(q["M"]), M2=int(q["M2"]),
                          eps_factors=tuple(q["eps_factors"]), h0=float(q["h0"]),
                          method=q["method"])

    def seeds(self):
        p = self.data["profiles"]
        return SeedProfiles(AnalyticProfile.from_list(p.get("mu0", [])),
                            AnalyticProfile.from_list(p.get("mu1", [])))

    def oracle_grid(self):
        o = self.data["oracle"]
        for k in ("X", "dx", "dt"):
            _positive(f"oracle.{k}", o[k])
        return OracleGrid(X=float(o["X"]), dx=float(o["dx"]), dt=float(o["dt"]))

    def tol(self, name):
        return float(self.data["tolerances"][name])

