"""Run configuration: a single JSON file, strictly validated.

Unknown keys are rejected so a typo cannot silently fall back to a default.
Complex values are written as [re, im] pairs (plain numbers are accepted for
real values). Coefficients and kernels are either named built-ins with
parameters or CSV sample files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .hermite import Multiplier
from .measure import GridFunction, GridKernel, MeasureSpace
from .serialize import read_grid_function_csv, read_matrix_csv

_TOP_KEYS = {
    "depth",
    "depth_max",
    "alpha",
    "lambda",
    "eps0",
    "ratio",
    "bands",
    "basis_size",
    "coefficient",
    "kernel",
    "multiplier",
    "probe",
    "cutoff",
    "seed",
    "strict",
    "tolerances",
    "out",
}

_TOLERANCE_KEYS = {
    "passage_residual",
    "round_trip",
    "gram_defect",
    "adjoint_defect",
    "first_kind_residual",
    "derivative_agreement",
    "vanishing_tail",
}

DEFAULT_TOLERANCES = {
    "passage_residual": 1e-9,
    "round_trip": 1e-10,
    "gram_defect": 1e-10,
    "adjoint_defect": 1e-10,
    "first_kind_residual": 1e-9,
    "derivative_agreement": 1e-5,
    "vanishing_tail": 1e-6,
}


def _rebase_csv_path(spec: dict, base_dir: Path | None) -> dict:
    """Resolve a relative CSV path against the config file's directory."""
    if base_dir is None or spec.get("kind") != "csv" or "path" not in spec:
        return dict(spec)
    out = dict(spec)
    p = Path(out["path"])
    if not p.is_absolute():
        out["path"] = str(base_dir / p)
    return out


def _as_complex(value, where: str) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if (
        isinstance(value, list)
        and len(value) == 2
        and all(isinstance(v, (int, float)) for v in value)
    ):
        return complex(value[0], value[1])
    raise ConfigError(f"{where}: expected a number or [re, im] pair, got {value!r}")


@dataclass(frozen=True)
class RunConfig:
    depth: int
    depth_max: int
    alpha: complex
    lambdas: tuple[complex, ...]
    eps0: float
    ratio: float
    bands: int
    basis_size: int | str
    coefficient: dict
    kernel: dict
    multiplier: dict
    probe_bound: float
    probe_points: int
    cutoff: float
    seed: int
    strict: bool
    tolerances: dict = field(default_factory=dict)
    out: str | None = None


def parse_config(raw: dict, base_dir: Path | None = None) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config root must be an object")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    def need(key, default=None):
        if key in raw:
            return raw[key]
        if default is not None:
            return default
        raise ConfigError(f"missing required key {key!r}")

    depth = need("depth")
    if not isinstance(depth, int) or not 1 <= depth <= 24:
        raise ConfigError(f"depth must be an integer in [1, 24], got {depth!r}")
    depth_max = raw.get("depth_max", min(depth + 6, 24))
    if not isinstance(depth_max, int) or not depth <= depth_max <= 24:
        raise ConfigError(f"depth_max must be an integer in [depth, 24], got {depth_max!r}")

    lam_raw = need("lambda", 0.0)
    if isinstance(lam_raw, list) and lam_raw and isinstance(lam_raw[0], list):
        lambdas = tuple(_as_complex(v, "lambda") for v in lam_raw)
    else:
        lambdas = (_as_complex(lam_raw, "lambda"),)

    eps0 = float(need("eps0", 0.5))
    ratio = float(need("ratio", 0.5))
    if eps0 <= 0:
        raise ConfigError("eps0 must be positive")
    if not 0 < ratio < 1:
        raise ConfigError("ratio must lie in (0, 1)")
    bands = need("bands", 3)
    if not isinstance(bands, int) or bands < 1:
        raise ConfigError("bands must be a positive integer")

    basis_size = raw.get("basis_size", "full")
    if basis_size != "full" and (not isinstance(basis_size, int) or basis_size < 1):
        raise ConfigError("basis_size must be 'full' or a positive integer")

    probe = raw.get("probe", {})
    if not isinstance(probe, dict) or set(probe) - {"bound", "points"}:
        raise ConfigError("probe must be an object with keys 'bound' and 'points'")
    probe_bound = float(probe.get("bound", 8.0))
    probe_points = int(probe.get("points", 41))
    if probe_bound <= 0 or probe_points < 3:
        raise ConfigError("probe bound must be positive and points >= 3")

    cutoff = float(raw.get("cutoff", 1e-10))
    if not 0 < cutoff < 1:
        raise ConfigError("cutoff must lie in (0, 1)")

    seed = raw.get("seed", 0)
    if not isinstance(seed, int) or seed < 0:
        raise ConfigError("seed must be a nonnegative integer")

    tolerances = raw.get("tolerances", {})
    if not isinstance(tolerances, dict) or set(tolerances) - _TOLERANCE_KEYS:
        raise ConfigError(f"tolerances keys must be among {sorted(_TOLERANCE_KEYS)}")
    merged_tol = dict(DEFAULT_TOLERANCES)
    merged_tol.update({k: float(v) for k, v in tolerances.items()})

    coefficient = need("coefficient")
    kernel = need("kernel")
    multiplier = raw.get("multiplier", {"kind": "gaussian"})
    for name, spec in (("coefficient", coefficient), ("kernel", kernel), ("multiplier", multiplier)):
        if not isinstance(spec, dict) or "kind" not in spec:
            raise ConfigError(f"{name} must be an object with a 'kind' key")
    coefficient = _rebase_csv_path(coefficient, base_dir)
    kernel = _rebase_csv_path(kernel, base_dir)

    out = raw.get("out")
    if out is not None and not isinstance(out, str):
        raise ConfigError("out must be a string path")

    return RunConfig(
        depth=depth,
        depth_max=depth_max,
        alpha=_as_complex(need("alpha", 0.0), "alpha"),
        lambdas=lambdas,
        eps0=eps0,
        ratio=ratio,
        bands=bands,
        basis_size=basis_size,
        coefficient=dict(coefficient),
        kernel=dict(kernel),
        multiplier=dict(multiplier),
        probe_bound=probe_bound,
        probe_points=probe_points,
        cutoff=cutoff,
        seed=seed,
        strict=bool(raw.get("strict", False)),
        tolerances=merged_tol,
        out=out,
    )


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return parse_config(raw, base_dir=path.parent)


def _scalar_builtin(spec: dict, where: str):
    """One-variable named function; used for coefficients and rank-one factors."""
    kind = spec.get("kind")
    if kind == "constant":
        value = _as_complex(spec.get("value", 1.0), where)
        fill = value if value.imag else value.real
        return lambda y: np.full(np.asarray(y, dtype=float).shape, fill)
    if kind == "identity":
        return lambda y: np.ones_like(np.asarray(y, dtype=float))
    if kind == "linear":
        scale = float(spec.get("scale", 1.0))
        offset = float(spec.get("offset", 0.0))
        return lambda y: scale * np.asarray(y, dtype=float) + offset
    if kind == "exp":
        scale = float(spec.get("scale", 1.0))
        return lambda y: np.exp(scale * np.asarray(y, dtype=float))
    raise ConfigError(f"{where}: unknown function kind {kind!r}")


def make_coefficient(spec: dict, space: MeasureSpace) -> GridFunction:
    """Sample a named coefficient built-in (or CSV file) on the grid."""
    kind = spec.get("kind")
    if kind == "csv":
        values = read_grid_function_csv(Path(spec["path"]))
        if values.size != space.cell_count:
            raise ConfigError(
                f"coefficient CSV holds {values.size} cells, grid needs {space.cell_count}"
            )
        return GridFunction(space, values)
    allowed = {"kind", "value", "scale", "offset"}
    if set(spec) - allowed:
        raise ConfigError(f"coefficient: unknown keys {sorted(set(spec) - allowed)}")
    return GridFunction.sample(space, _scalar_builtin(spec, "coefficient"))


def make_kernel(spec: dict, space: MeasureSpace) -> GridKernel:
    """Sample a named kernel built-in (or CSV matrix) at cell-center pairs."""
    kind = spec.get("kind")
    if kind == "csv":
        entries = read_matrix_csv(Path(spec["path"]))
        if entries.shape != (space.cell_count, space.cell_count):
            raise ConfigError("kernel CSV shape does not match the grid")
        return GridKernel(space, entries)
    if kind == "constant":
        value = _as_complex(spec.get("value", 1.0), "kernel")
        fill = value if value.imag else value.real
        n = space.cell_count
        return GridKernel(space, np.full((n, n), fill))
    if kind == "exp_xy":
        scale = float(spec.get("scale", 1.0))
        return GridKernel.sample(space, lambda x, y: np.exp(scale * x * y))
    if kind == "product_xy":
        return GridKernel.sample(space, lambda x, y: x * y)
    if kind == "rank_one":
        left = _scalar_builtin(spec.get("left", {"kind": "identity"}), "kernel.left")
        right = _scalar_builtin(spec.get("right", {"kind": "identity"}), "kernel.right")
        c = space.centers()
        a = np.asarray(left(c))
        b = np.asarray(right(c))
        return GridKernel(space, np.outer(a, np.conj(b)))
    raise ConfigError(f"kernel: unknown kind {kind!r}")


def make_multiplier(spec: dict) -> Multiplier:
    allowed = {"kind"}
    if set(spec) - allowed:
        raise ConfigError(f"multiplier: unknown keys {sorted(set(spec) - allowed)}")
    try:
        return Multiplier(spec.get("kind", "gaussian"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
