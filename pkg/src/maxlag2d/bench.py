"""Experiment driver: spectrum tables and convergence studies.

A run goes mesh -> split -> space -> assembly -> eigensolver -> error
against a reference spectrum.  Tables are plain rows that can be written
as CSV (with a header) or JSON.  Floats are written with ``repr`` so a
table re-parses to exactly the numbers that produced it.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import warnings
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .assemble import assemble_mass, assemble_rot_rot
from .eig import FactorizationError, lowest_nonzero
from .fespace import build_vector_space
from .mesh import DOMAINS, generate_jittered, generate_structured, perturb_vertices, read_mesh
from .refine import read_provenance, refine

__all__ = ["ConfigError", "PipelineError", "CompatibilityWarning", "Perturbation",
           "ExperimentConfig", "ReferenceSpectrum", "reference_spectrum", "SpectrumTable",
           "ConvergenceTable", "build_mesh", "run_spectrum", "run_convergence",
           "convergence_rates", "least_squares_slope", "L_SHAPE_FIRST"]

log = logging.getLogger(__name__)

#: First Maxwell eigenvalue of the L-shape ``[-pi, pi]^2 \ [0, pi] x [-pi, 0]``.
L_SHAPE_FIRST = 0.149511749824251

FAMILIES = ("right-split", "criss-cross", "imported")
SPLITS = ("ps", "ct", "none")
MIN_DEGREE = {"ps": 1, "ct": 2, "none": 4}
SELECTORS = ("singular-vertices", "interior-valence-4")


class ConfigError(ValueError):
    """Invalid experiment configuration."""


class PipelineError(RuntimeError):
    """A pipeline stage failed; ``stage`` names it."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause


class CompatibilityWarning(UserWarning):
    """Degree too low for the split to be spurious-free."""


@dataclass(frozen=True)
class Perturbation:
    """Move ``selector`` vertices by ``alpha * h`` with random signs from ``seed``."""
    selector: str = "singular-vertices"
    alpha: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.selector not in SELECTORS:
            raise ConfigError(f"unknown perturbation selector {self.selector!r}")
        if not 0 <= self.alpha <= 0.25:
            raise ConfigError("perturbation alpha must lie in [0, 0.25]")


def _provenance_split(path) -> str:
    try:
        kind = json.loads(Path(path).read_text())["split_kind"]
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"cannot read provenance {path}: {exc}") from None
    return {"powell-sabin": "ps", "clough-tocher": "ct"}.get(kind, "none")


def _width(domain):
    return 1.0 if domain == "unit-square" else 2 * math.pi


@dataclass
class ExperimentConfig:
    """One experiment.

    ``levels`` are cell counts ``n`` across the domain, so the nominal
    mesh size is ``1/n`` on the unit square and ``2 pi / n`` on the
    L-shape.  ``jitter > 0`` moves interior grid vertices at random
    (seeded by ``mesh_seed``).  ``shift=None`` means half the first
    reference eigenvalue.
    """
    domain: str = "unit-square"
    family: str = "right-split"
    split: str = "ps"
    degree: int = 1
    levels: list = field(default_factory=lambda: [8])
    perturbation: Perturbation | None = None
    nev: int = 10
    shift: float | None = None
    zero_tol: float = 1e-6
    jitter: float = 0.0
    mesh_seed: int = 0
    mesh_path: str | None = None
    provenance_path: str | None = None
    target: int = 1
    csv_path: str | None = None
    json_path: str | None = None

    def __post_init__(self):
        if isinstance(self.perturbation, dict):
            try:
                self.perturbation = Perturbation(**self.perturbation)
            except TypeError as exc:
                raise ConfigError(f"bad perturbation: {exc}") from None
        if self.domain not in DOMAINS:
            raise ConfigError(f"unknown domain {self.domain!r}; expected one of {DOMAINS}")
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown mesh family {self.family!r}; expected one of {FAMILIES}")
        if self.split not in SPLITS:
            raise ConfigError(f"unknown split {self.split!r}; expected one of {SPLITS}")
        if int(self.degree) != self.degree or self.degree < 1:
            raise ConfigError("degree must be a positive integer")
        self.degree = int(self.degree)
        if self.family == "imported":
            if not self.mesh_path:
                raise ConfigError("an imported mesh needs mesh_path")
            self.levels = [0]
        elif self.provenance_path:
            raise ConfigError("provenance_path only applies to imported meshes")
        else:
            lv = list(np.atleast_1d(self.levels).tolist())
            if not lv or any(int(n) != n or n < 1 for n in lv):
                raise ConfigError("levels must be positive integers")
            self.levels = [int(n) for n in lv]
        if int(self.nev) != self.nev or self.nev < 1:
            raise ConfigError("nev must be a positive integer")
        if self.shift is not None and not np.isfinite(self.shift):
            raise ConfigError("shift must be finite")
        if not self.zero_tol > 0:
            raise ConfigError("zero_tol must be positive")
        if not 1 <= self.target <= self.nev:
            raise ConfigError("target must lie in 1..nev")
        if not 0 <= self.jitter < 0.25:
            raise ConfigError("jitter must lie in [0, 0.25)")
        split = self.split
        if self.provenance_path:
            if split != "none":
                raise ConfigError("a mesh with provenance is already split; use split='none'")
            split = _provenance_split(self.provenance_path)
        if self.degree < MIN_DEGREE[split]:
            warnings.warn(f"split {split!r} with degree {self.degree} may produce spurious "
                          f"eigenvalues (needs degree >= {MIN_DEGREE[split]})",
                          CompatibilityWarning, stacklevel=3)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return asdict(self)

    def nominal_h(self, n: int) -> float:
        return _width(self.domain) / n if n else float("nan")

    def resolved_shift(self) -> float:
        if self.shift is not None:
            return float(self.shift)
        return 0.5 * reference_spectrum(self.domain, 1).values[0]


@dataclass(frozen=True)
class ReferenceSpectrum:
    """Known eigenvalues; ``values`` may be shorter than ``requested``."""
    values: np.ndarray
    requested: int
    provenance: str

    def at(self, i: int) -> float | None:
        """Reference for the ``i``-th eigenvalue (0-based), ``None`` if unknown."""
        return float(self.values[i]) if i < len(self.values) else None


def reference_spectrum(domain: str, count: int) -> ReferenceSpectrum:
    """Exact eigenvalues of the Maxwell problem, ascending with multiplicity.

    On the unit square these are ``pi^2 (n^2 + m^2)`` with ``n, m >= 0``
    not both zero.  On the L-shape only the first eigenvalue is known.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    if domain == "unit-square":
        r = int(math.isqrt(count)) + 2
        while True:
            vals = sorted(a * a + b * b for a in range(r + 1) for b in range(r + 1) if a + b)
            # complete up to r^2: a^2 + b^2 <= r^2 forces a, b <= r
            if len(vals) >= count and vals[count - 1] <= r * r:
                break
            r *= 2
        return ReferenceSpectrum(np.pi ** 2 * np.array(vals[:count], dtype=float), count,
                                 "pi^2 (n^2 + m^2), n + m > 0")
    if domain == "L-shape":
        return ReferenceSpectrum(np.array([L_SHAPE_FIRST]), count,
                                 "L-shape benchmark value; higher modes: no reference")
    raise ValueError(f"unknown domain {domain!r}")


def build_mesh(config: ExperimentConfig, n: int):
    """Base mesh of one level, with the configured perturbation applied."""
    if config.family == "imported":
        mesh = read_mesh(config.mesh_path)
    elif config.jitter > 0:
        if config.family != "right-split":
            raise ConfigError("jitter is only available for right-split meshes")
        mesh = generate_jittered(n, config.mesh_seed, config.jitter, domain=config.domain)
    else:
        mesh = generate_structured(n, config.family, config.domain)
    p = config.perturbation
    if p is not None and p.alpha > 0:
        h = config.nominal_h(n) if n else None
        mesh = perturb_vertices(mesh, p.selector, p.alpha, p.seed, h=h)
    return mesh


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(r[h]) for h in header])
    return buf.getvalue()


@dataclass
class SpectrumTable:
    """Rows ``index, lambda, error_vs_reference, residual`` of one run."""
    rows: list
    n_dofs: int
    zero_count: int
    converged: bool
    solver: str
    config: dict = field(default_factory=dict)

    HEADER = ("index", "lambda", "error_vs_reference", "residual")

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([r["lambda"] for r in self.rows])

    @property
    def errors(self) -> np.ndarray:
        return np.array([np.nan if r["error_vs_reference"] is None else r["error_vs_reference"]
                         for r in self.rows])

    def to_csv(self) -> str:
        return _csv(self.HEADER, self.rows)

    def to_dict(self) -> dict:
        return {"rows": self.rows, "n_dofs": self.n_dofs, "zero_count": self.zero_count,
                "converged": self.converged, "solver": self.solver, "config": self.config}

    def write(self, csv_path=None, json_path=None) -> None:
        if csv_path:
            Path(csv_path).write_text(self.to_csv())
        if json_path:
            Path(json_path).write_text(json.dumps(self.to_dict(), indent=1, default=_fmt))


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (ConfigError, PipelineError):
        raise
    except (ValueError, RuntimeError, np.linalg.LinAlgError, OSError) as exc:
        raise PipelineError(name, exc) from exc


def _spectrum_at(config: ExperimentConfig, n: int) -> SpectrumTable:
    mesh = _stage("mesh", build_mesh, config, n)
    if config.provenance_path:
        refined = _stage("refine", read_provenance, mesh, config.provenance_path)
    else:
        refined = _stage("refine", refine, mesh, config.split)
    space = _stage("space", build_vector_space, refined, config.degree)
    k = _stage("assemble", assemble_rot_rot, space)
    m = _stage("assemble", assemble_mass, space)
    try:
        values, res = lowest_nonzero(k, m, config.nev, config.resolved_shift(),
                                     zero_tol=config.zero_tol)
    except (FactorizationError, np.linalg.LinAlgError, ValueError) as exc:
        raise PipelineError("eig", exc) from exc
    keep = res.eigenvalues >= config.zero_tol
    residuals = res.residuals[keep][:len(values)]
    ref = reference_spectrum(config.domain, config.nev)
    rows = []
    for i, (lam, r) in enumerate(zip(values, residuals)):
        exact = ref.at(i)
        rows.append({"index": i + 1, "lambda": float(lam),
                     "error_vs_reference": None if exact is None else abs(exact - float(lam)),
                     "residual": float(r)})
    if len(values) < config.nev:
        log.warning("only %d of %d nonzero eigenvalues found", len(values), config.nev)
    return SpectrumTable(rows, space.dim, res.zero_count, bool(res.converged), res.solver,
                         config.to_dict())


def run_spectrum(config: ExperimentConfig, level: int | None = None) -> SpectrumTable:
    """Spectrum table of a single level (the only or the given level).

    The CSV and JSON paths of the config are written when set.
    """
    if level is None:
        if len(config.levels) != 1:
            raise ConfigError("run_spectrum needs a single level")
        level = config.levels[0]
    table = _spectrum_at(config, level)
    table.write(config.csv_path, config.json_path)
    return table


def convergence_rates(h, errors) -> list:
    """``log(e_j / e_{j+1}) / log(h_j / h_{j+1})``; ``inf`` when ``e_{j+1} = 0``."""
    out = []
    for j in range(len(h) - 1):
        e0, e1 = errors[j], errors[j + 1]
        if e1 == 0:
            out.append(math.inf if e0 > 0 else math.nan)
        elif e0 == 0:
            out.append(-math.inf)
        else:
            out.append(math.log(e0 / e1) / math.log(h[j] / h[j + 1]))
    return out


def least_squares_slope(h, errors) -> float:
    """Slope of ``log e`` against ``log h``; exact hits (zero error) are skipped."""
    h = np.asarray(h, dtype=float)
    e = np.asarray(errors, dtype=float)
    ok = (e > 0) & np.isfinite(e)
    if ok.sum() < 2:
        return math.nan
    return float(np.polyfit(np.log(h[ok]), np.log(e[ok]), 1)[0])


@dataclass
class ConvergenceTable:
    """Rows ``n, h, n_dofs, lambda, error, rate`` plus the least-squares slope."""
    rows: list
    slope: float
    target: int
    config: dict = field(default_factory=dict)

    HEADER = ("n", "h", "n_dofs", "lambda", "error", "rate")

    @property
    def errors(self) -> np.ndarray:
        return np.array([r["error"] for r in self.rows], dtype=float)

    @property
    def rates(self) -> list:
        return [r["rate"] for r in self.rows[1:]]

    def to_csv(self) -> str:
        rows = [dict(r, rate=("∞" if r["rate"] == math.inf else r["rate"])) for r in self.rows]
        return _csv(self.HEADER, rows)

    def to_dict(self) -> dict:
        return {"rows": self.rows, "slope": self.slope, "target": self.target,
                "config": self.config}

    def write(self, csv_path=None, json_path=None) -> None:
        if csv_path:
            Path(csv_path).write_text(self.to_csv(), encoding="utf-8")
        if json_path:
            Path(json_path).write_text(json.dumps(self.to_dict(), indent=1, default=_fmt))


def run_convergence(config: ExperimentConfig) -> ConvergenceTable:
    """Error of eigenvalue ``config.target`` over all levels.

    Needs at least three levels with strictly decreasing ``h`` and a
    known reference for the target.
    """
    levels = config.levels
    if config.family == "imported":
        raise ConfigError("a convergence study needs generated meshes")
    if len(levels) < 3:
        raise ConfigError("a convergence study needs at least three levels")
    if any(b <= a for a, b in zip(levels, levels[1:])):
        raise ConfigError("levels must have strictly decreasing h (increasing n)")
    exact = reference_spectrum(config.domain, config.target).at(config.target - 1)
    if exact is None:
        raise ConfigError(f"no reference for eigenvalue {config.target} on {config.domain}")
    rows = []
    for n in levels:
        t = _spectrum_at(config, n)
        if len(t.rows) < config.target:
            raise PipelineError("eig", RuntimeError(f"fewer than {config.target} eigenvalues at n={n}"))
        lam = t.rows[config.target - 1]["lambda"]
        rows.append({"n": n, "h": config.nominal_h(n), "n_dofs": t.n_dofs, "lambda": lam,
                     "error": abs(exact - lam), "rate": None})
        log.info("n=%d dofs=%d lambda=%.12g error=%.3e", n, t.n_dofs, lam, rows[-1]["error"])
    h = [r["h"] for r in rows]
    e = [r["error"] for r in rows]
    for r, rate in zip(rows[1:], convergence_rates(h, e)):
        r["rate"] = rate
    table = ConvergenceTable(rows, least_squares_slope(h, e), config.target, config.to_dict())
    table.write(config.csv_path, config.json_path)
    return table
