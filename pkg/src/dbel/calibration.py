"""Monte Carlo calibration of critical values, p-values and table files.

Because the statistic depends on the data only through ranks of
projections, its null law is the same for every continuous distribution
shared by the two arms.  Critical values can therefore be simulated once
under independent standard normal data and reused.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np
from scipy import stats as sps

from .dbel import DbelParams
from .designs import Law, null_pair, standard_normal
from .errors import CalibrationMismatchError, CorruptTableError, ParameterError, SchemaVersionError
from .rng import replicate_stream
from .teststat import Mode, compute_ts

__all__ = [
    "SCHEMA_VERSION",
    "McConfig",
    "CalibrationTable",
    "FreenessReport",
    "run_replicates",
    "null_statistics",
    "calibrate_retrospective",
    "table_from_statistics",
    "mc_p_value",
    "distribution_freeness_check",
    "save_table",
    "load_table",
    "default_table_name",
    "calibration_dir",
]

SCHEMA_VERSION = 1
CALIB_DIR_ENV = "DBEL_CALIBRATION_DIR"
DEFAULT_ALPHAS = (0.1, 0.05, 0.01)
MIN_REPS = 100


def _software_version() -> str:
    from . import __version__

    return __version__


@dataclass(frozen=True)
class McConfig:
    """Monte Carlo settings.

    Parameters
    ----------
    reps : int
        Number of null replicates, at least 100.
    seed : int
        Root seed; replicate ``k`` draws from the stream keyed ``(seed, k)``.
    alpha_grid : sequence of float
        Levels to tabulate, each strictly inside (0, 1).
    quantile_method : str
        Only ``"type7"`` (linear interpolation between order statistics).
    """

    reps: int = 20000
    seed: int = 0
    alpha_grid: tuple[float, ...] = DEFAULT_ALPHAS
    quantile_method: str = "type7"

    def __post_init__(self) -> None:
        if int(self.reps) != self.reps or self.reps < MIN_REPS:
            raise ParameterError(f"reps must be an integer >= {MIN_REPS}, got {self.reps}")
        alphas = tuple(float(a) for a in self.alpha_grid)
        if not alphas or any(not 0.0 < a < 1.0 for a in alphas):
            raise ParameterError(f"alphas must lie strictly in (0, 1), got {alphas}")
        if self.quantile_method != "type7":
            raise ParameterError(f"unsupported quantile method {self.quantile_method!r}")
        object.__setattr__(self, "alpha_grid", tuple(sorted(set(alphas), reverse=True)))


def default_threads() -> int:
    return os.cpu_count() or 1


def run_replicates(fn: Callable[[int], Any], reps: int, threads: int | None = None) -> list:
    """``[fn(0), ..., fn(reps - 1)]`` computed by up to ``threads`` workers.

    Each replicate derives its randomness from its own index, so the
    result does not depend on the number of workers.
    """
    threads = default_threads() if threads is None else int(threads)
    if threads < 1:
        raise ParameterError("threads must be positive")
    if threads == 1 or reps < 2:
        return [fn(k) for k in range(reps)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(reps), chunksize=max(1, reps // (8 * threads))))


def null_statistics(
    n: int, m: int, p: int = 2, params: DbelParams = DbelParams(), *,
    reps: int, seed: int, law: Law | None = None, mode: Mode | str = Mode.EXACT,
    threads: int | None = None,
) -> np.ndarray:
    """Statistic values of ``reps`` independent null replicates, in replicate order."""
    law = law or standard_normal(p)
    if law.p != p:
        raise ParameterError(f"law has {law.p} components, expected {p}")
    mode = Mode(mode)

    def one(k: int) -> float:
        x, y = null_pair(law, n, m, replicate_stream(seed, k))
        return compute_ts(x, y, params, mode, seed=k).log_ts

    return np.array(run_replicates(one, reps, threads), dtype=np.float64)


def _quantile_type7(sorted_stats: np.ndarray, prob: float) -> float:
    return float(np.quantile(sorted_stats, prob, method="linear"))


def _stats_digest(stats: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(stats, dtype="<f8").tobytes()).hexdigest()


@dataclass(frozen=True)
class CalibrationTable:
    """Critical values with the provenance needed to regenerate them.

    ``kind`` is ``"retrospective"`` (keyed by ``n, m``) or
    ``"sequential"`` (keyed by ``K, m_per_group``); both also key on
    ``p``, ``delta`` and ``mode``.  ``entries`` maps each level alpha to
    its critical value.  ``null_stats`` holds the raw statistics in
    replicate order when they were kept, which enables Monte Carlo
    p-values.
    """

    kind: str
    p: int
    delta: float
    mode: str
    entries: tuple[tuple[float, float], ...]
    reps: int
    seed: int
    quantile_method: str = "type7"
    software_version: str = field(default_factory=_software_version)
    stats_sha256: str = ""
    n: int | None = None
    m: int | None = None
    K: int | None = None
    m_per_group: int | None = None
    null_stats: np.ndarray | None = field(default=None, compare=False, repr=False)

    def threshold(self, alpha: float) -> float:
        for a, c in self.entries:
            if math.isclose(a, alpha, rel_tol=0.0, abs_tol=1e-12):
                return c
        raise CalibrationMismatchError(
            f"alpha={alpha} not calibrated; table has {[a for a, _ in self.entries]}"
        )

    @property
    def key(self) -> tuple:
        if self.kind == "sequential":
            return (self.kind, self.K, self.m_per_group, self.p, self.delta, self.mode)
        return (self.kind, self.n, self.m, self.p, self.delta, self.mode)

    def _require(self, expected: dict[str, Any]) -> None:
        bad = [
            f"{k}: table {getattr(self, k)!r} vs requested {v!r}"
            for k, v in expected.items()
            if (not math.isclose(getattr(self, k), v, abs_tol=1e-12) if k == "delta"
                else getattr(self, k) != v)
        ]
        if bad:
            raise CalibrationMismatchError("calibration table does not match: " + "; ".join(bad))

    def require_match(self, *, n: int, m: int, p: int, delta: float, mode: str) -> None:
        """Refuse use outside the configuration the table was built for."""
        self._require({"kind": "retrospective", "n": n, "m": m, "p": p, "delta": delta,
                       "mode": Mode(mode).value})

    def require_sequential(self, *, K: int, m_per_group: int, p: int, delta: float, mode: str) -> None:
        self._require({"kind": "sequential", "K": K, "m_per_group": m_per_group, "p": p,
                       "delta": delta, "mode": Mode(mode).value})

    def provenance(self) -> dict[str, Any]:
        prov = {k: v for k, v in self._header().items() if v is not None}
        prov.pop("schema_version", None)
        return prov

    def _header(self) -> dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": self.kind,
            "n": self.n,
            "m": self.m,
            "K": self.K,
            "m_per_group": self.m_per_group,
            "p": self.p,
            "delta": self.delta,
            "mode": self.mode,
            "reps": self.reps,
            "seed": self.seed,
            "quantile_method": self.quantile_method,
            "software_version": self.software_version,
            "stats_sha256": self.stats_sha256,
        }

    def to_dict(self) -> dict[str, Any]:
        doc = self._header()
        doc["entries"] = [{"alpha": a, "c": c} for a, c in self.entries]
        doc["null_stats"] = None if self.null_stats is None else [float(s) for s in self.null_stats]
        doc["checksum"] = _checksum(doc)
        return doc

    def row(self) -> str:
        """One line in the layout of a critical-value table."""
        if self.kind == "sequential":
            head = f"K={self.K} m={self.m_per_group}"
        else:
            head = f"(n,m)=({self.n},{self.m})"
        cells = "  ".join(f"a={a:g}: {c:.3f}" for a, c in self.entries)
        return f"{head}  {cells}"


def _canonical_json(doc: dict[str, Any]) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), allow_nan=False)


def _checksum(doc: dict[str, Any]) -> str:
    body = {k: v for k, v in doc.items() if k != "checksum"}
    return hashlib.sha256(_canonical_json(body).encode("utf-8")).hexdigest()


def table_from_statistics(
    stats: np.ndarray, cfg: McConfig, *, kind: str, p: int, params: DbelParams, mode: Mode | str,
    n: int | None = None, m: int | None = None, K: int | None = None,
    m_per_group: int | None = None, keep_stats: bool = True,
) -> CalibrationTable:
    """Build a table from null statistics listed in replicate order."""
    stats = np.asarray(stats, dtype=np.float64)
    digest = _stats_digest(stats)
    ordered = np.sort(stats)
    entries = tuple((a, _quantile_type7(ordered, 1.0 - a)) for a in cfg.alpha_grid)
    kept = stats.copy()
    kept.setflags(write=False)
    return CalibrationTable(
        kind=kind, p=p, delta=params.delta, mode=Mode(mode).value, entries=entries,
        reps=int(stats.size), seed=int(cfg.seed), quantile_method=cfg.quantile_method,
        stats_sha256=digest, n=n, m=m, K=K, m_per_group=m_per_group,
        null_stats=kept if keep_stats else None,
    )


def calibrate_retrospective(
    n: int, m: int, p: int = 2, params: DbelParams = DbelParams(), cfg: McConfig = McConfig(),
    *, mode: Mode | str = Mode.EXACT, threads: int | None = None, keep_stats: bool = True,
) -> CalibrationTable:
    """Null quantiles of the statistic at sample sizes ``(n, m)``.

    Each replicate draws ``n`` and ``m`` independent standard normal
    p-vectors and evaluates the statistic in the requested mode.
    """
    stats = null_statistics(n, m, p, params, reps=cfg.reps, seed=cfg.seed, mode=mode,
                            threads=threads)
    return table_from_statistics(stats, cfg, kind="retrospective", p=p, params=params,
                                 mode=mode, n=n, m=m, keep_stats=keep_stats)


def mc_p_value(observed: float, null_stats: Sequence[float] | np.ndarray) -> float:
    """``(1 + #{s >= observed}) / (1 + R)`` over the ``R`` null statistics.

    Examples
    --------
    >>> mc_p_value(5.0, [1.0, 2.0, 3.0])
    0.25
    """
    arr = np.asarray(null_stats, dtype=np.float64)
    if arr.size == 0:
        raise ParameterError("null statistics must be nonempty")
    return float((1 + np.count_nonzero(arr >= observed)) / (1 + arr.size))


@dataclass(frozen=True)
class FreenessReport:
    ks_statistic: float
    p_value: float
    stats_a: np.ndarray = field(repr=False)
    stats_b: np.ndarray = field(repr=False)


def distribution_freeness_check(
    n: int, m: int, p: int, params: DbelParams, generators: tuple[Law, Law], reps: int,
    seed: int, *, seed_b: int | None = None, mode: Mode | str = Mode.EXACT,
    threads: int | None = None,
) -> FreenessReport:
    """Two-sample KS comparison of the null statistic under two data laws.

    ``seed_b`` defaults to ``seed``; with the same law on both sides this
    reproduces identical statistic samples.
    """
    law_a, law_b = generators
    a = null_statistics(n, m, p, params, reps=reps, seed=seed, law=law_a, mode=mode, threads=threads)
    b = null_statistics(n, m, p, params, reps=reps, seed=seed if seed_b is None else seed_b,
                        law=law_b, mode=mode, threads=threads)
    res = sps.ks_2samp(a, b)
    return FreenessReport(float(res.statistic), float(res.pvalue), a, b)


def save_table(table: CalibrationTable, path: str | Path) -> None:
    """Write the table as JSON; identical tables produce identical bytes."""
    text = json.dumps(table.to_dict(), sort_keys=True, indent=1, allow_nan=False) + "\n"
    Path(path).write_text(text, encoding="utf-8")


def load_table(path: str | Path) -> CalibrationTable:
    """Read a table, verifying schema version and checksums.

    Raises
    ------
    CorruptTableError
        Unparsable, truncated or tampered file.
    SchemaVersionError
        File written with another schema version.
    """
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError) as exc:
        raise CorruptTableError(f"cannot read calibration table {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CorruptTableError(f"calibration table {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise CorruptTableError(f"calibration table {path} is not a JSON object")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise SchemaVersionError(
            f"calibration table {path} has schema version {doc.get('schema_version')!r}, "
            f"expected {SCHEMA_VERSION}"
        )
    if doc.get("checksum") != _checksum(doc):
        raise CorruptTableError(f"calibration table {path} fails its checksum")
    try:
        stats = doc.get("null_stats")
        arr = None
        if stats is not None:
            arr = np.array(stats, dtype=np.float64)
            if _stats_digest(arr) != doc["stats_sha256"]:
                raise CorruptTableError(f"calibration table {path}: raw statistics fail their checksum")
            arr.setflags(write=False)
        return CalibrationTable(
            kind=doc["kind"], p=int(doc["p"]), delta=float(doc["delta"]), mode=doc["mode"],
            entries=tuple((float(e["alpha"]), float(e["c"])) for e in doc["entries"]),
            reps=int(doc["reps"]), seed=int(doc["seed"]),
            quantile_method=doc["quantile_method"], software_version=doc["software_version"],
            stats_sha256=doc["stats_sha256"], n=doc.get("n"), m=doc.get("m"), K=doc.get("K"),
            m_per_group=doc.get("m_per_group"), null_stats=arr,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptTableError(f"calibration table {path} is missing fields: {exc}") from exc


def calibration_dir() -> Path | None:
    """Directory named by ``DBEL_CALIBRATION_DIR``, if set."""
    value = os.environ.get(CALIB_DIR_ENV)
    return Path(value) if value else None


def default_table_name(*, kind: str, p: int, delta: float, mode: str, n: int | None = None,
                       m: int | None = None, K: int | None = None,
                       m_per_group: int | None = None) -> str:
    if kind == "sequential":
        head = f"seq_K{K}_m{m_per_group}"
    else:
        head = f"retro_n{n}_m{m}"
    return f"{head}_p{p}_delta{delta:g}_{Mode(mode).value}.json"
