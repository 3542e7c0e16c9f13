"""Sampling laws for the simulation designs and the null generators.

Each design pairs a law for arm X with a law for arm Y.  Laws draw from
an ``RngStream``; components that are independent by definition use
separate child streams, one per component.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from .errors import ParameterError
from .rng import ARM_X, ARM_Y, RngStream
from .samples import MultivariateSample

__all__ = [
    "Law",
    "MultivariateNormal",
    "MultivariateT",
    "IndependentComponents",
    "Univariate",
    "RandomSignCoupling",
    "UniformMixtureCoupling",
    "DesignSpec",
    "DESIGN_IDS",
    "get_design",
    "sample_design",
    "null_pair",
    "load_law",
]


def _cholesky(cov: np.ndarray) -> np.ndarray:
    cov = np.asarray(cov, dtype=np.float64)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1] or not np.allclose(cov, cov.T):
        raise ParameterError("covariance/scale matrix must be square and symmetric")
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise ParameterError("covariance/scale matrix is not positive definite") from exc


class Law:
    """A continuous p-variate sampling law."""

    p: int

    def sample(self, count: int, stream: RngStream) -> np.ndarray:  # pragma: no cover
        raise NotImplementedError

    def describe(self) -> dict[str, Any]:  # pragma: no cover
        raise NotImplementedError


@dataclass(frozen=True)
class MultivariateNormal(Law):
    mean: tuple[float, ...]
    cov: tuple[tuple[float, ...], ...]

    def __post_init__(self) -> None:
        if len(self.cov) != len(self.mean):
            raise ParameterError("mean and covariance dimensions differ")
        object.__setattr__(self, "_chol", _cholesky(np.array(self.cov)))

    @property
    def p(self) -> int:
        return len(self.mean)

    def sample(self, count: int, stream: RngStream) -> np.ndarray:
        z = stream.generator().standard_normal((count, self.p))
        return z @ self._chol.T + np.asarray(self.mean)

    def describe(self) -> dict[str, Any]:
        return {"law": "normal", "mean": list(self.mean), "cov": [list(r) for r in self.cov]}


@dataclass(frozen=True)
class MultivariateT(Law):
    """Location-zero multivariate t with a scale (not covariance) matrix.

    Draws are ``Z * sqrt(df / W)`` with ``Z ~ N(0, scale)`` and
    ``W ~ chi-square(df)``, the usual ``rmvt`` construction.
    """

    scale: tuple[tuple[float, ...], ...]
    df: float

    def __post_init__(self) -> None:
        if not self.df > 0:
            raise ParameterError("degrees of freedom must be positive")
        object.__setattr__(self, "_chol", _cholesky(np.array(self.scale)))

    @property
    def p(self) -> int:
        return len(self.scale)

    def sample(self, count: int, stream: RngStream) -> np.ndarray:
        gen = stream.generator()
        z = gen.standard_normal((count, self.p)) @ self._chol.T
        w = gen.chisquare(self.df, size=count)
        return z * np.sqrt(self.df / w)[:, None]

    def describe(self) -> dict[str, Any]:
        return {"law": "t", "scale": [list(r) for r in self.scale], "df": self.df}


_UNIVARIATE: dict[str, Callable[..., Callable[[np.random.Generator, int], np.ndarray]]] = {
    "normal": lambda mean=0.0, sd=1.0: lambda g, k: g.normal(mean, sd, k),
    "exponential": lambda rate=1.0: lambda g, k: g.exponential(1.0 / rate, k),
    "centered_exponential": lambda rate=1.0: lambda g, k: g.exponential(1.0 / rate, k) - 1.0 / rate,
    "lognormal": lambda meanlog=0.0, sdlog=1.0: lambda g, k: g.lognormal(meanlog, sdlog, k),
    "uniform": lambda low=0.0, high=1.0: lambda g, k: g.uniform(low, high, k),
}


@dataclass(frozen=True)
class Univariate:
    """One named univariate distribution, e.g. ``Univariate("lognormal", {"sdlog": 1})``."""

    name: str
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.name not in _UNIVARIATE:
            raise ParameterError(
                f"unknown distribution {self.name!r}; choose from {sorted(_UNIVARIATE)}"
            )
        try:
            _UNIVARIATE[self.name](**dict(self.params))
        except TypeError as exc:
            raise ParameterError(f"bad parameters for {self.name}: {exc}") from exc

    def draw(self, gen: np.random.Generator, count: int) -> np.ndarray:
        return _UNIVARIATE[self.name](**dict(self.params))(gen, count)


@dataclass(frozen=True)
class IndependentComponents(Law):
    components: tuple[Univariate, ...]

    @property
    def p(self) -> int:
        return len(self.components)

    def sample(self, count: int, stream: RngStream) -> np.ndarray:
        cols = [c.draw(stream.child(k).generator(), count) for k, c in enumerate(self.components)]
        return np.column_stack(cols)

    def describe(self) -> dict[str, Any]:
        return {
            "law": "independent",
            "components": [{"dist": c.name, "params": dict(c.params)} for c in self.components],
        }


@dataclass(frozen=True)
class RandomSignCoupling(Law):
    """``Y1 ~ N(0, 1)`` and ``Y2 = tau * Y1`` with an independent fair sign ``tau``."""

    @property
    def p(self) -> int:
        return 2

    def sample(self, count: int, stream: RngStream) -> np.ndarray:
        y1 = stream.child(0).generator().standard_normal(count)
        tau = np.where(stream.child(1).generator().random(count) < 0.5, -1.0, 1.0)
        return np.column_stack([y1, tau * y1])

    def describe(self) -> dict[str, Any]:
        return {"law": "random_sign_coupling"}


@dataclass(frozen=True)
class UniformMixtureCoupling(Law):
    """``Yk = sqrt(xi) * eta_k + sqrt(1 - xi) * eta_2`` with ``xi ~ U(0, 1)``.

    Both margins are standard normal but the pair is not jointly normal.
    """

    @property
    def p(self) -> int:
        return 2

    def sample(self, count: int, stream: RngStream) -> np.ndarray:
        xi = stream.child(0).generator().random(count)
        eta1, eta2, eta3 = (stream.child(k).generator().standard_normal(count) for k in (1, 2, 3))
        a, b = np.sqrt(xi), np.sqrt(1.0 - xi)
        return np.column_stack([a * eta1 + b * eta2, a * eta3 + b * eta2])

    def describe(self) -> dict[str, Any]:
        return {"law": "uniform_mixture_coupling"}


def _eye(p: int) -> tuple[tuple[float, ...], ...]:
    return tuple(tuple(float(i == j) for j in range(p)) for i in range(p))


def _equicorrelated(p: int, rho: float) -> tuple[tuple[float, ...], ...]:
    return tuple(tuple(1.0 if i == j else rho for j in range(p)) for i in range(p))


def standard_normal(p: int) -> MultivariateNormal:
    return MultivariateNormal((0.0,) * p, _eye(p))


@dataclass(frozen=True)
class DesignSpec:
    """A named pair of sampling laws.

    Attributes
    ----------
    id : str
        Design label such as ``"D4"`` or ``"S2"``.
    p : int
        Dimension.
    law_x, law_y : Law
        Sampling laws of the two arms.
    parameters : dict
        The constants that define the design, for reports.
    """

    id: str
    p: int
    law_x: Law
    law_y: Law
    parameters: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.law_x.p != self.p or self.law_y.p != self.p:
            raise ParameterError(f"design {self.id}: law dimensions do not match p={self.p}")

    @property
    def is_null(self) -> bool:
        return self.law_x == self.law_y


def _shifted(mean: Sequence[float], scale: float) -> tuple[float, ...]:
    return tuple(float(scale) * m for m in mean)


def _build(design_id: str, shift_scale: float = 1.0) -> DesignSpec:
    n2 = standard_normal(2)
    sigma_y2 = _equicorrelated(2, 0.5)
    mu2 = _shifted((0.5, 0.7), shift_scale)
    mu3 = _shifted((0.5, 0.7, 0.5), shift_scale)
    ind = IndependentComponents
    U = Univariate
    table: dict[str, tuple[int, Law, Law]] = {
        "D1": (2, n2, MultivariateT(((1.0, 0.9), (0.9, 1.0)), 7.0)),
        "D2": (2, ind((U("normal"), U("exponential"))), ind((U("normal"), U("lognormal")))),
        "D3": (2, ind((U("uniform", {"low": -1.0, "high": 1.0}), U("normal", {"sd": 1.5}))),
               ind((U("normal"), U("normal")))),
        "D4": (2, n2, ind((U("normal", {"mean": mu2[0]}), U("normal", {"mean": mu2[1]})))),
        "D5": (2, n2, MultivariateNormal((0.0, 0.0), sigma_y2)),
        "D6": (2, n2, MultivariateNormal(mu2, sigma_y2)),
        "D7": (2, n2, ind((U("centered_exponential"), U("normal")))),
        "D8": (2, n2, RandomSignCoupling()),
        "D9": (2, n2, UniformMixtureCoupling()),
        "S1": (3, standard_normal(3), MultivariateNormal(mu3, _eye(3))),
        "S2": (3, standard_normal(3), MultivariateNormal((0.0,) * 3, _equicorrelated(3, 0.5))),
        "S3": (3, standard_normal(3), MultivariateNormal(mu3, _equicorrelated(3, 0.5))),
        "NULL_NORMAL": (2, n2, n2),
    }
    if design_id not in table:
        raise ParameterError(f"unknown design {design_id!r}; choose from {DESIGN_IDS}")
    p, lx, ly = table[design_id]
    params = {"x": lx.describe(), "y": ly.describe()}
    if shift_scale != 1.0:
        params["shift_scale"] = shift_scale
    return DesignSpec(design_id, p, lx, ly, params)


DESIGN_IDS = tuple(f"D{k}" for k in range(1, 10)) + ("S1", "S2", "S3", "NULL_NORMAL", "NULL_CUSTOM")


def get_design(design_id: str, *, shift_scale: float = 1.0, law: Law | None = None,
               p: int | None = None) -> DesignSpec:
    """Look up a design by id.

    ``shift_scale`` multiplies the location shift of D4, D6, S1 and S3.
    ``NULL_NORMAL`` accepts ``p`` for a p-variate standard normal null;
    ``NULL_CUSTOM`` requires ``law`` and uses it for both arms.
    """
    design_id = design_id.upper()
    if design_id == "NULL_CUSTOM":
        if law is None:
            raise ParameterError("NULL_CUSTOM needs a law (e.g. from a spec file)")
        return DesignSpec("NULL_CUSTOM", law.p, law, law, {"x": law.describe(), "y": law.describe()})
    if design_id == "NULL_NORMAL" and p not in (None, 2):
        law = standard_normal(p)
        return DesignSpec("NULL_NORMAL", p, law, law, {"x": law.describe(), "y": law.describe()})
    return _build(design_id, shift_scale)


def sample_design(spec: DesignSpec, arm: int | str, count: int, stream: RngStream) -> MultivariateSample:
    """Draw ``count`` observations of one arm; ``stream`` is already keyed by replicate."""
    arm_id = {"x": ARM_X, "X": ARM_X, "y": ARM_Y, "Y": ARM_Y}.get(arm, arm)
    if arm_id not in (ARM_X, ARM_Y):
        raise ParameterError(f"arm must be X or Y, got {arm!r}")
    law = spec.law_x if arm_id == ARM_X else spec.law_y
    return MultivariateSample(law.sample(int(count), stream.child(arm_id)))


def null_pair(law: Law, n: int, m: int, stream: RngStream) -> tuple[MultivariateSample, MultivariateSample]:
    """Both arms iid from ``law``, drawn from disjoint child streams."""
    return (
        MultivariateSample(law.sample(int(n), stream.child(ARM_X))),
        MultivariateSample(law.sample(int(m), stream.child(ARM_Y))),
    )


def load_law(path: str | Path) -> Law:
    """Read a custom null law from a JSON file.

    Two forms are accepted::

        {"components": [{"dist": "lognormal", "params": {"sdlog": 1}}, ...]}
        {"mean": [0, 0], "cov": [[1, 0.5], [0.5, 1]]}
    """
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ParameterError(f"cannot read law spec {path}: {exc}") from exc
    return law_from_dict(doc)


def law_from_dict(doc: Mapping[str, Any]) -> Law:
    if "components" in doc:
        comps = tuple(Univariate(c["dist"], dict(c.get("params", {}))) for c in doc["components"])
        if len(comps) < 2:
            raise ParameterError("a law needs at least two components")
        return IndependentComponents(comps)
    if "cov" in doc:
        cov = tuple(tuple(float(v) for v in row) for row in doc["cov"])
        mean = tuple(float(v) for v in doc.get("mean", [0.0] * len(cov)))
        return MultivariateNormal(mean, cov)
    raise ParameterError("law spec needs 'components' or 'cov'")
