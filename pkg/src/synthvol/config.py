"""YAML run-configuration documents and CSV dataset ingestion.

Configs are plain nested key-value documents.  Validation errors name the
offending key path; YAML syntax errors carry the parser's line numbers.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from .errors import ValidationError
from .estimation import FitConfig
from .evaluation import RVConfig, intraday_block_returns, realized_volatility
from .garch import CovariateModel, GarchParams, ShockSpec
from .montecarlo import GridConfig
from .pipeline import Donor, TargetSeries

DEFAULT_SEED = 0


def load_yaml(path) -> dict:
    try:
        with open(path) as fh:
            doc = yaml.safe_load(fh)
    except FileNotFoundError:
        raise ValidationError(f"config file not found: {path}")
    except yaml.YAMLError as exc:
        raise ValidationError(f"{path}: invalid YAML: {exc}")
    if not isinstance(doc, dict):
        raise ValidationError(f"{path}: top level must be a mapping")
    return doc


class _Doc:
    """Key-path aware accessor over a parsed config mapping."""

    def __init__(self, data: dict, path: str = ""):
        self.data = data
        self.path = path

    def _key(self, key: str) -> str:
        return f"{self.path}.{key}" if self.path else key

    def has(self, key: str) -> bool:
        return key in self.data and self.data[key] is not None

    def get(self, key: str, default=None):
        return self.data.get(key, default)

    def require(self, key: str):
        if not self.has(key):
            raise ValidationError(f"config key {self._key(key)!r} is required")
        return self.data[key]

    def number(self, key: str, default=None) -> float:
        value = self.require(key) if default is None else self.get(key, default)
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValidationError(f"config key {self._key(key)!r} must be a number")
        if not math.isfinite(float(value)):
            raise ValidationError(f"config key {self._key(key)!r} must be finite")
        return float(value)

    def integer(self, key: str, default=None, minimum=None) -> int:
        value = self.require(key) if default is None else self.get(key, default)
        if isinstance(value, bool) or not isinstance(value, int):
            raise ValidationError(f"config key {self._key(key)!r} must be an integer")
        if minimum is not None and value < minimum:
            raise ValidationError(f"config key {self._key(key)!r} must be >= {minimum}")
        return int(value)

    def sub(self, key: str) -> "_Doc":
        value = self.require(key)
        if not isinstance(value, dict):
            raise ValidationError(f"config key {self._key(key)!r} must be a mapping")
        return _Doc(value, self._key(key))

    def numbers(self, key: str, default=None) -> list[float]:
        value = self.get(key, default)
        if value is None:
            raise ValidationError(f"config key {self._key(key)!r} is required")
        if not isinstance(value, (list, tuple)):
            raise ValidationError(f"config key {self._key(key)!r} must be a list of numbers")
        out = []
        for i, v in enumerate(value):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ValidationError(
                    f"config key {self._key(key)!r}[{i}] must be a number"
                )
            out.append(float(v))
        return out


def parse_garch_params(doc: _Doc) -> GarchParams:
    return GarchParams(
        omega=doc.number("omega"),
        alpha=doc.numbers("alpha", default=[]),
        beta=doc.numbers("beta", default=[]),
        gamma=doc.numbers("gamma", default=[]),
    )


def parse_shock_spec(doc: _Doc) -> ShockSpec:
    return ShockSpec(
        t_star=doc.integer("t_star", minimum=1),
        len_vol=doc.integer("len_vol", default=1, minimum=1),
        len_return=doc.integer("len_return", default=0, minimum=0),
        mu_omega_star=doc.number("mu_omega_star", default=0.0),
        delta=doc.numbers("delta", default=[]),
        sigma_u=doc.number("sigma_u", default=0.0),
        mu_eps_star=doc.number("mu_eps_star", default=0.0),
        sigma_eps_star=doc.number("sigma_eps_star", default=0.0),
    )


@dataclass(frozen=True)
class SimulateConfig:
    seed: int
    length: int
    params: GarchParams
    shock: ShockSpec | None
    covariate_model: CovariateModel


def parse_simulate_config(raw: dict) -> SimulateConfig:
    doc = _Doc(raw)
    params = parse_garch_params(doc.sub("params"))
    shock = parse_shock_spec(doc.sub("shock")) if doc.has("shock") else None
    if doc.has("covariates"):
        cov = doc.sub("covariates")
        model = CovariateModel(
            p=cov.integer("p", minimum=0),
            mean=cov.number("mean", default=0.0),
            sd=cov.number("sd", default=1.0),
        )
    else:
        model = CovariateModel(p=0)
    needed = max(params.p, shock.delta.size if shock is not None else 0)
    if needed and model.p != needed:
        raise ValidationError(
            f"config key 'covariates.p' must be {needed} to match gamma/delta lengths"
        )
    length = doc.integer("length", minimum=1)
    min_len = max(params.m, params.s) + 1
    if length < min_len:
        raise ValidationError(f"config key 'length' must be >= {min_len} for these orders")
    return SimulateConfig(
        seed=doc.integer("seed", default=DEFAULT_SEED),
        length=length,
        params=params,
        shock=shock,
        covariate_model=model,
    )


def parse_grid_config(raw: dict) -> GridConfig:
    doc = _Doc(raw)
    axis1 = doc.sub("axis1")
    axis2 = doc.sub("axis2")
    base = (
        parse_garch_params(doc.sub("base_params"))
        if doc.has("base_params")
        else GarchParams(0.2, [0.1], [0.82])
    )
    fixed_doc = doc.sub("fixed") if doc.has("fixed") else _Doc({}, "fixed")
    fixed = {}
    for key in fixed_doc.data:
        fixed[key] = fixed_doc.number(key)
    t_range = doc.numbers("t_range", default=[756, 2520])
    if len(t_range) != 2:
        raise ValidationError("config key 't_range' must be [low, high]")
    return GridConfig(
        axis1=(str(axis1.require("name")), tuple(axis1.numbers("values"))),
        axis2=(str(axis2.require("name")), tuple(axis2.numbers("values"))),
        fixed=fixed,
        replications=doc.integer("replications", default=200, minimum=1),
        n_donors=doc.integer("n_donors", default=3, minimum=1),
        p=doc.integer("p", default=9, minimum=1),
        t_range=(int(t_range[0]), int(t_range[1])),
        len_vol=doc.integer("len_vol", default=1, minimum=1),
        base_params=base,
        seed=doc.integer("seed", default=DEFAULT_SEED),
    )


def read_returns_csv(path, column: str | None = None) -> tuple[np.ndarray, list[str] | None]:
    """Daily returns from a CSV with a `return` or `price` column.

    Prices are converted to log returns; the returned date list (if a
    date column exists) is aligned with the returns.
    """
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"returns file not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        rows = [row for row in reader if row and any(cell.strip() for cell in row)]
    if len(rows) < 2:
        raise ValidationError(f"{path}: no data rows")
    header = [h.strip().lower() for h in rows[0]]

    def find(*names):
        for name in names:
            if name in header:
                return header.index(name)
        return None

    date_idx = find("date", "timestamp")
    if column is not None:
        value_idx = find(column.lower())
        if value_idx is None:
            raise ValidationError(f"{path}: no column named {column!r}")
        is_price = column.lower() in ("price", "close", "adj_close", "adjusted_close")
    else:
        value_idx = find("return", "log_return", "returns")
        is_price = False
        if value_idx is None:
            value_idx = find("price", "close", "adj_close", "adjusted_close")
            is_price = True
        if value_idx is None:
            raise ValidationError(
                f"{path}: expected a 'return' or 'price' column, got {header}"
            )
    values = []
    dates = [] if date_idx is not None else None
    for lineno, row in enumerate(rows[1:], start=2):
        try:
            values.append(float(row[value_idx]))
        except (ValueError, IndexError):
            raise ValidationError(f"{path}:{lineno}: bad numeric value in data row")
        if dates is not None:
            dates.append(row[date_idx].strip())
    series = np.asarray(values, dtype=float)
    if is_price:
        if np.any(series <= 0):
            raise ValidationError(f"{path}: prices must be positive to take log returns")
        series = np.diff(np.log(series))
        if dates is not None:
            dates = dates[1:]
    return series, dates


def read_covariates_csv(path, expected: list[str] | None = None) -> dict[str, float]:
    """Per-event covariate vector from a long CSV with columns covariate,value."""
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"covariate file not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        rows = [row for row in reader if row and any(cell.strip() for cell in row)]
    if not rows:
        raise ValidationError(f"{path}: empty covariate file")
    header = [h.strip().lower() for h in rows[0]]
    if header[:2] != ["covariate", "value"]:
        raise ValidationError(f"{path}: header must be 'covariate,value', got {rows[0]}")
    out: dict[str, float] = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) < 2:
            raise ValidationError(f"{path}:{lineno}: expected 'name,value'")
        name = row[0].strip()
        if name in out:
            raise ValidationError(f"{path}:{lineno}: duplicate covariate {name!r}")
        try:
            out[name] = float(row[1])
        except ValueError:
            raise ValidationError(f"{path}:{lineno}: bad value for covariate {name!r}")
    if expected is not None:
        missing = [c for c in expected if c not in out]
        if missing:
            raise ValidationError(f"{path}: missing covariate cell(s): {missing}")
        extra = [c for c in out if c not in expected]
        if extra:
            raise ValidationError(f"{path}: unknown covariate(s): {extra}")
    return out


def _resolve_t_star(doc: _Doc, dates: list[str] | None, length: int, label: str) -> int:
    """t_star = number of pre-shock observations, from an index or a date."""
    value = doc.require("t_star")
    if isinstance(value, bool):
        raise ValidationError(f"{label}: t_star must be an integer or an ISO date")
    if isinstance(value, int):
        t_star = value
    else:
        text = str(value).strip()
        if dates is None:
            raise ValidationError(
                f"{label}: t_star given as a date but the returns file has no date column"
            )
        try:
            idx = dates.index(text)
        except ValueError:
            raise ValidationError(f"{label}: date {text!r} not found in the returns file")
        t_star = idx + 1  # the named date is the last pre-shock observation
    if not 1 <= t_star < length:
        raise ValidationError(
            f"{label}: t_star={t_star} outside the series (length {length})"
        )
    return t_star


@dataclass(frozen=True)
class BundleConfig:
    seed: int
    horizon: int
    adjustment_length: int
    estimation_window: int | None
    covariate_names: tuple[str, ...]
    target: TargetSeries
    donors: tuple[Donor, ...]
    ground_truth: float | None
    loss: str


def _load_series(doc: _Doc, covariate_names: list[str], label: str):
    returns, dates = read_returns_csv(doc.require("returns"))
    t_star = _resolve_t_star(doc, dates, returns.size, label)
    cov_map = read_covariates_csv(doc.require("covariates"), covariate_names)
    vector = np.array([cov_map[name] for name in covariate_names])
    return returns, vector, t_star


def parse_bundle_config(raw: dict, base_dir: Path | None = None) -> BundleConfig:
    doc = _Doc(raw)
    base = Path(base_dir) if base_dir is not None else Path(".")

    def resolve(sub: _Doc, key: str) -> None:
        sub.data[key] = str((base / str(sub.require(key))).resolve())

    names = doc.get("covariates")
    if not isinstance(names, list) or not all(isinstance(c, str) for c in names):
        raise ValidationError("config key 'covariates' must be a list of covariate names")
    if len(set(names)) != len(names):
        raise ValidationError("config key 'covariates' has duplicate names")

    target_doc = doc.sub("target")
    resolve(target_doc, "returns")
    resolve(target_doc, "covariates")
    t_returns, t_vector, t_star = _load_series(target_doc, names, "target")
    target = TargetSeries(
        name=str(target_doc.get("name", "target")),
        returns=t_returns,
        profile_covariates=t_vector,
        t_star=t_star,
    )

    donors_raw = doc.require("donors")
    if not isinstance(donors_raw, list) or not donors_raw:
        raise ValidationError("config key 'donors' must be a non-empty list")
    default_len_vol = doc.integer("len_vol", default=1, minimum=1)
    donors = []
    seen = set()
    for i, item in enumerate(donors_raw):
        if not isinstance(item, dict):
            raise ValidationError(f"config key 'donors[{i}]' must be a mapping")
        d = _Doc(item, f"donors[{i}]")
        resolve(d, "returns")
        resolve(d, "covariates")
        name = str(d.get("name", f"donor{i + 1}"))
        if name in seen:
            raise ValidationError(f"duplicate donor name {name!r}")
        seen.add(name)
        returns, vector, star = _load_series(d, names, f"donors[{i}]")
        donors.append(
            Donor(
                name=name,
                returns=returns,
                profile_covariates=vector,
                t_star=star,
                len_vol=d.integer("len_vol", default=default_len_vol, minimum=1),
            )
        )

    ground_truth = None
    if doc.has("ground_truth"):
        gt = doc.sub("ground_truth")
        if gt.has("value"):
            ground_truth = gt.number("value")
            if ground_truth <= 0:
                raise ValidationError("config key 'ground_truth.value' must be > 0")
        elif gt.has("intraday"):
            resolve(gt, "intraday")
            rv_config = RVConfig(
                K=gt.integer("K", default=1, minimum=1),
                m=gt.integer("m", default=77, minimum=1),
                drop_first_block=bool(gt.get("drop_first_block", False)),
            )
            ground_truth = _rv_from_intraday(gt.require("intraday"), rv_config)
        else:
            raise ValidationError(
                "config key 'ground_truth' needs either 'value' or 'intraday'"
            )

    loss = str(doc.get("loss", "QL"))
    window = doc.integer("estimation_window", minimum=1) if doc.has("estimation_window") else None
    return BundleConfig(
        seed=doc.integer("seed", default=DEFAULT_SEED),
        horizon=doc.integer("horizon", default=1, minimum=1),
        adjustment_length=doc.integer("adjustment_length", default=1, minimum=0),
        estimation_window=window,
        covariate_names=tuple(names),
        target=target,
        donors=tuple(donors),
        ground_truth=ground_truth,
        loss=loss,
    )


def _rv_from_intraday(path, rv_config: RVConfig) -> float:
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"intraday file not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        rows = [row for row in reader if row and any(cell.strip() for cell in row)]
    if len(rows) < 2:
        raise ValidationError(f"{path}: no data rows")
    header = [h.strip().lower() for h in rows[0]]
    if "timestamp" not in header or "price" not in header:
        raise ValidationError(f"{path}: header must contain 'timestamp' and 'price'")
    ts_idx, px_idx = header.index("timestamp"), header.index("price")
    stamps, prices = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        try:
            stamps.append(row[ts_idx].strip())
            prices.append(float(row[px_idx]))
        except (ValueError, IndexError):
            raise ValidationError(f"{path}:{lineno}: bad intraday row")
    blocks = intraday_block_returns(stamps, prices)
    return realized_volatility(blocks, rv_config)
