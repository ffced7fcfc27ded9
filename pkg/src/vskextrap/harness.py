"""Extrapolation experiments: test functions, the Lambda_2 sweep, RMSE and output.

Training nodes live on ``[a, b]``. Each fitted model is evaluated on ``s``
equispaced points of ``[a, Lambda_2]`` for ``Lambda_2 = b + 0.1 i``,
``i = 0..lambda2_steps``. The fit is done once per configuration; only the
evaluation grid moves with ``Lambda_2``.
"""
import csv
import io
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from enum import Enum

import numpy as np

from .errors import ConfigError, DomainError, ExperimentError, ShapeError, VskError
from .kernels import CUBIC
from .linsys import RIDGE_SCOPES, fit
from .nodes import Distribution, generate
from .scaling_fit import select_scaling
from .svr import PolynomialKernel, cross_validate, train_svr
from .vsk import fit_vsk

__all__ = [
    "FUNCTIONS",
    "Method",
    "ExperimentConfig",
    "ExperimentResult",
    "test_function",
    "add_noise",
    "rmse",
    "lambda2_values",
    "run_experiment",
    "run_many",
    "average_seeds",
    "emit",
    "read_csv",
    "TABLES",
    "table_configs",
    "CSV_HEADER",
]

logger = logging.getLogger(__name__)

CSV_HEADER = ("function", "distribution", "method", "lambda2", "rmse", "seed", "noise_sigma")
LAMBDA2_SPACING = 0.1


def _f1(x):
    return 1.0 / (x * (x + 1.0) ** 2)


def _f2(x):
    return 1.0 / (x + 1.0)


def _f3(x):
    return x / (x * x + 1.0) ** 2


def _f4(x):
    return np.exp(-2.0 * x)


def _f5(x):
    return np.arctan(20.0 / x)


def _f6(x):
    return x / (x * x + 1.0)


FUNCTIONS = {"f1": _f1, "f2": _f2, "f3": _f3, "f4": _f4, "f5": _f5, "f6": _f6}
_SINGULAR = {"f1": (0.0, -1.0), "f2": (-1.0,), "f5": (0.0,)}


def _function_key(fid):
    key = f"f{fid}" if isinstance(fid, (int, np.integer)) else str(fid).lower()
    if key not in FUNCTIONS:
        raise ConfigError(f"unknown test function {fid!r}; choose one of {sorted(FUNCTIONS)}")
    return key


def test_function(fid, x):
    """Evaluate test function ``fid`` (``"f1"`` .. ``"f6"`` or ``1`` .. ``6``)."""
    key = _function_key(fid)
    xa = np.asarray(x, dtype=np.float64)
    for pole in _SINGULAR.get(key, ()):
        if np.any(xa == pole):
            raise DomainError(f"{key} is singular at x={pole:g}")
    out = FUNCTIONS[key](xa)
    return float(out) if out.ndim == 0 else out


test_function.__test__ = False  # keep pytest from collecting it


def add_noise(values, sigma, seed):
    """Return ``values + sigma * z`` with ``z`` standard normal from PCG64(seed)."""
    if not sigma >= 0:
        raise DomainError(f"noise level must be nonnegative, got {sigma}")
    vals = np.array(values, dtype=np.float64)
    if sigma == 0:
        return vals
    rng = np.random.Generator(np.random.PCG64(seed))
    return vals + sigma * rng.standard_normal(vals.shape)


def rmse(truth, approx):
    """Root mean square of ``truth - approx``."""
    t = np.asarray(truth, dtype=np.float64).ravel()
    a = np.asarray(approx, dtype=np.float64).ravel()
    if t.shape != a.shape:
        raise ShapeError(f"length mismatch: {t.shape[0]} vs {a.shape[0]}")
    if t.size == 0:
        raise ShapeError("rmse of empty vectors")
    return float(np.sqrt(np.mean((t - a) ** 2)))


class Method(str, Enum):
    CUBIC = "cubic"
    TPS_VSK = "tps_vsk"
    SVR = "svr"

    @classmethod
    def parse(cls, name):
        key = str(name).lower().replace("-", "_")
        aliases = {"tpsvsk": "tps_vsk", "vsk": "tps_vsk"}
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise ConfigError(f"unknown method {name!r}; choose from {[m.value for m in cls]}") from None


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: a test function, a node layout and a list of methods.

    ``lam`` is the ridge parameter (``"lambda"`` in config files). SVR runs
    only on uniform (equispaced) nodes.
    """

    function_id: str
    distribution: str
    n: int = 30
    a: float = 0.1
    b: float = 2.0
    lambda2_steps: int = 10
    s: int = 40
    lam: float = 1e-6
    noise_sigma: float = 0.0
    seed: int = 0
    methods: tuple = ("cubic", "tps_vsk")
    ridge: str = "kernel"
    chebyshev_kind: str = "gauss"

    def __post_init__(self):
        object.__setattr__(self, "function_id", _function_key(self.function_id))
        try:
            object.__setattr__(self, "distribution", Distribution(str(self.distribution).lower()).value)
        except ValueError:
            raise ConfigError(f"unknown distribution {self.distribution!r}") from None
        methods = (self.methods,) if isinstance(self.methods, str) else tuple(self.methods)
        object.__setattr__(self, "methods", tuple(Method.parse(m).value for m in methods))
        if not self.methods:
            raise ConfigError("no methods selected")
        if not self.a < self.b:
            raise ConfigError(f"need a < b, got a={self.a}, b={self.b}")
        if int(self.lambda2_steps) != self.lambda2_steps or self.lambda2_steps < 0:
            raise ConfigError(f"lambda2_steps must be a nonnegative integer, got {self.lambda2_steps}")
        if int(self.s) != self.s or self.s < 2:
            raise ConfigError(f"need s >= 2 evaluation points, got {self.s}")
        if int(self.n) != self.n or self.n < 3:
            raise ConfigError(f"need n >= 3 nodes, got {self.n}")
        if not self.noise_sigma >= 0:
            raise ConfigError(f"noise_sigma must be nonnegative, got {self.noise_sigma}")
        if not self.lam >= 0:
            raise ConfigError(f"lambda must be nonnegative, got {self.lam}")
        if self.ridge not in RIDGE_SCOPES:
            raise ConfigError(f"ridge must be one of {RIDGE_SCOPES}")
        if self.chebyshev_kind not in ("gauss", "lobatto"):
            raise ConfigError(f"unknown Chebyshev kind {self.chebyshev_kind!r}")
        if Method.SVR.value in self.methods and self.distribution != Distribution.UNIFORM.value:
            raise ConfigError("the svr method runs on uniform (equispaced) nodes only")

    @classmethod
    def from_mapping(cls, data):
        """Build from a dict with the field names (``"lambda"`` is accepted for ``lam``)."""
        data = dict(data)
        if "lambda" in data:
            data["lam"] = data.pop("lambda")
        if "lambda2_max" in data:
            data["lambda2_steps"] = steps_for(data.get("b", cls.b), data.pop("lambda2_max"))
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def to_mapping(self):
        out = asdict(self)
        out["lambda"] = out.pop("lam")
        out["methods"] = list(out["methods"])
        return out


def steps_for(b, lambda2_max):
    """Number of 0.1 steps from ``b`` to ``lambda2_max``."""
    steps = round((lambda2_max - b) / LAMBDA2_SPACING)
    if steps < 0 or abs(b + steps * LAMBDA2_SPACING - lambda2_max) > 1e-9:
        raise ConfigError(f"lambda2_max={lambda2_max} is not b + 0.1 i for some i >= 0 (b={b})")
    return int(steps)


def lambda2_values(config):
    """``b + 0.1 i`` for ``i = 0..lambda2_steps``, rounded to the 0.1 grid."""
    i = np.arange(config.lambda2_steps + 1)
    return np.round(config.b + LAMBDA2_SPACING * i, 12)


@dataclass(frozen=True)
class ExperimentResult:
    """One RMSE value. ``grid``, ``abs_errors`` and ``config`` are optional extras
    excluded from equality; CSV keeps only the first seven fields."""

    function: str
    distribution: str
    method: str
    lambda2: float
    rmse: float
    seed: int
    noise_sigma: float
    grid: np.ndarray = field(default=None, compare=False, repr=False)
    abs_errors: np.ndarray = field(default=None, compare=False, repr=False)
    config: ExperimentConfig = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not (np.isfinite(self.rmse) and self.rmse >= 0):
            raise DomainError(f"rmse must be finite and nonnegative, got {self.rmse}")


def _training_data(config, method):
    dist = Distribution.UNIFORM.value if method is Method.SVR else config.distribution
    nodes = generate(dist, config.n, config.a, config.b, seed=config.seed, chebyshev_kind=config.chebyshev_kind)
    x = np.asarray(nodes.points)
    f = add_noise(test_function(config.function_id, x), config.noise_sigma, config.seed)
    return x, f


def _fit(config, method, x, f, lambda2_max, svr_jobs=1):
    if method is Method.CUBIC:
        return fit(CUBIC, x, f, lam=config.lam, ridge=config.ridge)
    if method is Method.TPS_VSK:
        psi = select_scaling(x, f, domain=(config.a, lambda2_max))
        logger.debug("%s: %s scaling %s", config.function_id, psi.label, psi.params)
        return fit_vsk(CUBIC, psi, x, f, lam=config.lam, ridge=config.ridge)
    kernel = PolynomialKernel()
    eps, zeta = cross_validate(x, f, kernel=kernel, jobs=svr_jobs)
    return train_svr(kernel, x, f, eps, zeta)


def run_experiment(config, *, keep_errors=False, svr_jobs=1):
    """Fit every method of ``config`` once and sweep ``Lambda_2``.

    Results are ordered by method (as listed in the config), then ``Lambda_2``.
    Module errors are re-raised as :class:`ExperimentError` naming the config.
    """
    lam2 = lambda2_values(config)
    out = []
    for name in config.methods:
        method = Method(name)
        try:
            x, f = _training_data(config, method)
            model = _fit(config, method, x, f, float(lam2[-1]), svr_jobs)
            for l2 in lam2:
                grid = np.linspace(config.a, l2, config.s)
                err = np.abs(test_function(config.function_id, grid) - model(grid))
                out.append(
                    ExperimentResult(
                        config.function_id,
                        config.distribution,
                        method.value,
                        float(l2),
                        rmse(err, np.zeros_like(err)),
                        int(config.seed),
                        float(config.noise_sigma),
                        grid if keep_errors else None,
                        err if keep_errors else None,
                        config,
                    )
                )
        except VskError as exc:
            raise ExperimentError(
                f"{method.value} failed for {config.to_mapping()}: {type(exc).__name__}: {exc}",
                config=config,
                method=method.value,
            ) from exc
    return out


def run_many(configs, *, jobs=1, keep_errors=False):
    """Run several configurations, optionally in threads; output order follows input order."""
    configs = list(configs)
    if jobs and jobs > 1 and len(configs) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(lambda c: run_experiment(c, keep_errors=keep_errors), configs))
    else:
        parts = [run_experiment(c, keep_errors=keep_errors) for c in configs]
    return [r for part in parts for r in part]


def average_seeds(config, seeds, *, jobs=1):
    """Average RMSE over ``seeds`` consecutive seeds starting at ``config.seed``.

    Returned rows carry the starting seed.
    """
    if int(seeds) != seeds or seeds < 1:
        raise ConfigError(f"seeds must be a positive integer, got {seeds!r}")
    runs = [replace(config, seed=config.seed + k) for k in range(seeds)]
    rows = run_many(runs, jobs=jobs)
    per_run = len(rows) // seeds
    out = []
    for k in range(per_run):
        group = rows[k::per_run]
        first = group[0]
        out.append(replace(first, seed=config.seed, rmse=float(np.mean([g.rmse for g in group]))))
    return out


TABLES = {
    "table1": dict(functions=("f1",), distributions=tuple(d.value for d in Distribution), methods=("cubic", "tps_vsk"), noise_sigma=0.0),
    "table2": dict(functions=("f2",), distributions=tuple(d.value for d in Distribution), methods=("cubic", "tps_vsk"), noise_sigma=0.0),
    "table3": dict(functions=("f3",), distributions=tuple(d.value for d in Distribution), methods=("cubic", "tps_vsk"), noise_sigma=0.0),
    "table4": dict(functions=("f4",), distributions=tuple(d.value for d in Distribution), methods=("cubic", "tps_vsk"), noise_sigma=0.0),
    "table5": dict(functions=("f5", "f6"), distributions=("uniform",), methods=("svr", "tps_vsk"), noise_sigma=1e-4),
}


def table_configs(name, **overrides):
    """Configurations behind one of the preset tables (``"table1"`` .. ``"table5"``)."""
    key = str(name).lower()
    if key not in TABLES:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(TABLES)}")
    spec = TABLES[key]
    base = dict(methods=spec["methods"], noise_sigma=spec["noise_sigma"])
    base.update(overrides)
    return [
        ExperimentConfig(function_id=fn, distribution=dist, **base)
        for fn in spec["functions"]
        for dist in spec["distributions"]
    ]


def _fmt(v):
    return format(float(v), ".17e")


def _csv_text(results):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in results:
        w.writerow([r.function, r.distribution, r.method, _fmt(r.lambda2), _fmt(r.rmse), r.seed, _fmt(r.noise_sigma)])
    return buf.getvalue()


def _table_text(results):
    columns = []
    for r in results:
        key = (r.function, r.method, r.distribution)
        if key not in columns:
            columns.append(key)
    lam2 = sorted({r.lambda2 for r in results})
    cell = {(r.function, r.method, r.distribution, r.lambda2): r.rmse for r in results}
    labels = [f"{fn}:{m}:{d}" for fn, m, d in columns]
    width = max([10] + [len(s) for s in labels])
    lines = ["Lambda2  " + " ".join(s.rjust(width) for s in labels)]
    for l2 in lam2:
        vals = []
        for key in columns:
            v = cell.get(key + (l2,))
            vals.append(("-" if v is None else f"{v:.2e}").rjust(width))
        lines.append(f"{l2:7.2f}  " + " ".join(vals))
    return "\n".join(lines) + "\n"


def _errors_text(results):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["function", "distribution", "method", "lambda2", "x", "abs_error"])
    for r in results:
        if r.abs_errors is None:
            raise ConfigError("per-point errors were not recorded; run with keep_errors=True")
        for x, e in zip(r.grid, r.abs_errors):
            w.writerow([r.function, r.distribution, r.method, _fmt(r.lambda2), _fmt(x), _fmt(e)])
    return buf.getvalue()


_FORMATS = {"csv": _csv_text, "table": _table_text, "errors": _errors_text}


def emit(results, fmt="csv", out=None):
    """Render results as ``"csv"``, ``"table"`` or ``"errors"`` (per-point dump).

    ``out`` may be a path or a writable text stream; the text is returned
    either way.
    """
    results = list(results)
    if not results:
        raise ConfigError("no results to emit")
    if fmt not in _FORMATS:
        raise ConfigError(f"unknown format {fmt!r}; choose from {sorted(_FORMATS)}")
    text = _FORMATS[fmt](results)
    if out is None:
        return text
    if hasattr(out, "write"):
        out.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    return text


def read_csv(source):
    """Parse CSV produced by :func:`emit` (a path, stream or the text itself)."""
    if hasattr(source, "read"):
        text = source.read()
    elif isinstance(source, str) and "\n" in source:
        text = source
    else:
        with open(source, newline="") as fh:
            text = fh.read()
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if tuple(header or ()) != CSV_HEADER:
        raise ConfigError(f"unexpected CSV header {header!r}")
    return [
        ExperimentResult(fn, dist, m, float(l2), float(e), int(seed), float(sig))
        for fn, dist, m, l2, e, seed, sig in reader
    ]
