"""Plain-text run configuration (INI sections) with strict validation.

Every key has a documented default; unknown sections or keys are errors.
Field values use small descriptors:

* coefficient fields: ``constant:V``, ``step:V1,V2,B`` (V1 where x_1 < B,
  else V2), ``csv:PATH`` (one value per interior node, optional index column);
* initial data: ``zero``, ``eigen:K`` (K-th discrete eigenvector),
  ``sine:K``, ``constant:V``, ``csv:PATH``;
* angles: radians, or a multiple of pi written ``0.75pi``.
"""
from __future__ import annotations

import configparser
import csv
import io
import math
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .contour import ContourConfig
from .errors import ConfigError, ValidationError
from .kernels import DistributedOrder, MultiTerm, VariableOrder

SECTIONS = ("problem", "kernel", "time", "data", "contour", "verify", "output")
KNOWN_CHECKS = ("unit", "eigenmode", "laplace", "weak")


@dataclass
class ProblemBlock:
    dim: int = 1
    shape: str = "127"
    lengths: str = "1.0"
    a: str = "constant:1.0"
    q: str = "constant:0.0"
    rho: str = "constant:1.0"


@dataclass
class KernelBlock:
    variant: str = "variable"
    alpha: str = "constant:0.5"
    mu: str = "uniform"
    alpha0: float = 0.5
    eps: float = 0.25
    n_quad: int = 64
    alphas: str = "0.3,0.7"
    weights: str = "constant:1.0;constant:1.0"


@dataclass
class TimeBlock:
    T: float = 12.0
    M: int = 512
    grading: float = 3.0
    final_time: str = "none"


@dataclass
class DataBlock:
    u0: str = "eigen:1"
    source: str = "zero"
    source_time: str = "one"
    growth: str = "none"
    horizon: str = "none"


@dataclass
class ContourBlock:
    theta: str = "0.75pi"
    delta_mode: str = "auto"
    n_arc: int = 32
    n_ray: str = "auto"
    tol: float = 1e-14


@dataclass
class VerifyBlock:
    enabled: bool = True
    checks: str = "unit,eigenmode,laplace,weak"
    tol_unit: float = 1e-10
    tol_eigenmode: float = 1e-5
    tol_laplace: float = 1e-4
    tol_weak: float = 1e-3
    probe_p: str = "1,2,1+2j"
    weak_M0: int = 32
    weak_doublings: int = 3
    weak_min_order: float = 1.0
    corrupt: float = 1.0


@dataclass
class OutputBlock:
    dir: str = "out"
    solution: bool = True


@dataclass
class RunConfig:
    problem: ProblemBlock = field(default_factory=ProblemBlock)
    kernel: KernelBlock = field(default_factory=KernelBlock)
    time: TimeBlock = field(default_factory=TimeBlock)
    data: DataBlock = field(default_factory=DataBlock)
    contour: ContourBlock = field(default_factory=ContourBlock)
    verify: VerifyBlock = field(default_factory=VerifyBlock)
    output: OutputBlock = field(default_factory=OutputBlock)
    base_dir: Path = field(default=Path("."), compare=False)

    # ---- derived objects -------------------------------------------------
    @property
    def shape(self):
        return _int_tuple(self.problem.shape, "problem.shape")

    def grid_lengths(self):
        vals = _float_list(self.problem.lengths, "problem.lengths")
        return tuple(vals * self.problem.dim if len(vals) == 1 else vals)

    def theta(self):
        return parse_angle(self.contour.theta, "contour.theta")

    def contour_config(self):
        delta = None
        mode = self.contour.delta_mode.strip()
        if mode.startswith("fixed:"):
            delta = _num(mode[6:], "contour.delta_mode")
        n_ray = None if self.contour.n_ray.strip() == "auto" else int(self.contour.n_ray)
        return ContourConfig(theta=self.theta(), delta=delta, n_arc=self.contour.n_arc,
                             n_ray=n_ray, tol=self.contour.tol)

    def checks(self):
        return [c.strip() for c in self.verify.checks.split(",") if c.strip()]

    def probe_points(self):
        return tuple(complex(s.strip().replace(" ", "")) for s in self.verify.probe_p.split(","))

    def final_time(self):
        v = self.time.final_time.strip().lower()
        return None if v == "none" else _num(v, "time.final_time")

    def to_ini(self):
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str
        for name in SECTIONS:
            block = getattr(self, name)
            cp[name] = {f.name: _fmt(getattr(block, f.name)) for f in fields(block)}
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _num(s, key):
    try:
        return float(s)
    except ValueError as exc:
        raise ConfigError(f"{key}: expected a number, got {s!r}") from exc


def _float_list(s, key):
    return [_num(x.strip(), key) for x in str(s).split(",") if x.strip()]


def _int_tuple(s, key):
    try:
        return tuple(int(x) for x in str(s).split(",") if x.strip())
    except ValueError as exc:
        raise ConfigError(f"{key}: expected comma-separated integers, got {s!r}") from exc


def parse_angle(s, key):
    """Radians, or a multiple of pi such as ``0.75pi``; must lie in (0.5pi, pi)."""
    txt = str(s).strip().lower().replace("π", "pi")
    val = _num(txt[:-2].strip() or "1", key) * math.pi if txt.endswith("pi") else _num(txt, key)
    if not math.pi / 2 < val < math.pi:
        raise ConfigError(f"{key} must lie in (0.5π, π), got {val / math.pi:.4g}π")
    return val


def _coerce(block_cls, key_path, name, raw):
    ftype = {f.name: f.type for f in fields(block_cls)}[name]
    raw = raw.strip()
    try:
        if ftype in ("int", int):
            return int(raw)
        if ftype in ("float", float):
            return float(raw)
        if ftype in ("bool", bool):
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
    except ValueError as exc:
        raise ConfigError(f"{key_path}: expected {ftype}, got {raw!r}") from exc
    return raw


_BLOCKS = {"problem": ProblemBlock, "kernel": KernelBlock, "time": TimeBlock,
           "data": DataBlock, "contour": ContourBlock, "verify": VerifyBlock,
           "output": OutputBlock}


def parse_config_text(text, base_dir=".", strict=True):
    """Parse INI text into a validated :class:`RunConfig`."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed configuration: {exc}") from exc
    cfg = RunConfig(base_dir=Path(base_dir))
    unknown = []
    for sec in cp.sections():
        if sec not in _BLOCKS:
            unknown.append(f"[{sec}]")
            continue
        cls = _BLOCKS[sec]
        block = getattr(cfg, sec)
        names = {f.name for f in fields(cls)}
        for key, raw in cp[sec].items():
            if key not in names:
                unknown.append(f"{sec}.{key}")
                continue
            setattr(block, key, _coerce(cls, f"{sec}.{key}", key, raw))
    if unknown and strict:
        raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
    validate(cfg)
    return cfg


def parse_config(path, strict=True):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read configuration {path}: {exc}") from exc
    return parse_config_text(text, path.parent, strict)


def validate(cfg: RunConfig):
    """Range checks with key paths; builds the kernel to apply its invariants."""
    p = cfg.problem
    if p.dim not in (1, 2):
        raise ConfigError(f"problem.dim must be 1 or 2, got {p.dim}")
    shape = cfg.shape
    if len(shape) not in (1, p.dim) or min(shape) < 1:
        raise ConfigError(f"problem.shape must list {p.dim} positive counts, got {p.shape!r}")
    lengths = cfg.grid_lengths()
    if len(lengths) != p.dim or min(lengths) <= 0:
        raise ConfigError(f"problem.lengths must list {p.dim} positive values")
    t = cfg.time
    if not t.T > 0:
        raise ConfigError(f"time.T must be positive, got {t.T}")
    if t.M < 2:
        raise ConfigError(f"time.M must be at least 2, got {t.M}")
    if t.grading < 1:
        raise ConfigError(f"time.grading must be >= 1, got {t.grading}")
    ft = cfg.final_time()
    if ft is not None and ft < t.T * (1 - 1e-14):
        raise ConfigError(f"time.final_time={ft} must not be smaller than time.T={t.T}")
    cfg.theta()
    c = cfg.contour
    if c.n_arc < 4:
        raise ConfigError(f"contour.n_arc must be at least 4, got {c.n_arc}")
    if c.n_ray.strip() != "auto":
        try:
            if int(c.n_ray) < 4:
                raise ValueError
        except ValueError as exc:
            raise ConfigError(f"contour.n_ray must be 'auto' or an integer >= 4") from exc
    if not 0 < c.tol < 1:
        raise ConfigError(f"contour.tol must lie in (0, 1), got {c.tol}")
    mode = c.delta_mode.strip()
    if mode != "auto" and not (mode.startswith("fixed:") and _num(mode[6:], "contour.delta_mode") > 0):
        raise ConfigError("contour.delta_mode must be 'auto' or 'fixed:VALUE' with VALUE > 0")
    bad = [ch for ch in cfg.checks() if ch not in KNOWN_CHECKS]
    if bad:
        raise ConfigError(f"verify.checks: unknown checks {bad}; choose from {KNOWN_CHECKS}")
    v = cfg.verify
    if v.weak_M0 < 4 or v.weak_doublings < 1:
        raise ConfigError("verify.weak_M0 must be >= 4 and verify.weak_doublings >= 1")
    if not v.corrupt > 0:
        raise ConfigError("verify.corrupt must be positive")
    try:
        cfg.probe_points()
    except ValueError as exc:
        raise ConfigError(f"verify.probe_p: {exc}") from exc
    if cfg.data.growth.strip() != "none":
        try:
            J = int(cfg.data.growth)
        except ValueError as exc:
            raise ConfigError("data.growth must be 'none' or a non-negative integer") from exc
        if J < 0:
            raise ConfigError("data.growth must be non-negative")
    n = int(np.prod(shape if len(shape) == p.dim else shape * p.dim))
    try:
        build_kernel(cfg, n, _dummy_coords(cfg))
    except ValidationError as exc:
        raise ConfigError(f"kernel: {exc}") from exc
    return cfg


def _dummy_coords(cfg):
    shape = cfg.shape if len(cfg.shape) == cfg.problem.dim else cfg.shape * cfg.problem.dim
    lengths = cfg.grid_lengths()
    return tuple(L / (n + 1) * np.arange(1, n + 1) for L, n in zip(lengths, shape))


def read_node_csv(path, n):
    """Node-indexed values: one value per row, or ``index,value`` rows."""
    vals = {}
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    try:
        if all(len(r) == 1 for r in rows):
            out = np.array([float(r[0]) for r in rows])
        else:
            for r in rows:
                vals[int(r[0])] = float(r[1])
            out = np.array([vals[i] for i in range(n)])
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"{path}: cannot read node values ({exc})") from exc
    if out.size != n:
        raise ConfigError(f"{path}: {out.size} values for {n} nodes")
    return out


def field_values(desc, coords, base_dir, key):
    """Evaluate a coefficient descriptor on the interior nodes (flat, C order)."""
    desc = str(desc).strip()
    shape = tuple(c.size for c in coords)
    n = int(np.prod(shape))
    kind, _, arg = desc.partition(":")
    if kind == "constant":
        return np.full(n, _num(arg, key))
    if kind == "step":
        parts = _float_list(arg, key)
        if len(parts) != 3:
            raise ConfigError(f"{key}: step needs VALUE1,VALUE2,BREAKPOINT")
        mesh = np.meshgrid(*coords, indexing="ij")[0].ravel()
        return np.where(mesh < parts[2], parts[0], parts[1])
    if kind == "csv":
        path = Path(arg)
        if not path.is_absolute():
            path = Path(base_dir) / path
        if not path.exists():
            raise ConfigError(f"{key}: file {path} does not exist")
        return read_node_csv(path, n)
    raise ConfigError(f"{key}: unknown field descriptor {desc!r}")


def build_kernel(cfg: RunConfig, n, coords):
    k = cfg.kernel
    variant = k.variant.strip().lower()
    if variant == "variable":
        return VariableOrder(field_values(k.alpha, coords, cfg.base_dir, "kernel.alpha"))
    if variant == "distributed":
        mu = k.mu.strip()
        if mu in ("uniform", "bump"):
            return DistributedOrder.builtin(mu, k.n_quad)
        if mu.startswith("csv:"):
            return _mu_from_csv(cfg, mu[4:], k)
        raise ConfigError(f"kernel.mu must be 'uniform', 'bump' or 'csv:PATH', got {mu!r}")
    if variant == "multiterm":
        alphas = _float_list(k.alphas, "kernel.alphas")
        descs = [d for d in k.weights.split(";") if d.strip()]
        if len(descs) != len(alphas):
            raise ConfigError("kernel.weights needs one field per exponent (';'-separated)")
        rhos = [field_values(d, coords, cfg.base_dir, "kernel.weights") for d in descs]
        return MultiTerm(tuple(alphas), tuple(rhos))
    raise ConfigError(f"kernel.variant must be variable, distributed or multiterm, got {k.variant!r}")


def _mu_from_csv(cfg, rel, k):
    path = Path(rel)
    if not path.is_absolute():
        path = cfg.base_dir / path
    if not path.exists():
        raise ConfigError(f"kernel.mu: file {path} does not exist")
    data = np.loadtxt(path, delimiter=",", ndmin=2)
    a, m = data[:, 0], data[:, 1]
    order = np.argsort(a)
    a, m = a[order], m[order]
    return DistributedOrder.from_function(lambda x: np.interp(x, a, m), k.alpha0, k.eps,
                                          k.n_quad, f"csv:{rel}")
