"""Hua-Pickrell and inverse-Wishart beta-ensembles.

Densities are unnormalized and evaluated on sorted or unsorted coordinate
vectors (the last axis holds the ``N`` points). Samplers:

* ``ensemble_mcmc_sample``: many independent Metropolis chains advanced in
  lock-step, single-site updates. Hua-Pickrell chains move in ``u = arctan x``
  on the circle ``R / pi Z`` with wrapped Cauchy steps plus a global rotation
  move; inverse-Wishart chains move in ``log x`` with Gaussian steps.
* ``laguerre_tridiag_oracle``: exact bidiagonal beta-Laguerre sampler. The
  inverse-Wishart law is its image under ``y -> 1/y``.
"""
from __future__ import annotations

import warnings
from dataclasses import asdict, dataclass, field, replace
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy import stats as sps

from .errors import ChainQualityWarning, InsufficientData, InvalidInput, InvalidParameter
from .kernels import WeylPoint, dixon_anderson_sample_batch
from .stats import TestReport, energy_two_sample, ks_one_sample, ks_two_sample

__all__ = [
    "HUA_PICKRELL",
    "INVERSE_WISHART",
    "EnsembleSpec",
    "ChainConfig",
    "EnsembleSample",
    "hp_log_density_unnorm",
    "iw_log_density_unnorm",
    "laguerre_log_density",
    "ensemble_mcmc_sample",
    "laguerre_tridiag_oracle",
    "ensemble_sample",
    "ConsistencyReport",
    "consistency_check",
    "StudyRow",
    "boundary_convergence_study",
]

HUA_PICKRELL = "HuaPickrell"
INVERSE_WISHART = "InverseWishart"


@dataclass(frozen=True)
class EnsembleSpec:
    """Ensemble family, ``theta`` and level ``N``.

    ``s`` is used by Hua-Pickrell, ``tau`` by inverse-Wishart. Besides the
    stated domains (``Re s > -1/2``, ``tau > -1``) integrability of the
    one-point marginal is enforced: ``Re s + theta > 1/2`` for Hua-Pickrell and
    ``tau + 2 theta - 2 > -1`` for inverse-Wishart.
    """

    kind: str
    theta: float
    N: int
    s: complex = 0.0
    tau: float = 0.0

    def __post_init__(self):
        if self.kind not in (HUA_PICKRELL, INVERSE_WISHART):
            raise InvalidParameter(f"unknown ensemble kind {self.kind!r}")
        th = float(self.theta)
        if not (np.isfinite(th) and th > 0):
            raise InvalidParameter("theta must be finite and positive")
        object.__setattr__(self, "theta", th)
        if int(self.N) != self.N or self.N < 1:
            raise InvalidParameter("N must be a positive integer")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "s", complex(self.s))
        object.__setattr__(self, "tau", float(self.tau))
        if self.kind == HUA_PICKRELL:
            if not self.s.real > -0.5:
                raise InvalidParameter("Hua-Pickrell needs Re s > -1/2")
            if not self.s.real + th > 0.5:
                raise InvalidParameter("Hua-Pickrell needs Re s + theta > 1/2 to be normalizable")
        else:
            if not self.tau > -1:
                raise InvalidParameter("inverse-Wishart needs tau > -1")
            if not self.laguerre_exponent > -1:
                raise InvalidParameter("inverse-Wishart needs tau + 2 theta - 2 > -1 to be normalizable")

    @property
    def laguerre_exponent(self) -> float:
        """Exponent ``tau + 2 theta - 2`` of the ``1/x`` image."""
        return self.tau + 2.0 * self.theta - 2.0

    def at_level(self, N: int) -> "EnsembleSpec":
        return replace(self, N=int(N))

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "theta": self.theta, "N": self.N}
        if self.kind == HUA_PICKRELL:
            d["s"] = [self.s.real, self.s.imag]
        else:
            d["tau"] = self.tau
        return d


def _coords(spec: EnsembleSpec, x) -> np.ndarray:
    x = np.asarray(x.points if isinstance(x, WeylPoint) else x, dtype=float)
    if x.shape[-1] != spec.N:
        raise InvalidInput(f"expected {spec.N} coordinates, got {x.shape[-1]}")
    return x


def _log_vandermonde(x: np.ndarray) -> np.ndarray:
    N = x.shape[-1]
    iu = np.triu_indices(N, 1)
    with np.errstate(divide="ignore"):
        return np.sum(np.log(np.abs(x[..., iu[0]] - x[..., iu[1]])), axis=-1)


def hp_log_density_unnorm(spec: EnsembleSpec, x) -> np.ndarray:
    """Hua-Pickrell log-density up to its normalizer.

    Uses ``log(1 + i x) = log(1 + x^2)/2 + i arctan x``; with ``c = s + N theta``
    the one-point factor is ``-Re(c) log(1 + x^2) + 2 Im(c) arctan x``.
    """
    if spec.kind != HUA_PICKRELL:
        raise InvalidInput("spec is not Hua-Pickrell")
    x = _coords(spec, x)
    c = spec.s + spec.N * spec.theta
    one = -c.real * np.log1p(x**2) + 2.0 * c.imag * np.arctan(x)
    return np.sum(one, axis=-1) + 2.0 * spec.theta * _log_vandermonde(x)


def _hp_log_density_complex(spec: EnsembleSpec, x) -> np.ndarray:
    """Direct complex evaluation, used to cross-check the real form."""
    x = _coords(spec, x)
    c = spec.s + spec.N * spec.theta
    one = -c * np.log(1.0 + 1j * x) - np.conj(c) * np.log(1.0 - 1j * x)
    return np.sum(one, axis=-1) + 2.0 * spec.theta * _log_vandermonde(x)


def iw_log_density_unnorm(spec: EnsembleSpec, x) -> np.ndarray:
    """Inverse-Wishart log-density up to its normalizer; ``-inf`` off ``(0, inf)^N``."""
    if spec.kind != INVERSE_WISHART:
        raise InvalidInput("spec is not inverse-Wishart")
    x = _coords(spec, x)
    pos = np.all(x > 0, axis=-1)
    xs = np.where(x > 0, x, 1.0)
    one = -(spec.tau + 2.0 * spec.theta * spec.N) * np.log(xs) - 2.0 / xs
    out = np.sum(one, axis=-1) + 2.0 * spec.theta * _log_vandermonde(xs)
    return np.where(pos, out, -np.inf)


def laguerre_log_density(theta: float, a: float, rate: float, y) -> np.ndarray:
    """``sum(a log y - rate y) + 2 theta sum_{i<j} log|y_i - y_j|`` on ``(0, inf)^N``."""
    y = np.asarray(y, dtype=float)
    pos = np.all(y > 0, axis=-1)
    ys = np.where(y > 0, y, 1.0)
    out = np.sum(a * np.log(ys) - rate * ys, axis=-1) + 2.0 * theta * _log_vandermonde(ys)
    return np.where(pos, out, -np.inf)


@dataclass(frozen=True)
class ChainConfig:
    """Metropolis settings; sweeps update every coordinate once.

    Each of the ``chains`` independent chains runs ``burn_in`` sweeps and then
    ``steps`` more, keeping every ``thin``-th state (at least the final one).
    ``proposal_scale=None`` uses an automatically tuned scale: it is adapted
    during burn-in towards acceptance ``target_acceptance`` and frozen after.
    """

    steps: int = 10_000
    burn_in: int = 10_000
    thin: int = 10
    proposal_scale: Optional[float] = None
    chains: int = 1
    target_acceptance: float = 0.3

    def __post_init__(self):
        if self.steps < 0 or self.burn_in < 0 or self.thin < 1 or self.chains < 1:
            raise InvalidParameter("steps, burn_in >= 0 and thin, chains >= 1 required")
        if self.proposal_scale is not None and not self.proposal_scale > 0:
            raise InvalidParameter("proposal_scale must be positive")

    @property
    def kept_per_chain(self) -> int:
        return max(1, self.steps // self.thin)

    @classmethod
    def parallel(cls, n: int, burn_in: int = 400) -> "ChainConfig":
        """``n`` independent chains, one retained state each."""
        return cls(steps=1, burn_in=burn_in, thin=1, chains=int(n))


@dataclass
class EnsembleSample:
    """Sorted rows ``(n, N)`` with chain diagnostics."""

    spec: EnsembleSpec
    points: np.ndarray
    diagnostics: Dict[str, float] = field(default_factory=dict)

    def weyl_points(self) -> List[WeylPoint]:
        return [WeylPoint(r) for r in self.points]


class _HPTarget:
    """Hua-Pickrell in ``u = arctan x``, periodic with period ``pi``.

    The Jacobian ``sec^2 u`` combines with the one-point factor and the
    ``cos`` denominators of ``x_i - x_j = sin(u_i - u_j)/(cos u_i cos u_j)``
    into ``(2 Re s + 2 theta - 2) log cos u + 2 Im s u``.
    """

    periodic = True

    def __init__(self, spec: EnsembleSpec):
        self.e = 2.0 * spec.s.real + 2.0 * spec.theta - 2.0
        self.g = 2.0 * spec.s.imag
        self.theta = spec.theta

    @staticmethod
    def wrap(u):
        return (u + 0.5 * np.pi) % np.pi - 0.5 * np.pi

    def one(self, u):
        with np.errstate(divide="ignore"):
            return self.e * np.log(np.cos(u)) + self.g * u

    def pair(self, uk, others):
        with np.errstate(divide="ignore"):
            return 2.0 * self.theta * np.sum(np.log(np.abs(np.sin(uk[:, None] - others))), axis=1)

    def to_x(self, u):
        return np.tan(u)

    def init(self, chains: int, N: int, rng):
        off = rng.uniform(-0.5, 0.5, (chains, 1)) * np.pi / N
        base = -0.5 * np.pi + (np.arange(N) + 0.5) * np.pi / N
        return self.wrap(base[None, :] + off + rng.uniform(-0.25, 0.25, (chains, N)) * np.pi / N)

    def step(self, scale, shape, rng):
        return scale * rng.standard_cauchy(shape)


class _IWTarget:
    """Inverse-Wishart in ``v = log x`` (Jacobian ``e^v``)."""

    periodic = False

    def __init__(self, spec: EnsembleSpec):
        self.c = spec.tau + 2.0 * spec.theta * spec.N - 1.0
        self.theta = spec.theta
        # mode of the one-point factor, used for initialization
        self.v0 = np.log(2.0 / max(self.c - 2.0 * spec.theta * (spec.N - 1), 0.5))

    @staticmethod
    def wrap(v):
        return v

    def one(self, v):
        return -self.c * v - 2.0 * np.exp(-v)

    def pair(self, vk, others):
        with np.errstate(divide="ignore"):
            d = np.abs(np.exp(vk[:, None]) - np.exp(others))
            return 2.0 * self.theta * np.sum(np.log(d), axis=1)

    def to_x(self, v):
        return np.exp(v)

    def init(self, chains: int, N: int, rng):
        base = self.v0 + np.linspace(-1.0, 1.0, N) if N > 1 else np.array([self.v0])
        return base[None, :] + 0.1 * rng.standard_normal((chains, N))

    def step(self, scale, shape, rng):
        return scale * rng.standard_normal(shape)


def _ess(trace: np.ndarray) -> float:
    """Effective sample size of a ``(chains, T)`` scalar trace.

    Initial-positive-sequence estimate on the chain-averaged autocorrelation;
    chains with a single kept state count as independent draws.
    """
    C, T = trace.shape
    if T < 4:
        return float(C * T)
    x = trace - trace.mean(axis=1, keepdims=True)
    var = np.mean(x**2)
    if var == 0:
        return float(C * T)
    f = np.fft.rfft(x, n=2 * T, axis=1)
    ac = np.fft.irfft(f * np.conj(f), axis=1)[:, :T].mean(axis=0) / (T * var)
    tau = 1.0
    for k in range(1, T - 1, 2):
        pair = ac[k] + ac[k + 1]
        if pair <= 0:
            break
        tau += 2.0 * pair
    return float(C * T / tau)


def ensemble_mcmc_sample(spec: EnsembleSpec, chain_cfg: Optional[ChainConfig], rng: np.random.Generator) -> EnsembleSample:
    """Random-walk Metropolis draws from ``spec``; deterministic given ``rng``.

    Emits :class:`ChainQualityWarning` when the post-burn-in acceptance rate
    leaves ``[0.05, 0.95]``.
    """
    cfg = chain_cfg or ChainConfig()
    if rng is None:
        raise InvalidInput("ensemble_mcmc_sample needs an rng")
    target = _HPTarget(spec) if spec.kind == HUA_PICKRELL else _IWTarget(spec)
    C, N = cfg.chains, spec.N
    state = target.init(C, N, rng)
    one = target.one(state)
    scale = cfg.proposal_scale if cfg.proposal_scale is not None else (0.5 / N if target.periodic else 0.5 / np.sqrt(N))
    adaptive = cfg.proposal_scale is None
    rot_scale = 0.5 / np.sqrt(N) if target.periodic else 0.0
    cols = np.arange(N)

    def sweep(s):
        nonlocal state
        acc = 0
        for k in range(N):
            others = state[:, cols != k]
            prop = target.wrap(state[:, k] + target.step(s, C, rng))
            one_new = target.one(prop)
            d = one_new - one[:, k]
            if N > 1:
                d += target.pair(prop, others) - target.pair(state[:, k], others)
            ok = np.log(rng.random(C)) < d
            state[ok, k] = prop[ok]
            one[ok, k] = one_new[ok]
            acc += int(np.sum(ok))
        if target.periodic:
            # rotation leaves the pair terms unchanged
            prop = target.wrap(state + rng.normal(0.0, rot_scale, (C, 1)))
            one_new = target.one(prop)
            ok = np.log(rng.random(C)) < one_new.sum(axis=1) - one.sum(axis=1)
            state[ok] = prop[ok]
            one[ok] = one_new[ok]
        return acc / (C * N)

    window, acc_w = 0, 0.0
    for it in range(cfg.burn_in):
        acc_w += sweep(scale)
        window += 1
        if adaptive and window == 25:
            rate = acc_w / window
            scale *= float(np.exp(np.clip(rate - cfg.target_acceptance, -0.5, 0.5) * 2.0))
            if target.periodic:
                scale = min(scale, np.pi)
            window, acc_w = 0, 0.0

    K = cfg.kept_per_chain
    total = K * cfg.thin
    kept = np.empty((C, K, N))
    acc_sum = 0.0
    j = 0
    for it in range(1, total + 1):
        acc_sum += sweep(scale)
        if it % cfg.thin == 0:
            kept[:, j] = state
            j += 1
    acceptance = acc_sum / total
    x = target.to_x(kept)
    trace = np.sum(np.arctan(x) if target.periodic else np.log(x), axis=2)
    diag = {
        "acceptance_rate": float(acceptance),
        "ess_estimate": _ess(trace),
        "proposal_scale": float(scale),
        "chains": C,
        "kept_per_chain": K,
    }
    if not 0.05 <= acceptance <= 0.95:
        warnings.warn(f"acceptance rate {acceptance:.3f} outside [0.05, 0.95]", ChainQualityWarning)
        diag["chain_quality_warning"] = 1.0
    pts = -np.sort(-x.reshape(C * K, N), axis=1)
    return EnsembleSample(spec, pts, diag)


def _chi(df, rng, size):
    return np.sqrt(2.0 * rng.standard_gamma(0.5 * df, size))


def laguerre_tridiag_oracle(theta: float, N: int, shape_exponent: float, rate: float, rng: np.random.Generator, size=None) -> np.ndarray:
    """Exact draws from ``prod y^a e^{-rate y} prod |y_i - y_j|^{2 theta}``.

    Bidiagonal beta-Laguerre model with ``beta = 2 theta``: the squared singular
    values of ``B`` with diagonal ``chi_{2a' - beta k}`` (``k = 0..N-1``) and
    subdiagonal ``chi_{beta (N-1)}, ..., chi_beta`` have weight
    ``lambda^{a' - 1 - beta (N-1)/2} e^{-lambda/2}``; the output is
    ``lambda / (2 rate)``. Returns ``(N,)`` rows or ``(size, N)``, sorted
    nonincreasing.
    """
    theta, a, rate, N = float(theta), float(shape_exponent), float(rate), int(N)
    if not theta > 0 or not rate > 0 or not a > -1 or N < 1:
        raise InvalidParameter("need theta > 0, rate > 0, a > -1, N >= 1")
    if rng is None:
        raise InvalidInput("laguerre_tridiag_oracle needs an rng")
    beta = 2.0 * theta
    n = 1 if size is None else int(size)
    ap = a + 1.0 + 0.5 * beta * (N - 1)
    diag_df = 2.0 * ap - beta * np.arange(N)
    B = np.zeros((n, N, N))
    idx = np.arange(N)
    B[:, idx, idx] = _chi(diag_df[None, :], rng, (n, N))
    if N > 1:
        sub_df = beta * np.arange(N - 1, 0, -1)
        B[:, idx[1:], idx[:-1]] = _chi(sub_df[None, :], rng, (n, N - 1))
    sv = np.linalg.svd(B, compute_uv=False)
    y = -np.sort(-(sv**2) / (2.0 * rate), axis=1)
    return y[0] if size is None else y


def ensemble_sample(spec: EnsembleSpec, n: int, rng: np.random.Generator, sampler: str = "auto", chain_cfg: Optional[ChainConfig] = None) -> EnsembleSample:
    """``n`` sorted rows of ``spec``.

    ``sampler="auto"`` takes the exact oracle for inverse-Wishart and parallel
    Metropolis chains for Hua-Pickrell.
    """
    if sampler == "auto":
        sampler = "oracle" if spec.kind == INVERSE_WISHART else "mcmc"
    if sampler == "oracle":
        if spec.kind != INVERSE_WISHART:
            raise InvalidInput("the oracle sampler covers inverse-Wishart only")
        y = laguerre_tridiag_oracle(spec.theta, spec.N, spec.laguerre_exponent, 2.0, rng, size=n)
        return EnsembleSample(spec, (1.0 / y)[:, ::-1].copy(), {"sampler": "oracle"})
    if sampler == "mcmc":
        cfg = chain_cfg or ChainConfig.parallel(n)
        out = ensemble_mcmc_sample(spec, cfg, rng)
        out.points = out.points[: int(n)]
        return out
    raise InvalidInput(f"unknown sampler {sampler!r}")


def _transform(spec: EnsembleSpec, pts: np.ndarray) -> np.ndarray:
    # map to a compact or log scale so the energy test is not driven by tails
    return np.arctan(pts) if spec.kind == HUA_PICKRELL else np.log(pts)


@dataclass
class ConsistencyReport:
    """Tests of ``mu_{N+1} Lambda = mu_N`` for one ensemble spec."""

    spec: EnsembleSpec
    kernel_theta: float
    energy: TestReport
    ks_max: TestReport
    ks_min: Optional[TestReport]
    level: float

    @property
    def tests(self) -> List[TestReport]:
        return [t for t in (self.energy, self.ks_max, self.ks_min) if t is not None]

    @property
    def min_p_value(self) -> float:
        return min(t.p_value for t in self.tests)

    @property
    def passed(self) -> bool:
        """No test rejects at ``level``."""
        return all(not t.rejects(self.level) for t in self.tests)

    def to_dict(self) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "kernel_theta": self.kernel_theta,
            "energy": self.energy.to_dict(),
            "ks_max": self.ks_max.to_dict(),
            "ks_min": None if self.ks_min is None else self.ks_min.to_dict(),
            "level": self.level,
            "passed": self.passed,
        }


def consistency_check(spec: EnsembleSpec, rng: np.random.Generator, test_cfg: Optional[dict] = None) -> ConsistencyReport:
    """Push level ``N+1`` draws through the kernel and compare with level ``N``.

    ``spec`` is the level ``N+1`` ensemble. ``test_cfg`` keys: ``n`` (draws
    per side, default 10000), ``permutations`` (999), ``level`` (0.001),
    ``sampler`` (see :func:`ensemble_sample`), ``burn_in`` (400),
    ``kernel_theta`` (defaults to ``spec.theta``; a different value gives the
    negative control) and ``max_points`` (2000, energy-test subsample).
    """
    cfg = {"n": 10_000, "permutations": 999, "level": 0.001, "sampler": "auto", "burn_in": 400, "kernel_theta": None, "max_points": 2000}
    cfg.update(test_cfg or {})
    if spec.N < 2:
        raise InvalidInput("spec must be at level N+1 >= 2")
    n = int(cfg["n"])
    kth = spec.theta if cfg["kernel_theta"] is None else float(cfg["kernel_theta"])
    chain = ChainConfig.parallel(n, int(cfg["burn_in"]))
    upper = ensemble_sample(spec, n, rng, cfg["sampler"], chain).points
    pushed = dixon_anderson_sample_batch(upper, kth, rng)
    lower_spec = spec.at_level(spec.N - 1)
    direct = ensemble_sample(lower_spec, n, rng, cfg["sampler"], chain).points
    tp, td = _transform(spec, pushed), _transform(spec, direct)
    energy = energy_two_sample(tp, td, int(cfg["permutations"]), rng, max_points=cfg["max_points"])
    ks_max = ks_two_sample(tp[:, 0], td[:, 0])
    ks_min = ks_two_sample(tp[:, -1], td[:, -1]) if lower_spec.N > 1 else None
    return ConsistencyReport(spec, kth, energy, ks_max, ks_min, float(cfg["level"]))


@dataclass(frozen=True)
class StudyRow:
    N: int
    statistic: float
    error: float

    def to_dict(self) -> dict:
        return asdict(self)


def _ks_band(n1: int, n2: Optional[int] = None) -> float:
    """95% critical value of the KS distance, used as the error column."""
    m = n1 if n2 is None else n1 * n2 / (n1 + n2)
    return float(np.sqrt(-0.5 * np.log(0.025) / m))


def boundary_convergence_study(
    spec: EnsembleSpec,
    levels: Sequence[int],
    observable: str,
    n: int,
    rng: np.random.Generator,
    burn_in: int = 400,
) -> List[StudyRow]:
    """Distributional stability of rescaled extreme points along ``levels``.

    ``observable``:

    * ``"top_k_rescaled"`` (Hua-Pickrell): law of ``x_1 / N``; the row for the
      ``k``-th level holds the KS distance to the previous level (the first
      row compares two independent runs at the first level, a calibration).
    * ``"hard_edge"`` (inverse-Wishart): ``2 N min(1/x)``, KS distance to
      ``Exp(1)`` at each level.
    * ``"ov_stats"``: ``alpha_1^+`` estimates, mean and standard deviation
      over the draws at each level.
    """
    levels = [int(N) for N in levels]
    if len(levels) < 3 or any(b <= a for a, b in zip(levels, levels[1:])):
        raise InsufficientData("need an increasing schedule of at least 3 levels")
    rows: List[StudyRow] = []

    def draw(N):
        return ensemble_sample(spec.at_level(N), n, rng, chain_cfg=ChainConfig.parallel(n, burn_in)).points

    if observable == "top_k_rescaled":
        prev = draw(levels[0])[:, 0] / levels[0]
        calib = draw(levels[0])[:, 0] / levels[0]
        rows.append(StudyRow(levels[0], ks_two_sample(prev, calib).statistic, _ks_band(n, n)))
        for N in levels[1:]:
            cur = draw(N)[:, 0] / N
            rows.append(StudyRow(N, ks_two_sample(prev, cur).statistic, _ks_band(n, n)))
            prev = cur
        return rows
    if observable == "hard_edge":
        if spec.kind != INVERSE_WISHART:
            raise InvalidInput("hard_edge needs an inverse-Wishart spec")
        for N in levels:
            y = laguerre_tridiag_oracle(spec.theta, N, spec.laguerre_exponent, 2.0, rng, size=n)
            t = 2.0 * N * y[:, -1]
            rows.append(StudyRow(N, ks_one_sample(t, sps.expon.cdf).statistic, _ks_band(n)))
        return rows
    if observable == "ov_stats":
        for N in levels:
            a1 = draw(N)[:, 0] / N
            rows.append(StudyRow(N, float(np.mean(a1)), float(np.std(a1) / np.sqrt(a1.size))))
        return rows
    raise InvalidInput(f"unknown observable {observable!r}")
