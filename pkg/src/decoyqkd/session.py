"""End-to-end session simulation, loss sweeps and intensity optimization.

Ties the source, channel, estimator and key-rate pieces together:

* analytic per-intensity expectations for a configured session;
* stochastic count sampling (binomial detections/errors, seeded and
  reproducible independently of evaluation order);
* the full analysis pipeline from observation to secure bits, with all
  intermediate quantities echoed for audit;
* loss sweeps comparing source/estimator schemes on a common channel;
* golden-section optimization of the coherent-state signal intensity in
  the infinite-decoy limit.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .channel import ChannelParams, gain, loss_db_to_eta, qber, yield_n, error_n
from .decoy import (
    BoundsResult,
    FluctuationPolicy,
    ObservableBounds,
    ThreeIntensityObservation,
    check_condition,
    estimate_bounds,
    fluctuation_bounds,
    infinite_decoy_exact,
    no_decoy_bounds,
)
from .errors import InvalidParameterError
from .keyrate import KeyRateResult, ProtocolParams, binary_entropy, key_rate
from .sources import (
    HspsParams,
    HspsSource,
    N_MAX_DEFAULT,
    SourceModel,
    ideal_sps_distribution,
    wcs_distribution,
)

# conventional signal intensity for a coherent-state link run without
# decoy states (attenuation to ~0.1 photons/pulse keeps the multiphoton
# fraction tolerable)
WCS_NO_DECOY_MU_DEFAULT = 0.1


@dataclass(frozen=True)
class ExperimentConfig:
    """Complete description of one three-intensity session.

    ``intensity_ratio`` gives the relative share of gates spent at the
    signal, decoy and vacuum settings; ``vacuum_mu`` is the residual
    mean photon number of the vacuum setting (a leaky optical switch
    never produces true vacuum). ``rng_seed`` fixes the stochastic
    sampling completely.
    """

    source_signal: SourceModel
    source_decoy: SourceModel
    vacuum_mu: float
    channel: ChannelParams
    protocol: ProtocolParams
    total_pulses: int
    intensity_ratio: tuple[float, float, float] = (10.0, 4.0, 1.0)
    fluctuation: FluctuationPolicy = FluctuationPolicy(0.0)
    rng_seed: int = 0
    n_max: int = N_MAX_DEFAULT

    def __post_init__(self) -> None:
        if not self.vacuum_mu >= 0.0:
            raise InvalidParameterError(
                f"vacuum_mu={self.vacuum_mu!r} must be >= 0"
            )
        if self.total_pulses < 1:
            raise InvalidParameterError(
                f"total_pulses={self.total_pulses!r} must be >= 1"
            )
        if len(self.intensity_ratio) != 3 or any(
            not w > 0.0 for w in self.intensity_ratio
        ):
            raise InvalidParameterError(
                f"intensity_ratio={self.intensity_ratio!r} needs three "
                "positive weights"
            )
        if self.rng_seed < 0:
            raise InvalidParameterError(
                f"rng_seed={self.rng_seed!r} must be >= 0"
            )
        if self.n_max < 2:
            raise InvalidParameterError(f"n_max={self.n_max!r} must be >= 2")

    def pulse_split(self) -> tuple[int, int, int]:
        """Gate counts per intensity; the signal share absorbs rounding."""
        total_weight = math.fsum(self.intensity_ratio)
        n_decoy = int(round(self.total_pulses * self.intensity_ratio[1] / total_weight))
        n_vacuum = int(round(self.total_pulses * self.intensity_ratio[2] / total_weight))
        n_signal = self.total_pulses - n_decoy - n_vacuum
        if min(n_signal, n_decoy, n_vacuum) < 1:
            raise InvalidParameterError(
                "total_pulses too small for the intensity ratio: "
                f"split came out as {(n_signal, n_decoy, n_vacuum)}"
            )
        return n_signal, n_decoy, n_vacuum


@dataclass(frozen=True)
class IntensityStatistics:
    """Analytic per-gate gain and QBER at the three intensity settings."""

    q_signal: float
    e_signal: float
    q_decoy: float
    e_decoy: float
    q_vacuum: float
    e_vacuum: float


@dataclass(frozen=True)
class IntensityCounts:
    """Raw counts accumulated at one intensity setting."""

    gates: int
    detections: int
    errors: int

    def __post_init__(self) -> None:
        if not 0 <= self.errors <= self.detections <= self.gates:
            raise InvalidParameterError(
                f"need errors <= detections <= gates, got {self!r}"
            )

    @property
    def q(self) -> float:
        return self.detections / self.gates if self.gates else 0.0

    @property
    def e(self) -> float:
        return self.errors / self.detections if self.detections else 0.0


@dataclass(frozen=True)
class SimulatedCounts:
    signal: IntensityCounts
    decoy: IntensityCounts
    vacuum: IntensityCounts


@dataclass(frozen=True)
class PipelineResult:
    """Everything the analysis produced, for reporting and audit."""

    mode: str
    observation: ThreeIntensityObservation
    expected: IntensityStatistics
    counts: SimulatedCounts | None
    condition_ok: bool
    observable_bounds: ObservableBounds
    bounds: BoundsResult
    key: KeyRateResult
    y1_true: float
    e1_true: float


def expected_statistics(cfg: ExperimentConfig) -> IntensityStatistics:
    """Analytic (Q, E) at the signal, decoy and vacuum settings.

    The vacuum setting is modelled as a weak coherent state of mean
    ``vacuum_mu`` through the same channel; at zero gain its error
    ratio defaults to the background value.
    """
    ch = cfg.channel
    sig = qber(cfg.source_signal.distribution(cfg.n_max), ch)
    dec = qber(cfg.source_decoy.distribution(cfg.n_max), ch)
    vac_dist = wcs_distribution(cfg.vacuum_mu, cfg.n_max)
    q_vac = gain(vac_dist, ch)
    e_vac = qber(vac_dist, ch).qber if q_vac > 0.0 else ch.e0
    return IntensityStatistics(
        q_signal=sig.q_gain,
        e_signal=sig.qber,
        q_decoy=dec.q_gain,
        e_decoy=dec.qber,
        q_vacuum=q_vac,
        e_vacuum=e_vac,
    )


def sample_counts(cfg: ExperimentConfig) -> SimulatedCounts:
    """Draw one stochastic realization of the session counts.

    Gates are split by ``intensity_ratio``; detections are binomial in
    the analytic gain and errors binomial in the analytic QBER. Each
    intensity uses a generator derived from (seed, intensity index), so
    results are reproducible and independent of evaluation order.
    """
    stats = expected_statistics(cfg)
    split = cfg.pulse_split()
    per_intensity = (
        (stats.q_signal, stats.e_signal),
        (stats.q_decoy, stats.e_decoy),
        (stats.q_vacuum, stats.e_vacuum),
    )
    drawn = []
    for index, (gates, (q, e)) in enumerate(zip(split, per_intensity)):
        rng = np.random.default_rng([cfg.rng_seed, index])
        detections = int(rng.binomial(gates, q))
        errors = int(rng.binomial(detections, e))
        drawn.append(
            IntensityCounts(gates=gates, detections=detections, errors=errors)
        )
    return SimulatedCounts(signal=drawn[0], decoy=drawn[1], vacuum=drawn[2])


def observation_from_expected(
    cfg: ExperimentConfig, stats: IntensityStatistics | None = None
) -> ThreeIntensityObservation:
    if stats is None:
        stats = expected_statistics(cfg)
    n_signal, n_decoy, n_vacuum = cfg.pulse_split()
    return ThreeIntensityObservation(
        q_signal=stats.q_signal,
        q_decoy=stats.q_decoy,
        e_signal=stats.e_signal,
        e_decoy=stats.e_decoy,
        y0_obs=stats.q_vacuum,
        n_signal=n_signal,
        n_decoy=n_decoy,
        n_vacuum=n_vacuum,
    )


def observation_from_counts(counts: SimulatedCounts) -> ThreeIntensityObservation:
    return ThreeIntensityObservation(
        q_signal=counts.signal.q,
        q_decoy=counts.decoy.q,
        e_signal=counts.signal.e,
        e_decoy=counts.decoy.e,
        y0_obs=counts.vacuum.q,
        n_signal=counts.signal.gates,
        n_decoy=counts.decoy.gates,
        n_vacuum=counts.vacuum.gates,
    )


def run_pipeline(
    cfg: ExperimentConfig, counts: SimulatedCounts | None = None
) -> PipelineResult:
    """Run the full three-intensity analysis on one session.

    With ``counts`` the observation comes from the sampled statistics
    (mode 'sampled'); otherwise the analytic expectations are analyzed
    directly (mode 'analytic'). Estimator flags propagate into the
    result rather than aborting: a degenerate bound simply yields zero
    key.
    """
    expected = expected_statistics(cfg)
    if counts is None:
        obs = observation_from_expected(cfg, expected)
        mode = "analytic"
    else:
        obs = observation_from_counts(counts)
        mode = "sampled"

    dist_signal = cfg.source_signal.distribution(cfg.n_max)
    dist_decoy = cfg.source_decoy.distribution(cfg.n_max)
    condition_ok = check_condition(dist_signal, dist_decoy)
    bounds = estimate_bounds(
        obs, dist_signal, dist_decoy, cfg.fluctuation, e0=cfg.channel.e0
    )
    key = key_rate(
        obs.q_signal, obs.e_signal, bounds, cfg.protocol, n_signal=obs.n_signal
    )
    return PipelineResult(
        mode=mode,
        observation=obs,
        expected=expected,
        counts=counts,
        condition_ok=condition_ok,
        observable_bounds=fluctuation_bounds(obs, cfg.fluctuation),
        bounds=bounds,
        key=key,
        y1_true=yield_n(cfg.channel, 1),
        e1_true=error_n(cfg.channel, 1),
    )


class SchemeKind(enum.Enum):
    WCS_NO_DECOY = "wcs-no-decoy"
    HSPS_NO_DECOY = "hsps-no-decoy"
    WCS_DECOY_INF_OPT = "wcs-decoy-opt"
    HSPS_DECOY = "hsps-decoy"
    IDEAL_SPS = "ideal-sps"


@dataclass(frozen=True)
class Scheme:
    """A source/estimator combination for the loss-sweep comparison.

    HSPS_DECOY carries the heralding correlation it should assume at
    both intensities; WCS_NO_DECOY optionally overrides its fixed
    signal intensity.
    """

    kind: SchemeKind
    p_cor: float | None = None
    wcs_mu: float | None = None

    def __post_init__(self) -> None:
        if self.kind is SchemeKind.HSPS_DECOY:
            if self.p_cor is None or not 0.0 <= self.p_cor <= 1.0:
                raise InvalidParameterError(
                    f"hsps-decoy scheme needs p_cor in [0, 1], got {self.p_cor!r}"
                )
        elif self.p_cor is not None:
            raise InvalidParameterError(
                f"p_cor only applies to hsps-decoy, not {self.kind.value}"
            )
        if self.wcs_mu is not None:
            if self.kind is not SchemeKind.WCS_NO_DECOY:
                raise InvalidParameterError(
                    f"wcs_mu only applies to wcs-no-decoy, not {self.kind.value}"
                )
            if not self.wcs_mu > 0.0:
                raise InvalidParameterError(
                    f"wcs_mu={self.wcs_mu!r} must be > 0"
                )

    @property
    def label(self) -> str:
        if self.kind is SchemeKind.HSPS_DECOY:
            return f"hsps-decoy-{self.p_cor:.2f}"
        return self.kind.value

    @staticmethod
    def parse(token: str) -> "Scheme":
        """Parse a scheme token such as 'ideal-sps' or 'hsps-decoy:0.40'."""
        name, _, arg = token.strip().partition(":")
        try:
            kind = SchemeKind(name)
        except ValueError:
            valid = ", ".join(k.value for k in SchemeKind)
            raise InvalidParameterError(
                f"unknown scheme {name!r} (valid: {valid})"
            ) from None
        def numeric(value: str) -> float:
            try:
                return float(value)
            except ValueError:
                raise InvalidParameterError(
                    f"scheme argument {value!r} is not a number"
                ) from None

        if kind is SchemeKind.HSPS_DECOY:
            if not arg:
                raise InvalidParameterError(
                    "hsps-decoy needs a correlation argument, e.g. hsps-decoy:0.40"
                )
            return Scheme(kind=kind, p_cor=numeric(arg))
        if arg:
            if kind is SchemeKind.WCS_NO_DECOY:
                return Scheme(kind=kind, wcs_mu=numeric(arg))
            raise InvalidParameterError(
                f"scheme {name!r} takes no argument, got {arg!r}"
            )
        return Scheme(kind=kind)


@dataclass(frozen=True)
class LossCurve:
    scheme_label: str
    loss_db: tuple[float, ...]
    rate: tuple[float, ...]

    @property
    def cutoff_db(self) -> float | None:
        """Largest grid loss still delivering positive key, if any."""
        positive = [l for l, r in zip(self.loss_db, self.rate) if r > 0.0]
        return max(positive) if positive else None


def _hsps_template_params(cfg: ExperimentConfig) -> tuple[HspsParams, HspsParams]:
    if not isinstance(cfg.source_signal, HspsSource) or not isinstance(
        cfg.source_decoy, HspsSource
    ):
        raise InvalidParameterError(
            "this scheme needs heralded sources in the session template"
        )
    return cfg.source_signal.params, cfg.source_decoy.params


def _no_decoy_rate(
    dist, ch: ChannelParams, protocol: ProtocolParams, y0_obs: float
) -> float:
    point = qber(dist, ch)
    obs = ThreeIntensityObservation(
        q_signal=point.q_gain,
        q_decoy=point.q_gain,  # unused by the pessimistic estimator
        e_signal=point.qber,
        y0_obs=y0_obs,
        n_signal=1,
        n_decoy=1,
        n_vacuum=1,
    )
    bounds = no_decoy_bounds(obs, dist, e0=ch.e0)
    return key_rate(point.q_gain, point.qber, bounds, protocol).rate_per_pulse


def _scheme_rate(
    scheme: Scheme, cfg: ExperimentConfig, ch: ChannelParams
) -> float:
    protocol = cfg.protocol
    if scheme.kind is SchemeKind.IDEAL_SPS:
        dist = ideal_sps_distribution()
        point = qber(dist, ch)
        bounds = infinite_decoy_exact(ch, dist)
        return key_rate(point.q_gain, point.qber, bounds, protocol).rate_per_pulse

    if scheme.kind is SchemeKind.WCS_DECOY_INF_OPT:
        return optimize_mu(ch, protocol).rate

    if scheme.kind is SchemeKind.WCS_NO_DECOY:
        mu = scheme.wcs_mu if scheme.wcs_mu is not None else WCS_NO_DECOY_MU_DEFAULT
        dist = wcs_distribution(mu, cfg.n_max)
        return _no_decoy_rate(dist, ch, protocol, y0_obs=ch.y0)

    if scheme.kind is SchemeKind.HSPS_NO_DECOY:
        signal_params, _ = _hsps_template_params(cfg)
        dist = HspsSource(signal_params).distribution(cfg.n_max)
        return _no_decoy_rate(dist, ch, protocol, y0_obs=ch.y0)

    # HSPS_DECOY: three-intensity estimation at the template intensities
    signal_params, decoy_params = _hsps_template_params(cfg)
    point_cfg = replace(
        cfg,
        source_signal=HspsSource(replace(signal_params, p_cor=scheme.p_cor)),
        source_decoy=HspsSource(replace(decoy_params, p_cor=scheme.p_cor)),
        channel=ch,
        fluctuation=FluctuationPolicy(0.0),
    )
    return run_pipeline(point_cfg).key.rate_per_pulse


def scan_loss(
    cfg_template: ExperimentConfig,
    scheme: Scheme,
    loss_grid_db: "list[float] | tuple[float, ...] | np.ndarray",
) -> LossCurve:
    """Key rate of one scheme across an ascending total-loss grid.

    Fluctuations are disabled for every scheme (the comparison assumes
    unlimited session length); rates are floored at zero. The heralded
    three-intensity schemes honor the template's ``vacuum_mu`` (their
    background estimate comes from the leaky vacuum setting, as in a
    real session); set it to zero for a pure-theory comparison. The
    no-decoy and infinite-decoy schemes use the channel background
    directly.
    """
    grid = [float(l) for l in loss_grid_db]
    if not grid:
        raise InvalidParameterError("loss grid is empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise InvalidParameterError("loss grid must be strictly ascending")
    rates = []
    for loss in grid:
        ch = replace(cfg_template.channel, eta=loss_db_to_eta(loss))
        rates.append(_scheme_rate(scheme, cfg_template, ch))
    return LossCurve(
        scheme_label=scheme.label, loss_db=tuple(grid), rate=tuple(rates)
    )


@dataclass(frozen=True)
class MuOptimum:
    """Result of the signal-intensity search; infeasible when no
    intensity in the range delivers positive key."""

    mu: float
    rate: float
    feasible: bool


def wcs_infinite_decoy_rate(
    mu: float, ch: ChannelParams, protocol: ProtocolParams
) -> float:
    """Signed key rate of a coherent-state source with exact
    single-photon knowledge (infinite-decoy limit).

    Uses the closed-form Poisson gain Q = y0 + 1 - exp(-eta mu); the
    single-photon yield and error are the channel truth.
    """
    if not mu > 0.0:
        raise InvalidParameterError(f"mu={mu!r} must be > 0")
    signal = 1.0 - math.exp(-ch.eta * mu)
    q = min(ch.y0 + signal, 1.0)
    e = (ch.e0 * ch.y0 + ch.e_det * signal) / q
    y1 = yield_n(ch, 1)
    e1 = error_n(ch, 1)
    p0 = math.exp(-mu)
    g0 = ch.y0 * p0
    g1 = y1 * mu * p0
    return protocol.q_sift * (
        -q * protocol.f_ec * binary_entropy(min(e, 1.0))
        + g0
        + g1 * (1.0 - binary_entropy(min(e1, 1.0)))
    )


_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def optimize_mu(
    channel: ChannelParams,
    protocol: ProtocolParams = ProtocolParams(),
    search_range: tuple[float, float] = (1e-4, 1.0),
    coarse_points: int = 512,
    mu_tol: float = 1e-7,
) -> MuOptimum:
    """Maximize the infinite-decoy coherent-state rate over the signal
    intensity.

    A coarse grid brackets the maximum, then golden-section refinement
    narrows it to ``mu_tol``. When the rate is non-positive everywhere
    the result is flagged infeasible (rate 0 at the least-bad
    intensity).
    """
    lo, hi = search_range
    if not (0.0 < lo < hi <= 1.0):
        raise InvalidParameterError(
            f"search_range={search_range!r} must satisfy 0 < lo < hi <= 1"
        )

    def rate(mu: float) -> float:
        return wcs_infinite_decoy_rate(mu, channel, protocol)

    grid = np.linspace(lo, hi, coarse_points)
    values = [rate(mu) for mu in grid]
    best = int(np.argmax(values))

    a = grid[max(best - 1, 0)]
    b = grid[min(best + 1, coarse_points - 1)]
    # golden-section interior points, keeping the better half each step
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = rate(c), rate(d)
    while b - a > mu_tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = rate(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = rate(d)
    mu_opt = (a + b) / 2.0
    r_opt = rate(mu_opt)
    if r_opt < values[best]:
        mu_opt, r_opt = float(grid[best]), values[best]
    if r_opt <= 0.0:
        return MuOptimum(mu=mu_opt, rate=0.0, feasible=False)
    return MuOptimum(mu=mu_opt, rate=r_opt, feasible=True)
