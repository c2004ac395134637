"""Three-intensity decoy-state estimation of the single-photon channel.

From the observed gains and QBERs at a signal intensity, a weaker decoy
intensity and a (near-)vacuum intensity, the estimator bounds the yield
and error rate of single-photon pulses:

    Y1 >= [P'(2) Q_d^L - P_d(2) Q_s^U - Y0^U (P'(2) P_d(0) - P_d(2) P'(0))]
          / (P'(2) P_d(1) - P_d(2) P'(1))

    e1 <= [(Q_s E_s)^U - e0 Y0^L P'(0)] / (Y1^L P'(1))

where primes denote the signal distribution and the superscripts are
finite-statistics envelopes: each observable V measured over N gates is
widened to V (1 +/- n_sigma / sqrt(N V)). The derivation requires the
distribution pair to satisfy a sign condition on every multi-photon
coefficient, checked termwise by :func:`check_condition`.

A pessimistic no-decoy bound and the infinite-decoy exact limit are
provided for scheme comparisons. All bounds clamp into [0, 1]; any
clamp or degeneracy is reported through ``flags`` rather than silently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .channel import ChannelParams, error_n, yield_n
from .errors import DegenerateDistributionError, InvalidParameterError
from .sources import PhotonNumberDistribution


@dataclass(frozen=True)
class FluctuationPolicy:
    """Number of counting-statistics standard deviations applied to the
    observables; 0 disables fluctuations entirely."""

    n_sigma: float = 0.0

    def __post_init__(self) -> None:
        if not self.n_sigma >= 0.0:
            raise InvalidParameterError(
                f"n_sigma={self.n_sigma!r} must be >= 0"
            )


@dataclass(frozen=True)
class ThreeIntensityObservation:
    """Observed per-gate statistics of one three-intensity session.

    ``y0_obs`` is the counting rate of the vacuum intensity standing in
    for the background yield (pessimistic when the vacuum setting
    leaks). ``e_decoy`` is carried for reporting only; the estimator
    does not use it.
    """

    q_signal: float
    q_decoy: float
    e_signal: float
    y0_obs: float
    n_signal: int
    n_decoy: int
    n_vacuum: int
    e_decoy: float | None = None

    def __post_init__(self) -> None:
        for name in ("q_signal", "q_decoy", "e_signal", "y0_obs"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InvalidParameterError(f"{name}={v!r} outside [0, 1]")
        if self.e_decoy is not None and not 0.0 <= self.e_decoy <= 1.0:
            raise InvalidParameterError(
                f"e_decoy={self.e_decoy!r} outside [0, 1]"
            )
        for name in ("n_signal", "n_decoy", "n_vacuum"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                raise InvalidParameterError(
                    f"{name}={v!r} must be a positive integer"
                )


@dataclass(frozen=True)
class ObservableBounds:
    """Fluctuation envelopes on the raw observables.

    ``clamped`` lists the lower bounds whose relative half-width
    n_sigma / sqrt(N V) reached one, forcing a clamp at zero.
    """

    q_decoy_low: float
    q_signal_high: float
    eq_signal_high: float
    y0_low: float
    y0_high: float
    clamped: tuple[str, ...] = ()


@dataclass(frozen=True)
class BoundsResult:
    """Single-photon bounds plus the gain components entering the key rate.

    g0 is the background gain y0 * P'(0); g1_lower = y1_lower * P'(1).
    ``flags`` records clamps and degeneracies ('y1-negative-clamped',
    'e1-clamped-high', 'e1-unbounded', ...); an empty tuple means every
    quantity came out of its formula untouched.
    """

    y1_lower: float
    e1_upper: float
    g0: float
    g1_lower: float
    flags: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        for name in ("y1_lower", "e1_upper", "g0", "g1_lower"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InvalidParameterError(f"{name}={v!r} outside [0, 1]")

    @property
    def degenerate(self) -> bool:
        return bool(self.flags)


def _estimator_denominator(
    dist_signal: PhotonNumberDistribution,
    dist_decoy: PhotonNumberDistribution,
) -> float:
    """P'(2) P_d(1) - P_d(2) P'(1), validated strictly positive.

    Raises :class:`DegenerateDistributionError` when both two-photon
    weights vanish or the pair cannot separate the single-photon yield
    (identical distributions land here).
    """
    p2s = dist_signal.p(2)
    p2d = dist_decoy.p(2)
    if p2s == 0.0 and p2d == 0.0:
        raise DegenerateDistributionError(
            "both distributions have zero two-photon probability"
        )
    den = p2s * dist_decoy.p(1) - p2d * dist_signal.p(1)
    if den <= 0.0:
        raise DegenerateDistributionError(
            "signal/decoy pair cannot separate the single-photon yield "
            f"(estimator denominator {den!r} is not positive)"
        )
    return den


def check_condition(
    dist_signal: PhotonNumberDistribution,
    dist_decoy: PhotonNumberDistribution,
) -> bool:
    """Termwise applicability condition of the three-intensity estimator.

    Verifies c_n = P'(2) P_d(n) - P_d(2) P'(n) <= 0 for every n >= 2 up
    to the truncation, which is sufficient for the estimator to be a
    true lower bound whatever the yields are. The comparison includes
    the folded tail bins; their mass only strengthens the signal side
    in any physically sensible pairing.

    Also validates the estimator denominator, so degenerate pairs raise
    here instead of deep inside the estimate.
    """
    _estimator_denominator(dist_signal, dist_decoy)
    p2s = dist_signal.p(2)
    p2d = dist_decoy.p(2)
    top = max(dist_signal.n_max, dist_decoy.n_max)
    return all(
        p2s * dist_decoy.p(n) - p2d * dist_signal.p(n) <= 0.0
        for n in range(2, top + 1)
    )


def fluctuation_bounds(
    obs: ThreeIntensityObservation, pol: FluctuationPolicy
) -> ObservableBounds:
    """Widen the observables by n_sigma counting standard deviations.

    Each observable V over N gates gets the relative half-width
    n_sigma / sqrt(N V); with n_sigma = 0 the central values are
    returned unchanged. Lower bounds clamp at zero (flagged) when the
    half-width reaches one.
    """
    ns = pol.n_sigma
    eq = obs.q_signal * obs.e_signal
    if ns == 0.0:
        return ObservableBounds(
            q_decoy_low=obs.q_decoy,
            q_signal_high=obs.q_signal,
            eq_signal_high=eq,
            y0_low=obs.y0_obs,
            y0_high=obs.y0_obs,
        )

    clamped: list[str] = []

    def half_width(value: float, n_pulses: int) -> float:
        if value <= 0.0:
            return math.inf
        return ns / math.sqrt(n_pulses * value)

    def low(name: str, value: float, n_pulses: int) -> float:
        w = half_width(value, n_pulses)
        if w >= 1.0:
            clamped.append(name)
            return 0.0
        return value * (1.0 - w)

    def high(value: float, n_pulses: int) -> float:
        if value <= 0.0:
            return 0.0
        return value * (1.0 + half_width(value, n_pulses))

    return ObservableBounds(
        q_decoy_low=low("q_decoy_low", obs.q_decoy, obs.n_decoy),
        q_signal_high=min(high(obs.q_signal, obs.n_signal), 1.0),
        eq_signal_high=min(high(eq, obs.n_signal), 1.0),
        y0_low=low("y0_low", obs.y0_obs, obs.n_vacuum),
        y0_high=min(high(obs.y0_obs, obs.n_vacuum), 1.0),
        clamped=tuple(clamped),
    )


def estimate_y1_lower(
    obs: ThreeIntensityObservation,
    dist_signal: PhotonNumberDistribution,
    dist_decoy: PhotonNumberDistribution,
    pol: FluctuationPolicy = FluctuationPolicy(),
) -> BoundsResult:
    """Lower-bound the single-photon yield from the intensity pair.

    Returns a partial :class:`BoundsResult`: ``e1_upper`` is left at its
    vacuous value 1 (flagged 'e1-not-estimated') until
    :func:`estimate_e1_upper` fills it in. On noiseless observables the
    bound is guaranteed not to exceed the true Y1 whenever
    :func:`check_condition` holds; checking that condition is the
    caller's responsibility (degenerate pairs still raise here).
    """
    den = _estimator_denominator(dist_signal, dist_decoy)
    fb = fluctuation_bounds(obs, pol)
    p2s, p2d = dist_signal.p(2), dist_decoy.p(2)

    num = (
        p2s * fb.q_decoy_low
        - p2d * fb.q_signal_high
        - fb.y0_high * (p2s * dist_decoy.p(0) - p2d * dist_signal.p(0))
    )

    flags: list[str] = ["e1-not-estimated"]
    y1 = num / den
    if y1 < 0.0:
        flags.append("y1-negative-clamped")
        y1 = 0.0
    elif y1 > 1.0:
        flags.append("y1-clamped-high")
        y1 = 1.0

    return BoundsResult(
        y1_lower=y1,
        e1_upper=1.0,
        g0=min(obs.y0_obs * dist_signal.p(0), 1.0),
        g1_lower=y1 * dist_signal.p(1),
        flags=tuple(flags),
    )


def estimate_e1_upper(
    obs: ThreeIntensityObservation,
    dist_signal: PhotonNumberDistribution,
    y1_lower: float,
    pol: FluctuationPolicy = FluctuationPolicy(),
    e0: float = 0.5,
) -> tuple[float, tuple[str, ...]]:
    """Upper-bound the single-photon error rate given a Y1 lower bound.

    Returns ``(e1_upper, flags)``. A vanishing ``y1_lower`` leaves the
    error unbounded (1, flagged); results outside [0, 1] are clamped
    and flagged. On noiseless observables the bound is guaranteed not
    to fall below the true e1.
    """
    if y1_lower <= 0.0:
        return 1.0, ("e1-unbounded",)
    p1 = dist_signal.p(1)
    if p1 <= 0.0:
        raise DegenerateDistributionError(
            "signal distribution has no single-photon weight"
        )
    fb = fluctuation_bounds(obs, pol)
    e1 = (fb.eq_signal_high - e0 * fb.y0_low * dist_signal.p(0)) / (
        y1_lower * p1
    )
    if e1 < 0.0:
        return 0.0, ("e1-clamped-low",)
    if e1 > 1.0:
        return 1.0, ("e1-clamped-high",)
    return e1, ()


def estimate_bounds(
    obs: ThreeIntensityObservation,
    dist_signal: PhotonNumberDistribution,
    dist_decoy: PhotonNumberDistribution,
    pol: FluctuationPolicy = FluctuationPolicy(),
    e0: float = 0.5,
) -> BoundsResult:
    """Full three-intensity estimate: Y1 lower bound, then e1 upper bound."""
    partial = estimate_y1_lower(obs, dist_signal, dist_decoy, pol)
    e1, e1_flags = estimate_e1_upper(
        obs, dist_signal, partial.y1_lower, pol, e0=e0
    )
    flags = tuple(f for f in partial.flags if f != "e1-not-estimated")
    return replace(partial, e1_upper=e1, flags=flags + e1_flags)


def no_decoy_bounds(
    obs: ThreeIntensityObservation,
    dist_signal: PhotonNumberDistribution,
    e0: float = 0.5,
) -> BoundsResult:
    """Pessimistic single-photon bounds without decoy information.

    Every undetected pulse is attributed to single photons, so the
    single-photon gain keeps only what multi-photon emission cannot
    explain:

        G1^L = Q_s - G0 - P'(m >= 2)

    floored at zero (flagged). The error bound reuses the e1 formula
    with these values and central observables.
    """
    p1 = dist_signal.p(1)
    if p1 <= 0.0:
        raise DegenerateDistributionError(
            "signal distribution has no single-photon weight"
        )
    flags: list[str] = []
    g0 = min(obs.y0_obs * dist_signal.p(0), 1.0)
    g1 = obs.q_signal - g0 - dist_signal.p_at_least(2)
    if g1 < 0.0:
        flags.append("y1-negative-clamped")
        g1 = 0.0
    y1 = g1 / p1
    if y1 > 1.0:
        flags.append("y1-clamped-high")
        y1 = 1.0
        g1 = y1 * p1

    if y1 <= 0.0:
        e1, e1_flags = 1.0, ("e1-unbounded",)
    else:
        e1 = (obs.e_signal * obs.q_signal - e0 * obs.y0_obs * dist_signal.p(0)) / (
            y1 * p1
        )
        e1_flags = ()
        if e1 < 0.0:
            e1, e1_flags = 0.0, ("e1-clamped-low",)
        elif e1 > 1.0:
            e1, e1_flags = 1.0, ("e1-clamped-high",)

    return BoundsResult(
        y1_lower=y1,
        e1_upper=e1,
        g0=g0,
        g1_lower=g1,
        flags=tuple(flags) + e1_flags,
    )


def infinite_decoy_exact(
    ch: ChannelParams,
    dist_signal: PhotonNumberDistribution | None = None,
) -> BoundsResult:
    """Idealized estimator limit: the channel truth itself.

    With unlimited decoy settings the single-photon yield and error are
    identified exactly, so the bounds collapse onto Y1 and e1 of the
    channel. Only meaningful in simulation, where the channel is known.
    The gain components g0/g1 are filled in when the signal
    distribution is supplied, else left at zero.
    """
    y1 = yield_n(ch, 1)
    e1 = error_n(ch, 1)
    if dist_signal is None:
        return BoundsResult(y1_lower=y1, e1_upper=e1, g0=0.0, g1_lower=0.0)
    return BoundsResult(
        y1_lower=y1,
        e1_upper=e1,
        g0=min(ch.y0 * dist_signal.p(0), 1.0),
        g1_lower=y1 * dist_signal.p(1),
    )
