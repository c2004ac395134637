"""Photon-number statistics of the light sources feeding the QKD link.

Three source families are modelled:

* a weak coherent state (WCS), Poisson distributed with mean ``mu``;
* a heralded single-photon source (HSPS) driven by CW-pumped parametric
  down-conversion, where a herald announces its partner photon with
  correlation probability ``p_cor`` while uncorrelated (accidental)
  photons fall into the gate as a Poisson background with mean
  ``mu_acc``, and a fraction ``d_i`` of heralds are dark counts of the
  heralding detector;
* an ideal single-photon source.

All constructors return a :class:`PhotonNumberDistribution`, a truncated
probability vector whose tail mass is folded into the last bin so the
vector sums to one exactly. That vector is the common currency consumed
by the channel, decoy-estimation and key-rate modules.

The module also inverts raw counting rates of the heralding setup into
the HSPS model parameters (accidental flux and correlation probability).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import (
    InconsistentDataError,
    InvalidParameterError,
    UndefinedStatisticError,
)

N_MAX_DEFAULT = 16
DI_DEFAULT = 1e-3

# absolute tolerance on sum(probs) == 1 and on per-bin range checks
NORMALIZATION_ATOL = 1e-12


@dataclass(frozen=True)
class PhotonNumberDistribution:
    """Truncated photon-number distribution P(0..n_max).

    ``probs[n]`` is the probability of exactly ``n`` photons in a gate;
    when ``tail_folded`` is set, ``probs[-1]`` additionally absorbs all
    mass above the truncation so the vector sums to one.

    ``p_ge1`` optionally records the source-statistics value of
    P(m >= 1) when it differs from ``1 - probs[0]``. A heralded source
    counts the herald-dark-count vacuum separately from its emission
    statistics, so its auto-correlation uses the emission tail rather
    than the complement of the corrected vacuum term.
    """

    probs: tuple[float, ...]
    tail_folded: bool = True
    p_ge1: float | None = None

    def __post_init__(self) -> None:
        if len(self.probs) < 3:
            raise InvalidParameterError(
                "distribution needs at least bins 0..2, got "
                f"{len(self.probs)} bins"
            )
        for n, p in enumerate(self.probs):
            if not (-NORMALIZATION_ATOL <= p <= 1.0 + NORMALIZATION_ATOL):
                raise InvalidParameterError(f"probs[{n}]={p!r} outside [0, 1]")
        total = math.fsum(self.probs)
        if abs(total - 1.0) > NORMALIZATION_ATOL:
            raise InvalidParameterError(
                f"probabilities sum to {total!r}, expected 1 within "
                f"{NORMALIZATION_ATOL}"
            )
        if self.p_ge1 is not None and not 0.0 <= self.p_ge1 <= 1.0:
            raise InvalidParameterError(f"p_ge1={self.p_ge1!r} outside [0, 1]")
        # clamp float dust so downstream sums never see negative mass
        object.__setattr__(
            self, "probs", tuple(min(max(p, 0.0), 1.0) for p in self.probs)
        )

    @property
    def n_max(self) -> int:
        return len(self.probs) - 1

    def p(self, n: int) -> float:
        """P(n), zero beyond the truncated support."""
        if n < 0:
            raise InvalidParameterError("photon number must be >= 0")
        return self.probs[n] if n <= self.n_max else 0.0

    def p_at_least(self, k: int) -> float:
        """Cumulative tail P(m >= k).

        Uses the source-statistics override for k == 1 when present.
        Beyond the truncation the folded representation carries no
        information, so the tail is reported as zero.
        """
        if k <= 0:
            return 1.0
        if k == 1 and self.p_ge1 is not None:
            return self.p_ge1
        if k > self.n_max:
            return 0.0
        return max(1.0 - math.fsum(self.probs[:k]), 0.0)


@dataclass(frozen=True)
class HspsParams:
    """Heralded-source model parameters.

    p_cor   probability that a herald is accompanied by its partner
            photon in the signal arm.
    mu_acc  mean accidental photon number per gate (signal-arm flux
            times gate duration).
    d_i     probability that a herald is a dark count of the heralding
            detector.
    """

    p_cor: float
    mu_acc: float
    d_i: float = DI_DEFAULT

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_cor <= 1.0:
            raise InvalidParameterError(f"p_cor={self.p_cor!r} outside [0, 1]")
        if not self.mu_acc >= 0.0:
            raise InvalidParameterError(f"mu_acc={self.mu_acc!r} must be >= 0")
        if not 0.0 <= self.d_i < 1.0:
            raise InvalidParameterError(f"d_i={self.d_i!r} outside [0, 1)")


@dataclass(frozen=True)
class MeasuredRates:
    """Raw counting rates of the heralding setup.

    r0_hz        heralding (gating) rate.
    rs_hz        signal-detector count rate under random gating.
    rc_hz        herald-gated coincidence rate.
    ds_hz        signal-detector dark count rate.
    eta_s        signal-detector efficiency.
    gate_time_s  detector gate duration in seconds.
    """

    r0_hz: float
    rs_hz: float
    rc_hz: float
    ds_hz: float
    eta_s: float
    gate_time_s: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.ds_hz <= self.rs_hz:
            raise InvalidParameterError(
                f"need 0 <= ds_hz <= rs_hz, got ds_hz={self.ds_hz!r}, "
                f"rs_hz={self.rs_hz!r}"
            )
        if not self.rs_hz < self.r0_hz:
            raise InvalidParameterError(
                f"need rs_hz < r0_hz, got rs_hz={self.rs_hz!r}, "
                f"r0_hz={self.r0_hz!r}"
            )
        if not 0.0 <= self.rc_hz <= self.r0_hz:
            raise InvalidParameterError(
                f"rc_hz={self.rc_hz!r} outside [0, r0_hz]"
            )
        if not 0.0 < self.eta_s <= 1.0:
            raise InvalidParameterError(f"eta_s={self.eta_s!r} outside (0, 1]")
        if not self.gate_time_s > 0.0:
            raise InvalidParameterError(
                f"gate_time_s={self.gate_time_s!r} must be > 0"
            )


def _poisson_pmf(mu: float, n_max: int) -> list[float]:
    # e^-mu * mu^n / n!, built iteratively to avoid factorial overflow
    pmf = [math.exp(-mu)]
    for n in range(1, n_max + 1):
        pmf.append(pmf[-1] * mu / n)
    return pmf


def wcs_distribution(
    mu: float, n_max: int = N_MAX_DEFAULT
) -> PhotonNumberDistribution:
    """Poisson photon-number distribution of a weak coherent state.

    The tail P(m >= n_max) is folded into the last bin, keeping the
    vector exactly normalized.
    """
    if not mu >= 0.0:
        raise InvalidParameterError(f"mu={mu!r} must be >= 0")
    if n_max < 2:
        raise InvalidParameterError(f"n_max={n_max} must be >= 2")
    pmf = _poisson_pmf(mu, n_max - 1)
    tail = max(1.0 - math.fsum(pmf), 0.0)
    return PhotonNumberDistribution(probs=tuple(pmf) + (tail,))


def hsps_distribution(
    params: HspsParams, n_max: int = N_MAX_DEFAULT
) -> PhotonNumberDistribution:
    """Photon-number distribution of the heralded single-photon source.

    Per gate the source emits the heralded partner photon with
    probability ``p_cor`` on top of a Poisson accidental background, so
    the emission tail is

        P(m >= k) = p_cor * A(k - 1) + (1 - p_cor) * A(k),

    with A(k) the Poisson tail of mean ``mu_acc``. The vacuum bin is
    corrected for heralds that were detector dark counts,

        P(0) = p_cor * d_i + (1 - p_cor) * exp(-mu_acc),

    and P(1) takes the complement so normalization is exact. The
    emission-statistics tail P(m >= 1) is kept alongside the vector for
    the auto-correlation, where the dark-count correction does not
    enter.
    """
    if n_max < 2:
        raise InvalidParameterError(f"n_max={n_max} must be >= 2")
    p_cor, mu, d_i = params.p_cor, params.mu_acc, params.d_i

    pmf = _poisson_pmf(mu, n_max)
    # A(k) = Poisson tail P_acc(m >= k); A(0) = 1
    acc_tail = [1.0]
    for k in range(1, n_max + 2):
        acc_tail.append(max(1.0 - math.fsum(pmf[:k]), 0.0))

    def p_ge(k: int) -> float:
        return p_cor * acc_tail[k - 1] + (1.0 - p_cor) * acc_tail[k]

    probs = [0.0] * (n_max + 1)
    probs[0] = p_cor * d_i + (1.0 - p_cor) * math.exp(-mu)
    probs[1] = 1.0 - probs[0] - p_ge(2)
    if probs[1] < -NORMALIZATION_ATOL:
        raise InvalidParameterError(
            "inconsistent heralded-source parameters: single-photon "
            f"probability would be {probs[1]!r} (is d_i too large for "
            f"mu_acc={mu!r}?)"
        )
    for n in range(2, n_max):
        probs[n] = p_ge(n) - p_ge(n + 1)
    probs[n_max] = p_ge(n_max)
    return PhotonNumberDistribution(probs=tuple(probs), p_ge1=p_ge(1))


def ideal_sps_distribution(n_max: int = 2) -> PhotonNumberDistribution:
    """Deterministic single-photon emitter: P(1) = 1."""
    if n_max < 2:
        raise InvalidParameterError(f"n_max={n_max} must be >= 2")
    probs = [0.0] * (n_max + 1)
    probs[1] = 1.0
    return PhotonNumberDistribution(probs=tuple(probs), tail_folded=False)


def g2_zero(dist: PhotonNumberDistribution) -> float:
    """Second-order auto-correlation at zero delay, 2*P(m>=2)/P(m>=1)^2.

    Classifies the source: < 1 sub-Poissonian, 1 Poissonian,
    > 1 super-Poissonian.
    """
    p_ge1 = dist.p_at_least(1)
    p_ge2 = dist.p_at_least(2)
    if p_ge1 <= 0.0:
        raise UndefinedStatisticError(
            "g2(0) is undefined for a vacuum-only distribution"
        )
    return 2.0 * p_ge2 / (p_ge1 * p_ge1)


def infer_accidental_rate(m: MeasuredRates) -> float:
    """Signal-arm photon flux R_s (photons/s) from the randomly gated rate.

    Inverts  r_s/R_0 = 1 - (1 - P_acc)(1 - d_s/R_0)  with
    P_acc = 1 - exp(-eta_s * R_s * gate), giving

        R_s = ln((R_0 - d_s) / (R_0 - r_s)) / (eta_s * gate).

    The accidental mean per gate is then ``R_s * gate_time_s``.
    """
    num = m.r0_hz - m.ds_hz
    den = m.r0_hz - m.rs_hz
    if den <= 0.0 or num < den:
        raise InvalidParameterError(
            "rates violate the detection model: need ds_hz <= rs_hz < r0_hz"
        )
    return math.log(num / den) / (m.eta_s * m.gate_time_s)


def infer_correlation(
    m: MeasuredRates, r_s: float, tol: float = 1e-6
) -> float:
    """Pair-correlation probability from the herald-gated coincidence rate.

    Inverts  r_c/R_0 = 1 - (1 - P_cor)(1 - P_acc)(1 - d_s/R_0):

        P_cor = 1 - (R_0 - r_c)/(R_0 - d_s) * exp(eta_s * R_s * gate).

    Values within ``tol`` outside [0, 1] are clamped (rounding noise);
    anything further signals inconsistent measurements.
    """
    if not r_s >= 0.0:
        raise InvalidParameterError(f"r_s={r_s!r} must be >= 0")
    if m.r0_hz <= m.ds_hz:
        raise InvalidParameterError("need r0_hz > ds_hz")
    p_cor = 1.0 - (m.r0_hz - m.rc_hz) / (m.r0_hz - m.ds_hz) * math.exp(
        m.eta_s * r_s * m.gate_time_s
    )
    if p_cor < -tol or p_cor > 1.0 + tol:
        raise InconsistentDataError(
            f"inferred correlation {p_cor!r} outside [0, 1]: the coincidence "
            "rate cannot be explained by accidentals plus dark counts"
        )
    return min(max(p_cor, 0.0), 1.0)


@dataclass(frozen=True)
class WcsSource:
    """Weak coherent state of mean photon number ``mu``."""

    mu: float

    def __post_init__(self) -> None:
        if not self.mu >= 0.0:
            raise InvalidParameterError(f"mu={self.mu!r} must be >= 0")

    def distribution(self, n_max: int = N_MAX_DEFAULT) -> PhotonNumberDistribution:
        return wcs_distribution(self.mu, n_max)


@dataclass(frozen=True)
class HspsSource:
    """Heralded single-photon source parameterized by :class:`HspsParams`."""

    params: HspsParams

    def distribution(self, n_max: int = N_MAX_DEFAULT) -> PhotonNumberDistribution:
        return hsps_distribution(self.params, n_max)


@dataclass(frozen=True)
class IdealSpsSource:
    """Ideal single-photon emitter."""

    def distribution(self, n_max: int = N_MAX_DEFAULT) -> PhotonNumberDistribution:
        return ideal_sps_distribution(max(n_max, 2))


SourceModel = WcsSource | HspsSource | IdealSpsSource
