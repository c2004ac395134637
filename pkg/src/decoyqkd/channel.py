"""Channel and detector model: per-photon-number yields, gains and QBERs.

The lossy link plus Bob's detector are collapsed into a single
transmittance ``eta``; dark counts and stray light enter as a background
yield ``y0`` per gate. An n-photon pulse is detected with yield

    Y_n = y0 + 1 - (1 - eta)^n        (clamped to 1)

and contributes errors through misalignment (``e_det``) on signal
detections and random outcomes (``e0``, normally 1/2) on background
detections:

    e_n = (e0 * y0 + e_det * (1 - (1 - eta)^n)) / Y_n.

Folding a source distribution through these gives the per-gate gain and
average QBER observable at a given intensity setting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidParameterError, UndefinedStatisticError
from .sources import PhotonNumberDistribution

E0_DEFAULT = 0.5


@dataclass(frozen=True)
class ChannelParams:
    """Aggregate channel/detector parameters.

    eta    combined transmittance times detection efficiency, in (0, 1].
    y0     background yield per gate (dark counts, stray light).
    e_det  misalignment error probability of a signal detection.
    e0     error probability of a background detection (1/2: random).
    """

    eta: float
    y0: float
    e_det: float
    e0: float = E0_DEFAULT

    def __post_init__(self) -> None:
        if not 0.0 < self.eta <= 1.0:
            raise InvalidParameterError(f"eta={self.eta!r} outside (0, 1]")
        if not 0.0 <= self.y0 < 1.0:
            raise InvalidParameterError(f"y0={self.y0!r} outside [0, 1)")
        if not 0.0 <= self.e_det <= 0.5:
            raise InvalidParameterError(f"e_det={self.e_det!r} outside [0, 0.5]")
        if not 0.0 <= self.e0 <= 1.0:
            raise InvalidParameterError(f"e0={self.e0!r} outside [0, 1]")


@dataclass(frozen=True)
class GainErrorPoint:
    """Per-gate detection probability and its average error ratio."""

    q_gain: float
    qber: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.q_gain <= 1.0:
            raise InvalidParameterError(f"q_gain={self.q_gain!r} outside [0, 1]")
        if not 0.0 <= self.qber <= 1.0:
            raise InvalidParameterError(f"qber={self.qber!r} outside [0, 1]")


def yield_n(ch: ChannelParams, n: int) -> float:
    """Detection probability for an n-photon pulse."""
    if n < 0:
        raise InvalidParameterError("photon number must be >= 0")
    # grouping keeps Y_0 == y0 exact instead of (y0 + 1) - 1
    return min(ch.y0 + (1.0 - (1.0 - ch.eta) ** n), 1.0)


def error_n(ch: ChannelParams, n: int) -> float:
    """Error probability of a detected n-photon pulse.

    e_0 evaluates to ``e0`` exactly; for large n it approaches
    ``e_det`` as signal detections dominate the background.
    """
    y = yield_n(ch, n)
    if y == 0.0:
        raise ZeroDivisionError(
            "error probability undefined at zero yield (y0=0, n=0)"
        )
    signal = 1.0 - (1.0 - ch.eta) ** n
    return (ch.e0 * ch.y0 + ch.e_det * signal) / y


def gain(dist: PhotonNumberDistribution, ch: ChannelParams) -> float:
    """Per-gate gain of a source through the channel, sum_n Y_n P(n).

    The folded tail bin is weighted with the yield at the truncation
    order; the bias is bounded by the tail mass itself.
    """
    return math.fsum(
        p * yield_n(ch, n) for n, p in enumerate(dist.probs) if p > 0.0
    )


def qber(dist: PhotonNumberDistribution, ch: ChannelParams) -> GainErrorPoint:
    """Gain and average QBER, E = sum_n Y_n P(n) e_n / Q."""
    q = gain(dist, ch)
    if q <= 0.0:
        raise UndefinedStatisticError("QBER undefined at zero gain")
    # Y_n * e_n collapses to the error numerator independent of clamping
    err = math.fsum(
        p * (ch.e0 * ch.y0 + ch.e_det * (1.0 - (1.0 - ch.eta) ** n))
        for n, p in enumerate(dist.probs)
        if p > 0.0
    )
    return GainErrorPoint(q_gain=q, qber=min(err / q, 1.0))


def loss_db_to_eta(loss_db: float) -> float:
    """Total loss in dB to linear transmittance, eta = 10^(-loss/10)."""
    if not loss_db >= 0.0:
        raise InvalidParameterError(f"loss_db={loss_db!r} must be >= 0")
    return 10.0 ** (-loss_db / 10.0)


def eta_to_loss_db(eta: float) -> float:
    """Linear transmittance to total loss in dB."""
    if not 0.0 < eta <= 1.0:
        raise InvalidParameterError(f"eta={eta!r} outside (0, 1]")
    return -10.0 * math.log10(eta)
