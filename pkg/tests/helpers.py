"""Shared reference parameters and builders for the test suite.

The benchmark session is a 36 dB heralded-source link with a 40%
heralding correlation; the reference observables are the measured
values the analysis chain is validated against.
"""

from __future__ import annotations

from decoyqkd import (
    ChannelParams,
    ExperimentConfig,
    FluctuationPolicy,
    HspsParams,
    HspsSource,
    ProtocolParams,
)

BENCH_P_COR = 0.40
BENCH_MU_SIGNAL = 5.325e-3
BENCH_MU_DECOY = 0.660e-3
BENCH_MU_VACUUM = 0.577e-5
BENCH_D_I = 1.0e-3

BENCH_LOSS_DB = 36.0
BENCH_ETA = 10.0 ** (-BENCH_LOSS_DB / 10.0)
BENCH_Y0 = 0.8e-5
BENCH_E_DET = 0.025

BENCH_TOTAL_PULSES = 1_500_000_000
BENCH_RATIO = (10.0, 4.0, 1.0)
BENCH_N_SIGNAL = 1_000_000_000

# measured reference observables of the benchmark session
REF_Q_SIGNAL = 1.01e-4
REF_Q_DECOY = 1.06e-4
REF_E_SIGNAL = 0.0633
REF_KEY_RATE = 5.065e-6
REF_SECURE_BITS = 5065

# one-detector phase-coding receiver
BENCH_Q_SIFT = 0.25
BENCH_F_EC = 1.22


def bench_channel(eta: float = BENCH_ETA) -> ChannelParams:
    return ChannelParams(eta=eta, y0=BENCH_Y0, e_det=BENCH_E_DET, e0=0.5)


def bench_signal_source(p_cor: float = BENCH_P_COR) -> HspsSource:
    return HspsSource(HspsParams(p_cor=p_cor, mu_acc=BENCH_MU_SIGNAL, d_i=BENCH_D_I))


def bench_decoy_source(p_cor: float = BENCH_P_COR) -> HspsSource:
    return HspsSource(HspsParams(p_cor=p_cor, mu_acc=BENCH_MU_DECOY, d_i=BENCH_D_I))


def bench_config(
    n_sigma: float = 10.0,
    seed: int = 0,
    q_sift: float = BENCH_Q_SIFT,
    eta: float = BENCH_ETA,
    vacuum_mu: float = BENCH_MU_VACUUM,
) -> ExperimentConfig:
    return ExperimentConfig(
        source_signal=bench_signal_source(),
        source_decoy=bench_decoy_source(),
        vacuum_mu=vacuum_mu,
        channel=bench_channel(eta),
        protocol=ProtocolParams(q_sift=q_sift, f_ec=BENCH_F_EC),
        total_pulses=BENCH_TOTAL_PULSES,
        intensity_ratio=BENCH_RATIO,
        fluctuation=FluctuationPolicy(n_sigma),
        rng_seed=seed,
    )
