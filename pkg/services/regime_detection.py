# services/regime_detection.py
"""Classifies simulated price series: price war, collusion or competitive collapse."""
from core.exceptions import MarketError
from models.market import DetectorThresholds, RegimeReport
from typing import Tuple
import logging

import numpy as np

logger = logging.getLogger(__name__)

TOLERANCE = 1e-9


def _as_matrix(price_series) -> np.ndarray:
    """Per-tick price vectors as a (ticks, sellers) array; a flat track is one seller."""
    series = np.asarray(price_series, dtype=float)
    if series.ndim == 1:
        series = series[:, None]
    if series.ndim != 2 or series.shape[0] == 0:
        raise MarketError("price series must be a nonempty sequence of prices or price vectors")
    return series


def _mean_and_cv(track: np.ndarray) -> Tuple[float, float]:
    mean = float(track.mean())
    cv = float(track.std() / mean) if mean > 0 else 0.0
    return mean, cv


def detect_price_war(price_series, min_drop_run: int, min_reset: float) -> RegimeReport:
    """Count resets on the market-minimum price track.

    A reset is an upward jump of at least `min_reset` right after a nonincreasing
    run of at least `min_drop_run` points. Two or more resets make a price war.
    Each reset closes one descent cycle; a trailing descent of at least
    `min_drop_run` points falling by `min_reset` closes one more.
    """
    if min_drop_run < 2 or min_reset <= 0:
        raise MarketError("detect_price_war needs min_drop_run >= 2 and min_reset > 0")
    track = _as_matrix(price_series).min(axis=1)

    peaks, troughs = [], []
    run_length = 1
    for i in range(1, track.size):
        delta = track[i] - track[i - 1]
        if delta <= TOLERANCE:
            run_length += 1
            continue
        if delta >= min_reset - TOLERANCE and run_length >= min_drop_run:
            troughs.append(float(track[i - 1]))
            peaks.append(float(track[i]))
        run_length = 1

    cycles = len(peaks)
    trailing_drop = track[track.size - run_length] - track[-1]
    if peaks and run_length >= min_drop_run and trailing_drop >= min_reset - TOLERANCE:
        cycles += 1

    mean, cv = _mean_and_cv(track)
    if len(peaks) >= 2:
        return RegimeReport(
            classification="PriceWar",
            cycle_count=cycles,
            mean_trough=float(np.mean(troughs)),
            mean_peak=float(np.mean(peaks)),
            window_mean_price=mean,
            window_cv=cv,
            reset_peaks=peaks,
            reset_troughs=troughs,
        )
    return RegimeReport(
        classification="Indeterminate",
        window_mean_price=mean,
        window_cv=cv,
        reset_peaks=peaks,
        reset_troughs=troughs,
    )


def detect_collusion(price_series, c: float, window: int, margin: float, cv_max: float) -> RegimeReport:
    """Collusive when the last `window` ticks stay high and steady.

    The track is the per-tick mean price across sellers.
    """
    series = _as_matrix(price_series)
    if series.shape[0] < window:
        raise MarketError(f"series of {series.shape[0]} ticks is shorter than window {window}")
    track = series[-window:].mean(axis=1)
    mean, cv = _mean_and_cv(track)
    collusive = mean >= c + margin - TOLERANCE and cv <= cv_max + TOLERANCE
    return RegimeReport(
        classification="Collusive" if collusive else "Indeterminate",
        window_mean_price=mean,
        window_cv=cv,
    )


def classify_regime(price_series, c: float, price_tick: float,
                    thresholds: DetectorThresholds) -> RegimeReport:
    """PriceWar, then Collusive, then Competitive; Indeterminate otherwise."""
    series = _as_matrix(price_series)
    war = detect_price_war(series, thresholds.min_drop_run, thresholds.reset_ticks * price_tick)
    if war.classification == "PriceWar":
        logger.info(f"⚔️  Price war detected: {war.cycle_count} cycles")
        return war

    window = min(thresholds.collusion_window, series.shape[0])
    collusion = detect_collusion(
        series, c, window,
        thresholds.collusion_margin_ticks * price_tick,
        thresholds.collusion_cv_max,
    )
    if collusion.classification == "Collusive":
        logger.info(f"🤝 Collusive pricing: window mean {collusion.window_mean_price:.4f}")
        return collusion

    ceiling = c + thresholds.competitive_margin_ticks * price_tick
    if float(series[-window:].max()) <= ceiling + TOLERANCE:
        logger.info("📉 Competitive collapse to marginal cost")
        return collusion.model_copy(update={"classification": "Competitive"})

    logger.info("❔ No regime matched")
    return collusion
