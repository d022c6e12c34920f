"""Error metrics between drive and response systems, and trace containers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import ModelParams, parseval_power

__all__ = [
    "RunTrace",
    "error_coeffs",
    "normalized_mse",
    "cost_C",
    "param_sq_err",
    "tail_average",
]


@dataclass
class RunTrace:
    """Per-run time series: times (n,), e2_norm (n,), cost (n,),
    theta_hat (n, 3), err2 (n, 3) raw squared parameter errors."""

    times: np.ndarray
    e2_norm: np.ndarray
    cost: np.ndarray
    theta_hat: np.ndarray
    err2: np.ndarray

    def __len__(self) -> int:
        return self.times.shape[0]


def error_coeffs(a_master, b_slave) -> np.ndarray:
    """Coefficient error a - b, zero-extending the shorter vector.

    Modes the slave does not carry contribute the full drive coefficient;
    modes beyond the drive truncation contribute -b_k.
    """
    a_master = np.asarray(a_master, dtype=np.complex128)
    b_slave = np.asarray(b_slave, dtype=np.complex128)
    n = max(a_master.shape[0], b_slave.shape[0])
    e = np.zeros(n, dtype=np.complex128)
    e[: a_master.shape[0]] = a_master
    e[: b_slave.shape[0]] -= b_slave
    return e


def normalized_mse(e, a_master) -> float:
    """Field-level mean squared error normalized by the drive power.

    Both powers are evaluated through Parseval, so this equals the ratio of
    the spatial integrals of the squared error field and squared drive field.
    """
    denom = parseval_power(a_master)
    if denom == 0.0:
        raise ValueError("drive power is zero, normalization undefined")
    return parseval_power(e) / denom


def cost_C(e) -> float:
    """Sum of squared coefficient errors, equal to (E^2 + |e_0|^2) / 2."""
    e = np.asarray(e)
    return float(np.sum(np.abs(e) ** 2))


def param_sq_err(theta_hat: ModelParams, theta_true: ModelParams,
                 normalized: bool = False) -> np.ndarray:
    """Componentwise squared parameter error, optionally relative."""
    d = theta_hat.as_array() - theta_true.as_array()
    if normalized:
        ref = theta_true.as_array()
        if np.any(ref == 0.0):
            raise ValueError("cannot normalize by a zero true parameter")
        d = d / ref
    return d * d


def tail_average(series, times, fraction: float) -> float:
    """Trapezoid average of the series over the final fraction of the span.

    The left endpoint of the window is interpolated, so the result is exact
    for linear series regardless of where the cut falls between samples.
    """
    series = np.asarray(series, dtype=np.float64)
    times = np.asarray(times, dtype=np.float64)
    if series.shape != times.shape or series.ndim != 1 or series.shape[0] < 2:
        raise ValueError("need matching 1-D series and times with >= 2 samples")
    if not (0.0 < fraction <= 1.0):
        raise ValueError(f"fraction must be in (0, 1], got {fraction}")
    if np.any(np.diff(times) <= 0):
        raise ValueError("times must be strictly increasing")
    t_cut = times[-1] - fraction * (times[-1] - times[0])
    mask = times > t_cut
    ts = np.concatenate([[t_cut], times[mask]])
    ys = np.concatenate([[np.interp(t_cut, times, series)], series[mask]])
    return float(np.trapezoid(ys, ts) / (ts[-1] - ts[0]))
