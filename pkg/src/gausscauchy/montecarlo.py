"""Replication harness shared by the MLE and QMLE Monte Carlo studies."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

__all__ = ["McSummary", "summarize", "map_ordered", "worker_count"]

TAIL_Z = 1.96


def worker_count(requested: int | None = None) -> int:
    """Number of worker processes, capped by the ``GCC_THREADS`` environment variable."""
    cap = os.environ.get("GCC_THREADS")
    n = requested if requested is not None else 1
    if cap:
        try:
            n = min(n, int(cap)) if requested is not None else int(cap)
        except ValueError as exc:
            raise ValueError(f"GCC_THREADS must be an integer, got {cap!r}") from exc
    return max(1, n)


def map_ordered(fn: Callable, items: Iterable, workers: int = 1) -> list:
    """``[fn(x) for x in items]``, optionally across processes; order preserved."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    chunk = max(1, len(items) // (8 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=chunk))


@dataclass(frozen=True)
class McSummary:
    """Per-parameter Monte Carlo summary.

    ``alpha_l`` and ``alpha_r`` are the frequencies with which the
    standardized error ``(theta_hat - theta_0) / std`` falls below -1.96 or
    above +1.96, where ``std`` is the empirical standard deviation.
    """

    names: tuple[str, ...]
    truth: np.ndarray
    n: int
    reps: int
    n_failed: int
    mean: np.ndarray
    std: np.ndarray
    astd: np.ndarray
    alpha_l: np.ndarray
    alpha_r: np.ndarray
    estimates: np.ndarray

    def mc_se(self) -> np.ndarray:
        """Monte Carlo standard error of the mean estimate."""
        return self.std / np.sqrt(self.reps - self.n_failed)

    def rows(self) -> list[dict]:
        return [
            {"param": name, "n": self.n, "mean": float(self.mean[i]), "std": float(self.std[i]),
             "astd": float(self.astd[i]), "alpha_l": float(self.alpha_l[i]),
             "alpha_r": float(self.alpha_r[i])}
            for i, name in enumerate(self.names)
        ]


def summarize(names: Sequence[str], truth, estimates, n: int, astd) -> McSummary:
    """Reduce a (reps, k) array of estimates; NaN rows mark failed replications."""
    est = np.asarray(estimates, dtype=float)
    truth = np.asarray(truth, dtype=float)
    ok = np.all(np.isfinite(est), axis=1)
    good = est[ok]
    if good.shape[0] == 0:
        raise RuntimeError("every replication failed")
    mean = good.mean(axis=0)
    std = good.std(axis=0, ddof=1) if good.shape[0] > 1 else np.zeros(len(names))
    with np.errstate(divide="ignore", invalid="ignore"):
        z = (good - truth) / std
    alpha_l = np.where(std > 0, np.mean(z < -TAIL_Z, axis=0), 0.0)
    alpha_r = np.where(std > 0, np.mean(z > TAIL_Z, axis=0), 0.0)
    return McSummary(tuple(names), truth, int(n), est.shape[0], int((~ok).sum()), mean, std,
                     np.asarray(astd, dtype=float), alpha_l, alpha_r, est)
