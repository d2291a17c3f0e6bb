"""Regenerate the shipped CSV fixtures (deterministic in the seeds below)."""

from pathlib import Path

import numpy as np

from gausscauchy.io import write_csv
from gausscauchy.ssm import SsmParams, simulate_ssm
from gausscauchy.voigt import sample

DATA = Path(__file__).parent / "data"
VOIGT_SEED = 2024
XLK_SEED = 6700
XLK_PARAMS = SsmParams(mu=-1.9420, phi=0.9716, tau=0.1138, family="gcc", sigma=0.1817,
                       gamma=0.0199)


def voigt_rows():
    y = sample((1.0, 1.0, 0.1), 10_000, VOIGT_SEED)
    return [{"y": v} for v in y]


def xlk_rows():
    path = simulate_ssm(XLK_PARAMS, 6700, XLK_SEED)
    days = np.arange(np.datetime64("1998-12-22"), np.datetime64("2030-01-01"))
    days = days[np.is_busday(days)][:6700]
    return [{"date": str(d), "y": v} for d, v in zip(days, path.y)]


def main():
    DATA.mkdir(exist_ok=True)
    write_csv(DATA / "voigt_1_1_0.1.csv", voigt_rows(), ("y",))
    write_csv(DATA / "xlk_like.csv", xlk_rows(), ("date", "y"))


if __name__ == "__main__":
    main()
