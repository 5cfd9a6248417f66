import numpy as np

from extgranger.estimator import ConditioningSpec

VARIANTS = ("unadjusted", "threshold", "ball", "both_tails", "lagged")


def random_case(rng: np.random.Generator, variant: str):
    """Random (x, y, Z, spec) with n <= 200, d <= 3; some cases carry ties."""
    n = int(rng.integers(20, 201))
    d = int(rng.integers(0, 4))
    data = rng.standard_t(3, size=(n, 2 + d))
    if rng.random() < 0.3:
        data = np.round(data, 1)
    x, y, Z = data[:, 0], data[:, 1], data[:, 2:]
    kw = dict(
        variant=variant,
        nu=float(rng.choice([1 / 3, 0.4, 0.5, 0.6])),
        q_F=float(rng.choice([0.0, 0.3, 0.5])),
        q_Y=float(rng.uniform(0.6, 0.95)),
        p_y=int(rng.integers(1, 4)),
    )
    if rng.random() < 0.5 and d:
        kw["q_Z"] = tuple(float(q) for q in rng.uniform(0.7, 0.97, size=d))
    if variant == "lagged":
        kw["p_x"] = int(rng.integers(1, 4))
    if variant == "ball":
        kw["center"] = tuple(float(v) for v in np.median(data[:, 1:], axis=0))
        kw["radius"] = float(rng.uniform(0.8, 2.5))
    if variant == "both_tails":
        if rng.random() < 0.5:
            kw["x_band"] = (float(rng.uniform(0.02, 0.2)), float(rng.uniform(0.8, 0.98)))
        if rng.random() < 0.5:
            kw["y_band"] = (float(rng.uniform(0.05, 0.3)), float(rng.uniform(0.7, 0.95)))
        if rng.random() < 0.5 and d:
            kw["z_bands"] = tuple(
                (float(rng.uniform(0.02, 0.15)), float(rng.uniform(0.85, 0.98))) for _ in range(d)
            )
    return x, y, Z, kw


def spec_from(kw) -> ConditioningSpec:
    return ConditioningSpec(**kw)
