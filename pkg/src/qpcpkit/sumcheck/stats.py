"""Monte-Carlo acceptance statistics with per-trial sub-seeds."""

from __future__ import annotations

from collections import Counter
from typing import Callable

import numpy as np
from statsmodels.stats.proportion import proportion_confint

from .protocol import Verdict


def trial_seeds(seed: int, trials: int) -> list[int]:
    children = np.random.SeedSequence(seed).spawn(trials)
    return [int(c.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1)) for c in children]


def wilson_interval(successes: int, trials: int, confidence: float = 0.99) -> tuple[float, float]:
    lo, hi = proportion_confint(successes, trials, alpha=1 - confidence, method="wilson")
    return float(lo), float(hi)


def soundness_monte_carlo(run_trial: Callable[[int], Verdict], trials: int, seed: int = 0,
                          confidence: float = 0.99) -> dict:
    """Run ``run_trial(sub_seed)`` for each trial and summarize the verdicts.

    The histogram keys are "stage:round" of each rejection (round n+1 is the final check).
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    accepted = 0
    errors = 0
    hist: Counter = Counter()
    for s in trial_seeds(seed, trials):
        v = run_trial(s)
        if v.accepted:
            accepted += 1
        elif v.status == "protocol_error":
            errors += 1
        else:
            hist[f"{v.stage}:{v.round}"] += 1
    lo, hi = wilson_interval(accepted, trials, confidence)
    return {"trials": trials, "accepted": accepted, "acceptance_rate": accepted / trials,
            "ci": [lo, hi], "confidence": confidence, "protocol_errors": errors,
            "rejections": dict(sorted(hist.items())), "seed": seed}
