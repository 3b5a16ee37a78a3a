"""Binary-tree sum check of a diagonal trace, the baseline that a lying prover escapes."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .protocol import Verdict

EXACT_TOL = 1e-9
MAX_N = 30


@dataclass(frozen=True)
class DiagonalOracle:
    """Diagonal entries A_{c1...cn} evaluated lazily from the bit path."""

    n: int
    entry: Callable[[tuple[int, ...]], float]

    def __post_init__(self):
        if not 1 <= self.n <= MAX_N:
            raise ValueError(f"n must lie in [1, {MAX_N}]")

    def partial_sum(self, prefix: tuple[int, ...]) -> float:
        """Sum over all completions of ``prefix``; exponential, meant for the prover side."""
        free = self.n - len(prefix)
        return float(sum(self.entry(prefix + tuple((k >> (free - 1 - j)) & 1 for j in range(free)))
                         for k in range(2**free)))

    def total(self) -> float:
        return self.partial_sum(())


def single_spike_diagonal(n: int, spike: tuple[int, ...] | None = None, value: float = 2.0,
                          base: float = 1.0) -> DiagonalOracle:
    spike = tuple([0] * n) if spike is None else tuple(spike)
    if len(spike) != n:
        raise ValueError("spike index must have n bits")
    return DiagonalOracle(n, lambda bits: value if tuple(bits) == spike else base)


class HonestTree:
    def split(self, oracle: DiagonalOracle, prefix, claim):
        return oracle.partial_sum(prefix + (0,)), oracle.partial_sum(prefix + (1,))


@dataclass
class NaiveTreeCheat:
    """Hides a single wrong entry: the lie rides on whichever child contains ``target``."""

    target: tuple[int, ...]

    def split(self, oracle: DiagonalOracle, prefix, claim):
        a0 = oracle.partial_sum(prefix + (0,))
        a1 = oracle.partial_sum(prefix + (1,))
        lie = claim - (a0 + a1)
        depth = len(prefix)
        if tuple(self.target[:depth]) == tuple(prefix):
            if self.target[depth] == 0:
                a0 += lie
            else:
                a1 += lie
        else:
            a0 += lie  # off the target path any lie is the prover's problem
        return a0, a1


def naive_tree_protocol(oracle: DiagonalOracle, claimed: float, prover=None,
                        rng: np.random.Generator | int | None = 0) -> tuple[Verdict, dict]:
    prover = prover or HonestTree()
    rng = np.random.default_rng(rng)
    transcript = {"n": oracle.n, "claim": claimed, "rounds": []}
    claim = float(claimed)
    prefix: tuple[int, ...] = ()
    for i in range(1, oracle.n + 1):
        a0, a1 = prover.split(oracle, prefix, claim)
        ok = abs(a0 + a1 - claim) <= EXACT_TOL
        coin = int(rng.integers(0, 2)) if ok else None
        transcript["rounds"].append({"round": i, "A0": a0, "A1": a1, "coin": coin, "ok": ok})
        if not ok:
            verdict = Verdict("reject", 1, i, "A0 + A1 != claim")
            transcript["verdict"] = verdict.status
            return verdict, transcript
        prefix = prefix + (coin,)
        claim = a0 if coin == 0 else a1
    own = float(oracle.entry(prefix))
    transcript["final"] = {"path": list(prefix), "claimed": claim, "entry": own}
    if abs(own - claim) <= EXACT_TOL:
        verdict = Verdict("accept", 1, oracle.n + 1, "all checks passed")
    else:
        verdict = Verdict("reject", 1, oracle.n + 1, "final entry mismatch")
    transcript["verdict"] = verdict.status
    return verdict, transcript
