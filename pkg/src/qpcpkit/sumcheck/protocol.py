"""Verifier and prover state machines for the product-basis trace protocol.

Both sides are sans-IO: ``handle(frame)`` returns the frames to send back.
The same machines run over the in-process driver and over TCP, so a fixed
seed gives the same transcript on either transport.
"""

from __future__ import annotations

import hashlib
import json
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .. import wire
from ..fileio import dumps_hamiltonian, loads_hamiltonian
from ..hamiltonian import LocalHamiltonian
from ..wire import ErrorCode, Frame, FrameType, ProtocolError
from . import engine
from . import fixedpoint as fx

MODES = ("standalone", "nested")
MIN_P = 16
# |value| * 2^P must fit in a signed 128-bit field; |Tr A| <= 2^n * 2^ell
WIRE_HEADROOM = 126


@dataclass(frozen=True, eq=False)
class ProtocolParams:
    hamiltonian: LocalHamiltonian
    ell: int
    P: int = 64
    claim: complex = 0.0
    seed: int = 0
    mode: str = "standalone"

    def __post_init__(self):
        h = self.hamiltonian
        if h.n < 1:
            raise ValueError("need n >= 1")
        if any(d != 2 for d in h.site_dims):
            raise ValueError("the protocol runs on qubits")
        if self.ell < 1:
            raise ValueError("need ell >= 1")
        if not MIN_P <= self.P <= fx.MAX_P:
            raise ValueError(f"P must lie in [{MIN_P}, {fx.MAX_P}]")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if h.n + self.ell + self.P > WIRE_HEADROOM:
            raise ValueError("n + ell + P too large for 128-bit fixed-point fields")
        if self.ell > 0xFFFF or h.n > 0xFFFF:
            raise ValueError("n and ell must fit in 16 bits")

    @property
    def n(self) -> int:
        return self.hamiltonian.n

    @property
    def stages(self) -> int:
        return self.ell if self.mode == "nested" else 1

    def claim_fixed(self) -> tuple[int, int]:
        return fx.cfixed(self.claim, self.P)


@dataclass(frozen=True)
class Verdict:
    status: str  # "accept" | "reject" | "protocol_error"
    stage: int = 0
    round: int = 0
    reason: str = ""

    @property
    def accepted(self) -> bool:
        return self.status == "accept"


@dataclass
class Transcript:
    params: dict
    rounds: list = field(default_factory=list)
    finals: list = field(default_factory=list)
    verdict: dict | None = None

    def as_dict(self) -> dict:
        return {"params": self.params, "rounds": self.rounds, "finals": self.finals,
                "verdict": self.verdict}

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True)


# --- verifier -----------------------------------------------------------------------------

class Verifier:
    def __init__(self, params: ProtocolParams):
        self.params = params
        self.h = params.hamiltonian
        self.rng = np.random.default_rng(params.seed)
        self.tol = fx.tolerance(params.P)
        self.ham_json = dumps_hamiltonian(self.h)
        self.transcript = Transcript({
            "n": params.n, "ell": params.ell, "P": params.P, "mode": params.mode,
            "claim": list(params.claim_fixed()), "seed": params.seed, "tau": self.tol,
            "hamiltonian_sha256": hashlib.sha256(self.ham_json.encode()).hexdigest(),
        })
        self.verdict: Verdict | None = None
        self._buf = b""
        self._expect = "hello"
        self.stage = 1
        self.round = 0
        self.stage_claim = params.claim_fixed()
        self.prev = None      # last accepted response
        self.pending = None   # challenge sent with the next expected round
        self.current: list[fx.ChallengeState] = []
        self.stage_vectors: list[list[np.ndarray]] = []

    @property
    def done(self) -> bool:
        return self.verdict is not None

    # byte-level entry point: decode errors become protocol errors, never exceptions
    def feed(self, data: bytes) -> list[Frame]:
        if self.done:
            return []
        self._buf += data
        try:
            frames, self._buf = wire.decode_frames(self._buf)
        except ProtocolError as exc:
            return self.fail(exc.code, exc.message)
        out = []
        for f in frames:
            out.extend(self.handle(f))
            if self.done:
                break
        return out

    def fail(self, code: ErrorCode, message: str) -> list[Frame]:
        if self.done:
            return []
        return [wire.error(code, message)] + self._finish("protocol_error", message)

    def handle(self, frame: Frame) -> list[Frame]:
        if self.done:
            return []
        try:
            return self._dispatch(frame)
        except ProtocolError as exc:
            return self.fail(exc.code, exc.message)
        except Exception as exc:  # a verifier bug must not look like Accept
            return self.fail(ErrorCode.INTERNAL, f"{type(exc).__name__}: {exc}")

    def _dispatch(self, frame: Frame) -> list[Frame]:
        if frame.type == FrameType.ERROR:
            code, msg = wire.parse_error(frame)
            return self._finish("protocol_error", f"prover error {code}: {msg}")
        if self._expect == "hello":
            if frame.type != FrameType.HELLO:
                raise ProtocolError(ErrorCode.UNEXPECTED, "expected HELLO")
            wire.parse_hello(frame)
            p = self.params
            mode = MODES.index(p.mode)
            self._expect = "response"
            self.round = 1
            return [wire.params(p.n, p.ell, p.P, mode, p.claim_fixed(), self.ham_json),
                    wire.challenge(1, 1, None)]
        if frame.type != FrameType.RESPONSE:
            raise ProtocolError(ErrorCode.UNEXPECTED, f"expected RESPONSE, got type {frame.type}")
        stage, rnd, a = wire.parse_response(frame)
        if (stage, rnd) != (self.stage, self.round):
            raise ProtocolError(ErrorCode.UNEXPECTED,
                                f"response for ({stage}, {rnd}), expected ({self.stage}, {self.round})")
        return self._on_response(a)

    def _on_response(self, a) -> list[Frame]:
        P, n = self.params.P, self.params.n
        lhs = fx.trace(a)
        if self.round == 1:
            rhs = self.stage_claim
        else:
            rhs = fx.sandwich(self.prev, self.pending.alpha, self.pending.beta, P)
        ok = fx.within(lhs, rhs, self.tol)
        self.transcript.rounds.append({
            "stage": self.stage, "round": self.round,
            "challenge": None if self.round == 1 else list(self.pending.ints()),
            "response": [v for entry in a for v in entry],
            "lhs": list(lhs), "rhs": list(rhs), "ok": ok})
        if not ok:
            what = "Tr a(1) != claim" if self.round == 1 else "consistency check failed"
            return self._finish("reject", what)
        self.prev = a
        psi = fx.sample_challenge(self.rng, P)
        self.current.append(psi)
        if self.round < n:
            self.round += 1
            self.pending = psi
            return [wire.challenge(self.stage, self.round, psi.ints())]
        return self._on_final(psi)

    def _on_final(self, psi: fx.ChallengeState) -> list[Frame]:
        P = self.params.P
        prover_value = fx.sandwich(self.prev, psi.alpha, psi.beta, P)
        self.stage_vectors.append([c.vector() for c in self.current])
        out = [wire.final(self.stage, psi.ints())]
        last = self.stage == self.params.stages
        record = {"stage": self.stage, "challenge": list(psi.ints()),
                  "prover_value": list(prover_value), "verifier_value": None}
        self.transcript.finals.append(record)
        if not last:
            # the stage's claimed scalar is the next stage's claimed trace
            self.stage += 1
            self.round = 1
            self.stage_claim = prover_value
            self.prev = self.pending = None
            self.current = []
            return out + [wire.challenge(self.stage, 1, None)]
        if self.params.mode == "nested":
            own = engine.nested_product_value(self.h, self.stage_vectors)
        else:
            own = engine.power_value(self.h, self.params.ell, self.stage_vectors[0])
        own_fixed = fx.cfixed(own, P)
        record["verifier_value"] = list(own_fixed)
        self.round = self.params.n + 1
        if fx.within(prover_value, own_fixed, self.tol):
            return out + self._finish("accept", "all checks passed")
        return out + self._finish("reject", "final check failed")

    def _finish(self, status: str, reason: str) -> list[Frame]:
        self.verdict = Verdict(status, self.stage, self.round, reason)
        self.transcript.verdict = {"status": status, "stage": self.stage,
                                   "round": self.round, "reason": reason}
        return [wire.verdict(status, self.stage, self.round, reason)]


# --- prover strategies ------------------------------------------------------------------

class Honest:
    name = "honest"

    def respond(self, stage, rnd, global_round, honest, expected):
        return honest


@dataclass
class Perturb:
    """Adds ``delta`` to the honest response at one (stage, round); honest elsewhere."""

    round: int
    delta: np.ndarray = None
    stage: int = 1
    name = "perturb"

    def __post_init__(self):
        d = 0.1 * np.diag([1.0, -1.0]) if self.delta is None else np.asarray(self.delta)
        d = d.astype(complex)
        if d.shape != (2, 2) or np.max(np.abs(d - d.conj().T)) > 1e-12:
            raise ValueError("delta must be a Hermitian 2x2 matrix")
        if self.round < 1:
            raise ValueError("round must be positive")
        self.delta = d

    def respond(self, stage, rnd, global_round, honest, expected):
        if (stage, rnd) == (self.stage, self.round):
            return honest + self.delta
        return honest


@dataclass
class SwitchTruthful:
    """Keeps a false claim alive by shifting the trace, then turns honest.

    Rounds are counted globally across stages; ``switch_round=None`` never switches.
    """

    switch_round: int | None = None
    name = "switch"

    def respond(self, stage, rnd, global_round, honest, expected):
        if self.switch_round is not None and global_round >= self.switch_round:
            return honest
        shift = (expected - np.trace(honest)) / 2
        return honest + shift * np.eye(2)


# --- prover machine -----------------------------------------------------------------------

class Prover:
    def __init__(self, strategy=None, name: str = "prover"):
        self.strategy = strategy or Honest()
        self.name = name
        self.done = False
        self.verdict: Verdict | None = None
        self._params = None

    def start(self) -> list[Frame]:
        return [wire.hello(self.name)]

    def handle(self, frame: Frame) -> list[Frame]:
        if self.done:
            return []
        try:
            return self._dispatch(frame)
        except ProtocolError as exc:
            self.done = True
            return [wire.error(exc.code, exc.message)]
        except Exception as exc:
            self.done = True
            return [wire.error(ErrorCode.INTERNAL, f"{type(exc).__name__}: {exc}")]

    def _dispatch(self, frame: Frame) -> list[Frame]:
        t = frame.type
        if t == FrameType.VERDICT:
            status, stage, rnd, reason = wire.parse_verdict(frame)
            self.verdict = Verdict(status, stage, rnd, reason)
            self.done = True
            return []
        if t == FrameType.ERROR:
            self.done = True
            return []
        if t == FrameType.PARAMS:
            if self._params is not None:
                raise ProtocolError(ErrorCode.UNEXPECTED, "duplicate PARAMS")
            p = wire.parse_params(frame)
            if p["mode"] >= len(MODES):
                raise ProtocolError(ErrorCode.BAD_PARAMS, "unknown mode")
            try:
                h = loads_hamiltonian(p["hamiltonian"], "<params>")
            except ValueError as exc:
                raise ProtocolError(ErrorCode.BAD_PARAMS, str(exc)) from None
            if h.n != p["n"]:
                raise ProtocolError(ErrorCode.BAD_PARAMS, "n disagrees with the Hamiltonian")
            self._params = p
            self.h = h
            self.P = p["P"]
            self.M = engine.m_matrix(h)
            self.claim = fx.cfloat(p["claim"], self.P)
            self.finished: list[np.ndarray] = []
            self.stage_value = self.claim
            self.global_round = 0
            self.stage = 0
            return []
        if self._params is None:
            raise ProtocolError(ErrorCode.UNEXPECTED, "PARAMS must come first")
        if t == FrameType.CHALLENGE:
            return self._on_challenge(*wire.parse_challenge(frame))
        if t == FrameType.FINAL:
            stage, state = wire.parse_final(frame)
            if stage != self.stage or self.engine.round != self.h.n:
                raise ProtocolError(ErrorCode.UNEXPECTED, "FINAL out of order")
            psi = self._state(state)
            self.stage_value = complex(np.vdot(psi, self.sent @ psi))
            self.stage_sites.append(psi)
            self.finished.append(engine.product_vector(self.stage_sites))
            return []
        raise ProtocolError(ErrorCode.UNEXPECTED, f"prover cannot handle frame type {t}")

    def _state(self, ints) -> np.ndarray:
        st = fx.ChallengeState((ints[0], ints[1]), (ints[2], ints[3]), self.P)
        if st.norm_error() > 2.0 ** (-self.P + 2):
            raise ProtocolError(ErrorCode.MALFORMED, "challenge state is not normalized")
        return st.vector()

    def _on_challenge(self, stage, rnd, state):
        n, ell = self.h.n, self._params["ell"]
        if rnd == 1:
            if state is not None or stage != self.stage + 1 or stage > ell:
                raise ProtocolError(ErrorCode.UNEXPECTED, f"bad opening challenge for stage {stage}")
            self.stage = stage
            A = engine.stage_operator(self.M, ell, stage, self.finished)
            self.engine = engine.RoundContraction(A, n)
            self.stage_sites: list[np.ndarray] = []
            expected = self.stage_value
        else:
            if state is None or stage != self.stage or rnd != self.engine.round + 1 or rnd > n:
                raise ProtocolError(ErrorCode.UNEXPECTED, f"unexpected challenge ({stage}, {rnd})")
            psi = self._state(state)
            self.stage_sites.append(psi)
            expected = complex(np.vdot(psi, self.sent @ psi))
            self.engine.project(psi)
        self.global_round += 1
        honest = self.engine.response()
        a = self.strategy.respond(stage, rnd, self.global_round, honest, expected)
        fixed = fx.mat_to_fixed(a, self.P)
        self.sent = fx.mat_from_fixed(fixed, self.P)
        return [wire.response(stage, rnd, fixed)]


# --- drivers --------------------------------------------------------------------------------

def run_in_process(verifier: Verifier, prover: Prover) -> tuple[Verdict, Transcript]:
    """Shuttle encoded frames between the two machines until the verifier decides."""
    to_v = deque(prover.start())
    to_p: deque = deque()
    while not verifier.done:
        if to_v:
            to_p.extend(verifier.feed(to_v.popleft().encode()))
        elif to_p:
            frame = wire.decode_frame(to_p.popleft().encode())
            to_v.extend(prover.handle(frame))
        else:
            to_p.extend(verifier.fail(ErrorCode.DISCONNECT, "prover stopped responding"))
    while to_p:
        prover.handle(wire.decode_frame(to_p.popleft().encode()))
    return verifier.verdict, verifier.transcript


def run_trace_protocol(params: ProtocolParams, prover=None) -> tuple[Verdict, Transcript]:
    """Single invocation on A = M^ell; the verifier evaluates the final scalar itself."""
    if params.mode != "standalone":
        params = ProtocolParams(params.hamiltonian, params.ell, params.P, params.claim,
                                params.seed, "standalone")
    return run_in_process(Verifier(params), _as_prover(prover))


def nested_power_protocol(params: ProtocolParams, prover=None) -> tuple[Verdict, Transcript]:
    """ell chained invocations, closing with a product of ell local matrix elements."""
    if params.mode != "nested":
        params = ProtocolParams(params.hamiltonian, params.ell, params.P, params.claim,
                                params.seed, "nested")
    return run_in_process(Verifier(params), _as_prover(prover))


def _as_prover(p) -> Prover:
    if p is None:
        return Prover()
    return p if isinstance(p, Prover) else Prover(p)


def true_trace(h: LocalHamiltonian, ell: int) -> float:
    """Tr(M^ell) from the dense spectrum."""
    vals = np.linalg.eigvalsh(engine.m_matrix(h))
    return float(np.sum(vals**ell))
