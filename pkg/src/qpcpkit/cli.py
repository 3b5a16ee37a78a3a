"""Command-line entry point. Reports go to stdout as JSON.

Exit codes: 0 success or accept or below_a, 1 reject or above_b, 2 error, 3 violated promise.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import amplify, fileio, meanfield
from .constructions import (cartesian_product_code, circuit_to_hamiltonian, random_ksat,
                            sat_to_hamiltonian, square_partition_trivial_state, toric_code)
from .hamiltonian import (LocalHamiltonian, PromiseGapSpec, choose_ell, decide_lh, from_pauli,
                          ground_energy, qunsat)
from .linalg import PureState
from .pauli import pauli_energy

EXIT_OK, EXIT_REJECT, EXIT_ERROR, EXIT_VIOLATED = 0, 1, 2, 3


def _emit(report: dict) -> None:
    print(json.dumps(report, sort_keys=True, default=float))


def _read_text(path: str | None) -> tuple[str, str]:
    if path in (None, "-"):
        return sys.stdin.read(), "<stdin>"
    return Path(path).read_text(), path


def _load_ham(path: str | None) -> LocalHamiltonian:
    text, src = _read_text(path)
    return fileio.loads_hamiltonian(text, src)


def _write_ham(h: LocalHamiltonian, out: str | None, summary: dict) -> int:
    if out:
        fileio.save_hamiltonian(h, out)
        _emit({**summary, "output": out})
    else:
        print(fileio.dumps_hamiltonian(h))
    return EXIT_OK


def _ham_summary(h: LocalHamiltonian) -> dict:
    return {"n": h.n, "m": h.m, "locality": h.locality, "site_dims": list(h.site_dims)}


def _parse_blocks(spec: str) -> tuple:
    return tuple(tuple(int(s) for s in blk.split(",")) for blk in spec.split(";") if blk.strip())


# --- command handlers -----------------------------------------------------------------

def cmd_encode_sat(a) -> int:
    text, src = _read_text(a.cnf)
    h = sat_to_hamiltonian(fileio.parse_dimacs(text, src))
    return _write_ham(h, a.output, _ham_summary(h))


def cmd_ground_energy(a) -> int:
    h = _load_ham(a.hamiltonian)
    e0, _ = ground_energy(h)
    _emit({"ground_energy": e0, **_ham_summary(h)})
    return EXIT_OK


def cmd_qunsat(a) -> int:
    h = _load_ham(a.hamiltonian)
    if a.bits:
        bits = [int(b) for b in a.bits]
        if len(bits) != h.n or any(b not in (0, 1) for b in bits):
            raise ValueError("--bits must give one 0/1 value per site")
        vec = np.zeros(h.dim, dtype=complex)
        vec[int(a.bits, 2)] = 1.0
        psi, which = PureState(h.site_dims, vec), a.bits
    else:
        _, psi = ground_energy(h)
        which = "ground"
    _emit({"qunsat": qunsat(h, psi), "state": which, "m": h.m})
    return EXIT_OK


def cmd_decide_lh(a) -> int:
    h = _load_ham(a.hamiltonian)
    decision = decide_lh(h, PromiseGapSpec(a.a, a.b), a.tol)
    e0, _ = ground_energy(h)
    _emit({"decision": decision, "ground_energy": e0, "a": a.a, "b": a.b})
    return {"below_a": EXIT_OK, "above_b": EXIT_REJECT, "violated_promise": EXIT_VIOLATED}[decision]


def cmd_toric(a) -> int:
    ph, lat = toric_code(a.L)
    h = from_pauli(ph)
    h.metadata.update({"source": "toric", "L": a.L})
    return _write_ham(h, a.output, _ham_summary(h))


def cmd_product_code(a) -> int:
    g = fileio.load_edge_list(a.graph)
    ph, data = cartesian_product_code(g)
    h = from_pauli(ph)
    h.metadata.update({"source": "product_code", "plaquettes": len(data.plaquettes),
                       "stars": len(data.stars)})
    return _write_ham(h, a.output, _ham_summary(h))


def cmd_history(a) -> int:
    circuit, bits, witness = fileio.loads_circuit(*_read_text(a.circuit))
    h = circuit_to_hamiltonian(circuit, bits, witness, a.output_qubit)
    return _write_ham(h, a.output, {**_ham_summary(h), "T": circuit.T})


def cmd_amplify(a) -> int:
    if a.graph:
        g = fileio.load_edge_list(a.graph)
    else:
        g = amplify.random_regular_graph(a.n, a.D, seed=a.seed)
    c = amplify.inequality_graph(g, a.d)
    base = amplify.min_unsat(c)
    report = {"n": c.n, "m": c.m, "d": a.d, "t": a.t, "base_unsat": base,
              "backtrack": not a.no_backtrack}
    if c.is_regular():
        walks = amplify.twalk_amplify(c, a.t, backtrack=not a.no_backtrack)
        report.update(walk_constraints=walks.m, walk_unsat=walks.min_unsat())
    if a.naive:
        power = amplify.naive_power(c, a.t)
        report.update(naive_constraints=power.m, naive_unsat=power.min_unsat(),
                      naive_bound=1 - (1 - base) ** a.t)
    _emit(report)
    return EXIT_OK


def _partition(h: LocalHamiltonian, a) -> meanfield.Partition:
    if a.blocks:
        return meanfield.Partition(_parse_blocks(a.blocks), allow_unequal=True)
    return meanfield.Partition.contiguous(h.n, a.r)


def cmd_bh_bound(a) -> int:
    h = _load_ham(a.hamiltonian)
    _, psi = ground_energy(h)
    result = meanfield.bh_inequality_check(h, psi, _partition(h, a), a.W, a.restarts, a.seed)
    _emit(result)
    return EXIT_OK


def cmd_meanfield(a) -> int:
    h = _load_ham(a.hamiltonian)
    state, e_prod = meanfield.product_state_optimize(h, _partition(h, a), a.restarts, a.seed)
    e0, _ = ground_energy(h)
    _emit({"product_energy": e_prod, "ground_energy": e0, "gap": e_prod - e0,
           "blocks": [list(b) for b in state.blocks]})
    return EXIT_OK


def cmd_trivial_square(a) -> int:
    ph, _ = toric_code(a.L)
    state, removed = square_partition_trivial_state(a.L, a.ell)
    e = pauli_energy(ph, state)
    e0 = -float(len(ph.terms))
    _emit({"L": a.L, "ell": a.ell, "m": len(ph.terms), "energy": e, "ground_energy": e0,
           "gap_per_term": (e - e0) / len(ph.terms), "removed": len(removed),
           "removed_fraction": len(removed) / len(ph.terms)})
    return EXIT_OK


# --- sum-check -----------------------------------------------------------------------------

def _strategy(a):
    from .sumcheck import Honest, Perturb, SwitchTruthful
    name = a.strategy
    if name == "honest":
        return Honest()
    if name == "perturb":
        delta = a.delta * np.diag([1.0, -1.0])
        return Perturb(a.round, delta, a.stage)
    if name == "switch":
        return SwitchTruthful(a.switch_round)
    raise ValueError(f"strategy {name!r} needs the naive tree protocol")


def _protocol_params(a, h: LocalHamiltonian, seed: int | None = None):
    from .sumcheck import ProtocolParams, true_trace
    ell = a.ell if a.ell else choose_ell(h.m, h.n, a.gamma)
    claim = a.claim
    if claim is None:
        claim = true_trace(h, ell) + (1.0 if a.strategy == "switch" else 0.0)
    return ProtocolParams(h, ell, a.P, claim, a.seed if seed is None else seed, a.mode)


def _verdict_exit(v) -> int:
    if v is None or v.status == "protocol_error":
        return EXIT_ERROR
    return EXIT_OK if v.accepted else EXIT_REJECT


def _report_verdict(v, transcript=None, extra=None) -> None:
    report = {"status": v.status, "stage": v.stage, "round": v.round, "reason": v.reason}
    if transcript is not None:
        report["rounds"] = len(transcript.rounds)
        report["params"] = transcript.params
    report.update(extra or {})
    _emit(report)


def _split_endpoint(text: str) -> tuple[str, int]:
    host, _, port = text.rpartition(":")
    return host or "127.0.0.1", int(port)


def cmd_sumcheck_local(a) -> int:
    from .sumcheck import Prover, Verifier, run_in_process
    h = _load_ham(a.hamiltonian)
    params = _protocol_params(a, h)
    v, t = run_in_process(Verifier(params), Prover(_strategy(a)))
    if a.log:
        Path(a.log).write_text(t.to_json() + "\n")
    _report_verdict(v, t)
    return _verdict_exit(v)


def cmd_sumcheck_verify(a) -> int:
    from .sumcheck import serve_verifier
    h = _load_ham(a.hamiltonian)
    host, port = _split_endpoint(a.listen)
    v, t = serve_verifier(_protocol_params(a, h), host, port, a.timeout, a.log)
    _report_verdict(v, t)
    return _verdict_exit(v)


def cmd_sumcheck_prove(a) -> int:
    from .sumcheck import Prover, connect_prover
    host, port = _split_endpoint(a.connect)
    v = connect_prover(Prover(_strategy(a)), host, port, a.timeout)
    if v is None:
        _emit({"status": "protocol_error", "reason": "session ended without a verdict"})
        return EXIT_ERROR
    _report_verdict(v)
    return _verdict_exit(v)


def cmd_soundness(a) -> int:
    from .sumcheck import (NaiveTreeCheat, Prover, ProtocolParams, Verifier, naive_tree_protocol,
                           run_in_process, single_spike_diagonal, soundness_monte_carlo)
    if a.strategy in ("naive-cheat", "naive-honest"):
        oracle = single_spike_diagonal(a.n)
        if a.strategy == "naive-cheat":
            prover, claim = NaiveTreeCheat(tuple([0] * a.n)), 2.0**a.n
        else:
            prover, claim = None, oracle.total()
        stats = soundness_monte_carlo(
            lambda s: naive_tree_protocol(oracle, claim, prover, s)[0], a.trials, a.seed)
        stats.update(strategy=a.strategy, n=a.n, expected=1 - 2.0**-a.n, claim=claim)
        _emit(stats)
        return EXIT_OK
    if a.hamiltonian:
        h = _load_ham(a.hamiltonian)
    else:
        rng = np.random.default_rng(a.seed)
        h = sat_to_hamiltonian(random_ksat(a.n, a.clauses, rng))
    base = _protocol_params(a, h)
    strategy = _strategy(a)

    def trial(s):
        p = ProtocolParams(h, base.ell, base.P, base.claim, s, base.mode)
        return run_in_process(Verifier(p), Prover(strategy))[0]

    stats = soundness_monte_carlo(trial, a.trials, a.seed)
    stats.update(strategy=a.strategy, n=h.n, ell=base.ell, P=base.P, mode=base.mode,
                 claim=[base.claim.real, base.claim.imag] if isinstance(base.claim, complex)
                 else base.claim)
    _emit(stats)
    return EXIT_OK


# --- parser ------------------------------------------------------------------------------------

def _protocol_flags(p: argparse.ArgumentParser, with_ham: bool = True) -> None:
    if with_ham:
        p.add_argument("hamiltonian", help="Hamiltonian file, or - for stdin")
    p.add_argument("--ell", type=int, default=0, help="power of M (default: chosen from --gamma)")
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--P", type=int, default=64, help="fixed-point fractional bits")
    p.add_argument("--mode", choices=["standalone", "nested"], default="standalone")
    p.add_argument("--claim", type=float, default=None, help="claimed trace (default: true trace)")
    p.add_argument("--timeout", type=float, default=30.0)
    p.add_argument("--log", help="write the transcript JSON here")


def _strategy_flags(p: argparse.ArgumentParser, extra=()) -> None:
    p.add_argument("--strategy", default="honest",
                   choices=["honest", "perturb", "switch", *extra])
    p.add_argument("--round", type=int, default=1, help="perturbed round")
    p.add_argument("--stage", type=int, default=1, help="perturbed stage")
    p.add_argument("--delta", type=float, default=0.1, help="perturbation size")
    p.add_argument("--switch-round", type=int, default=None)


def _soundness_flags(p: argparse.ArgumentParser) -> None:
    _strategy_flags(p, extra=("naive-cheat", "naive-honest"))
    p.add_argument("--hamiltonian", default=None)
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--clauses", type=int, default=6, help="random 3-SAT size without --hamiltonian")
    p.add_argument("--trials", type=int, default=200)
    _protocol_flags(p, with_ham=False)
    p.set_defaults(func=cmd_soundness)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)

    ap = argparse.ArgumentParser(prog="qpcpkit", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=func)
        return p

    p = add("encode-sat", cmd_encode_sat, "DIMACS CNF to a diagonal Hamiltonian")
    p.add_argument("cnf", nargs="?", default="-")
    p.add_argument("-o", "--output")

    p = add("ground-energy", cmd_ground_energy, "smallest eigenvalue")
    p.add_argument("hamiltonian", nargs="?", default="-")

    p = add("qunsat", cmd_qunsat, "average term energy of a state")
    p.add_argument("hamiltonian", nargs="?", default="-")
    p.add_argument("--bits", help="computational basis state (default: ground state)")

    p = add("decide-lh", cmd_decide_lh, "promise decision below_a / above_b")
    p.add_argument("hamiltonian", nargs="?", default="-")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-9)

    p = add("toric", cmd_toric, "toric code Hamiltonian")
    p.add_argument("--L", type=int, required=True)
    p.add_argument("-o", "--output")

    p = add("product-code", cmd_product_code, "Cartesian product code of a graph")
    p.add_argument("--graph", required=True)
    p.add_argument("-o", "--output")

    p = add("history", cmd_history, "circuit-to-Hamiltonian construction")
    p.add_argument("--circuit", required=True)
    p.add_argument("--output-qubit", type=int, default=0)
    p.add_argument("-o", "--output")

    p = add("amplify", cmd_amplify, "t-walk and naive amplification of a coloring instance")
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--graph", help="edge list (default: random regular graph)")
    p.add_argument("--n", type=int, default=6)
    p.add_argument("--D", type=int, default=3)
    p.add_argument("--d", type=int, default=2, help="alphabet size")
    p.add_argument("--no-backtrack", action="store_true")
    p.add_argument("--naive", action="store_true", help="also run naive powering")

    for name, func, help_ in (("bh-bound", cmd_bh_bound, "product-state approximation bound"),
                              ("meanfield", cmd_meanfield, "best product state")):
        p = add(name, func, help_)
        p.add_argument("hamiltonian", nargs="?", default="-")
        p.add_argument("--r", type=int, default=1, help="contiguous block size")
        p.add_argument("--blocks", help="explicit blocks, e.g. '0,1;2,3'")
        p.add_argument("--restarts", type=int, default=10)
        p.add_argument("--W", type=float, default=1.0)

    p = add("trivial-square", cmd_trivial_square, "square-partition state of the toric code")
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--ell", type=int, required=True)

    p = add("sumcheck", None, "trace protocol sessions")
    ssub = p.add_subparsers(dest="action", required=True)
    q = ssub.add_parser("local", parents=[common], help="verifier and prover in one process")
    _protocol_flags(q)
    _strategy_flags(q)
    q.set_defaults(func=cmd_sumcheck_local)
    q = ssub.add_parser("verify", parents=[common], help="serve one verifier session")
    _protocol_flags(q)
    q.add_argument("--listen", default="127.0.0.1:7878")
    q.set_defaults(func=cmd_sumcheck_verify, strategy="honest")
    q = ssub.add_parser("prove", parents=[common], help="connect as prover")
    q.add_argument("--connect", default="127.0.0.1:7878")
    q.add_argument("--timeout", type=float, default=30.0)
    _strategy_flags(q)
    q.set_defaults(func=cmd_sumcheck_prove)
    q = ssub.add_parser("soundness", parents=[common], help="Monte-Carlo acceptance rate")
    _soundness_flags(q)

    p = add("soundness", cmd_soundness, "alias of 'sumcheck soundness'")
    _soundness_flags(p)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
