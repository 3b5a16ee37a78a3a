"""File formats: Hamiltonian JSON, DIMACS CNF, edge-list graphs, circuit JSON."""

from __future__ import annotations

import json
import re
from pathlib import Path

import networkx as nx
import numpy as np

from .constructions import CnfFormula, QuantumCircuit
from .hamiltonian import LocalHamiltonian, Term

FORMAT_VERSION = 1


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None,
                 source: str = "<input>"):
        self.line, self.column, self.source = line, column, source
        where = source
        if line is not None:
            where += f":{line}"
            if column is not None:
                where += f":{column}"
        super().__init__(f"{where}: {message}")


# --- Hamiltonian files -------------------------------------------------------

def hamiltonian_to_dict(h: LocalHamiltonian) -> dict:
    terms = []
    for t in h.terms:
        entries = [[[float(z.real), float(z.imag)] for z in row] for row in t.matrix]
        term = {"support": list(t.support), "entries": entries}
        if t.label:
            term["label"] = t.label
        terms.append(term)
    out = {"format_version": FORMAT_VERSION, "n": h.n,
           "site_dims": list(h.site_dims), "terms": terms}
    if h.metadata:
        out["metadata"] = h.metadata
    return out


def dumps_hamiltonian(h: LocalHamiltonian) -> str:
    # repr-based float output is the shortest string that round-trips exactly
    return json.dumps(hamiltonian_to_dict(h), sort_keys=True)


def loads_hamiltonian(text: str, source: str = "<input>") -> LocalHamiltonian:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno, source) from None
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object", source=source)
    if doc.get("format_version") != FORMAT_VERSION:
        raise ParseError(f"unsupported format_version {doc.get('format_version')!r}",
                         source=source)
    try:
        n = int(doc["n"])
        dims = [int(d) for d in doc.get("site_dims", [2] * n)]
        terms = []
        for i, t in enumerate(doc["terms"]):
            ent = np.array(t["entries"], dtype=float)
            if ent.ndim != 3 or ent.shape[2] != 2:
                raise ParseError(f"term {i}: entries must be rows of [re, im] pairs", source=source)
            terms.append(Term(tuple(int(s) for s in t["support"]),
                              ent[..., 0] + 1j * ent[..., 1], t.get("label", "")))
        return LocalHamiltonian(n, tuple(terms), tuple(dims), dict(doc.get("metadata", {})))
    except ParseError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"invalid Hamiltonian: {exc}", source=source) from None


def save_hamiltonian(h: LocalHamiltonian, path) -> None:
    Path(path).write_text(dumps_hamiltonian(h) + "\n")


def load_hamiltonian(path) -> LocalHamiltonian:
    return loads_hamiltonian(Path(path).read_text(), str(path))


# --- DIMACS ----------------------------------------------------------------------

def parse_dimacs(text: str, source: str = "<input>") -> CnfFormula:
    n_vars = n_clauses = None
    clauses: list[tuple[int, ...]] = []
    current: list[int] = []
    current_start = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("c") or stripped.startswith("%"):
            continue
        if stripped.startswith("p"):
            parts = stripped.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ParseError("header must read 'p cnf <vars> <clauses>'", lineno, 1, source)
            try:
                n_vars, n_clauses = int(parts[2]), int(parts[3])
            except ValueError:
                raise ParseError("non-integer header field", lineno, 1, source) from None
            continue
        if n_vars is None:
            raise ParseError("clause before 'p cnf' header", lineno, 1, source)
        for match in re.finditer(r"\S+", line):
            tok, col = match.group(), match.start() + 1
            try:
                lit = int(tok)
            except ValueError:
                raise ParseError(f"bad literal {tok!r}", lineno, col, source) from None
            if lit == 0:
                if not current:
                    raise ParseError("empty clause", lineno, col, source)
                clause = tuple(current)
                if len({abs(l) for l in clause}) != len(clause):
                    raise ParseError(f"clause {clause} repeats a variable",
                                     *current_start, source)
                clauses.append(clause)
                current, current_start = [], None
            else:
                if abs(lit) > n_vars:
                    raise ParseError(f"literal {lit} exceeds {n_vars} variables", lineno, col, source)
                if not current:
                    current_start = (lineno, col)
                current.append(lit)
    if current:
        raise ParseError("last clause is not terminated by 0", *current_start, source)
    if n_vars is None:
        raise ParseError("missing 'p cnf' header", source=source)
    if n_clauses is not None and n_clauses != len(clauses):
        raise ParseError(f"header declares {n_clauses} clauses, found {len(clauses)}",
                         source=source)
    return CnfFormula(n_vars, tuple(clauses))


def format_dimacs(f: CnfFormula) -> str:
    lines = [f"p cnf {f.n_vars} {f.m}"]
    lines += [" ".join(str(l) for l in c) + " 0" for c in f.clauses]
    return "\n".join(lines) + "\n"


def load_dimacs(path) -> CnfFormula:
    return parse_dimacs(Path(path).read_text(), str(path))


# --- graphs ------------------------------------------------------------------------

def parse_edge_list(text: str, source: str = "<input>") -> nx.Graph:
    lines = [(i, l) for i, l in enumerate(text.splitlines(), start=1)
             if l.strip() and not l.lstrip().startswith("#")]
    if not lines:
        raise ParseError("missing vertex count", source=source)
    lineno, first = lines[0]
    try:
        nv = int(first.strip())
    except ValueError:
        raise ParseError("first line must be the vertex count", lineno, 1, source) from None
    g = nx.Graph()
    g.add_nodes_from(range(nv))
    for lineno, line in lines[1:]:
        parts = line.split()
        if len(parts) != 2:
            raise ParseError("expected two vertex ids", lineno, 1, source)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError("vertex ids must be integers", lineno, 1, source) from None
        for val, tok in ((u, parts[0]), (v, parts[1])):
            if not 0 <= val < nv:
                raise ParseError(f"vertex {val} out of range", lineno, line.index(tok) + 1, source)
        g.add_edge(u, v)
    return g


def format_edge_list(g: nx.Graph) -> str:
    nodes = sorted(g.nodes())
    idx = {v: i for i, v in enumerate(nodes)}
    lines = [str(len(nodes))] + [f"{idx[u]} {idx[v]}" for u, v in sorted(g.edges())]
    return "\n".join(lines) + "\n"


def load_edge_list(path) -> nx.Graph:
    return parse_edge_list(Path(path).read_text(), str(path))


# --- circuits ------------------------------------------------------------------------

def loads_circuit(text: str, source: str = "<input>") -> tuple[QuantumCircuit, list[int], int]:
    """Circuit JSON: ``{"n_qubits", "gates": [{"support", "matrix"}], "input", "witness_sites"}``."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno, source) from None
    try:
        gates = []
        for g in doc["gates"]:
            ent = np.array(g["matrix"], dtype=float)
            gates.append((tuple(g["support"]), ent[..., 0] + 1j * ent[..., 1]))
        circuit = QuantumCircuit(int(doc["n_qubits"]), tuple(gates))
        bits = [int(b) for b in str(doc.get("input", ""))]
        witness = int(doc.get("witness_sites", circuit.n_qubits - len(bits)))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"invalid circuit: {exc}", source=source) from None
    return circuit, bits, witness


def dumps_circuit(c: QuantumCircuit, input_bits=(), witness_sites=None) -> str:
    gates = [{"support": list(s), "matrix": [[[z.real, z.imag] for z in row] for row in u]}
             for s, u in c.gates]
    doc = {"n_qubits": c.n_qubits, "gates": gates,
           "input": "".join(str(b) for b in input_bits),
           "witness_sites": c.n_qubits - len(input_bits) if witness_sites is None else witness_sites}
    return json.dumps(doc)
