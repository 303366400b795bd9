import itertools
import random

import numpy as np
import pytest

from pprm_synth.circuit import NcvGate
from pprm_synth.pprm import BoolFunction, Literal, ProductTerm
from pprm_synth.qasm import parse_qasm


def brute_eval(f, bits):
    """Term-by-term evaluation written independently of the library."""
    def prod(p):
        return all((bits[l.var - 1] == 1) == l.positive for l in p.literals)

    acc = 0
    for t in f.terms:
        if isinstance(t, ProductTerm):
            acc ^= int(prod(t))
        else:
            g = sum(prod(p) for p in t.group) % 2
            v = sum(prod(p) for p in t.factor_vars) % 2
            acc ^= g & v
    return acc


def brute_table(f, n=None):
    n = f.n if n is None else n
    return [brute_eval(f, bits) for bits in itertools.product((0, 1), repeat=n)]


def random_function(rng, n_max=8, terms_max=12, neg_prob=0.25, n=None):
    n = n or rng.randint(1, n_max)
    terms = []
    for _ in range(rng.randint(0, terms_max)):
        vs = rng.sample(range(1, n + 1), rng.randint(0, n))
        terms.append(ProductTerm(tuple(Literal(v, rng.random() >= neg_prob) for v in vs)))
    return BoolFunction(n, terms)


V = 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]])
X = np.array([[0, 1], [1, 0]], dtype=complex)


def gate_matrix(w, controls, target, u):
    """Dense matrix of a controlled single-qubit gate, built entry by entry.

    Line 0 is the most significant bit.
    """
    dim = 2 ** w
    m = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        bits = [(col >> (w - 1 - i)) & 1 for i in range(w)]
        if all(bits[l] == (1 if p else 0) for l, p in controls):
            b = bits[target]
            for nb in (0, 1):
                out = list(bits)
                out[target] = nb
                row = sum(v << (w - 1 - i) for i, v in enumerate(out))
                m[row, col] += u[nb, b]
        else:
            m[col, col] = 1
    return m


def oracle_unitary(w, gates):
    u = np.eye(2 ** w, dtype=complex)
    for g in gates:
        if isinstance(g, NcvGate):
            mat = {1: V, 2: X, 3: V.conj().T}[g.power]
        else:
            mat = X
        u = gate_matrix(w, g.controls, g.target, mat) @ u
    return u


def equal_up_to_phase(a, b, tol=1e-9):
    idx = np.unravel_index(np.argmax(np.abs(a)), a.shape)
    if abs(b[idx]) < 1e-12:
        return False
    phase = b[idx] / a[idx]
    return np.max(np.abs(a * phase - b)) < tol


# independent reading of the emitted QASM subset

H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def _single(w, q, u):
    m = np.array([[1]], dtype=complex)
    for i in range(w):
        m = np.kron(m, u if i == q else np.eye(2))
    return m


def _controlled(w, c, t, u):
    dim = 2 ** w
    m = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        cb = (col >> (w - 1 - c)) & 1
        if not cb:
            m[col, col] = 1
            continue
        tb = (col >> (w - 1 - t)) & 1
        for nb in (0, 1):
            row = col ^ ((tb ^ nb) << (w - 1 - t))
            m[row, col] += u[nb, tb]
    return m


def qasm_unitary(text):
    """Dense unitary of emitted QASM, built from h/cu1/x/cx definitions."""
    w, ops = parse_qasm(text)
    u = np.eye(2 ** w, dtype=complex)
    s = np.diag([1, 1j])
    for op in ops:
        if op.name == "x":
            m = _single(w, op.qubits[0], X)
        elif op.name == "cx":
            m = _controlled(w, *op.qubits, X)
        elif op.name == "cv":
            a, b = op.qubits
            m = _single(w, b, H) @ _controlled(w, a, b, s) @ _single(w, b, H)
        else:
            raise AssertionError(op.name)
        u = m @ u
    return w, u


@pytest.fixture
def rng():
    return random.Random(1234)
