"""Normal-ordered bosonic operator algebra with explicit N-power bookkeeping.

Polynomials in multimode ladder operators are stored in canonical normal
order (all creation operators to the left of annihilation operators, modes
in ascending index order).  Every term additionally carries an exact
half-integer power of the extensivity parameter N, so that the large-N
limit of expectation values can be extracted by reading off coefficients
of the resulting series in sqrt(N).

The module provides the adjoint-Liouvillian action on such polynomials,
Gaussian (Wick) expectation values against first/second moments, and the
generation of the deterministic large-N equations of motion for the
normalized first moments and the fluctuation covariances.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "OperatorPolynomial",
    "GaussianMoments",
    "NPowerSeries",
    "ExtensivityError",
    "RhsFunctions",
    "zero",
    "constant",
    "annihilation",
    "creation",
    "number",
    "ladder_product",
    "normal_order",
    "commutator",
    "adjoint_liouvillian",
    "gaussian_expectation",
    "check_extensivity",
    "thermodynamic_rhs",
]

# A word is a tuple of (mode, dagger_count, plain_count), strictly ascending
# in mode, with dagger_count + plain_count > 0 in every entry.
Word = tuple[tuple[int, int, int], ...]

_ZERO_TOL = 0.0  # terms are dropped only when exactly zero


class ExtensivityError(ValueError):
    """A model operator violates the required N-scaling of its terms."""


def _half_integer(p) -> Fraction:
    f = Fraction(p)
    if f.denominator not in (1, 2):
        raise ValueError(f"N-power must be a half integer, got {p}")
    return f


def _mul_words(w1: Word, w2: Word) -> dict[Word, float]:
    """Normal-ordered product of two canonical words.

    Per mode, a^q adag^r = sum_k k! C(q,k) C(r,k) adag^(r-k) a^(q-k); modes
    commute, so the product factorizes mode by mode.
    """
    d1 = {m: (p, q) for m, p, q in w1}
    d2 = {m: (p, q) for m, p, q in w2}
    per_mode: list[list[tuple[int, int, int, float]]] = []
    for m in sorted(set(d1) | set(d2)):
        p, q = d1.get(m, (0, 0))
        r, s = d2.get(m, (0, 0))
        alts = []
        for k in range(min(q, r) + 1):
            c = factorial(k) * comb(q, k) * comb(r, k)
            alts.append((m, p + r - k, q + s - k, float(c)))
        per_mode.append(alts)

    out: dict[Word, float] = {}
    stack: list[tuple[int, tuple, float]] = [(0, (), 1.0)]
    while stack:
        i, word, coeff = stack.pop()
        if i == len(per_mode):
            out[word] = out.get(word, 0.0) + coeff
            continue
        for m, nd, npl, c in per_mode[i]:
            nw = word + ((m, nd, npl),) if nd + npl > 0 else word
            stack.append((i + 1, nw, coeff * c))
    return out


class OperatorPolynomial:
    """Polynomial in bosonic ladder operators, canonically normal ordered.

    Immutable after construction.  Terms live in a mapping from
    (n_power, word) to a complex coefficient; products re-normal-order
    automatically via the single-mode commutation identity, so any value of
    this type satisfies the normal-ordering invariant by construction.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[tuple[Fraction, Word], complex] | None = None):
        clean: dict[tuple[Fraction, Word], complex] = {}
        for (npow, word), c in (terms or {}).items():
            c = complex(c)
            if c == 0:
                continue
            npow = _half_integer(npow)
            _validate_word(word)
            key = (npow, word)
            clean[key] = clean.get(key, 0.0) + c
        self._terms = {k: v for k, v in clean.items() if v != 0}

    @property
    def terms(self) -> Mapping[tuple[Fraction, Word], complex]:
        return dict(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def modes(self) -> set[int]:
        return {m for _, w in self._terms for m, _, _ in w}

    def degree(self) -> int:
        return max((sum(p + q for _, p, q in w) for _, w in self._terms), default=0)

    # -- ring operations ---------------------------------------------------

    def __add__(self, other: "OperatorPolynomial") -> "OperatorPolynomial":
        t = dict(self._terms)
        for k, v in other._terms.items():
            t[k] = t.get(k, 0.0) + v
        return OperatorPolynomial(t)

    def __sub__(self, other: "OperatorPolynomial") -> "OperatorPolynomial":
        return self + (-1.0) * other

    def __neg__(self) -> "OperatorPolynomial":
        return (-1.0) * self

    def __mul__(self, other):
        if isinstance(other, OperatorPolynomial):
            out: dict[tuple[Fraction, Word], complex] = {}
            for (n1, w1), c1 in self._terms.items():
                for (n2, w2), c2 in other._terms.items():
                    c12 = c1 * c2
                    for w, cw in _mul_words(w1, w2).items():
                        key = (n1 + n2, w)
                        out[key] = out.get(key, 0.0) + c12 * cw
            return OperatorPolynomial(out)
        return OperatorPolynomial(
            {k: v * complex(other) for k, v in self._terms.items()}
        )

    def __rmul__(self, other):
        return self.__mul__(other)

    def dagger(self) -> "OperatorPolynomial":
        """Hermitian adjoint; stays normal ordered since modes dagger independently."""
        return OperatorPolynomial(
            {
                (n, tuple((m, q, p) for m, p, q in w)): np.conj(c)
                for (n, w), c in self._terms.items()
            }
        )

    def shift_n_power(self, delta) -> "OperatorPolynomial":
        d = _half_integer(delta)
        return OperatorPolynomial({(n + d, w): c for (n, w), c in self._terms.items()})

    def max_abs_difference(self, other: "OperatorPolynomial") -> float:
        keys = set(self._terms) | set(other._terms)
        return max(
            (abs(self._terms.get(k, 0.0) - other._terms.get(k, 0.0)) for k in keys),
            default=0.0,
        )

    def __eq__(self, other) -> bool:
        return isinstance(other, OperatorPolynomial) and self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def __repr__(self) -> str:
        if not self._terms:
            return "OperatorPolynomial(0)"
        bits = []
        for (n, w), c in sorted(self._terms.items(), key=lambda kv: (kv[0][0], kv[0][1])):
            ops = "".join(
                f" adag_{m}^{p}" * (p > 0) + f" a_{m}^{q}" * (q > 0) for m, p, q in w
            )
            npart = f" N^{n}" if n != 0 else ""
            bits.append(f"({c:.6g}){npart}{ops}")
        return "OperatorPolynomial[" + " + ".join(bits) + "]"


def _validate_word(word: Word) -> None:
    last = -1
    for m, p, q in word:
        if m <= last:
            raise ValueError(f"word modes not strictly ascending: {word}")
        if p < 0 or q < 0 or p + q == 0:
            raise ValueError(f"invalid ladder counts in word: {word}")
        last = m


# -- constructors ------------------------------------------------------------


def zero() -> OperatorPolynomial:
    return OperatorPolynomial()


def constant(c: complex, n_power=0) -> OperatorPolynomial:
    return OperatorPolynomial({(_half_integer(n_power), ()): complex(c)})


def annihilation(mode: int, n_power=0) -> OperatorPolynomial:
    return OperatorPolynomial({(_half_integer(n_power), ((mode, 0, 1),)): 1.0})


def creation(mode: int, n_power=0) -> OperatorPolynomial:
    return OperatorPolynomial({(_half_integer(n_power), ((mode, 1, 0),)): 1.0})


def number(mode: int, n_power=0) -> OperatorPolynomial:
    return creation(mode, n_power) * annihilation(mode)


def ladder_product(factors: Iterable[tuple[str, int]]) -> OperatorPolynomial:
    """Product of elementary ladder factors given in arbitrary (non-canonical) order.

    Each factor is ("+", mode) for a creation operator or ("-", mode) for an
    annihilation operator.  The result is the canonical normal-ordered
    polynomial equal to the product as an operator.
    """
    p = constant(1.0)
    for kind, mode in factors:
        if kind == "+":
            p = p * creation(mode)
        elif kind == "-":
            p = p * annihilation(mode)
        else:
            raise ValueError(f"factor kind must be '+' or '-', got {kind!r}")
    return p


def normal_order(p: OperatorPolynomial) -> OperatorPolynomial:
    """Return the canonical normal-ordered form of ``p``.

    Values of :class:`OperatorPolynomial` are normal ordered by construction,
    so this is the identity on them; it exists as the explicit fixed point of
    the rewriting performed inside products, and is idempotent.
    """
    return OperatorPolynomial(p.terms)


def commutator(a: OperatorPolynomial, b: OperatorPolynomial) -> OperatorPolynomial:
    return a * b - b * a


def adjoint_liouvillian(
    hamiltonian: OperatorPolynomial,
    jump_operators: Sequence[OperatorPolynomial],
    observable: OperatorPolynomial,
) -> OperatorPolynomial:
    """Heisenberg-picture generator i[H, O] + sum_i (L_i^+ O L_i - {L_i^+ L_i, O}/2)."""
    out = 1j * commutator(hamiltonian, observable)
    for L in jump_operators:
        Ld = L.dagger()
        LdL = Ld * L
        out = out + Ld * observable * L - 0.5 * (LdL * observable + observable * LdL)
    return out


# -- Gaussian moments and Wick expectations ----------------------------------


@dataclass
class GaussianMoments:
    """First and second moments of a multimode Gaussian state.

    alpha holds the normalized first moments (first moments divided by
    sqrt(N)); u[i, j] = <d_i d_j> and v[i, j] = <d_i^+ d_j> are the
    covariances of the fluctuation operators d_i = a_i - <a_i>.
    """

    alpha: np.ndarray
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        self.alpha = np.atleast_1d(np.asarray(self.alpha, dtype=complex))
        m = self.alpha.shape[0]
        self.u = np.asarray(self.u, dtype=complex).reshape(m, m)
        self.v = np.asarray(self.v, dtype=complex).reshape(m, m)

    @property
    def n_modes(self) -> int:
        return self.alpha.shape[0]

    def validate(self, tol: float = 1e-9) -> None:
        if np.max(np.abs(self.u - self.u.T)) > tol:
            raise ValueError("u must be symmetric")
        if np.max(np.abs(self.v - self.v.conj().T)) > tol:
            raise ValueError("v must be Hermitian")
        if np.min(self.v.diagonal().real) < -tol:
            raise ValueError("v must have nonnegative diagonal")

    def copy(self) -> "GaussianMoments":
        return GaussianMoments(self.alpha.copy(), self.u.copy(), self.v.copy())

    @classmethod
    def vacuum(cls, n_modes: int) -> "GaussianMoments":
        return cls(
            np.zeros(n_modes, dtype=complex),
            np.zeros((n_modes, n_modes), dtype=complex),
            np.zeros((n_modes, n_modes), dtype=complex),
        )


@dataclass
class NPowerSeries:
    """Finite Laurent-style series in sqrt(N): mapping half-integer power -> coefficient."""

    coeffs: dict[Fraction, complex] = field(default_factory=dict)

    def coefficient(self, power) -> complex:
        return self.coeffs.get(_half_integer(power), 0.0)

    def shifted(self, delta) -> "NPowerSeries":
        d = _half_integer(delta)
        return NPowerSeries({p + d: c for p, c in self.coeffs.items()})

    def scaled(self, c: complex) -> "NPowerSeries":
        return NPowerSeries({p: c * v for p, v in self.coeffs.items()})

    def __add__(self, other: "NPowerSeries") -> "NPowerSeries":
        out = dict(self.coeffs)
        for p, c in other.coeffs.items():
            out[p] = out.get(p, 0.0) + c
        return NPowerSeries(out)

    def __sub__(self, other: "NPowerSeries") -> "NPowerSeries":
        return self + other.scaled(-1.0)

    def __mul__(self, other: "NPowerSeries") -> "NPowerSeries":
        out: dict[Fraction, complex] = {}
        for p1, c1 in self.coeffs.items():
            for p2, c2 in other.coeffs.items():
                k = p1 + p2
                out[k] = out.get(k, 0.0) + c1 * c2
        return NPowerSeries(out)

    def evaluate(self, n: float) -> complex:
        root = np.sqrt(float(n))
        return sum(c * root ** (2 * float(p)) for p, c in self.coeffs.items())


def _wick(seq: list[tuple[int, bool]], u: np.ndarray, v: np.ndarray) -> complex:
    """Expectation of a product of zero-mean fluctuation operators.

    seq lists (mode, is_dagger) in operator order.  Pair values respect the
    order of the two factors; within canonical words the annihilator-before-
    creator case only arises across distinct modes, where the commutator
    vanishes.
    """
    n = len(seq)
    if n % 2:
        return 0.0
    if n == 0:
        return 1.0

    def pair_val(x: tuple[int, bool], y: tuple[int, bool]) -> complex:
        (mi, di), (mj, dj) = x, y
        if not di and not dj:
            return u[mi, mj]
        if di and dj:
            return np.conj(u[mi, mj])
        if di and not dj:
            return v[mi, mj]
        return (1.0 if mi == mj else 0.0) + v[mj, mi]

    def rec(items: list[int]) -> complex:
        if not items:
            return 1.0
        first = items[0]
        tot = 0.0 + 0.0j
        for k in range(1, len(items)):
            val = pair_val(seq[first], seq[items[k]])
            if val != 0.0:
                tot += val * rec(items[1:k] + items[k + 1 :])
        return tot

    return rec(list(range(n)))


def gaussian_expectation(
    p: OperatorPolynomial,
    g: GaussianMoments,
    n: float | None = None,
):
    """Expectation of ``p`` on the Gaussian state with moments ``g``.

    Each ladder operator is split as a_i = sqrt(N) alpha_i + d_i and the
    fluctuation part is Wick-contracted against (u, v).  With ``n`` numeric
    the series is evaluated at that N and a complex number is returned; with
    ``n=None`` the full :class:`NPowerSeries` in powers of sqrt(N) is
    returned, which is what the large-N limit extraction consumes.
    """
    alpha, u, v = g.alpha, g.u, g.v
    out: dict[Fraction, complex] = {}
    for (npow, word), c in p.terms.items():
        entries = list(word)

        def rec(i: int, coeff: complex, half_pow: int, seq: list[tuple[int, bool]]):
            if coeff == 0.0:
                return
            if i == len(entries):
                val = coeff * _wick(seq, u, v)
                if val != 0.0:
                    k = npow + Fraction(half_pow, 2)
                    out[k] = out.get(k, 0.0) + val
                return
            m, pp, qq = entries[i]
            ac, a_ = np.conj(alpha[m]), alpha[m]
            for k1 in range(pp + 1):
                for k2 in range(qq + 1):
                    cc = comb(pp, k1) * comb(qq, k2) * ac**k1 * a_**k2
                    seq2 = seq + [(m, True)] * (pp - k1) + [(m, False)] * (qq - k2)
                    rec(i + 1, coeff * cc, half_pow + k1 + k2, seq2)

        rec(0, c, 0, [])

    series = NPowerSeries(out)
    if n is None:
        return series
    return series.evaluate(n)


# -- extensivity and the deterministic large-N equations ---------------------


def check_extensivity(
    hamiltonian: OperatorPolynomial, jump_operators: Sequence[OperatorPolynomial]
) -> None:
    """Require <H> ~ N and <L_i> ~ sqrt(N) term by term.

    Every Hamiltonian term of total ladder degree m+n must carry N-power
    1 - (m+n)/2, and every jump-operator term 1/2 - (m+n)/2.
    """

    def check(p: OperatorPolynomial, offset: Fraction, label: str) -> None:
        for (npow, word), c in p.terms.items():
            deg = sum(pp + qq for _, pp, qq in word)
            want = offset - Fraction(deg, 2)
            if npow != want:
                raise ExtensivityError(
                    f"{label} term {c!r} * N^{npow} * word {word} breaks extensivity: "
                    f"degree {deg} requires N^{want}"
                )

    check(hamiltonian, Fraction(1), "Hamiltonian")
    for i, L in enumerate(jump_operators):
        check(L, Fraction(1, 2), f"jump operator {i}")


@dataclass
class RhsFunctions:
    """Evaluable large-N right-hand sides generated from a model's operators.

    mean_field(g) returns d(alpha)/dt; u_dot(g) and v_dot(g) return the
    covariance derivatives, with the measurement back-action contracted via
    the noise second moments of the chosen unraveling.  The unraveling factor
    is obtained lazily at evaluation time from the current jump-operator
    expectations.
    """

    n_modes: int
    mean_field: Callable[[GaussianMoments], np.ndarray]
    u_dot: Callable[[GaussianMoments], np.ndarray]
    v_dot: Callable[[GaussianMoments], np.ndarray]


def thermodynamic_rhs(model, scheme) -> RhsFunctions:
    """Build the deterministic large-N equations of motion for ``model``.

    ``model`` must expose ``n_modes`` and ``build_operators() -> (H, [L_i])``
    with extensive operators (checked).  ``scheme`` is an unraveling scheme
    understood by :func:`mongauss.unravel.upsilon`.

    The mean-field velocity is the sqrt(N) coefficient of <adj-L a_i>; the
    covariance drift is the N^0 coefficient of <adj-L (d_i d_j)> (resp.
    d_i^+ d_j), and the measurement back-action enters through the Ito
    contraction of the noise-projected connected covariances with the
    scheme's dZ second moments.
    """
    from .unravel import upsilon  # local import; unravel has no opalg dependency

    H, Ls = model.build_operators()
    check_extensivity(H, Ls)
    M = int(model.n_modes)
    n_ch = len(Ls)

    a_ops = [annihilation(i) for i in range(M)]
    L_a = [adjoint_liouvillian(H, Ls, a_ops[i]) for i in range(M)]
    L_adag = [p.dagger() for p in L_a]
    L_aa = [
        [adjoint_liouvillian(H, Ls, a_ops[i] * a_ops[j]) for j in range(M)]
        for i in range(M)
    ]
    L_na = [
        [adjoint_liouvillian(H, Ls, creation(i) * a_ops[j]) for j in range(M)]
        for i in range(M)
    ]
    # polynomials entering the connected covariances with the jump operators
    aL = [[a_ops[i] * Ls[k] for k in range(n_ch)] for i in range(M)]
    Lda = [[Ls[k].dagger() * a_ops[i] for k in range(n_ch)] for i in range(M)]

    half = Fraction(1, 2)

    def series(p: OperatorPolynomial, g: GaussianMoments) -> NPowerSeries:
        return gaussian_expectation(p, g, n=None)

    def mean_field(g: GaussianMoments) -> np.ndarray:
        return np.array(
            [series(L_a[i], g).coefficient(half) for i in range(M)], dtype=complex
        )

    def _noise_blocks(g: GaussianMoments):
        """Leading connected covariances A[i,k] = cov(a_i, L_k), B[i,k] = cov(L_k^+, a_i)."""
        A = np.zeros((M, n_ch), dtype=complex)
        B = np.zeros((M, n_ch), dtype=complex)
        lexp = np.zeros(n_ch, dtype=complex)
        sa = [series(a_ops[i], g) for i in range(M)]
        for k in range(n_ch):
            sL = series(Ls[k], g)
            sLd = series(Ls[k].dagger(), g)
            lexp[k] = sL.coefficient(half)
            for i in range(M):
                A[i, k] = (series(aL[i][k], g) - sa[i] * sL).coefficient(0)
                B[i, k] = (series(Lda[i][k], g) - sLd * sa[i]).coefficient(0)
        ups = np.array([upsilon(scheme, lexp[k]) for k in range(n_ch)], dtype=complex)
        return A, B, ups

    def u_dot(g: GaussianMoments) -> np.ndarray:
        alpha = g.alpha
        sa_full = [series(L_a[i], g) for i in range(M)]
        A, B, ups = _noise_blocks(g)
        du = np.zeros((M, M), dtype=complex)
        for i in range(M):
            for j in range(i, M):
                s = series(L_aa[i][j], g)
                s = s - sa_full[j].shifted(half).scaled(alpha[i])
                s = s - sa_full[i].shifted(half).scaled(alpha[j])
                drift = s.coefficient(0)
                noise = np.sum(
                    np.conj(ups) * A[i] * A[j]
                    + A[i] * B[j]
                    + B[i] * A[j]
                    + ups * B[i] * B[j]
                )
                du[i, j] = du[j, i] = drift - noise
        return du

    def v_dot(g: GaussianMoments) -> np.ndarray:
        alpha = g.alpha
        sa_full = [series(L_a[i], g) for i in range(M)]
        sad_full = [series(L_adag[i], g) for i in range(M)]
        A, B, ups = _noise_blocks(g)
        dv = np.zeros((M, M), dtype=complex)
        for i in range(M):
            for j in range(M):
                s = series(L_na[i][j], g)
                s = s - sa_full[j].shifted(half).scaled(np.conj(alpha[i]))
                s = s - sad_full[i].shifted(half).scaled(alpha[j])
                drift = s.coefficient(0)
                noise = np.sum(
                    np.conj(A[i]) * A[j]
                    + ups * np.conj(A[i]) * B[j]
                    + np.conj(ups) * np.conj(B[i]) * A[j]
                    + np.conj(B[i]) * B[j]
                )
                dv[i, j] = drift - noise
        return dv

    return RhsFunctions(n_modes=M, mean_field=mean_field, u_dot=u_dot, v_dot=v_dot)
