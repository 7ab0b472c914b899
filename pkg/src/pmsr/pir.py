"""Private retrieval protocol over the product-matrix code.

The user asks all n nodes for inner products of their stored rows with
query matrices Q^i = U + V^i E^f: U is a fresh uniform random d x (m*alpha)
matrix shared by all queries, V^i is a fixed binary pattern, and E^f
places the pattern block at record f's columns.  Each node i returns
A_i = Q^i c_i^T for its concatenated stored row c_i, learning nothing
about f because U alone makes every Q^i marginally uniform.

Decoding works per subquery t: the nodes whose pattern row t is zero
return pure interference.  Their answers determine the interference
vector I^t = M U_t^T through an invertible r x r submatrix of psi, and
subtracting psi_i I^t from each remaining answer exposes one desired
code symbol.  The d = k subqueries together reveal the full shares of
nodes 1..k, and any-k recovery rebuilds the record.

The scheme needs n = 3k - 3: per subquery, r = 2k - 2 of the n nodes
must be interference-only (one of the first k plus all of k+1..n).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Mapping, Sequence

from pmsr import msr
from pmsr.field import Field, dot_mod
from pmsr.matrix import Matrix, SingularMatrixError
from pmsr.msr import EncodingMatrix, MsrParams


@dataclass(frozen=True)
class PirConfig:
    """One retrieval instance: code parameters, record count, target index."""

    params: MsrParams
    m: int
    f: int = 1
    d: int = 0  # 0 means "use k", the only constructible subquery count

    def __post_init__(self):
        k, n = self.params.k, self.params.n
        if n != 3 * k - 3:
            raise ValueError(f"retrieval needs n = 3k-3 = {3 * k - 3}, got n={n}")
        if self.d == 0:
            object.__setattr__(self, "d", k)
        if self.d != k:
            raise ValueError(f"subquery count is fixed to k={k}, got {self.d}")
        if self.m < 1:
            raise ValueError(f"record count must be >= 1, got {self.m}")
        if not 1 <= self.f <= self.m:
            raise ValueError(f"record index {self.f} out of range [1, {self.m}]")

    @property
    def k(self) -> int:
        return self.params.k

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def alpha(self) -> int:
        return self.params.alpha

    @property
    def query_cols(self) -> int:
        return self.m * self.params.alpha


@dataclass(frozen=True)
class PatternMatrix:
    """Binary d x alpha pattern for one node, independent of the field."""

    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        for row in self.rows:
            if any(v not in (0, 1) for v in row):
                raise ValueError("pattern entries must be 0 or 1")
            if sum(row) > 1:
                raise ValueError("pattern rows carry at most one 1")

    @property
    def d(self) -> int:
        return len(self.rows)

    @property
    def alpha(self) -> int:
        return len(self.rows[0]) if self.rows else 0

    @property
    def is_zero(self) -> bool:
        return all(all(v == 0 for v in row) for row in self.rows)

    def signal_column(self, t: int) -> int | None:
        """1-based column of the 1 in row t (1-based), or None if zero."""
        row = self.rows[t - 1]
        for j, v in enumerate(row):
            if v:
                return j + 1
        return None

    def as_matrix(self, field: Field) -> Matrix:
        return Matrix.from_rows(field, [list(r) for r in self.rows])


@dataclass(frozen=True)
class Interference:
    """Test-side ground truth: i_vals[t-1][h-1] = M_h . U_t^T.

    M here is the r x (m*alpha) horizontal stack of all records' message
    matrices; the decoder solves for exactly these values without ever
    seeing M.
    """

    i_vals: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class MetricsReport:
    """Exact rational storage and traffic metrics."""

    so: Fraction
    cpop: Fraction
    rr: Fraction
    tradeoff_product: Fraction
    slack: Fraction


@dataclass(frozen=True)
class VerifyReport:
    """Structural audit of a pattern set against an encoding matrix."""

    interference_ok: bool
    coverage_ok: bool
    counting_ok: bool
    failures: tuple[str, ...]

    @property
    def passed(self) -> bool:
        return not self.failures


def build_patterns(cfg: PirConfig) -> tuple[PatternMatrix, ...]:
    """The n pattern matrices: identity-over-zero-row, then downward
    cyclic shifts, then all-zero for nodes past k."""
    k, alpha = cfg.k, cfg.alpha
    rows = [tuple(1 if j == t else 0 for j in range(alpha)) for t in range(alpha)]
    rows.append(tuple([0] * alpha))
    patterns = [PatternMatrix(rows=tuple(rows))]
    for _ in range(2, k + 1):
        rows = [rows[-1]] + rows[:-1]
        patterns.append(PatternMatrix(rows=tuple(rows)))
    zero = PatternMatrix(rows=tuple(tuple([0] * alpha) for _ in range(k)))
    patterns.extend([zero] * (cfg.n - k))
    return tuple(patterns)


def expand_pattern(pattern: PatternMatrix, f: int, cfg: PirConfig,
                   field: Field) -> Matrix:
    """V^i E^f: the pattern block placed at record f's alpha columns."""
    if not 1 <= f <= cfg.m:
        raise ValueError(f"record index {f} out of range [1, {cfg.m}]")
    offset = (f - 1) * cfg.alpha
    rows = []
    for row in pattern.rows:
        wide = [0] * cfg.query_cols
        wide[offset:offset + cfg.alpha] = row
        rows.append(wide)
    return Matrix.from_rows(field, rows)


def gen_queries(cfg: PirConfig, u: Matrix,
                patterns: Sequence[PatternMatrix]) -> tuple[Matrix, ...]:
    """Q^i = U + V^i E^f for every node i; nodes past k get U verbatim."""
    if u.shape != (cfg.d, cfg.query_cols):
        raise ValueError(
            f"u must be {cfg.d}x{cfg.query_cols}, got {u.rows}x{u.cols}")
    if len(patterns) != cfg.n:
        raise ValueError(f"need {cfg.n} patterns, got {len(patterns)}")
    queries = []
    for pattern in patterns:
        if pattern.is_zero:
            queries.append(u)
        else:
            queries.append(u + expand_pattern(pattern, cfg.f, cfg, u.field))
    return tuple(queries)


def fresh_queries(cfg: PirConfig, field: Field, rng: random.Random,
                  patterns: Sequence[PatternMatrix] | None = None,
                  ) -> tuple[Matrix, tuple[Matrix, ...]]:
    """Draw a fresh uniform U and produce the n query matrices.

    This is the only entry point retrieval services use; handing the same
    U to two retrievals is impossible through it, which is what the
    privacy argument needs.
    """
    if patterns is None:
        patterns = build_patterns(cfg)
    u = Matrix.random(field, cfg.d, cfg.query_cols, rng)
    return u, gen_queries(cfg, u, patterns)


def node_answer(query: Matrix, stored_row: Sequence[int]) -> list[int]:
    """The d inner products of the query rows with the node's full row."""
    if len(stored_row) != query.cols:
        raise ValueError(
            f"stored row has {len(stored_row)} symbols, query expects {query.cols}")
    q = query.field.modulus
    row = [int(v) % q for v in stored_row]
    return [dot_mod(query.row(t), row, q) for t in range(query.rows)]


def interference_nodes(t: int, cfg: PirConfig) -> list[int]:
    """Nodes whose pattern row t is zero: (t mod k)+1 and all of k+1..n."""
    k = cfg.k
    if not 1 <= t <= cfg.d:
        raise ValueError(f"subquery index {t} out of range [1, {cfg.d}]")
    return [(t % k) + 1] + list(range(k + 1, cfg.n + 1))


def decode_subquery(t: int, answers: Sequence[int], enc: EncodingMatrix,
                    cfg: PirConfig) -> dict[tuple[int, int], int]:
    """Cancel interference in subquery t and expose k-1 desired symbols.

    ``answers`` holds entry t of every node's answer vector, node order.
    Returns {(node, symbol-position): value} with 1-based positions; the
    k-1 keys are the Table-2 cells labelled t.
    """
    field = enc.field
    k, q = cfg.k, field.modulus
    if len(answers) != cfg.n:
        raise ValueError(f"need answers from all {cfg.n} nodes, got {len(answers)}")
    quiet = interference_nodes(t, cfg)
    psi_sub = enc.psi.submatrix_rows([i - 1 for i in quiet])
    rhs = Matrix.column(field, [answers[i - 1] for i in quiet])
    try:
        i_vec = psi_sub.solve(rhs).col(0)
    except SingularMatrixError as exc:
        raise ValueError("invalid encoding matrix") from exc

    out: dict[tuple[int, int], int] = {}
    for i in range(1, k + 1):
        if i == quiet[0]:
            continue
        s = ((t - i) % k) + 1
        noise = dot_mod(enc.psi_row(i), i_vec, q)
        out[(i, s)] = (answers[i - 1] - noise) % q
    return out


def decode_record(answers: Sequence[Sequence[int]], u: Matrix,
                  enc: EncodingMatrix, cfg: PirConfig) -> list[int]:
    """Full decode: run every subquery, rebuild nodes 1..k's shares of
    record f, and recover the record.

    ``answers[i-1]`` is node i's d-vector.  ``u`` is accepted for shape
    validation only; the decode consumes nothing but psi and the answers.
    """
    if len(answers) != cfg.n or any(len(a) != cfg.d for a in answers):
        raise ValueError(
            f"incomplete responses: need {cfg.n} answers of {cfg.d} symbols each")
    if u.shape != (cfg.d, cfg.query_cols):
        raise ValueError(
            f"u must be {cfg.d}x{cfg.query_cols}, got {u.rows}x{u.cols}")

    shares: dict[int, list[int | None]] = {
        i: [None] * cfg.alpha for i in range(1, cfg.k + 1)}
    for t in range(1, cfg.d + 1):
        column = [answers[i][t - 1] for i in range(cfg.n)]
        for (node, s), value in decode_subquery(t, column, enc, cfg).items():
            shares[node][s - 1] = value
    assert all(all(v is not None for v in row) for row in shares.values())
    try:
        msg = msr.recover({i: row for i, row in shares.items()}, enc)
    except ValueError as exc:
        raise ValueError("corrupt responses") from exc
    return msr.record_from_message_matrix(msg)


def interference_table(u: Matrix, message_stack: Matrix) -> Interference:
    """Ground-truth interference I[t][h] = M_h . U_t^T for tests that
    know the database; ``message_stack`` is the r x (m*alpha) stack."""
    if u.cols != message_stack.cols:
        raise ValueError("u and message stack disagree on column count")
    q = u.field.modulus
    vals = tuple(
        tuple(dot_mod(message_stack.row(h), u.row(t), q)
              for h in range(message_stack.rows))
        for t in range(u.rows))
    return Interference(i_vals=vals)


def privacy_coupling_check(cfg: PirConfig, f1: int, f2: int, u: Matrix) -> bool:
    """Check the identity that makes queries independent of f.

    For every node i, the query generated from (u, f1) must equal the one
    generated from (u + V^i E^{f1} - V^i E^{f2}, f2).  The shift is a
    bijection on the space of u, so equality here means the per-node
    query distributions for f1 and f2 are identical when u is uniform.
    """
    for f in (f1, f2):
        if not 1 <= f <= cfg.m:
            raise ValueError(f"record index {f} out of range [1, {cfg.m}]")
    patterns = build_patterns(cfg)
    field = u.field
    cfg1, cfg2 = replace(cfg, f=f1), replace(cfg, f=f2)
    with_f1 = gen_queries(cfg1, u, patterns)
    for i, pattern in enumerate(patterns):
        if pattern.is_zero:
            shifted = u
        else:
            shifted = (u + expand_pattern(pattern, f1, cfg, field)
                       - expand_pattern(pattern, f2, cfg, field))
        if gen_queries(cfg2, shifted, patterns)[i] != with_f1[i]:
            return False
    return True


def metrics_report(cfg: PirConfig) -> MetricsReport:
    """Storage overhead, price of privacy, and repair ratio as exact
    rationals, with the two lower bounds asserted."""
    p = cfg.params
    so = Fraction(p.n, p.k)
    cpop = Fraction(cfg.d * p.n, p.k * p.alpha)
    rr = Fraction(p.r, p.r - p.k + 1)
    tradeoff = cpop * (1 - Fraction(p.r, p.k) / so)
    slack = cpop - rr * Fraction(cfg.d, p.k)
    assert tradeoff >= 1, "privacy-storage product fell below its floor"
    assert slack >= 1, "privacy-repair slack fell below its floor"
    assert tradeoff == 1, "this construction sits exactly on the floor"
    return MetricsReport(so=so, cpop=cpop, rr=rr,
                         tradeoff_product=tradeoff, slack=slack)


def verify_scheme(cfg: PirConfig, enc: EncodingMatrix,
                  patterns: Sequence[PatternMatrix]) -> VerifyReport:
    """Audit a pattern set: interference solvability per subquery, full
    coverage of the first k nodes' symbols, and the counting bound
    k*alpha <= (n-r)*d.  The subquery count is taken from the patterns
    so that degenerate sets are diagnosable.
    """
    params = cfg.params
    k, alpha, n, r = params.k, params.alpha, params.n, params.r
    if len(patterns) != n:
        raise ValueError(f"need {n} patterns, got {len(patterns)}")
    d = patterns[0].d
    failures: list[str] = []

    interference_ok = True
    for t in range(1, d + 1):
        quiet = [i for i in range(1, n + 1)
                 if patterns[i - 1].signal_column(t) is None]
        if len(quiet) != r:
            interference_ok = False
            failures.append(
                f"subquery {t}: {len(quiet)} interference-only nodes, need {r}")
            continue
        sub = enc.psi.submatrix_rows([i - 1 for i in quiet])
        if sub.rank() < r:
            interference_ok = False
            failures.append(f"subquery {t}: interference system is singular")

    cells: list[tuple[int, int]] = []
    for t in range(1, d + 1):
        for i in range(1, n + 1):
            s = patterns[i - 1].signal_column(t)
            if s is not None:
                cells.append((i, s))
    wanted = {(i, s) for i in range(1, k + 1) for s in range(1, alpha + 1)}
    coverage_ok = len(cells) == len(set(cells)) and set(cells) == wanted
    if not coverage_ok:
        missing = sorted(wanted - set(cells))
        extra = sorted(set(cells) - wanted)
        dupes = len(cells) - len(set(cells))
        failures.append(
            f"coverage: missing {missing}, foreign {extra}, duplicates {dupes}")

    counting_ok = k * alpha <= (n - r) * d
    if not counting_ok:
        failures.append(
            f"counting bound: k*alpha = {k * alpha} > (n-r)*d = {(n - r) * d}")

    return VerifyReport(interference_ok=interference_ok,
                        coverage_ok=coverage_ok,
                        counting_ok=counting_ok,
                        failures=tuple(failures))
