"""Product-matrix minimum-storage regenerating code.

An (n, k, r, alpha, beta, B) = (n, k, 2k-2, k-1, 1, k(k-1)) code: each
record of B symbols is packed into an r x alpha message matrix built from
two symmetric halves, encoded as ``code = psi @ message`` with an n x r
encoding matrix ``psi = [phi | diag(lambdas) @ phi]``, and stored one
row per node.  Any k node rows recover the record; a failed node is
rebuilt exactly from one symbol from each of any r helpers.

The encoding matrix must satisfy three conditions, validated at
construction: (i) every r-row submatrix of psi is invertible, (ii) every
alpha-row submatrix of phi is invertible, (iii) the lambdas are pairwise
distinct.  With the default power points 1..n, psi is a plain Vandermonde
matrix so (i) and (ii) hold whenever the points are distinct; (iii) is
the binding constraint and fails for some (q, alpha), hence the explicit
checks and errors.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from math import comb, gcd
from typing import Mapping, Sequence

from pmsr.field import Field, dot_mod
from pmsr.matrix import Matrix, SingularMatrixError, vandermonde

# Subset spot-checks above this node count; exhaustive at or below it.
_EXHAUSTIVE_NODE_LIMIT = 12
_SPOT_CHECKS = 200


@dataclass(frozen=True)
class MsrParams:
    """Code parameters at the minimum-storage point with r = 2k-2."""

    n: int
    k: int
    r: int
    alpha: int
    beta: int
    B: int

    def __post_init__(self):
        k = self.k
        if k < 2:
            raise ValueError(f"k must be >= 2, got {k}")
        expected = (2 * k - 2, k - 1, 1, k * (k - 1))
        got = (self.r, self.alpha, self.beta, self.B)
        if got != expected:
            raise ValueError(
                f"(r, alpha, beta, B) must be {expected} for k={k}, got {got}")
        if self.n <= self.r:
            raise ValueError(f"need n > r, got n={self.n}, r={self.r}")
        # Minimum-storage point: alpha = B/k and beta = B/(k(r-k+1)).
        assert self.alpha * k == self.B
        assert self.beta * k * (self.r - k + 1) == self.B

    @classmethod
    def from_nk(cls, n: int, k: int) -> "MsrParams":
        return cls(n=n, k=k, r=2 * k - 2, alpha=k - 1, beta=1, B=k * (k - 1))


@dataclass(frozen=True)
class EncodingMatrix:
    """A validated encoding matrix with its building blocks."""

    params: MsrParams
    field: Field
    psi: Matrix                  # n x r
    phi: Matrix                  # n x alpha
    lambdas: tuple[int, ...]     # diagonal scalars, one per node
    points: tuple[int, ...]      # evaluation points behind phi

    def psi_row(self, node: int) -> list[int]:
        """Row of psi for a 1-based node index."""
        return self.psi.row(node - 1)

    def phi_row(self, node: int) -> list[int]:
        return self.phi.row(node - 1)


@dataclass(frozen=True)
class MessageMatrix:
    """The r x alpha stack of the two symmetric halves."""

    m: Matrix
    params: MsrParams

    @property
    def s1(self) -> Matrix:
        return self.m.submatrix_rows(range(self.params.alpha))

    @property
    def s2(self) -> Matrix:
        return self.m.submatrix_rows(range(self.params.alpha, self.params.r))


@dataclass(frozen=True)
class CodeMatrix:
    """n x alpha code matrix; row i is node i's share of one record."""

    c: Matrix
    params: MsrParams

    def node_share(self, node: int) -> list[int]:
        return self.c.row(node - 1)


def build_encoding_matrix(params: MsrParams, field: Field,
                          points: Sequence[int] | None = None) -> EncodingMatrix:
    """Construct and validate psi = [phi | diag(lambdas) phi].

    ``phi`` is the Vandermonde matrix on the points (default 1..n) and
    ``lambdas[i] = points[i]**alpha``.  Raises "field too small" when no
    valid point set can exist in GF(q), "lambda collision" when this
    particular point set yields repeated lambdas, and "rank deficiency"
    if a checked submatrix condition fails.
    """
    n, alpha, r = params.n, params.alpha, params.r
    q = field.modulus
    if points is None:
        if q <= n:
            raise ValueError(f"field too small: q={q} cannot supply {n} distinct nonzero points")
        # The map x -> x^alpha on nonzero elements has image of size
        # (q-1)/gcd(alpha, q-1); fewer than n images means no point set
        # with distinct lambdas exists at all.
        image = (q - 1) // gcd(alpha, q - 1)
        if image < n:
            raise ValueError(
                f"field too small: x^{alpha} takes only {image} values in GF({q}), need {n}")
        pts = tuple(range(1, n + 1))
    else:
        pts = tuple(int(p) % q for p in points)
        if len(pts) != n:
            raise ValueError(f"need {n} points, got {len(pts)}")

    phi = vandermonde(field, pts, alpha)  # rejects duplicate/zero points
    lambdas = tuple(pow(x, alpha, q) for x in pts)
    if len(set(lambdas)) != n:
        seen: dict[int, int] = {}
        for i, lam in enumerate(lambdas):
            if lam in seen:
                raise ValueError(
                    f"lambda collision: points {pts[seen[lam]]} and {pts[i]} "
                    f"share x^{alpha} = {lam}; supply other points or a larger field")
            seen[lam] = i

    psi = phi.hstack(_row_scaled(phi, lambdas))

    _check_row_subsets(psi, r, "psi")
    _check_row_subsets(phi, alpha, "phi")
    return EncodingMatrix(params=params, field=field, psi=psi, phi=phi,
                          lambdas=lambdas, points=pts)


def _row_scaled(m: Matrix, scalars: Sequence[int]) -> Matrix:
    q = m.field.modulus
    rows = [[v * scalars[i] % q for v in m.row(i)] for i in range(m.rows)]
    return Matrix.from_rows(m.field, rows)


def _check_row_subsets(m: Matrix, size: int, name: str) -> None:
    """Every ``size``-row submatrix must have full rank.

    Exhaustive up to 12 nodes (covers every test size); randomized spot
    checks beyond that.
    """
    n = m.rows
    if n <= _EXHAUSTIVE_NODE_LIMIT:
        subsets = itertools.combinations(range(n), size)
    else:
        rng = random.Random(0x504D5352)  # fixed seed: validation is deterministic
        count = min(_SPOT_CHECKS, comb(n, size))
        subsets = (tuple(sorted(rng.sample(range(n), size))) for _ in range(count))
    for subset in subsets:
        sub = m.submatrix_rows(subset)
        if sub.rank() < size:
            raise ValueError(
                f"rank deficiency: rows {tuple(i + 1 for i in subset)} of {name} are dependent")


def _triangle_positions(alpha: int) -> list[tuple[int, int]]:
    """Upper-triangle coordinates in row-major order."""
    return [(i, j) for i in range(alpha) for j in range(i, alpha)]


def message_matrix_from_record(record: Sequence[int], params: MsrParams,
                               field: Field) -> MessageMatrix:
    """Pack B record symbols into the two symmetric halves.

    The first B/2 symbols fill the upper triangle of the first half in
    row-major order, the rest fill the second half the same way; lower
    triangles mirror the upper ones.
    """
    if len(record) != params.B:
        raise ValueError(f"record must have {params.B} symbols, got {len(record)}")
    alpha = params.alpha
    q = field.modulus
    half = params.B // 2
    positions = _triangle_positions(alpha)
    s1 = [[0] * alpha for _ in range(alpha)]
    s2 = [[0] * alpha for _ in range(alpha)]
    for idx, (i, j) in enumerate(positions):
        v1 = int(record[idx]) % q
        v2 = int(record[half + idx]) % q
        s1[i][j] = s1[j][i] = v1
        s2[i][j] = s2[j][i] = v2
    return MessageMatrix(m=Matrix.from_rows(field, s1 + s2), params=params)


def record_from_message_matrix(msg: MessageMatrix) -> list[int]:
    """Exact inverse of :func:`message_matrix_from_record`."""
    params = msg.params
    alpha = params.alpha
    s1, s2 = msg.s1, msg.s2
    for s in (s1, s2):
        for i in range(alpha):
            for j in range(i + 1, alpha):
                if s.entry(i, j) != s.entry(j, i):
                    raise ValueError("corrupt message matrix: halves are not symmetric")
    record = [s1.entry(i, j) for i, j in _triangle_positions(alpha)]
    record += [s2.entry(i, j) for i, j in _triangle_positions(alpha)]
    return record


def encode(msg: MessageMatrix, enc: EncodingMatrix) -> CodeMatrix:
    """code = psi @ message; row i is node i's alpha symbols."""
    return CodeMatrix(c=enc.psi @ msg.m, params=enc.params)


def recover(shares: Mapping[int, Sequence[int]], enc: EncodingMatrix) -> MessageMatrix:
    """Rebuild the message matrix from the shares of any k nodes.

    Structured two-phase decode: with C_K the k share rows and Phi_K the
    matching phi rows, G = C_K Phi_K^T splits as P + diag(lambda_K) Q
    where P = Phi_K S1 Phi_K^T and Q = Phi_K S2 Phi_K^T are symmetric.
    Distinct lambdas separate every off-diagonal (P_ij, Q_ij) pair from
    (G_ij, G_ji); per node the off-diagonal column solves an alpha x alpha
    system for S1 Phi_i^T (resp. S2), and one more alpha-column solve
    yields the halves themselves.
    """
    params, field = enc.params, enc.field
    k, alpha, q = params.k, params.alpha, field.modulus
    nodes = sorted(shares)
    if len(nodes) != k:
        raise ValueError(f"need exactly {k} distinct node shares, got {len(nodes)}")
    for node in nodes:
        if not 1 <= node <= params.n:
            raise ValueError(f"node index {node} out of range [1, {params.n}]")
        if len(shares[node]) != alpha:
            raise ValueError(f"share of node {node} must have {alpha} symbols")

    c_k = Matrix.from_rows(field, [shares[node] for node in nodes])
    phi_k = enc.phi.submatrix_rows([node - 1 for node in nodes])
    lam = [enc.lambdas[node - 1] for node in nodes]
    g = c_k @ phi_k.transpose()

    # Off-diagonal entries of the two symmetric Gram matrices.
    p = [[0] * k for _ in range(k)]
    s2g = [[0] * k for _ in range(k)]
    for a in range(k):
        for b in range(a + 1, k):
            diff_inv = pow((lam[a] - lam[b]) % q, q - 2, q)
            q_ab = (g.entry(a, b) - g.entry(b, a)) * diff_inv % q
            p_ab = (g.entry(a, b) - lam[a] * q_ab) % q
            p[a][b] = p[b][a] = p_ab
            s2g[a][b] = s2g[b][a] = q_ab

    # Per node: solve for the columns S1 Phi_i^T and S2 Phi_i^T.
    y1_cols: list[list[int]] = []
    y2_cols: list[list[int]] = []
    for a in range(k):
        others = [b for b in range(k) if b != a]
        coeff = phi_k.submatrix_rows(others)
        try:
            v1 = coeff.solve(Matrix.column(field, [p[b][a] for b in others]))
            v2 = coeff.solve(Matrix.column(field, [s2g[b][a] for b in others]))
        except SingularMatrixError as exc:
            raise ValueError("invalid encoding matrix") from exc
        y1_cols.append(v1.col(0))
        y2_cols.append(v2.col(0))

    # Any alpha of the k columns pin down the half: phi_sub @ S = Y^T
    # (symmetry turns the column stack into a row system).
    phi_sub = phi_k.submatrix_rows(range(alpha))
    y1_t = Matrix.from_rows(field, y1_cols[:alpha])
    y2_t = Matrix.from_rows(field, y2_cols[:alpha])
    try:
        s1 = phi_sub.solve(y1_t)
        s2 = phi_sub.solve(y2_t)
    except SingularMatrixError as exc:
        raise ValueError("invalid encoding matrix") from exc

    msg = MessageMatrix(m=Matrix.from_rows(field, s1.to_rows() + s2.to_rows()),
                        params=params)
    # The share map is bijective, so a mismatch here means corrupted input
    # (or a broken encoding matrix), not an unlucky instance.
    reencoded = enc.psi.submatrix_rows([node - 1 for node in nodes]) @ msg.m
    if reencoded != c_k:
        raise ValueError("corrupt shares: inconsistent with any record")
    return msg


def recover_oracle(shares: Mapping[int, Sequence[int]], enc: EncodingMatrix) -> MessageMatrix:
    """Recovery by one generic linear solve in the B record symbols.

    Independent cross-check for :func:`recover`: substitutes the symmetry
    constraints into the k*alpha share equations and solves the resulting
    B x B system directly.
    """
    params, field = enc.params, enc.field
    k, alpha, B = params.k, params.alpha, params.B
    nodes = sorted(shares)
    if len(nodes) < k:
        raise ValueError(f"underdetermined: {len(nodes)} shares < k = {k}")
    if len(nodes) > k:
        raise ValueError(f"need exactly {k} shares, got {len(nodes)}")

    # Record-symbol index for each message-matrix cell.
    half = B // 2
    sym_of_cell: dict[tuple[int, int], int] = {}
    for idx, (i, j) in enumerate(_triangle_positions(alpha)):
        sym_of_cell[(i, j)] = sym_of_cell[(j, i)] = idx
        sym_of_cell[(alpha + i, j)] = sym_of_cell[(alpha + j, i)] = half + idx

    coeffs: list[list[int]] = []
    rhs: list[int] = []
    for node in nodes:
        if len(shares[node]) != alpha:
            raise ValueError(f"share of node {node} must have {alpha} symbols")
        psi_row = enc.psi_row(node)
        for c in range(alpha):
            row = [0] * B
            for j in range(params.r):
                row[sym_of_cell[(j, c)]] = (row[sym_of_cell[(j, c)]] + psi_row[j]) % field.modulus
            coeffs.append(row)
            rhs.append(int(shares[node][c]))
    try:
        solution = Matrix.from_rows(field, coeffs).solve(Matrix.column(field, rhs))
    except SingularMatrixError as exc:
        raise ValueError("corrupt shares: system is singular") from exc
    return message_matrix_from_record(solution.col(0), params, field)


def repair_helper_symbol(helper: int, helper_share: Sequence[int],
                         failed: int, enc: EncodingMatrix) -> int:
    """The one symbol (beta = 1) a helper contributes to a repair:
    its share row dotted with the failed node's phi row."""
    n = enc.params.n
    if not 1 <= failed <= n:
        raise ValueError(f"failed index {failed} out of range [1, {n}]")
    if not 1 <= helper <= n:
        raise ValueError(f"helper index {helper} out of range [1, {n}]")
    if helper == failed:
        raise ValueError("helper must differ from the failed node")
    if len(helper_share) != enc.params.alpha:
        raise ValueError(f"helper share must have {enc.params.alpha} symbols")
    return dot_mod([int(v) for v in helper_share], enc.phi_row(failed), enc.field.modulus)


def repair_regenerate(failed: int, helper_symbols: Mapping[int, int],
                      enc: EncodingMatrix) -> list[int]:
    """Rebuild the failed node's exact share from r helper symbols.

    The helpers' symbols stack into psi_helpers @ (M phi_f^T); solving the
    r x r system gives the two alpha-vectors S1 phi_f^T and S2 phi_f^T,
    and symmetry of the halves turns them back into the stored row
    phi_f S1 + lambda_f phi_f S2.
    """
    params, field = enc.params, enc.field
    r, alpha, q = params.r, params.alpha, field.modulus
    if not 1 <= failed <= params.n:
        raise ValueError(f"failed index {failed} out of range [1, {params.n}]")
    helpers = sorted(helper_symbols)
    if len(helpers) != r:
        raise ValueError(f"need exactly {r} helper symbols, got {len(helpers)}")
    for h in helpers:
        if not 1 <= h <= params.n:
            raise ValueError(f"helper index {h} out of range [1, {params.n}]")
        if h == failed:
            raise ValueError("helpers must not include the failed node")

    psi_h = enc.psi.submatrix_rows([h - 1 for h in helpers])
    rhs = Matrix.column(field, [helper_symbols[h] for h in helpers])
    try:
        z = psi_h.solve(rhs).col(0)  # [S1 phi_f^T ; S2 phi_f^T]
    except SingularMatrixError as exc:
        raise ValueError("invalid encoding matrix") from exc
    lam_f = enc.lambdas[failed - 1]
    return [(z[j] + lam_f * z[alpha + j]) % q for j in range(alpha)]
