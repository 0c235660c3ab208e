"""Finite incidence geometries: projective planes and generalised quadrangles.

Constructions
-------------
``build_pg2(f)``   the projective plane PG(2,q): canonical points of the
                   plane, blocks = kernels of the linear forms.
``build_w3(f)``    the symplectic quadrangle W(3,q): all points of PG(3,q),
                   blocks = the lines that are totally isotropic for the
                   alternating form <u,v> = u0*v1 - u1*v0 + u2*v3 - u3*v2.
                   Order (q,q).
``build_q4(f)``    the parabolic quadrangle Q(4,q): points of the quadric
                   x0^2 = x1*x2 + x3*x4 in PG(4,q), blocks = lines of
                   PG(4,q) lying entirely on the quadric.  Order (q,q).

Point ids are assigned by lexicographic order of canonical coordinates and
blocks are sorted lexicographically, so identical parameters always produce
the identical structure.  Every constructor routes its output through the
verifier before returning; a failure there is an implementation bug and
aborts with VerificationFailed.

A generalised quadrangle of order (s,t) is a point/block geometry in which
blocks have s+1 points, points lie on t+1 blocks, two points share at most
one block, and for every non-incident point/block pair (x, L) exactly one
point of L is collinear with x.  Consequences used throughout: there are
(s+1)(st+1) points and (t+1)(st+1) blocks, no triangles, |B1(x)| = s(t+1)
and |B2(x)| = s^2*t, and s <= t^2, t <= s^2 whenever s,t > 1 (Higman).
"""

import json
from dataclasses import dataclass
from itertools import combinations

from .fields import dot, normalize_point, projective_points, vec_add, vec_scale


class AxiomViolation(Exception):
    """A defining axiom or counting identity failed; carries a witness."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class HigmanViolation(AxiomViolation):
    """Constant degrees exist but violate s <= t^2 or t <= s^2."""


class VerificationFailed(Exception):
    """A freshly constructed structure failed verification (internal bug)."""


class CollinearGeneratorsError(ValueError):
    """Perp/span generators must be pairwise non-collinear."""


class IncidenceStructure:
    """Points 0..n-1 and blocks as sorted tuples of point ids.

    Blocks are stored sorted lexicographically.  Every block must be a set
    (no repeated points) and every point must lie on at least one block.
    """

    def __init__(self, n_points, blocks, label=""):
        if n_points < 1:
            raise ValueError("need at least one point")
        cleaned = []
        for blk in blocks:
            tup = tuple(sorted(blk))
            if len(set(tup)) != len(tup):
                raise ValueError(f"block {blk!r} repeats a point")
            if not tup:
                raise ValueError("empty block")
            if tup[0] < 0 or tup[-1] >= n_points:
                raise ValueError(f"block {blk!r} uses an id outside 0..{n_points - 1}")
            cleaned.append(tup)
        cleaned.sort()
        self.n_points = n_points
        self.blocks = tuple(cleaned)
        self.label = label
        per_point = [[] for _ in range(n_points)]
        for bi, blk in enumerate(self.blocks):
            for x in blk:
                per_point[x].append(bi)
        uncovered = [x for x, bs in enumerate(per_point) if not bs]
        if uncovered:
            raise ValueError(f"points {uncovered[:5]} lie on no block")
        self.point_to_blocks = tuple(tuple(bs) for bs in per_point)
        self.block_sets = tuple(frozenset(b) for b in self.blocks)

    @property
    def n_blocks(self):
        return len(self.blocks)

    def collinearity(self):
        """Per point, the set of other points sharing a block with it."""
        coll = [set() for _ in range(self.n_points)]
        for blk in self.blocks:
            for x in blk:
                coll[x].update(blk)
        return [frozenset(c - {x}) for x, c in enumerate(coll)]

    def __eq__(self, other):
        return (
            isinstance(other, IncidenceStructure)
            and self.n_points == other.n_points
            and self.blocks == other.blocks
        )

    def __repr__(self):
        lbl = f" {self.label}" if self.label else ""
        return f"<IncidenceStructure{lbl}: {self.n_points} points, {self.n_blocks} blocks>"


def verify_gq(inc):
    """Check every defining axiom of a generalised quadrangle on ``inc``.

    Returns the order (s, t).  Raises AxiomViolation (HigmanViolation for the
    parameter bound) with a concrete witness on the first failure.  Checks,
    in order: constant block size, constant point degree, total point count,
    Higman's inequality, pairwise block intersections, the one-point
    projection axiom for non-incident point/block pairs, and independently
    that no triangle of blocks exists.
    """
    sizes = {len(b) for b in inc.blocks}
    if len(sizes) != 1:
        raise AxiomViolation(f"block sizes not constant: {sorted(sizes)}", sorted(sizes))
    s = sizes.pop() - 1
    degrees = {len(bs) for bs in inc.point_to_blocks}
    if len(degrees) != 1:
        raise AxiomViolation(f"point degrees not constant: {sorted(degrees)}", sorted(degrees))
    t = degrees.pop() - 1
    if s < 1 or t < 1:
        raise AxiomViolation(f"degenerate order ({s},{t})", (s, t))
    if inc.n_points != (s + 1) * (s * t + 1):
        raise AxiomViolation(
            f"point count {inc.n_points} != (s+1)(st+1) = {(s + 1) * (s * t + 1)}",
            inc.n_points,
        )
    if inc.n_blocks != (t + 1) * (s * t + 1):
        raise AxiomViolation(
            f"block count {inc.n_blocks} != (t+1)(st+1) = {(t + 1) * (s * t + 1)}",
            inc.n_blocks,
        )
    if s > 1 and t > 1 and (s > t * t or t > s * s):
        raise HigmanViolation(f"order ({s},{t}) violates s <= t^2 and t <= s^2", (s, t))

    for (i, a), (j, b) in combinations(enumerate(inc.block_sets), 2):
        common = a & b
        if len(common) > 1:
            raise AxiomViolation(
                f"blocks {i} and {j} share {sorted(common)}", (i, j, sorted(common))
            )

    coll = inc.collinearity()
    for li, blk in enumerate(inc.blocks):
        bset = inc.block_sets[li]
        for x in range(inc.n_points):
            if x in bset:
                continue
            hits = sum(1 for y in blk if y in coll[x])
            if hits != 1:
                raise AxiomViolation(
                    f"point {x} sees {hits} points of block {li}, expected 1",
                    (x, li, hits),
                )

    # triangle-freeness, checked independently of the projection axiom:
    # two blocks through x plus any collinear pair straddling them close a
    # triangle of three blocks meeting pairwise in three distinct points
    for x in range(inc.n_points):
        through = inc.point_to_blocks[x]
        for bi, bj in combinations(through, 2):
            for y in inc.blocks[bi]:
                if y == x:
                    continue
                for z in inc.blocks[bj]:
                    if z != x and z in coll[y]:
                        raise AxiomViolation(
                            f"triangle on points {x},{y},{z}", (x, y, z)
                        )
    return s, t


def verify_plane(inc):
    """Check projective-plane axioms on ``inc``; returns the order q.

    Every pair of points lies on exactly one block, every pair of blocks
    meets in exactly one point, block size is constant q+1, there are
    q^2+q+1 points and blocks, and a quadrilateral (4 points, no 3 on a
    block) exists.
    """
    sizes = {len(b) for b in inc.blocks}
    if len(sizes) != 1:
        raise AxiomViolation(f"block sizes not constant: {sorted(sizes)}", sorted(sizes))
    q = sizes.pop() - 1
    if q < 2:
        raise AxiomViolation(f"order {q} too small for a plane", q)
    expect = q * q + q + 1
    if inc.n_points != expect or inc.n_blocks != expect:
        raise AxiomViolation(
            f"expected {expect} points and blocks, got {inc.n_points}/{inc.n_blocks}",
            (inc.n_points, inc.n_blocks),
        )
    pair_count = {}
    for blk in inc.blocks:
        for a, b in combinations(blk, 2):
            pair_count[(a, b)] = pair_count.get((a, b), 0) + 1
            if pair_count[(a, b)] > 1:
                raise AxiomViolation(f"points {a},{b} on two blocks", (a, b))
    if len(pair_count) != inc.n_points * (inc.n_points - 1) // 2:
        missing = next(
            (a, b)
            for a, b in combinations(range(inc.n_points), 2)
            if (a, b) not in pair_count
        )
        raise AxiomViolation(f"points {missing} on no common block", missing)
    for (i, a), (j, b) in combinations(enumerate(inc.block_sets), 2):
        if len(a & b) != 1:
            raise AxiomViolation(f"blocks {i},{j} meet in {len(a & b)} points", (i, j))
    # quadrilateral: a,b on L; c off L; d off L and off the blocks a-c, b-c
    L = inc.block_sets[0]
    a, b = inc.blocks[0][0], inc.blocks[0][1]
    c = next(x for x in range(inc.n_points) if x not in L)
    blocked = set(L)
    for bi in inc.point_to_blocks[c]:
        if a in inc.block_sets[bi] or b in inc.block_sets[bi]:
            blocked |= inc.block_sets[bi]
    d = next((x for x in range(inc.n_points) if x not in blocked), None)
    if d is None:
        raise AxiomViolation("no quadrilateral: plane is degenerate", None)
    return q


def build_pg2(f):
    """The projective plane PG(2,q) as an IncidenceStructure."""
    pts = projective_points(f, 2)
    index = {p: i for i, p in enumerate(pts)}
    blocks = []
    for form in pts:  # the plane is self-dual: forms enumerate like points
        blocks.append(tuple(sorted(index[p] for p in pts if dot(f, form, p) == 0)))
    inc = IncidenceStructure(len(pts), blocks, label=f"pg2(q={f.q})")
    try:
        verify_plane(inc)
    except AxiomViolation as exc:
        raise VerificationFailed(f"pg2(q={f.q}) failed verification: {exc}") from exc
    return inc


def _line_points(f, u, v):
    """All q+1 canonical points of the projective line through u and v."""
    pts = [normalize_point(f, v)]
    for lam in f.elements:
        pts.append(normalize_point(f, vec_add(f, u, vec_scale(f, lam, v))))
    return pts


class GeneralisedQuadrangle:
    """A verified GQ of order (s,t) with precomputed collinearity."""

    def __init__(self, base, s, t):
        self.base = base
        self.s = s
        self.t = t
        self.coll = base.collinearity()

    @classmethod
    def from_structure(cls, inc):
        s, t = verify_gq(inc)
        return cls(inc, s, t)

    @property
    def n_points(self):
        return self.base.n_points

    def ball(self, x, r):
        """Points at collinearity distance exactly r from x (r = 1 or 2)."""
        if r == 1:
            return set(self.coll[x])
        if r == 2:
            return set(range(self.n_points)) - self.coll[x] - {x}
        raise ValueError("r must be 1 or 2")

    def common_perp(self, gens):
        """Points collinear with every generator.

        Generators must be pairwise non-collinear (CollinearGeneratorsError
        otherwise).  For a non-collinear pair this is the t+1 common
        neighbours.
        """
        gens = tuple(gens)
        if not gens:
            raise ValueError("need at least one generator")
        if len(set(gens)) != len(gens):
            raise CollinearGeneratorsError(f"repeated generator in {gens}")
        for a, b in combinations(gens, 2):
            if b in self.coll[a]:
                raise CollinearGeneratorsError(f"generators {a},{b} are collinear")
        perp = set(self.coll[gens[0]])
        for g in gens[1:]:
            perp &= self.coll[g]
        return perp

    def span(self, gens):
        """The span of the generators: the perp of their common perp."""
        gens = tuple(gens)
        perp = self.common_perp(gens)
        members = None
        for w in perp:
            members = set(self.coll[w]) if members is None else members & self.coll[w]
        return SpanSet(generators=frozenset(gens), perp=frozenset(perp),
                       members=frozenset(members if members is not None else ()))


@dataclass(frozen=True)
class SpanSet:
    """Span closure: generators, their common perp, and the members.

    Members contain the generators and are pairwise non-collinear; a span is
    already closed (spanning any two of its members reproduces it).
    """

    generators: frozenset
    perp: frozenset
    members: frozenset


def build_w3(f):
    """The symplectic quadrangle W(3,q) over GF(q)."""
    q = f.q
    pts = projective_points(f, 3)
    index = {p: i for i, p in enumerate(pts)}

    def symp(u, v):
        a = f.sub(f.mul(u[0], v[1]), f.mul(u[1], v[0]))
        b = f.sub(f.mul(u[2], v[3]), f.mul(u[3], v[2]))
        return f.add(a, b)

    blocks = set()
    covered = set()
    n = len(pts)
    for i in range(n):
        u = pts[i]
        for j in range(i + 1, n):
            if (i, j) in covered:
                continue
            v = pts[j]
            if symp(u, v) != 0:
                continue
            line = sorted(index[p] for p in _line_points(f, u, v))
            blocks.add(tuple(line))
            for a, b in combinations(line, 2):
                covered.add((a, b))
    inc = IncidenceStructure(n, blocks, label=f"w3(q={q})")
    try:
        gq = GeneralisedQuadrangle.from_structure(inc)
    except AxiomViolation as exc:
        raise VerificationFailed(f"w3(q={q}) failed verification: {exc}") from exc
    return gq


def build_q4(f):
    """The parabolic quadrangle Q(4,q) over GF(q)."""
    q = f.q

    def qform(x):
        return f.sub(f.mul(x[0], x[0]), f.add(f.mul(x[1], x[2]), f.mul(x[3], x[4])))

    pts = [p for p in projective_points(f, 4) if qform(p) == 0]
    index = {p: i for i, p in enumerate(pts)}
    on_quadric = set(pts)
    blocks = set()
    covered = set()
    n = len(pts)
    for i in range(n):
        u = pts[i]
        for j in range(i + 1, n):
            if (i, j) in covered:
                continue
            line = _line_points(f, u, pts[j])
            if any(p not in on_quadric for p in line):
                continue
            ids = sorted(index[p] for p in line)
            blocks.add(tuple(ids))
            for a, b in combinations(ids, 2):
                covered.add((a, b))
    inc = IncidenceStructure(n, blocks, label=f"q4(q={q})")
    try:
        gq = GeneralisedQuadrangle.from_structure(inc)
    except AxiomViolation as exc:
        raise VerificationFailed(f"q4(q={q}) failed verification: {exc}") from exc
    return gq


# -- geometry interchange files --


@dataclass
class GeometryFile:
    """A loaded geometry file: the structure plus its metadata."""

    structure: IncidenceStructure
    family: str
    q: int | None
    s: int | None
    t: int | None


def save_geometry(path, inc, family, q=None, s=None, t=None):
    """Write the interchange JSON: family, q, s, t, points, blocks.

    Blocks are sorted lexicographically; point ids are dense 0..n-1.
    """
    data = {
        "family": family,
        "q": q,
        "s": s,
        "t": t,
        "points": list(range(inc.n_points)),
        "blocks": [list(b) for b in sorted(inc.blocks)],
    }
    with open(path, "w") as fh:
        json.dump(data, fh, indent=1)
        fh.write("\n")


def load_geometry(path):
    """Read an interchange JSON.  Accepts arbitrary incidence structures
    (hand-built designs included); structural validation happens in the
    IncidenceStructure constructor."""
    with open(path) as fh:
        data = json.load(fh)
    points = data["points"]
    if sorted(points) != list(range(len(points))):
        raise ValueError("points must be exactly 0..n-1")
    family = data.get("family", "custom")
    inc = IncidenceStructure(len(points), data["blocks"], label=family)
    return GeometryFile(
        structure=inc,
        family=family,
        q=data.get("q"),
        s=data.get("s"),
        t=data.get("t"),
    )
