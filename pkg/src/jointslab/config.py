"""Joints configurations: detection, multiplicity bookkeeping, generators.

A configuration holds families of varieties (dimension k_i appearing
with multiplicity m_i, so that d = sum m_i k_i) together with the joints
they form.  A point is a joint when some admissible tuple of member
varieties -- m_i members from family i -- passes through it with
tangent spaces that are independent and span the ambient space.  Each
joint records one designated tuple (the lexicographically first
qualifying one) and the multiset of all qualifying tuples, whose size is
the joint's multiplicity.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field as dc_field

from . import linalg
from .errors import (
    DimensionMismatch,
    FieldTooSmall,
    MissingCandidates,
    NotAJoint,
    SingularPoint,
    UnsupportedKind,
)
from .field import DEFAULT_PRIME, FieldSpec
from .varieties import (
    Chart,
    VarietySpec,
    _flat_equations,
    contains_point,
    make_chart,
    tangent_directions,
    variety_from_json,
    variety_to_json,
)


@dataclass
class Family:
    """m_i varieties of dimension k_i chosen at a time."""

    k: int
    m: int
    members: list

    def to_json(self, F: FieldSpec) -> dict:
        return {
            "k": self.k,
            "m": self.m,
            "members": [variety_to_json(V, F) for V in self.members],
        }

    @staticmethod
    def from_json(obj: dict, F: FieldSpec) -> "Family":
        return Family(
            k=int(obj["k"]),
            m=int(obj["m"]),
            members=[variety_from_json(v, F) for v in obj["members"]],
        )


@dataclass
class JointsConfiguration:
    """Families, joints, designated tuples, and multiplicity index."""

    field: FieldSpec
    ambient: int
    families: list
    joints: list  # points, preassigned order = list order
    chosen: list  # per joint: tuple of (family_idx, member_idx), length s
    multiplicity: list  # per joint: list of qualifying tuple choices
    seed: int = 0

    @property
    def s(self) -> int:
        return sum(f.m for f in self.families)

    def member(self, ref) -> VarietySpec:
        fi, mi = ref
        return self.families[fi].members[mi]

    def all_members(self):
        for fi, fam in enumerate(self.families):
            for mi, _ in enumerate(fam.members):
                yield (fi, mi)

    def M(self, joint_idx: int) -> int:
        return len(self.multiplicity[joint_idx])

    def joints_on(self, ref) -> list:
        """Indices of joints lying on the given member (geometric)."""
        V = self.member(ref)
        return [
            i for i, p in enumerate(self.joints) if contains_point(V, p, self.field)
        ]

    def designated_charts(self, joint_idx: int, truncation: int) -> list:
        p = self.joints[joint_idx]
        return [
            make_chart(self.member(ref), p, truncation, self.field)
            for ref in self.chosen[joint_idx]
        ]

    def to_json(self) -> dict:
        return {
            "field": self.field.to_json(),
            "families": [f.to_json(self.field) for f in self.families],
            "joints": [[str(x) for x in p] for p in self.joints],
            "seed": self.seed,
        }

    @staticmethod
    def from_json(obj: dict) -> "JointsConfiguration":
        F = FieldSpec.from_json(obj["field"])
        families = [Family.from_json(f, F) for f in obj["families"]]
        joints = [tuple(F.of(x) for x in p) for p in obj["joints"]]
        return detect_joints(F, families, candidates=joints, seed=int(obj.get("seed", 0)))


# ---------------------------------------------------------------------------
# Joint detection
# ---------------------------------------------------------------------------


def is_joint(p, charts: list) -> bool:
    """True iff the charts' tangent spaces are independent and spanning."""
    if not charts:
        return False
    F = charts[0].field
    d = charts[0].owner.ambient
    dims = sum(c.owner.dim for c in charts)
    if dims != d:
        raise DimensionMismatch(f"tangent dimensions sum to {dims}, ambient is {d}")
    from .varieties import tangent_space

    rows = []
    for c in charts:
        if tuple(c.center) != tuple(F.of(x) for x in p):
            raise DimensionMismatch("chart not centered at the point")
        rows.extend(tangent_space(c))
    return linalg.rank(F, rows) == d


def _tuple_qualifies(F: FieldSpec, families, choice, p, d) -> bool:
    """choice: per family, a tuple of member indices; check containment,
    regularity, and direct-sum spanning tangents at p."""
    rows = []
    for fi, picks in enumerate(choice):
        for mi in picks:
            V = families[fi].members[mi]
            if not contains_point(V, p, F):
                return False
            try:
                rows.extend(tangent_directions(V, p, F))
            except SingularPoint:
                return False
    return linalg.rank(F, rows) == d


def detect_joints(
    F: FieldSpec,
    families: list,
    candidates: list | None = None,
    seed: int = 0,
) -> JointsConfiguration:
    """Build the configuration from families plus candidate points.

    For flat-only families the candidates may be omitted: intersection
    points of admissible flat tuples are solved exactly.  Otherwise
    candidates must be supplied.
    """
    d = sum(f.m * f.k for f in families)
    for f in families:
        if f.m > len(f.members):
            raise DimensionMismatch("family multiplicity exceeds member count")
    if candidates is None:
        if any(V.kind != "flat" for f in families for V in f.members):
            raise MissingCandidates(
                "candidate points are required when non-flat members are present"
            )
        candidates = _flat_tuple_intersections(F, families, d)
    seen = set()
    joints, chosen, multiplicity = [], [], []
    for raw_p in candidates:
        p = tuple(F.of(x) for x in raw_p)
        if p in seen:
            continue
        seen.add(p)
        qualifying = []
        per_family = []
        for f in families:
            on = [
                mi
                for mi, V in enumerate(f.members)
                if contains_point(V, p, F)
            ]
            per_family.append(list(itertools.combinations(on, f.m)))
        for choice in itertools.product(*per_family):
            if _tuple_qualifies(F, families, choice, p, d):
                qualifying.append(choice)
        if qualifying:
            joints.append(p)
            chosen.append(_flatten_choice(qualifying[0]))
            multiplicity.append(qualifying)
    return JointsConfiguration(F, d, families, joints, chosen, multiplicity, seed)


def _flatten_choice(choice) -> tuple:
    return tuple((fi, mi) for fi, picks in enumerate(choice) for mi in picks)


def _flat_tuple_intersections(F: FieldSpec, families, d: int) -> list:
    """Unique solutions of the stacked linear systems of admissible flat
    tuples; used when candidates are not supplied."""
    out = []
    per_family = [list(itertools.combinations(range(len(f.members)), f.m)) for f in families]
    for choice in itertools.product(*per_family):
        rows, rhs = [], []
        for fi, picks in enumerate(choice):
            for mi in picks:
                V = families[fi].members[mi]
                for eq in _flat_equations(F, d, V.point, V.directions):
                    row = [F.zero] * d
                    for e, c in eq.terms.items():
                        if sum(e) == 1:
                            row[e.index(1)] = c
                    rows.append(row)
                    rhs.append(F.neg(eq.coefficient((0,) * d)))
        if linalg.rank(F, rows) != d:
            continue
        sol = linalg.solve(F, rows, rhs)
        if sol is not None:
            out.append(tuple(sol))
    return out


# ---------------------------------------------------------------------------
# Connectivity
# ---------------------------------------------------------------------------


def connected_components(cfg: JointsConfiguration) -> list:
    """Split along the graph joining joints that share a member variety."""
    n = len(cfg.joints)
    incidence = {ref: set(cfg.joints_on(ref)) for ref in cfg.all_members()}
    adj = [set() for _ in range(n)]
    for on in incidence.values():
        for a in on:
            adj[a] |= on
    seen = [False] * n
    comps = []
    for start in range(n):
        if seen[start]:
            continue
        comp = []
        stack = [start]
        seen[start] = True
        while stack:
            v = stack.pop()
            comp.append(v)
            for w in adj[v]:
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
        comps.append(sorted(comp))
    out = []
    for comp in comps:
        keep = set(comp)
        out.append(
            JointsConfiguration(
                cfg.field,
                cfg.ambient,
                cfg.families,
                [cfg.joints[i] for i in comp],
                [cfg.chosen[i] for i in comp],
                [cfg.multiplicity[i] for i in comp],
                cfg.seed,
            )
        )
    return out


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------


def _genericity_guard(F: FieldSpec, size: int):
    if F.kind == "prime" and F.p <= 10**6 * size * size:
        raise FieldTooSmall(
            f"p = {F.p} below genericity threshold 10^6 * {size}^2"
        )


def _random_vector(rng, F, d):
    if F.kind == "prime":
        return [F.of(rng.randrange(F.p)) for _ in range(d)]
    return [F.of(rng.randint(-10**6, 10**6)) for _ in range(d)]


def _random_flat(rng, F, d, k) -> VarietySpec:
    while True:
        dirs = [_random_vector(rng, F, d) for _ in range(k)]
        if linalg.rank(F, dirs) == k:
            break
    point = _random_vector(rng, F, d)
    return VarietySpec(
        kind="flat", ambient=d, dim=k, degree=1,
        point=tuple(point), directions=tuple(tuple(u) for u in dirs),
    )


def _random_hyperplanes(rng, F, d, h):
    """h hyperplanes a.x = b in generic position, as (normal, offset)."""
    planes = []
    while len(planes) < h:
        a = _random_vector(rng, F, d)
        if all(not x for x in a):
            continue
        b = _random_vector(rng, F, 1)[0]
        planes.append((a, b))
    return planes


def _intersect_hyperplanes(F, planes, d):
    """Point + direction basis of the intersection flat, or None if the
    normals are dependent."""
    rows = [a for a, _ in planes]
    rhs = [b for _, b in planes]
    if linalg.rank(F, rows) != len(planes):
        return None
    sol = linalg.solve(F, rows, rhs)
    dirs = linalg.nullspace(F, rows)
    return sol, dirs


def generate(
    kind: str,
    field: FieldSpec | None = None,
    seed: int = 0,
    h: int = 5,
    t: int = 3,
    d: int | None = None,
    k: int = 2,
    m: int = 3,
    count: int = 4,
    through_origin: bool = False,
) -> JointsConfiguration:
    """Seeded construction of the standard example configurations."""
    F = field or FieldSpec("prime", DEFAULT_PRIME)
    rng = random.Random(seed)
    if kind == "generic-hyperplanes":
        d = 3 if d is None else d
        if d not in (3, 6):
            raise UnsupportedKind("generic-hyperplanes supports ambient 3 or 6")
        _genericity_guard(F, h)
        planes = _random_hyperplanes(rng, F, d, h)
        cut = 2 if d == 3 else 4  # hyperplanes per member flat
        members = []
        for subset in itertools.combinations(range(h), cut):
            got = _intersect_hyperplanes(F, [planes[i] for i in subset], d)
            if got is None:
                raise FieldTooSmall("degenerate hyperplane sample; change the seed")
            point, dirs = got
            members.append(
                VarietySpec(
                    kind="flat", ambient=d, dim=d - cut, degree=1,
                    point=tuple(point), directions=tuple(tuple(u) for u in dirs),
                    label="-".join(str(i) for i in subset),
                )
            )
        fam = Family(k=d - cut, m=3, members=members)
        candidates = []
        for subset in itertools.combinations(range(h), d):
            got = _intersect_hyperplanes(F, [planes[i] for i in subset], d)
            if got is not None:
                candidates.append(tuple(got[0]))
        return detect_joints(F, [fam], candidates=candidates, seed=seed)
    if kind == "coordinate-flats":
        d = 6 if d is None else d
        if d % k:
            raise DimensionMismatch("k must divide the ambient dimension")
        members = []
        for j in range(d // k):
            dirs = []
            for i in range(k):
                e = [F.zero] * d
                e[j * k + i] = F.one
                dirs.append(tuple(e))
            members.append(
                VarietySpec(
                    kind="flat", ambient=d, dim=k, degree=1,
                    point=(F.zero,) * d, directions=tuple(dirs),
                )
            )
        fam = Family(k=k, m=d // k, members=members)
        return detect_joints(F, [fam], seed=seed)
    if kind == "grid":
        _genericity_guard(F, t)
        A = _distinct_scalars(rng, F, t)
        points = [(a, b) for a in A for b in A]
        return _planar_points_config(F, points, seed)
    if kind == "line":
        _genericity_guard(F, t)
        base = _random_vector(rng, F, 2)
        direction = _random_vector(rng, F, 2)
        while all(not x for x in direction):
            direction = _random_vector(rng, F, 2)
        steps = _distinct_scalars(rng, F, t * t)
        points = [
            (F.add(base[0], F.mul(s, direction[0])), F.add(base[1], F.mul(s, direction[1])))
            for s in steps
        ]
        return _planar_points_config(F, points, seed)
    if kind == "random-flats":
        d = 6 if d is None else d
        if (d % k) or count < d // k:
            raise DimensionMismatch("need count >= d/k random flats of dimension k")
        _genericity_guard(F, count)
        members = [_random_flat(rng, F, d, k) for _ in range(count)]
        if through_origin:
            members = [
                VarietySpec(
                    kind="flat", ambient=d, dim=k, degree=1,
                    point=(F.zero,) * d, directions=V.directions,
                )
                for V in members
            ]
        fam = Family(k=k, m=d // k, members=members)
        return detect_joints(F, [fam], seed=seed)
    raise UnsupportedKind(f"unknown generator kind {kind!r}")


def _distinct_scalars(rng, F, t):
    out = []
    seen = set()
    while len(out) < t:
        v = F.of(rng.randrange(F.p)) if F.kind == "prime" else F.of(rng.randint(-10**6, 10**6))
        if v not in seen:
            seen.add(v)
            out.append(v)
    return out


def _planar_points_config(F: FieldSpec, points, seed) -> JointsConfiguration:
    """Points on the full plane as a one-member, one-family configuration;
    every point is trivially a joint of the ambient 2-flat."""
    plane = VarietySpec(
        kind="flat", ambient=2, dim=2, degree=1,
        point=(F.zero, F.zero),
        directions=((F.one, F.zero), (F.zero, F.one)),
    )
    fam = Family(k=2, m=1, members=[plane])
    return detect_joints(F, [fam], candidates=points, seed=seed)


def grid_line_composite(F: FieldSpec, t: int = 3, seed: int = 0) -> JointsConfiguration:
    """Grid points plus the same number of collinear points, all on the
    full plane; used to exercise handicap balancing across two clusters."""
    rng = random.Random(seed)
    _genericity_guard(F, 2 * t)
    A = _distinct_scalars(rng, F, t)
    grid_pts = [(a, b) for a in A for b in A]
    # a line clear of the grid: vary the first coordinate at a fresh height
    heights = set(A)
    y0 = next(v for v in _distinct_scalars(rng, F, t * t + len(A)) if v not in heights)
    xs = _distinct_scalars(rng, F, t * t)
    line_pts = [(x, y0) for x in xs]
    return _planar_points_config(F, grid_pts + line_pts, seed)
