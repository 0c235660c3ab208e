"""What honest-but-curious users can learn from relay traffic.

A coalition of users pools everything its members see: writes in their own
spaces, route metadata, and the queries they proxy themselves.  Topics act
as pseudonyms; the question is how far the coalition can narrow down which
user is behind a topic.

Analytic side: analytic_single and analytic_coalition compute, for a given
geometry and protocol, the partition of users into indistinguishability
classes (users in one class generate identically distributed views for the
coalition, so no amount of traffic separates them).  security_margin boils
a partition down to one number: with n users and a largest class of size g,
the margin is 1 - log_n(n - g); margin eps means all but n^(1-eps) users sit
together in the biggest class.

Empirical side: CoalitionTracker consumes transcript events and maintains,
per topic, a candidate set of possible sources, shrinking it only by
deductions that are sound after every prefix of the stream:

* a user id inside a route is a relay or proxy for that query, never its
  source, so it can be struck off;
* a write whose remaining route is as long as routes get was made by the
  source itself, so the source is a member of that space;
* the arrivals seen in a space get addressed, over time, to every member
  except exactly one (the member the source reaches that space through, or
  the source itself when it is a member); once the census is complete the
  missing member pins the source inside its closed neighbourhood.

Under the encrypted protocol relayed payloads are unreadable, so a member
learns topics only from queries it proxies itself.  The arrival spaces then
classify the source's distance: a single fixed space means the source
shares that space, two distinct arrival spaces prove distance two.  The
relay_metadata switch additionally attributes unreadable route metadata to
the topic under observation; that is only valid when a single linked
sequence is being tracked, so it stays off by default.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import GeneralisedQuadrangle
from .upir import (
    ALL_READERS,
    DB_REQUEST,
    DB_RESPONSE,
    WRITE_REQUEST,
    QueryWorkload,
    UPIRSystem,
    iter_protocol_events,
)


class DegeneratePartition(Exception):
    """Every class is a singleton: the adversary resolves everyone, and a
    security margin is meaningless."""


@dataclass(frozen=True)
class PseudonymityPartition:
    """Indistinguishability classes of users, for a fixed observer set."""

    n_users: int
    classes: tuple
    observers: tuple
    protocol: int

    def class_of(self, u):
        for cls in self.classes:
            if u in cls:
                return cls
        raise KeyError(u)

    def sizes(self):
        return tuple(sorted((len(c) for c in self.classes), reverse=True))

    def is_discrete(self):
        return all(len(c) == 1 for c in self.classes)


def _make_partition(n, groups, observers, protocol):
    classes = tuple(sorted((frozenset(g) for g in groups), key=min))
    total = sum(len(c) for c in classes)
    if total != n or len(set().union(*classes)) != n:
        raise ValueError("groups do not partition the users")
    return PseudonymityPartition(n, classes, tuple(sorted(observers)), protocol)


def _structure_of(geom):
    return geom.base if isinstance(geom, GeneralisedQuadrangle) else geom


def analytic_single(geom, observer, protocol):
    """Best-possible inference for one honest-but-curious user.

    Plaintext protocol: users sharing a space with the observer are fully
    identifiable, and users at distance two are identifiable up to the span
    they generate with the observer (supported for generalised quadrangles,
    and for diameter-one structures such as projective planes, where every
    user is resolved).

    Encrypted protocol: users group by which spaces they share with the
    observer; those sharing none are one big class.
    """
    structure = _structure_of(geom)
    n = structure.n_points
    c = observer
    if not 0 <= c < n:
        raise ValueError(f"observer {c} out of range")
    if protocol == 2:
        by_key = {}
        obs_spaces = structure.point_to_blocks[c]
        for u in range(n):
            if u == c:
                continue
            shared = frozenset(
                m for m in obs_spaces if u in structure.block_sets[m]
            )
            by_key.setdefault(shared, set()).add(u)
        if frozenset() in by_key and not isinstance(geom, GeneralisedQuadrangle):
            # distance beyond two would be lumped in wrongly; the encrypted
            # protocol does not run there anyway
            sysm = UPIRSystem(structure)
            if sysm.diameter() > 2:
                raise ValueError("analysis needs every user pair within distance 2")
        return _make_partition(n, [{c}] + list(by_key.values()), (c,), 2)
    if protocol != 1:
        raise ValueError("protocol must be 1 or 2")
    coll = structure.collinearity()
    near = coll[c]
    far = [u for u in range(n) if u != c and u not in near]
    groups = [{c}] + [{u} for u in near]
    if far:
        if not isinstance(geom, GeneralisedQuadrangle):
            raise ValueError(
                "plaintext analysis beyond diameter one needs a generalised quadrangle"
            )
        assigned = set()
        for u in far:
            if u in assigned:
                continue
            cls = set(geom.span((c, u)).members) - {c}
            groups.append(cls)
            assigned |= cls
    return _make_partition(n, groups, (c,), 1)


def partition_meet(parts):
    """Common refinement: what observers deduce by pooling their views."""
    if not parts:
        raise ValueError("need at least one partition")
    n = parts[0].n_users
    protocol = parts[0].protocol
    for p in parts[1:]:
        if p.n_users != n or p.protocol != protocol:
            raise ValueError("partitions disagree on users or protocol")
    index_maps = []
    for p in parts:
        idx = {}
        for i, cls in enumerate(p.classes):
            for u in cls:
                idx[u] = i
        index_maps.append(idx)
    by_key = {}
    for u in range(n):
        by_key.setdefault(tuple(m[u] for m in index_maps), set()).add(u)
    observers = set()
    for p in parts:
        observers |= set(p.observers)
    return _make_partition(n, by_key.values(), observers, protocol)


def analytic_coalition(geom, coalition, protocol):
    return partition_meet([analytic_single(geom, c, protocol) for c in coalition])


@dataclass(frozen=True)
class SecurityMargin:
    n_users: int
    giant: int
    residue: int
    epsilon_star: float


def security_margin(partition):
    """Largest class g, residue n - g, and the exponent margin
    1 - log_n(residue).  Raises DegeneratePartition when every class is a
    singleton (the observers resolve everyone)."""
    n = partition.n_users
    giant = max(len(c) for c in partition.classes)
    if giant <= 1:
        raise DegeneratePartition(
            f"all {n} classes are singletons; every user is resolved"
        )
    residue = n - giant
    eps = 1.0 if residue == 0 else 1.0 - math.log(residue) / math.log(n)
    return SecurityMargin(n, giant, residue, eps)


def secure_at(partition, epsilon):
    """Is the residue (users outside the biggest class) at most n^(1-eps)?"""
    n = partition.n_users
    giant = max(len(c) for c in partition.classes)
    return n - giant <= n ** (1.0 - epsilon) + 1e-9


# -- empirical inference --


@dataclass(frozen=True)
class CandidateState:
    topic: str
    candidates: frozenset
    rounds_observed: int
    converged: bool
    source: int | None = None


class _TopicState:
    __slots__ = (
        "cand", "census", "census_fired", "arrivals",
        "d1_fired", "d2_fired", "checked_len", "checked_result",
    )

    def __init__(self, cand):
        self.cand = cand
        self.census = {}        # (member, space) -> addressees seen
        self.census_fired = set()
        self.arrivals = {}      # member -> {space: request count}
        self.d1_fired = set()
        self.d2_fired = set()
        self.checked_len = -1
        self.checked_result = False


class CoalitionTracker:
    """Per-topic candidate sets over a stream of transcript events.

    Feed raw events in order with observe(); the tracker applies each
    member's visibility filter itself.  Tracked topics are assumed to
    originate outside the coalition (members already know their own).

    The candidate set only ever shrinks, and the true source is never
    removed.  converged(topic) reports whether the set has reached an
    indistinguishability class of the supplied analytic partition (or a
    singleton, when none is given); past that point no further shrinking is
    possible.
    """

    D1_MIN_ARRIVALS = 50
    D1_MIN_FRACTION = 0.95

    def __init__(self, system, coalition, protocol, analytic=None,
                 relay_metadata=False):
        if protocol not in (1, 2):
            raise ValueError("protocol must be 1 or 2")
        self.system = system
        self.coalition = tuple(sorted(set(coalition)))
        self.protocol = protocol
        self.relay_metadata = relay_metadata
        self._class_set = None if analytic is None else set(analytic.classes)
        self._route_len = 2 * system.diameter() - 1
        self._members = system.structure.block_sets
        self._initial = frozenset(range(system.n_users)) - set(self.coalition)
        self._topics = {}
        self._far = {}
        self._single_topic = None
        self._pending_meta = []

    def topics(self):
        return tuple(sorted(self._topics))

    def candidates(self, topic):
        st = self._topics.get(topic)
        return frozenset(st.cand) if st is not None else self._initial

    def converged(self, topic):
        st = self._topics.get(topic)
        if st is None:
            return False
        k = len(st.cand)
        if k == st.checked_len:
            return st.checked_result
        st.checked_len = k
        if self._class_set is not None:
            st.checked_result = frozenset(st.cand) in self._class_set
        else:
            st.checked_result = k == 1
        return st.checked_result

    def state(self, topic):
        return CandidateState(topic, self.candidates(topic), -1,
                              self.converged(topic))

    def observe(self, event):
        if event.kind in (DB_REQUEST, DB_RESPONSE):
            return  # a proxied query names its proxy, never its source
        mset = self._members[event.space]
        for m in self.coalition:
            if m in mset:
                readable = event.visibility == ALL_READERS or m == event.proxy
                self._ingest(m, event, readable)

    def feed(self, events):
        for ev in events:
            self.observe(ev)

    # internals

    def _topic_state(self, topic):
        st = self._topics.get(topic)
        if st is None:
            if self.relay_metadata and self._topics:
                raise ValueError(
                    "metadata attribution assumes one topic; saw a second"
                )
            st = _TopicState(set(self._initial))
            self._topics[topic] = st
            if self.relay_metadata:
                self._single_topic = topic
                pending, self._pending_meta = self._pending_meta, []
                for m, ev in pending:
                    self._route_rules(st, m, ev)
        return st

    def _ingest(self, m, event, readable):
        if not readable:
            if self.relay_metadata:
                if self._single_topic is None:
                    self._pending_meta.append((m, event))
                else:
                    self._route_rules(self._topics[self._single_topic], m, event)
            return
        st = self._topic_state(event.topic)
        if self.protocol == 1:
            self._route_rules(st, m, event)
        else:
            # readable under encryption means m proxied this query itself
            if event.kind == WRITE_REQUEST and len(event.path) == 1:
                self._arrival_rules(st, m, event.space)

    def _route_rules(self, st, m, event):
        cand = st.cand
        route = event.path
        for x in route[0::2]:
            cand.discard(x)
        if len(route) == self._route_len:
            cand &= self._members[event.space]
        if len(route) == 1:
            key = (m, event.space)
            seen = st.census.setdefault(key, set())
            seen.add(route[0])
            if key not in st.census_fired:
                members = self._members[event.space]
                if len(seen) == len(members) - 1:
                    st.census_fired.add(key)
                    (missing,) = members - seen
                    hood = self.system.neighbors(missing)
                    if missing == m:
                        cand &= hood
                    else:
                        cand.intersection_update(hood | {missing})

    def _far_set(self, m):
        far = self._far.get(m)
        if far is None:
            row = self.system.distance_row(m)
            far = frozenset(u for u, d in enumerate(row) if d >= 2)
            self._far[m] = far
        return far

    def _arrival_rules(self, st, m, space):
        arr = st.arrivals.setdefault(m, {})
        arr[space] = arr.get(space, 0) + 1
        if len(arr) >= 2:
            # a shared-space source always arrives through that space, so a
            # second space is proof of distance two
            if m not in st.d2_fired:
                st.d2_fired.add(m)
                st.cand &= self._far_set(m)
        elif m not in st.d1_fired:
            total = sum(arr.values())
            if total >= self.D1_MIN_ARRIVALS:
                top_space, top = max(arr.items(), key=lambda kv: kv[1])
                if top >= self.D1_MIN_FRACTION * total:
                    st.d1_fired.add(m)
                    st.cand &= self._members[top_space] - {m}


def converge_topics(system, coalition, protocol, topic_sources, queries_cap,
                    seed, analytic=None, relay_metadata=False, on_step=None):
    """Run one workload per topic and track it to convergence or the cap.

    topic_sources maps topic -> source user.  Each topic gets its own
    deterministic substream of the seed, so results do not depend on which
    other topics are present.  on_step, when given, is called after every
    query as on_step(topic, queries_so_far, candidates); the set it receives
    is live tracker state, to be read and not kept.  Returns
    {topic: CandidateState}.
    """
    from itertools import groupby

    out = {}
    topics = sorted(topic_sources)
    children = np.random.SeedSequence(seed).spawn(len(topics))
    for topic, child in zip(topics, children):
        source = topic_sources[topic]
        rng = np.random.default_rng(child)
        tracker = CoalitionTracker(system, coalition, protocol,
                                   analytic=analytic,
                                   relay_metadata=relay_metadata)
        workload = QueryWorkload(source, topic, queries_cap, protocol=protocol)
        stream = iter_protocol_events(system, workload, rng)
        rounds = 0
        converged = False
        for qi, group in groupby(stream, key=lambda e: e.query):
            for ev in group:
                tracker.observe(ev)
            rounds = qi + 1
            if on_step is not None:
                st = tracker._topics.get(topic)
                on_step(topic, rounds,
                        st.cand if st is not None else tracker._initial)
            if tracker.converged(topic):
                converged = True
                break
        out[topic] = CandidateState(topic, tracker.candidates(topic), rounds,
                                    converged, source)
    return out


def empirical_infer(transcript, coalition, analytic=None, relay_metadata=False):
    """Batch inference over a finished transcript.  Uses the transcript's
    protocol; rounds_observed is the total query count in the log."""
    protocol = transcript.protocol
    if protocol not in (1, 2):
        raise ValueError("transcript does not carry a valid protocol")
    tracker = CoalitionTracker(transcript.system, coalition, protocol,
                               analytic=analytic,
                               relay_metadata=relay_metadata)
    rounds = 0
    for ev in transcript.events:
        if ev.kind == DB_REQUEST:
            rounds += 1
        tracker.observe(ev)
    return {
        t: CandidateState(t, tracker.candidates(t), rounds, tracker.converged(t))
        for t in tracker.topics()
    }


# -- coalition placement and sweeps --


def place_coalition(geom, size, placement, seed=0):
    """Choose coalition members on a geometry.

    random: uniform without replacement.  spread: greedy, each new member
    maximising its minimum distance to those already chosen (ties to the
    smallest id).  line: the first member plus, for following points of its
    space, one neighbour from outside that space apiece; such a coalition
    dominates the space, and under the encrypted protocol resolves every
    covered point, so size is capped at the space size.
    """
    structure = _structure_of(geom)
    n = structure.n_points
    if not 1 <= size <= n:
        raise ValueError(f"size {size} out of range")
    if placement == "random":
        rng = np.random.default_rng(seed)
        return tuple(sorted(int(x) for x in rng.choice(n, size, replace=False)))
    coll = structure.collinearity()
    if placement == "spread":
        rng = np.random.default_rng(seed)
        chosen = [int(rng.integers(n))]
        while len(chosen) < size:
            pool = set(chosen)
            best = None
            for u in range(n):
                if u in pool:
                    continue
                d = min(1 if u in coll[v] else 2 for v in chosen)
                key = (d, -u)
                if best is None or key > best[0]:
                    best = (key, u)
            chosen.append(best[1])
        return tuple(sorted(chosen))
    if placement == "line":
        block = structure.blocks[int(np.random.default_rng(seed).integers(structure.n_blocks))]
        if size > len(block):
            raise ValueError(
                f"line placement holds at most {len(block)} members"
            )
        anchor = block[0]
        chosen = [anchor]
        off_line = set()
        for w in block[1:size]:
            y = min(coll[w] - set(block) - off_line)
            off_line.add(y)
            chosen.append(y)
        return tuple(sorted(chosen))
    raise ValueError(f"unknown placement {placement!r}")


@dataclass(frozen=True)
class SweepRow:
    family: str
    q: int
    s: int
    t: int
    n_users: int
    protocol: int
    coalition_size: int
    placement: str
    coalition: tuple
    giant: int
    residue: int
    epsilon_star: float
    residue_bound: int
    within_bound: bool


def residue_bound(s, t, size):
    """Worst-case users outside the biggest class for a coalition of the
    given size: each member strips out at most its closed neighbourhood,
    plus slack for overlaps."""
    return size * (s * t + s) + size * size * (t + 1)


def coalition_sweep(geoms, protocol, sizes, placements, seed=0):
    """Analytic margins across geometries, coalition sizes and placements.

    geoms is an iterable of (family, q, quadrangle).  Rows come out in the
    iteration order of the inputs; a fixed seed makes placements (and so
    the whole table) reproducible.
    """
    rows = []
    counter = 0
    for family, q, geom in geoms:
        n = geom.base.n_points
        for size in sizes:
            for placement in placements:
                coalition = place_coalition(geom, size, placement,
                                            seed=seed + counter)
                counter += 1
                meet = analytic_coalition(geom, coalition, protocol)
                giant = max(len(c) for c in meet.classes)
                residue = n - giant
                if giant <= 1:
                    eps = 0.0
                elif residue == 0:
                    eps = 1.0
                else:
                    eps = 1.0 - math.log(residue) / math.log(n)
                bound = residue_bound(geom.s, geom.t, size)
                rows.append(SweepRow(
                    family, q, geom.s, geom.t, n, protocol, size, placement,
                    coalition, giant, residue, eps, bound, residue <= bound,
                ))
    return rows
