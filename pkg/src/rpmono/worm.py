# Copyright (c) 2025 CoReason, Inc.
#
# This software is proprietary and dual-licensed.
# Licensed under the Prosperity Public License 3.0 (the "License").
# A copy of the license is available at https://prosperitylicense.com/versions/3.0.0
# For details, see the LICENSE file.
# Commercial use beyond a 30-day trial requires a separate license.
#
# Source Code: https://github.com/CoReason-AI/rpmono

"""
Worm Monte Carlo for the random path model.

The chain lives on closed configurations plus configurations carrying one open walk,
the worm, whose two unpaired ends are its tail and head. Open states are weighted with
the worm-end singletons removed from the local statistics, so that the closed sector is
sampled with the model measure. Moves:

- open a one-link worm from a closed state, or remove it again;
- extend the head by a new link, or retract the head link;
- close the worm by pairing head and tail at a common vertex, or unpair a pair;
- recolour a closed monochromatic loop.

All proposals use labelled links: a new link goes to a uniform position among the
m_e + 1 slots of its edge, which cancels the 1/m_e! of the measure.

The stationary law is the model measure times two sector fugacities: open states carry
open_fugacity and every cross-colour pairing carries defect_fugacity. Both are tuned
during the first half of the burn-in so that the chain spends comparable time in the
open and closed sectors and, for crossing observables, in the monochromatic and
defect-pair closed sectors. Measurements divide the fugacities back out, so the
estimates are ratios of model-measure sums.
"""

import math
import time
from typing import Callable, Dict, List, NamedTuple, Optional, Set, Tuple

import numpy as np

from rpmono.exceptions import ConvergenceError
from rpmono.lattice import difference_table
from rpmono.models import LocalStats, PathKind, Provenance, TwoPointTable
from rpmono.presets import check_ergodic
from rpmono.random_path import PathConfig, RPMParams, edge_factor, stats_from_elements
from rpmono.statistics import batch_sums, jackknife_ratio
from rpmono.utils.logger import logger

DEFAULT_BATCHES = 20
MOVE_TYPES = 4
MAX_DEFECTS = 2
TUNING_STAGES = 10
RETUNE_LIMIT = 100.0
FUGACITY_RANGE = (1e-8, 1e8)
MIN_SAMPLED_BATCHES = 2

# sector counters used while tuning
OPEN, CLOSED, MONO, PAIR = range(4)


class _Link:
    __slots__ = ("edge", "colour", "partner")

    def __init__(self, edge: int, colour: int) -> None:
        self.edge = edge
        self.colour = colour
        self.partner: List[Optional[Tuple["_Link", int]]] = [None, None]


End = Tuple[_Link, int]


class Proposal(NamedTuple):
    move: str
    args: Tuple[int, ...]
    probability: float


class _Outcome(NamedTuple):
    reverse_probability: float
    touched: Set[int]
    edge_ratio: float
    undo: Callable[[], None]


class ChainResult(NamedTuple):
    """Per-sweep measurements of one chain, after burn-in."""

    numerators: np.ndarray
    denominators: np.ndarray
    connectivity: np.ndarray
    acceptance: float
    open_fugacity: float
    defect_fugacity: float


def _bounded(value: float) -> float:
    low, high = FUGACITY_RANGE
    return min(max(value, low), high)


def _limited(factor: float) -> float:
    return min(max(factor, 1.0 / RETUNE_LIMIT), RETUNE_LIMIT)


class WormState:
    """Labelled links per edge, their pairings, and the optional worm ends."""

    def __init__(self, p: RPMParams) -> None:
        self.geometry = p.geometry
        self.N = p.N
        self.links: List[List[_Link]] = [[] for _ in range(p.geometry.n_edges)]
        self.tail: Optional[End] = None
        self.head: Optional[End] = None
        self.total = 0
        # U and K per vertex with the worm ends left out, kept current by accepted moves
        self.weights: List[float] = [p.weight(LocalStats.empty(p.N))] * p.geometry.n_vertices
        self.K: List[int] = [0] * p.geometry.n_vertices
        self.defects = 0

    @property
    def is_open(self) -> bool:
        return self.head is not None

    def vertex(self, end: End) -> int:
        return self.geometry.edge_end_vertex(end[0].edge, end[1])

    def insert(self, e: int, pos: int, colour: int) -> _Link:
        link = _Link(e, colour)
        self.links[e].insert(pos, link)
        self.total += 1
        return link

    def remove(self, link: _Link) -> int:
        row = self.links[link.edge]
        pos = next(i for i, other in enumerate(row) if other is link)
        del row[pos]
        self.total -= 1
        return pos

    @staticmethod
    def pair(a: End, b: End) -> None:
        a[0].partner[a[1]] = b
        b[0].partner[b[1]] = a

    @staticmethod
    def unpair(a: End) -> End:
        b = a[0].partner[a[1]]
        assert b is not None
        a[0].partner[a[1]] = None
        b[0].partner[b[1]] = None
        return b

    def ends_at(self, x: int) -> List[End]:
        return [(link, side) for e, side in self.geometry.incidence[x] for link in self.links[e]]

    def pairs_at(self, x: int) -> List[Tuple[End, End]]:
        """Pairs at x in a fixed order: by the position of their first end among the ends at x."""
        pairs: List[Tuple[End, End]] = []
        seen: Set[Tuple[int, int]] = set()
        for link, side in self.ends_at(x):
            partner = link.partner[side]
            if partner is None or (id(link), side) in seen:
                continue
            seen.add((id(partner[0]), partner[1]))
            pairs.append(((link, side), partner))
        return pairs

    def stats(self, x: int, with_ends: bool = False) -> LocalStats:
        elements: List[List[Tuple[int, int]]] = []
        for (a, _), (b, _) in self.pairs_at(x):
            elements.append([(a.edge, a.colour), (b.edge, b.colour)])
        if with_ends:
            for end in (self.tail, self.head):
                if end is not None and self.vertex(end) == x:
                    elements.append([(end[0].edge, end[0].colour)])
        return stats_from_elements(self.N, elements)

    def component(self, link: _Link) -> Tuple[List[_Link], bool]:
        """Links of the loop or walk through link, and whether it is a closed loop."""
        members = [link]
        seen = {id(link)}
        closed = True
        for side in (0, 1):
            end: End = (link, side)
            while True:
                nxt = end[0].partner[end[1]]
                if nxt is None:
                    closed = False
                    break
                if id(nxt[0]) in seen:
                    break
                seen.add(id(nxt[0]))
                members.append(nxt[0])
                end = (nxt[0], 1 - nxt[1])
        return members, closed

    def loops(self) -> List[Set[int]]:
        """Vertex sets of the closed loops."""
        seen: Set[int] = set()
        out: List[Set[int]] = []
        for row in self.links:
            for link in row:
                if id(link) in seen:
                    continue
                members, closed = self.component(link)
                seen.update(id(member) for member in members)
                if closed:
                    vertices: Set[int] = set()
                    for member in members:
                        u, v, _ = self.geometry.edges[member.edge]
                        vertices.update((u, v))
                    out.append(vertices)
        return out

    def link_at(self, flat: int) -> _Link:
        for row in self.links:
            if flat < len(row):
                return row[flat]
            flat -= len(row)
        raise IndexError("Link index out of range")

    def key(self) -> Tuple[object, ...]:
        """Canonical hashable description of the labelled state."""
        index = {id(link): (e, i) for e, row in enumerate(self.links) for i, link in enumerate(row)}

        def describe(end: Optional[End]) -> Optional[Tuple[int, int, int]]:
            if end is None:
                return None
            e, i = index[id(end[0])]
            return (e, i, end[1])

        edges = tuple(
            tuple((link.colour, describe(link.partner[0]), describe(link.partner[1])) for link in row)
            for row in self.links
        )
        return (edges, describe(self.tail), describe(self.head))

    def to_config(self) -> PathConfig:
        g = self.geometry
        index = {id(link): (e, i) for e, row in enumerate(self.links) for i, link in enumerate(row)}
        pairings = []
        for x in range(g.n_vertices):
            elements: List[Tuple[Tuple[int, int], ...]] = [
                (index[id(a)], index[id(b)]) for (a, _), (b, _) in self.pairs_at(x)
            ]
            elements.extend(
                (index[id(end[0])],) for end in (self.tail, self.head) if end is not None and self.vertex(end) == x
            )
            pairings.append(tuple(elements))
        return PathConfig(
            geometry=g,
            N=self.N,
            m=tuple(len(row) for row in self.links),
            colours=tuple(tuple(link.colour for link in row) for row in self.links),
            pairings=tuple(pairings),
        )


class WormSampler:
    """
    Metropolis-Hastings worm chain for one RPMParams and observable kind.

    The crossing kind restricts the chain to states with at most two cross-colour
    pairings in total. Open states are weighted by open_fugacity; under the crossing
    kind each cross-colour pairing is weighted by defect_fugacity. Spin-source chains
    keep defect_fugacity at 1.
    """

    def __init__(
        self, p: RPMParams, kind: PathKind, open_fugacity: float = 1.0, defect_fugacity: float = 1.0
    ) -> None:
        if open_fugacity <= 0.0 or defect_fugacity <= 0.0:
            raise ValueError("Sector fugacities must be positive")
        self.p = p
        self.kind = kind
        self.initial_fugacities = (open_fugacity, defect_fugacity if kind == PathKind.CROSSING else 1.0)
        self.open_fugacity, self.defect_fugacity = self.initial_fugacities
        # difference[a, b] is the index of b - a
        self.difference = difference_table(p.geometry)

    def new_state(self) -> WormState:
        return WormState(self.p)

    def vertex_weight(self, st: WormState, x: int) -> float:
        return self.p.weight(st.stats(x))

    def state_weight(self, st: WormState) -> float:
        """prod_e beta^m_e / m_e! * prod_x U with the worm ends left out of the statistics."""
        w = 1.0
        for row in st.links:
            w *= edge_factor(self.p.beta, len(row))
        for x in range(self.p.geometry.n_vertices):
            if w == 0.0:
                return 0.0
            w *= self.vertex_weight(st, x)
        return w

    def count_defects(self, st: WormState) -> int:
        return sum(st.stats(x).K for x in range(self.p.geometry.n_vertices))

    def in_class(self, st: WormState) -> bool:
        return self.kind != PathKind.CROSSING or self.count_defects(st) <= MAX_DEFECTS

    def _can_insert(self, st: WormState, e: int) -> bool:
        return self.p.m_max is None or len(st.links[e]) < self.p.m_max

    # proposals

    def draw(self, st: WormState, rng: np.random.Generator) -> Optional[Proposal]:
        """One proposal drawn with the probabilities listed by proposals()."""
        g = self.p.geometry
        N = self.p.N
        V = g.n_vertices
        move = int(rng.integers(MOVE_TYPES))
        base = 1.0 / MOVE_TYPES
        if move == 0:
            if not st.is_open:
                x = int(rng.integers(V))
                slots = g.incidence[x]
                slot = int(rng.integers(len(slots)))
                e = slots[slot][0]
                colour = 1 + int(rng.integers(N))
                pos = int(rng.integers(len(st.links[e]) + 1))
                q = base / V / len(slots) / N / (len(st.links[e]) + 1)
                return Proposal("open", (x, slot, colour, pos), q)
            assert st.head is not None and st.tail is not None
            if st.head[0] is st.tail[0]:
                return Proposal("remove", (), base)
            return None
        if move == 1:
            if not st.is_open:
                return None
            assert st.head is not None and st.tail is not None
            if rng.random() < 0.5:
                slots = g.incidence[st.vertex(st.head)]
                slot = int(rng.integers(len(slots)))
                e = slots[slot][0]
                colour = 1 + int(rng.integers(N))
                pos = int(rng.integers(len(st.links[e]) + 1))
                q = base / 2 / len(slots) / N / (len(st.links[e]) + 1)
                return Proposal("extend", (slot, colour, pos), q)
            if st.head[0] is st.tail[0]:
                return None
            return Proposal("retract", (), base / 2)
        if move == 2:
            if st.is_open:
                assert st.head is not None and st.tail is not None
                if st.vertex(st.head) == st.vertex(st.tail):
                    return Proposal("close", (), base)
                return None
            x = int(rng.integers(V))
            pairs = st.pairs_at(x)
            if not pairs:
                return None
            i = int(rng.integers(len(pairs)))
            orientation = int(rng.integers(2))
            return Proposal("unpair", (x, i, orientation), base / V / len(pairs) / 2)
        if st.total == 0:
            return None
        flat = int(rng.integers(st.total))
        colour = 1 + int(rng.integers(N))
        return Proposal("recolour", (flat, colour), base / st.total / N)

    def proposals(self, st: WormState) -> List[Proposal]:
        """Every proposal with positive probability from st."""
        g = self.p.geometry
        N = self.p.N
        V = g.n_vertices
        base = 1.0 / MOVE_TYPES
        out: List[Proposal] = []
        if not st.is_open:
            for x in range(V):
                slots = g.incidence[x]
                for slot, (e, _) in enumerate(slots):
                    m = len(st.links[e])
                    for colour in range(1, N + 1):
                        for pos in range(m + 1):
                            out.append(Proposal("open", (x, slot, colour, pos), base / V / len(slots) / N / (m + 1)))
                pairs = st.pairs_at(x)
                for i in range(len(pairs)):
                    for orientation in (0, 1):
                        out.append(Proposal("unpair", (x, i, orientation), base / V / len(pairs) / 2))
        else:
            assert st.head is not None and st.tail is not None
            if st.head[0] is st.tail[0]:
                out.append(Proposal("remove", (), base))
            else:
                out.append(Proposal("retract", (), base / 2))
            slots = g.incidence[st.vertex(st.head)]
            for slot, (e, _) in enumerate(slots):
                m = len(st.links[e])
                for colour in range(1, N + 1):
                    for pos in range(m + 1):
                        out.append(Proposal("extend", (slot, colour, pos), base / 2 / len(slots) / N / (m + 1)))
            if st.vertex(st.head) == st.vertex(st.tail):
                out.append(Proposal("close", (), base))
        for flat in range(st.total):
            for colour in range(1, N + 1):
                out.append(Proposal("recolour", (flat, colour), base / st.total / N))
        return out

    # moves

    def execute(self, st: WormState, proposal: Proposal) -> Optional[_Outcome]:
        """
        Applies a proposal in place. Returns None when it is not applicable (link cap,
        recolouring something other than a closed monochromatic loop).
        """
        g = self.p.geometry
        N = self.p.N
        V = g.n_vertices
        beta = self.p.beta
        base = 1.0 / MOVE_TYPES
        move, args = proposal.move, proposal.args

        if move in ("open", "extend"):
            if move == "open":
                x, slot, colour, pos = args
            else:
                assert st.head is not None
                x = st.vertex(st.head)
                slot, colour, pos = args
            e, side = g.incidence[x][slot]
            if not self._can_insert(st, e):
                return None
            m = len(st.links[e])
            link = st.insert(e, pos, colour)
            old_tail, old_head = st.tail, st.head
            if move == "open":
                st.tail = (link, side)
                reverse = base
            else:
                assert old_head is not None
                st.pair(old_head, (link, side))
                reverse = base / 2
            st.head = (link, 1 - side)
            touched = {x, st.vertex(st.head)}

            def undo_insert() -> None:
                if old_head is not None:
                    st.unpair(old_head)
                st.remove(link)
                st.tail, st.head = old_tail, old_head

            return _Outcome(reverse, touched, beta / (m + 1), undo_insert)

        if move in ("remove", "retract"):
            assert st.head is not None and st.tail is not None
            link, side = st.head
            far: End = (link, 1 - side)
            old_tail, old_head = st.tail, st.head
            new_head = None if move == "remove" else st.unpair(far)
            pos = st.remove(link)
            m = len(st.links[link.edge])
            anchor = st.vertex(far)
            slots = g.incidence[anchor]
            if move == "remove":
                st.tail = st.head = None
                reverse = base / V / len(slots) / N / (m + 1)
            else:
                st.head = new_head
                reverse = base / 2 / len(slots) / N / (m + 1)
            touched = {anchor, g.edge_end_vertex(link.edge, side)}

            def undo_remove() -> None:
                st.links[link.edge].insert(pos, link)
                st.total += 1
                if new_head is not None:
                    st.pair(new_head, far)
                st.tail, st.head = old_tail, old_head

            ratio = (m + 1) / beta if beta > 0 else math.inf
            return _Outcome(reverse, touched, ratio, undo_remove)

        if move == "close":
            assert st.head is not None and st.tail is not None
            tail, head = st.tail, st.head
            x = st.vertex(head)
            st.pair(tail, head)
            st.tail = st.head = None

            def undo_close() -> None:
                st.unpair(tail)
                st.tail, st.head = tail, head

            return _Outcome(base / V / len(st.pairs_at(x)) / 2, {x}, 1.0, undo_close)

        if move == "unpair":
            x, i, orientation = args
            a, b = st.pairs_at(x)[i]
            st.unpair(a)
            st.tail, st.head = (a, b) if orientation == 0 else (b, a)

            def undo_unpair() -> None:
                st.pair(a, b)
                st.tail = st.head = None

            return _Outcome(base, {x}, 1.0, undo_unpair)

        flat, colour = args
        members, closed = st.component(st.link_at(flat))
        old = members[0].colour
        if not closed or any(member.colour != old for member in members):
            return None
        for member in members:
            member.colour = colour
        touched = set()
        for member in members:
            u, v, _ = g.edges[member.edge]
            touched.update((u, v))

        def undo_recolour() -> None:
            for member in members:
                member.colour = old

        return _Outcome(proposal.probability, touched, 1.0, undo_recolour)

    def step(self, st: WormState, rng: np.random.Generator) -> bool:
        """One Metropolis-Hastings update; returns whether it was accepted."""
        proposal = self.draw(st, rng)
        if proposal is None:
            return False
        was_open = st.is_open
        outcome = self.execute(st, proposal)
        if outcome is None:
            return False
        ratio = outcome.edge_ratio * outcome.reverse_probability / proposal.probability
        if st.is_open != was_open:
            ratio *= self.open_fugacity if st.is_open else 1.0 / self.open_fugacity
        defects = st.defects
        updates: List[Tuple[int, float, int]] = []
        for x in sorted(outcome.touched):
            stats = st.stats(x)
            w = self.p.weight(stats)
            ratio *= w / st.weights[x]
            defects += stats.K - st.K[x]
            updates.append((x, w, stats.K))
        if self.kind == PathKind.CROSSING:
            ratio = 0.0 if defects > MAX_DEFECTS else ratio * self.defect_fugacity ** (defects - st.defects)
        if ratio >= 1.0 or rng.random() < ratio:
            for x, w, k in updates:
                st.weights[x] = w
                st.K[x] = k
            st.defects = defects
            return True
        outcome.undo()
        return False

    # measurements

    def measure_spin_source(self, st: WormState, num: np.ndarray) -> float:
        """Adds the open-state contribution to num; returns the closed-state indicator."""
        if not st.is_open:
            return 1.0
        assert st.head is not None and st.tail is not None
        t, h = st.vertex(st.tail), st.vertex(st.head)
        if t == h:
            return 0.0
        ratio = 1.0
        for x in (t, h):
            ratio *= self.p.weight(st.stats(x, with_ends=True)) / st.weights[x]
        if ratio == 0.0:
            return 0.0
        share = 0.5 * ratio / (self.p.geometry.n_vertices * self.open_fugacity)
        num[self.difference[t, h]] += share
        num[self.difference[h, t]] += share
        return 0.0

    def measure_crossing(self, st: WormState, num: np.ndarray, connect: np.ndarray) -> float:
        """
        Adds defect-pair and loop-connectivity contributions of a closed state; returns
        the indicator of the monochromatic closed sector.
        """
        if st.is_open:
            return 0.0
        V = self.p.geometry.n_vertices
        if st.defects == 0:
            linked = np.zeros((V, V), dtype=bool)
            for vertices in st.loops():
                idx = np.fromiter(vertices, dtype=np.int64)
                linked[np.ix_(idx, idx)] = True
            connect += np.bincount(self.difference[linked], minlength=V) / V
            return 1.0
        defects = [x for x in range(V) if st.K[x]]
        if len(defects) == 2:
            a, b = defects
            share = 1.0 / (V * self.defect_fugacity**2)
            num[self.difference[a, b]] += share
            num[self.difference[b, a]] += share
        return 0.0

    def sector(self, st: WormState) -> int:
        if st.is_open:
            return OPEN
        if self.kind == PathKind.CROSSING:
            if st.defects == 0:
                return MONO
            if st.defects == MAX_DEFECTS:
                return PAIR
        return CLOSED

    def retune(self, counts: np.ndarray) -> None:
        """Moves the fugacities towards equal occupation of the sectors counted in `counts`."""
        closed = counts[CLOSED] + counts[MONO] + counts[PAIR]
        self.open_fugacity = _bounded(self.open_fugacity * _limited((closed + 1.0) / (counts[OPEN] + 1.0)))
        if self.kind == PathKind.CROSSING:
            factor = _limited((counts[MONO] + 1.0) / (counts[PAIR] + 1.0))
            self.defect_fugacity = _bounded(self.defect_fugacity * math.sqrt(factor))

    def run_chain(self, sweeps: int, burn_in: int, seed: np.random.SeedSequence, tune: bool = True) -> ChainResult:
        """
        One chain of `sweeps` sweeps of |T| update attempts; the first burn_in are discarded.

        With tune set, the first half of the burn-in is split into TUNING_STAGES stages
        after each of which the fugacities are retuned from the sector occupation; they
        stay fixed from then on. Fugacities start from the constructor values.
        """
        rng = np.random.default_rng(seed)
        st = self.new_state()
        self.open_fugacity, self.defect_fugacity = self.initial_fugacities
        V = self.p.geometry.n_vertices
        measured = sweeps - burn_in
        num = np.zeros((measured, V))
        den = np.zeros(measured)
        connect = np.zeros((measured, V))
        stage = burn_in // (2 * TUNING_STAGES) if tune else 0
        counts = np.zeros(4)
        accepted = 0
        for sweep in range(sweeps):
            tuning = sweep < stage * TUNING_STAGES
            for _ in range(V):
                accepted += self.step(st, rng)
                if tuning:
                    counts[self.sector(st)] += 1
            if tuning and (sweep + 1) % stage == 0:
                self.retune(counts)
                counts[:] = 0.0
            if sweep < burn_in:
                continue
            row = sweep - burn_in
            if self.kind == PathKind.SPIN_SOURCE:
                den[row] = self.measure_spin_source(st, num[row])
            else:
                den[row] = self.measure_crossing(st, num[row], connect[row])
        return ChainResult(
            numerators=num,
            denominators=den,
            connectivity=connect,
            acceptance=accepted / max(1, sweeps * V),
            open_fugacity=self.open_fugacity,
            defect_fugacity=self.defect_fugacity,
        )


def worm_estimate(
    p: RPMParams,
    kind: PathKind,
    sweeps: int,
    burn_in: int,
    seed: int,
    n_batches: int = DEFAULT_BATCHES,
    chains: int = 1,
) -> TwoPointTable:
    """
    Worm Monte Carlo estimate of G(o, x) with batched-means jackknife errors.

    Args:
        p: Model parameters; m_max is honoured when set.
        kind: spin_source or crossing.
        sweeps: Sweeps per chain, burn-in included.
        burn_in: Sweeps discarded at the start of each chain.
        seed: Root of the SeedSequence that seeds the chains.
        n_batches: Batches per chain for the error estimate.
        chains: Independent chains, merged in chain order.

    Raises:
        NonErgodicPresetError: The preset cannot reach the kind's sector.
        ValueError: sweeps < burn_in, or too few measured sweeps for the batches.
        ConvergenceError: At beta > 0, the normalising sector or some vertex x != o was
            sampled in fewer than two batches, so no error bar can be given.
    """
    if sweeps < burn_in:
        raise ValueError(f"sweeps ({sweeps}) must be at least burn_in ({burn_in})")
    if chains < 1:
        raise ValueError(f"chains must be >= 1 (got {chains})")
    if sweeps - burn_in < n_batches:
        raise ValueError(f"Need at least {n_batches} measured sweeps per chain (got {sweeps - burn_in})")
    check_ergodic(p.weight, kind)
    g = p.geometry
    start = time.perf_counter()
    logger.info(
        f"Worm sampler: {kind.value} shape={g.shape} N={p.N} beta={p.beta} sweeps={sweeps} "
        f"burn_in={burn_in} chains={chains} seed={seed}"
    )
    sampler = WormSampler(p, kind)
    num_batches: List[np.ndarray] = []
    den_batches: List[np.ndarray] = []
    connect_batches: List[np.ndarray] = []
    chain_results: List[ChainResult] = []
    for child in np.random.SeedSequence(seed).spawn(chains):
        result = sampler.run_chain(sweeps, burn_in, child)
        num_batches.append(batch_sums(result.numerators, n_batches))
        den_batches.append(batch_sums(result.denominators, n_batches))
        connect_batches.append(batch_sums(result.connectivity, n_batches))
        chain_results.append(result)
    num_all = np.concatenate(num_batches)
    den_all = np.concatenate(den_batches)
    if p.beta > 0.0:
        sampled = np.count_nonzero(num_all[:, 1:], axis=0)
        missing = [g.vertex(int(x) + 1) for x in np.flatnonzero(sampled < MIN_SAMPLED_BATCHES)]
        if missing:
            raise ConvergenceError(
                f"Vertices {missing[:4]} were sampled in fewer than {MIN_SAMPLED_BATCHES} of {len(num_all)} "
                "batches; increase sweeps",
                achieved_tol=math.inf,
                last_size=sweeps,
            )
    estimate, stderr = jackknife_ratio(num_all, den_all)
    estimate[0] = 0.0
    stderr[0] = 0.0
    acceptance = [r.acceptance for r in chain_results]
    metadata: Dict[str, object] = {
        "kind": kind.value,
        "preset": p.weight.name,
        "N": p.N,
        "beta": p.beta,
        "m_max": p.m_max,
        "shape": list(g.shape),
        "convention": g.convention.value,
        "doubled_edges": g.has_doubled_edges,
        "non_paper_geometry": g.non_paper_geometry,
        "sweeps": sweeps,
        "burn_in": burn_in,
        "seed": seed,
        "chains": chains,
        "n_batches": n_batches,
        "acceptance": acceptance,
        "open_fugacity": [r.open_fugacity for r in chain_results],
        "defect_fugacity": [r.defect_fugacity for r in chain_results],
    }
    p_connect = None
    if kind == PathKind.CROSSING:
        p_loop, p_loop_err = jackknife_ratio(np.concatenate(connect_batches), den_all)
        p_loop[0] = 0.0
        p_loop_err[0] = 0.0
        metadata["p_loop"] = p_loop.tolist()
        metadata["p_loop_stderr"] = p_loop_err.tolist()
        p_connect = (estimate / (p.N * (p.N - 1))).tolist()
    metadata["runtime_s"] = time.perf_counter() - start
    logger.info(f"Worm sampler done in {metadata['runtime_s']:.2f}s, acceptance={np.mean(acceptance):.3f}")
    return TwoPointTable(
        geometry=g,
        provenance=Provenance.MONTE_CARLO,
        values=[float(v) for v in estimate],
        stderr=[float(e) for e in stderr],
        p_connect=p_connect,
        metadata=metadata,
    )
