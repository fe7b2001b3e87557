"""Slot-stepped joint simulation of sensing robots and courier conveyors with
exact age-of-information accounting.

Within every slot t the event order is fixed:

1. conveyors move to their slot-t positions (walk offset, or energy detour);
2. every conveyor at the base unloads; the base logs at most one delivery per
   origin per slot, the freshest arriving sample, and only when it strictly
   refreshes the base copy;
3. every node runs one sensing trial; a success generates a sample stamped
   with this slot and the next attempt starts next slot;
4. co-located robots gossip, each keeping the freshest sample per origin;
5. the per-node age t - sensing_start(freshest delivered) is sampled.

Under this order a sample generated at slot g and picked up by a conveyor
departing baseward in the g -> g+1 transition reaches the base at g + depth.

Two engines produce bit-identical results for unconstrained runs. The literal
per-slot stepper is the reference (and the only engine for energy runs). The
fast path exploits the fact that unconstrained conveyor motion repeats every
walk period: for each origin and each slot residue it pre-simulates, under the
exact event order above, how many slots a fresh sample needs to reach the base,
then replays the per-node generation processes through that table. The test
suite asserts equality between the two across seeds, trees, and phase sets.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .conveyor_plan import EulerWalk, PhaseSet
from .graph_core import BASE, Graph, ShortestPathTree
from .sensing_alloc import SensingAllocation, SensingModel, success_probability

_FOLLOW, _RETURN, _CHARGE, _HOLD = 0, 1, 2, 3


class InvalidProbability(ValueError):
    """Success probability outside (0, 1]."""


class ConfigInvalid(ValueError):
    """Simulation configuration pieces disagree with each other."""


class BatteryTooSmall(ValueError):
    """Battery capacity cannot cover a return trip from the deepest node."""


class UnsortedLog(ValueError):
    """Delivery events are not time-ordered per origin."""


@dataclass(frozen=True)
class EnergyParams:
    """Battery capacity, per-edge move cost, and per-slot charge rate."""

    b_max: float
    e_move: float
    r_chg: float

    def __post_init__(self):
        if not self.b_max > 0:
            raise ConfigInvalid(f"b_max must be > 0, got {self.b_max}")
        if self.e_move < 0:
            raise ConfigInvalid(f"e_move must be >= 0, got {self.e_move}")
        if not self.r_chg > 0:
            raise ConfigInvalid(f"r_chg must be > 0, got {self.r_chg}")


@dataclass(frozen=True)
class Sample:
    """One sensed data item; age is measured from sensing_start, not from
    the completion slot."""

    origin: int
    sensing_start: int
    generated: int

    def __post_init__(self):
        if self.generated < self.sensing_start:
            raise ValueError("generated must be >= sensing_start")


@dataclass(frozen=True)
class DeliveryEvent:
    origin: int
    sensing_start: int
    generated: int
    delivered: int
    became_freshest: bool


class DeliveryLog:
    """Columnar sequence of DeliveryEvent records.

    Runs at desk scale produce hundreds of thousands of events, so the log
    keeps five parallel arrays instead of per-event objects. Iteration and
    indexing still yield DeliveryEvent instances.
    """

    __slots__ = ("origin", "sensing_start", "generated", "delivered", "became_freshest")

    def __init__(self, origin, sensing_start, generated, delivered, became_freshest):
        self.origin = np.asarray(origin, dtype=np.int64)
        self.sensing_start = np.asarray(sensing_start, dtype=np.int64)
        self.generated = np.asarray(generated, dtype=np.int64)
        self.delivered = np.asarray(delivered, dtype=np.int64)
        self.became_freshest = np.asarray(became_freshest, dtype=bool)

    @classmethod
    def from_events(cls, events) -> "DeliveryLog":
        events = list(events)
        return cls(
            [e.origin for e in events],
            [e.sensing_start for e in events],
            [e.generated for e in events],
            [e.delivered for e in events],
            [e.became_freshest for e in events],
        )

    def __len__(self) -> int:
        return int(self.origin.size)

    def __getitem__(self, idx: int) -> DeliveryEvent:
        return DeliveryEvent(
            origin=int(self.origin[idx]),
            sensing_start=int(self.sensing_start[idx]),
            generated=int(self.generated[idx]),
            delivered=int(self.delivered[idx]),
            became_freshest=bool(self.became_freshest[idx]),
        )

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def __eq__(self, other) -> bool:
        if not isinstance(other, DeliveryLog):
            return NotImplemented
        return (
            np.array_equal(self.origin, other.origin)
            and np.array_equal(self.sensing_start, other.sensing_start)
            and np.array_equal(self.generated, other.generated)
            and np.array_equal(self.delivered, other.delivered)
            and np.array_equal(self.became_freshest, other.became_freshest)
        )

    def __repr__(self) -> str:
        return f"DeliveryLog({len(self)} events)"


@dataclass(frozen=True)
class ConveyorEnergyStats:
    """Per-conveyor detour accounting for an energy-constrained run."""

    conveyor: int
    recharges: int
    charge_slots: int
    hold_slots: int
    return_slots: int


@dataclass(frozen=True)
class SimResult:
    per_node_aoi: dict[int, float]
    network_aoi: float
    delivery_log: DeliveryLog
    energy_trace: tuple[ConveyorEnergyStats, ...] | None = None


@dataclass(frozen=True)
class SimConfig:
    """Everything a run needs; all pieces must describe the same instance."""

    graph: Graph
    tree: ShortestPathTree
    walk: EulerWalk
    phase_set: PhaseSet
    model: SensingModel
    alloc: SensingAllocation
    horizon: int
    warmup: int
    seed: int
    energy: EnergyParams | None = None

    def validate(self) -> None:
        k = self.graph.node_count - 1
        if not 0 <= self.warmup < self.horizon:
            raise ConfigInvalid(
                f"need 0 <= warmup < horizon, got warmup={self.warmup}, horizon={self.horizon}"
            )
        if self.seed < 0:
            raise ConfigInvalid(f"seed must be >= 0, got {self.seed}")
        if self.walk.length != 2 * k:
            raise ConfigInvalid(
                f"walk length {self.walk.length} does not match {k} non-base nodes"
            )
        if self.phase_set.walk_length != self.walk.length:
            raise ConfigInvalid("phase set was built for a different walk length")
        if len(self.alloc.m) != k:
            raise ConfigInvalid(f"allocation covers {len(self.alloc.m)} nodes, graph has {k}")
        if self.model.node_count != k:
            raise ConfigInvalid(f"model covers {self.model.node_count} nodes, graph has {k}")
        if max(self.alloc.m) > self.model.max_m:
            raise ConfigInvalid("allocation exceeds the model's max_m")
        if len(self.tree.depth) != self.graph.node_count:
            raise ConfigInvalid("tree and graph disagree on node count")


def node_stream(seed: int, node: int) -> np.random.Generator:
    """Independent per-node random stream derived from (seed, node index),
    so results never depend on node iteration order."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, node])))


def draw_sensing_time(q: float, rng) -> int:
    """Sample one sensing duration: one success-q trial per slot until the
    first success. rng needs only a .random() method."""
    if not 0.0 < q <= 1.0:
        raise InvalidProbability(f"q must be in (0, 1], got {q}")
    k = 1
    while rng.random() >= q:
        k += 1
    return k


def generation_mask(seed: int, node: int, q: float, horizon: int) -> np.ndarray:
    """Per-slot success indicators for one node over the whole run.

    Work-conserving sensing means one Bernoulli(q) trial every slot, so the
    completion slots are exactly the successes of this sequence.
    """
    if not 0.0 < q <= 1.0:
        raise InvalidProbability(f"q must be in (0, 1], got {q}")
    return node_stream(seed, node).random(horizon) < q


def run(cfg: SimConfig, engine: str = "auto") -> SimResult:
    """Simulate an unconstrained run; identical configs give identical results.

    engine: "auto" (default, fast periodic-schedule path), "table", or
    "stepper" (the literal per-slot reference loop).
    """
    cfg.validate()
    if cfg.energy is not None:
        raise ConfigInvalid("config carries energy parameters; use run_energy")
    if engine == "auto" or engine == "table":
        return _run_table(cfg)
    if engine == "stepper":
        return _run_stepper(cfg, None)
    raise ConfigInvalid(f"unknown engine {engine!r}")


def run_energy(cfg: SimConfig) -> SimResult:
    """Simulate with battery-limited conveyors.

    A conveyor follows the walk while, after the next hop, it could still walk
    home through the tree; otherwise it returns to the base along tree edges,
    charges to full at r_chg per slot, holds until its nominal walk position is
    the base again, and resumes. Sensing, gossip, deliveries, and age
    accounting are identical to unconstrained runs. With e_move = 0 the detour
    logic never triggers and results match `run` bit for bit.
    """
    cfg.validate()
    if cfg.energy is None:
        raise ConfigInvalid("run_energy needs energy parameters")
    max_depth = max(cfg.tree.depth)
    if cfg.energy.b_max < cfg.energy.e_move * max_depth:
        raise BatteryTooSmall(
            f"b_max={cfg.energy.b_max} cannot cover a depth-{max_depth} return "
            f"at e_move={cfg.energy.e_move}"
        )
    return _run_stepper(cfg, cfg.energy)


def _node_probs(model: SensingModel, alloc: SensingAllocation) -> list[float]:
    return [success_probability(model, i, mi) for i, mi in enumerate(alloc.m)]


# ---------------------------------------------------------------------------
# reference engine: literal per-slot stepper
# ---------------------------------------------------------------------------

def _run_stepper(cfg: SimConfig, energy: EnergyParams | None) -> SimResult:
    nodes = cfg.graph.node_count
    k = nodes - 1
    horizon, warmup = cfg.horizon, cfg.warmup
    L = cfg.walk.length
    w = list(cfg.walk.sequence[:L])
    depth = list(cfg.tree.depth)
    par = [0] * nodes
    for i, p in cfg.tree.parent.items():
        par[i] = p
    phases = list(cfg.phase_set.phases)
    nc = len(phases)
    qs = _node_probs(cfg.model, cfg.alloc)
    masks = [generation_mask(cfg.seed, i + 1, qs[i], horizon).tolist() for i in range(k)]

    pos = [w[phi % L] for phi in phases]
    state = [_FOLLOW] * nc
    if energy is None:
        battery = [0.0] * nc
    else:
        # Initial charge levels are staggered: each conveyor draws a level
        # uniformly in [0, b_max) from the base-node stream (the base never
        # senses, so this collides with no sensing stream).  A conveyor whose
        # draw covers its local reserve starts on the walk; one that cannot
        # afford a single hop plus the ride home starts docked and charging.
        # The stagger spreads depletion/recharge cycles across the fleet; a
        # fleet that starts uniformly full depletes in lockstep and goes dark
        # in lockstep, and relative cycle offsets never change afterwards
        # because every conveyor advances through the same deterministic
        # deplete/return/charge/rejoin map.
        draws = node_stream(cfg.seed, BASE).random(nc)
        battery = [0.0] * nc
        for c in range(nc):
            b0 = energy.b_max * draws[c]
            start = w[phases[c] % L]
            if b0 >= energy.e_move * (depth[start] + 1.0):
                battery[c] = b0
            else:
                battery[c] = b0
                pos[c] = BASE
                state[c] = _CHARGE
    recharges = [0] * nc
    charge_slots = [0] * nc
    hold_slots = [0] * nc
    return_slots = [0] * nc

    # per-robot freshest sample per origin: generation slot and sensing start
    store_g = [[-1] * k for _ in range(nc)]
    store_s = [[0] * k for _ in range(nc)]
    cache_g = [[-1] * k for _ in range(nodes)]
    cache_s = [[0] * k for _ in range(nodes)]
    fresh_g = [-1] * k
    fresh_s = [0] * k  # virtual sample with sensing start 0, so age grows as t
    cur_start = [0] * k
    aoi_sum = [0] * k
    touched_slot = [-1] * k
    touched: list[int] = []

    ev_origin: list[int] = []
    ev_start: list[int] = []
    ev_gen: list[int] = []
    ev_del: list[int] = []

    if energy is not None:
        b_max, e_move, r_chg = energy.b_max, energy.e_move, energy.r_chg

    for t in range(horizon):
        # 1. move
        if t:
            if energy is None:
                for c in range(nc):
                    pos[c] = w[(t + phases[c]) % L]
            else:
                for c in range(nc):
                    st = state[c]
                    if st == _FOLLOW:
                        nxt = w[(t + phases[c]) % L]
                        if battery[c] - e_move >= e_move * depth[nxt]:
                            pos[c] = nxt
                            battery[c] -= e_move
                            continue
                        st = _RETURN
                    if st == _RETURN:
                        p = pos[c]
                        if p != BASE:
                            p = par[p]
                            pos[c] = p
                            battery[c] -= e_move
                            return_slots[c] += 1
                            state[c] = _CHARGE if p == BASE else _RETURN
                            continue
                        st = _CHARGE
                    if st == _CHARGE:
                        charge_slots[c] += 1
                        b = battery[c] + r_chg
                        if b < b_max:
                            battery[c] = b
                            state[c] = _CHARGE
                            continue
                        battery[c] = b_max
                        recharges[c] += 1
                        st = _HOLD
                    # holding at the base until the nominal position aligns
                    if w[(t + phases[c]) % L] == BASE:
                        state[c] = _FOLLOW
                    else:
                        state[c] = _HOLD
                        hold_slots[c] += 1

        # 2. deliveries: collect the freshest arrival per origin this slot
        for c in range(nc):
            if pos[c] != BASE:
                continue
            sg = store_g[c]
            ss = store_s[c]
            for o in range(k):
                g = sg[o]
                if g >= 0:
                    if g > fresh_g[o]:
                        fresh_g[o] = g
                        fresh_s[o] = ss[o]
                        if touched_slot[o] != t:
                            touched_slot[o] = t
                            touched.append(o)
                    sg[o] = -1
        if touched:
            touched.sort()
            for o in touched:
                ev_origin.append(o + 1)
                ev_start.append(fresh_s[o])
                ev_gen.append(fresh_g[o])
                ev_del.append(t)
            del touched[:]

        # 3. sensing: a success generates a sample stamped with this slot
        for o in range(k):
            if masks[o][t]:
                node = o + 1
                cache_g[node][o] = t
                cache_s[node][o] = cur_start[o]
                cur_start[o] = t + 1

        # 4. gossip: merge freshest-per-origin among co-located robots.
        # Conveyor stores empty at the base (step 2), so the base is a no-op.
        groups: dict[int, list[int]] = {}
        for c in range(nc):
            v = pos[c]
            if v != BASE:
                grp = groups.get(v)
                if grp is None:
                    groups[v] = [c]
                else:
                    grp.append(c)
        for v, cs in groups.items():
            cg = cache_g[v]
            csrt = cache_s[v]
            if len(cs) == 1:
                c = cs[0]
                sg = store_g[c]
                ss = store_s[c]
                for o in range(k):
                    a = cg[o]
                    b = sg[o]
                    if b > a:
                        cg[o] = b
                        csrt[o] = ss[o]
                    elif a > b:
                        sg[o] = a
                        ss[o] = csrt[o]
            else:
                for o in range(k):
                    bg = cg[o]
                    bs = csrt[o]
                    for c in cs:
                        if store_g[c][o] > bg:
                            bg = store_g[c][o]
                            bs = store_s[c][o]
                    if bg > cg[o]:
                        cg[o] = bg
                        csrt[o] = bs
                    for c in cs:
                        if store_g[c][o] < bg:
                            store_g[c][o] = bg
                            store_s[c][o] = bs

        # 5. sample ages
        if t >= warmup:
            for o in range(k):
                aoi_sum[o] += t - fresh_s[o]

    n_slots = horizon - warmup
    per_node = {o + 1: aoi_sum[o] / n_slots for o in range(k)}
    network = sum(per_node.values()) / k
    log = DeliveryLog(ev_origin, ev_start, ev_gen, ev_del, [True] * len(ev_origin))
    trace = None
    if energy is not None:
        trace = tuple(
            ConveyorEnergyStats(
                conveyor=c,
                recharges=recharges[c],
                charge_slots=charge_slots[c],
                hold_slots=hold_slots[c],
                return_slots=return_slots[c],
            )
            for c in range(nc)
        )
    return SimResult(
        per_node_aoi=per_node, network_aoi=network, delivery_log=log, energy_trace=trace
    )


# ---------------------------------------------------------------------------
# fast engine: periodic transport-delay table
# ---------------------------------------------------------------------------

@lru_cache(maxsize=128)
def _transport_delay_table(
    walk_seq: tuple[int, ...], phases: tuple[int, ...], node_count: int
) -> tuple[tuple[int, ...], ...]:
    """delay[i][r]: slots from a sample's generation at node i on slot residue
    r until its first base delivery, under maximal gossip spread.

    Computed by stepping one marked sample through the periodic conveyor
    schedule with the exact slot event order (gossip after generation, base
    check on the following slots). Conveyor marks are bitmask sets.
    """
    L = len(walk_seq) - 1
    w = walk_seq[:L]
    conv_masks = []
    for r in range(L):
        row = [0] * node_count
        for c, phi in enumerate(phases):
            row[w[(r + phi) % L]] |= 1 << c
        conv_masks.append(row)

    delay = [[0] * L for _ in range(node_count)]
    for origin in range(1, node_count):
        for r in range(L):
            cache = 1 << origin  # node bitmask of caches holding the sample
            convs = 0  # conveyor bitmask
            tau = 0
            while True:
                row = conv_masks[(r + tau) % L]
                for v in range(1, node_count):
                    cv = row[v]
                    if cv:
                        if (cache >> v) & 1:
                            convs |= cv
                        elif convs & cv:
                            cache |= 1 << v
                            convs |= cv
                tau += 1
                if convs & conv_masks[(r + tau) % L][BASE]:
                    delay[origin][r] = tau
                    break
                if tau > 3 * L + 2:
                    raise AssertionError("transport table failed to converge")
    return tuple(tuple(row) for row in delay)


def _run_table(cfg: SimConfig) -> SimResult:
    nodes = cfg.graph.node_count
    k = nodes - 1
    horizon, warmup = cfg.horizon, cfg.warmup
    L = cfg.walk.length
    qs = _node_probs(cfg.model, cfg.alloc)
    delay = _transport_delay_table(cfg.walk.sequence, cfg.phase_set.phases, nodes)

    n_slots = horizon - warmup
    per_node: dict[int, float] = {}
    all_org: list[np.ndarray] = []
    all_d: list[np.ndarray] = []
    all_g: list[np.ndarray] = []
    all_s: list[np.ndarray] = []

    for o in range(k):
        node = o + 1
        mask = generation_mask(cfg.seed, node, qs[o], horizon)
        gens = np.flatnonzero(mask).astype(np.int64)
        if gens.size:
            starts = np.empty_like(gens)
            starts[0] = 0
            starts[1:] = gens[:-1] + 1
            f = np.asarray(delay[node], dtype=np.int64)
            d = gens + f[gens % L]
            sel = d < horizon
            d1, g1, s1 = d[sel], gens[sel], starts[sel]
        else:
            d1 = g1 = s1 = np.empty(0, dtype=np.int64)

        if d1.size:
            order = np.argsort(d1, kind="stable")  # ties keep ascending g
            ds, gs, ss = d1[order], g1[order], s1[order]
            runmax = np.maximum.accumulate(gs)
            prev = np.empty_like(runmax)
            prev[0] = -1
            prev[1:] = runmax[:-1]
            keep = gs > prev  # strict refresh of the base copy
            dk, gk, sk = ds[keep], gs[keep], ss[keep]
            last = np.ones(dk.size, dtype=bool)  # one event per slot: the max
            last[:-1] = dk[1:] != dk[:-1]
            dk, gk, sk = dk[last], gk[last], sk[last]
        else:
            dk = gk = sk = np.empty(0, dtype=np.int64)

        # integer age sum over [warmup, horizon): piecewise t - s segments
        seg_lo = np.concatenate((np.zeros(1, dtype=np.int64), dk))
        seg_hi = np.concatenate((dk, np.asarray([horizon], dtype=np.int64)))
        seg_s = np.concatenate((np.zeros(1, dtype=np.int64), sk))
        lo = np.maximum(seg_lo, warmup)
        hi = np.minimum(seg_hi, horizon)
        n = np.maximum(hi - lo, 0)
        contrib = (lo + hi - 1) * n // 2 - seg_s * n
        per_node[node] = int(contrib.sum()) / n_slots

        all_org.append(np.full(dk.size, node, dtype=np.int64))
        all_d.append(dk)
        all_g.append(gk)
        all_s.append(sk)

    network = sum(per_node.values()) / k
    org = np.concatenate(all_org)
    del_ = np.concatenate(all_d)
    gen = np.concatenate(all_g)
    srt = np.concatenate(all_s)
    idx = np.lexsort((org, del_))  # slot order, origins ascending within a slot
    log = DeliveryLog(org[idx], srt[idx], gen[idx], del_[idx], np.ones(idx.size, dtype=bool))
    return SimResult(per_node_aoi=per_node, network_aoi=network, delivery_log=log)


# ---------------------------------------------------------------------------
# event-log reconstruction
# ---------------------------------------------------------------------------

def aoi_from_event_log(log, horizon: int, warmup: int = 0, origins=None) -> dict[int, float]:
    """Rebuild per-node average ages from freshest delivery events alone.

    Between consecutive freshest deliveries the age is a straight ramp, so the
    window sum is a handful of integer series: a cycle of width W starting at
    age a contributes a*W + W*(W-1)/2. Must agree exactly with the slot
    sampled averages of the run that produced the log.

    origins fixes the node set (needed when some node never delivered); by
    default the nodes present in the log are used. Raises UnsortedLog if any
    origin's events are out of time order.
    """
    if not 0 <= warmup < horizon:
        raise ValueError(f"need 0 <= warmup < horizon, got {warmup}, {horizon}")
    if isinstance(log, DeliveryLog):
        org = log.origin
        dlv = log.delivered
        srt = log.sensing_start
        fresh = log.became_freshest
    else:
        events = list(log)
        org = np.asarray([e.origin for e in events], dtype=np.int64)
        dlv = np.asarray([e.delivered for e in events], dtype=np.int64)
        srt = np.asarray([e.sensing_start for e in events], dtype=np.int64)
        fresh = np.asarray([e.became_freshest for e in events], dtype=bool)
    org, dlv, srt = org[fresh], dlv[fresh], srt[fresh]
    if origins is None:
        origins = sorted(int(v) for v in np.unique(org))

    n_slots = horizon - warmup
    out: dict[int, float] = {}
    for node in origins:
        sel = org == node
        d = dlv[sel]
        s = srt[sel]
        if d.size and np.any(d[1:] <= d[:-1]):
            raise UnsortedLog(f"events for origin {node} are not time-ordered")
        total = 0
        prev_d = 0
        prev_s = 0
        # closing sentinel covers the tail segment [last delivery, horizon)
        for dj, sj in zip(d.tolist() + [horizon], s.tolist() + [0]):
            lo = max(prev_d, warmup)
            hi = min(dj, horizon)
            if lo < hi:
                width = hi - lo
                # age ramp: starts at lo - prev_s, rises by one per slot
                total += (lo - prev_s) * width + width * (width - 1) // 2
            prev_d = dj
            prev_s = sj
        out[node] = total / n_slots
    return out
