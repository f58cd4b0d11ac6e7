"""Link model, Hello beaconing, link-lifetime estimation, interference
accounting, and the fair-share TDMA data plane with TTL-aware queues.

The Hello payload is bit-exact (fixed field order, little-endian bit order
within each field) so control-overhead accounting in reports matches the
advertised layout: 7 id + 18 location + 12 waypoint + 150 patch + 4 hops +
12 mask = 203 fixed bits, then 8+8 En/IL and optional per-neighbor
summaries of 36 bits each.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

LLT_CAP_S = 3600.0
NO_ROUTE_HOPS = 15
NO_MASK_CELL = 0xFFF
PATCH_HALF = 2  # 5x5 patch

_PHER_MAX = 63          # 6-bit patch values
_LOC_MAX = 511          # 9 bits per axis at 10 m resolution
_SUMMARY_LLT_MAX = 4095


# ---------------------------------------------------------------------------
# Neighbor state
# ---------------------------------------------------------------------------

@dataclass
class NeighborEntry:
    """Last-heard state for one neighbor, as carried by its Hello."""

    id: int
    pos: tuple[float, float]
    velocity: tuple[float, float]
    next_waypoint: tuple[int, int]
    hops_to_bs: int
    en: float
    il: int
    llt_s: float
    last_heard: float
    pheromone_patch: np.ndarray | None = None
    mask_cell: int | None = None
    one_hop_summaries: list | None = None

    def expired(self, now: float, hello_interval_s: float, intervals: int = 2) -> bool:
        return now - self.last_heard > intervals * hello_interval_s


class NeighborTable:
    def __init__(self, hello_interval_s: float = 1.0, expiry_intervals: int = 2):
        self.entries: dict[int, NeighborEntry] = {}
        self.hello_interval_s = hello_interval_s
        self.expiry_intervals = expiry_intervals

    def update(self, entry: NeighborEntry) -> None:
        self.entries[entry.id] = entry

    def prune(self, now: float) -> None:
        dead = [
            nid for nid, e in self.entries.items()
            if e.expired(now, self.hello_interval_s, self.expiry_intervals)
        ]
        for nid in dead:
            del self.entries[nid]

    def ids(self) -> list[int]:
        return sorted(self.entries)


# ---------------------------------------------------------------------------
# Geometry of links
# ---------------------------------------------------------------------------

def neighbors(positions: np.ndarray, alive: np.ndarray, node: int, tx_range_m: float) -> set[int]:
    """Alive nodes within Euclidean tx range of `node` (symmetric by metric)."""
    if not alive[node]:
        raise ValueError(f"node {node} is not alive")
    d = np.hypot(*(positions - positions[node]).T)
    mask = alive & (d <= tx_range_m)
    mask[node] = False
    return set(np.nonzero(mask)[0].tolist())


def adjacency(positions: np.ndarray, alive: np.ndarray, tx_range_m: float) -> np.ndarray:
    """Symmetric boolean adjacency among alive nodes (no self loops)."""
    diff = positions[:, None, :] - positions[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    adj = d2 <= tx_range_m * tx_range_m
    adj &= alive[:, None] & alive[None, :]
    np.fill_diagonal(adj, False)
    return adj


def estimate_llt(
    pos_i, vel_i, pos_j, vel_j, tx_range_m: float, cap_s: float = LLT_CAP_S
) -> float:
    """Time until |dp + t*dv| = range under current velocities.

    Returns cap_s when the relative velocity is zero or the link never
    expires; 0 when the pair is already out of range.
    """
    dpx = float(pos_i[0]) - float(pos_j[0])
    dpy = float(pos_i[1]) - float(pos_j[1])
    dvx = float(vel_i[0]) - float(vel_j[0])
    dvy = float(vel_i[1]) - float(vel_j[1])
    r2 = tx_range_m * tx_range_m
    c = dpx * dpx + dpy * dpy - r2
    if c > 1e-9:
        return 0.0
    a = dvx * dvx + dvy * dvy
    if a < 1e-18:
        return cap_s
    b = dpx * dvx + dpy * dvy
    disc = b * b - a * c
    t = (-b + math.sqrt(disc)) / a
    return min(max(t, 0.0), cap_s)


def interfering_links(
    positions: np.ndarray,
    active_links: list[tuple[int, int]],
    node: int,
    tx_range_m: float,
) -> int:
    """Active data-carrying links not incident to `node` with an endpoint in
    interference range (= tx range)."""
    count = 0
    px, py = positions[node]
    r2 = tx_range_m * tx_range_m
    for u, v in active_links:
        if u == node or v == node:
            continue
        dux, duy = positions[u, 0] - px, positions[u, 1] - py
        dvx, dvy = positions[v, 0] - px, positions[v, 1] - py
        if dux * dux + duy * duy <= r2 or dvx * dvx + dvy * dvy <= r2:
            count += 1
    return count


def interfering_links_all(
    positions: np.ndarray, active_links: list[tuple[int, int]], tx_range_m: float
) -> np.ndarray:
    """interfering_links for every node at once."""
    n = positions.shape[0]
    il = np.zeros(n, dtype=np.int64)
    if not active_links:
        return il
    links = np.asarray(active_links)
    du = positions[:, None, :] - positions[links[:, 0]][None, :, :]
    dv = positions[:, None, :] - positions[links[:, 1]][None, :, :]
    r2 = tx_range_m * tx_range_m
    near = (np.einsum("ijk,ijk->ij", du, du) <= r2) | (
        np.einsum("ijk,ijk->ij", dv, dv) <= r2
    )
    incident = (np.arange(n)[:, None] == links[:, 0][None, :]) | (
        np.arange(n)[:, None] == links[:, 1][None, :]
    )
    return (near & ~incident).sum(axis=1)


# ---------------------------------------------------------------------------
# Hello payload codec
# ---------------------------------------------------------------------------

class _BitWriter:
    def __init__(self):
        self.bits: list[int] = []

    def write(self, value: int, width: int) -> None:
        # Little-endian within the field: least significant bit first.
        for i in range(width):
            self.bits.append((value >> i) & 1)

    def to_bytes(self) -> bytes:
        out = bytearray((len(self.bits) + 7) // 8)
        for i, b in enumerate(self.bits):
            if b:
                out[i // 8] |= 1 << (i % 8)
        return bytes(out)

    def __len__(self):
        return len(self.bits)


class _BitReader:
    def __init__(self, data: bytes, n_bits: int):
        self.data = data
        self.n_bits = n_bits
        self.pos = 0

    def read(self, width: int) -> int:
        value = 0
        for i in range(width):
            byte = self.data[self.pos // 8]
            value |= ((byte >> (self.pos % 8)) & 1) << i
            self.pos += 1
        return value


@dataclass
class HopSummary:
    neighbor_id: int
    llt_s: float
    en: float
    il: int
    is_link_active: bool


@dataclass
class HelloPacket:
    """Beacon payload; see module docstring for the bit layout."""

    uav_id: int
    pos: tuple[float, float]
    waypoint_cell_id: int
    pheromone_patch: np.ndarray  # 5x5 float, row-major (dcol, drow) window
    hops_to_bs: int
    mask_cell_id: int | None
    en: float
    il: int
    one_hop_summaries: list[HopSummary] = field(default_factory=list)
    overflowed: bool = False

    FIXED_PREFIX_BITS = 7 + 18 + 12 + 150 + 4 + 12
    EN_IL_BITS = 16
    SUMMARY_BITS = 36

    def size_bits(self) -> int:
        n = self.FIXED_PREFIX_BITS + self.EN_IL_BITS
        if self.one_hop_summaries:
            n += 6 + self.SUMMARY_BITS * len(self.one_hop_summaries)
        return n

    def encode(self) -> bytes:
        w = _BitWriter()
        flag = False

        def sat(value: int, hi: int) -> int:
            nonlocal flag
            if value > hi:
                flag = True
                return hi
            return max(value, 0)

        w.write(sat(self.uav_id, 127), 7)
        w.write(sat(int(round(self.pos[0] / 10.0)), _LOC_MAX), 9)
        w.write(sat(int(round(self.pos[1] / 10.0)), _LOC_MAX), 9)
        w.write(sat(self.waypoint_cell_id, 4095), 12)
        patch = np.asarray(self.pheromone_patch)
        for dc in range(5):
            for dr in range(5):
                w.write(sat(int(round(float(patch[dc, dr]))), _PHER_MAX), 6)
        w.write(sat(self.hops_to_bs, NO_ROUTE_HOPS), 4)
        mask = NO_MASK_CELL if self.mask_cell_id is None else self.mask_cell_id
        w.write(sat(mask, NO_MASK_CELL), 12)
        w.write(sat(int(round(self.en)), 255), 8)
        w.write(sat(self.il, 255), 8)
        if self.one_hop_summaries:
            w.write(sat(len(self.one_hop_summaries), 63), 6)
            for s in self.one_hop_summaries:
                w.write(sat(s.neighbor_id, 127), 7)
                w.write(sat(int(round(s.llt_s)), _SUMMARY_LLT_MAX), 12)
                w.write(sat(int(round(s.en)), 255), 8)
                w.write(sat(s.il, 255), 8)
                w.write(1 if s.is_link_active else 0, 1)
        self.overflowed = flag
        return w.to_bytes()

    @classmethod
    def decode(cls, data: bytes, has_summaries: bool = False) -> "HelloPacket":
        r = _BitReader(data, len(data) * 8)
        uav_id = r.read(7)
        x = r.read(9) * 10.0
        y = r.read(9) * 10.0
        wp = r.read(12)
        patch = np.zeros((5, 5))
        for dc in range(5):
            for dr in range(5):
                patch[dc, dr] = r.read(6)
        hops = r.read(4)
        mask = r.read(12)
        en = float(r.read(8))
        il = r.read(8)
        summaries = []
        if has_summaries:
            n = r.read(6)
            for _ in range(n):
                summaries.append(
                    HopSummary(r.read(7), float(r.read(12)), float(r.read(8)),
                               r.read(8), bool(r.read(1)))
                )
        return cls(uav_id, (x, y), wp, patch, hops,
                   None if mask == NO_MASK_CELL else mask, en, il, summaries)


# ---------------------------------------------------------------------------
# Data plane: fair-share TDMA abstraction
# ---------------------------------------------------------------------------

def tdma_share_bps(channel_rate_bps: float, contenders: int) -> float:
    """Per-node service rate when `contenders` other in-range nodes also
    transmitted this tick (equal TDMA share)."""
    return channel_rate_bps / (1 + contenders)


def hop_latency_s(size_bytes: int, rate_bps: float, processing_s: float = 0.010) -> float:
    return size_bytes * 8 / rate_bps + processing_s


@dataclass
class DataPacket:
    flow: int
    seq: int
    created_at: float
    size_bytes: int = 1500
    ttl_s: float = 3.0
    path: tuple[int, ...] = ()


@dataclass
class _Cohort:
    created_at: float
    count: int


class NodeQueue:
    """TTL-aware queue of same-flow packets, batched by creation tick.

    Head of line is the smallest time-to-expiry, which for a constant TTL is
    the oldest creation time; batches keep the queue O(ticks), not O(packets).
    """

    def __init__(self, ttl_s: float = 3.0):
        self.ttl_s = ttl_s
        self._cohorts: deque[_Cohort] = deque()
        self._next_seq = 0

    def __len__(self) -> int:
        return sum(c.count for c in self._cohorts)

    def enqueue(self, count: int, created_at: float) -> None:
        if count <= 0:
            return
        if self._cohorts and self._cohorts[-1].created_at > created_at:
            raise ValueError("enqueue must be in creation order")
        self._cohorts.append(_Cohort(created_at, count))
        self._next_seq += count

    def drop_expired(self, now: float) -> int:
        """Drop packets whose age strictly exceeds the TTL."""
        return sum(n for _, n in self.drop_expired_detail(now))

    def drop_expired_detail(self, now: float) -> list[tuple[float, int]]:
        out = []
        while self._cohorts and now - self._cohorts[0].created_at > self.ttl_s:
            c = self._cohorts.popleft()
            out.append((c.created_at, c.count))
        return out

    def serve(self, now: float, budget: int, e2e_latency_s: float) -> tuple[int, int]:
        """Deliver up to `budget` oldest packets that can still reach the
        destination within TTL given the route latency. Packets too old to
        make it are dropped as expired. Returns (delivered, expired)."""
        delivered, expired = self.serve_detail(now, budget, e2e_latency_s)
        return sum(n for _, n in delivered), sum(n for _, n in expired)

    def serve_detail(
        self, now: float, budget: int, e2e_latency_s: float
    ) -> tuple[list[tuple[float, int]], list[tuple[float, int]]]:
        """serve(), reported per creation-time cohort."""
        delivered: list[tuple[float, int]] = []
        expired: list[tuple[float, int]] = []
        n_delivered = 0
        while self._cohorts and n_delivered < budget:
            head = self._cohorts[0]
            if now - head.created_at + e2e_latency_s > self.ttl_s:
                expired.append((head.created_at, head.count))
                self._cohorts.popleft()
                continue
            take = min(head.count, budget - n_delivered)
            n_delivered += take
            head.count -= take
            delivered.append((head.created_at, take))
            if head.count == 0:
                self._cohorts.popleft()
        return delivered, expired

    def counts_since(self, t0: float) -> int:
        return sum(c.count for c in self._cohorts if c.created_at >= t0)
