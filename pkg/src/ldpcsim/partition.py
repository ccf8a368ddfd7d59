"""Equal check-node grouping and the 128-byte packet wire format.

The star schedule keeps all variable nodes on the master; each slave owns
a contiguous block of check nodes.  Per iteration the master sends each
slave the per-edge differences for its block and receives the refreshed
check messages back.  Wire payloads are little-endian word arrays split
into packets of at most 128 bytes; headers are not modeled here (the cost
model prices per-packet overhead instead).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

from .code import ParityCheckMatrix
from .decoder import QFormat
from .errors import NotDivisible, PacketOverflow, PartitionMismatch

PACKET_BYTES = 128


@dataclass(frozen=True)
class Partition:
    """Contiguous equal-size check blocks; slave s owns groups[s]."""

    num_slaves: int
    groups: tuple[tuple[int, ...], ...]
    edge_counts: tuple[int, ...]

    @property
    def group_bounds(self) -> list[tuple[int, int]]:
        """[start, stop) check-index range per slave."""
        return [(g[0], g[-1] + 1) for g in self.groups]


@dataclass(frozen=True)
class MessagePlan:
    """Per-slave payload/packet counts for one direction of one iteration."""

    word_bytes: int
    to_slave_bytes: tuple[int, ...]
    to_slave_packets: tuple[int, ...]
    to_master_bytes: tuple[int, ...]
    to_master_packets: tuple[int, ...]

    @property
    def total_bytes(self) -> int:
        return sum(self.to_slave_bytes) + sum(self.to_master_bytes)


def make_partition(m: int, num_slaves: int) -> Partition:
    """Split m checks into num_slaves equal contiguous blocks."""
    if num_slaves < 1:
        raise NotDivisible(f"need at least one slave, got {num_slaves}")
    if m % num_slaves != 0:
        raise NotDivisible(f"{m} check nodes not divisible by {num_slaves} slaves")
    size = m // num_slaves
    groups = tuple(
        tuple(range(s * size, (s + 1) * size)) for s in range(num_slaves)
    )
    return Partition(num_slaves=num_slaves, groups=groups, edge_counts=())


def attach_edge_counts(p: Partition, H: ParityCheckMatrix) -> Partition:
    """Fill per-slave edge totals from the matrix row degrees."""
    validate_partition(p, H)
    counts = tuple(
        int(H.row_ptr[g[-1] + 1] - H.row_ptr[g[0]]) for g in p.groups
    )
    return Partition(num_slaves=p.num_slaves, groups=p.groups, edge_counts=counts)


def validate_partition(p: Partition, H: ParityCheckMatrix) -> None:
    flat = [c for g in p.groups for c in g]
    if flat != list(range(H.m)):
        raise PartitionMismatch(
            f"partition covers {len(flat)} checks, matrix has {H.m}"
        )


def packet_count(payload_bytes: int) -> int:
    return -(-payload_bytes // PACKET_BYTES) if payload_bytes > 0 else 0


def plan_messages(
    H: ParityCheckMatrix, p: Partition, word_bytes: int = 4
) -> MessagePlan:
    """Payload and packet counts per slave, both directions.

    Each direction carries one word per edge of the slave's block: the
    differences going out, the refreshed check messages coming back.
    """
    p = attach_edge_counts(p, H)
    nbytes = tuple(e * word_bytes for e in p.edge_counts)
    packets = tuple(packet_count(b) for b in nbytes)
    return MessagePlan(
        word_bytes=word_bytes,
        to_slave_bytes=nbytes,
        to_slave_packets=packets,
        to_master_bytes=nbytes,
        to_master_packets=packets,
    )


def _word_codec(word_bytes: int, qformat: QFormat | None):
    if qformat is not None:
        fmt = {2: "h", 4: "i", 8: "q"}.get(word_bytes)
        if fmt is None:
            raise PacketOverflow(f"unsupported fixed-point word size {word_bytes}")
        scale = float(2**qformat.frac_bits)
        return fmt, lambda x: int(round(x * scale)), lambda i: i / scale
    fmt = {4: "f", 8: "d"}.get(word_bytes)
    if fmt is None:
        raise PacketOverflow(f"unsupported float word size {word_bytes}")
    return fmt, float, float


def pack_llrs(
    values, word_bytes: int = 4, qformat: QFormat | None = None
) -> list[bytes]:
    """Encode LLR values into <=128-byte little-endian packets.

    Float mode stores float32 (word_bytes=4) or float64 (word_bytes=8);
    fixed-point mode stores the Q-format integers.
    """
    fmt, enc, _ = _word_codec(word_bytes, qformat)
    words_per_packet = PACKET_BYTES // word_bytes
    values = list(values)
    packets = []
    for lo in range(0, len(values), words_per_packet):
        chunk = values[lo : lo + words_per_packet]
        pkt = struct.pack(f"<{len(chunk)}{fmt}", *(enc(v) for v in chunk))
        if len(pkt) > PACKET_BYTES:
            raise PacketOverflow(f"packet of {len(pkt)} bytes")
        packets.append(pkt)
    return packets


def unpack_llrs(
    packets, word_bytes: int = 4, qformat: QFormat | None = None
) -> list[float]:
    """Inverse of pack_llrs; exact for values representable on the wire."""
    fmt, _, dec = _word_codec(word_bytes, qformat)
    out: list[float] = []
    for pkt in packets:
        if len(pkt) > PACKET_BYTES:
            raise PacketOverflow(f"packet of {len(pkt)} bytes")
        count = len(pkt) // word_bytes
        out.extend(dec(w) for w in struct.unpack(f"<{count}{fmt}", pkt))
    return out


def edge_slices(H: ParityCheckMatrix, p: Partition) -> list[tuple[int, int]]:
    """Per-slave [lo, hi) edge-id range of its contiguous check block."""
    validate_partition(p, H)
    return [
        (int(H.row_ptr[g[0]]), int(H.row_ptr[g[-1] + 1])) for g in p.groups
    ]
