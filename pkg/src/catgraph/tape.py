"""Simulated catalytic tape, modular register files, and workspace metering.

The tape is a fixed-length bit array with arbitrary initial content. Register
files view disjoint spans of it as fixed-width registers supporting arithmetic
mod q through the decomposition value = a*q + b, where only the b part moves.
A register is *valid* for q when its value is below q*d, d being the largest
multiplier with q*d <= 2**width.
"""

from __future__ import annotations

import hashlib
import warnings
from contextlib import contextmanager
from typing import Iterable, Sequence

from .errors import (
    BudgetExceededError,
    InvalidRegisterError,
    MeterError,
    SpanError,
)


def bits_for(n_states: int) -> int:
    """Bits needed for a scalar with the given number of states (min 1)."""
    return max(1, (max(int(n_states), 1) - 1).bit_length())


def ceil_log2(x: int) -> int:
    """Smallest k with 2**k >= x, for x >= 1."""
    if x < 1:
        raise ValueError("ceil_log2 requires x >= 1")
    return (x - 1).bit_length()


class CatalyticTape:
    """Fixed-length bit array; bit i lives at buf[i >> 3], LSB-first."""

    __slots__ = ("_buf", "nbits")

    def __init__(self, nbits: int, _buf: bytearray | None = None):
        if nbits < 0:
            raise ValueError("tape length must be nonnegative")
        self.nbits = nbits
        nbytes = (nbits + 7) >> 3
        if _buf is None:
            _buf = bytearray(nbytes)
        elif len(_buf) != nbytes:
            raise ValueError("buffer does not match tape length")
        self._buf = _buf

    @classmethod
    def zeros(cls, nbits: int) -> "CatalyticTape":
        return cls(nbits)

    @classmethod
    def ones(cls, nbits: int) -> "CatalyticTape":
        tape = cls(nbits)
        tape._buf = bytearray(b"\xff" * len(tape._buf))
        tape._mask_tail()
        return tape

    @classmethod
    def random(cls, nbits: int, rng) -> "CatalyticTape":
        """Uniform random fill from an object with a randbytes/getrandbits method."""
        tape = cls(nbits)
        if hasattr(rng, "randbytes"):
            tape._buf = bytearray(rng.randbytes(len(tape._buf)))
        else:
            tape._buf = bytearray(
                rng.getrandbits(8) for _ in range(len(tape._buf))
            )
        tape._mask_tail()
        return tape

    def _mask_tail(self) -> None:
        # Bits past nbits in the last byte stay zero so digests are canonical.
        extra = (len(self._buf) << 3) - self.nbits
        if extra and self._buf:
            self._buf[-1] &= 0xFF >> extra

    def _check_span(self, offset: int, width: int) -> None:
        if offset < 0 or width < 0 or offset + width > self.nbits:
            raise SpanError(
                f"span [{offset}, {offset + width}) outside tape of {self.nbits} bits"
            )

    def read_bits(self, offset: int, width: int) -> int:
        """Little-endian read of `width` bits starting at `offset`."""
        self._check_span(offset, width)
        if width == 0:
            return 0
        first = offset >> 3
        last = (offset + width + 7) >> 3
        chunk = int.from_bytes(self._buf[first:last], "little")
        return (chunk >> (offset & 7)) & ((1 << width) - 1)

    def write_bits(self, offset: int, width: int, value: int) -> None:
        self._check_span(offset, width)
        if width == 0:
            return
        if value < 0 or value >> width:
            raise ValueError(f"value {value} does not fit in {width} bits")
        first = offset >> 3
        last = (offset + width + 7) >> 3
        shift = offset & 7
        mask = ((1 << width) - 1) << shift
        chunk = int.from_bytes(self._buf[first:last], "little")
        chunk = (chunk & ~mask) | (value << shift)
        self._buf[first:last] = chunk.to_bytes(last - first, "little")

    def read_bit(self, index: int) -> int:
        self._check_span(index, 1)
        return (self._buf[index >> 3] >> (index & 7)) & 1

    def digest(self) -> str:
        """SHA-256 over length and content; equal bits give equal digests."""
        h = hashlib.sha256()
        h.update(self.nbits.to_bytes(8, "little"))
        h.update(self._buf)
        return h.hexdigest()

    def snapshot(self) -> bytes:
        """Full copy of the bit array, for debugging-grade comparisons."""
        return bytes(self._buf)

    def restore(self, snap: bytes) -> None:
        if len(snap) != len(self._buf):
            raise ValueError("snapshot does not match tape length")
        self._buf[:] = snap

    def dump_hex(self) -> str:
        """Debug dump: one hex line per 64 tape bits."""
        lines = []
        for off in range(0, self.nbits, 64):
            width = min(64, self.nbits - off)
            lines.append(f"{self.read_bits(off, width):016x}")
        return "\n".join(lines)


class WorkspaceMeter:
    """Tracks non-catalytic workspace bits: current usage and high-water mark."""

    def __init__(self, budget: int | None = None, on_violation: str = "raise"):
        if on_violation not in ("raise", "warn"):
            raise ValueError("on_violation must be 'raise' or 'warn'")
        self.bits_in_use = 0
        self.peak_bits = 0
        self.budget = budget
        self.on_violation = on_violation
        self.violations = 0

    def charge(self, bits: int) -> None:
        if bits < 0:
            raise ValueError("cannot charge negative bits")
        self.bits_in_use += bits
        if self.bits_in_use > self.peak_bits:
            self.peak_bits = self.bits_in_use
        if self.budget is not None and self.bits_in_use > self.budget:
            self.violations += 1
            msg = f"workspace budget exceeded: {self.bits_in_use} > {self.budget} bits"
            if self.on_violation == "raise":
                raise BudgetExceededError(msg)
            warnings.warn(msg)

    def release(self, bits: int) -> None:
        if bits < 0:
            raise ValueError("cannot release negative bits")
        if bits > self.bits_in_use:
            raise MeterError(
                f"releasing {bits} bits but only {self.bits_in_use} in use"
            )
        self.bits_in_use -= bits

    def charge_scalars(self, **ranges: int) -> int:
        """Charge one named scalar per kwarg at bits_for(range) bits each.

        Returns the total charged so the caller can release it in one call.
        """
        total = sum(bits_for(r) for r in ranges.values())
        self.charge(total)
        return total

    @contextmanager
    def charged(self, bits: int):
        self.charge(bits)
        try:
            yield
        finally:
            self.release(bits)


# Streaming register arithmetic operates on fixed-size groups of bits; this is
# the word size for residue extraction and the modelled ALU scratch.
GROUP_BITS = 16


def alu_scratch_bits(width: int) -> int:
    """Workspace model for one in-flight register operation.

    Two group buffers, a carry, and a position index over an `width`-bit
    register; the full register value never counts as workspace.
    """
    return 2 * GROUP_BITS + 1 + bits_for(max(width, 2))


class RegisterFile:
    """A view of tape spans as `count` registers of `width` bits, mod `modulus`.

    Registers are packed end to end from `base`, little-endian within their
    span. The multiplier d is the largest value with q*d <= 2**width; a
    register is valid when its value is below q*d.
    """

    __slots__ = (
        "tape",
        "base",
        "count",
        "width",
        "modulus",
        "multiplier",
        "_limit",
        "_mask",
        "_dirty",
    )

    def __init__(self, tape: CatalyticTape, base: int, count: int, width: int, modulus: int):
        if modulus < 2:
            raise ValueError("modulus must be at least 2")
        if width < 1:
            raise ValueError("width must be at least 1")
        if modulus > (1 << width):
            raise ValueError(
                f"modulus {modulus} too large for width {width}"
            )
        tape._check_span(base, count * width)
        self.tape = tape
        self.base = base
        self.count = count
        self.width = width
        self.modulus = modulus
        self.multiplier = (1 << width) // modulus
        self._limit = self.modulus * self.multiplier
        self._mask = (1 << width) - 1
        self._dirty = set()

    def _offset(self, idx: int) -> int:
        if idx < 0 or idx >= self.count:
            raise IndexError(f"register {idx} out of range [0, {self.count})")
        return self.base + idx * self.width

    def read(self, idx: int) -> int:
        return self.tape.read_bits(self._offset(idx), self.width)

    def write(self, idx: int, value: int) -> None:
        self.tape.write_bits(self._offset(idx), self.width, value)
        self._dirty.add(idx)

    def is_valid(self, idx: int) -> bool:
        return self.read(idx) < self._limit

    def _require_valid(self, idx: int, value: int) -> None:
        if value >= self._limit:
            raise InvalidRegisterError(
                f"register {idx} holds {value} >= q*d = {self._limit}"
            )

    def residue(self, idx: int) -> int:
        """The b part of value = a*q + b; requires validity."""
        value = self.read(idx)
        self._require_valid(idx, value)
        return value % self.modulus

    def add_mod(self, dst: int, amount: int) -> None:
        """The b part becomes (b + amount) mod q; the a part never moves."""
        if not 0 <= amount < self.modulus:
            raise ValueError(f"amount {amount} not in [0, q)")
        value = self.read(dst)
        self._require_valid(dst, value)
        b = value % self.modulus
        self.write(dst, value - b + (b + amount) % self.modulus)

    def sub_mod(self, dst: int, amount: int) -> None:
        if not 0 <= amount < self.modulus:
            raise ValueError(f"amount {amount} not in [0, q)")
        self.add_mod(dst, (self.modulus - amount) % self.modulus)

    def add_reg(self, dst: int, src: int, sign: int = 1) -> None:
        """Edge push: dst's residue gains (sign)*src's residue; src unchanged."""
        if dst == src:
            raise ValueError("edge push requires dst != src")
        if sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        amount = self.residue(src)
        if sign == 1:
            self.add_mod(dst, amount)
        else:
            self.sub_mod(dst, amount)

    def shift_all(self, beta: int) -> None:
        """Add beta mod 2**width to every register; inverse is 2**width - beta."""
        if not 0 <= beta < (1 << self.width):
            raise ValueError("shift must be in [0, 2**width)")
        self.shift_indices(range(self.count), beta)

    def shift_indices(self, indices: Iterable[int], beta: int) -> None:
        if not 0 <= beta < (1 << self.width):
            raise ValueError("shift must be in [0, 2**width)")
        mask = self._mask
        for idx in indices:
            off = self._offset(idx)
            value = (self.tape.read_bits(off, self.width) + beta) & mask
            self.tape.write_bits(off, self.width, value)
            self._dirty.add(idx)

    def read_block(self, start: int, count: int) -> list[int]:
        """Values of registers start..start+count-1 via one tape read."""
        if count == 0:
            return []
        off = self._offset(start)
        self._offset(start + count - 1)
        blob = self.tape.read_bits(off, count * self.width)
        w, mask = self.width, self._mask
        return [(blob >> (k * w)) & mask for k in range(count)]

    def write_block(self, start: int, values: Sequence[int]) -> None:
        if not values:
            return
        off = self._offset(start)
        self._offset(start + len(values) - 1)
        w = self.width
        blob = 0
        for k, v in enumerate(values):
            if v < 0 or v >> w:
                raise ValueError(f"value {v} does not fit in {w} bits")
            blob |= v << (k * w)
        self.tape.write_bits(off, len(values) * w, blob)
        self._dirty.update(range(start, start + len(values)))

    def residues_block(self, start: int, count: int) -> list[int]:
        """Residues of a contiguous block; validates every register in it."""
        values = self.read_block(start, count)
        limit, q = self._limit, self.modulus
        for k, v in enumerate(values):
            if v >= limit:
                raise InvalidRegisterError(
                    f"register {start + k} holds {v} >= q*d = {limit}"
                )
        return [v % q for v in values]

    def stream_residue(self, idx: int, q: int | None = None) -> int:
        """Value mod q read in GROUP_BITS chunks, most significant first.

        Holds only an accumulator in [q) plus one group at a time, mirroring
        the logspace computation; the register itself stays on the tape.
        """
        if q is None:
            q = self.modulus
        off = self._offset(idx)
        w = self.width
        acc = 0
        pos = ((w + GROUP_BITS - 1) // GROUP_BITS) * GROUP_BITS
        while pos > 0:
            pos -= GROUP_BITS
            gw = min(GROUP_BITS, w - pos)
            if gw <= 0:
                continue
            group = self.tape.read_bits(off + pos, gw)
            acc = ((acc << gw) | group) % q
        return acc

    def read_group(self, idx: int, group: int) -> int:
        """The `group`-th GROUP_BITS-wide slice of a register, LSB first."""
        off = self._offset(idx) + group * GROUP_BITS
        gw = min(GROUP_BITS, self.width - group * GROUP_BITS)
        if gw <= 0:
            raise IndexError(f"group {group} outside register width {self.width}")
        return self.tape.read_bits(off, gw)

    @property
    def touched_registers(self) -> int:
        return len(self._dirty)

    @property
    def touched_bits(self) -> int:
        return len(self._dirty) * self.width

    def span_of(self, idx: int) -> tuple[int, int]:
        """(bit offset, width) of a register on the tape."""
        return self._offset(idx), self.width

    def register_at_bit(self, bit_index: int) -> int | None:
        """Index of the register whose span covers the tape bit, if any."""
        rel = bit_index - self.base
        if rel < 0 or rel >= self.count * self.width:
            return None
        return rel // self.width


def allocate_registers(
    tape: CatalyticTape, base: int, count: int, width: int, modulus: int
) -> RegisterFile:
    """Allocate a register view; never modifies tape bits."""
    return RegisterFile(tape, base, count, width, modulus)


def make_tape(nbits: int, profile: str = "random", seed: int = 0) -> CatalyticTape:
    """Build an initial tape: 'zeros', 'ones', or seeded uniform 'random'."""
    if profile == "zeros":
        return CatalyticTape.zeros(nbits)
    if profile == "ones":
        return CatalyticTape.ones(nbits)
    if profile == "random":
        import random

        return CatalyticTape.random(nbits, random.Random(seed))
    raise ValueError(f"unknown tape profile {profile!r}")
