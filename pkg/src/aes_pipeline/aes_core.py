"""AES-128 encryption and decryption built from its named transformations.

The block cipher is decomposed into byte substitution, row shifting,
column mixing and round-key addition so that each transformation can be
used on its own (the pipeline simulator executes them as separate task
graphs and checks its byte values against this module).

State layout: a 128-bit block fills the 4x4 matrix column by column,
i.e. block byte j lands at (row = j % 4, col = j // 4).
"""

from __future__ import annotations

from typing import Sequence

# GF(2^8) with reduction polynomial x^8 + x^4 + x^3 + x + 1.
_REDUCTION = 0x11B

NUM_ROUNDS = 10
BLOCK_SIZE = 16


def xtime(b: int) -> int:
    """Multiply by 02 in GF(2^8): one left shift plus conditional reduction."""
    b <<= 1
    if b & 0x100:
        b ^= _REDUCTION
    return b


def gf_mul(a: int, b: int) -> int:
    """Product in GF(2^8), shift-and-add over the fixed reduction polynomial."""
    acc = 0
    while b:
        if b & 1:
            acc ^= a
        a = xtime(a)
        b >>= 1
    return acc


def _gf_inv(a: int) -> int:
    # a^254 = a^-1 for a != 0; zero maps to zero by convention.
    result = 1
    power = a
    exp = 254
    while exp:
        if exp & 1:
            result = gf_mul(result, power)
        power = gf_mul(power, power)
        exp >>= 1
    return result


def _build_sbox() -> tuple[int, ...]:
    box = []
    for x in range(256):
        y = _gf_inv(x)
        z = y
        for shift in (1, 2, 3, 4):
            z ^= ((y << shift) | (y >> (8 - shift))) & 0xFF
        box.append(z ^ 0x63)
    return tuple(box)


SBOX = _build_sbox()
INV_SBOX = tuple(SBOX.index(i) for i in range(256))

# Column-mixing matrices: ENC_MATRIX for encryption, DEC_MATRIX its inverse.
ENC_MATRIX = ((0x02, 0x03, 0x01, 0x01),
              (0x01, 0x02, 0x03, 0x01),
              (0x01, 0x01, 0x02, 0x03),
              (0x03, 0x01, 0x01, 0x02))
DEC_MATRIX = ((0x0E, 0x0B, 0x0D, 0x09),
              (0x09, 0x0E, 0x0B, 0x0D),
              (0x0D, 0x09, 0x0E, 0x0B),
              (0x0B, 0x0D, 0x09, 0x0E))


class State:
    """Immutable 4x4 byte matrix indexed (row, col)."""

    __slots__ = ("rows",)

    def __init__(self, rows: Sequence[Sequence[int]]):
        if len(rows) != 4 or any(len(r) != 4 for r in rows):
            raise ValueError("state must be a 4x4 matrix")
        for row in rows:
            for b in row:
                if not 0 <= b <= 0xFF:
                    raise ValueError(f"state byte out of range: {b!r}")
        self.rows = tuple(tuple(r) for r in rows)

    @classmethod
    def from_block(cls, block: bytes) -> "State":
        if len(block) != BLOCK_SIZE:
            raise ValueError(f"block must be {BLOCK_SIZE} bytes, got {len(block)}")
        return cls([[block[r + 4 * c] for c in range(4)] for r in range(4)])

    def to_block(self) -> bytes:
        return bytes(self.rows[j % 4][j // 4] for j in range(BLOCK_SIZE))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, State) and self.rows == other.rows

    def __hash__(self) -> int:
        return hash(self.rows)

    def __repr__(self) -> str:
        return f"State({self.rows!r})"


def byte_sub(s: State) -> State:
    return State([[SBOX[b] for b in row] for row in s.rows])


def inv_byte_sub(s: State) -> State:
    return State([[INV_SBOX[b] for b in row] for row in s.rows])


def shift_row(s: State) -> State:
    """Rotate row r left by r positions."""
    return State([row[r:] + row[:r] for r, row in enumerate(s.rows)])


def inv_shift_row(s: State) -> State:
    return State([row[-r:] + row[:-r] if r else row
                  for r, row in enumerate(s.rows)])


# Lookup tables for the fixed matrix multipliers keep column mixing fast.
_MUL_TABLE = {m: tuple(gf_mul(m, b) for b in range(256))
              for m in {e for row in ENC_MATRIX + DEC_MATRIX for e in row}}


def _mix_with(matrix: tuple, s: State) -> State:
    out = [[0] * 4 for _ in range(4)]
    for c in range(4):
        col = [s.rows[r][c] for r in range(4)]
        for r in range(4):
            acc = 0
            for j in range(4):
                acc ^= _MUL_TABLE[matrix[r][j]][col[j]]
            out[r][c] = acc
    return State(out)


def mix_column(s: State) -> State:
    return _mix_with(ENC_MATRIX, s)


def inv_mix_column(s: State) -> State:
    return _mix_with(DEC_MATRIX, s)


def add_round_key(s: State, key: bytes) -> State:
    if len(key) != BLOCK_SIZE:
        raise ValueError("round key must be 16 bytes")
    k = State.from_block(key)
    return State([[s.rows[r][c] ^ k.rows[r][c] for c in range(4)]
                  for r in range(4)])


_RCON = (0x01, 0x02, 0x04, 0x08, 0x10, 0x20, 0x40, 0x80, 0x1B, 0x36)


def key_expand(key: bytes) -> list[bytes]:
    """AES-128 key schedule: the cipher key followed by ten derived round keys."""
    if len(key) != BLOCK_SIZE:
        raise ValueError(f"cipher key must be {BLOCK_SIZE} bytes, got {len(key)}")
    words = [list(key[4 * i:4 * i + 4]) for i in range(4)]
    for i in range(4, 4 * (NUM_ROUNDS + 1)):
        temp = list(words[i - 1])
        if i % 4 == 0:
            temp = temp[1:] + temp[:1]
            temp = [SBOX[b] for b in temp]
            temp[0] ^= _RCON[i // 4 - 1]
        words.append([temp[j] ^ words[i - 4][j] for j in range(4)])
    return [bytes(b for w in words[4 * r:4 * r + 4] for b in w)
            for r in range(NUM_ROUNDS + 1)]


def encrypt_stage_states(block: bytes, round_keys: Sequence[bytes]) -> list[State]:
    """State after each of the eleven encryption stages (initial key addition,
    nine standard rounds, final round without column mixing)."""
    s = add_round_key(State.from_block(block), round_keys[0])
    states = [s]
    for r in range(1, NUM_ROUNDS):
        s = add_round_key(mix_column(shift_row(byte_sub(s))), round_keys[r])
        states.append(s)
    s = add_round_key(shift_row(byte_sub(s)), round_keys[NUM_ROUNDS])
    states.append(s)
    return states


def encrypt_block(block: bytes, round_keys: Sequence[bytes]) -> bytes:
    return encrypt_stage_states(block, round_keys)[-1].to_block()


def decrypt_block(block: bytes, round_keys: Sequence[bytes]) -> bytes:
    """Exact inverse of encrypt_block (straightforward inverse order)."""
    s = add_round_key(State.from_block(block), round_keys[NUM_ROUNDS])
    for r in range(NUM_ROUNDS - 1, 0, -1):
        s = inv_mix_column(add_round_key(inv_byte_sub(inv_shift_row(s)),
                                         round_keys[r]))
    s = add_round_key(inv_byte_sub(inv_shift_row(s)), round_keys[0])
    return s.to_block()


def equivalent_decrypt_schedule(round_keys: Sequence[bytes]) -> list[bytes]:
    """Round keys reordered (and column-unmixed for the middle rounds) so that
    decryption can run with the same per-round phase order as encryption:
    substitution, row shift, column mix, key addition."""
    sched = [round_keys[NUM_ROUNDS]]
    for r in range(1, NUM_ROUNDS):
        k = State.from_block(round_keys[NUM_ROUNDS - r])
        sched.append(inv_mix_column(k).to_block())
    sched.append(round_keys[0])
    return sched


def decrypt_stage_states(block: bytes, eq_schedule: Sequence[bytes]) -> list[State]:
    """State after each of the eleven decryption stages, using the
    equivalent schedule from equivalent_decrypt_schedule()."""
    s = add_round_key(State.from_block(block), eq_schedule[0])
    states = [s]
    for r in range(1, NUM_ROUNDS):
        s = add_round_key(inv_mix_column(inv_shift_row(inv_byte_sub(s))),
                          eq_schedule[r])
        states.append(s)
    s = add_round_key(inv_shift_row(inv_byte_sub(s)), eq_schedule[NUM_ROUNDS])
    states.append(s)
    return states
