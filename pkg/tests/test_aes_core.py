"""Cipher unit tests against independent oracles.

Oracles used here:
* the published AES S-box table, transcribed below;
* a carry-less-multiply-then-reduce GF(2^8) product, implemented
  differently from the library's shift-and-add version;
* the `cryptography` package as an independent AES-128 implementation;
* published key-schedule and single-column mixing walkthrough values.
"""

import random

import pytest
from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes

from aes_pipeline import aes_core
from aes_pipeline.aes_core import (
    DEC_MATRIX, ENC_MATRIX, INV_SBOX, SBOX, State, add_round_key, byte_sub,
    decrypt_block, encrypt_block, encrypt_stage_states, gf_mul,
    inv_byte_sub, inv_mix_column, inv_shift_row, key_expand, mix_column,
    shift_row, xtime,
)

# The published substitution table, row-major by high nibble.
PUBLISHED_SBOX = bytes.fromhex(
    "637c777bf26b6fc53001672bfed7ab76"
    "ca82c97dfa5947f0add4a2af9ca472c0"
    "b7fd9326363ff7cc34a5e5f171d83115"
    "04c723c31896059a071280e2eb27b275"
    "09832c1a1b6e5aa0523bd6b329e32f84"
    "53d100ed20fcb15b6acbbe394a4c58cf"
    "d0efaafb434d338545f9027f503c9fa8"
    "51a3408f929d38f5bcb6da2110fff3d2"
    "cd0c13ec5f974417c4a77e3d645d1973"
    "60814fdc222a908846eeb814de5e0bdb"
    "e0323a0a4906245cc2d3ac629195e479"
    "e7c8376d8dd54ea96c56f4ea657aae08"
    "ba78252e1ca6b4c6e8dd741f4bbd8b8a"
    "703eb5664803f60e613557b986c11d9e"
    "e1f8981169d98e949b1e87e9ce5528df"
    "8ca1890dbfe6426841992d0fb054bb16")

FIPS_KEY = bytes.fromhex("000102030405060708090a0b0c0d0e0f")
FIPS_PLAIN = bytes.fromhex("00112233445566778899aabbccddeeff")
FIPS_CIPHER = bytes.fromhex("69c4e0d86a7b0430d8cdb78070b4c55a")


def ref_gf_mul(a: int, b: int) -> int:
    """Carry-less polynomial product reduced mod x^8+x^4+x^3+x+1."""
    p = 0
    for i in range(8):
        if (b >> i) & 1:
            p ^= a << i
    for i in range(14, 7, -1):
        if (p >> i) & 1:
            p ^= 0x11B << (i - 8)
    return p


def oracle_encrypt(key: bytes, block: bytes) -> bytes:
    enc = Cipher(algorithms.AES(key), modes.ECB()).encryptor()
    return enc.update(block) + enc.finalize()


# --- GF(2^8) arithmetic -----------------------------------------------------

def test_xtime_matches_reference_product():
    for a in range(256):
        assert xtime(a) == ref_gf_mul(a, 2)


def test_gf_mul_matches_reference_product():
    rng = random.Random(2024)
    for _ in range(2000):
        a, b = rng.randrange(256), rng.randrange(256)
        assert gf_mul(a, b) == ref_gf_mul(a, b)
    assert gf_mul(0x57, 0x83) == 0xC1  # textbook example
    assert gf_mul(0x57, 0x13) == 0xFE


def test_gf_mul_identity_and_zero():
    for a in range(256):
        assert gf_mul(a, 1) == a
        assert gf_mul(1, a) == a
        assert gf_mul(a, 0) == 0


# --- S-box -------------------------------------------------------------------

def test_sbox_matches_published_table():
    assert bytes(SBOX) == PUBLISHED_SBOX


def test_inverse_sbox_round_trips():
    for x in range(256):
        assert INV_SBOX[SBOX[x]] == x
        assert SBOX[INV_SBOX[x]] == x


# --- state layout --------------------------------------------------------------

def test_state_block_round_trip_is_column_major():
    block = bytes(range(16))
    s = State.from_block(block)
    # Byte j lands at (row j % 4, col j // 4).
    assert s.rows[1][2] == block[9]
    assert s.rows[3][0] == block[3]
    assert s.to_block() == block


def test_state_rejects_bad_shapes_and_bytes():
    with pytest.raises(ValueError):
        State([[0] * 4] * 3)
    with pytest.raises(ValueError):
        State([[0, 0, 0, 256]] + [[0] * 4] * 3)
    with pytest.raises(ValueError):
        State.from_block(b"\x00" * 15)


# --- row shifting ---------------------------------------------------------------

def test_shift_row_rotates_each_row_by_its_index():
    s = State([[10, 11, 12, 13],
               [20, 21, 22, 23],
               [30, 31, 32, 33],
               [40, 41, 42, 43]])
    t = shift_row(s)
    assert t.rows == ((10, 11, 12, 13),
                      (21, 22, 23, 20),
                      (32, 33, 30, 31),
                      (43, 40, 41, 42))
    assert inv_shift_row(t) == s


# --- column mixing ----------------------------------------------------------------

def test_mix_column_published_column():
    # Published walkthrough: (db,13,53,45) mixes to (8e,4d,a1,bc).
    s = State([[0xDB, 0, 0, 0], [0x13, 0, 0, 0],
               [0x53, 0, 0, 0], [0x45, 0, 0, 0]])
    t = mix_column(s)
    col = tuple(t.rows[r][0] for r in range(4))
    assert col == (0x8E, 0x4D, 0xA1, 0xBC)
    assert inv_mix_column(t) == s


def test_mixing_matrices_are_inverse():
    for r in range(4):
        for c in range(4):
            acc = 0
            for j in range(4):
                acc ^= gf_mul(DEC_MATRIX[r][j], ENC_MATRIX[j][c])
            assert acc == (1 if r == c else 0)


def test_mix_column_round_trip_random_states():
    rng = random.Random(7)
    for _ in range(50):
        s = State([[rng.randrange(256) for _ in range(4)] for _ in range(4)])
        assert inv_mix_column(mix_column(s)) == s
        assert mix_column(inv_mix_column(s)) == s


def test_byte_sub_round_trip():
    rng = random.Random(8)
    s = State([[rng.randrange(256) for _ in range(4)] for _ in range(4)])
    assert inv_byte_sub(byte_sub(s)) == s


def test_add_round_key_is_involution():
    rng = random.Random(9)
    s = State([[rng.randrange(256) for _ in range(4)] for _ in range(4)])
    key = bytes(rng.randrange(256) for _ in range(16))
    assert add_round_key(add_round_key(s, key), key) == s


# --- key schedule ------------------------------------------------------------------

def test_key_expand_published_walkthrough():
    keys = key_expand(FIPS_KEY)
    assert len(keys) == 11
    assert keys[0] == FIPS_KEY
    assert keys[1] == bytes.fromhex("d6aa74fdd2af72fadaa678f1d6ab76fe")
    assert keys[10] == bytes.fromhex("13111d7fe3944a17f307a78b4d2b30c5")


def test_key_expand_all_zero_key():
    keys = key_expand(bytes(16))
    assert keys[1] == bytes.fromhex("62636363626363636263636362636363")


def test_key_expand_rejects_bad_length():
    with pytest.raises(ValueError):
        key_expand(b"\x00" * 24)


# --- full cipher --------------------------------------------------------------------

def test_encrypt_published_vector():
    keys = key_expand(FIPS_KEY)
    assert encrypt_block(FIPS_PLAIN, keys) == FIPS_CIPHER
    assert decrypt_block(FIPS_CIPHER, keys) == FIPS_PLAIN


def test_stage_states_shape_and_endpoints():
    keys = key_expand(FIPS_KEY)
    states = encrypt_stage_states(FIPS_PLAIN, keys)
    assert len(states) == 11
    assert states[-1].to_block() == FIPS_CIPHER
    # First stage is only the initial key addition.
    assert states[0] == add_round_key(State.from_block(FIPS_PLAIN), keys[0])


def test_matches_independent_implementation():
    rng = random.Random(11)
    for _ in range(200):
        key = bytes(rng.randrange(256) for _ in range(16))
        block = bytes(rng.randrange(256) for _ in range(16))
        keys = key_expand(key)
        assert encrypt_block(block, keys) == oracle_encrypt(key, block)


def test_equivalent_decrypt_schedule_agrees_with_plain_decrypt():
    rng = random.Random(12)
    for _ in range(50):
        key = bytes(rng.randrange(256) for _ in range(16))
        block = bytes(rng.randrange(256) for _ in range(16))
        keys = key_expand(key)
        eq = aes_core.equivalent_decrypt_schedule(keys)
        ct = encrypt_block(block, keys)
        states = aes_core.decrypt_stage_states(ct, eq)
        assert states[-1].to_block() == block
        assert decrypt_block(ct, keys) == block
