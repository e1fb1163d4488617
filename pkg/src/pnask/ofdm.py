"""OFDM framing of PN-ASK symbols with WiFi subcarrier parameters.

64-point transform, 48 data / 4 pilot / 12 guard subcarriers, pilots
``(1, 1, 1, -1)`` at subcarriers ``(-21, -7, 7, 21)`` and a 16-sample cyclic
prefix. Only data subcarriers carry PN-ASK symbols; pilots stay at unit
amplitude.

Packet layout per OFDM burst (both streams share the same symbols):

* header, 16 symbols: BPSK phase carries the 16-bit primary length and a
  two-level amplitude (d = 0.5) carries the 16-bit covert length;
* payload: 96-byte block per stream (data zero-padded to 92 bytes, then
  CRC-32 over ``length || padded data``), modulated with the payload
  ``(m, m_c, d)``; the shorter stream is padded with symbol 0 / outer radius;
* trailing slots of the last subframe are padding.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass

import numpy as np

from .channel import ChannelModel, NoiseSpec, add_noise, draw_gain
from .modem import (
    CovertCodingMap,
    build_coding_map,
    covert_decide,
    covert_index_to_value,
    covert_value_to_index,
    psk_demodulate,
    psk_modulate,
)

N_FFT = 64
CP_LEN = 16
BLOCK_LEN = N_FFT + CP_LEN
PILOT_CARRIERS = (-21, -7, 7, 21)
PILOT_VALUES = np.array([1.0, 1.0, 1.0, -1.0], dtype=np.complex128)
GUARD_CARRIERS = tuple(range(-32, -26)) + (0,) + tuple(range(27, 32))
DATA_CARRIERS = tuple(k for k in range(-26, 27) if k != 0 and k not in PILOT_CARRIERS)
N_DATA = len(DATA_CARRIERS)

PAYLOAD_BYTES = 96
CRC_BYTES = 4
MAX_DATA_BYTES = PAYLOAD_BYTES - CRC_BYTES
HEADER_SYMBOLS = 16
HEADER_M = 2
HEADER_MAP = build_coding_map(2, 0.5)

PACKET_BATCH = 256

_DATA_BINS = np.array([k % N_FFT for k in DATA_CARRIERS])
_PILOT_BINS = np.array([k % N_FFT for k in PILOT_CARRIERS])
_GUARD_BINS = np.array([k % N_FFT for k in GUARD_CARRIERS])

assert N_DATA == 48 and len(GUARD_CARRIERS) == 12


class FramingError(ValueError):
    """Malformed OFDM block or packet payload."""


@dataclass(frozen=True)
class OfdmSubframe:
    """Frequency-domain slots in transform-bin order plus the CP-prefixed time block."""

    slots: np.ndarray
    time_block: np.ndarray

    def subcarrier(self, k: int) -> complex:
        return complex(self.slots[..., k % N_FFT])

    @property
    def data(self) -> np.ndarray:
        return self.slots[..., _DATA_BINS]

    @property
    def pilots(self) -> np.ndarray:
        return self.slots[..., _PILOT_BINS]


def assemble_subframe(data) -> OfdmSubframe:
    """Place 48 samples (last axis) on the data subcarriers and transform.

    Leading axes are treated as a batch of subframes.
    """
    data = np.asarray(data, dtype=np.complex128)
    if data.shape[-1:] != (N_DATA,):
        raise FramingError(f"expected {N_DATA} data samples on the last axis, got shape {data.shape}")
    slots = np.zeros(data.shape[:-1] + (N_FFT,), dtype=np.complex128)
    slots[..., _DATA_BINS] = data
    slots[..., _PILOT_BINS] = PILOT_VALUES
    body = np.fft.ifft(slots, axis=-1, norm="ortho")
    time_block = np.concatenate([body[..., -CP_LEN:], body], axis=-1)
    return OfdmSubframe(slots, time_block)


def estimate_gain(slots: np.ndarray) -> np.ndarray:
    """Least-squares single-tap estimate from the pilots (mean of ratios)."""
    return np.mean(slots[..., _PILOT_BINS] / PILOT_VALUES, axis=-1)


def disassemble_subframe(time_block, equalize: bool = True, return_gain: bool = False):
    """Inverse of :func:`assemble_subframe`; returns the 48 data samples."""
    block = np.asarray(time_block, dtype=np.complex128)
    if block.shape[-1:] != (BLOCK_LEN,):
        raise FramingError(f"expected blocks of {BLOCK_LEN} samples, got shape {block.shape}")
    slots = np.fft.fft(block[..., CP_LEN:], axis=-1, norm="ortho")
    data = slots[..., _DATA_BINS]
    gain = estimate_gain(slots)
    if equalize:
        data = data / gain[..., None]
    return (data, gain) if return_gain else data


@dataclass(frozen=True)
class PacketFormat:
    m: int = 2
    m_c: int = 2
    d: float | None = 0.5

    @property
    def coding_map(self) -> CovertCodingMap:
        return build_coding_map(self.m_c, self.d)

    @property
    def primary_symbols(self) -> int:
        return _ceil_div(8 * PAYLOAD_BYTES, _bits(self.m))

    @property
    def covert_symbols(self) -> int:
        return 0 if self.m_c == 1 else _ceil_div(8 * PAYLOAD_BYTES, _bits(self.m_c))

    @property
    def n_symbols(self) -> int:
        return HEADER_SYMBOLS + max(self.primary_symbols, self.covert_symbols)

    @property
    def n_subframes(self) -> int:
        return _ceil_div(self.n_symbols, N_DATA)


def _bits(order: int) -> int:
    return int(order).bit_length() - 1


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


@dataclass(frozen=True)
class PhyPacket:
    """One framed packet: per-stream 96-byte blocks and the data-slot symbols."""

    primary_length: int
    covert_length: int
    primary_block: bytes
    covert_block: bytes
    symbols: np.ndarray


@dataclass(frozen=True)
class PacketResult:
    """Decoded payloads; ``None`` marks a CRC (or length) failure."""

    primary: bytes | None
    covert: bytes | None
    primary_symbol_errors: int
    covert_symbol_errors: int

    @property
    def primary_ok(self) -> bool:
        return self.primary is not None

    @property
    def covert_ok(self) -> bool:
        return self.covert is not None


def _crc_block(length: int, padded: bytes) -> bytes:
    return zlib.crc32(length.to_bytes(2, "big") + padded).to_bytes(CRC_BYTES, "big")


def payload_block(data: bytes) -> bytes:
    """Zero-pad ``data`` to 92 bytes and append its CRC-32."""
    if len(data) > MAX_DATA_BYTES:
        raise FramingError(f"payload of {len(data)} bytes exceeds {MAX_DATA_BYTES}")
    padded = bytes(data) + bytes(MAX_DATA_BYTES - len(data))
    return padded + _crc_block(len(data), padded)


def check_block(length: int, block: bytes) -> bytes | None:
    if length > MAX_DATA_BYTES:
        return None
    padded, crc = block[:MAX_DATA_BYTES], block[MAX_DATA_BYTES:]
    if _crc_block(length, padded) != crc:
        return None
    return padded[:length]


def _pack_symbols(bits: np.ndarray, bits_per_symbol: int, n_symbols: int) -> np.ndarray:
    """Rows of bits -> rows of MSB-first symbol values, zero-padded."""
    rows = bits.shape[0]
    total = n_symbols * bits_per_symbol
    padded = np.zeros((rows, total), dtype=np.int64)
    padded[:, : bits.shape[1]] = bits
    weights = 1 << np.arange(bits_per_symbol - 1, -1, -1)
    return padded.reshape(rows, n_symbols, bits_per_symbol) @ weights


def _unpack_symbols(values: np.ndarray, bits_per_symbol: int, n_bits: int) -> np.ndarray:
    shifts = np.arange(bits_per_symbol - 1, -1, -1)
    bits = (values[..., None] >> shifts) & 1
    return bits.reshape(values.shape[0], -1)[:, :n_bits].astype(np.uint8)


def _length_bits(lengths) -> np.ndarray:
    raw = np.array([[n >> 8, n & 0xFF] for n in lengths], dtype=np.uint8).reshape(-1, 2)
    return np.unpackbits(raw, axis=1).astype(np.int64)


def frame_symbols(primaries: list[bytes], coverts: list[bytes], fmt: PacketFormat):
    """Build the data-slot symbols of a batch of packets.

    Returns ``(symbols, primary_values, covert_indices)`` each shaped
    ``(packets, n_subframes * 48)``; the value arrays are what the receiver
    should recover, used for symbol-error counting.
    """
    if len(primaries) != len(coverts):
        raise FramingError("primary and covert payload lists differ in length")
    if fmt.m_c == 1 and any(len(c) for c in coverts):
        raise FramingError("covert payload given but the covert channel is disabled (m_c = 1)")
    n_packets = len(primaries)
    total = fmt.n_subframes * N_DATA
    cmap = fmt.coding_map

    p_blocks = np.frombuffer(b"".join(payload_block(p) for p in primaries), dtype=np.uint8).reshape(n_packets, -1)
    p_bits = np.unpackbits(p_blocks, axis=1).astype(np.int64)
    primary_values = np.zeros((n_packets, total), dtype=np.int64)
    covert_indices = np.zeros((n_packets, total), dtype=np.int64)

    head = slice(0, HEADER_SYMBOLS)
    primary_values[:, head] = _length_bits([len(p) for p in primaries])
    body = slice(HEADER_SYMBOLS, HEADER_SYMBOLS + fmt.primary_symbols)
    primary_values[:, body] = _pack_symbols(p_bits, _bits(fmt.m), fmt.primary_symbols)

    phase = np.asarray(psk_modulate(primary_values, fmt.m))
    phase[:, head] = np.asarray(psk_modulate(primary_values[:, head], HEADER_M))
    amplitude = np.ones((n_packets, total))

    if fmt.m_c > 1:
        c_blocks = np.frombuffer(b"".join(payload_block(c) for c in coverts), dtype=np.uint8).reshape(n_packets, -1)
        c_bits = np.unpackbits(c_blocks, axis=1).astype(np.int64)
        covert_indices[:, head] = covert_value_to_index(_length_bits([len(c) for c in coverts]), 2)
        amplitude[:, head] = HEADER_MAP.levels[covert_indices[:, head]]
        cbody = slice(HEADER_SYMBOLS, HEADER_SYMBOLS + fmt.covert_symbols)
        values = _pack_symbols(c_bits, _bits(fmt.m_c), fmt.covert_symbols)
        covert_indices[:, cbody] = covert_value_to_index(values, fmt.m_c)
        amplitude[:, cbody] = cmap.levels[covert_indices[:, cbody]]

    return phase * amplitude, primary_values, covert_indices


def _decode_lengths(bits: np.ndarray) -> np.ndarray:
    return np.packbits(bits.astype(np.uint8), axis=1).astype(np.int64) @ np.array([256, 1])


def deframe_symbols(received: np.ndarray, fmt: PacketFormat):
    """Demodulate equalized data-slot symbols; returns per-packet results and decisions."""
    y = np.asarray(received, dtype=np.complex128)
    n_packets = y.shape[0]
    head = slice(0, HEADER_SYMBOLS)
    primary_hat = np.asarray(psk_demodulate(y, fmt.m)).reshape(y.shape)
    primary_hat[:, head] = np.asarray(psk_demodulate(y[:, head], HEADER_M))
    body = slice(HEADER_SYMBOLS, HEADER_SYMBOLS + fmt.primary_symbols)
    p_bits = _unpack_symbols(primary_hat[:, body], _bits(fmt.m), 8 * PAYLOAD_BYTES)
    p_blocks = np.packbits(p_bits, axis=1)
    p_lengths = _decode_lengths(primary_hat[:, head])

    covert_hat = np.zeros(y.shape, dtype=np.int64)
    if fmt.m_c > 1:
        mag = np.abs(y)
        covert_hat[:, head] = covert_decide(mag[:, head], HEADER_MAP)
        cbody = slice(HEADER_SYMBOLS, HEADER_SYMBOLS + fmt.covert_symbols)
        covert_hat[:, cbody] = covert_decide(mag[:, cbody], fmt.coding_map)
        c_lengths = _decode_lengths(covert_index_to_value(covert_hat[:, head], 2))
        c_values = covert_index_to_value(covert_hat[:, cbody], fmt.m_c)
        c_blocks = np.packbits(_unpack_symbols(c_values, _bits(fmt.m_c), 8 * PAYLOAD_BYTES), axis=1)

    decoded = []
    for i in range(n_packets):
        primary = check_block(int(p_lengths[i]), p_blocks[i].tobytes())
        covert = check_block(int(c_lengths[i]), c_blocks[i].tobytes()) if fmt.m_c > 1 else b""
        decoded.append((primary, covert))
    return decoded, primary_hat, covert_hat


def transmit_subframes(
    symbols: np.ndarray,
    channel: ChannelModel,
    noise: NoiseSpec,
    rng: np.random.Generator,
    equalize: bool = True,
) -> np.ndarray:
    """Frame ``(packets, n*48)`` symbols, pass them through a flat channel with one
    gain per subframe, and return the equalized data slots in the same shape."""
    n_packets, total = symbols.shape
    sub = assemble_subframe(symbols.reshape(n_packets, total // N_DATA, N_DATA))
    h = draw_gain(channel, sub.time_block.shape[:-1] + (1,), rng)
    rx = add_noise(h * sub.time_block, noise, rng)
    return disassemble_subframe(rx, equalize=equalize).reshape(n_packets, total)


def simulate_packets(
    primaries: list[bytes],
    coverts: list[bytes],
    channel: ChannelModel | None = None,
    noise: NoiseSpec | None = None,
    seed: int = 0,
    fmt: PacketFormat | None = None,
) -> list[PacketResult]:
    """Modulate, frame, transmit, equalize and decode a list of packets.

    Packets are processed in batches of ``PACKET_BATCH``; batch ``b`` draws from
    a generator seeded with ``(seed, b)``.
    """
    channel = channel or ChannelModel.awgn()
    noise = noise or NoiseSpec(float("inf"))
    fmt = fmt or PacketFormat()
    results: list[PacketResult] = []
    for b, start in enumerate(range(0, len(primaries), PACKET_BATCH)):
        rng = np.random.default_rng(np.random.SeedSequence([seed & (2**64 - 1), b]))
        p_batch = primaries[start : start + PACKET_BATCH]
        c_batch = coverts[start : start + PACKET_BATCH]
        symbols, p_sent, c_sent = frame_symbols(p_batch, c_batch, fmt)
        y = transmit_subframes(symbols, channel, noise, rng)
        decoded, p_hat, c_hat = deframe_symbols(y, fmt)
        p_err = np.count_nonzero(p_hat != p_sent, axis=1)
        c_err = np.count_nonzero(c_hat != c_sent, axis=1)
        for i, (primary, covert) in enumerate(decoded):
            results.append(PacketResult(primary, covert, int(p_err[i]), int(c_err[i])))
    return results


def packet_roundtrip(
    payload_primary: bytes,
    payload_covert: bytes,
    channel: ChannelModel | None = None,
    noise: NoiseSpec | None = None,
    seed: int = 0,
    fmt: PacketFormat | None = None,
) -> PacketResult:
    return simulate_packets([payload_primary], [payload_covert], channel, noise, seed, fmt)[0]


def build_packet(payload_primary: bytes, payload_covert: bytes, fmt: PacketFormat | None = None) -> PhyPacket:
    fmt = fmt or PacketFormat()
    symbols, _, _ = frame_symbols([payload_primary], [payload_covert], fmt)
    return PhyPacket(
        primary_length=len(payload_primary),
        covert_length=len(payload_covert),
        primary_block=payload_block(payload_primary),
        covert_block=payload_block(payload_covert) if fmt.m_c > 1 else b"",
        symbols=symbols[0],
    )


def chunk(data: bytes, size: int = MAX_DATA_BYTES) -> list[bytes]:
    return [data[i : i + size] for i in range(0, len(data), size)]


@dataclass
class TransferReport:
    packets: int
    primary_success: int
    covert_success: int
    primary_symbol_errors: int
    covert_symbol_errors: int
    primary_bytes: bytes | None
    covert_bytes: bytes | None

    @property
    def primary_success_rate(self) -> float:
        return self.primary_success / self.packets if self.packets else 1.0

    @property
    def covert_success_rate(self) -> float:
        return self.covert_success / self.packets if self.packets else 1.0


def transfer(
    primary_data: bytes,
    covert_data: bytes,
    channel: ChannelModel | None = None,
    noise: NoiseSpec | None = None,
    seed: int = 0,
    fmt: PacketFormat | None = None,
) -> TransferReport:
    """Stream two byte strings as 92-byte packet payloads and reassemble them.

    A stream's reassembled bytes are ``None`` if any of its packets failed.
    """
    fmt = fmt or PacketFormat()
    p_chunks = chunk(primary_data)
    c_chunks = chunk(covert_data) if fmt.m_c > 1 else []
    n = max(len(p_chunks), len(c_chunks), 1)
    p_chunks += [b""] * (n - len(p_chunks))
    c_chunks += [b""] * (n - len(c_chunks))
    results = simulate_packets(p_chunks, c_chunks, channel, noise, seed, fmt)
    p_ok = sum(r.primary_ok for r in results)
    c_ok = sum(r.covert_ok for r in results)
    return TransferReport(
        packets=n,
        primary_success=p_ok,
        covert_success=c_ok,
        primary_symbol_errors=sum(r.primary_symbol_errors for r in results),
        covert_symbol_errors=sum(r.covert_symbol_errors for r in results),
        primary_bytes=b"".join(r.primary for r in results) if p_ok == n else None,
        covert_bytes=b"".join(r.covert for r in results) if c_ok == n else None,
    )
