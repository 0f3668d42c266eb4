"""Wire formats: 127-byte frames, the authenticated payload, fragmentation.

A frame is a 21-byte header followed by at most 106 payload bytes.  The
header models the fields the simulator needs (destination, source,
sequence number, flags) and pads the rest to the fixed 21 bytes a real
802.15.4-style stack would occupy.  Application records that fit one
frame travel in the payload codec layout

    sender(2, big-endian) | nonce(2) | message(<=98) | mac(4)

where the mac is a truncated unkeyed SHA-256 over the preceding bytes.
Larger blobs (serialized ciphertexts, trust lists) are fragmented into
raw 106-byte chunks with consecutive sequence numbers; the MORE flag
marks every chunk but the last.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from .errors import Reject

HEADER_SIZE = 21
MAX_FRAME = 127
MAX_PAYLOAD = MAX_FRAME - HEADER_SIZE  # 106
MAX_MESSAGE = MAX_PAYLOAD - 2 - 2 - 4  # 98
MAC_SIZE = 4
NONCE_SIZE = 2

FLAG_MORE = 0x01


def truncated_mac(data: bytes) -> bytes:
    """First 4 bytes of SHA-256.  Unkeyed: when used inside a ciphertext
    the surrounding encryption is what stops forgery; used bare it is an
    integrity check only."""
    return hashlib.sha256(data).digest()[:MAC_SIZE]


@dataclass
class Frame:
    dst: int
    src: int
    seq: int
    flags: int = 0
    payload: bytes = b""

    def __post_init__(self):
        for name in ("dst", "src", "seq"):
            v = getattr(self, name)
            if not 0 <= v <= 0xFFFF:
                raise ValueError(f"{name} out of range: {v}")
        if not 0 <= self.flags <= 0xFF:
            raise ValueError("flags out of range")
        if len(self.payload) > MAX_PAYLOAD:
            raise ValueError(f"payload over {MAX_PAYLOAD} bytes")

    @property
    def wire_size(self) -> int:
        return HEADER_SIZE + len(self.payload)

    @property
    def more(self) -> bool:
        return bool(self.flags & FLAG_MORE)


def encode_frame(frame: Frame) -> bytes:
    header = (
        frame.dst.to_bytes(2, "big")
        + frame.src.to_bytes(2, "big")
        + frame.seq.to_bytes(2, "big")
        + bytes([frame.flags])
    )
    header += b"\x00" * (HEADER_SIZE - len(header))
    return header + frame.payload


def decode_frame(data: bytes) -> Frame:
    if len(data) < HEADER_SIZE:
        raise ValueError("short frame")
    if len(data) > MAX_FRAME:
        raise ValueError("frame over 127 bytes")
    if any(data[7:HEADER_SIZE]):
        raise ValueError("nonzero header padding")
    return Frame(
        dst=int.from_bytes(data[0:2], "big"),
        src=int.from_bytes(data[2:4], "big"),
        seq=int.from_bytes(data[4:6], "big"),
        flags=data[6],
        payload=data[HEADER_SIZE:],
    )


def encode_payload(sender: int, nonce: bytes, message: bytes) -> bytes:
    if not 0 <= sender <= 0xFFFF:
        raise ValueError("sender id out of range")
    if len(nonce) != NONCE_SIZE:
        raise ValueError("nonce must be 2 bytes")
    if len(message) > MAX_MESSAGE:
        raise ValueError(f"message over {MAX_MESSAGE} bytes")
    body = sender.to_bytes(2, "big") + nonce + message
    return body + truncated_mac(body)


def decode_payload(data: bytes) -> tuple[int, bytes, bytes]:
    """Returns (sender, nonce, message); raises Reject on a bad mac."""
    if len(data) < 2 + NONCE_SIZE + MAC_SIZE or len(data) > MAX_PAYLOAD:
        raise ValueError("payload size out of range")
    body, mac = data[:-MAC_SIZE], data[-MAC_SIZE:]
    if truncated_mac(body) != mac:
        raise Reject("mac_mismatch")
    sender = int.from_bytes(body[0:2], "big")
    return sender, body[2 : 2 + NONCE_SIZE], body[2 + NONCE_SIZE :]


def fragment(dst: int, src: int, blob: bytes, first_seq: int = 0) -> list[Frame]:
    """Split a blob into frames of at most 106 payload bytes.

    An empty blob still produces one (empty) frame so that keepalives
    and zero-length records are representable.
    """
    chunks = [blob[i : i + MAX_PAYLOAD] for i in range(0, len(blob), MAX_PAYLOAD)]
    if not chunks:
        chunks = [b""]
    frames = []
    for i, chunk in enumerate(chunks):
        flags = FLAG_MORE if i < len(chunks) - 1 else 0
        frames.append(
            Frame(dst=dst, src=src, seq=(first_seq + i) & 0xFFFF, flags=flags, payload=chunk)
        )
    return frames


def reassemble(frames: list[Frame]) -> bytes:
    """Inverse of fragment; raises ValueError on gaps or disorder."""
    if not frames:
        raise ValueError("no fragments")
    src, dst = frames[0].src, frames[0].dst
    for i, f in enumerate(frames):
        if (f.src, f.dst) != (src, dst):
            raise ValueError("mixed fragment streams")
        if f.seq != (frames[0].seq + i) & 0xFFFF:
            raise ValueError("missing fragment")
        want_more = i < len(frames) - 1
        if f.more != want_more:
            raise ValueError("fragment chain broken")
        if want_more and len(f.payload) != MAX_PAYLOAD:
            raise ValueError("short non-final fragment")
    return b"".join(f.payload for f in frames)


def on_air_bytes(frames: list[Frame]) -> int:
    return sum(f.wire_size for f in frames)
