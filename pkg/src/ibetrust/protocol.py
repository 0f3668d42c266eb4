"""Node and base-station protocol layer.

Ties the lower modules together: identities are provisioned offline,
registered with their boot-time trust value, authenticated in the field
through an IBE-encrypted trust report, and only then admitted to the
distributed trust list that gates pairwise key exchange.

Lifecycle phases for a node:

    dp -> pdp -> dy -> ta -> trusted
                  ^            |
                  +--- reboot -+      (boot failure -> halted,
                                       removal by the BS -> terminated)

Energy is billed on the node side only; the base station is treated as
mains powered.  Receive energy is charged for messages that were fully
received, transmit energy at the moment frames are produced.
"""

from __future__ import annotations

import hmac
import hashlib
from dataclasses import dataclass, field

from . import ake as ake_mod
from . import codec
from . import ibe
from .boot import NORMAL, SECURE, BootChain, BootResult, WorldState, boot
from .energy import DEFAULT_CONSTANTS, EnergyConstants, EnergyLedger
from .errors import Reject

# Node lifecycle phases.
DP = "dp"                 # provisioned, keys installed
PDP = "pdp"               # registered with the base station
DY = "dy"                 # deployed and booted, holding a fresh trust value
TA = "ta"                 # trust report sent, awaiting the ack
TRUSTED = "trusted"       # ack processed, trust list installed
HALTED = "halted"         # boot integrity failure
TERMINATED = "terminated" # removed by the base station

# Trust database statuses.
ST_REGISTERED = "registered"
ST_TRUSTED = "trusted"
ST_TERMINATED = "terminated"

BS_IDENTITY = "bs"
BS_WIRE_ID = 0

TA_RECORD_SIZE = 2 + 8 + 2 + 4  # sender id, trust value, nonce, mac


class Registry:
    """Bidirectional map between string identities and 2-byte wire ids.

    The base station owns the registry; nodes receive a reference to it
    during provisioning, standing in for the identity directory that is
    installed together with the key material.
    """

    def __init__(self):
        self._by_name: dict[str, int] = {BS_IDENTITY: BS_WIRE_ID}
        self._by_wire: dict[int, str] = {BS_WIRE_ID: BS_IDENTITY}

    def assign(self, identity: str) -> int:
        if identity in self._by_name:
            raise ValueError(f"identity already registered: {identity!r}")
        wire = len(self._by_wire)
        if wire > 0xFFFF:
            raise ValueError("registry full")
        self._by_name[identity] = wire
        self._by_wire[wire] = identity
        return wire

    def wire_id(self, identity: str) -> int:
        return self._by_name[identity]

    def identity(self, wire: int) -> str:
        return self._by_wire[wire]

    def __contains__(self, key) -> bool:
        table = self._by_wire if isinstance(key, int) else self._by_name
        return key in table

    def __len__(self) -> int:
        return len(self._by_name)


# ---------------------------------------------------------------------------
# Wire records carried inside IBE ciphertexts


def encode_ta_record(wire_id: int, trust_value: str, nonce: bytes) -> bytes:
    """Trust report plaintext: id(2) | trust value(8 hex chars) | nonce(2) | mac(4)."""
    if not 0 <= wire_id <= 0xFFFF:
        raise ValueError("wire id out of range")
    value = trust_value.encode("ascii")
    if len(value) != 8 or any(c not in b"0123456789abcdef" for c in value):
        raise ValueError("trust value must be 8 lowercase hex characters")
    if len(nonce) != 2:
        raise ValueError("nonce must be 2 bytes")
    body = wire_id.to_bytes(2, "big") + value + nonce
    return body + codec.truncated_mac(body)


def decode_ta_record(data: bytes) -> tuple[int, str, bytes]:
    if len(data) != TA_RECORD_SIZE:
        raise Reject("malformed_record", f"{len(data)} bytes, expected {TA_RECORD_SIZE}")
    body, mac = data[:-4], data[-4:]
    if not hmac.compare_digest(mac, codec.truncated_mac(body)):
        raise Reject("mac_mismatch", "trust record mac")
    wire = int.from_bytes(body[0:2], "big")
    return wire, body[2:10].decode("ascii"), body[10:12]


def trust_list_bytes(wire_ids) -> bytes:
    """Serialize a trusted set as sorted 2-byte ids (2 bytes per node)."""
    out = bytearray()
    for wire in sorted(set(wire_ids)):
        if not 0 <= wire <= 0xFFFF:
            raise ValueError("wire id out of range")
        out += wire.to_bytes(2, "big")
    return bytes(out)


def encode_ack_record(nonce: bytes, wire_ids) -> bytes:
    """Ack plaintext: nonce echo(2) | trust list(2 per id) | mac(4)."""
    if len(nonce) != 2:
        raise ValueError("nonce must be 2 bytes")
    body = nonce + trust_list_bytes(wire_ids)
    return body + codec.truncated_mac(body)


def decode_ack_record(data: bytes) -> tuple[bytes, tuple[int, ...]]:
    if len(data) < 6 or (len(data) - 6) % 2:
        raise Reject("malformed_record", f"ack record length {len(data)}")
    body, mac = data[:-4], data[-4:]
    if not hmac.compare_digest(mac, codec.truncated_mac(body)):
        raise Reject("mac_mismatch", "ack record mac")
    ids = tuple(
        int.from_bytes(body[i : i + 2], "big") for i in range(2, len(body), 2)
    )
    return body[0:2], ids


# ---------------------------------------------------------------------------
# Multi-block IBE message encryption

_LEN_BYTES = 2


def encrypt_message(params: ibe.PublicParams, identity: str, message: bytes, rng) -> bytes:
    """Encrypt an arbitrary-length message as a chain of IBE blocks.

    Layout: block count(2) then per block U | V | w-length(2) | W, where
    U is a fixed-width point and V has the block size of the profile.
    Each block carries an independent seed, so identical chunks encrypt
    differently.
    """
    block = params.block_bytes
    chunks = [message[i : i + block] for i in range(0, len(message), block)] or [b""]
    if len(chunks) > 0xFFFF:
        raise ValueError("message too long")
    out = bytearray(len(chunks).to_bytes(2, "big"))
    for chunk in chunks:
        ct = ibe.encrypt(params, identity, chunk, rng=rng)
        out += ibe.point_to_bytes(params, ct.u)
        out += ct.v
        out += len(ct.w).to_bytes(2, "big")
        out += ct.w
    return bytes(out)


def decrypt_message(params: ibe.PublicParams, key: ibe.PrivateKey, blob: bytes) -> bytes:
    """Inverse of encrypt_message; any malformed or tampered block rejects."""
    cs = params.curve.coord_size
    block = params.block_bytes
    if len(blob) < 2:
        raise Reject("malformed_ciphertext", "missing block count")
    nblocks = int.from_bytes(blob[0:2], "big")
    if nblocks == 0:
        raise Reject("malformed_ciphertext", "zero blocks")
    pos = 2
    out = bytearray()
    for _ in range(nblocks):
        need = 2 * cs + block + _LEN_BYTES
        if len(blob) - pos < need:
            raise Reject("malformed_ciphertext", "truncated block")
        x = int.from_bytes(blob[pos : pos + cs], "big")
        y = int.from_bytes(blob[pos + cs : pos + 2 * cs], "big")
        pos += 2 * cs
        v = blob[pos : pos + block]
        pos += block
        wlen = int.from_bytes(blob[pos : pos + _LEN_BYTES], "big")
        pos += _LEN_BYTES
        if wlen > block or len(blob) - pos < wlen:
            raise Reject("malformed_ciphertext", "bad chunk length")
        w = blob[pos : pos + wlen]
        pos += wlen
        out += ibe.decrypt(params, key, ibe.Ciphertext((x, y), v, w))
    if pos != len(blob):
        raise Reject("malformed_ciphertext", "trailing bytes")
    return bytes(out)


# ---------------------------------------------------------------------------
# AKE message framing


def ake_message_to_bytes(registry: Registry, params: ibe.PublicParams,
                         msg: ake_mod.AkeMessage) -> bytes:
    return (
        registry.wire_id(msg.sender).to_bytes(2, "big")
        + registry.wire_id(msg.receiver).to_bytes(2, "big")
        + ibe.point_to_bytes(params, msg.big_r)
        + msg.nonce
        + msg.mac
    )


def ake_message_from_bytes(registry: Registry, params: ibe.PublicParams,
                           data: bytes) -> ake_mod.AkeMessage:
    cs = params.curve.coord_size
    if len(data) != 2 + 2 + 2 * cs + 2 + 4:
        raise ValueError(f"ake message length {len(data)}")
    sender_wire = int.from_bytes(data[0:2], "big")
    receiver_wire = int.from_bytes(data[2:4], "big")
    if sender_wire not in registry or receiver_wire not in registry:
        raise ValueError("unknown wire id in ake message")
    x = int.from_bytes(data[4 : 4 + cs], "big")
    y = int.from_bytes(data[4 + cs : 4 + 2 * cs], "big")
    return ake_mod.AkeMessage(
        sender=registry.identity(sender_wire),
        receiver=registry.identity(receiver_wire),
        big_r=(x, y),
        nonce=data[4 + 2 * cs : 6 + 2 * cs],
        mac=data[6 + 2 * cs : 10 + 2 * cs],
    )


# ---------------------------------------------------------------------------
# Trust database


@dataclass
class TrustRecord:
    identity: str
    wire_id: int
    trust_value: str
    status: str = ST_REGISTERED
    seen_nonces: set = field(default_factory=set)
    last_nonce: bytes | None = None


class TrustDB:
    def __init__(self):
        self.records: dict[str, TrustRecord] = {}

    def __contains__(self, identity: str) -> bool:
        return identity in self.records

    def get(self, identity: str) -> TrustRecord:
        return self.records[identity]

    def register(self, identity: str, wire_id: int, trust_value: str):
        """Store or refresh a registration; replay history survives re-flash."""
        existing = self.records.get(identity)
        if existing is None:
            self.records[identity] = TrustRecord(identity, wire_id, trust_value)
        else:
            existing.trust_value = trust_value
            existing.status = ST_REGISTERED

    def trusted_identities(self) -> tuple[str, ...]:
        return tuple(sorted(
            r.identity for r in self.records.values() if r.status == ST_TRUSTED
        ))

    def trusted_wire_ids(self) -> tuple[int, ...]:
        return tuple(sorted(
            r.wire_id for r in self.records.values() if r.status == ST_TRUSTED
        ))


# ---------------------------------------------------------------------------
# Node


class Node:
    """Battery-powered sensor node state machine."""

    def __init__(self, identity: str, wire_id: int, params: ibe.PublicParams,
                 key: ibe.PrivateKey, registry: Registry,
                 constants: EnergyConstants = DEFAULT_CONSTANTS):
        self.identity = identity
        self.wire_id = wire_id
        self.params = params
        self.registry = registry
        self.constants = constants
        self.ledger = EnergyLedger(identity)
        self.phase = DP
        self.chain: BootChain | None = None
        self.trust_value: str | None = None      # fresh value from the last boot
        self.registered_value: str | None = None # what the BS has on file
        self.trust_list: tuple[str, ...] = ()
        self.pending_nonce: bytes | None = None
        self.sessions: dict[str, ake_mod.SessionKey] = {}
        self.ake_nonces: dict[str, set] = {}
        self.rejections: list[tuple[str, str]] = []
        self.next_seq = 0
        self.now = 0.0
        self._billing = False
        self._private_key = key
        self.world = WorldState(mode=SECURE, on_switch=self._bill_switch)
        self.world.put("ibe_private_key", key)
        self.world.switch(NORMAL)
        self._billing = True

    def _bill_switch(self):
        if self._billing:
            self.ledger.add(self.now, "switch", self.constants.e_switch)

    def bill_tx(self, frames, note: str):
        n = codec.on_air_bytes(frames)
        self.ledger.add(self.now, "tx", n * self.constants.tx_j_per_byte, note, n)

    def bill_rx(self, nbytes: int, note: str):
        if nbytes:
            self.ledger.add(self.now, "rx", nbytes * self.constants.rx_j_per_byte,
                            note, nbytes)

    def send(self, dst_wire: int, blob: bytes) -> list[codec.Frame]:
        frames = codec.fragment(dst_wire, self.wire_id, blob, first_seq=self.next_seq)
        self.next_seq = (self.next_seq + len(frames)) & 0xFFFF
        return frames

    def power_on(self, time: float = 0.0, billed: bool = True) -> BootResult:
        """Boot through the chain of trust.

        A successful boot lands in the deployed phase with a fresh trust
        value; any prior trusted state (trust list, session keys) is
        lost, so the node must re-authenticate.  A failed measurement
        halts the node.
        """
        if self.chain is None:
            raise ValueError("no boot chain installed")
        self.now = time
        result = boot(self.chain)
        if billed:
            self.ledger.add(time, "boot", self.constants.e_boot, note="dy-boot")
        self.trust_list = ()
        self.sessions.clear()
        self.pending_nonce = None
        if result.ok:
            self.trust_value = result.trust_value
            self.phase = DY
        else:
            self.trust_value = None
            self.phase = HALTED
        return result

    def log_reject(self, reason: str, detail: str = ""):
        self.rejections.append((reason, detail))


# ---------------------------------------------------------------------------
# Base station


class BaseStation:
    """Trusted authority: key generator, trust database, list distributor."""

    identity = BS_IDENTITY
    wire_id = BS_WIRE_ID

    def __init__(self, params: ibe.PublicParams, master: ibe.MasterKey):
        self.params = params
        self.master = master
        self.key = ibe.extract(params, master, BS_IDENTITY)
        self.registry = Registry()
        self.db = TrustDB()
        self.roster: list[str] = []
        self.rejections: list[tuple[str, str]] = []
        self.warnings: list[str] = []
        self.next_seq = 0
        # Disabled only by the harness mutation test, to show the replay
        # defence is load-bearing.
        self.nonce_check = True

    def send(self, dst_wire: int, blob: bytes) -> list[codec.Frame]:
        frames = codec.fragment(dst_wire, BS_WIRE_ID, blob, first_seq=self.next_seq)
        self.next_seq = (self.next_seq + len(frames)) & 0xFFFF
        return frames

    def log_reject(self, reason: str, detail: str = ""):
        self.rejections.append((reason, detail))


# ---------------------------------------------------------------------------
# Lifecycle operations


def dp_provision(bs: BaseStation, identity: str,
                 constants: EnergyConstants = DEFAULT_CONSTANTS) -> Node:
    """Offline delivery: extract the node's key and install it.

    No frames travel and no energy is billed; the node leaves the
    factory holding its identity, private key, public parameters and the
    identity directory.
    """
    wire = bs.registry.assign(identity)
    key = ibe.extract(bs.params, bs.master, identity)
    bs.roster.append(identity)
    return Node(identity, wire, bs.params, key, bs.registry, constants)


def pdp_register(bs: BaseStation, node: Node) -> None:
    """Controlled-environment boot plus secure out-of-band registration."""
    if node.phase not in (DP, PDP):
        raise ValueError(f"cannot register from phase {node.phase!r}")
    if node.chain is None:
        raise ValueError("no boot chain installed")
    result = boot(node.chain)  # controlled boot, not billed
    if not result.ok:
        node.phase = HALTED
        raise Reject("boot_failure", f"level {result.failed_level}")
    bs.db.register(node.identity, node.wire_id, result.trust_value)
    node.registered_value = result.trust_value
    node.trust_value = result.trust_value
    node.phase = PDP


def ta_request(node: Node, rng, time: float = 0.0) -> list[codec.Frame]:
    """Build the encrypted trust report for the base station.

    The record is assembled and encrypted inside the secure world (two
    switches billed), then fragmented.  Billing: one block encryption
    plus transmit energy for the on-air bytes.
    """
    node.now = time
    if node.phase != DY:
        raise Reject("not_ready", f"phase {node.phase!r}")
    if node.trust_value is None:
        raise Reject("not_ready", "no trust value")
    nonce = rng.randbytes(2)
    node.pending_nonce = nonce
    record = encode_ta_record(node.wire_id, node.trust_value, nonce)
    node.world.switch(SECURE)
    blob = encrypt_message(node.params, BS_IDENTITY, record, rng)
    node.world.switch(NORMAL)
    bits = len(record) * 8
    node.ledger.add(time, "encrypt", bits * node.constants.enc_j_per_bit,
                    note="ta", quantity=bits)
    frames = node.send(BS_WIRE_ID, blob)
    node.bill_tx(frames, "ta-request")
    node.phase = TA
    return frames


def bs_handle_ta(bs: BaseStation, frames, rng) -> list[codec.Frame]:
    """Verify a trust report; admit the node and answer with the list.

    Every failure raises Reject with a distinct reason and is logged:
    decrypt_failure, mac_mismatch, unknown_id, trust_mismatch,
    nonce_replay (plus malformed_record for impossible-by-construction
    plaintexts).  A terminated node that reports a matching trust value
    is re-admitted, covering the reboot-and-re-authenticate path.
    """
    try:
        try:
            blob = codec.reassemble(frames)
        except ValueError as exc:
            raise Reject("decrypt_failure", f"reassembly: {exc}") from exc
        try:
            record = decrypt_message(bs.params, bs.key, blob)
        except Reject as exc:
            raise Reject("decrypt_failure", exc.reason) from exc
        wire, claimed, nonce = decode_ta_record(record)
        if wire not in bs.registry or bs.registry.identity(wire) not in bs.db:
            raise Reject("unknown_id", f"wire id {wire}")
        rec = bs.db.get(bs.registry.identity(wire))
        if claimed != rec.trust_value:
            raise Reject("trust_mismatch", rec.identity)
        if bs.nonce_check and nonce in rec.seen_nonces:
            raise Reject("nonce_replay", rec.identity)
    except Reject as exc:
        bs.log_reject(exc.reason, exc.detail)
        raise
    rec.seen_nonces.add(nonce)
    rec.last_nonce = nonce
    rec.status = ST_TRUSTED
    ack = encode_ack_record(nonce, bs.db.trusted_wire_ids())
    blob = encrypt_message(bs.params, rec.identity, ack, rng)
    return bs.send(rec.wire_id, blob)


def node_handle_ack(node: Node, frames, time: float = 0.0) -> None:
    """Decrypt the ack, check the nonce echo, install the trust list."""
    node.now = time
    node.bill_rx(codec.on_air_bytes(frames), "ta-ack")
    try:
        if node.phase != TA or node.pending_nonce is None:
            raise Reject("not_waiting", f"phase {node.phase!r}")
        try:
            blob = codec.reassemble(frames)
        except ValueError as exc:
            raise Reject("decrypt_failure", f"reassembly: {exc}") from exc
        node.world.switch(SECURE)
        try:
            record = decrypt_message(node.params, node.world.access("ibe_private_key"),
                                     blob)
        except Reject as exc:
            raise Reject("decrypt_failure", exc.reason) from exc
        finally:
            node.world.switch(NORMAL)
        nonce, wire_ids = decode_ack_record(record)
        if nonce != node.pending_nonce:
            raise Reject("stale_nonce", nonce.hex())
    except Reject as exc:
        node.log_reject(exc.reason, exc.detail)
        raise
    node.trust_list = tuple(sorted(
        node.registry.identity(w) for w in wire_ids if w in node.registry
    ))
    node.pending_nonce = None
    node.phase = TRUSTED


def bs_terminate(bs: BaseStation, identity: str) -> bool:
    """Remove a node from the trust list; unknown ids warn and no-op."""
    if identity not in bs.db:
        bs.warnings.append(f"terminate: unknown identity {identity!r}")
        return False
    bs.db.get(identity).status = ST_TERMINATED
    return True


def ake_initiate(node: Node, peer: str, rng,
                 time: float = 0.0) -> tuple[list[codec.Frame], ake_mod.SessionKey]:
    """One-pass key exchange, initiator side.

    The pairing the initiator needs depends only on its own key and the
    peer identity, so it is treated as precomputable and not billed;
    only transmit energy is.  Key agreement runs outside the secure
    world in this model, so no switch energy is charged either.
    """
    node.now = time
    if node.phase != TRUSTED:
        raise Reject("not_trusted", f"phase {node.phase!r}")
    if peer not in node.trust_list:
        raise Reject("not_in_trust_list", peer)
    msg, session = ake_mod.initiate(node.params, node.identity, node._private_key,
                                    peer, rng)
    frames = node.send(node.registry.wire_id(peer), ake_message_to_bytes(
        node.registry, node.params, msg))
    node.bill_tx(frames, "ake")
    node.sessions[peer] = session
    return frames, session


def peer_authenticate(node: Node, msg: ake_mod.AkeMessage, time: float = 0.0,
                      rx_bytes: int = 0) -> ake_mod.SessionKey:
    """Responder side of the key exchange behind the two-tier gate.

    Tier 1 consults the trust list before any curve arithmetic, so an
    unlisted sender costs zero pairing operations.  Tier 2 runs the
    actual key derivation; its online pairing is billed.  A repeated
    (sender, nonce) pair is rejected before tier 2.
    """
    node.now = time
    node.bill_rx(rx_bytes, "ake")
    try:
        if node.phase != TRUSTED:
            raise Reject("not_trusted", f"phase {node.phase!r}")
        if msg.sender not in node.trust_list:
            raise Reject("not_in_trust_list", msg.sender)
        seen = node.ake_nonces.setdefault(msg.sender, set())
        if (msg.nonce, msg.big_r) in seen:
            raise Reject("nonce_replay", msg.sender)
        session = ake_mod.respond(node.params, node._private_key, msg)
    except Reject as exc:
        node.log_reject(exc.reason, exc.detail)
        raise
    seen.add((msg.nonce, msg.big_r))
    node.ledger.add(time, "pairing", node.constants.e_pairing, note="ake")
    node.sessions[msg.sender] = session
    return session


def confirm_tag(session: ake_mod.SessionKey) -> bytes:
    """Key-confirmation tag for the harness probe (not part of the protocol)."""
    transcript = b"|".join(
        p.encode() if isinstance(p, str) else p for p in session.transcript
    )
    return hmac.new(session.key, b"ibetrust-confirm|" + transcript,
                    hashlib.sha256).digest()[:8]
