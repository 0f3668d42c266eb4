"""Scenario-driven discrete-event simulator.

A scenario file declares a node roster, a channel, and a timestamped
event schedule (boots, trust reports, key exchanges, terminations and
attack injections).  The run is fully determined by the scenario plus a
seed: the virtual clock, every frame on the air, every accept/reject
decision and the final report reproduce byte for byte.

Frames cost one time unit each on the air; a multi-frame message is
delivered as a batch once its last frame lands.  An adversary tap sees
every transmission at send time, which is what replay and modification
attacks feed on.
"""

from __future__ import annotations

import heapq
import json
import random
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from . import ake as ake_mod
from . import codec, energy, ibe, protocol
from .boot import DEFAULT_TRUST_OFFSET, BootChain
from .errors import ConfigError, Reject

ATTACK_KINDS = ("replay", "modify", "fake_node", "impersonate")
LABELS = ("ta-request", "ta-ack", "ake")
BLOCKED = "blocked"
SUCCEEDED = "succeeded"
NO_OP = "no-op"


# ---------------------------------------------------------------------------
# Scenario loading


@dataclass
class NodeSpec:
    id: str
    images: list[str]
    tamper_level: int | None = None


@dataclass
class AttackSpec:
    kind: str
    label: str = ""
    source: str = ""
    occurrence: int = 1  # 1-based among the selected sender's captures
    bit: int = 0
    claimed_wire: int = 0
    claimed: str = ""
    target: str = ""


@dataclass
class Event:
    time: float
    kind: str
    node: str = ""
    initiator: str = ""
    peer: str = ""
    attack: AttackSpec | None = None


@dataclass
class Scenario:
    name: str
    profile: str
    seed: int
    master_seed: int
    trust_offset: int
    nodes: list[NodeSpec]
    loss: float
    adversary_taps: bool
    events: list[Event]


def _check_keys(problems, where, obj, allowed):
    for key in obj:
        if key not in allowed:
            problems.append(f"{where}: unknown key {key!r}")


def parse_scenario(text: str, name: str = "<memory>") -> Scenario:
    """Parse and validate scenario text, reporting every problem at once."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{name}: parse error at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc
    problems: list[str] = []
    if not isinstance(raw, dict):
        raise ConfigError(f"{name}: scenario must be an object")
    _check_keys(problems, name, raw,
                {"name", "profile", "seed", "bs", "nodes", "channel", "events"})

    profile = raw.get("profile")
    if profile not in ibe.PROFILES:
        problems.append(f"profile must be one of {sorted(ibe.PROFILES)}, got {profile!r}")
    seed = raw.get("seed", 0)
    if not isinstance(seed, int) or seed < 0:
        problems.append("seed must be a non-negative integer")
        seed = 0

    bs_cfg = raw.get("bs", {})
    master_seed, trust_offset = 0, DEFAULT_TRUST_OFFSET
    if not isinstance(bs_cfg, dict):
        problems.append("bs must be an object")
    else:
        _check_keys(problems, "bs", bs_cfg, {"master_seed", "trust_offset"})
        master_seed = bs_cfg.get("master_seed", 0)
        trust_offset = bs_cfg.get("trust_offset", DEFAULT_TRUST_OFFSET)
        if not isinstance(master_seed, int) or master_seed < 0:
            problems.append("bs.master_seed must be a non-negative integer")
            master_seed = 0
        if not isinstance(trust_offset, int) or not 0 <= trust_offset <= 56:
            problems.append("bs.trust_offset must be an integer in [0, 56]")
            trust_offset = DEFAULT_TRUST_OFFSET

    nodes: list[NodeSpec] = []
    ids: set[str] = set()
    raw_nodes = raw.get("nodes", [])
    if not isinstance(raw_nodes, list):
        problems.append("nodes must be a list")
        raw_nodes = []
    for i, entry in enumerate(raw_nodes):
        where = f"nodes[{i}]"
        if not isinstance(entry, dict):
            problems.append(f"{where}: must be an object")
            continue
        _check_keys(problems, where, entry, {"id", "images", "tamper_level"})
        nid = entry.get("id")
        if not isinstance(nid, str) or not nid:
            problems.append(f"{where}: id must be a non-empty string")
            continue
        if nid == protocol.BS_IDENTITY:
            problems.append(f"{where}: id {protocol.BS_IDENTITY!r} is reserved")
        if nid in ids:
            problems.append(f"{where}: duplicate id {nid!r}")
        ids.add(nid)
        images = entry.get("images")
        if (not isinstance(images, list) or not images
                or not all(isinstance(s, str) for s in images)):
            problems.append(f"{where}: images must be a non-empty list of strings")
            images = ["?"]
        tamper = entry.get("tamper_level")
        if tamper is not None and (
                not isinstance(tamper, int) or not 1 <= tamper <= len(images)):
            problems.append(f"{where}: tamper_level must be in [1, {len(images)}]")
            tamper = None
        nodes.append(NodeSpec(nid, list(images), tamper))

    loss, taps = 0.0, True
    channel = raw.get("channel", {})
    if not isinstance(channel, dict):
        problems.append("channel must be an object")
    else:
        _check_keys(problems, "channel", channel, {"loss", "adversary_taps"})
        loss = channel.get("loss", 0.0)
        taps = channel.get("adversary_taps", True)
        if not isinstance(loss, (int, float)) or not 0 <= loss <= 1:
            problems.append("channel.loss must be a number in [0, 1]")
            loss = 0.0
        if not isinstance(taps, bool):
            problems.append("channel.adversary_taps must be a boolean")
            taps = True

    events: list[Event] = []
    raw_events = raw.get("events", [])
    if not isinstance(raw_events, list):
        problems.append("events must be a list")
        raw_events = []
    last_time = None
    for i, entry in enumerate(raw_events):
        where = f"events[{i}]"
        if not isinstance(entry, dict):
            problems.append(f"{where}: must be an object")
            continue
        t = entry.get("time")
        if not isinstance(t, (int, float)) or t < 0:
            problems.append(f"{where}: time must be a non-negative number")
            t = 0.0
        if last_time is not None and t < last_time:
            problems.append(f"{where}: timestamps must be non-decreasing")
        last_time = max(t, last_time or 0)
        kind = entry.get("kind")

        def need_node(field_name):
            value = entry.get(field_name)
            if not isinstance(value, str) or value not in ids:
                problems.append(
                    f"{where}: {field_name} must reference a declared node, got {value!r}")
                return ""
            return value

        if kind in ("boot", "ta", "terminate"):
            _check_keys(problems, where, entry, {"time", "kind", "node"})
            events.append(Event(t, kind, node=need_node("node")))
        elif kind == "ake":
            _check_keys(problems, where, entry, {"time", "kind", "initiator", "peer"})
            a, b = need_node("initiator"), need_node("peer")
            if a and a == b:
                problems.append(f"{where}: initiator and peer must differ")
            events.append(Event(t, kind, initiator=a, peer=b))
        elif kind == "attack":
            _check_keys(problems, where, entry, {"time", "kind", "attack"})
            spec = entry.get("attack")
            if not isinstance(spec, dict):
                problems.append(f"{where}: attack must be an object")
                continue
            akind = spec.get("kind")
            if akind not in ATTACK_KINDS:
                problems.append(f"{where}: attack.kind must be one of {ATTACK_KINDS}")
                continue
            atk = AttackSpec(kind=akind)
            if akind in ("replay", "modify"):
                allowed = {"kind", "label", "source"}
                allowed |= {"occurrence"} if akind == "replay" else {"bit"}
                _check_keys(problems, where, spec, allowed)
                atk.label = spec.get("label", "")
                atk.source = spec.get("source", "")
                if atk.label not in LABELS:
                    problems.append(f"{where}: attack.label must be one of {LABELS}")
                if atk.source not in ids and atk.source != protocol.BS_IDENTITY:
                    problems.append(f"{where}: attack.source must be a declared node or "
                                    f"{protocol.BS_IDENTITY!r}")
                if akind == "replay":
                    atk.occurrence = spec.get("occurrence", 1)
                    if not isinstance(atk.occurrence, int) or atk.occurrence < 1:
                        problems.append(f"{where}: attack.occurrence must be >= 1")
                else:
                    atk.bit = spec.get("bit", 0)
                    if not isinstance(atk.bit, int) or atk.bit < 0:
                        problems.append(f"{where}: attack.bit must be >= 0")
            elif akind == "fake_node":
                _check_keys(problems, where, spec, {"kind", "claimed_wire"})
                atk.claimed_wire = spec.get("claimed_wire", 0xFFFF)
                if not isinstance(atk.claimed_wire, int) or not 1 <= atk.claimed_wire <= 0xFFFF:
                    problems.append(f"{where}: attack.claimed_wire must be in [1, 65535]")
            else:  # impersonate
                _check_keys(problems, where, spec, {"kind", "claimed", "target"})
                atk.claimed = spec.get("claimed", "")
                atk.target = spec.get("target", "")
                if atk.claimed not in ids:
                    problems.append(f"{where}: attack.claimed must be a declared node")
                if atk.target not in ids:
                    problems.append(f"{where}: attack.target must be a declared node")
                if atk.claimed and atk.claimed == atk.target:
                    problems.append(f"{where}: attack.claimed and target must differ")
            events.append(Event(t, "attack", attack=atk))
        else:
            problems.append(f"{where}: unknown event kind {kind!r}")

    if problems:
        raise ConfigError(f"{name}: " + "; ".join(problems))
    return Scenario(
        name=raw.get("name", name),
        profile=profile,
        seed=seed,
        master_seed=master_seed,
        trust_offset=trust_offset,
        nodes=nodes,
        loss=float(loss),
        adversary_taps=taps,
        events=events,
    )


def bundled_scenarios() -> list[str]:
    root = resources.files("ibetrust.scenarios")
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_scenario(source: str) -> Scenario:
    """Load a scenario from a file path or a bundled scenario name."""
    path = Path(source)
    if path.exists():
        return parse_scenario(path.read_text(), name=path.name)
    stem = source[:-5] if source.endswith(".json") else source
    res = resources.files("ibetrust.scenarios").joinpath(stem + ".json")
    if res.is_file():
        return parse_scenario(res.read_text(), name=stem)
    raise ConfigError(
        f"scenario {source!r} is neither a file nor a bundled name "
        f"(bundled: {', '.join(bundled_scenarios())})")


# ---------------------------------------------------------------------------
# Channel and attacks


@dataclass
class Attack:
    spec: AttackSpec
    time: float
    verdict: str = "pending"
    detail: str = ""


@dataclass
class Transmission:
    time: float
    origin: str           # entity that put the frames on the air
    label: str
    frames: list
    attack: Attack | None = None

    @property
    def dst_wire(self) -> int:
        return self.frames[0].dst

    @property
    def src_wire(self) -> int:
        return self.frames[0].src

    def on_air(self) -> int:
        return codec.on_air_bytes(self.frames)


class SimReportLog:
    """Ordered, timestamped run log shared by the simulation pieces."""

    def __init__(self):
        self.lines: list[str] = []

    def add(self, time: float, text: str):
        self.lines.append(f"[{time:g}] {text}")


# ---------------------------------------------------------------------------
# Report


@dataclass
class SimReport:
    scenario: str
    profile: str
    seed: int
    final_phases: dict[str, str]
    trust_snapshots: list[tuple[float, tuple[str, ...]]]
    rejections: list[tuple[float, str, str, str]]
    attacks: list[dict]
    event_log: list[str]
    energy_report: energy.EnergyReport

    def rejection_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for _, _, reason, _ in self.rejections:
            counts[reason] = counts.get(reason, 0) + 1
        return dict(sorted(counts.items()))

    def attack_verdicts(self) -> dict[str, str]:
        return {f"{a['kind']}#{i}": a["verdict"] for i, a in enumerate(self.attacks)}

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "profile": self.profile,
            "seed": self.seed,
            "final_phases": dict(sorted(self.final_phases.items())),
            "trust_snapshots": [[t, list(ids)] for t, ids in self.trust_snapshots],
            "rejections": [list(r) for r in self.rejections],
            "rejection_counts": self.rejection_counts(),
            "attacks": self.attacks,
            "event_log": self.event_log,
            "energy_text": energy.render_text(self.energy_report),
            "energy_csv": energy.render_csv(self.energy_report),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def render_text(self) -> str:
        return render_report_dict(self.to_dict())


def render_report_dict(d: dict) -> str:
    """Shared renderer for live reports and saved report files."""
    out = [f"simulation report: {d['scenario']} (profile={d['profile']}, seed={d['seed']})", ""]
    out.append("final node phases")
    for name, phase in d["final_phases"].items():
        out.append(f"  {name:<12} {phase}")
    out.append("")
    out.append("trust list snapshots")
    if not d["trust_snapshots"]:
        out.append("  (none)")
    for t, ids in d["trust_snapshots"]:
        out.append(f"  [{t:g}] {', '.join(ids) if ids else '(empty)'}")
    out.append("")
    out.append("rejection log")
    if not d["rejections"]:
        out.append("  (none)")
    for t, actor, reason, detail in d["rejections"]:
        suffix = f" ({detail})" if detail else ""
        out.append(f"  [{t:g}] {actor}: {reason}{suffix}")
    if d["rejection_counts"]:
        pairs = ", ".join(f"{k}={v}" for k, v in d["rejection_counts"].items())
        out.append(f"  counts: {pairs}")
    out.append("")
    out.append("attack verdicts")
    if not d["attacks"]:
        out.append("  (none)")
    for i, a in enumerate(d["attacks"]):
        suffix = f" ({a['detail']})" if a.get("detail") else ""
        out.append(f"  {a['kind']}#{i}: {a['verdict']}{suffix}")
    out.append("")
    out.append("event log")
    for line in d["event_log"]:
        out.append(f"  {line}")
    out.append("")
    out.append(d["energy_text"])
    return "\n".join(out)


# ---------------------------------------------------------------------------
# Simulation core


class Simulation:
    def __init__(self, scenario: Scenario, seed: int | None = None,
                 constants: energy.EnergyConstants = energy.DEFAULT_CONSTANTS,
                 nonce_check: bool = True,
                 keys: tuple[ibe.PublicParams, ibe.MasterKey] | None = None):
        self.scenario = scenario
        self.seed = scenario.seed if seed is None else seed
        self.constants = constants
        master_rng = random.Random(self.seed)
        self.rng_proto = random.Random(master_rng.getrandbits(64))
        self.rng_channel = random.Random(master_rng.getrandbits(64))
        self.rng_adversary = random.Random(master_rng.getrandbits(64))

        if keys is None:
            config = ibe.SecurityConfig.from_profile(
                scenario.profile, seed=scenario.master_seed)
            params, master = ibe.setup(config)
        else:
            params, master = keys
        self.bs = protocol.BaseStation(params, master)
        self.bs.nonce_check = nonce_check
        self.params = params

        self.log = SimReportLog()
        self.queue: list = []
        self._seq = 0
        self.captures: list[Transmission] = []
        self.pending_mods: list[Attack] = []
        self.attacks: list[Attack] = []
        self.trust_snapshots: list[tuple[float, tuple[str, ...]]] = []
        self.rejections: list[tuple[float, str, str, str]] = []

        self.nodes: dict[str, protocol.Node] = {}
        for spec in scenario.nodes:
            node = protocol.dp_provision(self.bs, spec.id, constants)
            node.chain = BootChain.from_images(
                [s.encode() for s in spec.images], trust_offset=scenario.trust_offset)
            protocol.pdp_register(self.bs, node)
            if spec.tamper_level is not None:
                image = node.chain.images[spec.tamper_level - 1]
                image.data += b"\x00tampered"
                self.log.add(0, f"{spec.id} image at level {spec.tamper_level} "
                                "tampered in the field")
            self.nodes[spec.id] = node
        self.by_wire = {n.wire_id: n for n in self.nodes.values()}

    # -- plumbing

    def push(self, time: float, action, payload):
        heapq.heappush(self.queue, (time, self._seq, action, payload))
        self._seq += 1

    def reject(self, time: float, actor: str, exc: Reject):
        self.rejections.append((time, actor, exc.reason, exc.detail))
        self.log.add(time, f"{actor} reject: {exc.reason}"
                           + (f" ({exc.detail})" if exc.detail else ""))

    def entity_name(self, wire: int) -> str:
        if wire == protocol.BS_WIRE_ID:
            return protocol.BS_IDENTITY
        node = self.by_wire.get(wire)
        return node.identity if node else f"wire:{wire}"

    def snapshot(self, time: float):
        ids = self.bs.db.trusted_identities()
        self.trust_snapshots.append((time, ids))
        self.log.add(time, f"trust list now [{', '.join(ids)}]")

    # -- channel

    def transmit(self, time: float, tx: Transmission):
        if self.scenario.adversary_taps:
            self.captures.append(tx)
        for attack in list(self.pending_mods):
            if (attack.spec.label == tx.label
                    and attack.spec.source == tx.origin and tx.attack is None):
                self.pending_mods.remove(attack)
                tx = self._apply_modification(time, tx, attack)
                break
        kept = [f for f in tx.frames if self.rng_channel.random() >= self.scenario.loss]
        lost = len(tx.frames) - len(kept)
        note = f" (attack {tx.attack.spec.kind})" if tx.attack else ""
        self.log.add(time, f"{tx.origin} -> {self.entity_name(tx.dst_wire)} "
                           f"{tx.label} {tx.on_air()}B in {len(tx.frames)} frame(s)"
                           + (f", {lost} lost" if lost else "") + note)
        arrival = time + len(tx.frames)
        self.push(arrival, "deliver",
                  Transmission(tx.time, tx.origin, tx.label, kept, tx.attack))

    def _apply_modification(self, time: float, tx: Transmission,
                            attack: Attack) -> Transmission:
        blob = b"".join(f.payload for f in tx.frames)
        if not blob:
            attack.verdict = NO_OP
            attack.detail = "matched an empty transmission"
            return tx
        bit = attack.spec.bit % (len(blob) * 8)
        flipped = bytearray(blob)
        flipped[bit // 8] ^= 1 << (bit % 8)
        frames, pos = [], 0
        for f in tx.frames:
            piece = bytes(flipped[pos : pos + len(f.payload)])
            pos += len(f.payload)
            frames.append(codec.Frame(f.dst, f.src, f.seq, f.flags, piece))
        self.log.add(time, f"attack modify flips bit {bit} of {tx.label} "
                           f"from {tx.origin}")
        return Transmission(tx.time, tx.origin, tx.label, frames, attack)

    def resolve(self, attack: Attack | None, verdict: str, detail: str):
        if attack is not None and attack.verdict == "pending":
            attack.verdict = verdict
            attack.detail = detail

    # -- deliveries

    def deliver(self, time: float, tx: Transmission):
        if not tx.frames:
            self.log.add(time, f"all frames of {tx.label} from {tx.origin} lost")
            self.resolve(tx.attack, NO_OP, "all frames lost")
            return
        if tx.dst_wire == protocol.BS_WIRE_ID:
            self._deliver_to_bs(time, tx)
        else:
            node = self.by_wire.get(tx.dst_wire)
            if node is None:
                self.log.add(time, f"{tx.label} addressed to unknown wire {tx.dst_wire}")
                self.resolve(tx.attack, NO_OP, "unknown destination")
            elif tx.label == "ta-ack":
                self._deliver_ack(time, node, tx)
            else:
                self._deliver_ake(time, node, tx)

    def _deliver_to_bs(self, time: float, tx: Transmission):
        try:
            ack = protocol.bs_handle_ta(self.bs, tx.frames, self.rng_proto)
        except Reject as exc:
            self.reject(time, protocol.BS_IDENTITY, exc)
            self.resolve(tx.attack, BLOCKED, exc.reason)
            return
        sender = self.entity_name(tx.src_wire)
        self.log.add(time, f"bs accepted trust report from {sender}")
        self.snapshot(time)
        self.resolve(tx.attack, SUCCEEDED, "trust report accepted")
        self.transmit(time, Transmission(time, protocol.BS_IDENTITY, "ta-ack", ack))

    def _deliver_ack(self, time: float, node: protocol.Node, tx: Transmission):
        try:
            protocol.node_handle_ack(node, tx.frames, time=time)
        except Reject as exc:
            self.reject(time, node.identity, exc)
            self.resolve(tx.attack, BLOCKED, exc.reason)
            return
        self.log.add(time, f"{node.identity} trusted; list "
                           f"[{', '.join(node.trust_list)}]")
        self.resolve(tx.attack, SUCCEEDED, "ack accepted")

    def _deliver_ake(self, time: float, node: protocol.Node, tx: Transmission):
        blob = b"".join(f.payload for f in tx.frames)
        try:
            msg = protocol.ake_message_from_bytes(self.bs.registry, self.params, blob)
        except ValueError as exc:
            self.reject(time, node.identity, Reject("malformed_message", str(exc)))
            self.resolve(tx.attack, BLOCKED, "malformed_message")
            return
        previous = node.sessions.get(msg.sender)
        try:
            session = protocol.peer_authenticate(
                node, msg, time=time, rx_bytes=tx.on_air())
        except Reject as exc:
            self.reject(time, node.identity, exc)
            self.resolve(tx.attack, BLOCKED, exc.reason)
            return
        # Key-confirmation probe: harness-only check that the claimed
        # initiator can actually use the key it should have derived.
        initiator = self.nodes.get(tx.origin)
        peer_session = initiator.sessions.get(node.identity) if initiator else None
        if (tx.origin == msg.sender and peer_session is not None
                and protocol.confirm_tag(peer_session) == protocol.confirm_tag(session)):
            self.log.add(time, f"session {msg.sender} <-> {node.identity} established")
            self.resolve(tx.attack, SUCCEEDED, "session established")
        else:
            # drop the unconfirmed key, keeping any confirmed session it displaced
            if previous is None:
                node.sessions.pop(msg.sender, None)
            else:
                node.sessions[msg.sender] = previous
            exc = Reject("key_confirm_failed", msg.sender)
            self.reject(time, node.identity, exc)
            self.resolve(tx.attack, BLOCKED, exc.reason)

    # -- scheduled scenario events

    def handle_event(self, event: Event):
        t = event.time
        if event.kind == "boot":
            node = self.nodes[event.node]
            result = node.power_on(time=t)
            outcome = (f"deployed (trust {node.trust_value})" if result.ok
                       else f"halted at level {result.failed_level}")
            self.log.add(t, f"{event.node} boots: {outcome}")
        elif event.kind == "ta":
            node = self.nodes[event.node]
            try:
                frames = protocol.ta_request(node, self.rng_proto, time=t)
            except Reject as exc:
                self.reject(t, event.node, exc)
                return
            self.transmit(t, Transmission(t, event.node, "ta-request", frames))
        elif event.kind == "ake":
            node = self.nodes[event.initiator]
            try:
                frames, _ = protocol.ake_initiate(node, event.peer, self.rng_proto,
                                                  time=t)
            except Reject as exc:
                self.reject(t, event.initiator, exc)
                return
            self.transmit(t, Transmission(t, event.initiator, "ake", frames))
        elif event.kind == "terminate":
            if protocol.bs_terminate(self.bs, event.node):
                self.nodes[event.node].phase = protocol.TERMINATED
                self.log.add(t, f"bs terminates {event.node}")
                self.snapshot(t)
            else:
                self.log.add(t, f"bs terminate: unknown id {event.node}")
        else:
            self.inject(Attack(event.attack, t))

    # -- attack injection

    def inject(self, attack: Attack):
        self.attacks.append(attack)
        spec, t = attack.spec, attack.time
        if spec.kind == "replay":
            matches = [tx for tx in self.captures
                       if tx.label == spec.label and tx.origin == spec.source]
            if spec.occurrence > len(matches):
                attack.verdict = NO_OP
                attack.detail = "selector matched no captured transmission"
                self.log.add(t, "attack replay: nothing captured to replay")
                return
            captured = matches[spec.occurrence - 1]
            self.log.add(t, f"attack replay: re-injecting {spec.label}"
                            f"#{spec.occurrence} from {spec.source}")
            self.transmit(t, Transmission(t, captured.origin, captured.label,
                                          list(captured.frames), attack))
        elif spec.kind == "modify":
            self.pending_mods.append(attack)
            self.log.add(t, f"attack modify: armed for next {spec.label} "
                            f"from {spec.source}")
        elif spec.kind == "fake_node":
            hm = "".join(self.rng_adversary.choice("0123456789abcdef")
                         for _ in range(8))
            record = protocol.encode_ta_record(
                spec.claimed_wire, hm, self.rng_adversary.randbytes(2))
            blob = protocol.encrypt_message(
                self.params, protocol.BS_IDENTITY, record, self.rng_adversary)
            frames = codec.fragment(protocol.BS_WIRE_ID, spec.claimed_wire, blob)
            self.log.add(t, f"attack fake_node: wire {spec.claimed_wire} "
                            f"claims trust value {hm}")
            self.transmit(t, Transmission(t, "adversary", "ta-request", frames, attack))
        else:  # impersonate
            r = self.rng_adversary.randrange(1, self.params.q)
            big_r = self.params.curve.mul(r, self.params.generator)
            nonce = self.rng_adversary.randbytes(2)
            msg = ake_mod.AkeMessage(
                sender=spec.claimed, receiver=spec.target, big_r=big_r, nonce=nonce,
                mac=ake_mod.message_mac(self.params, spec.claimed, big_r, nonce))
            blob = protocol.ake_message_to_bytes(self.bs.registry, self.params, msg)
            frames = codec.fragment(
                self.bs.registry.wire_id(spec.target),
                self.bs.registry.wire_id(spec.claimed), blob)
            self.log.add(t, f"attack impersonate: claiming {spec.claimed} "
                            f"towards {spec.target} without its key")
            self.transmit(t, Transmission(t, "adversary", "ake", frames, attack))

    # -- run

    def run(self) -> SimReport:
        for event in self.scenario.events:
            self.push(event.time, "event", event)
        while self.queue:
            time, _, action, payload = heapq.heappop(self.queue)
            if action == "event":
                self.handle_event(payload)
            else:
                self.deliver(time, payload)
        for attack in self.attacks:
            if attack.verdict == "pending":
                attack.verdict = NO_OP
                attack.detail = "never triggered"
        report = energy.build_report(
            {name: node.ledger for name, node in self.nodes.items()},
            self.constants,
            trusted_count=len(self.bs.db.trusted_identities()),
        )
        return SimReport(
            scenario=self.scenario.name,
            profile=self.scenario.profile,
            seed=self.seed,
            final_phases={name: n.phase for name, n in sorted(self.nodes.items())},
            trust_snapshots=self.trust_snapshots,
            rejections=self.rejections,
            attacks=[{"kind": a.spec.kind, "verdict": a.verdict, "detail": a.detail}
                     for a in self.attacks],
            event_log=self.log.lines,
            energy_report=report,
        )


def run(scenario: Scenario, seed: int | None = None,
        constants: energy.EnergyConstants = energy.DEFAULT_CONSTANTS,
        nonce_check: bool = True,
        keys: tuple[ibe.PublicParams, ibe.MasterKey] | None = None) -> SimReport:
    return Simulation(scenario, seed, constants, nonce_check, keys).run()
