"""Boneh-Franklin identity-based encryption over y^2 = x^3 + 1.

Public keys are identity strings; the trusted authority holds a master
scalar s and issues the private key s*Q_id for Q_id = hash_to_point(id).
Encryption is the CCA-hardened variant: a random seed sigma determines
the ephemeral scalar via a hash, and decryption re-derives the scalar
and rejects any ciphertext that does not re-encrypt to itself.

Two parameter profiles ship with the package: "toy" (p = 227, q = 19)
small enough for exhaustive checks, and "demo" with a 256-bit field and
a 160-bit subgroup, giving 64-byte serialized points.  The demo primes
were found by the deterministic search in tools/gen_demo_params.py.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass

from .curve import Curve, Point, Fp2, is_probable_prime
from .errors import ConfigError, Reject

# H1..H4 construction tags, recorded in the params for audit purposes
HASH_IDS = (
    "h1:sha256-map-to-point",
    "h2:sha256-trunc-n",
    "h3:sha256-zqstar",
    "h4:sha256-trunc-n",
)

PROFILES = {
    "toy": {"p": 227, "q": 19, "n": 128},
    "demo": {
        # from tools/gen_demo_params.py: q smallest 160-bit prime,
        # p = 3*m*q - 1 the smallest 256-bit prime of that shape
        "p": 0x800000000000000000000049000000000000012B00000000000000000000AA85,
        "q": 0x800000000000000000000000000000000000012B,
        "n": 128,
    },
}

_PARAMS_MAGIC = b"IBTP"
_KEY_MAGIC = b"IBTK"
_MASTER_MAGIC = b"IBTM"
_FORMAT_VERSION = 1


@dataclass(frozen=True)
class SecurityConfig:
    profile: str
    p: int
    q: int
    n: int
    seed: int = 0

    @classmethod
    def from_profile(cls, name: str, seed: int = 0) -> "SecurityConfig":
        if name not in PROFILES:
            raise ConfigError(f"unknown profile {name!r}")
        return cls(profile=name, seed=seed, **PROFILES[name])

    def validate(self) -> None:
        problems = []
        if self.p % 3 != 2:
            problems.append("p not 2 mod 3")
        if not is_probable_prime(self.p):
            problems.append("p not prime")
        if not is_probable_prime(self.q):
            problems.append("q not prime")
        if (self.p + 1) % self.q != 0:
            problems.append("q does not divide p + 1")
        if self.q == self.p:
            problems.append("q equals p")
        if self.q in (2, 3):
            problems.append("q must exceed 3")
        if not 0 < self.n <= 256:
            problems.append("n out of range (0, 256]")
        elif self.n % 8 != 0:
            problems.append("n must be a whole number of bytes")
        if problems:
            raise ConfigError("; ".join(problems))


@dataclass
class PublicParams:
    p: int
    q: int
    n: int
    generator: Point
    master_pub: Point
    hash_ids: tuple = HASH_IDS

    def __post_init__(self):
        self.curve = Curve(self.p, self.q)

    @property
    def cofactor(self) -> int:
        return self.curve.cofactor

    @property
    def block_bytes(self) -> int:
        return self.n // 8


@dataclass
class MasterKey:
    scalar: int


@dataclass
class PrivateKey:
    identity: str
    point: Point


@dataclass
class Ciphertext:
    u: Point
    v: bytes
    w: bytes


def setup(config: SecurityConfig, rng: random.Random | None = None):
    """Generate public parameters and the master key.

    Deterministic for a given config seed.  The generator is a random
    curve point cleared to the order-q subgroup, retried on infinity.

    Returns:
        (PublicParams, MasterKey)
    """
    config.validate()
    if rng is None:
        rng = random.Random(config.seed)
    curve = Curve(config.p, config.q)
    while True:
        gen = curve.subgroup_point(rng.randrange(config.p))
        if gen is not None:
            break
    s = rng.randrange(1, config.q)
    params = PublicParams(
        p=config.p,
        q=config.q,
        n=config.n,
        generator=gen,
        master_pub=curve.mul(s, gen),
    )
    return params, MasterKey(scalar=s)


def hash_to_point(params: PublicParams, identity: str) -> Point:
    """H1: map an identity string to an order-q curve point.

    SHA-256 of the identity picks a y coordinate; p = 2 (mod 3) lifts
    it to the unique curve point with that y, and cofactor clearing
    moves it into the subgroup.  The rare infinity result (probability
    cofactor/(p+1)) retries with a counter appended to the identity.
    """
    if not identity:
        raise ValueError("identity must be non-empty")
    attempt = identity
    counter = 0
    while True:
        digest = hashlib.sha256(attempt.encode("utf-8")).digest()
        y0 = int.from_bytes(digest, "big") % params.p
        Q = params.curve.subgroup_point(y0)
        if Q is not None:
            return Q
        counter += 1
        attempt = identity + str(counter)


def extract(params: PublicParams, master: MasterKey, identity: str) -> PrivateKey:
    """H1 then multiply by the master scalar."""
    Q = hash_to_point(params, identity)
    return PrivateKey(identity=identity, point=params.curve.mul(master.scalar, Q))


def hash_to_scalar(q: int, data: bytes) -> int:
    """SHA-256 of data mapped into [1, q-1]."""
    return int.from_bytes(hashlib.sha256(data).digest(), "big") % (q - 1) + 1


def _xor(a: bytes, b: bytes) -> bytes:
    if len(a) != len(b):
        raise ValueError("xor length mismatch")
    return bytes(x ^ y for x, y in zip(a, b))


def _h2(params: PublicParams, g: Fp2) -> bytes:
    return hashlib.sha256(gt_to_bytes(params, g)).digest()[: params.block_bytes]


def _h3(params: PublicParams, sigma: bytes, message: bytes) -> int:
    return hash_to_scalar(params.q, sigma + message)


def _h4(params: PublicParams, sigma: bytes) -> bytes:
    return hashlib.sha256(sigma).digest()[: params.block_bytes]


def encrypt(
    params: PublicParams,
    identity: str,
    message: bytes,
    rng: random.Random | None = None,
    sigma: bytes | None = None,
) -> Ciphertext:
    """Encrypt one block (at most n/8 bytes) to an identity.

    sigma is the n-bit commitment seed, normally drawn from rng; tests
    may pass it explicitly to pin the whole ciphertext.
    """
    if len(message) > params.block_bytes:
        raise ValueError(f"message over {params.block_bytes} bytes, chunk it first")
    if sigma is None:
        if rng is None:
            raise ValueError("need an rng when sigma is not fixed")
        sigma = rng.randbytes(params.block_bytes)
    elif len(sigma) != params.block_bytes:
        raise ValueError("sigma must be exactly one block")
    r = _h3(params, sigma, message)
    curve = params.curve
    U = curve.mul(r, params.generator)
    g = curve.pairing(hash_to_point(params, identity), params.master_pub)
    mask = _h2(params, curve.gt_pow(g, r))
    V = _xor(sigma, mask)
    W = _xor(message, _h4(params, sigma)[: len(message)])
    return Ciphertext(u=U, v=V, w=W)


def decrypt(params: PublicParams, key: PrivateKey, ct: Ciphertext) -> bytes:
    """Decrypt one block; raises Reject unless the ciphertext re-encrypts
    to itself under the recovered seed."""
    curve = params.curve
    if (
        ct.u is None
        or not curve.contains(ct.u)
        or curve.mul(params.q, ct.u) is not None
    ):
        raise Reject("malformed_point")
    if len(ct.v) != params.block_bytes or len(ct.w) > params.block_bytes:
        raise Reject("malformed_ciphertext")
    g = curve.pairing(key.point, ct.u)
    sigma = _xor(ct.v, _h2(params, g))
    message = _xor(ct.w, _h4(params, sigma)[: len(ct.w)])
    if curve.mul(_h3(params, sigma, message), params.generator) != ct.u:
        raise Reject("fo_mismatch")
    return message


# Plain ElGamal-style variant without the re-encryption check.  Kept
# private: property tests use it to show the masking algebra and the
# hardening layer are separable concerns.


def _basic_encrypt(params: PublicParams, identity: str, message: bytes, r: int):
    curve = params.curve
    U = curve.mul(r, params.generator)
    g = curve.pairing(hash_to_point(params, identity), params.master_pub)
    mask = _h2(params, curve.gt_pow(g, r))
    return U, _xor(message, mask[: len(message)])


def _basic_decrypt(params: PublicParams, key: PrivateKey, U: Point, V: bytes):
    mask = _h2(params, params.curve.pairing(key.point, U))
    return _xor(V, mask[: len(V)])


# ---- serialization ----


def point_to_bytes(params: PublicParams, P: Point) -> bytes:
    if P is None:
        raise ValueError("cannot serialize the point at infinity")
    w = params.curve.coord_size
    return P[0].to_bytes(w, "big") + P[1].to_bytes(w, "big")


def point_from_bytes(params: PublicParams, data: bytes) -> Point:
    w = params.curve.coord_size
    if len(data) != 2 * w:
        raise ValueError(f"point encoding must be {2 * w} bytes")
    P = (int.from_bytes(data[:w], "big"), int.from_bytes(data[w:], "big"))
    if not params.curve.contains(P):
        raise ValueError("point not on curve")
    return P


def gt_to_bytes(params: PublicParams, g: Fp2) -> bytes:
    w = params.curve.coord_size
    return g[0].to_bytes(w, "big") + g[1].to_bytes(w, "big")


def _lp_int(v: int) -> bytes:
    raw = v.to_bytes(max(1, (v.bit_length() + 7) // 8), "big")
    return len(raw).to_bytes(2, "big") + raw


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.off = 0

    def take(self, k: int) -> bytes:
        if self.off + k > len(self.data):
            raise ValueError("truncated input")
        chunk = self.data[self.off : self.off + k]
        self.off += k
        return chunk

    def lp_int(self) -> int:
        w = int.from_bytes(self.take(2), "big")
        return int.from_bytes(self.take(w), "big")

    def done(self) -> bool:
        return self.off == len(self.data)


def params_to_bytes(params: PublicParams) -> bytes:
    """Versioned layout: magic, version byte, then length-prefixed
    big-endian integers p, q, n, P.x, P.y, sP.x, sP.y."""
    fields = [
        params.p,
        params.q,
        params.n,
        params.generator[0],
        params.generator[1],
        params.master_pub[0],
        params.master_pub[1],
    ]
    return _PARAMS_MAGIC + bytes([_FORMAT_VERSION]) + b"".join(_lp_int(v) for v in fields)


def params_from_bytes(data: bytes) -> PublicParams:
    r = _Reader(data)
    if r.take(4) != _PARAMS_MAGIC:
        raise ValueError("not a params blob")
    if r.take(1)[0] != _FORMAT_VERSION:
        raise ValueError("unsupported params version")
    p, q, n = r.lp_int(), r.lp_int(), r.lp_int()
    gen = (r.lp_int(), r.lp_int())
    mpub = (r.lp_int(), r.lp_int())
    if not r.done():
        raise ValueError("trailing bytes in params blob")
    params = PublicParams(p=p, q=q, n=n, generator=gen, master_pub=mpub)
    curve = params.curve
    for pt in (gen, mpub):
        if not curve.contains(pt) or curve.mul(q, pt) is not None:
            raise ValueError("params point invalid")
    return params


def private_key_to_bytes(params: PublicParams, key: PrivateKey) -> bytes:
    ident = key.identity.encode("utf-8")
    return (
        _KEY_MAGIC
        + bytes([_FORMAT_VERSION])
        + len(ident).to_bytes(2, "big")
        + ident
        + _lp_int(key.point[0])
        + _lp_int(key.point[1])
    )


def private_key_from_bytes(params: PublicParams, data: bytes) -> PrivateKey:
    r = _Reader(data)
    if r.take(4) != _KEY_MAGIC:
        raise ValueError("not a private key blob")
    if r.take(1)[0] != _FORMAT_VERSION:
        raise ValueError("unsupported key version")
    idlen = int.from_bytes(r.take(2), "big")
    identity = r.take(idlen).decode("utf-8")
    pt = (r.lp_int(), r.lp_int())
    if not r.done():
        raise ValueError("trailing bytes in key blob")
    if not params.curve.contains(pt):
        raise ValueError("key point not on curve")
    return PrivateKey(identity=identity, point=pt)


def master_key_to_bytes(master: MasterKey) -> bytes:
    return _MASTER_MAGIC + bytes([_FORMAT_VERSION]) + _lp_int(master.scalar)


def master_key_from_bytes(params: PublicParams, data: bytes) -> MasterKey:
    r = _Reader(data)
    if r.take(4) != _MASTER_MAGIC:
        raise ValueError("not a master key blob")
    if r.take(1)[0] != _FORMAT_VERSION:
        raise ValueError("unsupported master key version")
    scalar = r.lp_int()
    if not r.done():
        raise ValueError("trailing bytes in master key blob")
    if not 1 <= scalar < params.q:
        raise ValueError("master scalar out of range")
    # the blob must agree with the public parameters it claims to serve
    if params.curve.mul(scalar, params.generator) != params.master_pub:
        raise ValueError("master key does not match parameters")
    return MasterKey(scalar=scalar)
