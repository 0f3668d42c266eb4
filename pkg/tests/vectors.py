"""Frozen expectations for the toy profile (p=227, q=19, seed 7).

Generated by tools/freeze_vectors.py from the independent oracles;
regenerate and re-review rather than editing by hand."""

TOY_SEED = 7
TOY_GENERATOR = (73, 124)
TOY_MASTER_SCALAR = 5
TOY_MASTER_PUB = (119, 65)
H1_NODE_001 = (76, 169)
H1_NODE_002 = (120, 118)
PRIVKEY_NODE_001 = (168, 114)
PAIRING_GEN_GEN = (46, 73)
ENC_SIGMA = bytes(range(16))
ENC_MESSAGE = b'attest'
ENC_U = (73, 103)
ENC_V = bytes.fromhex('e5f45372eeb63cfcefa73fa613e7a76e')
ENC_W = bytes.fromhex('df31bf4376cb')
RETRY_IDENTITY = 'probe-13'  # first mapping attempt is infinity
AKE_BAD_PEER = 'peer-0'  # with AKE_BAD_R: r + h = 0 mod q from node-001
AKE_BAD_R = 4
TRUST_DISTINCT_SEED = 0  # 1000 random 1KB images, offset 24, no collision

# toy ciphertext for which every single-bit flip is rejected; with
# q = 19 the re-derived scalar matches by chance 1/18 per flip, so
# the all-reject property needed a search (index records how far)
FO_EXHAUSTIVE_INDEX = 1349
FO_EXHAUSTIVE_IDENTITY = 'node-001'
FO_EXHAUSTIVE_SIGMA = bytes.fromhex('320bb5b609820851bbae8ad748269a8a')
FO_EXHAUSTIVE_MESSAGE = bytes.fromhex('a5')
