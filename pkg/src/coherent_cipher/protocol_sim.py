"""Monte Carlo run of the keyed cipher with heterodyne receivers.

Alice modulates random message bits with the LFSR running key. Eve taps the
full signal at the source, before any loss, and decides by maximum a
posteriori over the whole constellation. Bob receives the attenuated signal
and decides between the two states allowed by his key.

Symbols are processed in fixed-size shards. Shard ``i`` draws from its own
PCG64 stream seeded by ``SeedSequence(seed, spawn_key=(i,))``, so the report
does not depend on how many worker threads process the shards.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .helstrom import Priors, bob_error, constellation, eve_error
from .keystream import (
    DEFAULT_SEED,
    DEFAULT_TAPS,
    KeyStream,
    LfsrState,
    bits_per_index,
    constellation_indices,
)
from .states import EncodingKind, TwoModeState, amplitudes

SHARD_SIZE = 8192
RNG_NAME = f"numpy PCG64 via SeedSequence(seed, spawn_key=(shard,)), numpy {np.__version__}"


@dataclass(frozen=True)
class SimConfig:
    m: int
    nbar: float
    bits: int
    encoding: EncodingKind = EncodingKind.PHASE
    loss_db: float = 0.0
    seed: int = 0
    lfsr_seed: int = DEFAULT_SEED
    lfsr_taps: tuple = DEFAULT_TAPS
    priors: Priors = field(default_factory=Priors)

    def __post_init__(self):
        object.__setattr__(self, "encoding", EncodingKind.parse(self.encoding))
        object.__setattr__(self, "lfsr_taps", tuple(int(t) for t in self.lfsr_taps))
        if self.bits < 1:
            raise ValueError(f"bits must be >= 1, got {self.bits}")
        bits_per_index(self.m)
        if not math.isfinite(self.nbar) or self.nbar < 0:
            raise ValueError(f"nbar must be >= 0, got {self.nbar}")
        if not math.isfinite(self.loss_db) or self.loss_db < 0:
            raise ValueError(f"loss_db must be >= 0, got {self.loss_db}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        self.lfsr()

    def lfsr(self):
        return LfsrState(self.lfsr_seed, max(self.lfsr_taps), self.lfsr_taps)


@dataclass(frozen=True)
class SimReport:
    config: SimConfig
    bob_errors: int
    eve_errors: int
    bob_ber: float
    eve_ber: float
    bob_se: float
    eve_se: float
    analytic_pe_bob: float
    analytic_pe_eve_helstrom: float
    bob_received_nbar: float
    rng: str = RNG_NAME

    def fields(self):
        cfg = self.config
        return [
            ("m", str(cfg.m)),
            ("nbar", _fmt(cfg.nbar)),
            ("encoding", cfg.encoding.value),
            ("bits", str(cfg.bits)),
            ("loss_db", _fmt(cfg.loss_db)),
            ("seed", str(cfg.seed)),
            ("lfsr_seed", f"{cfg.lfsr_seed:x}"),
            ("lfsr_taps", ";".join(str(t) for t in cfg.lfsr_taps)),
            ("p0", _fmt(cfg.priors.p0)),
            ("rng", self.rng),
            ("bob_received_nbar", _fmt(self.bob_received_nbar)),
            ("bob_errors", str(self.bob_errors)),
            ("bob_ber", _fmt(self.bob_ber)),
            ("bob_se", _fmt(self.bob_se)),
            ("analytic_pe_bob", _fmt(self.analytic_pe_bob)),
            ("eve_errors", str(self.eve_errors)),
            ("eve_ber", _fmt(self.eve_ber)),
            ("eve_se", _fmt(self.eve_se)),
            ("analytic_pe_eve_helstrom", _fmt(self.analytic_pe_eve_helstrom)),
        ]

    def to_text(self):
        return "".join(f"{k} = {v}\n" for k, v in self.fields())

    def csv_header(self):
        return ",".join(k for k, _ in self.fields())

    def csv_row(self):
        return ",".join(_csv_cell(v) for _, v in self.fields())


def _fmt(x):
    return format(float(x), ".17g")


def _csv_cell(v):
    return f'"{v}"' if ("," in v or '"' in v) else v


def heterodyne_sample(s, rng):
    """One heterodyne outcome per mode: z = beta + g, Re g and Im g ~ N(0, 1/2)."""
    g = rng.normal(0.0, math.sqrt(0.5), size=4)
    return complex(s.beta1 + complex(g[0], g[1])), complex(s.beta2 + complex(g[2], g[3]))


def heterodyne_samples(beta1, beta2, rng):
    """Vectorized :func:`heterodyne_sample` for arrays of mode amplitudes."""
    n = len(beta1)
    g = rng.normal(0.0, math.sqrt(0.5), size=(4, n))
    return beta1 + (g[0] + 1j * g[1]), beta2 + (g[2] + 1j * g[3])


def transmissivity(loss_db):
    if not math.isfinite(loss_db) or loss_db < 0:
        raise ValueError(f"loss must be a finite value >= 0 dB, got {loss_db}")
    return 10.0 ** (-loss_db / 10.0)


def apply_loss(s, loss_db):
    """Pure linear attenuation: every amplitude scales by sqrt(eta)."""
    r = math.sqrt(transmissivity(loss_db))
    return TwoModeState(s.beta1 * r, s.beta2 * r)


def _key_pair_amplitudes(k, m, nbar, encoding):
    j0 = constellation_indices(k, 0, m)
    j1 = constellation_indices(k, 1, m)
    step = math.pi / m
    return amplitudes(j0 * step, nbar, encoding), amplitudes(j1 * step, nbar, encoding)


def bob_decide_batch(z1, z2, k, m, nbar, encoding):
    """Keyed maximum-likelihood decision between the two states of key ``k``."""
    (a1, a2), (c1, c2) = _key_pair_amplitudes(k, m, nbar, encoding)
    d0 = np.abs(z1 - a1) ** 2 + np.abs(z2 - a2) ** 2
    d1 = np.abs(z1 - c1) ** 2 + np.abs(z2 - c2) ** 2
    # equal-energy hypotheses: the Gaussian likelihood ratio is a distance test
    return (d1 < d0).astype(np.uint8)


def bob_decide(z1, z2, k, m, nbar, encoding):
    return int(bob_decide_batch(np.array([z1]), np.array([z2]), np.array([k]), m, nbar, encoding)[0])


def eve_map_decide_batch(z1, z2, c, priors=Priors()):
    """MAP bit decision from heterodyne samples, without knowledge of the key."""
    b1, b2 = c.amplitudes()
    with np.errstate(divide="ignore"):
        logw = np.log(c.weights)
        logp0, logp1 = np.log([priors.p0, priors.p1])
    return _backend.kernels().map_decide(
        z1, z2, b1, b2, logw, c.bits.astype(np.uint8), logp0, logp1
    )


def eve_map_decide(z1, z2, c, priors=Priors()):
    return int(eve_map_decide_batch(np.array([z1]), np.array([z2]), c, priors)[0])


def _shard_rng(seed, index):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


def _run_shard(cfg, index, keys, eve_const, eta):
    rng = _shard_rng(cfg.seed, index)
    n = len(keys)
    if cfg.priors.p0 == 0.5:
        msg = rng.integers(0, 2, size=n, dtype=np.int64)
    else:
        msg = (rng.random(n) < cfg.priors.p1).astype(np.int64)
    j = constellation_indices(keys, msg, cfg.m)
    b1, b2 = amplitudes(j * (math.pi / cfg.m), cfg.nbar, cfg.encoding)

    ez1, ez2 = heterodyne_samples(b1, b2, rng)
    eve_bits = eve_map_decide_batch(ez1, ez2, eve_const, cfg.priors)

    r = math.sqrt(eta)
    bz1, bz2 = heterodyne_samples(b1 * r, b2 * r, rng)
    bob_bits = bob_decide_batch(bz1, bz2, keys, cfg.m, cfg.nbar * eta, cfg.encoding)
    return int(np.count_nonzero(bob_bits != msg)), int(np.count_nonzero(eve_bits != msg))


def _se(p, n):
    return math.sqrt(p * (1.0 - p) / n)


def run_session(config, workers=1):
    """Simulate ``config.bits`` symbols; the result is a pure function of the config."""
    cfg = config
    eta = transmissivity(cfg.loss_db)
    keys = KeyStream(cfg.lfsr(), cfg.m).take(cfg.bits)
    eve_const = constellation(cfg.m, cfg.nbar, cfg.encoding)
    shards = [
        (i, keys[start : start + SHARD_SIZE])
        for i, start in enumerate(range(0, cfg.bits, SHARD_SIZE))
    ]

    def run(item):
        return _run_shard(cfg, item[0], item[1], eve_const, eta)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            counts = list(pool.map(run, shards))
    else:
        counts = [run(s) for s in shards]
    bob_errors = sum(c[0] for c in counts)
    eve_errors = sum(c[1] for c in counts)
    bob_ber = bob_errors / cfg.bits
    eve_ber = eve_errors / cfg.bits
    return SimReport(
        config=cfg,
        bob_errors=bob_errors,
        eve_errors=eve_errors,
        bob_ber=bob_ber,
        eve_ber=eve_ber,
        bob_se=_se(bob_ber, cfg.bits),
        eve_se=_se(eve_ber, cfg.bits),
        analytic_pe_bob=bob_error(cfg.nbar * eta),
        analytic_pe_eve_helstrom=eve_error(cfg.m, cfg.nbar, cfg.encoding, cfg.priors).pe,
        bob_received_nbar=cfg.nbar * eta,
    )
