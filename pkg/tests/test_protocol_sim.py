import csv
import math

import numpy as np
import pytest

from coherent_cipher.errors import UnsupportedConfigurationError
from coherent_cipher.helstrom import Priors, bob_error, constellation, eve_error
from coherent_cipher.keystream import total_angle
from coherent_cipher.protocol_sim import (
    SHARD_SIZE,
    SimConfig,
    apply_loss,
    bob_decide,
    eve_map_decide,
    heterodyne_sample,
    heterodyne_samples,
    run_session,
    transmissivity,
)
from coherent_cipher.states import TwoModeState, make_state


def test_heterodyne_vacuum_energy():
    rng = np.random.default_rng(1)
    n = 100_000
    z1, _ = heterodyne_samples(np.zeros(n, complex), np.zeros(n, complex), rng)
    e = np.abs(z1) ** 2  # exponential with mean 1, sd 1
    assert abs(e.mean() - 1.0) < 5 / math.sqrt(n)


def test_heterodyne_unbiased():
    rng = np.random.default_rng(2)
    n = 100_000
    z1, z2 = heterodyne_samples(np.full(n, 3 + 0j), np.zeros(n, complex), rng)
    sd = math.sqrt(0.5 / n)
    assert abs(z1.real.mean() - 3.0) < 5 * sd
    assert abs(z2.imag.mean()) < 5 * sd
    assert z1.real.var() == pytest.approx(0.5, rel=0.02)


def test_heterodyne_single_sample_deterministic():
    s = TwoModeState(1 + 0j, -1j)
    a = [heterodyne_sample(s, np.random.default_rng(9)) for _ in range(2)]
    assert a[0] == a[1]


def test_loss_examples():
    s = make_state(0.4, 7.0, "phase")
    assert apply_loss(s, 0.0) == s
    assert apply_loss(s, 3.0103).nbar == pytest.approx(3.5, abs=1e-4 * 7)
    assert transmissivity(3.0103) == pytest.approx(0.5, abs=1e-6)
    assert apply_loss(make_state(1.0, 100.0, "phase"), 10.0).nbar == pytest.approx(10.0, rel=1e-12)
    with pytest.raises(ValueError):
        transmissivity(-1.0)


@pytest.mark.parametrize("m", [1, 2, 8])
@pytest.mark.parametrize("enc", ["phase", "polarization"])
def test_bob_noise_free_decisions(m, enc):
    for k in range(m):
        for b in (0, 1):
            s = make_state(total_angle(k, b, m), 4.0, enc)
            assert bob_decide(s.beta1, s.beta2, k, m, 4.0, enc) == b


def test_eve_noise_free_and_ties():
    c = constellation(4, 9.0)
    for theta, bit, _ in c.points:
        s = make_state(theta, 9.0, "phase")
        assert eve_map_decide(s.beta1, s.beta2, c) == bit
    # the origin is equidistant from every point
    assert eve_map_decide(0j, 0j, c) == 0


def test_high_energy_bob_is_error_free():
    r = run_session(SimConfig(m=4, nbar=1e4, bits=10_000, seed=3))
    assert r.bob_errors == 0


def test_m1_eve_and_bob_are_the_same_problem():
    r = run_session(SimConfig(m=1, nbar=0.5, bits=60_000, seed=4))
    se = math.hypot(r.bob_se, r.eve_se)
    assert abs(r.eve_ber - r.bob_ber) < 5 * se


def test_vacuum_eve_guesses():
    r = run_session(SimConfig(m=8, nbar=0.0, bits=40_000, seed=5))
    assert abs(r.eve_ber - 0.5) < 5 * math.sqrt(0.25 / 40_000)


def test_report_invariants_and_determinism():
    cfg = SimConfig(m=2, nbar=100.0, bits=10_000, seed=42)
    a, b = run_session(cfg), run_session(cfg)
    assert a == b
    assert a.bob_ber >= bob_error(100.0) - 3 * a.bob_se
    assert 0 <= a.bob_errors <= cfg.bits and a.bob_ber == a.bob_errors / cfg.bits
    assert a.analytic_pe_eve_helstrom == eve_error(2, 100.0).pe
    assert "PCG64" in a.rng


def test_workers_do_not_change_results():
    cfg = SimConfig(m=16, nbar=2.0, bits=3 * SHARD_SIZE + 17, seed=11)
    assert run_session(cfg, workers=1) == run_session(cfg, workers=3)


def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig(m=2, nbar=1.0, bits=0)
    with pytest.raises(UnsupportedConfigurationError):
        SimConfig(m=3, nbar=1.0, bits=10)
    with pytest.raises(ValueError):
        SimConfig(m=2, nbar=1.0, bits=10, loss_db=-3)
    with pytest.raises(ValueError):
        SimConfig(m=2, nbar=-1.0, bits=10)
    with pytest.raises(ValueError):
        SimConfig(m=2, nbar=1.0, bits=10, lfsr_seed=0)


@pytest.mark.parametrize(
    "m,nbar,seed", [(1, 1.0, 1), (4, 1.0, 2), (8, 4.0, 3), (32, 1.0, 7), (2, 4.0, 8)]
)
def test_optimality_ordering(m, nbar, seed):
    r = run_session(SimConfig(m=m, nbar=nbar, bits=40_000, seed=seed))
    assert r.eve_ber >= r.analytic_pe_eve_helstrom - 3 * r.eve_se
    assert r.bob_ber >= r.analytic_pe_bob - 3 * r.bob_se


def test_unequal_priors_run():
    r = run_session(SimConfig(m=4, nbar=1.0, bits=20_000, seed=6, priors=Priors.from_p0(0.8)))
    assert r.eve_ber <= 0.2 + 3 * r.eve_se


def test_security_trend():
    bers = []
    for m in (1, 2, 4, 8, 16, 32):
        r = run_session(SimConfig(m=m, nbar=1.0, bits=30_000, seed=100 + m))
        bers.append((r.eve_ber, r.eve_se))
    for (a, sa), (b, sb) in zip(bers, bers[1:]):
        assert b >= a - 3 * math.hypot(sa, sb)


@pytest.mark.parametrize("loss_db,seed_b", [(3.0, 21), (10.0, 22)])
def test_loss_consistency(loss_db, seed_b):
    eta = transmissivity(loss_db)
    lossy = run_session(SimConfig(m=4, nbar=4.0, bits=40_000, loss_db=loss_db, seed=20))
    assert lossy.bob_received_nbar == pytest.approx(4.0 * eta)
    # same seed: the channel noise is identical, so the counts coincide
    direct = run_session(SimConfig(m=4, nbar=4.0 * eta, bits=40_000, seed=20))
    assert lossy.bob_errors == direct.bob_errors
    # independent seed: equal within sampling error
    other = run_session(SimConfig(m=4, nbar=4.0 * eta, bits=40_000, seed=seed_b))
    assert abs(lossy.bob_ber - other.bob_ber) < 3 * math.hypot(lossy.bob_se, other.bob_se)


def test_eve_is_not_affected_by_loss():
    a = run_session(SimConfig(m=8, nbar=2.0, bits=20_000, seed=30))
    b = run_session(SimConfig(m=8, nbar=2.0, bits=20_000, seed=30, loss_db=6.0))
    assert a.eve_errors == b.eve_errors


def test_report_serialization():
    r = run_session(SimConfig(m=2, nbar=1.0, bits=100, seed=1))
    text = r.to_text().splitlines()
    keys = [line.split(" = ")[0] for line in text]
    assert keys == r.csv_header().split(",")
    row = next(csv.reader([r.csv_row()]))
    assert row == [line.split(" = ", 1)[1] for line in text]
    assert "lfsr_seed = ace1" in text
