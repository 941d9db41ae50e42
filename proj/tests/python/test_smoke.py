import json
import math

import pytest

import jndq


def test_version_and_hash():
    assert jndq.__version__.count(".") == 2
    assert jndq.sha256_hex(b"abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"


def test_threshold_from_reversals():
    r = jndq.threshold_from_reversals([38, 40, 39, 41, 40, 42, 41])
    assert r == {"threshold_snr_db": 40.5, "jnd_db": 9.5, "n_reversals_used": 6, "valid": True}
    assert not jndq.threshold_from_reversals([40])["valid"]


def test_listener_model_round_trip():
    cp = jndq.convergence_point(mu_db=9.0)
    assert jndq.p_correct(cp, mu_db=9.0) == pytest.approx(math.sqrt(0.5), abs=1e-6)


def test_staircase_simulation_is_seeded():
    a = jndq.simulate_staircase(mu_db=9.0, n_runs=200, seed=3, order_seed=4)
    b = jndq.simulate_staircase(mu_db=9.0, n_runs=200, seed=3, order_seed=4, threads=1)
    assert a == b
    assert a["n_valid"] + a["n_invalid"] == 200
    assert abs(a["mean_jnd_db"] - jndq.convergence_point(mu_db=9.0)) < 1.0


def test_guesser_pass_rates_follow_binomial():
    rates = jndq.simulate_screening(10, 20000, mu_db=1000.0, guess_rate=0.5, lapse_rate=0.0, seed=8)
    assert rates == sorted(rates, reverse=True)
    for k, rate in enumerate(rates, start=1):
        expected = jndq.binomial_tail(4, k, 0.5)
        low, high = jndq.wilson_interval(round(rate * 20000), 20000)
        assert low <= expected <= high


def test_statistics():
    x = [1.0, 2.0, 3.0, 4.0, 5.0]
    y = [1.2, 1.9, 3.4, 3.9, 5.3]
    assert jndq.pcc(x, x) == pytest.approx(1.0)
    assert jndq.srcc(x, y) == pytest.approx(1.0)
    assert jndq.rmse(x, y) == pytest.approx(math.sqrt((0.04 + 0.01 + 0.16 + 0.01 + 0.09) / 5))
    z, p = jndq.fisher_z_test(0.968, 12, 0.751, 12)
    assert z == pytest.approx(2.30, abs=0.01)
    assert p == pytest.approx(0.0214, abs=5e-4)
    _, p_one = jndq.fisher_z_test(0.968, 12, 0.751, 12, tail="one")
    assert p_one == pytest.approx(p / 2)
    f, df1, df2, _ = jndq.rmse_f_test(0.6, 12, 0.2, 12)
    assert (f, df1, df2) == (pytest.approx(9.0), 11, 11)


def test_errors_carry_codes():
    with pytest.raises(jndq.JndqError) as info:
        jndq.pcc([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])
    assert info.value.code == "undefined_statistic"
    with pytest.raises(ValueError):
        jndq.fisher_z_test(0.9, 12, 0.8, 12, tail="three")


def test_mix_and_measure():
    speech = [0.3 * math.sin(2 * math.pi * 220 * i / 16000) for i in range(16000)]
    mixed, gain, clipped = jndq.mix_at_snr(speech, 16000, 40.0, 5)
    assert clipped == 0 and gain > 0
    assert jndq.measure_snr(speech, mixed) == pytest.approx(40.0, abs=1e-6)


def test_cli_in_process(tmp_path):
    code, out, _ = jndq.run_cli(["--version"])
    assert code == 0 and jndq.__version__ in out
    code, out, _ = jndq.run_cli(["run-screening", "--simulate", "--level", "8", "--seed", "5"])
    assert code == 0
    doc = json.loads(out[out.index("{"):])
    assert doc["kind"] == "screening" and len(doc["trials"]) == 4
    code, _, err = jndq.run_cli(["gen-stimuli", "--sources", str(tmp_path / "none"), "--out", str(tmp_path / "o")])
    assert code == 3 and err
