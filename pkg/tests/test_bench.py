import math
import textwrap

import numpy as np
import pytest

from greenbeam.bench import (
    ConfigError,
    ExperimentConfig,
    TrialRecord,
    aggregate,
    config_from_dict,
    gen_channel,
    mean_stderr,
    noise_power,
    parse_config,
    read_csv,
    run_sweep,
    trial_seed,
    write_csv,
)
from greenbeam.bench.cli import main
from greenbeam.bench.records import CSV_FIELDS, write_timing
from greenbeam.bench.sweep import default_workers, run_scheme
from greenbeam.sca import Scheme

from conftest import make_cfg


# -- channels ----------------------------------------------------------------

def test_channel_deterministic():
    a, b = gen_channel(5, 3, 4), gen_channel(5, 3, 4)
    assert a.entries.tobytes() == b.entries.tobytes()
    assert gen_channel(6, 3, 4).entries.tobytes() != a.entries.tobytes()


def test_channel_statistics():
    h = gen_channel(0, 1000, 1000, 1.0).entries
    assert abs(np.mean(np.abs(h) ** 2) - 1.0) < 0.01
    assert abs(h.mean()) < 0.01
    assert abs(np.var(h.real) - 0.5) < 0.01 and abs(np.mean(h.real * h.imag)) < 0.01


def test_channel_zero_scale():
    assert not np.any(gen_channel(1, 2, 3, 0.0).entries)


def test_channel_nests_in_both_dimensions():
    big = gen_channel((4, 2), 6, 10, 2.0).entries
    small = gen_channel((4, 2), 3, 7, 2.0).entries
    assert np.array_equal(big[:3, :7], small)


def test_channel_errors():
    with pytest.raises(ValueError):
        gen_channel(0, 0, 2)
    with pytest.raises(ValueError):
        gen_channel(0, 1, 2, -1.0)
    with pytest.raises(ValueError):
        trial_seed(-1, 0)


def test_noise_power():
    assert noise_power(-174, 2e7) == pytest.approx(7.962e-14, rel=1e-3)
    assert 10 * math.log10(noise_power(-174, 2e7) * 1e3) == pytest.approx(-100.99, abs=0.01)
    assert noise_power(-30, 1) == pytest.approx(1e-6, rel=1e-12)
    assert noise_power(0, 1) == pytest.approx(1e-3, rel=1e-12)


# -- config ------------------------------------------------------------------

def base_doc(**exp):
    doc = {
        "schema_version": 1,
        "system": dict(n_antennas=4, n_users=2, sinr_db=12, p_antenna_max_w=1.5,
                       p_sum_max_dbm=46, eta_max=0.38, beta=0.5, p_rf_w=0.35,
                       p_static_w=20, noise_psd_dbm_per_hz=-174, bandwidth_hz=2e7),
        "channel": {"snr_db": 20},
        "experiment": dict(trials=2, seed=3, schemes=["JointNonlinear"]),
    }
    doc["experiment"].update(exp)
    return doc


def test_config_conversions():
    exp = config_from_dict(base_doc())
    cfg = exp.system
    assert cfg.sinr_targets[0] == pytest.approx(10 ** 1.2, rel=1e-14)
    assert cfg.sinr_targets[0] == pytest.approx(15.849, abs=1e-3)
    assert cfg.p_sum_max == pytest.approx(10 ** 1.6, rel=1e-14)
    assert cfg.sigma2 == pytest.approx(noise_power(-174, 2e7), rel=1e-14)
    assert exp.pathloss_scale == pytest.approx(100 * cfg.sigma2 / 1.5, rel=1e-14)


def test_config_missing_noise():
    doc = base_doc()
    del doc["system"]["noise_psd_dbm_per_hz"], doc["system"]["bandwidth_hz"]
    with pytest.raises(ConfigError):
        config_from_dict(doc)


@pytest.mark.parametrize("mutate", [
    lambda d: d["system"].update(colour="red"),
    lambda d: d.update(extra=1),
    lambda d: d["experiment"].update(bogus=1),
    lambda d: d["system"].update(sinr_linear=3.0),
    lambda d: d["system"].update(sigma2_w=1.0),
    lambda d: d.update(schema_version=2),
    lambda d: d["experiment"].update(trials=0),
    lambda d: d["experiment"].update(schemes=["Nope"]),
    lambda d: d["experiment"].update(sweep_values=[1, 2]),
    lambda d: d["experiment"].update(sweep_axis="n_users", sweep_values=[1.5]),
    lambda d: d.update(sca={"scheme": "JointFixedPA"}),
    lambda d: d["system"].update(beta="half"),
    lambda d: d["channel"].update(pathloss_scale=1.0),
])
def test_config_errors(mutate):
    doc = base_doc()
    mutate(doc)
    with pytest.raises(ConfigError):
        config_from_dict(doc)


def test_config_sweep_points():
    exp = config_from_dict(base_doc(sweep_axis="n_users", sweep_values=[1, 3]))
    assert exp.point(3).n_users == 3 and len(exp.point(3).sinr_targets) == 3
    exp = config_from_dict(base_doc(sweep_axis="n_antennas", sweep_values=[2, 6]))
    assert exp.point(6).n_antennas == 6
    assert exp.point(6).epsilon == exp.system.epsilon
    exp = config_from_dict(base_doc(sweep_axis="sinr_db", sweep_values=[0, 3]))
    assert exp.point(0.0).sinr_targets == (1.0, 1.0)


def test_parse_config_file(tmp_path):
    path = tmp_path / "exp.yaml"
    path.write_text(textwrap.dedent("""\
        schema_version: 1
        system: {n_antennas: 3, n_users: 1, sinr_linear: 2, p_antenna_max_dbm: 31.76,
                 p_sum_max_w: 10, eta_max: 0.38, beta: 0.5, p_rf_w: 0.35,
                 p_static_w: 20, sigma2_w: 1.0, epsilon_w: 1.0e-3}
        channel: {pathloss_scale: 1.0}
        experiment: {output: out/res.csv}
        sca: {max_iterations: 50}
        """))
    exp = parse_config(path)
    assert exp.output == tmp_path / "out" / "res.csv"
    assert exp.system.p_antenna_max == pytest.approx(1.4997, rel=1e-3)
    assert exp.system.epsilon == 1e-3 and exp.sca.max_iterations == 50
    assert exp.sweep_values == (None,)
    # YAML 1.2 exponent forms are numbers, not strings
    path.write_text(path.read_text().replace("sigma2_w: 1.0", "noise_psd_dbm_per_hz: -174, bandwidth_hz: 2e7"))
    assert parse_config(path).system.sigma2 == pytest.approx(noise_power(-174, 2e7), rel=1e-14)
    bad = tmp_path / "bad.yaml"
    bad.write_text("system: [unclosed")
    with pytest.raises(ConfigError):
        parse_config(bad)


# -- records -----------------------------------------------------------------

def record(**kw):
    base = dict(value=None, trial=0, seed=1, scheme="JointNonlinear", n_antennas=4, n_users=2,
                sinr_db=3.0, beta=0.5, epsilon=1.5e-4, status="solved", total_w=22.1,
                pa_w=1.75, rf_w=0.35, static_w=20.0, tx_w=0.6, active_antennas=1,
                sca_iterations=7, candidates=3)
    base.update(kw)
    return TrialRecord(**base)


def test_record_invariants():
    record()
    with pytest.raises(ValueError):
        record(total_w=30.0)
    with pytest.raises(ValueError):
        record(status="infeasible")
    with pytest.raises(ValueError):
        record(status="bogus")
    record(status="infeasible", total_w=None, pa_w=None, rf_w=None, static_w=None, tx_w=None)


def test_csv_round_trip(tmp_path):
    recs = [record(value=1 / 3, total_w=0.1 + 0.2 + 20, pa_w=0.1, rf_w=0.2, static_w=20.0),
            record(trial=1, status="infeasible", total_w=None, pa_w=None, rf_w=None,
                   static_w=None, tx_w=None, active_antennas=None, sca_iterations=None,
                   candidates=None)]
    path = tmp_path / "r.csv"
    write_csv(recs, path)
    assert read_csv(path) == recs
    assert path.read_text(encoding="utf-8").splitlines()[0] == ",".join(CSV_FIELDS)
    write_timing(recs, tmp_path / "t.csv")


def test_csv_bad_header(tmp_path):
    path = tmp_path / "r.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        read_csv(path)


# -- aggregation ---------------------------------------------------------------

def test_mean_stderr():
    assert mean_stderr([1.0, 2.0, 3.0]) == pytest.approx((2.0, 1.0 / math.sqrt(3)))
    m, se = mean_stderr([4.0])
    assert m == 4.0 and math.isnan(se)
    assert all(math.isnan(v) for v in mean_stderr([]))


def test_aggregate_groups():
    recs = [record(value=1.0, trial=0), record(value=1.0, trial=1, total_w=24.1, pa_w=3.75),
            record(value=1.0, trial=2, status="infeasible", total_w=None, pa_w=None, rf_w=None,
                   static_w=None, tx_w=None),
            record(value=1.0, scheme="BfOnlyNonlinear")]
    pts = aggregate(recs)
    assert [p.scheme for p in pts] == ["BfOnlyNonlinear", "JointNonlinear"]
    jn = pts[1]
    assert (jn.n_trials, jn.n_solved, jn.n_infeasible) == (3, 2, 1)
    assert jn.stats["total_w"][0] == pytest.approx(23.1)
    assert jn.stats["tx_per_active_w"][0] == pytest.approx(0.6)


# -- sweeps --------------------------------------------------------------------

def small_exp(**kw):
    args = dict(system=make_cfg(n=4, k=2, gamma=1.0), sweep_axis="sinr_db",
                sweep_values=(0.0, 3.0), trials=2, seed=11,
                schemes=(Scheme.JOINT_NONLINEAR, Scheme.BF_ONLY_NONLINEAR))
    args.update(kw)
    return ExperimentConfig(**args)


def test_single_record():
    exp = small_exp(sweep_axis="none", sweep_values=(), trials=1, schemes=(Scheme.BF_ONLY_FIXED_PA,))
    recs = run_sweep(exp, workers=1)
    assert len(recs) == 1 and recs[0].value is None and recs[0].candidates is None


def test_sweep_order_and_worker_independence():
    exp = small_exp()
    serial = run_sweep(exp, workers=1)
    keys = [(r.value, r.trial, r.scheme) for r in serial]
    assert keys == [(v, t, s.value) for v in (0.0, 3.0) for t in range(2) for s in exp.schemes]
    assert run_sweep(exp, workers=2) == serial


def test_sweep_records_infeasible():
    exp = small_exp(system=make_cfg(n=2, k=2, gamma=1e4), sweep_axis="none", sweep_values=(),
                    trials=2, schemes=(Scheme.JOINT_NONLINEAR,))
    recs = run_sweep(exp, workers=1)
    assert [r.status for r in recs] == ["infeasible", "infeasible"]


def test_sweep_joint_dominates_bf_only_per_trial():
    recs = run_sweep(small_exp(), workers=1)
    by = {(r.value, r.trial, r.scheme): r for r in recs}
    for (v, t, s), r in by.items():
        if s == "JointNonlinear":
            assert r.total_w <= by[(v, t, "BfOnlyNonlinear")].total_w + 1e-6


def test_run_scheme_candidate_counts():
    ch = gen_channel(trial_seed(2, 0), 2, 4)
    cfg = make_cfg(n=4, k=2)
    assert run_scheme(ch, cfg, Scheme.JOINT_FIXED_PA).candidates >= 1
    assert run_scheme(ch, cfg, Scheme.BF_ONLY_FIXED_PA).candidates is None


def test_default_workers(monkeypatch):
    monkeypatch.setenv("GREENBEAM_WORKERS", "3")
    assert default_workers() == 3
    monkeypatch.setenv("GREENBEAM_WORKERS", "0")
    with pytest.raises(ValueError):
        default_workers()


# -- CLI -----------------------------------------------------------------------

CLI_CONFIG = """\
schema_version: 1
system: {n_antennas: 4, n_users: 2, sinr_db: 0, p_antenna_max_w: 1.5, p_sum_max_dbm: 46,
         eta_max: 0.38, beta: 0.5, p_rf_w: 0.35, p_static_w: 20, sigma2_w: 1.0}
channel: {pathloss_scale: 1.0}
experiment: {sweep_axis: n_antennas, sweep_values: [3, 4], trials: 2, seed: 5,
             schemes: [JointNonlinear, BfOnlyFixedPA], output: res.csv}
"""


def test_cli_round_trip(tmp_path, capsys):
    cfg = tmp_path / "c.yaml"
    cfg.write_text(CLI_CONFIG)
    assert main(["solve", "--config", str(cfg), "--scheme", "JointFixedPA", "--value", "4"]) == 0
    out = capsys.readouterr().out
    assert "total_w" in out and "active_set" in out and "N=4" in out
    assert main(["sweep", "--config", str(cfg), "--workers", "1",
                 "--timing", str(tmp_path / "t.csv")]) == 0
    recs = read_csv(tmp_path / "res.csv")
    assert len(recs) == 8
    assert main(["plotdata", str(tmp_path / "res.csv"), "--output", str(tmp_path / "s.csv")]) == 0
    assert len((tmp_path / "s.csv").read_text().splitlines()) == 5


def test_cli_errors(tmp_path, capsys):
    assert main(["solve", "--config", str(tmp_path / "missing.yaml")]) == 2
    cfg = tmp_path / "c.yaml"
    cfg.write_text(CLI_CONFIG.replace("output: res.csv", "trials: 1").replace("trials: 2, ", ""))
    assert main(["sweep", "--config", str(cfg)]) == 2
    assert "no output path" in capsys.readouterr().err


def test_cli_selftest(capsys):
    assert main(["selftest"]) == 0
    assert capsys.readouterr().out.count("PASS") == 5
