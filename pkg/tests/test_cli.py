import numpy as np
import pytest

from netgame import cli
from netgame.core import GameConfig, StrategyProfile


def write_config(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


SYNTH_N6 = """
[game]
n_players = 6
dim = 2
alpha = 1.0
budget = 1.0
symmetric = true
seed = 11

[data]
source = synth
per_node = 20
noise_sigma = 0.3

[output]
dir = {out}
"""


class TestConfigErrors:
    def test_missing_file_exits_1(self, tmp_path):
        assert cli.main(["run-commutative", "--config", str(tmp_path / "nope.ini")]) == 1

    def test_unknown_key_exits_1_without_outputs(self, tmp_path, capsys):
        out = tmp_path / "out"
        cfg = write_config(
            tmp_path / "bad.ini",
            f"[game]\nn_players = 2\ndim = 1\nbanana = 3\n\n[data]\nsource = synth\n\n[output]\ndir = {out}\n",
        )
        assert cli.main(["run-commutative", "--config", cfg]) == 1
        assert not out.exists()
        assert "banana" in capsys.readouterr().err

    def test_unknown_section_exits_1(self, tmp_path):
        cfg = write_config(tmp_path / "bad.ini", "[game]\nn_players = 2\ndim = 1\n\n[extra]\nx = 1\n")
        assert cli.main(["run-commutative", "--config", cfg]) == 1

    def test_invalid_budget_exits_1(self, tmp_path):
        cfg = write_config(
            tmp_path / "bad.ini",
            "[game]\nn_players = 2\ndim = 1\nbudget = 1.5\n\n[data]\nsource = synth\n",
        )
        assert cli.main(["run-commutative", "--config", cfg]) == 1


def read_matrix(path):
    lines = path.read_text().strip().splitlines()
    rows = [line.split(",")[1:] for line in lines[1:]]
    return np.array([[float(v) for v in row] for row in rows])


class TestRunCommutative:
    def test_six_player_run_outputs(self, tmp_path):
        out = tmp_path / "out"
        cfg = write_config(tmp_path / "c.ini", SYNTH_N6.format(out=out))
        assert cli.main(["run-commutative", "--config", cfg]) == 0
        m = read_matrix(out / "network.csv")
        assert m.shape == (6, 6)
        assert np.all(np.diag(m) == 0.0)
        assert np.max(np.abs(m.sum(axis=1) - 1.0)) < 1e-6
        summary = (out / "summary.txt").read_text()
        assert "phi_final" in summary and "p1_star" in summary

    def test_byte_identical_reruns(self, tmp_path):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        cfg_a = write_config(tmp_path / "ca.ini", SYNTH_N6.format(out=out_a))
        cfg_b = write_config(tmp_path / "cb.ini", SYNTH_N6.format(out=out_b))
        assert cli.main(["run-commutative", "--config", cfg_a]) == 0
        assert cli.main(["run-commutative", "--config", cfg_b]) == 0
        for name in ("network.csv", "trace.csv", "profile.csv", "summary.txt"):
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes()

    def test_seed_override_changes_outputs(self, tmp_path):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        cfg_a = write_config(tmp_path / "ca.ini", SYNTH_N6.format(out=out_a))
        cfg_b = write_config(tmp_path / "cb.ini", SYNTH_N6.format(out=out_b))
        cli.main(["run-commutative", "--config", cfg_a])
        cli.main(["run-commutative", "--config", cfg_b, "--seed", "12"])
        assert (out_a / "network.csv").read_bytes() != (out_b / "network.csv").read_bytes()


TWO_PLAYER_CSV_GAME = """
[game]
n_players = 2
dim = 1
alpha = 1.0
budget = 1.0
symmetric = true
seed = 3

[data]
source = csv
path = {csv}
feature_columns = x
label_column = y

[partition]
mode = biased

[omd]
rounds = {rounds}
record_every = 50
{extra}

[output]
dir = {out}
"""


@pytest.fixture
def two_player_csv(tmp_path):
    csv_path = tmp_path / "points.csv"
    csv_path.write_text("x,y\n1.0,1.0\n1.0,-1.0\n")
    return csv_path


class TestRunConcurrent:
    def test_stays_at_supplied_equilibrium(self, tmp_path, two_player_csv):
        # node 0 holds (u + 1)^2, node 1 holds (u - 1)^2 after the biased
        # split; the stationarity system gives u* = (-1/3, 1/3), m forced to 1
        ref = tmp_path / "ref.csv"
        config = GameConfig(n_players=2, dim=1, budget=1.0, symmetric=True)
        u_star = np.array([[-1.0 / 3.0], [1.0 / 3.0]])
        m_star = np.array([[0.0, 1.0], [1.0, 0.0]])
        cli.write_profile_csv(ref, u_star, m_star)
        out = tmp_path / "out"
        cfg = write_config(
            tmp_path / "c.ini",
            TWO_PLAYER_CSV_GAME.format(
                csv=two_player_csv, out=out, rounds=300,
                extra=f"ref_profile = {ref}\nstart_at_reference = true",
            ),
        )
        assert cli.main(["run-concurrent", "--config", cfg]) == 0
        summary = dict(
            line.split(" = ") for line in (out / "summary.txt").read_text().splitlines()
        )
        assert summary["stayed_near_reference"] == "True"
        assert float(summary["dist_to_reference"]) < 1e-8

    def test_noisy_trace_reproducible(self, tmp_path, two_player_csv):
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            cfg = write_config(
                tmp_path / f"c{name}.ini",
                TWO_PLAYER_CSV_GAME.format(
                    csv=two_player_csv, out=out, rounds=400,
                    extra="noise = gaussian\nsigma = 0.2",
                ),
            )
            assert cli.main(["run-concurrent", "--config", cfg]) == 0
            outs.append(out)
        assert (outs[0] / "trace.csv").read_bytes() == (outs[1] / "trace.csv").read_bytes()

    def test_converges_to_oracle_equilibrium(self, tmp_path, two_player_csv):
        ref = tmp_path / "ref.csv"
        cli.write_profile_csv(
            ref,
            np.array([[-1.0 / 3.0], [1.0 / 3.0]]),
            np.array([[0.0, 1.0], [1.0, 0.0]]),
        )
        out = tmp_path / "out"
        cfg = write_config(
            tmp_path / "c.ini",
            TWO_PLAYER_CSV_GAME.format(
                csv=two_player_csv, out=out, rounds=5000, extra=f"ref_profile = {ref}",
            ),
        )
        assert cli.main(["run-concurrent", "--config", cfg]) == 0
        summary = dict(
            line.split(" = ") for line in (out / "summary.txt").read_text().splitlines()
        )
        assert float(summary["dist_to_reference"]) < 1e-3


STREAMING_CONFIG = """
[game]
n_players = 3
dim = 2
alpha = 1.0
budget = 1.0
symmetric = false
seed = 5

[data]
source = synth_pool
pool_size = 120
noise_sigma = 2.0

[partition]
mode = biased

[streaming]
node = 0
partners = 1
events = {events}
max_points = 30

[output]
dir = {out}
"""


class TestRunStreaming:
    def test_connect_disconnect_trace(self, tmp_path):
        out = tmp_path / "out"
        cfg = write_config(
            tmp_path / "c.ini",
            STREAMING_CONFIG.format(events="connect@5,disconnect@20", out=out),
        )
        assert cli.main(["run-streaming", "--config", cfg]) == 0
        lines = (out / "stream_trace.csv").read_text().strip().splitlines()
        assert lines[0] == "step,loss_dynamic,loss_isolated"
        assert len(lines) == 31
        events = (out / "events.txt").read_text().strip().splitlines()
        assert events == ["step=5 event=connect", "step=20 event=disconnect"]
        # outside the window the dynamic node is the isolated node
        for line in lines[1:5] + lines[20:]:
            _, dyn, iso = line.split(",")
            assert dyn == iso

    def test_empty_schedule_equals_isolated(self, tmp_path):
        out = tmp_path / "out"
        cfg = write_config(tmp_path / "c.ini", STREAMING_CONFIG.format(events="", out=out))
        assert cli.main(["run-streaming", "--config", cfg]) == 0
        lines = (out / "stream_trace.csv").read_text().strip().splitlines()[1:]
        for line in lines:
            _, dyn, iso = line.split(",")
            assert dyn == iso

    def test_bad_event_syntax_exits_1(self, tmp_path):
        cfg = write_config(
            tmp_path / "c.ini", STREAMING_CONFIG.format(events="connect:5", out=tmp_path / "o"),
        )
        assert cli.main(["run-streaming", "--config", cfg]) == 1


WELFARE_CONFIG = """
[game]
n_players = 3
dim = 2
alpha = 1.0
budget = 1.0
symmetric = true
seed = 2

[data]
source = synth
per_node = 15
noise_sigma = 0.5

[welfare]
n_seeds = 5

[output]
dir = {out}
"""


class TestCompareWelfare:
    def test_sweep_rows_and_bounds(self, tmp_path):
        out = tmp_path / "out"
        cfg = write_config(tmp_path / "c.ini", WELFARE_CONFIG.format(out=out))
        assert cli.main(["compare-welfare", "--config", cfg]) == 0
        lines = (out / "welfare.csv").read_text().strip().splitlines()
        assert lines[0] == "seed,p1_star,p2_star,welfare_1,welfare_2"
        assert len(lines) == 6
        for line in lines[1:]:
            seed, p1, p2, w1, w2 = line.split(",")
            assert float(p1) <= float(p2) + 1e-9
            assert float(w1) >= float(w2) - 1e-9
        summary = (out / "summary.txt").read_text()
        assert "all_bounds_hold = True" in summary

    def test_thread_env_gives_same_rows(self, tmp_path, monkeypatch):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        cfg_a = write_config(tmp_path / "ca.ini", WELFARE_CONFIG.format(out=out_a))
        cfg_b = write_config(tmp_path / "cb.ini", WELFARE_CONFIG.format(out=out_b))
        assert cli.main(["compare-welfare", "--config", cfg_a]) == 0
        monkeypatch.setenv("NETGAME_THREADS", "4")
        assert cli.main(["compare-welfare", "--config", cfg_b]) == 0
        assert (out_a / "welfare.csv").read_bytes() == (out_b / "welfare.csv").read_bytes()


class TestProfileRoundTrip:
    def test_write_then_read(self, tmp_path, rng):
        config = GameConfig(n_players=3, dim=2, budget=1.0, symmetric=True)
        u = rng.uniform(-5, 5, size=(3, 2))
        m = np.full((3, 3), 0.5)
        np.fill_diagonal(m, 0.0)
        path = tmp_path / "p.csv"
        cli.write_profile_csv(path, u, m)
        profile = cli.read_profile_csv(path, config)
        assert np.array_equal(profile.u, u)
        assert np.array_equal(profile.m, m)
