"""End-to-end CLI behavior, exit codes, and determinism."""

import os

import numpy as np
import pytest

from gmrbm.assoc import build_pair_dataset, synth_pairs
from gmrbm.cli import main
from gmrbm.data_io import load_checkpoint, read_vectors, save_checkpoint, write_vectors
from gmrbm.exact import exact_summary
from gmrbm.trainer import init_params

from test_model import random_model


def write_pairs(path, N=20, d=4, seed=0, structure="random"):
    pairs = synth_pairs(N, d, seed=seed, structure=structure)
    rows = np.array([np.concatenate([s, r]) for s, r in pairs])
    write_vectors(path, rows)
    return rows


class TestTrain:
    def test_pairs_smoke(self, tmp_path):
        pairs = tmp_path / "pairs.vec"
        write_pairs(pairs)
        out = tmp_path / "run"
        code = main([
            "train", "--pairs", str(pairs), "--m", "16", "--q", "4",
            "--max-epochs", "200", "--checkpoint-every", "25",
            "--learning-rate", "0.005", "--batch-size", "16",
            "--out", str(out), "--seed", "1",
        ])
        assert code == 0
        params = load_checkpoint(out / "model.ckpt")
        assert params.n == 8 and params.m == 16 and params.q == 4
        log = (out / "train.log").read_text().strip().splitlines()
        assert log and log[0].startswith("epoch ")
        assert log[-1].split()[-1] != "-"

    def test_missing_data_exits_2_without_outputs(self, tmp_path):
        out = tmp_path / "run"
        code = main([
            "train", "--data", str(tmp_path / "nope.vec"), "--m", "4", "--q", "2",
            "--out", str(out), "--seed", "1",
        ])
        assert code == 2
        assert not out.exists()

    def test_same_seed_bitwise_identical_checkpoints(self, tmp_path):
        pairs = tmp_path / "pairs.vec"
        write_pairs(pairs, N=12, d=3)
        blobs = []
        for run in ("a", "b"):
            out = tmp_path / run
            code = main([
                "train", "--pairs", str(pairs), "--m", "6", "--q", "3",
                "--max-epochs", "40", "--checkpoint-every", "10",
                "--out", str(out), "--seed", "7",
            ])
            assert code == 0
            blobs.append((out / "model.ckpt").read_bytes())
        assert blobs[0] == blobs[1]

    def test_data_mode(self, tmp_path):
        data = tmp_path / "data.vec"
        rng = np.random.default_rng(0)
        write_vectors(data, rng.normal(0, 1, (64, 3)))
        out = tmp_path / "run"
        code = main([
            "train", "--data", str(data), "--m", "4", "--q", "2",
            "--max-epochs", "10", "--out", str(out), "--seed", "2",
        ])
        assert code == 0
        assert load_checkpoint(out / "model.ckpt").n == 3

    def test_requires_exactly_one_input(self, tmp_path):
        assert main(["train", "--m", "2", "--q", "2", "--out", str(tmp_path)]) == 1


class TestSample:
    def test_zero_steps_is_noise(self, tmp_path):
        p = init_params(3, 2, 2, seed=0)
        ckpt = tmp_path / "m.ckpt"
        save_checkpoint(p, ckpt)
        out = tmp_path / "s"
        code = main([
            "sample", "--model", str(ckpt), "--n-samples", "5000",
            "--steps", "0", "--out", str(out), "--seed", "3",
        ])
        assert code == 0
        V = read_vectors(out / "samples.vec").rows
        assert V.shape == (5000, 3)
        assert np.abs(V.mean(axis=0)).max() < 4 / np.sqrt(5000)
        assert V.var(axis=0) == pytest.approx(np.ones(3), rel=0.1)

    def test_decoupled_model_samples_around_bias(self, tmp_path):
        b = np.array([2.0, -1.0])
        p = init_params(2, 1, 2, seed=0)
        p.b[:] = b
        p.W[:] = 0.0
        ckpt = tmp_path / "m.ckpt"
        save_checkpoint(p, ckpt)
        out = tmp_path / "s"
        code = main([
            "sample", "--model", str(ckpt), "--n-samples", "4000",
            "--steps", "20", "--out", str(out), "--seed", "4",
        ])
        assert code == 0
        V = read_vectors(out / "samples.vec").rows
        assert np.abs(V.mean(axis=0) - b).max() < 4 / np.sqrt(4000)

    def test_bad_checkpoint_exits_2(self, tmp_path):
        bad = tmp_path / "bad.ckpt"
        bad.write_text("WRONG 1 1 1 0\n")
        assert main(["sample", "--model", str(bad), "--n-samples", "1",
                     "--steps", "0", "--out", str(tmp_path / "s")]) == 2


class TestRecall:
    def test_prints_accuracy_and_table(self, tmp_path, capsys):
        pairs_path = tmp_path / "pairs.vec"
        rows = write_pairs(pairs_path, N=2, d=5, seed=5)
        ds = build_pair_dataset([(r[:5], r[5:]) for r in rows])
        from test_assoc import two_pattern_model

        ckpt = tmp_path / "m.ckpt"
        save_checkpoint(two_pattern_model(ds), ckpt)
        code = main(["recall", "--model", str(ckpt), "--pairs", str(pairs_path),
                     "--steps", "5", "--seed", "6"])
        assert code == 0
        out = capsys.readouterr().out.splitlines()
        assert out[0] == "accuracy 1.000000"
        assert out[1] == "pair retrieved correct"
        assert out[2].split() == ["0", "0", "1"]

    def test_dimension_mismatch_exits_1(self, tmp_path):
        pairs_path = tmp_path / "pairs.vec"
        write_pairs(pairs_path, N=4, d=3)
        ckpt = tmp_path / "m.ckpt"
        save_checkpoint(init_params(4, 1, 2, seed=0), ckpt)
        assert main(["recall", "--model", str(ckpt), "--pairs", str(pairs_path)]) == 1


class TestSweep:
    def test_q_sweep_writes_table(self, tmp_path, capsys):
        out = tmp_path / "sw"
        code = main([
            "sweep", "--kind", "q", "--nw", "400", "--nv", "10",
            "--q-list", "2,4", "--sizes", "16", "--n-seeds", "1",
            "--max-epochs", "10", "--checkpoint-every", "5",
            "--learning-rate", "0.005", "--batch-size", "16",
            "--out", str(out), "--seed", "0",
        ])
        assert code == 0
        lines = (out / "sweep.csv").read_text().strip().splitlines()
        assert lines[0] == "q,m,N,seed,accuracy,stop_reason,epochs"
        assert len(lines) == 3


class TestMatch:
    def test_param_mode_table_row(self, capsys):
        assert main(["match", "--mode", "param", "--nw", "800000",
                     "--nv", "400", "--q", "4"]) == 0
        out = capsys.readouterr().out
        assert "gm_m=500" in out
        assert "gb_mprime=1000" in out

    def test_capacity_mode(self, capsys):
        assert main(["match", "--mode", "capacity", "--n", "400",
                     "--m", "500", "--q", "4"]) == 0
        assert "gb_mprime=1000" in capsys.readouterr().out

    def test_capacity_q1_usage_error(self):
        assert main(["match", "--mode", "capacity", "--n", "4", "--m", "5", "--q", "1"]) == 1


class TestInspect:
    def test_exact_block_matches_oracle(self, tmp_path, capsys):
        p = random_model(np.random.default_rng(1), n=2, m=1, q=3)
        ckpt = tmp_path / "m.ckpt"
        save_checkpoint(p, ckpt)
        assert main(["inspect", "--model", str(ckpt), "--exact"]) == 0
        out = capsys.readouterr().out
        assert "n 2 m 1 q 3" in out
        logz = float(next(l for l in out.splitlines() if l.startswith("log_partition")).split()[1])
        assert logz == pytest.approx(exact_summary(p).log_partition, abs=1e-9)
        assert "energy_autocorr_lag1" in out

    def test_exact_refused_beyond_cap(self, tmp_path):
        p = init_params(2, 8, 4, seed=0)        # 4^8 = 65536 codes
        ckpt = tmp_path / "m.ckpt"
        save_checkpoint(p, ckpt)
        assert main(["inspect", "--model", str(ckpt), "--exact",
                     "--max-codes", "1000"]) == 1

    def test_dims_echo_header(self, tmp_path, capsys):
        p = init_params(5, 3, 2, seed=0)
        ckpt = tmp_path / "m.ckpt"
        save_checkpoint(p, ckpt)
        assert main(["inspect", "--model", str(ckpt)]) == 0
        assert "n 5 m 3 q 2 sigma2 absent" in capsys.readouterr().out


class TestConfigFile:
    def test_config_supplies_values_flags_override(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("mode = capacity\nn = 400\nm = 500\nq = 2\n")
        assert main(["match", "--config", str(cfg), "--q", "4"]) == 0
        assert "gb_mprime=1000" in capsys.readouterr().out   # q=4 from flag wins

    def test_unknown_key_rejected(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("learning_rte = 0.1\n")
        assert main(["match", "--config", str(cfg), "--mode", "capacity",
                     "--n", "4", "--m", "5", "--q", "2"]) == 1

    def test_comments_and_blank_lines_ok(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# sizing\n\nmode = capacity\nn = 10\nm = 3\nq = 4  # four states\n")
        assert main(["match", "--config", str(cfg)]) == 0
        assert "gb_mprime=6" in capsys.readouterr().out


class TestUsageErrors:
    def test_unknown_flag_exits_1(self):
        assert main(["match", "--modee", "capacity"]) == 1

    def test_unknown_subcommand_exits_1(self):
        assert main(["transmogrify"]) == 1

    def test_missing_required_setting(self):
        assert main(["match", "--mode", "capacity", "--n", "4", "--m", "5"]) == 1
