import json
import time

import pytest
import torch

from corn_harness.data import load_rnli
from corn_harness.model import ENCODER_PRESETS, Encoder
from corn_harness.train import TrainConfig, TrainResult, compute_prototypes, train
from corn_harness.vocab import Vocab

from toyrnli import write_toy_rnli


@pytest.fixture(scope="module")
def toy_paths(tmp_path_factory):
    directory = tmp_path_factory.mktemp("toy")
    train_path = write_toy_rnli(directory / "rnli.train.jsonl", n=100, seed=0)
    valid_path = write_toy_rnli(directory / "rnli.valid.jsonl", n=30, seed=1)
    return train_path, valid_path


@pytest.fixture(scope="module")
def smoke_run(toy_paths, tmp_path_factory) -> TrainResult:
    train_path, valid_path = toy_paths
    out = tmp_path_factory.mktemp("ckpt")
    # full-batch steps keep per-step losses comparable for the monotone check
    cfg = TrainConfig(
        encoder="mini",
        temperature=0.1,
        batch_size=100,
        learning_rate=1e-5,
        epochs=12,
        patience=12,
        max_len=64,
        seed=5,
    )
    started = time.time()
    result = train(train_path, valid_path, out, cfg)
    result.elapsed = time.time() - started
    return result


class TestToyTrainingSmoke:
    def test_loss_decreases_over_first_ten_logged_steps(self, smoke_run):
        losses = smoke_run.step_losses[:10]
        assert len(losses) == 10
        violations = sum(1 for a, b in zip(losses, losses[1:]) if b >= a)
        assert violations <= 1, losses

    def test_runs_well_under_cpu_budget(self, smoke_run):
        assert smoke_run.elapsed < 300  # 5 minute budget

    def test_checkpoint_layout(self, smoke_run):
        out = smoke_run.checkpoint_dir
        for name in ("model.pt", "prototypes.pt", "vocab.json", "config.json", "log.jsonl"):
            assert (out / name).exists(), name
        config = json.loads((out / "config.json").read_text())
        assert config["loss"] == "scl"
        assert config["temperature"] == 0.1
        log_lines = [json.loads(l) for l in (out / "log.jsonl").read_text().splitlines()]
        assert sum(1 for l in log_lines if "loss" in l) >= 10
        assert any("valid_loss" in l for l in log_lines)

    def test_prototypes_shape_and_finite(self, smoke_run):
        prototypes = torch.load(
            smoke_run.checkpoint_dir / "prototypes.pt", weights_only=True
        )
        assert prototypes.shape == (3, ENCODER_PRESETS["mini"].d_model)
        assert torch.isfinite(prototypes).all()


class TestTrainingMechanics:
    def test_corrupt_records_skipped_with_count(self, tmp_path):
        path = tmp_path / "dirty.jsonl"
        good = '{"premise": "a b", "hypothesis": "c", "label": "neutral"}'
        path.write_text(
            good + "\n"
            + "not json at all\n"
            + '{"premise": "x", "hypothesis": "y", "label": "nope"}\n'
            + '{"premise": "x", "hypothesis": "y"}\n'
            + good + "\n"
        )
        records, skipped = load_rnli(path)
        assert len(records) == 2
        assert skipped == 3

    def test_ce_ablation_trains_and_saves_head(self, toy_paths, tmp_path):
        train_path, valid_path = toy_paths
        cfg = TrainConfig(
            encoder="tiny", loss="ce", batch_size=25, epochs=2, patience=2,
            max_len=64, seed=2,
        )
        result = train(train_path, valid_path, tmp_path / "ce", cfg)
        assert (result.checkpoint_dir / "head.pt").exists()

    def test_early_termination(self, toy_paths, tmp_path):
        train_path, valid_path = toy_paths
        # lr=0 never improves validation: patience trips after epoch patience+1
        cfg = TrainConfig(
            encoder="tiny", batch_size=50, epochs=10, patience=1, max_len=64,
            learning_rate=1e-30, seed=3,
        )
        result = train(train_path, valid_path, tmp_path / "stop", cfg)
        assert len(result.valid_losses) <= 3

    def test_bad_config_rejected(self):
        with pytest.raises(ValueError):
            TrainConfig(encoder="bart-large")
        with pytest.raises(ValueError):
            TrainConfig(loss="hinge")
        with pytest.raises(ValueError):
            TrainConfig(temperature=0.0)

    def test_prototypes_are_class_means(self, tmp_path):
        torch.manual_seed(0)
        vocab = Vocab.build(["[CLS] a [SEP] b [SEP]", "[CLS] c d [SEP] e [SEP]"])
        model = Encoder(len(vocab), ENCODER_PRESETS["tiny"], max_len=16)
        model.eval()
        encoded = [
            vocab.encode("[CLS] a [SEP] b [SEP]", 16),
            vocab.encode("[CLS] c d [SEP] e [SEP]", 16),
            vocab.encode("[CLS] a [SEP] e [SEP]", 16),
        ]
        labels = [0, 0, 2]
        prototypes = compute_prototypes(model, encoded, labels, batch_size=2)
        from corn_harness.model import pad_batch

        with torch.no_grad():
            z = model(pad_batch(encoded))
        assert torch.allclose(prototypes[0], (z[0] + z[1]) / 2, atol=1e-6)
        assert torch.allclose(prototypes[2], z[2], atol=1e-6)
        assert torch.equal(prototypes[1], torch.zeros_like(prototypes[1]))
