"""Exit codes and printed or written output for every subcommand."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from conftest import DATA_DIR, make_space
from diachron import __version__, cli
from diachron.embed.sgns import load_embeddings, save_embeddings

MINI = DATA_DIR / "mini"

TRAIN_FLAGS = [
    "--dim", "8",
    "--window", "2",
    "--negatives", "2",
    "--epochs", "2",
    "--min-count", "2",
    "--subsample", "1e-3",
    "--seed", "3",
]


@pytest.fixture(scope="module")
def corpus_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli") / "corpus"
    rc = cli.main(
        ["ingest", "--manifest", str(MINI / "manifest.csv"), "--out", str(out)]
    )
    assert rc == 0
    return out


@pytest.fixture(scope="module")
def spaces_dir(corpus_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("cli_spaces")
    for bucket in ("old", "new"):
        rc = cli.main(
            [
                "train",
                "--corpus", str(corpus_dir),
                "--bucket", bucket,
                "--out", str(out / f"{bucket}.vec"),
                *TRAIN_FLAGS,
            ]
        )
        assert rc == 0
    return out


def hand_space(bucket):
    return make_space(
        {
            "t_male": [1.0, 0.0],
            "t_female": [0.0, 1.0],
            "attr_m": [1.0, 0.0],
            "attr_f": [0.0, 1.0],
        },
        bucket=bucket,
    )


@pytest.fixture(scope="module")
def hand_weat(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli_weat")
    for bucket in ("old", "new"):
        save_embeddings(hand_space(bucket), root / f"{bucket}.vec")
    spec = {
        "name": "hand",
        "s1": ["t_male"],
        "s2": ["t_female"],
        "a1": ["attr_m"],
        "a2": ["attr_f"],
    }
    spec_path = root / "hand_spec.json"
    spec_path.write_text(json.dumps(spec))
    return root, spec_path


class TestTopLevel:
    def test_version(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["--version"])
        assert exc.value.code == 0
        assert capsys.readouterr().out.strip() == __version__

    def test_no_subcommand_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main([])
        assert exc.value.code == 2

    def test_unknown_flag_is_usage_error(self, corpus_dir):
        with pytest.raises(SystemExit) as exc:
            cli.main(["stats", "--corpus", str(corpus_dir), "--tempo", "fast"])
        assert exc.value.code == 2


class TestIngest:
    def test_bucket_summary(self, tmp_path, capsys):
        rc = cli.main(
            [
                "ingest",
                "--manifest", str(MINI / "manifest.csv"),
                "--out", str(tmp_path / "corpus"),
            ]
        )
        out = capsys.readouterr().out.splitlines()
        assert rc == 0
        assert [line.split(":")[0] for line in out] == [
            "old", "mid", "new", "unassigned",
        ]
        assert out[3] == "unassigned: 1 documents"
        assert (tmp_path / "corpus" / "corpus.json").exists()

    def test_custom_buckets(self, tmp_path, capsys):
        rc = cli.main(
            [
                "ingest",
                "--manifest", str(MINI / "manifest.csv"),
                "--out", str(tmp_path / "corpus"),
                "--buckets", '{"everything": [1900, 2100]}',
            ]
        )
        out = capsys.readouterr().out
        assert rc == 0
        assert out.startswith("everything: 31 documents")

    def test_malformed_buckets_json(self, tmp_path, capsys):
        rc = cli.main(
            [
                "ingest",
                "--manifest", str(MINI / "manifest.csv"),
                "--out", str(tmp_path / "corpus"),
                "--buckets", "{nope",
            ]
        )
        assert rc == 2
        assert "config error" in capsys.readouterr().err

    def test_missing_manifest(self, tmp_path, capsys):
        rc = cli.main(
            [
                "ingest",
                "--manifest", str(tmp_path / "absent.csv"),
                "--out", str(tmp_path / "corpus"),
            ]
        )
        assert rc == 2


class TestStats:
    def test_mpr_all_buckets(self, corpus_dir, capsys):
        rc = cli.main(
            ["stats", "--corpus", str(corpus_dir), "--metric", "mpr"]
        )
        out = capsys.readouterr().out.split()
        assert rc == 0
        assert out[:2] == ["mpr", "all"]
        assert float(out[2]) == 41.29032258064516

    def test_mpr_single_bucket_csv(self, corpus_dir, tmp_path, capsys):
        target = tmp_path / "mpr.csv"
        rc = cli.main(
            [
                "stats",
                "--corpus", str(corpus_dir),
                "--metric", "mpr",
                "--bucket", "old",
                "--out", str(target),
            ]
        )
        assert rc == 0
        assert "mpr old" in capsys.readouterr().out
        lines = target.read_text().splitlines()
        assert lines[0] == "bucket,he,him,she,her,mpr"
        assert lines[1] == "old,36,17,37,7,54.63917525773196"

    def test_mpr_unknown_bucket(self, corpus_dir, capsys):
        rc = cli.main(
            [
                "stats",
                "--corpus", str(corpus_dir),
                "--metric", "mpr",
                "--bucket", "medieval",
            ]
        )
        assert rc == 2
        assert "bucket" in capsys.readouterr().err

    def test_mbr_with_annotations(self, corpus_dir, tmp_path, capsys):
        target = tmp_path / "mbr.csv"
        rc = cli.main(
            [
                "stats",
                "--corpus", str(corpus_dir),
                "--metric", "mbr",
                "--births", str(DATA_DIR / "births.csv"),
                "--out", str(target),
            ]
        )
        out = capsys.readouterr().out.split()
        assert rc == 0
        assert float(out[2]) == 42.857142857142854
        assert target.read_text().splitlines()[1] == "all,3,4,2,42.857142857142854"

    def test_mentions_requires_gazetteer(self, corpus_dir, capsys):
        rc = cli.main(
            ["stats", "--corpus", str(corpus_dir), "--metric", "mentions"]
        )
        assert rc == 2
        assert "gazetteer" in capsys.readouterr().err

    def test_mentions_output(self, corpus_dir, tmp_path, capsys):
        target = tmp_path / "mentions.csv"
        rc = cli.main(
            [
                "stats",
                "--corpus", str(corpus_dir),
                "--metric", "mentions",
                "--gazetteer", str(DATA_DIR / "gazetteer.csv"),
                "--level", "token",
                "--out", str(target),
            ]
        )
        out = capsys.readouterr().out
        assert rc == 0
        assert out.strip()
        for line in out.splitlines():
            fields = line.split()
            assert fields[0] in ("old", "mid", "new", "all")
            assert fields[1] in ("city", "state")
            assert int(fields[-1]) >= 0
        assert target.read_text().splitlines()[0] == "bucket,kind,place,count"

    def test_surnames_doctor_only(self, corpus_dir, tmp_path, capsys):
        target = tmp_path / "surnames.csv"
        rc = cli.main(
            [
                "stats",
                "--corpus", str(corpus_dir),
                "--metric", "surnames",
                "--doctor-only",
                "--out", str(target),
            ]
        )
        assert rc == 0
        lines = target.read_text().splitlines()
        assert lines[0] == "pattern,surname,count"
        assert all(line.startswith("doctor,") for line in lines[1:])

    def test_religion_distribution(self, corpus_dir, capsys):
        rc = cli.main(
            [
                "stats",
                "--corpus", str(corpus_dir),
                "--metric", "religion",
                "--religion-map", str(DATA_DIR / "religion_map.csv"),
            ]
        )
        out = capsys.readouterr().out.splitlines()
        assert rc == 0
        assert out[-1].startswith("coverage ")
        shares = [float(line.split()[1]) for line in out[:-1]]
        assert abs(sum(shares) - 100.0) < 1e-9

    def test_amounts(self, corpus_dir, tmp_path, capsys):
        target = tmp_path / "amounts.csv"
        rc = cli.main(
            [
                "stats",
                "--corpus", str(corpus_dir),
                "--metric", "amounts",
                "--text", str(DATA_DIR / "amounts.txt"),
                "--out", str(target),
            ]
        )
        out = capsys.readouterr().out.splitlines()
        assert rc == 0
        parsed = [(int(a), float(b)) for a, b in (line.split() for line in out)]
        assert parsed == [
            (1, 200000.0),
            (2, 200000.0),
            (3, 50000.0),
            (5, 3500000.0),
        ]
        assert target.read_text().splitlines()[0] == "line,amount"

    def test_amounts_requires_text(self, corpus_dir, capsys):
        rc = cli.main(
            ["stats", "--corpus", str(corpus_dir), "--metric", "amounts"]
        )
        assert rc == 2


class TestTrain:
    def test_writes_loadable_space(self, spaces_dir, capsys):
        space = load_embeddings(spaces_dir / "old.vec")
        assert space.dim == 8
        assert space.bucket == "old"
        assert space.training_config["seed"] == 3

    def test_reports_kernel(self, corpus_dir, tmp_path, capsys):
        rc = cli.main(
            [
                "train",
                "--corpus", str(corpus_dir),
                "--bucket", "old",
                "--out", str(tmp_path / "old.vec"),
                "--kernel", "numpy",
                *TRAIN_FLAGS,
            ]
        )
        out = capsys.readouterr().out
        assert rc == 0
        assert "(numpy kernel)" in out
        assert out.startswith("trained ")

    def test_seed_env_override(self, corpus_dir, tmp_path, monkeypatch):
        monkeypatch.setenv("DIACHRON_SEED", "77")
        rc = cli.main(
            [
                "train",
                "--corpus", str(corpus_dir),
                "--bucket", "new",
                "--out", str(tmp_path / "new.vec"),
                *TRAIN_FLAGS,
            ]
        )
        assert rc == 0
        space = load_embeddings(tmp_path / "new.vec")
        assert space.training_config["seed"] == 77

    def test_unknown_bucket(self, corpus_dir, tmp_path, capsys):
        rc = cli.main(
            [
                "train",
                "--corpus", str(corpus_dir),
                "--bucket", "medieval",
                "--out", str(tmp_path / "x.vec"),
            ]
        )
        assert rc == 2


class TestAlign:
    def test_align_and_apply(self, spaces_dir, tmp_path, capsys):
        rotated = tmp_path / "old_in_new.vec"
        rc = cli.main(
            [
                "align",
                "--source", str(spaces_dir / "old.vec"),
                "--target", str(spaces_dir / "new.vec"),
                "--out", str(tmp_path / "old_to_new.json"),
                "--apply", str(rotated),
            ]
        )
        out = capsys.readouterr().out
        assert rc == 0
        assert "aligned old -> new" in out
        assert "residual" in out
        payload = json.loads((tmp_path / "old_to_new.json").read_text())
        rotation = np.array(payload["rotation"])
        np.testing.assert_allclose(
            rotation @ rotation.T, np.eye(8), atol=1e-8
        )
        applied = load_embeddings(rotated)
        assert applied.dim == 8

    def test_disjoint_vocabularies_fail(self, tmp_path, capsys):
        save_embeddings(
            make_space({"aa": [1.0, 0.0], "bb": [0.0, 1.0]}),
            tmp_path / "one.vec",
        )
        save_embeddings(
            make_space({"cc": [1.0, 0.0], "dd": [0.0, 1.0]}),
            tmp_path / "two.vec",
        )
        rc = cli.main(
            [
                "align",
                "--source", str(tmp_path / "one.vec"),
                "--target", str(tmp_path / "two.vec"),
                "--out", str(tmp_path / "a.json"),
            ]
        )
        assert rc == 1
        assert "error" in capsys.readouterr().err


class TestNeighbors:
    def test_explicit_spaces(self, spaces_dir, tmp_path, capsys):
        csv_path = tmp_path / "n.csv"
        json_path = tmp_path / "n.json"
        rc = cli.main(
            [
                "neighbors",
                "--space", str(spaces_dir / "old.vec"),
                "--space", str(spaces_dir / "new.vec"),
                "--token", "she",
                "--n", "3",
                "--out", str(csv_path),
                "--json", str(json_path),
            ]
        )
        out = capsys.readouterr().out.splitlines()
        assert rc == 0
        assert out
        for line in out:
            bucket, rank, _, sim = line.split()
            assert bucket in ("old", "new")
            assert 1 <= int(rank) <= 3
            float(sim)
        header = csv_path.read_text().splitlines()[0]
        assert header == "bucket,rank,token,similarity"
        payload = json.loads(json_path.read_text())
        assert payload["query"] == "she"

    def test_spaces_dir_discovery(self, spaces_dir, capsys):
        rc = cli.main(
            [
                "neighbors",
                "--spaces-dir", str(spaces_dir),
                "--all-buckets",
                "--token", "she",
                "--n", "2",
            ]
        )
        out = capsys.readouterr().out.splitlines()
        assert rc == 0
        assert {line.split()[0] for line in out} == {"old", "new"}

    def test_all_buckets_needs_spaces_dir(self, capsys):
        rc = cli.main(["neighbors", "--all-buckets", "--token", "she"])
        assert rc == 2

    def test_no_spaces_given(self, capsys):
        rc = cli.main(["neighbors", "--token", "she"])
        assert rc == 2

    def test_token_in_no_space(self, spaces_dir, capsys):
        rc = cli.main(
            [
                "neighbors",
                "--space", str(spaces_dir / "old.vec"),
                "--token", "zzzzqqq",
            ]
        )
        assert rc == 1
        assert "error" in capsys.readouterr().err


class TestWeat:
    def test_builtin_spec_on_trained_spaces(self, spaces_dir, capsys):
        rc = cli.main(
            [
                "weat",
                "--space", str(spaces_dir / "old.vec"),
                "--space", str(spaces_dir / "new.vec"),
                "--builtin", "gender-occupations",
            ]
        )
        out = capsys.readouterr().out
        assert rc == 0
        assert "mean " in out

    def test_custom_spec_exact_effect(self, hand_weat, tmp_path, capsys):
        root, spec_path = hand_weat
        csv_path = tmp_path / "w.csv"
        json_path = tmp_path / "w.json"
        rc = cli.main(
            [
                "weat",
                "--space", str(root / "old.vec"),
                "--space", str(root / "new.vec"),
                "--spec", str(spec_path),
                "--out", str(csv_path),
                "--json", str(json_path),
            ]
        )
        out = capsys.readouterr().out.splitlines()
        assert rc == 0
        assert len(out) == 3
        for line in out[:2]:
            assert abs(float(line.split()[1]) - 2.0) < 1e-12
        assert out[2].startswith("mean ")
        assert csv_path.exists()
        payload = json.loads(json_path.read_text())
        assert abs(payload["mean_effect_size"] - 2.0) < 1e-12
        assert [row["space"] for row in payload["rows"]] == ["old", "new"]

    def test_spec_and_builtin_conflict(self, hand_weat, capsys):
        root, spec_path = hand_weat
        rc = cli.main(
            [
                "weat",
                "--space", str(root / "old.vec"),
                "--spec", str(spec_path),
                "--builtin", "gender-occupations",
            ]
        )
        assert rc == 2

    def test_all_rows_failing(self, tmp_path, capsys):
        save_embeddings(
            make_space({"xx": [1.0, 0.0], "yy": [0.0, 1.0]}),
            tmp_path / "bare.vec",
        )
        rc = cli.main(
            ["weat", "--space", str(tmp_path / "bare.vec"), "--builtin",
             "gender-occupations"]
        )
        out = capsys.readouterr().out
        assert rc == 1
        assert "failed:" in out


class TestReport:
    def write_config(self, tmp_path, **overrides):
        payload = {
            "manifest": str(MINI / "manifest.csv"),
            "output_dir": str(tmp_path / "out"),
            "valence_lexicon": str(DATA_DIR / "test_valence.csv"),
            "gazetteer": str(DATA_DIR / "gazetteer.csv"),
            "religion_map": str(DATA_DIR / "religion_map.csv"),
            "birth_annotations": str(DATA_DIR / "births.csv"),
            "amounts_text": str(DATA_DIR / "amounts.txt"),
            "sgns": {
                "dim": 16,
                "window": 4,
                "negatives": 3,
                "epochs": 2,
                "min_count": 2,
                "subsample_t": 1e-3,
                "seed": 1,
            },
            "query_tokens": ["he"],
            "neighbors_n": 3,
        }
        payload.update(overrides)
        path = tmp_path / "run.json"
        path.write_text(json.dumps(payload))
        return path

    def test_full_run(self, tmp_path, capsys):
        rc = cli.main(["report", "--config", str(self.write_config(tmp_path))])
        captured = capsys.readouterr()
        assert rc == 0
        assert "report: " in captured.out
        assert "ingest: " in captured.out
        assert "warning: film pre_01" in captured.err
        assert (tmp_path / "out" / "run_report.json").exists()

    def test_failed_stage(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("film_id,year\nf1,1960\n")
        rc = cli.main(
            ["report", "--config", str(self.write_config(tmp_path, manifest=str(bad)))]
        )
        captured = capsys.readouterr()
        assert rc == 1
        assert "failed at stage ingest" in captured.err

    def test_incomplete_config(self, tmp_path, capsys):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"output_dir": str(tmp_path / "out")}))
        rc = cli.main(["report", "--config", str(path)])
        assert rc == 2
        assert "config error" in capsys.readouterr().err

    def test_missing_config_file(self, tmp_path, capsys):
        rc = cli.main(["report", "--config", str(tmp_path / "absent.json")])
        assert rc == 2
