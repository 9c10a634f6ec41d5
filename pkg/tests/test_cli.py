import json

import numpy as np
import pytest

from _oracles import brute_force_split
from doublecheck.cli import main
from doublecheck.datapipe import NewsRecord, load_records, save_records

SMALL = ["--embed-dim", "8", "--hidden-dim", "8", "--seq-len", "48", "--epochs", "2",
         "--batch-size", "32", "--eval-every", "5"]


def run(capsys, *argv):
    status = main([str(a) for a in argv])
    return status, capsys.readouterr()


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    return tmp_path_factory.mktemp("cli")


@pytest.fixture(scope="module")
def corpus(workdir):
    path = workdir / "synth.csv"
    assert main(["synth", "--output", str(path), "--n", "300", "--seed", "5"]) == 0
    return path


@pytest.fixture(scope="module")
def curated(workdir, corpus):
    out = workdir / "curated"
    assert main(["curate", "--input", str(corpus), "--output", str(out), "--seed", "42"]) == 0
    return out


@pytest.fixture(scope="module")
def checkpoint(workdir, curated):
    ckpt = workdir / "model.npz"
    assert main(["train", "--input", str(curated), "--checkpoint", str(ckpt), "--seed", "42", *SMALL]) == 0
    return ckpt


@pytest.fixture
def fixture4(tmp_path):
    texts = ["新冠疫苗" * 10, "口罩" * 60, "核酸检测结果" * 30, "疫情" * 20]
    recs = [NewsRecord.create(id=str(i + 1), title="t", summary="s", text=t, label=i % 2)
            for i, t in enumerate(texts)]
    path = tmp_path / "four.csv"
    save_records(recs, path)
    return path


class TestExitCodes:
    def test_unknown_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["evaluate", "--bogus"])
        assert exc.value.code == 2
        assert "usage:" in capsys.readouterr().err

    def test_missing_subcommand(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 2

    def test_train_needs_validation_for_a_file(self, capsys, corpus, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["train", "--input", str(corpus), "--checkpoint", str(tmp_path / "m.npz")])
        assert exc.value.code == 2

    def test_missing_input_file(self, capsys, tmp_path):
        status, out = run(capsys, "stats", "--input", tmp_path / "absent.csv")
        assert status == 1
        assert "absent.csv" in out.err

    def test_malformed_records(self, capsys, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("id,title,summary,text,label,time\n1,a,b,c,7,\n", encoding="utf-8")
        status, out = run(capsys, "stats", "--input", bad)
        assert status == 1
        assert "bad.csv" in out.err

    def test_bad_checkpoint(self, capsys, fixture4, tmp_path):
        junk = tmp_path / "junk.npz"
        junk.write_bytes(b"not a zip")
        status, out = run(capsys, "evaluate", "--input", fixture4, "--checkpoint", junk)
        assert status == 1 and "junk.npz" in out.err

    def test_version(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["--version"])
        assert exc.value.code == 0


class TestSubcommands:
    def test_evaluate_is_deterministic(self, capsys, checkpoint, fixture4, tmp_path):
        outs = []
        for k in range(2):
            status, out = run(capsys, "evaluate", "--input", fixture4, "--checkpoint", checkpoint,
                              "--output", tmp_path / f"r{k}.json")
            assert status == 0
            outs.append((out.out, (tmp_path / f"r{k}.json").read_bytes()))
        assert outs[0] == outs[1]
        report = json.loads(outs[0][1])
        assert report["tp"] + report["fp"] + report["fn"] + report["tn"] == 4

    def test_pretest_matches_partition_oracle(self, capsys, checkpoint, curated, tmp_path):
        out_json = tmp_path / "pretest.json"
        status, _ = run(capsys, "pretest", "--input", curated / "test.csv", "--checkpoint", checkpoint,
                        "--boundary", "80", "--output", out_json)
        assert status == 0
        reports = json.loads(out_json.read_text(encoding="utf-8"))["reports"]
        assert [r["boundary"] for r in reports] == [80]

        records = load_records(curated / "test.csv")
        pred_path = tmp_path / "pred.jsonl"
        run(capsys, "predict", "--input", curated / "test.csv", "--checkpoint", checkpoint, "--output", pred_path)
        preds = [json.loads(line)["label"] for line in pred_path.read_text(encoding="utf-8").splitlines()]
        want = brute_force_split([r.char_length for r in records], [r.label for r in records], preds, 80)
        for side in ("short", "long"):
            got = reports[0][side]
            if got is None:
                assert sum(want[side].values()) == 0
            else:
                assert {k: got[k] for k in ("tp", "fp", "fn", "tn")} == want[side]

    def test_pretest_default_boundaries(self, capsys, checkpoint, fixture4):
        status, out = run(capsys, "pretest", "--input", fixture4, "--checkpoint", checkpoint)
        assert status == 0
        assert "80" in out.out and "100" in out.out

    def test_predict_output(self, capsys, checkpoint, fixture4):
        status, out = run(capsys, "predict", "--input", fixture4, "--checkpoint", checkpoint, "--top-spans", "2")
        assert status == 0
        rows = [json.loads(line) for line in out.out.splitlines()]
        assert [r["id"] for r in rows] == ["1", "2", "3", "4"]
        for r in rows:
            assert r["label"] in (0, 1)
            assert 0.0 <= r["fake_probability"] <= 1.0
            assert 1 <= len(r["spans"]) <= 2
            assert (r["label"] == 0) == (r["fake_probability"] >= 0.5)

    def test_train_log_header_echoes_settings(self, checkpoint):
        lines = open(f"{checkpoint}.log.tsv", encoding="utf-8").read().splitlines()
        assert lines[0].startswith("# started ")
        for token in ("lr=0.001", "batch_size=32", "epochs=2", "patience_batches=1000",
                      "optimizer=sgd", "seed=42", "seq_len=48", "dropout=0.5", "sigma=1.0"):
            assert token in lines[1].split(), token

    def test_default_train_flags(self):
        from doublecheck.cli import build_parser
        args = build_parser().parse_args(["train", "--input", "x", "--checkpoint", "y"])
        assert (args.lr, args.batch_size, args.epochs, args.patience) == (0.001, 128, 20, 1000)
        assert (args.dropout, args.sigma, args.mode, args.seed) == (0.5, 1.0, "full", 0)

    def test_stats_writes_files(self, capsys, corpus, tmp_path):
        status, out = run(capsys, "stats", "--input", corpus, "--output", tmp_path / "st")
        assert status == 0 and out.out
        data = json.loads((tmp_path / "st" / "stats.json").read_text(encoding="utf-8"))
        assert data
        assert (tmp_path / "st" / "boxplot.tsv").exists() and (tmp_path / "st" / "keywords.tsv").exists()

    def test_gradcheck(self, capsys):
        status, out = run(capsys, "gradcheck", "--seed", "3")
        assert status == 0
        assert out.out.splitlines()[-1].endswith("failed=0")

    def test_keyword_env_var(self, capsys, corpus, tmp_path, monkeypatch):
        kw = tmp_path / "kw.json"
        kw.write_text(json.dumps({"keywords": ["不存在的词"]}, ensure_ascii=False), encoding="utf-8")
        monkeypatch.setenv("DOUBLECHECK_KEYWORDS", str(kw))
        status, out = run(capsys, "curate", "--input", corpus, "--output", tmp_path / "c")
        assert status == 0
        assert "after_keyword_filter=0" in out.out


class TestReproducibility:
    def test_reruns_are_byte_identical(self, capsys, corpus, tmp_path):
        outputs = []
        for k in range(2):
            d = tmp_path / f"run{k}"
            run(capsys, "curate", "--input", corpus, "--output", d / "cur", "--seed", "42")
            status, train_out = run(capsys, "train", "--input", d / "cur", "--checkpoint", d / "m.npz",
                                    "--seed", "42", *SMALL)
            assert status == 0
            _, eval_out = run(capsys, "evaluate", "--input", d / "cur" / "test.csv", "--checkpoint", d / "m.npz")
            log = (d / "m.npz.log.tsv").read_text(encoding="utf-8").splitlines()
            files = {p.name: p.read_bytes() for p in sorted((d / "cur").iterdir())}
            outputs.append((files, train_out.out, eval_out.out, (d / "m.npz").read_bytes(), log[1:]))
        assert outputs[0] == outputs[1]

    def test_curate_is_idempotent(self, capsys, curated, tmp_path):
        again = tmp_path / "again"
        status, _ = run(capsys, "curate", "--input", curated / "curated.csv", "--output", again, "--seed", "42")
        assert status == 0
        assert (again / "curated.csv").read_bytes() == (curated / "curated.csv").read_bytes()
        for name in ("train.csv", "validation.csv", "test.csv"):
            assert (again / name).read_bytes() == (curated / name).read_bytes()
        assert (again / "dedup_audit.jsonl").read_text(encoding="utf-8") == ""

    def test_jsonl_round_trip(self, capsys, corpus, tmp_path):
        jl = tmp_path / "synth.jsonl"
        run(capsys, "synth", "--output", jl, "--n", "300", "--seed", "5")
        a, b = load_records(corpus), load_records(jl)
        assert a == b
        assert np.all([r.label in (0, 1) for r in a])
