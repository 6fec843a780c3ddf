"""Benchmark harness: config surface, short runs, CSV emission, CLI."""

import csv

import pytest

from hyaline import SCHEME_NAMES
from hyaline.bench import (
    CSV_COLUMNS,
    BenchConfig,
    _resolve_slots,
    emit_csv,
    run,
)
from hyaline.cli import main as cli_main


class TestConfigSurface:
    def test_defaults(self):
        cfg = BenchConfig()
        assert cfg.scheme == "hyaline"
        assert cfg.structure == "hashmap"
        assert cfg.workload == "write"
        assert cfg.threads == 8
        assert cfg.duration == 10.0
        assert cfg.seed == 1

    def test_slot_resolution_rounds_to_power_of_two(self):
        assert _resolve_slots(BenchConfig(threads=6)) == 8
        assert _resolve_slots(BenchConfig(threads=8)) == 8
        assert _resolve_slots(BenchConfig(threads=1000)) == 128  # capped
        assert _resolve_slots(BenchConfig(threads=4, slots=2)) == 2

    def test_dedicated_scheme_rejects_too_few_slots(self):
        with pytest.raises(ValueError):
            _resolve_slots(BenchConfig(scheme="hyaline1", threads=8, slots=4))

    def test_unknown_structure_and_workload_rejected(self):
        with pytest.raises(ValueError):
            run(BenchConfig(structure="tree"))
        with pytest.raises(ValueError):
            run(BenchConfig(workload="scan"))


def short_cfg(**kw):
    kw.setdefault("threads", 2)
    kw.setdefault("duration", 0.3)
    kw.setdefault("prefill", 200)
    kw.setdefault("key_range", 400)
    kw.setdefault("batch_min", 8)
    kw.setdefault("buckets", 64)
    return BenchConfig(**kw)


class TestShortRuns:
    @pytest.mark.parametrize("scheme", SCHEME_NAMES)
    def test_every_scheme_completes_cleanly(self, scheme):
        rec = run(short_cfg(scheme=scheme))
        assert rec.abort is None
        assert rec.ops_total > 0
        assert rec.throughput > 0

    def test_none_scheme_never_frees(self):
        rec = run(short_cfg(scheme="none"))
        assert sum(rec.frees_by_thread.values()) == 0
        assert rec.unreclaimed_final > 0

    def test_hyaline_settles_after_finalize(self):
        rec = run(short_cfg(scheme="hyaline"))
        assert rec.unreclaimed_final == 0

    def test_read_workload_still_retires(self):
        rec = run(short_cfg(scheme="hyaline", workload="read", duration=0.5))
        assert sum(rec.frees_by_thread.values()) > 0

    def test_balanced_workload_reports_reader_fraction(self):
        rec = run(short_cfg(scheme="hyaline", workload="balanced", threads=4,
                            duration=0.5))
        assert 0.0 <= rec.reader_free_fraction <= 1.0

    def test_stalled_worker_recorded(self):
        rec = run(short_cfg(scheme="hyaline-s", stall=1, threads=3))
        assert len(rec.stalled_slots) == 1
        assert rec.abort is None

    def test_series_supports_time_lookup(self):
        rec = run(short_cfg(duration=0.2))
        assert rec.unreclaimed_at(0.0) == rec.unreclaimed_series[0][1]
        assert rec.unreclaimed_at(1e9) == rec.unreclaimed_series[-1][1]


class TestCsv:
    def test_header_then_rows(self, tmp_path):
        path = tmp_path / "out.csv"
        rec = run(short_cfg(duration=0.2))
        emit_csv([rec], path)
        emit_csv([rec], path)  # appending must not repeat the header
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == list(CSV_COLUMNS)
        assert len(rows) == 3
        for row in rows[1:]:
            assert len(row) == len(CSV_COLUMNS)
            assert row[0] == "hyaline"
            assert int(row[3]) == 2  # threads

    def test_round_trip_types(self, tmp_path):
        path = tmp_path / "out.csv"
        rec = run(short_cfg(duration=0.2))
        emit_csv([rec], path)
        with open(path, newline="") as fh:
            row = next(csv.DictReader(fh))
        assert row["scheme"] == rec.config.scheme
        assert int(row["ops_total"]) == rec.ops_total
        assert float(row["throughput_ops_s"]) == pytest.approx(
            rec.throughput, abs=0.01)
        assert int(row["unreclaimed_final"]) == rec.unreclaimed_final
        assert int(row["seed"]) == rec.config.seed


class TestCli:
    def test_bench_subcommand_runs_and_writes_csv(self, tmp_path, capsys):
        path = tmp_path / "cli.csv"
        code = cli_main([
            "bench", "--scheme", "hyaline", "--ds", "hashmap",
            "--workload", "write", "--threads", "2", "--duration", "0.2",
            "--prefill", "100", "--key-range", "200", "--batch-min", "8",
            "--csv", str(path),
        ])
        assert code == 0
        out = capsys.readouterr().out
        assert "hyaline" in out
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == list(CSV_COLUMNS)
        assert len(rows) == 2

    def test_oracle_subcommand_pass_and_fail(self, capsys):
        assert cli_main(["oracle", "--variant", "hyaline", "--threads", "2",
                         "--slots", "1", "--batches", "1"]) == 0
        assert "pass" in capsys.readouterr().out
        assert cli_main(["oracle", "--variant", "hyaline", "--threads", "2",
                         "--slots", "2", "--batches", "1",
                         "--bug", "skip-empty-adjs"]) == 1
        assert "FAIL" in capsys.readouterr().out
