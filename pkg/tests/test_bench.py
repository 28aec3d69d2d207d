import csv
import io
import json

import pytest

from fovea.bench import OP_NAMES, BenchReport, emit_report, render_report, run_benchmark
from fovea.errors import FixtureFailure, UnknownOp
from fovea.image import ImageSize


class TestRunBenchmark:
    def test_unknown_op(self):
        with pytest.raises(UnknownOp):
            run_benchmark("warp_affine", ImageSize(8, 8), 1)

    def test_single_iteration_degenerate_stats(self):
        r = run_benchmark("gray_from_rgb", ImageSize(32, 32), iterations=1, warmup=1)
        assert r.mean_ns == r.median_ns == r.p95_ns
        assert r.stddev_ns == 0.0

    def test_report_invariants(self):
        r = run_benchmark("flip_horizontal", ImageSize(64, 32), iterations=10, warmup=2)
        assert r.median_ns <= r.p95_ns
        assert r.mean_ns > 0 and r.median_ns > 0 and r.p95_ns > 0
        assert r.width == 64 and r.height == 32 and r.iterations == 10

    def test_throughput_consistent_with_timings(self):
        r = run_benchmark("gray_from_rgb", ImageSize(128, 128), iterations=25, warmup=2)
        # mean_ns * iterations == total time, so throughput must satisfy:
        expected = 128 * 128 * 25 / (r.mean_ns * 25 / 1e9) / 1e6
        assert r.throughput_megapixels_per_s == pytest.approx(expected, rel=1e-9)

    @pytest.mark.parametrize("op", OP_NAMES)
    def test_every_op_runs(self, op):
        r = run_benchmark(op, ImageSize(24, 16), iterations=2, warmup=1)
        assert r.op == op

    def test_work_scales_with_pixel_count(self):
        small = run_benchmark("gray_from_rgb", ImageSize(256, 256), iterations=30, warmup=3)
        big = run_benchmark("gray_from_rgb", ImageSize(512, 512), iterations=30, warmup=3)
        assert big.median_ns > small.median_ns

    def test_invalid_iteration_counts(self):
        with pytest.raises(FixtureFailure):
            run_benchmark("sobel", ImageSize(8, 8), iterations=0)
        with pytest.raises(FixtureFailure):
            run_benchmark("sobel", ImageSize(8, 8), iterations=1, warmup=-1)


class TestEmitReport:
    def sample(self) -> BenchReport:
        return run_benchmark("flip_horizontal", ImageSize(16, 16), iterations=3, warmup=1)

    def test_empty_json(self, capsys):
        emit_report([], "json")
        assert json.loads(capsys.readouterr().out) == []

    def test_json_round_trips(self):
        r = self.sample()
        back = json.loads(render_report([r], "json"))
        assert len(back) == 1
        assert back[0]["op"] == "flip_horizontal"
        assert set(back[0]) == set(BenchReport.__dataclass_fields__)

    def test_csv_row_count_and_header(self):
        rows = list(csv.reader(io.StringIO(render_report([self.sample(), self.sample()], "csv"))))
        assert len(rows) == 3
        assert rows[0] == list(BenchReport.__dataclass_fields__)

    def test_write_to_path(self, tmp_path):
        out = tmp_path / "report.json"
        emit_report([self.sample()], "json", out)
        assert json.loads(out.read_text())[0]["iterations"] == 3

    def test_fixtures_are_seeded_identically(self):
        from fovea.synth import seeded_u8_image

        a = seeded_u8_image(32, 16, 3, seed=11).as_array()
        b = seeded_u8_image(32, 16, 3, seed=11).as_array()
        assert (a == b).all()
