"""
Tests for histotest.report.
"""

import json

from histotest.report import (
    CSV_COLUMNS,
    CheckReport,
    CheckResult,
    ExperimentReport,
    ReportRow,
)


def _row(trial, sweep_value=None):
    return ReportRow(
        trial=trial, seed=trial, verdict='accept',
        samples_divide=1, samples_sieve=2, samples_mass=3, samples_test=4, samples_total=10,
        wall_ms=1.5, sweep_value=sweep_value, descriptors={'reason': 'accepted'},
    )


class TestCheckReport:
    """Tests for CheckReport."""

    def test_failed_result_fails_report(self):
        report = CheckReport(title="Hard pair")
        report.add_result(CheckResult.from_tuple("Moments", (True, [], ["note"])))
        report.add_result(CheckResult.from_tuple("Shape", (False, ["too few pairs"], [])))
        assert not report.overall_passed
        assert report.get_total_errors() == 1
        assert report.get_total_warnings() == 1

    def test_format_text(self):
        report = CheckReport(title="Hard pair")
        report.add_result(CheckResult("Moments", True))
        text = report.format_text()
        assert "Hard pair" in text
        assert "PASSED" in text
        assert "\033[" not in text
        assert "\033[" in report.format_text(colored=True)

    def test_to_dict(self):
        report = CheckReport(title="Hard pair")
        report.add_result(CheckResult("Moments", False, ["bad"]))
        data = report.to_dict()
        assert data['summary']['total_checks'] == 1
        assert data['summary']['checks_passed'] == 0
        assert data['results'][0]['errors'] == ['bad']


class TestExperimentReport:
    """Tests for ExperimentReport."""

    def test_header_only(self):
        report = ExperimentReport(config={'mode': 'test'})
        assert report.to_csv() == ",".join(CSV_COLUMNS) + "\n"

    def test_rows(self):
        report = ExperimentReport(config={'mode': 'test'}, rows=[_row(0), _row(1)])
        lines = report.to_csv().splitlines()
        assert len(lines) == 3
        assert lines[1] == "0,0,accept,1,2,3,4,10,1.500"

    def test_timing_off_leaves_wall_ms_empty(self):
        report = ExperimentReport(config={'mode': 'test'}, rows=[_row(0)], timing=False)
        assert report.to_csv().splitlines()[1].endswith(",10,")

    def test_bench_columns(self):
        report = ExperimentReport(config={'mode': 'bench', 'sweep_param': 'eps'}, rows=[_row(0, 0.25)])
        assert report.columns()[0] == 'sweep_value'
        assert report.to_csv().splitlines()[1].startswith("0.25,0,0,accept")

    def test_json(self):
        report = ExperimentReport(config={'mode': 'test', 'n': 8}, rows=[_row(0)], summary={'trials': 1})
        data = json.loads(report.to_json())
        assert data['schema_version'] == 1
        assert data['config']['n'] == 8
        assert data['rows'][0]['descriptors'] == {'reason': 'accepted'}

    def test_write(self, tmp_path):
        report = ExperimentReport(config={'mode': 'test'}, rows=[_row(0)])
        csv_path, json_path = report.write(str(tmp_path / 'out' / 'run'))
        assert csv_path.read_text(encoding='utf-8') == report.to_csv()
        assert json.loads(json_path.read_text(encoding='utf-8'))['rows'][0]['trial'] == 0

    def test_format_text(self):
        report = ExperimentReport(config={'mode': 'test'}, rows=[_row(0)], summary={'trials': 1, 'reasons': {'accepted': 1}})
        text = report.format_text()
        assert "mode: test" in text
        assert "  accepted: 1" in text
