"""
Tests for histotest.cli module.
"""

import json
import sys

import pytest

from histotest import cli
from histotest.cli import main, parse_constants, parse_sweep
from histotest.report import CSV_COLUMNS

SMALL = ['--n', '8', '--k', '1', '--eps', '0.5', '--seed', '3', '--no-timing']


class TestParsers:
    """Tests for the flag parsers."""

    def test_parse_sweep(self):
        assert parse_sweep('eps=0.4,0.3') == {'param': 'eps', 'values': [0.4, 0.3]}

    @pytest.mark.parametrize("text", ['eps', 'bogus=1,2', 'n=a,b', 'k=', 'delta=0.1,0.2'])
    def test_parse_sweep_invalid(self, text):
        with pytest.raises(ValueError):
            parse_sweep(text)

    def test_parse_constants_casts(self):
        constants = parse_constants(['c_sieve=20', 'test_repetitions=5'])
        assert constants == {'c_sieve': 20.0, 'test_repetitions': 5}
        assert isinstance(constants['test_repetitions'], int)

    def test_parse_constants_unknown(self):
        with pytest.raises(ValueError, match="Unknown constant"):
            parse_constants(['c_bogus=1'])

    def test_parse_constants_bad_value(self):
        with pytest.raises(ValueError, match="expects"):
            parse_constants(['test_repetitions=two'])


class TestCLI:
    """Tests for CLI functionality."""

    def test_test_command_prints_csv(self, monkeypatch, capsys):
        """A small uniform run prints the CSV header and an accept row."""
        monkeypatch.setattr(sys, 'argv', ['histotest', 'test', *SMALL])
        exit_code = main()
        assert exit_code == 0
        out = capsys.readouterr().out
        lines = out.splitlines()
        assert lines[0] == ",".join(CSV_COLUMNS)
        assert lines[1].startswith("0,3,accept,")
        assert "accept_rate" in out

    def test_json_output(self, capsys):
        exit_code = main(['test', *SMALL, '--json'])
        assert exit_code == 0
        data = json.loads(capsys.readouterr().out)
        assert data['config']['n'] == 8
        assert data['rows'][0]['verdict'] == 'accept'

    def test_output_files(self, tmp_path, capsys):
        output = str(tmp_path / 'run')
        assert main(['test', *SMALL, '--trials', '0', '-o', output]) == 0
        assert (tmp_path / 'run.csv').read_text(encoding='utf-8') == ",".join(CSV_COLUMNS) + "\n"
        assert (tmp_path / 'run.json').exists()

    def test_gen_hard_writes_pair(self, tmp_path, capsys):
        out_path = tmp_path / 'pair.json'
        exit_code = main(['gen-hard', '--n', '1024', '--k', '4', '--eps', '0.1', '--no-color', '--out', str(out_path)])
        assert exit_code == 0
        assert 'PASSED' in capsys.readouterr().out
        data = json.loads(out_path.read_text(encoding='utf-8'))
        assert data['n'] == 1024
        assert len(data['H']) == 1024
        assert 'right_border_pairs' in data['diagnostics']

    def test_config_file(self, tmp_path, capsys):
        config = tmp_path / 'run.yaml'
        config.write_text("n: 8\nk: 1\neps: 0.5\ntrials: 0\n", encoding='utf-8')
        assert main(['test', '-c', str(config)]) == 0
        assert capsys.readouterr().out.startswith(",".join(CSV_COLUMNS))

    def test_missing_command(self, capsys):
        assert main([]) == 1

    def test_help(self, capsys):
        assert main(['--help']) == 0

    def test_invalid_eps(self, capsys):
        assert main(['test', '--eps', '1.5']) == 1
        assert 'eps' in capsys.readouterr().err

    def test_bench_requires_sweep(self, capsys):
        assert main(['bench', *SMALL]) == 1

    def test_bad_sweep(self, capsys):
        assert main(['bench', *SMALL, '--sweep', 'bogus=1']) == 1

    def test_unknown_constant(self, capsys):
        assert main(['test', *SMALL, '--constant', 'c_bogus=1']) == 1

    def test_invalid_config_file(self, tmp_path, capsys):
        config = tmp_path / 'run.yaml'
        config.write_text("bogus: 1\n", encoding='utf-8')
        assert main(['test', '-c', str(config)]) == 1

    def test_missing_instance_file(self, capsys):
        args = ['test', *SMALL, '--instance', 'file', '--instance-path', '/nonexistent/p.txt']
        assert main(args) == 1

    def test_runtime_error(self, monkeypatch, capsys):
        """Failures inside a run map to exit code 2."""
        def fail(config):
            raise RuntimeError("interval set mass too small")
        monkeypatch.setattr(cli, 'run_experiment', fail)
        assert main(['test', *SMALL]) == 2
        assert 'mass too small' in capsys.readouterr().err
