"""
Report generation for histotest.

Per-trial rows go to CSV (the stable contract) and JSON (rows plus the
resolved configuration); diagnostic checks are aggregated into a text or
colored report.
"""

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

logger = logging.getLogger(__name__)

REPORT_SCHEMA_VERSION = 1

CSV_COLUMNS = (
    'trial', 'seed', 'verdict',
    'samples_divide', 'samples_sieve', 'samples_mass', 'samples_test',
    'samples_total', 'wall_ms',
)


@dataclass
class CheckResult:
    """Results from a diagnostic check."""
    check_name: str
    passed: bool
    errors: List[str] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    @classmethod
    def from_tuple(cls, check_name: str, outcome: Tuple[bool, List[str], List[str]]) -> 'CheckResult':
        passed, errors, warnings = outcome
        return cls(check_name, passed, list(errors), list(warnings))


@dataclass
class CheckReport:
    """Aggregated diagnostic checks."""
    title: str
    overall_passed: bool = True
    results: List[CheckResult] = field(default_factory=list)

    def add_result(self, result: CheckResult):
        self.results.append(result)
        if not result.passed:
            self.overall_passed = False

    def get_total_errors(self) -> int:
        return sum(len(r.errors) for r in self.results)

    def get_total_warnings(self) -> int:
        return sum(len(r.warnings) for r in self.results)

    def format_text(self, colored: bool = False) -> str:
        """Format report as plain text, optionally with ANSI colors."""
        if colored:
            reset, red, green, yellow, bold = "\033[0m", "\033[31m", "\033[32m", "\033[33m", "\033[1m"
        else:
            reset = red = green = yellow = bold = ""

        lines = [bold + "=" * 70 + reset, bold + self.title + reset, bold + "=" * 70 + reset, ""]
        if self.overall_passed:
            status = f"{green}{bold}✓ PASSED{reset}"
        else:
            status = f"{red}{bold}✗ FAILED{reset}"
        lines.append(f"Overall Status: {status}")
        lines.append(f"Total Errors: {self.get_total_errors()}")
        lines.append(f"Total Warnings: {self.get_total_warnings()}")
        lines.append("")

        for result in self.results:
            icon = f"{green}✓{reset}" if result.passed else f"{red}✗{reset}"
            lines.append(f"{icon} {result.check_name}")
            for error in result.errors:
                lines.append(f"    {red}- {error}{reset}")
            for warning in result.warnings:
                lines.append(f"    {yellow}! {warning}{reset}")
        lines.append(bold + "=" * 70 + reset)
        return "\n".join(lines)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'title': self.title,
            'overall_passed': self.overall_passed,
            'summary': {
                'total_errors': self.get_total_errors(),
                'total_warnings': self.get_total_warnings(),
                'total_checks': len(self.results),
                'checks_passed': sum(1 for r in self.results if r.passed),
            },
            'results': [
                {'check_name': r.check_name, 'passed': r.passed, 'errors': r.errors, 'warnings': r.warnings}
                for r in self.results
            ],
        }


@dataclass
class ReportRow:
    """One trial."""
    trial: int
    seed: int
    verdict: str
    samples_divide: int = 0
    samples_sieve: int = 0
    samples_mass: int = 0
    samples_test: int = 0
    samples_total: int = 0
    wall_ms: float = 0.0
    sweep_value: Optional[float] = None
    descriptors: Dict[str, Any] = field(default_factory=dict)

    def csv_values(self, timing: bool = True) -> List[Any]:
        values = [
            self.trial, self.seed, self.verdict,
            self.samples_divide, self.samples_sieve, self.samples_mass, self.samples_test,
            self.samples_total,
            f"{self.wall_ms:.3f}" if timing else "",
        ]
        if self.sweep_value is not None:
            values.insert(0, repr(self.sweep_value))
        return values

    def to_dict(self) -> Dict[str, Any]:
        data = {column: getattr(self, column) for column in CSV_COLUMNS}
        if self.sweep_value is not None:
            data['sweep_value'] = self.sweep_value
        data['descriptors'] = self.descriptors
        return data


@dataclass
class ExperimentReport:
    """Rows of one run_experiment call plus summary and provenance."""
    config: Dict[str, Any]
    rows: List[ReportRow] = field(default_factory=list)
    summary: Dict[str, Any] = field(default_factory=dict)
    timing: bool = True

    @property
    def sweep_param(self) -> Optional[str]:
        return self.config.get('sweep_param') if self.config.get('mode') == 'bench' else None

    def columns(self) -> Tuple[str, ...]:
        return (('sweep_value',) if self.sweep_param else ()) + CSV_COLUMNS

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator='\n')
        writer.writerow(self.columns())
        for row in self.rows:
            writer.writerow(row.csv_values(self.timing))
        return buffer.getvalue()

    def to_dict(self) -> Dict[str, Any]:
        return {
            'schema_version': REPORT_SCHEMA_VERSION,
            'config': self.config,
            'summary': self.summary,
            'rows': [row.to_dict() for row in self.rows],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, default=str)

    def write(self, output: str) -> Tuple[Path, Path]:
        """Write <output>.csv and <output>.json."""
        base = Path(output)
        csv_path = base.with_suffix('.csv')
        json_path = base.with_suffix('.json')
        csv_path.parent.mkdir(parents=True, exist_ok=True)
        csv_path.write_text(self.to_csv(), encoding='utf-8')
        json_path.write_text(self.to_json(), encoding='utf-8')
        logger.info("Wrote %s and %s", csv_path, json_path)
        return csv_path, json_path

    def format_text(self) -> str:
        """Short human-readable summary."""
        lines = [f"mode: {self.config.get('mode')}  trials: {len(self.rows)}"]
        for key, value in self.summary.items():
            if isinstance(value, dict):
                lines.append(f"{key}:")
                for inner_key, inner_value in value.items():
                    lines.append(f"  {inner_key}: {inner_value}")
            else:
                lines.append(f"{key}: {value}")
        return "\n".join(lines)
