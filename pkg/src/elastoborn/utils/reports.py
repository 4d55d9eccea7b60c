"""JSON run reports, the kernel-certificate CSV and the markdown summary table."""
from collections.abc import Sequence
import csv
import json
import logging
from pathlib import Path

from elastoborn.models import KernelReportModel, ReplayReportModel, RunReport, Status

logger = logging.getLogger(__name__)

REPORT_FILE = 'report.json'
KERNEL_CSV = 'kernel_certificate.csv'
SUMMARY_FILE = 'SUMMARY.md'

STATUS_EMOJI = {
    Status.PASS: '🟢',
    Status.FAIL: '🔴',
    Status.ERROR: '⚪',
}


def write_report(report: RunReport, output_dir: str | Path) -> Path:
    """Save a run report as report.json in the output directory."""
    output_path = Path(output_dir)
    output_path.mkdir(parents=True, exist_ok=True)

    report_file = output_path / REPORT_FILE
    with open(report_file, 'w') as f:
        json.dump(report.model_dump(mode='json'), f, indent=2, default=str)

    print(f"Results saved to {report_file}")
    return report_file


def read_report(path: str | Path) -> RunReport:
    with open(path, 'r') as f:
        return RunReport.model_validate(json.load(f))


def write_kernel_csv(
    certificate: KernelReportModel,
    replays: Sequence[ReplayReportModel],
    path: str | Path,
) -> Path:
    """One row per certificate sample; replay columns stay empty where no replay ran."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    by_xi = {tuple(r.xi): r for r in replays}
    step_count = max((len(r.steps) for r in replays), default=0)

    with open(path, 'w', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(['xi1', 'xi2', 'xi3', 'sigma_min', 'rows', *(f'step{i}' for i in range(1, step_count + 1))])
        for sample in certificate.samples:
            replay = by_xi.get(tuple(sample.xi))
            steps = [''] * step_count
            if replay is not None:
                steps = [f'{max(step.residuals):.6e}' for step in replay.steps]
            writer.writerow([*(f'{x:.17g}' for x in sample.xi), f'{sample.sigma_min:.6e}', sample.rows, *steps])

    logger.info('Wrote %d kernel samples to %s', len(certificate.samples), path)
    return path


def generate_summary_table(results_dir: str | Path) -> str:
    """Markdown table over every report.json below results_dir."""
    results_path = Path(results_dir)
    rows = []
    for report_file in sorted(results_path.rglob(REPORT_FILE)):
        try:
            report = read_report(report_file)
        except (OSError, ValueError) as e:
            logger.warning('Skipping unreadable report %s: %s', report_file, e)
            continue
        run = report_file.parent.relative_to(results_path).as_posix() or '.'
        rows.append((run, report))

    lines = [
        "# elastoborn runs",
        "",
        "| Run | Command | Status | Summary | Seconds |",
        "|-----|---------|--------|---------|---------|",
    ]

    for run, report in rows:
        elapsed = '' if report.elapsed_seconds is None else f'{report.elapsed_seconds:.1f}'
        lines.append(
            f"| [{run}]({run}/{REPORT_FILE}) | {report.command} | "
            f"{STATUS_EMOJI[report.status]} {report.status} | {report.message or ''} | {elapsed} |"
        )

    return "\n".join(lines)


def write_summary(results_dir: str | Path) -> Path:
    summary_file = Path(results_dir) / SUMMARY_FILE
    with open(summary_file, 'w') as f:
        f.write(generate_summary_table(results_dir))

    print(f"Generated {summary_file} with run summary")
    return summary_file
