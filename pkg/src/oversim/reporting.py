"""Run manifests and CSV writers.

Every command writes a manifest before its results so interrupted runs are
identifiable; the manifest is rewritten with status=completed and timing
afterward.  All CSV numbers use 17 significant digits, so identical
(config, seed) runs produce byte-identical files.  Manifest lines starting
with "started_at=" or "elapsed_seconds=" are the only volatile ones.

Column orders (stable, relied on by tests):
- fit report:  accuracy, rho_<attr>..., F, n
- sweep:       grid_index, w_<attr>..., deviation, equivalent, failed
- degrade:     k, then per attr: change_mean_<attr>, change_std_<attr>,
               normalized_mean_<attr>, normalized_std_<attr>
- local:       strategy, then per attr: rho_mean_<attr>, rho_se_<attr>,
               then accuracy_mean, accuracy_se, replications
- robust/obs2: candidate, F_<policy j>..., min_F (ragged rows padded empty)
"""

from __future__ import annotations

import time
from datetime import datetime, timezone

from .experiments import DegradationCurve, StrategyTable, SweepResult
from .selection import CandidateSet, PolicySet
from .values import ValueReport

VOLATILE_PREFIXES = ("started_at=", "elapsed_seconds=")


def _g(v: float) -> str:
    return f"{float(v):.17g}"


class Manifest:
    """key=value run record; write() before results, complete() after."""

    def __init__(self, path, command: str, params: dict):
        self.path = path
        self.command = command
        self.params = dict(params)
        self.started = time.monotonic()
        self.started_at = datetime.now(timezone.utc).isoformat(timespec="seconds")

    def _lines(self, status: str, elapsed: float | None) -> list[str]:
        from . import __version__

        lines = [
            f"command={self.command}",
            f"status={status}",
            f"version={__version__}",
            f"started_at={self.started_at}",
        ]
        if elapsed is not None:
            lines.append(f"elapsed_seconds={elapsed:.3f}")
        for key in sorted(self.params):
            lines.append(f"{key}={self.params[key]}")
        return lines

    def _write(self, status: str, elapsed: float | None) -> None:
        with open(self.path, "w") as fh:
            fh.write("\n".join(self._lines(status, elapsed)) + "\n")

    def write(self) -> None:
        self._write("started", None)

    def complete(self) -> None:
        self._write("completed", time.monotonic() - self.started)


def write_value_report_csv(report: ValueReport, sensitive_names, path) -> None:
    header = ["accuracy", *(f"rho_{n}" for n in sensitive_names), "F", "n"]
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        fh.write(report.csv_row() + "\n")


def write_sweep_csv(result: SweepResult, path) -> None:
    failed = set(result.failed)
    equivalent = set(result.equivalent_set)
    header = ["grid_index", *(f"w_{n}" for n in result.sensitive_names),
              "deviation", "equivalent", "failed"]
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(result.grid.shape[0]):
            cells = [str(i), *(_g(v) for v in result.grid[i]),
                     _g(result.deviation[i]),
                     str(int(i in equivalent)), str(int(i in failed))]
            fh.write(",".join(cells) + "\n")


def write_degradation_csv(curve: DegradationCurve, path) -> None:
    header = ["k"]
    for name in curve.sensitive_names:
        header += [f"change_mean_{name}", f"change_std_{name}",
                   f"normalized_mean_{name}", f"normalized_std_{name}"]
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for ki, k in enumerate(curve.ks):
            cells = [str(k)]
            for li in range(len(curve.sensitive_names)):
                cells += [_g(curve.mean_change[li, ki]), _g(curve.std_change[li, ki]),
                          _g(curve.mean_normalized[li, ki]), _g(curve.std_normalized[li, ki])]
            fh.write(",".join(cells) + "\n")


def write_strategy_csv(table: StrategyTable, sensitive_names, path) -> None:
    header = ["strategy"]
    for name in sensitive_names:
        header += [f"rho_mean_{name}", f"rho_se_{name}"]
    header += ["accuracy_mean", "accuracy_se", "replications"]
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in table.rows:
            cells = [row.name]
            for mu, se in zip(row.rho_mean, row.rho_se):
                cells += [_g(mu), _g(se)]
            cells += [_g(row.accuracy_mean), _g(row.accuracy_se), str(table.replications)]
            fh.write(",".join(cells) + "\n")


def write_score_matrix_csv(cands: CandidateSet, matrix: list[list[float]], path) -> None:
    width = max(len(row) for row in matrix)
    header = ["candidate", *(f"F_policy_{j}" for j in range(width)), "min_F"]
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for (name, _), row in zip(cands.candidates, matrix):
            cells = [name, *(_g(v) for v in row), *[""] * (width - len(row)), _g(min(row))]
            fh.write(",".join(cells) + "\n")
