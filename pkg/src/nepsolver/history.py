"""Per-iteration convergence records shared by both solvers."""

import csv
from dataclasses import dataclass, field

CSV_COLUMNS = [
    "iteration",
    "wall_seconds",
    "ritz_index",
    "re_lambda",
    "im_lambda",
    "rres",
    "lres",
    "kappa",
]


@dataclass
class HistoryRow:
    iteration: int
    wall_seconds: float
    ritz_index: int
    re_lambda: float
    im_lambda: float
    rres: float
    lres: float
    kappa: float


@dataclass
class TimingRow:
    """Accumulated wall time after a full iteration, split out for dot products."""

    iteration: int
    total_seconds: float
    scalar_product_seconds: float


@dataclass
class ConvergenceHistory:
    rows: list = field(default_factory=list)
    timing: list = field(default_factory=list)

    def record(self, iteration, wall_seconds, triplets):
        for idx, t in enumerate(triplets):
            self.rows.append(
                HistoryRow(
                    iteration=iteration,
                    wall_seconds=wall_seconds,
                    ritz_index=idx,
                    re_lambda=t.lam.real,
                    im_lambda=t.lam.imag,
                    rres=t.rres,
                    lres=t.lres,
                    kappa=t.kappa,
                )
            )

    def record_timing(self, iteration, total_seconds, scalar_product_seconds):
        self.timing.append(TimingRow(iteration, total_seconds, scalar_product_seconds))

    def residual_curve(self, ritz_index=0):
        """(iterations, rres) pairs for one Ritz index, in iteration order."""
        pts = [(r.iteration, r.rres) for r in self.rows if r.ritz_index == ritz_index]
        return sorted(pts)

    def write_csv(self, path, include_timing_columns=True):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            columns = CSV_COLUMNS if include_timing_columns else [
                c for c in CSV_COLUMNS if c != "wall_seconds"
            ]
            writer.writerow(columns)
            for r in self.rows:
                row = [
                    r.iteration,
                    f"{r.wall_seconds:.6f}",
                    r.ritz_index,
                    repr(r.re_lambda),
                    repr(r.im_lambda),
                    repr(r.rres),
                    repr(r.lres),
                    repr(r.kappa),
                ]
                if not include_timing_columns:
                    del row[1]
                writer.writerow(row)
