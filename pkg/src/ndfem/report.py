"""Tabular convergence reports and their CSV serialization (schema v1).

Columns: level, h_max, dofs_p, dofs_u, err_p_L2, err_p_energy, err_u_L2,
err_u_energy, eta_total, cg_iters_p, cg_iters_u, wall_time, followed by
the observed rates log2(e_prev / e) of the four error columns.  Rate cells
are empty on the first row and on reports not generated by uniform
halving.  All numeric cells use '.' as the decimal separator; apart from
wall_time the output is deterministic for identical inputs.
"""

from dataclasses import dataclass
from typing import Optional

CSV_COLUMNS = [
    "level",
    "h_max",
    "dofs_p",
    "dofs_u",
    "err_p_L2",
    "err_p_energy",
    "err_u_L2",
    "err_u_energy",
    "eta_total",
    "cg_iters_p",
    "cg_iters_u",
    "wall_time",
    "rate_p_L2",
    "rate_p_energy",
    "rate_u_L2",
    "rate_u_energy",
]

_ERR_FIELDS = ("err_p_L2", "err_p_energy", "err_u_L2", "err_u_energy")


@dataclass
class ErrorRow:
    level: int
    h_max: float
    dofs_p: int
    dofs_u: int
    err_p_L2: float
    err_p_energy: float
    err_u_L2: float
    err_u_energy: float
    eta_total: float
    cg_iters_p: int
    cg_iters_u: int
    wall_time: float


class ErrorReport:
    """Sequence of per-level rows plus observed rates between uniform levels."""

    def __init__(self, uniform: bool = True):
        self.uniform = uniform
        self.rows: list[ErrorRow] = []

    def add(self, row: ErrorRow):
        self.rows.append(row)

    def rates(self, column: str) -> list[Optional[float]]:
        """log2 error ratios between consecutive rows; None where undefined."""
        from math import log2

        out: list[Optional[float]] = [None]
        vals = [getattr(r, column) for r in self.rows]
        for prev, cur in zip(vals, vals[1:]):
            if self.uniform and prev > 0 and cur > 0:
                out.append(log2(prev / cur))
            else:
                out.append(None)
        return out

    def final_rate(self, column: str) -> float:
        r = self.rates(column)
        if len(r) < 2 or r[-1] is None:
            raise ValueError("no rate available; need at least two uniform levels")
        return r[-1]

    def to_csv(self, fh):
        rates = {c: self.rates("err_" + c[5:]) for c in CSV_COLUMNS if c.startswith("rate_")}
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for k, row in enumerate(self.rows):
            cells = [
                str(row.level),
                f"{row.h_max:.12e}",
                str(row.dofs_p),
                str(row.dofs_u),
                f"{row.err_p_L2:.12e}",
                f"{row.err_p_energy:.12e}",
                f"{row.err_u_L2:.12e}",
                f"{row.err_u_energy:.12e}",
                f"{row.eta_total:.12e}",
                str(row.cg_iters_p),
                str(row.cg_iters_u),
                f"{row.wall_time:.3f}",
            ]
            for c in CSV_COLUMNS[12:]:
                r = rates[c][k]
                cells.append("" if r is None else f"{r:.4f}")
            fh.write(",".join(cells) + "\n")

    def format_table(self) -> str:
        lines = [
            "level    h_max     dofs_p   dofs_u   err_p_L2    err_p_en    "
            "err_u_L2    err_u_en    eta_total   rates(pL2 pEn uL2 uEn)"
        ]
        rate_cols = [self.rates(c) for c in _ERR_FIELDS]
        for k, r in enumerate(self.rows):
            rstr = " ".join(
                "  -- " if rc[k] is None else f"{rc[k]:5.2f}" for rc in rate_cols
            )
            lines.append(
                f"{r.level:5d}  {r.h_max:9.3e} {r.dofs_p:8d} {r.dofs_u:8d} "
                f"{r.err_p_L2:11.4e} {r.err_p_energy:11.4e} {r.err_u_L2:11.4e} "
                f"{r.err_u_energy:11.4e} {r.eta_total:11.4e}  {rstr}"
            )
        return "\n".join(lines)
