"""CSV ingestion, audit reports and sweep trajectories.

Reports serialize to JSON with a fixed key order and fixed number formatting
(six decimals; the solver certificate in scientific notation), so identical
inputs give byte-identical output.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .audit import FairnessAudit, audit
from .dist import EstimationError, JointDist, SampleRecord, from_samples, mutual_information
from .scenarios import ScenarioSpec, generate_scenario
from .solver import SolverConfig

log = logging.getLogger(__name__)

LN2 = math.log(2.0)
DATASET_ONLY_LABEL = "-"
THEOREMS = ("t1", "t2", "t3", "t4", "t5")
SWEEP_COLUMNS = ("sp_gap", "eo_gap", "pp_gap", "uni_pred", "uni_label", "red", "syn", "dataset_mi", "converged")


class IngestionError(EstimationError):
    """Input file could not be turned into a distribution."""


def ingest_csv(
    path,
    z_col: str,
    y_col: str,
    yhat_col: str | None = None,
    smoothing: float = 0.0,
) -> tuple[JointDist, int]:
    """Read categorical columns from a CSV file into a joint distribution.

    Values are taken as strings, verbatim. Without ``yhat_col`` every row gets
    the same placeholder prediction, which leaves ``I(Z;Y)`` as the only
    meaningful quantity. Returns the distribution and the number of rows.
    """
    path = Path(path)
    try:
        handle = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise IngestionError(f"cannot open {path}: {exc.strerror or exc}") from None
    with handle:
        reader = csv.DictReader(handle)
        header = reader.fieldnames
        if not header:
            raise IngestionError(f"{path}: missing header row")
        wanted = {"z": z_col, "y": y_col}
        if yhat_col is not None:
            wanted["yhat"] = yhat_col
        for role, col in wanted.items():
            if col not in header:
                raise IngestionError(f"{path}: column {col!r} (for {role}) not in header {header}")
        records = []
        try:
            for row in reader:
                line = reader.line_num
                values = {}
                for role, col in wanted.items():
                    value = row.get(col)
                    if value is None or value == "":
                        raise IngestionError(f"{path}: row {line}: empty value in column {col!r}")
                    values[role] = value
                values.setdefault("yhat", DATASET_ONLY_LABEL)
                records.append(SampleRecord(**values))
        except (csv.Error, UnicodeDecodeError) as exc:
            raise IngestionError(f"{path}: malformed CSV near row {reader.line_num}: {exc}") from None
    if not records and smoothing == 0:
        raise IngestionError(f"{path}: no data rows")
    dist = from_samples(records, smoothing)
    for role, col in wanted.items():
        if len(dist.alphabets[("z", "yhat", "y").index(role)]) == 1:
            log.warning("column %r has a single distinct value", col)
    return dist, len(records)


# -- report -----------------------------------------------------------------


@dataclass(frozen=True)
class AuditReport:
    """Plain-data audit summary; every information value is in ``meta['units']``."""

    meta: dict
    gaps: dict
    pid: dict
    theorems: dict
    solver: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"meta": self.meta, "gaps": self.gaps, "pid": self.pid, "theorems": self.theorems, "solver": self.solver}

    @classmethod
    def from_dict(cls, data: dict) -> "AuditReport":
        meta, solver = dict(data["meta"]), dict(data["solver"])
        # restore the scientific-notation fields so that output is reproduced exactly
        if isinstance(meta.get("solver"), dict):
            meta["solver"] = {**meta["solver"], "tol": _as_gap(meta["solver"].get("tol"))}
        solver["gap"] = _as_gap(solver.get("gap"))
        return cls(meta, data["gaps"], data["pid"], data["theorems"], solver)

    @classmethod
    def from_json(cls, text: str) -> "AuditReport":
        return cls.from_dict(json.loads(text))

    def to_json(self) -> str:
        return _dump(self.to_dict(), 0) + "\n"

    def to_text(self) -> str:
        units = self.meta.get("units", "bits")
        lines = [f"source   {self.meta.get('source')}", f"mode     {self.meta.get('mode')}", f"units    {units}", ""]
        rows = [("gaps." + k, v) for k, v in self.gaps.items()] + [("pid." + k, v) for k, v in self.pid.items()]
        width = max(len(k) for k, _ in rows)
        lines += [f"{k.ljust(width)}  {_fmt_plain(v)}" for k, v in rows]
        lines.append("")
        lines.append(f"{'check'.ljust(6)}{'premise'.ljust(9)}{'holds'.ljust(7)}margin")
        for name, v in self.theorems.items():
            lines.append(
                f"{name.ljust(6)}{_fmt_plain(v['premise']).ljust(9)}{_fmt_plain(v['holds']).ljust(7)}"
                f"{_fmt_plain(v['margin'])}"
            )
        lines.append("")
        s = self.solver
        lines.append(f"solver   iters={s['iters']} gap={_fmt_gap(s['gap'])} converged={_fmt_plain(s['converged'])}")
        return "\n".join(lines) + "\n"

    @property
    def converged(self) -> bool:
        return bool(self.solver.get("converged", True))

    @property
    def breaches(self) -> list[str]:
        return [k for k, v in self.theorems.items() if v["holds"] is False]


class _Gap(float):
    """Float printed in scientific notation."""


def _as_gap(v):
    return _Gap(v) if isinstance(v, (int, float)) and not isinstance(v, bool) else v


def _fmt_gap(v) -> str:
    if v is None:
        return "null"
    if not math.isfinite(v):
        return '"inf"'
    return f"{float(v):.6e}"


def _fmt_plain(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, _Gap):
        return _fmt_gap(v)
    if isinstance(v, float):
        if not math.isfinite(v):
            return '"inf"' if v > 0 else '"-inf"'
        out = f"{v:.6f}"
        return "0.000000" if out == "-0.000000" else out
    if isinstance(v, int):
        return str(v)
    return json.dumps(v)


def _dump(obj, indent: int) -> str:
    pad = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_dump(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + "  " * indent + "}"
    return _fmt_plain(obj)


def _scale(value, factor):
    return None if value is None else value * factor


def _solver_meta(cfg: SolverConfig) -> dict:
    return {"tol": _Gap(cfg.tol), "max_iters": int(cfg.max_iters)}


def build_report(result: FairnessAudit, meta: dict, units: str = "bits") -> AuditReport:
    f = _unit_factor(units)
    g, p = result.gaps, result.pid
    theorems = {
        name: {"premise": v.premise, "holds": v.holds, "margin": _scale(v.margin, f)}
        for name, v in result.theorems.items()
    }
    gap = p.certified_gap * f if math.isfinite(p.certified_gap) else math.inf
    return AuditReport(
        meta={**meta, "units": units},
        gaps={"sp": g.sp_gap * f, "eo": g.eo_gap * f, "pp": g.pp_gap * f, "dataset_mi": g.dataset_mi * f},
        pid={"uni_pred": p.uni_a * f, "uni_label": p.uni_b * f, "red": p.red * f, "syn": p.syn * f},
        theorems=theorems,
        solver={"iters": p.iterations, "gap": _Gap(gap), "converged": p.converged},
    )


def dataset_report(dist: JointDist, meta: dict, units: str = "bits") -> AuditReport:
    """Report carrying only ``I(Z;Y)``; everything needing predictions is null."""
    f = _unit_factor(units)
    blank = {"premise": None, "holds": None, "margin": None}
    return AuditReport(
        meta={**meta, "mode": "dataset_only", "units": units},
        gaps={"sp": None, "eo": None, "pp": None, "dataset_mi": mutual_information(dist, "z", "y") * f},
        pid={"uni_pred": None, "uni_label": None, "red": None, "syn": None},
        theorems={t: dict(blank) for t in THEOREMS},
        solver={"iters": 0, "gap": None, "converged": True},
    )


def _unit_factor(units: str) -> float:
    if units == "bits":
        return 1.0
    if units == "nats":
        return LN2
    raise ValueError(f"units must be 'bits' or 'nats', got {units!r}")


def run_audit(
    dist: JointDist,
    cfg: SolverConfig | None = None,
    source: str = "distribution",
    n_records: int | None = None,
    smoothing: float = 0.0,
    units: str = "bits",
    dataset_only: bool = False,
) -> AuditReport:
    """Audit ``dist`` and package the result as a report."""
    cfg = cfg or SolverConfig()
    meta = {
        "source": source,
        "n_records": n_records,
        "smoothing": float(smoothing),
        "solver": _solver_meta(cfg),
        "version": __version__,
        "log_base": 2 if units == "bits" else "e",
        "mode": "full",
    }
    if dataset_only:
        return dataset_report(dist, meta, units)
    return build_report(audit(dist, cfg), meta, units)


# -- sweeps -------------------------------------------------------------------


def sweep_rows(spec: ScenarioSpec, cfg: SolverConfig | None = None) -> list[dict]:
    """One row per sweep point: its parameters, the gaps and the PID terms (bits)."""
    if not spec.is_sweep:
        raise ValueError(f"{spec.kind} is not a sweep kind")
    rows = []
    for params, dist in generate_scenario(spec):
        result = audit(dist, cfg)
        g, p = result.gaps, result.pid
        rows.append(
            {
                **params,
                "sp_gap": g.sp_gap,
                "eo_gap": g.eo_gap,
                "pp_gap": g.pp_gap,
                "uni_pred": p.uni_a,
                "uni_label": p.uni_b,
                "red": p.red,
                "syn": p.syn,
                "dataset_mi": g.dataset_mi,
                "converged": p.converged,
            }
        )
    return rows


def format_sweep(rows: list[dict], units: str = "bits") -> str:
    f = _unit_factor(units)
    if not rows:
        return ""
    header = list(rows[0].keys())
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        out = []
        for key in header:
            v = row[key]
            if isinstance(v, bool):
                out.append("true" if v else "false")
            elif key in SWEEP_COLUMNS:
                out.append(f"{v * f:.9f}")
            else:
                out.append(f"{v:.6g}")
        writer.writerow(out)
    return buf.getvalue()


def run_sweep(spec: ScenarioSpec, cfg: SolverConfig | None = None, out_path=None, units: str = "bits") -> list[dict]:
    """Evaluate a sweep and write its CSV trajectory to ``out_path`` if given."""
    rows = sweep_rows(spec, cfg)
    if out_path is not None:
        Path(out_path).write_text(format_sweep(rows, units), encoding="utf-8")
    return rows
