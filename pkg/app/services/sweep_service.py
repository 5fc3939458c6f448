import csv
import hashlib
import io
import json
import logging
import os
import re
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Dict, List, Optional, Sequence

from pydantic import ValidationError

from app.schemas.experiment_schemas import ExperimentConfig
from app.services.diagnostics_service import diverges_under_refinement, refinement_ratio
from app.services.experiment_service import (
    EXIT_CONFIG,
    ExperimentService,
    atomic_write,
    config_hash,
    format_float,
)
from config.config import DEFAULT_WORKERS, OUTPUT_DIR

logger = logging.getLogger(__name__)

SUMMARY_FILE = "sweep_summary.csv"
REFINEMENT_FILE = "refinement.json"
BASE_COLUMNS = ["config_hash", "name", "grid_n", "status", "exit_code", "blowup_time"]
_SIZE_SUFFIX = re.compile(r"-n\d+$")


def _run_one(config_json: str, output_dir: str) -> Dict[str, Any]:
    """Process-pool worker: one config in, one summary row out."""
    config = ExperimentConfig.model_validate_json(config_json)
    row: Dict[str, Any] = {
        "config_hash": config_hash(config),
        "name": config.name,
        "grid_n": config.grid.n,
        "family": refinement_family(config),
        "blowup_time": None,
        "boundary_mass_max": None,
        "values": {},
    }
    try:
        result = ExperimentService(output_dir).run_experiment(config)
    except (ValidationError, ValueError) as e:
        logger.error(f"Sweep row {config.name} rejected: {e}")
        row.update(status="config_error", exit_code=EXIT_CONFIG, error=str(e))
        return row
    row.update(
        status=result.status,
        exit_code=result.exit_code,
        blowup_time=result.blowup_time,
        boundary_mass_max=result.info.get("boundary_mass_max"),
        values=result.final_values(),
        error=result.error,
    )
    return row


def refinement_family(config: ExperimentConfig) -> str:
    """Hash of everything but the name, the node count and the output directory."""
    payload = config.model_dump(mode="json", exclude={"output_dir", "name"})
    payload["grid"].pop("n")
    canonical = json.dumps(payload, sort_keys=True)
    return hashlib.md5(canonical.encode("utf-8")).hexdigest()[:10]


class SweepService:
    def __init__(self, output_dir: Optional[str] = None, workers: Optional[int] = None):
        self.output_dir = output_dir or OUTPUT_DIR
        self.workers = workers or DEFAULT_WORKERS

    def _unique(self, configs: Sequence[ExperimentConfig]) -> List[ExperimentConfig]:
        by_hash: Dict[str, ExperimentConfig] = {}
        for config in configs:
            digest = config_hash(config)
            if digest in by_hash:
                logger.warning(f"Dropping duplicate config {config.name} ({digest})")
                continue
            by_hash[digest] = config
        return [by_hash[digest] for digest in sorted(by_hash)]

    def sweep(self, configs: Sequence[ExperimentConfig]) -> List[Dict[str, Any]]:
        if not configs:
            raise ValueError("sweep needs at least one config")
        ordered = self._unique(configs)
        payloads = [config.model_dump_json() for config in ordered]
        logger.info(f"Sweeping {len(payloads)} configs with {self.workers} worker(s)")

        try:
            if self.workers > 1:
                with ProcessPoolExecutor(max_workers=self.workers) as pool:
                    rows = list(pool.map(_run_one, payloads, [self.output_dir] * len(payloads)))
            else:
                rows = [_run_one(payload, self.output_dir) for payload in payloads]
        except Exception as e:
            logger.error(f"Sweep into {self.output_dir} aborted: {e}")
            raise

        failed = sum(1 for row in rows if row["exit_code"] != 0)
        logger.info(f"Sweep finished: {len(rows) - failed} ok, {failed} failed")
        try:
            atomic_write(os.path.join(self.output_dir, SUMMARY_FILE), summary_to_csv(rows))
            table = refinement_table(rows)
            if table:
                atomic_write(
                    os.path.join(self.output_dir, REFINEMENT_FILE),
                    json.dumps(table, indent=2, sort_keys=True) + "\n",
                )
        except OSError as e:
            logger.error(f"Writing the sweep summary to {self.output_dir} failed: {e}")
            raise
        return rows


def summary_to_csv(rows: Sequence[Dict[str, Any]]) -> str:
    value_columns = sorted({column for row in rows for column in row["values"]})
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow([*BASE_COLUMNS, *value_columns])
    for row in rows:
        blowup = row["blowup_time"]
        line = [
            row["config_hash"], row["name"], row["grid_n"], row["status"], row["exit_code"],
            "" if blowup is None else format_float(blowup),
        ]
        values = row["values"]
        line.extend(format_float(values[column]) if column in values else "" for column in value_columns)
        writer.writerow(line)
    return buffer.getvalue()


def refinement_ratios(rows: Sequence[Dict[str, Any]], column: str) -> List[float]:
    """value(2n) / value(n) over the successful rows that report `column`, ordered by grid size."""
    usable = sorted(
        (row for row in rows if row["exit_code"] == 0 and column in row["values"]),
        key=lambda row: row["grid_n"],
    )
    return [
        refinement_ratio(coarse["values"][column], fine["values"][column])
        for coarse, fine in zip(usable, usable[1:])
    ]


def refinement_table(rows: Sequence[Dict[str, Any]]) -> Dict[str, Dict[str, Any]]:
    """Per family of configs differing only in n: final-value ratios under refinement and boundary shares.

    Families with a single grid size are left out.
    """
    families: Dict[str, List[Dict[str, Any]]] = {}
    for row in rows:
        families.setdefault(row.get("family") or row["config_hash"], []).append(row)

    table: Dict[str, Dict[str, Any]] = {}
    for key, members in sorted(families.items()):
        members = sorted(members, key=lambda row: row["grid_n"])
        if len({row["grid_n"] for row in members}) < 2:
            continue
        columns = sorted({column for row in members for column in row["values"]})
        ratios = {column: refinement_ratios(members, column) for column in columns}
        entry: Dict[str, Any] = {
            "family": key,
            "grid_n": [row["grid_n"] for row in members],
            "status": [row["status"] for row in members],
            "boundary_mass_max": [row.get("boundary_mass_max") for row in members],
            "ratios": ratios,
        }
        usable = [row for row in members if row["exit_code"] == 0]
        if len(usable) >= 3:
            entry["diverges"] = {
                column: diverges_under_refinement([row["values"][column] for row in usable])
                for column in columns
                if all(column in row["values"] for row in usable)
            }
        label = _SIZE_SUFFIX.sub("", members[0]["name"])
        table[label if label not in table else f"{label}-{key}"] = entry
    return table


def sweep(
    configs: Sequence[ExperimentConfig], workers: Optional[int] = None, output_dir: Optional[str] = None
) -> List[Dict[str, Any]]:
    return SweepService(output_dir, workers).sweep(configs)
