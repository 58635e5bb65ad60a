"""Results Writer

Persists a run as ``records.csv``, ``events.csv`` and ``summary.json`` (plus
``filter_trace.csv`` and ``weights.json`` when enabled). Floats are written
with ``repr`` so identical runs produce identical bytes.
"""

import csv
import json
from pathlib import Path
from typing import Any, Iterable, List, Sequence, Union

from app.core.utils.logger import get_logger
from app.schemas.run_models import AggregateSummary, QueryEvent, RunRecord

logger = get_logger(__name__)

RECORD_COLUMNS = ["t", "action", "transmitted", "erased", "reward", "trace_pri", "trace_pos"]
CLIENT_COLUMNS = ["queried", "mse", "ztrue", "zhat"]
EVENT_COLUMNS = ["t", "client", "z_true", "z_hat", "mse"]
TRACE_COLUMNS = ["t", "trace_pri", "trace_pos", "err_norm"]


def format_value(value: Any) -> str:
    """``repr`` for floats, 0/1 for flags, ``;``-joined vectors, empty for missing."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return ";".join(format_value(v) for v in value)
    return str(value)


def record_header(n_clients: int) -> List[str]:
    header = list(RECORD_COLUMNS)
    for c in range(1, n_clients + 1):
        header.extend(f"{name}_{c}" for name in CLIENT_COLUMNS)
    return header


def record_row(record: RunRecord) -> List[str]:
    row = [format_value(getattr(record, name)) for name in RECORD_COLUMNS]
    for client in record.clients:
        row.extend(format_value(v) for v in (client.queried, client.mse, client.z_true, client.z_hat))
    return row


class ResultsWriter:
    """Writes run artifacts into an output directory."""

    def write_run(self, out_dir: Union[str, Path], result, filter_trace: bool = False) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)

        n_clients = len(result.records[0].clients) if result.records else 0
        self._write_csv(out / "records.csv", record_header(n_clients),
                        (record_row(r) for r in result.records))
        self._write_csv(out / "events.csv", EVENT_COLUMNS,
                        (self._event_row(e) for e in result.events))
        self.write_json(out / "summary.json", result.summary.model_dump(mode="json"))

        if filter_trace:
            self._write_csv(out / "filter_trace.csv", TRACE_COLUMNS,
                            ([format_value(getattr(r, name)) for name in TRACE_COLUMNS] for r in result.records))
        if result.weights is not None:
            self.write_json(out / "weights.json", result.weights)

        logger.success("Run artifacts written", {"dir": str(out), "records": len(result.records)})
        return out

    def write_replications(self, out_dir: Union[str, Path], results: Sequence,
                           aggregate: AggregateSummary, filter_trace: bool = False) -> Path:
        out = Path(out_dir)
        for result in results:
            self.write_run(out / f"seed_{result.summary.seed}", result, filter_trace=filter_trace)
        self.write_json(out / "aggregate.json", aggregate.model_dump(mode="json"))
        logger.success("Aggregate written", {"dir": str(out), "seeds": len(results)})
        return out

    @staticmethod
    def write_json(path: Path, payload: Any) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(payload, handle, indent=2)
            handle.write("\n")

    @staticmethod
    def _event_row(event: QueryEvent) -> List[str]:
        return [format_value(getattr(event, name)) for name in EVENT_COLUMNS]

    @staticmethod
    def _write_csv(path: Path, header: List[str], rows: Iterable[List[str]]) -> None:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)


# Global instance
results_writer = ResultsWriter()
