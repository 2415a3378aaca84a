import logging
import os
import tempfile
from pathlib import Path

import numpy as np
import pandas as pd

from constants import BASIS_LABELS, FLOAT_DIGITS, ROLES, STATE_LABELS, TABLE_SCHEMAS
from errors import DataError
from machine.detection import CoincidenceCounts, EfficiencyPair, MeasurementRecord

logger = logging.getLogger(__name__)

FLOAT_FORMAT = f"%.{FLOAT_DIGITS}g"


class RecordHandler:
    """Reads and writes record files and result tables. Every write is atomic."""

    def __init__(self, output_format: str = "csv"):
        if output_format not in ("csv", "json"):
            raise ValueError(f"unknown output format {output_format!r}")
        self.output_format = output_format

    # ---------- tables

    def frame(self, schema: str, rows) -> pd.DataFrame:
        columns = list(TABLE_SCHEMAS[schema])
        return pd.DataFrame(list(rows), columns=columns)

    def write_table(self, path, schema: str, rows) -> Path:
        table = self.frame(schema, rows)
        path = Path(path)
        if self.output_format == "csv":
            text = table.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        else:
            text = table.to_json(orient="records", double_precision=15, indent=1)
        self._atomic_write(path, text)
        logger.info("##### WRITE %s: %d rows -> %s", schema, len(table), path)
        return path

    def read_table(self, path) -> pd.DataFrame:
        path = Path(path)
        try:
            if path.suffix == ".json":
                return pd.read_json(path, orient="records")
            return pd.read_csv(path)
        except FileNotFoundError:
            raise
        except (ValueError, pd.errors.ParserError) as error:
            raise DataError(f"{path}: cannot parse table: {error}") from error

    def write_text(self, path, text: str) -> Path:
        path = Path(path)
        self._atomic_write(path, text)
        return path

    # ---------- measurement records

    def write_records(self, path, records) -> Path:
        rows = []
        for r in records:
            eta = r.true_eta
            rows.append((
                r.t, r.state_label, r.basis_label, r.role, *r.counts.as_tuple(),
                eta.eta_a if eta else np.nan, eta.eta_b if eta else np.nan,
            ))
        table = self.frame("records", rows)
        text = table.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        path = Path(path)
        self._atomic_write(path, text)
        logger.info("##### WRITE records: %d -> %s", len(rows), path)
        return path

    def read_records(self, path) -> list[MeasurementRecord]:
        path = Path(path)
        try:
            table = pd.read_csv(path, dtype={"state": str, "basis": str, "role": str})
        except pd.errors.EmptyDataError:
            raise DataError(f"{path}: record file is empty") from None
        except pd.errors.ParserError as error:
            raise DataError(f"{path}: cannot parse record file: {error}") from error

        missing = [c for c in TABLE_SCHEMAS["records"][:8] if c not in table.columns]
        if missing:
            raise DataError(f"{path}: missing columns {missing}")

        records = []
        for line, row in enumerate(table.itertuples(index=False), start=2):
            try:
                state_index = STATE_LABELS.index(row.state)
                basis_index = BASIS_LABELS.index(row.basis)
                if row.role not in ROLES:
                    raise ValueError(f"unknown role {row.role!r}")
                eta = None
                if "eta_a" in table.columns and not (pd.isna(row.eta_a) or pd.isna(row.eta_b)):
                    eta = EfficiencyPair(float(row.eta_a), float(row.eta_b))
                counts = CoincidenceCounts(float(row.c_pp), float(row.c_pm), float(row.c_mp), float(row.c_mm))
                records.append(MeasurementRecord(float(row.t), state_index, basis_index, row.role, counts, eta))
            except (ValueError, DataError) as error:
                raise DataError(f"{path}, line {line}: {error}") from error
        return records

    # ---------- internals

    @staticmethod
    def _atomic_write(path: Path, text: str):
        path.parent.mkdir(parents=True, exist_ok=True)
        handle = tempfile.NamedTemporaryFile("w", dir=path.parent, prefix=f".{path.name}.", delete=False)
        try:
            with handle:
                handle.write(text)
            os.replace(handle.name, path)
        except BaseException:
            Path(handle.name).unlink(missing_ok=True)
            raise
