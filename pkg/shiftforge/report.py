"""Self-describing run reports: canonical JSON plus optional CSV tables."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

from shiftforge import params
from shiftforge.utils import canonical_json


@dataclass
class Report:
    command: str
    config: dict
    tier: str | None
    result: dict
    warnings: list = field(default_factory=list)
    tables: dict = field(default_factory=dict)

    def add_table(self, name, fieldnames, rows):
        self.tables[name] = (list(fieldnames), list(rows))

    def to_json(self):
        return {
            'schema_version': params.SCHEMA_VERSION,
            'command': self.command,
            'config': self.config,
            'tier': self.tier,
            'result': self.result,
            'warnings': list(self.warnings),
        }

    def dumps(self):
        return canonical_json(self.to_json())

    def write_json(self, path):
        with open(path, 'w', encoding='utf-8', newline='\n') as fh:
            fh.write(self.dumps())

    def table_csv(self, name) -> str:
        fieldnames, rows = self.tables[name]
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=fieldnames, extrasaction='ignore',
                                lineterminator='\n')
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
        return buf.getvalue()

    def write_csv(self, path, name=None):
        """Write one table; with several tables and no name, the first is written."""
        if not self.tables:
            return False
        name = name or next(iter(self.tables))
        with open(path, 'w', encoding='utf-8', newline='') as fh:
            fh.write(self.table_csv(name))
        return True
