"""Run report format produced by the simulate command.

The schema is published so downstream tooling can validate reports;
the version is embedded in every report.
"""

from __future__ import annotations

import jsonschema

RUN_REPORT_SCHEMA_VERSION = 1

RUN_REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "liquidbench run report",
    "type": "object",
    "required": [
        "schema_version",
        "method",
        "scenario",
        "seed",
        "status",
        "frames",
        "particle_count",
    ],
    "properties": {
        "schema_version": {"const": RUN_REPORT_SCHEMA_VERSION},
        "method": {
            "enum": ["mp", "ls", "flip", "apic", "wcsph", "iisph", "sph"]
        },
        "scenario": {"type": "object"},
        "seed": {"type": "integer"},
        "status": {"enum": ["completed", "failed"]},
        "failure": {
            "type": ["object", "null"],
            "properties": {
                "frame": {"type": ["integer", "null"]},
                "message": {"type": "string"},
            },
        },
        "particle_count": {"type": "integer", "minimum": 0},
        "frames": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["index", "time", "substeps", "wall_seconds"],
                "properties": {
                    "index": {"type": "integer", "minimum": 0},
                    "time": {"type": "number"},
                    "substeps": {"type": "integer", "minimum": 0},
                    "wall_seconds": {"type": "number", "minimum": 0},
                    "max_speed": {"type": "number"},
                    "pressure_iterations": {"type": ["integer", "null"]},
                    "fluid_volume": {"type": ["number", "null"]},
                },
            },
        },
        "budget": {
            "type": ["object", "null"],
            "properties": {
                "target_seconds_per_frame": {"type": ["number", "null"]},
                "measured_mean_seconds_per_frame": {"type": ["number", "null"]},
            },
        },
    },
}


def validate_report(report: dict):
    jsonschema.validate(report, RUN_REPORT_SCHEMA)
    return report
