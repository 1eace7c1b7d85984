# Utils module
from .io_formats import (
    get_output_directory,
    atomic_write_text,
    write_json,
    write_csv,
    read_curve,
    write_curve,
    read_design,
    write_design
)
from .run_logging import configure_logging
from .run_stats import RunStatsTracker
from .svg_export import render_design

__all__ = [
    "get_output_directory",
    "atomic_write_text",
    "write_json",
    "write_csv",
    "read_curve",
    "write_curve",
    "read_design",
    "write_design",
    "configure_logging",
    "RunStatsTracker",
    "render_design",
]
