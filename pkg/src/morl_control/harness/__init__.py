from .config import ConfigError, load_config, parse_config_text, run_config
from .demo import DemoLog, dynamic_demo, parse_schedule
from .evaluation import ConstantPolicy, EvalConfig, EvaluationRecord, evaluate, evaluate_policy, read_records, write_records
from .plots import export_scatter, render_svg, scatter_rows
from .report import ReportRow, build_report, format_markdown, read_report_csv, rows_equal, write_report_csv

__all__ = [
    "ConfigError",
    "ConstantPolicy",
    "DemoLog",
    "EvalConfig",
    "EvaluationRecord",
    "ReportRow",
    "build_report",
    "dynamic_demo",
    "evaluate",
    "evaluate_policy",
    "export_scatter",
    "format_markdown",
    "load_config",
    "parse_config_text",
    "parse_schedule",
    "read_records",
    "read_report_csv",
    "render_svg",
    "rows_equal",
    "run_config",
    "scatter_rows",
    "write_records",
    "write_report_csv",
]
