"""Experiment orchestration: configs, refinement sweeps, rate fits and exports."""

from .config import STRATEGIES, ExperimentConfig, load_config, parse_config
from .experiments import (NEAR_UMBILIC_COUNT, ConvergenceRecord, RateFit, UmbilicResult, build_net, fit_loglog,
                          fit_rate, near_umbilic_vertices, output_dir, run_level, run_refinement, sup_errors,
                          umbilic_experiment)
from .export import (RECORD_COLUMNS, REPORT_COLUMNS, VERTEX_COLUMNS, write_plotdata, write_records_csv, write_report_csv, write_stars_obj, write_timing,
                     write_vertex_csv)
from .pipeline import NetAnalysis, analyze_net
