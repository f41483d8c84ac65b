from .io import heatmap_csv, mc_csv, write_heatmap_csv, write_mc_csv
from .scenario import (Scenario, derive_seed, dumps_scenario, load_preset, load_scenario,
                       save_scenario, scenario_from_dict)
from .sweep import HeatmapResult, MonteCarloResult, position_crb, run_monte_carlo, sweep_crb_map

__all__ = [
    "HeatmapResult", "MonteCarloResult", "Scenario", "derive_seed", "dumps_scenario",
    "heatmap_csv", "load_preset", "load_scenario", "mc_csv", "position_crb",
    "run_monte_carlo", "save_scenario", "scenario_from_dict", "sweep_crb_map",
    "write_heatmap_csv", "write_mc_csv",
]
