import pytest

from ltlswarm.scenario import builtin_scenario_path, load_scenario
from ltlswarm.sim import SimConfig, run


@pytest.fixture(scope="session")
def desk_scltl_trace():
    """Completed co-safe run on the desk-scale geometry (shared)."""
    scenario = load_scenario(builtin_scenario_path("desk_scltl"))
    cfg = SimConfig(dt=5e-3, horizon=250.0, seed=3)
    return scenario, cfg, run(scenario, cfg)


@pytest.fixture(scope="session")
def desk_full_trace():
    """Full-LTL protocol run with several completed rounds (shared)."""
    scenario = load_scenario(builtin_scenario_path("desk_general_fullltl"))
    cfg = SimConfig(dt=5e-3, horizon=220.0, seed=1)
    return scenario, cfg, run(scenario, cfg)


@pytest.fixture(scope="session")
def desk_stuck_trace():
    """General plans under the co-safe protocol: the stuck behavior (shared)."""
    scenario = load_scenario(builtin_scenario_path("desk_general_scltl"))
    cfg = SimConfig(dt=5e-3, horizon=90.0, seed=0)
    return scenario, cfg, run(scenario, cfg)
