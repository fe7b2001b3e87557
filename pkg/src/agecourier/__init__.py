"""Age-of-information-aware allocation and simulation of sensing and courier
robots on connected graphs.

The package covers the full pipeline: validate a graph with a fixed base node,
extract hop distances and a shortest-path tree, lay a closed walk over the tree
for courier conveyors, stagger the conveyors with phase offsets, allocate
sensing robots across nodes by water-filling, simulate the joint system slot by
slot with exact age accounting, and sweep the sensing/conveying split.
"""

__version__ = "0.1.0"

from .graph_core import (
    Graph,
    DistanceMap,
    ShortestPathTree,
    build_graph,
    bfs_distances,
    shortest_path_tree,
)
from .conveyor_plan import (
    EulerWalk,
    PhaseSet,
    CoverageReport,
    euler_walk,
    uniform_phases,
    clustered_phases,
    random_phases,
    cyclic_gaps,
    gamma_max,
    residual_life_mean,
    baseward_departure_slots,
    coverage_audit,
)
from .sensing_alloc import (
    SensingModel,
    SensingAllocation,
    make_model,
    model_from_mu_table,
    mu,
    marginal_benefit,
    success_probability,
    allocation_objective,
    water_fill,
    brute_force_alloc,
    uniform_alloc,
)
from .sim_engine import (
    EnergyParams,
    Sample,
    DeliveryEvent,
    DeliveryLog,
    SimConfig,
    SimResult,
    ConveyorEnergyStats,
    node_stream,
    generation_mask,
    draw_sensing_time,
    run,
    run_energy,
    aoi_from_event_log,
)
from .analysis import (
    BoundReport,
    PenaltyReport,
    SweepCell,
    PhaseRow,
    lower_bound,
    transport_penalty,
    split_sweep,
    phase_comparison,
    pickup_wait_mean,
)
from .config import (
    ExperimentConfig,
    ConfigError,
    parse_config,
    load_config,
    render_config,
)
