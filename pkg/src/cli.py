# src/cli.py
"""spatialgen 명령줄 인터페이스

    spatialgen gen grid --method kernel-mixture --size 50 --centers 3 --seed 7 --out g.csv
    spatialgen measure grid --in g.csv --out m.csv
    spatialgen perturb network --in n.json --delete-links 3 --strategy targeted --seed 1 --out n2.json
    spatialgen experiment --config exp.json --out results.csv

종료 코드: 0 성공, 1 파이프라인 에러, 2 사용법/설정 에러.
"""
import argparse
import logging
import sys
from dataclasses import replace
from typing import Callable, List, Optional, Sequence

from src.assignment import BprParams, assign_all_or_nothing, gravity_od, user_equilibrium
from src.config import LOG_LEVELS, RuntimeConfig
from src.exceptions import ConfigError, SpatialGenError
from src.experiment import ExperimentConfig, run_experiment, write_results
from src.formats import (
    read_grid_csv,
    read_network_json,
    read_points_csv,
    write_grid_csv,
    write_network_json,
    write_points_csv,
)
from src.graph import edge_weights
from src.gridgen import (
    BlocksParams,
    KernelMixtureParams,
    PercolationParams,
    ReactionDiffusionParams,
    generate_blocks,
    generate_kernel_mixture,
    generate_percolation,
    generate_reaction_diffusion,
)
from src.indicators import (
    betweenness,
    building_morphology,
    closeness,
    grid_morphology,
    network_summary,
    point_moments,
    ripley_k,
)
from src.log import setup_logging
from src.models import IndicatorRecord
from src.netgen import (
    NETWORK_KINDS,
    CitySystemParams,
    CostBenefitParams,
    GravityParams,
    generate_city_system,
    generate_cost_benefit_network,
    generate_gravity_network,
    generate_random_planar,
    generate_tree_network,
)
from src.perturb import delete_links, delete_nodes, jitter_nodes, perturb_grid_noise, perturb_grid_poisson
from src.pointgen import sample_from_grid, sample_homogeneous_poisson, sample_inhomogeneous_poisson
from src.renderers import TableRenderer, write_csv
from src.rng import RngStream
from src.schelling import init_schelling, run_schelling
from src.slime_mould import SlimeMouldParams, generate_slime_mould

logger = logging.getLogger(__name__)

GRID_METHODS = ("reaction-diffusion", "kernel-mixture", "percolation", "blocks")
NETWORK_METHODS = ("tree", "random-planar", "gravity", "cost-benefit", "city-system", "slime-mould")
POINT_METHODS = ("poisson", "inhomogeneous", "from-grid")
ASSIGN_METHODS = ("aon", "msa", "frank_wolfe")
DETERMINISTIC_NETWORK_METHODS = ("gravity", "cost-benefit")


def _window(text: str) -> tuple:
    parts = text.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("window must be xmin,ymin,xmax,ymax")
    try:
        return tuple(float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"window must be numeric: {text!r}")


def _float_list(text: str) -> List[float]:
    try:
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers: {text!r}")


def _int_list(text: str) -> List[int]:
    try:
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {text!r}")


def _rng(args: argparse.Namespace) -> RngStream:
    if args.seed is None:
        raise ConfigError(f"--seed is required for {args.command} {getattr(args, 'target', '')}".strip())
    return RngStream(args.seed)


def _write_record(record: IndicatorRecord, path: str) -> None:
    write_csv(TableRenderer.records_frame([record]), path)


# ========== gen ==========


def cmd_gen_grid(args: argparse.Namespace) -> str:
    rng = _rng(args)
    if args.method == "reaction-diffusion":
        grid = generate_reaction_diffusion(
            ReactionDiffusionParams(
                args.size, args.population, args.growth_rate, args.alpha, args.beta, args.diffusion_steps
            ),
            rng,
        )
    elif args.method == "kernel-mixture":
        grid = generate_kernel_mixture(
            KernelMixtureParams(args.size, args.centers, args.max_value, args.radius, args.kernel), rng
        )
    elif args.method == "percolation":
        grid = generate_percolation(PercolationParams(args.size, args.probability, args.largest_only), rng)
    else:
        grid = generate_blocks(
            BlocksParams(args.size, args.blocks, args.min_side, args.max_side, not args.no_overlap), rng
        )
    write_grid_csv(grid, args.out)
    return f"{args.method} grid {grid.width}x{grid.height}, total {grid.total:g}"


def cmd_gen_network(args: argparse.Namespace) -> str:
    method = args.method
    if method in DETERMINISTIC_NETWORK_METHODS or method == "slime-mould":
        if args.input is None:
            raise ConfigError(f"--in is required for {method}")
        base = read_network_json(args.input)

    if method == "tree":
        net = generate_tree_network(args.n, args.window, _rng(args))
    elif method == "random-planar":
        net = generate_random_planar(args.n, args.keep_probability, args.window, _rng(args))
    elif method == "city-system":
        params = CitySystemParams(
            args.cities, args.largest_population, args.zipf, args.min_separation, args.network_kind
        )
        net = generate_city_system(params, args.window, _rng(args))
    elif method == "gravity":
        net = generate_gravity_network(
            base.nodes, GravityParams(args.gamma, args.interaction_range, args.extra_edges)
        )
    elif method == "cost-benefit":
        net = generate_cost_benefit_network(base.nodes, CostBenefitParams(args.cost_per_length, args.gamma))
    else:
        terminals = args.terminals or base.node_ids
        params = SlimeMouldParams(
            terminals=tuple(terminals),
            iterations=args.iterations,
            flow_amplification=args.flow_amplification,
            decay=args.decay,
            time_step=args.time_step,
            input_flow=args.input_flow,
            keep_threshold=args.keep_threshold,
            weighted_terminals=args.weighted_terminals,
        )
        net = generate_slime_mould(base, params, _rng(args))

    write_network_json(net, args.out)
    return f"{method} network: {len(net.nodes)} nodes, {len(net.edges)} edges"


def cmd_gen_points(args: argparse.Namespace) -> str:
    rng = _rng(args)
    if args.method == "poisson":
        points = sample_homogeneous_poisson(args.intensity, args.window, rng)
    else:
        if args.grid is None:
            raise ConfigError(f"--grid is required for {args.method}")
        grid = read_grid_csv(args.grid)
        if args.method == "inhomogeneous":
            points = sample_inhomogeneous_poisson(grid, rng)
        else:
            if args.count is None:
                raise ConfigError("--count is required for from-grid")
            points = sample_from_grid(grid, args.count, rng)
    write_points_csv(points, args.out)
    return f"{args.method}: {len(points)} points"


# ========== perturb ==========


def cmd_perturb_grid(args: argparse.Namespace) -> str:
    if args.noise is None and args.poisson_lambda is None:
        raise ConfigError("one of --noise or --poisson-lambda is required")
    rng = _rng(args)
    grid = read_grid_csv(args.input)
    if args.noise is not None:
        grid = perturb_grid_noise(grid, args.noise, rng.substream(0))
    if args.poisson_lambda is not None:
        grid = perturb_grid_poisson(grid, args.poisson_lambda, args.delta, rng.substream(1))
    write_grid_csv(grid, args.out)
    return f"perturbed grid, total {grid.total:g}"


def cmd_perturb_network(args: argparse.Namespace) -> str:
    if args.delete_nodes is None and args.delete_links is None and args.jitter is None:
        raise ConfigError("one of --delete-nodes, --delete-links or --jitter is required")
    rng = _rng(args)
    net = read_network_json(args.input)
    if args.delete_nodes is not None:
        net = delete_nodes(net, args.delete_nodes, args.strategy, rng.substream(0))
    if args.delete_links is not None:
        net = delete_links(net, args.delete_links, args.strategy, rng.substream(1))
    if args.jitter is not None:
        net = jitter_nodes(net, args.jitter, rng.substream(2))
    write_network_json(net, args.out)
    return f"perturbed network: {len(net.nodes)} nodes, {len(net.edges)} edges"


# ========== measure ==========


def cmd_measure_grid(args: argparse.Namespace) -> str:
    grid = read_grid_csv(args.input)
    record = building_morphology(grid) if args.buildings else grid_morphology(grid).to_record()
    _write_record(record, args.out)
    return f"{len(record)} grid indicators"


def cmd_measure_network(args: argparse.Namespace) -> str:
    net = read_network_json(args.input)
    if args.centrality == "betweenness":
        write_csv(TableRenderer.node_scores_frame(betweenness(net), "betweenness"), args.out)
        return f"betweenness for {len(net.nodes)} nodes"
    if args.centrality == "closeness":
        write_csv(TableRenderer.node_scores_frame(closeness(net), "closeness"), args.out)
        return f"closeness for {len(net.nodes)} nodes"
    record = network_summary(net).to_record()
    _write_record(record, args.out)
    return f"{len(record)} network indicators"


def cmd_measure_points(args: argparse.Namespace) -> str:
    points = read_points_csv(args.input)
    if args.ripley:
        write_csv(TableRenderer.ripley_frame(ripley_k(points, args.ripley)), args.out)
        return f"Ripley K at {len(args.ripley)} radii"
    record = point_moments(points)
    _write_record(record, args.out)
    return f"{len(record)} point indicators"


# ========== experiment / assign ==========


def cmd_experiment(args: argparse.Namespace) -> str:
    runtime = RuntimeConfig.from_env()
    if args.jobs is not None:
        runtime = replace(runtime, jobs=args.jobs)
    config = ExperimentConfig.from_file(args.config).with_overrides(args.replications, args.base_seed)
    results = run_experiment(config, runtime)
    write_results(results, args.out)
    failed = int((results["error"] != "").sum())
    return f"{len(results)} rows ({failed} failed)"


def cmd_schelling(args: argparse.Namespace) -> str:
    grid = read_grid_csv(args.input)
    rng = _rng(args)
    state = init_schelling(grid, args.occupied_fraction, args.mix_ratio, rng, args.tolerance)
    final, trajectory = run_schelling(state, args.max_steps, rng)
    write_csv(TableRenderer.trajectory_frame(trajectory), args.out)
    return f"stopped at step {final.step}, segregation {trajectory[-1][1]:.3f}"


def cmd_assign(args: argparse.Namespace) -> str:
    net = read_network_json(args.input)
    od = gravity_od(net, args.demand, args.decay)
    if args.method == "aon":
        times = edge_weights(net, "freeFlowTime")
        flows = assign_all_or_nothing(net, od, times)
        summary = f"all-or-nothing, total demand {od.total:g}"
    else:
        result = user_equilibrium(
            net, od, BprParams(args.bpr_a, args.bpr_b), args.max_iter, args.gap_tol, args.method
        )
        flows, times = result.flows, result.times
        summary = f"{args.method}: gap {result.relative_gap:.3g} after {result.iterations} iterations"
    write_csv(TableRenderer.flows_frame(net, flows, times), args.out)
    return summary


# ========== Parser ==========


def _add_out(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", required=True, help="출력 파일 경로")


def _add_seed(parser: argparse.ArgumentParser, required: bool = True) -> None:
    parser.add_argument("--seed", type=int, required=required, help="난수 시드 (64비트 부호 없는 정수)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spatialgen", description="공간 합성 데이터 생성과 민감도 분석")
    parser.add_argument(
        "--log-level",
        type=str.upper,
        choices=LOG_LEVELS,
        default=None,
        help="로그 레벨 (기본값: SPATIALGEN_LOG_LEVEL)",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    # gen
    gen = commands.add_parser("gen", help="합성 데이터 생성").add_subparsers(dest="target", required=True)

    grid = gen.add_parser("grid", help="밀도/건물 그리드")
    grid.add_argument("--method", choices=GRID_METHODS, required=True)
    grid.add_argument("--size", type=int, default=50)
    grid.add_argument("--population", type=float, default=10000.0)
    grid.add_argument("--growth-rate", type=float, default=100.0)
    grid.add_argument("--alpha", type=float, default=1.5)
    grid.add_argument("--beta", type=float, default=0.1)
    grid.add_argument("--diffusion-steps", type=int, default=2)
    grid.add_argument("--centers", type=int, default=3)
    grid.add_argument("--max-value", type=float, default=100.0)
    grid.add_argument("--radius", type=float, default=5.0)
    grid.add_argument("--kernel", choices=("exponential", "gaussian"), default="exponential")
    grid.add_argument("--probability", type=float, default=0.6)
    grid.add_argument("--largest-only", action="store_true")
    grid.add_argument("--blocks", type=int, default=10)
    grid.add_argument("--min-side", type=int, default=2)
    grid.add_argument("--max-side", type=int, default=8)
    grid.add_argument("--no-overlap", action="store_true")
    _add_seed(grid)
    _add_out(grid)
    grid.set_defaults(handler=cmd_gen_grid)

    network = gen.add_parser("network", help="공간 네트워크")
    network.add_argument("--method", choices=NETWORK_METHODS, required=True)
    network.add_argument("--in", dest="input", help="노드/기반 네트워크 JSON (gravity, cost-benefit, slime-mould)")
    network.add_argument("--n", type=int, default=30)
    network.add_argument("--window", type=_window, default=(0.0, 0.0, 1.0, 1.0))
    network.add_argument("--keep-probability", type=float, default=0.5)
    network.add_argument("--cities", type=int, default=20)
    network.add_argument("--largest-population", type=float, default=1000.0)
    network.add_argument("--zipf", type=float, default=1.0)
    network.add_argument("--min-separation", type=float, default=0.0)
    network.add_argument("--network-kind", choices=NETWORK_KINDS, default="tree")
    network.add_argument("--gamma", type=float, default=1.0)
    network.add_argument("--interaction-range", type=float, default=1.0)
    network.add_argument("--extra-edges", type=int, default=0)
    network.add_argument("--cost-per-length", type=float, default=1.0)
    network.add_argument("--terminals", type=_int_list, default=None)
    network.add_argument("--iterations", type=int, default=100)
    network.add_argument("--flow-amplification", type=float, default=1.8)
    network.add_argument("--decay", type=float, default=1.0)
    network.add_argument("--time-step", type=float, default=0.1)
    network.add_argument("--input-flow", type=float, default=1.0, help="터미널 쌍 사이 주입 흐름 I0")
    network.add_argument("--keep-threshold", type=float, default=0.01)
    network.add_argument("--weighted-terminals", action="store_true")
    _add_seed(network, required=False)
    _add_out(network)
    network.set_defaults(handler=cmd_gen_network)

    points = gen.add_parser("points", help="점 패턴")
    points.add_argument("--method", choices=POINT_METHODS, required=True)
    points.add_argument("--intensity", type=float, default=100.0)
    points.add_argument("--window", type=_window, default=(0.0, 0.0, 1.0, 1.0))
    points.add_argument("--grid", help="강도/밀도 그리드 CSV")
    points.add_argument("--count", type=int)
    _add_seed(points)
    _add_out(points)
    points.set_defaults(handler=cmd_gen_points)

    # perturb
    perturb = commands.add_parser("perturb", help="데이터 교란").add_subparsers(dest="target", required=True)

    pgrid = perturb.add_parser("grid")
    pgrid.add_argument("--in", dest="input", required=True)
    pgrid.add_argument("--noise", type=float, help="가우시안 잡음 sigma")
    pgrid.add_argument("--poisson-lambda", type=float, help="푸아송 교란 강도")
    pgrid.add_argument("--delta", type=float, default=1.0)
    _add_seed(pgrid)
    _add_out(pgrid)
    pgrid.set_defaults(handler=cmd_perturb_grid)

    pnet = perturb.add_parser("network")
    pnet.add_argument("--in", dest="input", required=True)
    pnet.add_argument("--delete-nodes", type=int)
    pnet.add_argument("--delete-links", type=int)
    pnet.add_argument("--strategy", default="random", help="random | targeted")
    pnet.add_argument("--jitter", type=float, help="좌표 잡음 sigma")
    _add_seed(pnet)
    _add_out(pnet)
    pnet.set_defaults(handler=cmd_perturb_network)

    # measure
    measure = commands.add_parser("measure", help="지표 계산").add_subparsers(dest="target", required=True)

    mgrid = measure.add_parser("grid")
    mgrid.add_argument("--in", dest="input", required=True)
    mgrid.add_argument("--buildings", action="store_true", help="클러스터 수와 밀도 추가")
    _add_out(mgrid)
    mgrid.set_defaults(handler=cmd_measure_grid)

    mnet = measure.add_parser("network")
    mnet.add_argument("--in", dest="input", required=True)
    mnet.add_argument("--centrality", choices=("betweenness", "closeness"))
    _add_out(mnet)
    mnet.set_defaults(handler=cmd_measure_network)

    mpoints = measure.add_parser("points")
    mpoints.add_argument("--in", dest="input", required=True)
    mpoints.add_argument("--ripley", type=_float_list, help="Ripley K 반경 목록 (쉼표 구분)")
    _add_out(mpoints)
    mpoints.set_defaults(handler=cmd_measure_points)

    # experiment
    experiment = commands.add_parser("experiment", help="반복 민감도 실험")
    experiment.add_argument("--config", required=True, help="실험 설정 JSON")
    experiment.add_argument("--replications", type=int)
    experiment.add_argument("--base-seed", type=int)
    experiment.add_argument("--jobs", type=int)
    _add_out(experiment)
    experiment.set_defaults(handler=cmd_experiment)

    # schelling
    schelling = commands.add_parser("schelling", help="그리드 위 Schelling 분리 모델 궤적")
    schelling.add_argument("--in", dest="input", required=True, help="점유 순위를 정할 그리드 CSV")
    schelling.add_argument("--tolerance", type=float, default=0.5)
    schelling.add_argument("--occupied-fraction", type=float, default=0.8)
    schelling.add_argument("--mix-ratio", type=float, default=0.5)
    schelling.add_argument("--max-steps", type=int, default=10000)
    _add_seed(schelling)
    _add_out(schelling)
    schelling.set_defaults(handler=cmd_schelling)

    # assign
    assign = commands.add_parser("assign", help="중력형 OD 통행 배정")
    assign.add_argument("--in", dest="input", required=True)
    assign.add_argument("--demand", type=float, default=1.0, help="총 수요")
    assign.add_argument("--decay", type=float, default=None)
    assign.add_argument("--method", choices=ASSIGN_METHODS, default="msa")
    assign.add_argument("--bpr-a", type=float, default=0.15)
    assign.add_argument("--bpr-b", type=float, default=4.0)
    assign.add_argument("--max-iter", type=int, default=500)
    assign.add_argument("--gap-tol", type=float, default=1e-4)
    _add_out(assign)
    assign.set_defaults(handler=cmd_assign)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """CLI 진입점 (종료 코드 반환)"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    try:
        level = args.log_level or RuntimeConfig.from_env().log_level
        setup_logging(level)
        handler: Callable[[argparse.Namespace], str] = args.handler
        summary = handler(args)
    except SpatialGenError as e:
        print(f"❌ {e}", file=sys.stderr)
        return e.exit_code
    except (ValueError, TypeError, OSError) as e:
        print(f"❌ {type(e).__name__}: {e}", file=sys.stderr)
        return 1

    print(f"✅ {summary} -> {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
