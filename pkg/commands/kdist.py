import logging
from typing import Sequence

from models.kdist import KDistInstance
from schemas.experiment import ExperimentConfig
from schemas.results import CommandResponse
from utils.exporters import write_json
from utils.kdistinctness import (
    build_kdist_graph, kdist_detect, kdist_negative_witness_norm, level_sizes, load_kdist_instance, preimage_counts
)
from utils.run_logger import RunLogger, safe_log_event

from commands import output_path

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("kdist", help="Build the k-distinctness walk graph and run detection on it")
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--file", help="Instance file with x, k and r")
    source.add_argument("--x", type=int, nargs="+", help="Input string")
    parser.add_argument("--k", type=int, default=3)
    parser.add_argument("--r", type=int, nargs="+", default=[1, 1])
    parser.set_defaults(handler=handle)


def _instance(args) -> KDistInstance:
    if args.file:
        return load_kdist_instance(args.file)
    return KDistInstance(x=tuple(args.x), k=args.k, r=tuple(args.r))


def _label(x: Sequence[int]) -> str:
    return "-".join(str(v) for v in x)


def handle(args, config: ExperimentConfig) -> CommandResponse:
    instance = _instance(args)
    graph = build_kdist_graph(instance)
    params = config.walk_params()
    safe_log_event(RunLogger.log_instance, _label(instance.x), graph.network.vertices, graph.network.edge_count)

    result = kdist_detect(instance, params, config.model)
    data = {
        "x": list(instance.x),
        "k": instance.k,
        "r": list(instance.r),
        "is_positive": instance.is_positive,
        "level_sizes": level_sizes(graph),
        "deadends": len(graph.deadends),
        "preimage_counts": {str(level): counts for level, counts in preimage_counts(graph).items()},
        "negative_witness_norm": kdist_negative_witness_norm(graph, params),
        "result": result.model_dump(mode="json"),
    }
    path = write_json(data, output_path(config, f"kdist-{_label(instance.x)}.json"))
    return CommandResponse(
        success=True,
        data=data,
        message=f"accept probability {result.total_accept_prob:.6f}, written to {path}"
    )
