import logging
from typing import List, Optional, Sequence, Tuple

from models.errors import InvalidParameterError
from schemas.experiment import ExperimentConfig
from schemas.results import CommandResponse
from utils.exporters import write_json
from utils.learning_compiler import LearningGraphCompiler, chain_graph, load_learning_graph, star_graph

from commands import output_path

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("learning", help="Compile a learning graph and certify detection on it")
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--graph", help="Learning graph file")
    source.add_argument("--or-star", type=int, metavar="N", help="Star learning graph for OR on N bits")
    source.add_argument("--and-chain", type=int, metavar="N", help="Chain learning graph for AND on N bits")
    parser.add_argument("--positive", action="append", help="Positive input as comma-separated values")
    parser.add_argument("--negative", action="append", help="Negative input as comma-separated values")
    parser.set_defaults(handler=handle)


def _parse_inputs(values: Optional[Sequence[str]]) -> Optional[List[Tuple[int, ...]]]:
    if not values:
        return None
    try:
        return [tuple(int(v) for v in value.split(",")) for value in values]
    except ValueError:
        raise InvalidParameterError(f"inputs must be comma-separated integers, got {list(values)}")


def handle(args, config: ExperimentConfig) -> CommandResponse:
    """Certify on the given inputs, or on the whole domain when none are given"""
    if args.graph:
        graph, name = load_learning_graph(args.graph), "file"
    elif args.or_star:
        graph, name = star_graph(args.or_star, "or"), f"or-star-{args.or_star}"
    else:
        graph, name = chain_graph(args.and_chain, "and"), f"and-chain-{args.and_chain}"

    compiler = LearningGraphCompiler(graph)
    rows = [tuple(int(v) for v in row) for row in compiler.domain]
    positives = _parse_inputs(args.positive) or [x for x, f in zip(rows, compiler.values) if f]
    negatives = _parse_inputs(args.negative) or [x for x, f in zip(rows, compiler.values) if not f]

    report = compiler.certify_detection(positives, negatives, config.walk_params(), config.model)
    path = write_json(report, output_path(config, f"learning-{name}.json"))
    logger.info(f"Learning graph complexity {report.complexity:.12g}, written to {path}")
    return CommandResponse(
        success=report.passed,
        data=report.model_dump(mode="json"),
        message="certification passed" if report.passed else f"{len(report.failures)} certification failures",
        count=len(report.rows)
    )
