import logging

from schemas.experiment import ExperimentConfig, Family, GeneratorParams
from schemas.results import CommandResponse
from utils.generators import generate
from utils.network_ops import dump_instance
from utils.run_logger import RunLogger, safe_log_event

from commands import output_path

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("generate", help="Write generated instances to graph files")
    parser.add_argument("--family", choices=[f.value for f in Family], help="Graph family")
    parser.add_argument("--n", type=int, help="Vertices, leaves, path length or input length")
    parser.add_argument("--rows", type=int)
    parser.add_argument("--cols", type=int)
    parser.add_argument("--negative", action="store_true", help="Drop the marked set")
    parser.add_argument("--file", help="Destination graph file (single instance only)")
    parser.set_defaults(handler=handle)


def handle(args, config: ExperimentConfig) -> CommandResponse:
    """One instance per entry of config.sizes, or a single one at params.n"""
    family = Family(args.family) if args.family else config.family
    overrides = {
        key: value for key, value in (("n", args.n), ("rows", args.rows), ("cols", args.cols))
        if value is not None
    }
    if args.negative:
        overrides["positive"] = False
    base = GeneratorParams(**{**config.params.model_dump(), **overrides})
    sizes = config.sizes if config.sizes and args.n is None else [base.n]

    written = []
    for n in sizes:
        params = base.model_copy(update={"n": n})
        graph, sigma, marked = generate(family, params, config.seed)
        instance_id = f"{family.value}-{n}"
        target = args.file if args.file and len(sizes) == 1 else output_path(config, f"{instance_id}.json")
        path = dump_instance(target, graph, sigma, marked)
        safe_log_event(RunLogger.log_instance, instance_id, graph.vertices, graph.edge_count)
        written.append({
            "instance_id": instance_id,
            "vertices": graph.vertices,
            "edges": graph.edge_count,
            "marked": sorted(marked.marked),
            "path": str(path),
        })

    logger.info(f"Generated {len(written)} {family.value} instance(s)")
    return CommandResponse(success=True, data=written, message="Instances written", count=len(written))
