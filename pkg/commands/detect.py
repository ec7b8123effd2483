import logging
from pathlib import Path

from models.detection import DetectionModel
from models.errors import PreconditionError
from schemas.experiment import ExperimentConfig
from schemas.results import CommandResponse, SweepRow
from utils.detector import detect, measure_support_marked, sample_detection
from utils.electric import effective_resistance
from utils.exporters import sweep_frame, write_csv, write_json
from utils.network_ops import load_instance, prepare_bipartite
from utils.run_logger import RunLogger, safe_log_event
from utils.walk_builder import build_walk_operator, export_matrix

from commands import output_path

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("detect", help="Exact accept probability of the detection algorithm")
    parser.add_argument("graph", help="Graph file with sigma and the marked set")
    parser.add_argument("--resistance", type=float, help="Upper bound R; defaults to R_{sigma,M} on positive instances")
    parser.add_argument("--theta", type=float, help="Override the phase-estimation precision")
    parser.add_argument("--shots", type=int, help="Also draw this many seeded accept/reject samples")
    parser.add_argument("--export-matrix", help="Write U as row-major text to this file")
    parser.set_defaults(handler=handle)


def handle(args, config: ExperimentConfig) -> CommandResponse:
    graph, sigma, marked = load_instance(args.graph)
    if args.resistance is not None:
        resistance = args.resistance
    elif marked:
        resistance = effective_resistance(graph, sigma, marked)
    else:
        raise PreconditionError("an instance without marked vertices needs --resistance", args.graph)

    params = config.walk_params(resistance)
    model = DetectionModel.parse(config.model)
    result = detect(graph, sigma, marked, params, model, theta=args.theta)
    stem = Path(args.graph).stem
    safe_log_event(RunLogger.log_detection, stem, result.total_accept_prob, result.steps, model.value)

    payload = {"result": result.model_dump(mode="json")}
    if args.shots:
        payload["samples"] = sample_detection(result, args.shots, config.seed).model_dump()
    if args.export_matrix:
        prepared = prepare_bipartite(graph, sigma, marked)
        _, collapsed = measure_support_marked(prepared.sigma, prepared.marked)
        if collapsed is None:
            raise PreconditionError("every source is marked, no walk operator is built", args.graph)
        op = build_walk_operator(prepared.network, collapsed, prepared.marked, params)
        payload["matrix"] = str(export_matrix(args.export_matrix, op.unitary, op.space))

    row = SweepRow(
        instance_id=stem,
        n=graph.vertices,
        W=result.total_weight,
        R=resistance,
        theta=result.theta_used,
        steps=result.steps,
        model=model.value,
        accept_prob=result.total_accept_prob,
        is_positive=bool(marked)
    )
    payload["csv"] = str(write_csv(sweep_frame([row]), output_path(config, f"detect-{stem}.csv")))
    payload["json"] = str(write_json(payload, output_path(config, f"detect-{stem}.json")))

    return CommandResponse(
        success=True,
        data=payload,
        message=f"accept probability {result.total_accept_prob:.6f} after {result.steps} steps"
    )
