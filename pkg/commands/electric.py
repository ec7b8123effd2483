import logging
from pathlib import Path

from schemas.experiment import ExperimentConfig
from schemas.results import CommandResponse
from utils.electric import (
    commute_time, effective_resistance, electric_flow, flow_energy, flow_to_records, hitting_time, potentials
)
from utils.exporters import write_json
from utils.network_ops import load_instance, total_weight

from commands import output_path

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("electric", help="Potentials, electric flow, resistance and hitting time")
    parser.add_argument("graph", help="Graph file with sigma and the marked set")
    parser.add_argument("--pair", nargs=2, type=int, metavar=("S", "T"), help="Also report the commute time of S and T")
    parser.set_defaults(handler=handle)


def handle(args, config: ExperimentConfig) -> CommandResponse:
    graph, sigma, marked = load_instance(args.graph)
    flow = electric_flow(graph, sigma, marked)
    resistance = effective_resistance(graph, sigma, marked)
    weight = total_weight(graph)
    data = {
        "total_weight": weight,
        "resistance": resistance,
        "energy": flow_energy(flow, graph),
        "hitting_time": hitting_time(graph, sigma, marked),
        "potentials": potentials(graph, sigma, marked).tolist(),
        "flow": flow_to_records(flow, graph),
    }
    if args.pair:
        s, t = args.pair
        data["commute_time"] = commute_time(graph, s, t)

    path = write_json(data, output_path(config, f"electric-{Path(args.graph).stem}.json"))
    logger.info(f"R = {resistance:.12g}, W = {weight:.12g}")
    return CommandResponse(success=True, data=data, message=f"Results written to {path}")
