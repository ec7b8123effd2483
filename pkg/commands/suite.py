import asyncio

from schemas.experiment import ExperimentConfig, SuiteName
from schemas.results import CommandResponse
from utils.suites import run_suite_async


def register(subparsers) -> None:
    parser = subparsers.add_parser("suite", help="Run a check suite and write its tables")
    parser.add_argument("name", nargs="?", choices=[s.value for s in SuiteName], help="Suite to run")
    parser.set_defaults(handler=handle)


def handle(args, config: ExperimentConfig) -> CommandResponse:
    if args.name:
        config = config.model_copy(update={"suite": SuiteName(args.name)})
    reports = asyncio.run(run_suite_async(config))
    failures = [f"{report.name}/{failure}" for report in reports for failure in report.failures]
    return CommandResponse(
        success=not failures,
        data=[{
            "suite": report.name,
            "passed": report.passed,
            "checks": len(report.checks),
            "failures": report.failures,
            "artifacts": report.artifacts,
        } for report in reports],
        message="all checks passed" if not failures else f"{len(failures)} failing checks",
        count=len(reports)
    )
