# app.py
"""
Command-line entry point.

    python app.py conditioning [--k 4 8 16] [--dx-list 0.1 0.05]
    python app.py symmetry
    python app.py wavespeed
    python app.py bistability [--seeds 0.45 0.55] [--mesh-check]
    python app.py bifurcation [--vmin 0.3 0.5 0.7] [--no-dynamic]
    python app.py speeds [--vmin 0.5] [--scan-points 200]
    python app.py run config.yaml

Common flags: --out DIR, --threads N, --dx, --dt, --t-end. The exit code is
nonzero when any run aborted.
"""
import argparse
import sys
import time
from typing import List, Optional

from config.run_file import load_run_file
from config.settings import config
from services.scenarios import ScenarioResult, ScenarioRunner
from utils.error_handler import ChemowaveError
from utils.logger import get_logger

# Initialize logger
logger = get_logger(__name__)

EXIT_OK = 0
EXIT_ABORTED = 1
EXIT_ERROR = 2


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subcommand per scenario."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--out', default=None, help="Output directory (defaults to the configured one)")
    common.add_argument('--threads', type=int, default=None, help="Worker processes for independent runs")
    common.add_argument('--dx', type=float, default=None, help="Override the cell width")
    common.add_argument('--dt', type=float, default=None, help="Override the time step")
    common.add_argument('--t-end', dest='t_end', type=float, default=None, help="Override the final time")
    common.add_argument('--quiet', action='store_true', help="Hide progress bars")

    parser = argparse.ArgumentParser(
        prog='chemowave',
        description=f"{config.app_name} {config.version}: kinetic chemotaxis waves",
    )
    sub = parser.add_subparsers(dest='command', required=True)

    conditioning = sub.add_parser('conditioning', parents=[common], help="S-matrix condition numbers")
    conditioning.add_argument('--k', dest='half_counts', type=int, nargs='+', default=None)
    conditioning.add_argument('--dx-list', dest='dx_list', type=float, nargs='+', default=None)

    sub.add_parser('symmetry', parents=[common], help="Symmetry of the aggregation model")
    sub.add_parser('wavespeed', parents=[common], help="Velocity profiles of the travelling pulse")

    bistability = sub.add_parser('bistability', parents=[common], help="Runs seeded with stationary waves")
    bistability.add_argument('--seeds', type=float, nargs='+', default=None)
    bistability.add_argument('--mesh-check', action='store_true', help="Also run the fast wave on both meshes")

    bifurcation = sub.add_parser('bifurcation', parents=[common], help="Wave speeds against v_min")
    bifurcation.add_argument('--vmin', type=float, nargs='+', default=None)
    bifurcation.add_argument('--no-dynamic', dest='dynamic', action='store_false')

    speeds = sub.add_parser('speeds', parents=[common], help="Upsilon scan and its roots")
    speeds.add_argument('--vmin', type=float, default=0.5)
    speeds.add_argument('--scan-points', type=int, default=None)

    run = sub.add_parser('run', parents=[common], help="Single run from a YAML file or a result file header")
    run.add_argument('config', help="Run file (.yaml) or result file (.csv)")

    return parser


def dispatch(args: argparse.Namespace) -> List[ScenarioResult]:
    """Run the selected command."""
    overrides = {'dx': args.dx, 'dt': args.dt, 't_end': args.t_end}
    output_dir = args.out

    if args.command == 'run':
        run_file = load_run_file(args.config)
        output_dir = output_dir or run_file.output.directory
        runner = ScenarioRunner(output_dir, args.threads, overrides, progress=not args.quiet)
        return [runner.custom(run_file.to_sim_config())]

    runner = ScenarioRunner(output_dir, args.threads, overrides, progress=not args.quiet)

    if args.command == 'conditioning':
        return [runner.conditioning(args.half_counts, args.dx_list)]
    if args.command == 'symmetry':
        return [runner.symmetry()]
    if args.command == 'wavespeed':
        return [runner.wavespeed()]
    if args.command == 'bistability':
        results = [runner.bistability(args.seeds)]
        if args.mesh_check:
            results.append(runner.mesh_sensitivity())
        return results
    if args.command == 'bifurcation':
        return [runner.bifurcation(args.vmin, dynamic=args.dynamic)]
    if args.command == 'speeds':
        return [runner.speeds(args.vmin, args.scan_points)]

    raise ValueError(f"Unknown command: {args.command}")


def main(argv: Optional[List[str]] = None) -> int:
    """
    Parse arguments, run and report.

    Returns:
        Process exit code
    """
    args = build_parser().parse_args(argv)
    start = time.time()

    try:
        results = dispatch(args)
    except ChemowaveError as e:
        logger.error(f"{args.command} failed: {e.message} | {e.to_dict()}")
        print(f"Error: {e.message}", file=sys.stderr)
        return EXIT_ERROR

    aborted = sum(result.aborted for result in results)
    for result in results:
        for path in result.files:
            print(path)
    logger.log_performance(args.command, time.time() - start, {'aborted': aborted})

    if aborted:
        print(f"{aborted} run(s) aborted", file=sys.stderr)
        return EXIT_ABORTED
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
