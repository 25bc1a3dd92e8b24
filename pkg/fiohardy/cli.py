"""
fio-hardy console script.

Exit codes: 0 success, 1 usage, configuration or other library error,
2 tolerance failure, 3 resolution failure.
"""

import argparse
import logging
import os
import sys

from fiohardy import __version__
from fiohardy.analysis import EXPERIMENTS, run_experiment, write_report, write_summary
from fiohardy.constants import Constants
from fiohardy.errors import FIOHardyError, ResolutionError, ToleranceError
from fiohardy.field import GridSpec, set_workers
from fiohardy.fio import OPERATORS, offsing_fit, operator_from_config
from fiohardy.metric import doubling_profile
from fiohardy.packets import build_profiles, write_profiles
from fiohardy.transform import TransformPlan, analyze, hardy_norm
from fiohardy.utilities import (configure_logging, read_field, read_flat_config, write_csv,
                                write_phase_field)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_TOLERANCE = 2
EXIT_RESOLUTION = 3

# keys of an operator config that are not plan settings
OPERATOR_KEYS = ('op', 'width')


def parse_args(argv=None):
    parser = argparse.ArgumentParser(prog='fio-hardy', description='Hardy spaces for Fourier integral operators.')
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    parser.add_argument('--verbose', action='store_true', help='log progress at INFO')
    parser.add_argument('--workers', type=int, default=None, help='scipy.fft workers, -1 for all cores')
    commands = parser.add_subparsers(dest='command', required=True)

    transform = commands.add_parser('transform', help='wave packet transform of a field dump')
    transform.add_argument('--in', dest='infile', required=True)
    transform.add_argument('--plan', default=None, help='flat key = value plan config')
    transform.add_argument('--out', required=True)

    norm = commands.add_parser('norm', help='H^p_FIO norm of a field dump')
    norm.add_argument('--p', required=True, help='1, 2, ... or inf')
    norm.add_argument('--in', dest='infile', required=True)
    norm.add_argument('--plan', default=None)
    norm.add_argument('--out', default=None)

    offsing = commands.add_parser('offsing', help='off-singularity bound fit of a lifted operator kernel')
    offsing.add_argument('--op', choices=OPERATORS, default=None)
    offsing.add_argument('--t', type=float, default=None)
    offsing.add_argument('--N', type=int, default=3)
    offsing.add_argument('--config', default=None, help='operator and plan settings')
    offsing.add_argument('--no-refine', action='store_true', help='skip the refined grid comparison')
    offsing.add_argument('--out', required=True)

    experiment = commands.add_parser('experiment', help='run a named experiment')
    experiment.add_argument('--name', choices=EXPERIMENTS, required=True)
    experiment.add_argument('--config', default=None)
    experiment.add_argument('--p', default='1', help='exponent for the embedding experiment')
    experiment.add_argument('--out', required=True)
    experiment.add_argument('--plot', action='store_true')
    experiment.add_argument('--summary', default=None, help='json file for the parameters, verdict and exponents')

    profiles = commands.add_parser('profiles', help='dump the packet profiles')
    profiles.add_argument('--bump', default='standard')
    profiles.add_argument('--dim', type=int, default=2)
    profiles.add_argument('--out', required=True)

    volume = commands.add_parser('volume', help='monte carlo ball volumes')
    volume.add_argument('--tau', type=float, nargs='+', required=True)
    volume.add_argument('--trials', type=int, default=200000)
    volume.add_argument('--seed', type=int, default=20240607)
    volume.add_argument('--dim', type=int, default=2)
    volume.add_argument('--out', required=True)
    return parser.parse_args(argv)


def load_constants(settings):
    mc = Constants()
    if settings:
        mc.update_from_dictionary(settings)
    return mc


def _plan_for(mc, grid):
    return TransformPlan.from_constants(mc, grid)


def cmd_transform(args, mc):
    f = read_field(args.infile)
    F = analyze(_plan_for(mc, f.grid), f)
    write_phase_field(args.out, F)
    logger.info('wrote %s (%d directions, %d levels)', args.out, F.sphere.size, F.sigmas.size)
    return EXIT_OK


def cmd_norm(args, mc):
    f = read_field(args.infile)
    report = hardy_norm(_plan_for(mc, f.grid), f, args.p)
    field_id = os.path.splitext(os.path.basename(args.infile))[0]
    row = (field_id,) + report.row() + (__version__,)
    header = ['field_id', 'p', 'norm', 'alt_norm', 'lowfreq', 'grid', 'version']
    if args.out:
        write_csv(args.out, header, [row])
    print(''.join("{: >20} ".format(h) for h in header))
    print(''.join("{: >20} ".format(str(v)) for v in row))
    return EXIT_OK


def cmd_offsing(args, settings, mc):
    if args.op is not None:
        settings['op'] = args.op
    if args.t is not None:
        settings['t'] = args.t
    grid = GridSpec(mc.dim, mc.points_per_axis, mc.extent)
    plan_w = TransformPlan.from_constants(mc, grid)
    plan_v = TransformPlan.from_constants(mc, grid, mc.second_bump)
    T = operator_from_config(settings, mc.dim, plan_w.profiles)
    report = offsing_fit(T, plan_w, plan_v, args.N, refine=not args.no_refine)
    rows = report.rows()
    rows.append((args.N, 'all', 'all', report.C_fit, report.grid_tag, report.contact))
    if report.refined_C is not None:
        rows.append((args.N, 'all', 'refined', report.refined_C, plan_w.grid.refined(2).tag, report.contact))
    write_csv(args.out, ['N', 'sigma', 'tau', 'C', 'grid', 'contact'], rows)
    print("{: >20} {: >20} {: >20}".format('operator', 'C_fit', 'refined'))
    print("{: >20} {: >20} {: >20}".format(T.name, '%.6g' % report.C_fit, str(report.refined_C)))
    if report.refinement_stable is False:
        raise ToleranceError(f"C_fit={report.C_fit:.4g} changes to {report.refined_C:.4g} under refinement")
    return EXIT_OK


def cmd_experiment(args, mc):
    report = run_experiment(args.name, mc, args.p)
    write_report(args.out, report)
    if args.summary:
        write_summary(args.summary, report)
    for quantity, parameter, value in report.measurements:
        print("{: >20} {: >20} {: >20}".format(quantity, str(parameter), '%.6g' % value))
    for key, fit in report.exponents.items():
        print("{: >20} {: >20} {: >20}".format(key + ' exponent', '+- %.3g' % fit.halfwidth, '%.4g' % fit.slope))
    if args.plot:
        from plotting import plots
        plots.plot_report(report)
    if not report.resolution_ok:
        raise ResolutionError(f"experiment '{args.name}' was not resolved on {report.grid_tag}")
    if not report.passed:
        raise ToleranceError(f"experiment '{args.name}' failed its acceptance checks")
    return EXIT_OK


def cmd_profiles(args):
    write_profiles(args.out, build_profiles(args.bump, args.dim))
    return EXIT_OK


def cmd_volume(args):
    study = doubling_profile(args.tau, args.trials, args.seed, args.dim)
    write_csv(args.out, ['tau', 'volume', 'stderr', 'trials', 'seed'], study.rows())
    for row in study.rows():
        print(''.join("{: >20} ".format('%.6g' % v) for v in row[:3]))
    return EXIT_OK


def dispatch(args):
    if args.command == 'profiles':
        return cmd_profiles(args)
    if args.command == 'volume':
        return cmd_volume(args)

    path = getattr(args, 'plan', None) or getattr(args, 'config', None)
    settings = read_flat_config(path) if path else {}
    plan_settings = {k: v for k, v in settings.items() if k not in OPERATOR_KEYS}
    mc = load_constants(plan_settings)
    if args.verbose:
        mc.logging_on = True
    configure_logging(mc)
    if args.workers is not None:
        mc.fft_workers = args.workers
    set_workers(mc.fft_workers)

    if args.command == 'transform':
        return cmd_transform(args, mc)
    if args.command == 'norm':
        return cmd_norm(args, mc)
    if args.command == 'offsing':
        return cmd_offsing(args, settings, mc)
    return cmd_experiment(args, mc)


def main(argv=None):
    try:
        args = parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors, which is the tolerance code here
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    if args.verbose and args.command in ('profiles', 'volume'):
        mc = Constants()
        mc.logging_on = True
        configure_logging(mc)
    try:
        return dispatch(args)
    except ToleranceError as exc:
        logger.error('%s', exc)
        return EXIT_TOLERANCE
    except ResolutionError as exc:
        logger.error('%s', exc)
        return EXIT_RESOLUTION
    except (FIOHardyError, OSError) as exc:
        logger.error('%s', exc)
        return EXIT_ERROR


if __name__ == '__main__':
    sys.exit(main())
