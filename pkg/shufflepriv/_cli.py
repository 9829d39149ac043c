import argparse
import json
import logging
import os
import sys

import pandas as pd

from shufflepriv._bench import (ExperimentConfig, calibrate, load_datasets,
                                resolve_threads, run_grid, run_single,
                                schedule_label)
from shufflepriv._core import (ConfigurationError, CSVParseError,
                               DivergenceError, NumericError,
                               PrivacyError)
from shufflepriv._data import write_csv
from shufflepriv._engine import solve_optimum
from shufflepriv._privacy import PrivacyBudget
from shufflepriv._schedule import Schedule, ScheduleKind, parse_schedule
from shufflepriv._sim import SyntheticSpec, generate


logger = logging.getLogger('shufflepriv')

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_DIVERGED = 4

_SYNTHETIC_FLAGS = {
    'd': int, 'n': int, 'shift': float, 'cluster_std': float,
    'center_norm': float, 'rotation_scale': float, 'base_std': float,
    'response_noise': float, 'n_classes': int, 'public_classes': int,
    'private_rate': float, 'public_rate': float,
}


def _add_data_args(parser, require_kind=False):
    group = parser.add_argument_group('data')
    group.add_argument(
        '--kind', help=('Synthetic construction (shifted-mean, '
                        'rotation-corrupted, class-subset, label-shift).'),
        required=require_kind)
    group.add_argument('--data-seed', help='Seed of the synthetic data.',
                       type=int, default=None)
    for name, kind in _SYNTHETIC_FLAGS.items():
        group.add_argument('--' + name.replace('_', '-'), type=kind,
                           default=None, dest=name,
                           help=f'Synthetic parameter `{name}`.')
    group.add_argument('--normalize', default=None,
                       help='Feature normalisation (none, zscore, unit-ball).')
    if not require_kind:
        group.add_argument('--private-csv', help='Private dataset CSV.',
                           default=None)
        group.add_argument('--public-csv', help='Public dataset CSV.',
                           default=None)
        group.add_argument('--label-column', default=None,
                           help='Response column (index or header name).')


def _add_task_args(parser):
    group = parser.add_argument_group('task')
    group.add_argument('--task', default=None,
                       help='mean-estimation, ridge or lasso-logistic.')
    group.add_argument('--regularizer', default=None,
                       help='ball, l2, l1 or none (default: per task).')
    group.add_argument('--radius', type=float, default=None,
                       help='Ball radius C.')
    group.add_argument('--lambda-r', type=float, default=None,
                       dest='lambda_r', help='Ridge strength.')
    group.add_argument('--lambda-l', type=float, default=None,
                       dest='lambda_l', help='Lasso strength.')
    group.add_argument('--clip', type=float, default=None, dest='clip_norm',
                       help='Gradient clipping norm.')
    group.add_argument('--public-clip', type=float, default=None,
                       dest='public_clip_norm',
                       help='Clipping norm of public gradients.')
    group.add_argument('--label-encoding', default=None,
                       help='Logistic labels: pm1 or 01.')


def _add_privacy_args(parser, many=False):
    group = parser.add_argument_group('privacy')
    nargs = '+' if many else None
    group.add_argument('--schedule', nargs=nargs, default=None,
                       dest='schedules',
                       help='dp-shuffleg, priv-pub, pub-priv, interleaved '
                            'or public-only.')
    group.add_argument('--p', type=float, nargs=nargs, default=None,
                       help='Fraction of private gradient steps.')
    group.add_argument('--strategy', nargs=nargs, default=None,
                       dest='strategies', help='ig, so or rr.')
    group.add_argument('--eps', type=float, nargs=nargs, default=None,
                       dest='epsilons', help='Privacy budget epsilon.')
    group.add_argument('--delta', type=float, default=None,
                       help='Privacy budget delta.')
    group.add_argument('--epochs', type=int, default=None,
                       help='Number of epochs K.')
    group.add_argument('--public-order', default=None,
                       help='fixed or shuffled public slices.')


def _synthetic(args):
    if getattr(args, 'kind', None) is None:
        return None
    spec = {'kind': args.kind}
    for name in _SYNTHETIC_FLAGS:
        value = getattr(args, name)
        if value is not None:
            spec[name] = value
    if args.data_seed is not None:
        spec['seed'] = args.data_seed
    if args.normalize is not None:
        spec['normalize'] = args.normalize
    return spec


def _config(args, config_path=None) -> ExperimentConfig:
    overrides = {}
    for name in ('task', 'regularizer', 'radius', 'lambda_r', 'lambda_l',
                 'clip_norm', 'public_clip_norm', 'label_encoding',
                 'schedules', 'p', 'strategies', 'epsilons', 'delta',
                 'epochs', 'public_order', 'private_csv', 'public_csv',
                 'label_column', 'normalize', 'etas', 'seeds',
                 'output_dir'):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    synthetic = _synthetic(args)
    if synthetic is not None:
        overrides['synthetic'] = synthetic
        overrides.pop('normalize', None)
    if config_path is not None:
        return ExperimentConfig.from_json(config_path, overrides)
    return ExperimentConfig.from_dict(overrides)


def _write_json(path, payload):
    with open(path, 'w', encoding='utf-8', newline='\n') as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write('\n')


def cli_calibrate(args):
    budget = PrivacyBudget(args.eps, args.delta)
    names = args.schedule or [s.value for s in Schedule]
    out = []
    for name in names:
        schedule = parse_schedule(name)
        p = None if schedule in (Schedule.DP_SHUFFLEG,
                                 Schedule.PUBLIC_ONLY) else args.p
        kind = ScheduleKind(schedule, p)
        lipschitz = args.clip
        if (schedule is Schedule.INTERLEAVED
                and args.public_clip is not None):
            lipschitz = max(args.clip, args.public_clip)
        out.append(calibrate(kind, args.n, args.epochs, budget,
                             lipschitz).to_dict())
    print(json.dumps(out, indent=2, sort_keys=True))
    return EXIT_OK


def cli_datagen(args):
    spec = SyntheticSpec(**_synthetic(args))
    private, public = generate(spec)
    os.makedirs(args.output_dir, exist_ok=True)
    write_csv(private, os.path.join(args.output_dir, 'private.csv'))
    write_csv(public, os.path.join(args.output_dir, 'public.csv'))
    _write_json(os.path.join(args.output_dir, 'spec.json'), spec.to_dict())
    logger.info('wrote %d private and %d public samples to %s',
                private.n, public.n, args.output_dir)
    return EXIT_OK


def cli_optimum(args):
    config = _config(args)
    private, _ = load_datasets(config)
    result = solve_optimum(config.task_objective(),
                           config.regularizer_object(), private,
                           max_iter=args.max_iter)
    os.makedirs(args.output_dir, exist_ok=True)
    pd.DataFrame({'x': result.x}).to_csv(
        os.path.join(args.output_dir, 'x_star.csv'), index=False,
        float_format='%.17g', lineterminator='\n', encoding='utf-8')
    _write_json(os.path.join(args.output_dir, 'optimum.json'), {
        'objective': result.objective,
        'iterations': result.iterations,
        'converged': result.converged,
        'gradient_mapping_norm': result.gradient_mapping_norm,
        'x': result.x.tolist(),
    })
    print(json.dumps({'objective': result.objective,
                      'converged': result.converged}))
    return EXIT_OK


def cli_run(args):
    config = _config(args, args.config)
    private, public = load_datasets(config)
    kind = config.schedule_kinds()[0]
    strategy = config.strategy_objects()[0]
    eps = config.epsilons[0]
    x_star = solve_optimum(config.task_objective(),
                           config.regularizer_object(), private,
                           max_iter=config.optimum_max_iter).x
    trajectory, record = run_single(config, kind, strategy, eps, args.eta,
                                    args.seed, private, public, x_star,
                                    args.dissimilarity_perms)
    os.makedirs(config.output_dir, exist_ok=True)
    trajectory.write_csv(os.path.join(config.output_dir, 'trajectory.csv'))
    _write_json(os.path.join(config.output_dir, 'run.json'), record)
    logger.info('%s: final objective %.6g', schedule_label(kind, strategy),
                trajectory.final_objective)
    return EXIT_OK


def cli_grid(args):
    config = _config(args, args.config)
    threads = resolve_threads(args.threads)
    result = run_grid(config, threads)
    result.write(config.output_dir, config)
    missing = [k for k, v in result.winners.items() if v is None]
    for label, eps in missing:
        logger.warning('no winner for %s at epsilon=%g', label, eps)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='shufflepriv',
        description='Differentially private shuffled gradient methods.')
    parser.add_argument('--verbose', action='store_true',
                        help='Debug logging.')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('calibrate', help='Noise calibration per schedule.')
    p.add_argument('--schedule', nargs='+', default=None,
                   help='Schedules to calibrate (default: all).')
    p.add_argument('--eps', type=float, required=True,
                   help='Privacy budget epsilon.')
    p.add_argument('--delta', type=float, default=1e-6,
                   help='Privacy budget delta.')
    p.add_argument('--epochs', type=int, default=50,
                   help='Number of epochs K.')
    p.add_argument('--clip', type=float, default=10.0,
                   help='Clipping norm (Lipschitz constant).')
    p.add_argument('--public-clip', type=float, default=None,
                   help='Public clipping norm (interleaved).')
    p.add_argument('--p', type=float, default=0.5,
                   help='Fraction of private gradient steps.')
    p.add_argument('--n', type=int, default=1000,
                   help='Private dataset size.')
    p.set_defaults(func=cli_calibrate)

    p = sub.add_parser('datagen', help='Write a synthetic D/P pair.')
    _add_data_args(p, require_kind=True)
    p.add_argument('--output-dir', required=True, help='Output directory.')
    p.set_defaults(func=cli_datagen)

    p = sub.add_parser('optimum', help='Solve for the regularised optimum.')
    _add_data_args(p)
    _add_task_args(p)
    p.add_argument('--max-iter', type=int, default=10 ** 6,
                   help='Proximal gradient iteration cap.')
    p.add_argument('--output-dir', required=True, help='Output directory.')
    p.set_defaults(func=cli_optimum)

    p = sub.add_parser('run', help='A single private training run.')
    p.add_argument('--config', default=None, help='JSON experiment config.')
    _add_data_args(p)
    _add_task_args(p)
    _add_privacy_args(p)
    p.add_argument('--eta', type=float, required=True, help='Learning rate.')
    p.add_argument('--seed', type=int, default=0, help='Run seed.')
    p.add_argument('--dissimilarity-perms', type=int, default=0,
                   help=('Permutations for the private/public dissimilarity '
                         'estimate stored in run.json (0: skip).'))
    p.add_argument('--output-dir', default=None, help='Output directory.')
    p.set_defaults(func=cli_run)

    p = sub.add_parser('grid', help='Learning-rate grid over schedules.')
    p.add_argument('--config', default=None, help='JSON experiment config.')
    _add_data_args(p)
    _add_task_args(p)
    _add_privacy_args(p, many=True)
    p.add_argument('--etas', type=float, nargs='+', default=None,
                   help='Learning-rate grid.')
    p.add_argument('--seeds', type=int, nargs='+', default=None,
                   help='Run seeds.')
    p.add_argument('--threads', type=int, default=None,
                   help='Worker processes (default: $SHUFFLEPRIV_THREADS).')
    p.add_argument('--output-dir', default=None, help='Output directory.')
    p.set_defaults(func=cli_grid)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format='%(asctime)s - %(levelname)s - %(message)s')
    try:
        return args.func(args)
    except DivergenceError as e:
        logger.error('%s', e)
        return EXIT_DIVERGED
    except (CSVParseError, OSError) as e:
        logger.error('%s', e)
        return EXIT_IO
    except (ConfigurationError, PrivacyError, ValueError, TypeError,
            NumericError) as e:
        logger.error('%s', e)
        return EXIT_CONFIG


if __name__ == '__main__':
    sys.exit(main())
