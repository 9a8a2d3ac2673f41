"""
dynsbm: simulation and estimation for dynamic stochastic block models
Copyright (C) 2026  the dynsbm developers
Licensed under the GNU Lesser General Public License v3.0 or later.


Command line entry point `dynsbm`.
"""

import argparse
import json
import logging
import os
import sys

import numpy as np

from .exact.likelihood import exact_loglik, normalization
from .exact.mle import MleConfig, exact_mle
from .experiment.config import ExperimentConfig
from .experiment.outputs import emit_outputs
from .experiment.runner import run_consistency_experiment
from .generic.exceptions import DynSBMException, ExperimentFailedException
from .generic.parameters import DELTA, MLE_RESTARTS, VEM_RESTARTS, VEM_TOL, ZETA
from .generic.read import _clean, read_dataset, read_params, write_dataset, write_json
from .model.sampler import sample_graphs, sample_latent_paths
from .theory.bounds import concentration_report
from .vem.fit import VemConfig, fit_vem
from .vem.init import STRATEGIES

logger = logging.getLogger(__name__)

EXIT_ERROR = 1
EXIT_EXPERIMENT_FAILED = 2


def _emit(content: dict, out: str | None):
    if out:
        write_json(out, content)
        logger.info('wrote %s', out)
    else:
        print(json.dumps(_clean(content), indent=2, sort_keys=True))


def cmd_generate(args) -> int:
    params = read_params(args.params)
    seed_z, seed_x = (int(s.generate_state(1)[0]) for s in np.random.SeedSequence(args.seed).spawn(2))
    z = sample_latent_paths(params, args.n, args.T, seed_z)
    x = sample_graphs(params, z, seed_x)
    os.makedirs(args.out, exist_ok=True)
    fn = os.path.join(args.out, 'data.h5' if args.hdf5 else 'data.json')
    write_dataset(fn, x, z)
    logger.info('wrote %s (%d nodes, %d steps, density %.4f)', fn, x.n, x.T, x.density())
    return 0


def cmd_exact_loglik(args) -> int:
    params = read_params(args.params)
    x, _ = read_dataset(args.data)
    value = exact_loglik(params, x, args.method).value
    _emit({'loglik': value, 'normalized': normalization(x.n, x.T) * value}, args.out)
    return 0


def _finish_report(report, args):
    if args.truth:
        report = report.with_truth(read_params(args.truth))
    _emit(report.to_dict(), args.out)
    return 0


def cmd_fit_mle(args) -> int:
    x, _ = read_dataset(args.data)
    config = MleConfig(
        restarts=args.restarts,
        seed=args.seed,
        delta=args.delta,
        zeta=args.zeta,
        time_varying_pi=args.time_varying_pi,
        record_timing=args.timing,
    )
    warm = None
    if args.warm_start_vem:
        vem = VemConfig(
            seed=args.seed, delta=args.delta, zeta=args.zeta, time_varying_pi=args.time_varying_pi
        )
        warm = fit_vem(x, args.Q, vem).params
    return _finish_report(exact_mle(x, args.Q, config, warm_start=warm), args)


def cmd_fit_vem(args) -> int:
    x, _ = read_dataset(args.data)
    config = VemConfig(
        restarts=args.restarts,
        init=args.init,
        tol=args.tol,
        seed=args.seed,
        delta=args.delta,
        zeta=args.zeta,
        time_varying_pi=args.time_varying_pi,
        tie_diagonal=args.tie_diagonal,
        n_jobs=args.jobs,
        record_timing=args.timing,
    )
    return _finish_report(fit_vem(x, args.Q, config), args)


def cmd_check_theory(args) -> int:
    params = read_params(args.params)
    report = concentration_report(params, args.n, args.T, args.reps, args.seed, eta=args.eta)
    logger.info('concentration checks:\n%s', report)
    _emit(report.to_dict(), args.out)
    return 0


def cmd_experiment(args) -> int:
    config = ExperimentConfig.read(args.config)
    result = run_consistency_experiment(config)
    emit_outputs(result, config.output_dir, config=config.to_dict(), rates=config.rates)
    if result.failed_cells:
        raise ExperimentFailedException(result.failed_cells)
    return 0


def _add_margins(p: argparse.ArgumentParser):
    p.add_argument('--delta', type=float, default=DELTA, help='transition margin')
    p.add_argument('--zeta', type=float, default=ZETA, help='connectivity margin')
    p.add_argument('--time-varying-pi', action='store_true', help='one pi per time step')
    p.add_argument('--truth', help='true parameters; adds aligned errors to the report')
    p.add_argument('--timing', action='store_true', help='record wall time')
    p.add_argument('--out', help='output JSON (stdout when omitted)')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='dynsbm', description='Dynamic stochastic block models: simulation and estimation'
    )
    parser.add_argument('-v', '--verbose', action='store_true', help='debug logging')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('generate', help='sample latent paths and graphs')
    p.add_argument('--params', required=True)
    p.add_argument('--n', type=int, required=True)
    p.add_argument('--T', type=int, required=True)
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--out', required=True, help='output directory')
    p.add_argument('--hdf5', action='store_true', help='write data.h5 instead of data.json')
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser('exact-loglik', help='exact marginal log-likelihood')
    p.add_argument('--params', required=True)
    p.add_argument('--data', required=True)
    p.add_argument('--method', choices=('transfer', 'brute'), default='transfer')
    p.add_argument('--out')
    p.set_defaults(func=cmd_exact_loglik)

    p = sub.add_parser('fit-mle', help='exact maximum likelihood (small n)')
    p.add_argument('--data', required=True)
    p.add_argument('--Q', type=int, required=True)
    p.add_argument('--restarts', type=int, default=MLE_RESTARTS)
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--warm-start-vem', action='store_true', help='add the VEM estimate as a start')
    _add_margins(p)
    p.set_defaults(func=cmd_fit_mle)

    p = sub.add_parser('fit-vem', help='variational EM')
    p.add_argument('--data', required=True)
    p.add_argument('--Q', type=int, required=True)
    p.add_argument('--restarts', type=int, default=VEM_RESTARTS)
    p.add_argument('--init', choices=STRATEGIES[:2], default='spectral-mean-graph')
    p.add_argument('--tol', type=float, default=VEM_TOL)
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--tie-diagonal', action='store_true', help='constant diagonal of pi over time')
    p.add_argument('--jobs', type=int, default=1, help='parallel restarts')
    _add_margins(p)
    p.set_defaults(func=cmd_fit_vem)

    p = sub.add_parser('check-theory', help='Monte Carlo concentration checks')
    p.add_argument('--params', required=True)
    p.add_argument('--n', type=int, required=True)
    p.add_argument('--T', type=int, required=True)
    p.add_argument('--reps', type=int, default=1000)
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--eta', type=float, default=None, help='occupancy slack, delta/2 by default')
    p.add_argument('--out')
    p.set_defaults(func=cmd_check_theory)

    p = sub.add_parser('experiment', help='consistency experiment from a JSON config')
    p.add_argument('--config', required=True)
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format='%(asctime)s %(levelname)s %(name)s %(message)s',
    )
    try:
        return args.func(args)
    except ExperimentFailedException as err:
        logger.error(str(err))
        return EXIT_EXPERIMENT_FAILED
    except DynSBMException as err:
        logger.error(str(err))
        return EXIT_ERROR


if __name__ == '__main__':
    sys.exit(main())
