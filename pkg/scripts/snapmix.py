#!/usr/bin/env python
#-------------------------------------------------------------------------------
# scripts/snapmix.py
#
# Command-line front end of snapmix: generate mixture sources, draw snapshot
# batches, learn mixtures and run the lower-bound demonstrations.
#-------------------------------------------------------------------------------
import argparse
import csv
import logging
import sys
import time
import traceback

import numpy as np

# For running from development directory. It should take precedence over the
# installed snapmix.
sys.path.insert(0, '.')

from snapmix import __version__
from snapmix.common.config import ExperimentConfig, MODES
from snapmix.common.exceptions import (
    SnapmixError, ConfigError, InputError, MatchingError,
    DegenerateMixtureError)
from snapmix.common.utils import RngStream, config_assert, write_json, dumps_json
from snapmix.mixture.source import MixtureSource, random_wide_source
from snapmix.mixture.sampling import SnapshotBatch, draw_snapshots
from snapmix.mixture.isotropy import (
    estimate_r, build_refinement, refine_batch, refine_source, pull_back,
    default_sigma)
from snapmix.mixture.learner import (
    LearnerConstants, ExactStatistics, SampledStatistics, learn_mixture,
    run_manifest)
from snapmix.mixture.transport import mixture_transport
from snapmix.onedim.lowerbounds import (
    hard_pair, tv_snapshot_distance, aperture_indistinguishability,
    sample_size_bound)
from snapmix.onedim.moments import moments_of

SCRIPT_DESCRIPTION = 'Learn mixtures of distributions from snapshots'
VERSION_STRING = '%%(prog)s: based on snapmix %s' % __version__

COMMANDS = ('generate', 'sample', 'learn', 'lowerbound')

CSV_COLUMNS = ['run_id', 'n', 'k', 'N1', 'N2', 'Nhi', 'seed', 'tran_dist',
               'max_l1_err', 'max_w_err', 'wall_ms']

# Exit codes
EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_IO = 2
EXIT_CONFIG = 3

# Random streams of one seed, one per consumer
STREAM_GENERATE = 0
STREAM_BATCH1 = 1
STREAM_BATCH2 = 2
STREAM_BATCH_HI = 3
STREAM_REFINE = 4
STREAM_LEARN = 5


class SnapmixCommand(object):
    """ Runs the subcommands for one ExperimentConfig, writing reports to
        'output' unless the configuration names files.
    """
    def __init__(self, cfg, output):
        self.cfg = cfg
        self.output = output

    def generate(self):
        cfg = self.cfg
        src = random_wide_source(cfg.n, cfg.k, cfg.zeta,
                                 self._rng(STREAM_GENERATE))
        if cfg.out:
            src.save(cfg.out)
        else:
            self._emit(dumps_json(src.to_json()))

    def sample(self):
        cfg = self.cfg
        config_assert(cfg.model is not None, 'sample needs --model')
        src = self._load_model()
        wanted = [(cfg.batch1, 1, cfg.samples1, STREAM_BATCH1),
                  (cfg.batch2, 2, cfg.samples2, STREAM_BATCH2),
                  (cfg.batch_hi, 2 * src.k - 1, cfg.samples_hi,
                   STREAM_BATCH_HI)]
        config_assert(any(path for path, _, _, _ in wanted),
                      'sample needs at least one of --batch1, --batch2, '
                      '--batch-hi')
        for path, m, N, stream in wanted:
            if path:
                batch = draw_snapshots(src, m, N, self._rng(stream),
                                       poisson=cfg.poisson,
                                       threads=cfg.threads)
                batch.write_csv(path)

    def learn(self):
        cfg = self.cfg
        truth = self._load_model() if cfg.model else None
        start = time.time()
        counts = (0, 0, 0)
        if cfg.mode == 'oracle':
            config_assert(truth is not None, 'oracle mode needs --model')
            config_assert(truth.k == cfg.k, 'model has k=%d, config k=%d' % (
                truth.k, cfg.k))
            n = truth.n
        else:
            batches = self._sampled_batches(truth)
            counts = tuple(len(b) for b in batches)
            n = truth.n if truth is not None else cfg.n

        imap = None
        if cfg.isotropize:
            sigma = cfg.sigma or default_sigma(cfg.eps, cfg.zeta, cfg.k,
                                               cfg.weight_floor)
            if cfg.mode == 'oracle':
                imap = build_refinement(truth.mean(), sigma)
                stats = ExactStatistics(refine_source(imap, truth))
            else:
                imap = build_refinement(estimate_r(batches[0], n), sigma)
                refined = []
                for i, batch in enumerate(batches):
                    rb, report = refine_batch(
                        imap, batch, self._rng(STREAM_REFINE).child(i),
                        threads=cfg.threads)
                    if cfg.strict_survival and report.rate < report.lower_bound:
                        raise DegenerateMixtureError(
                            'only %d of %d %d-snapshots survived refinement' % (
                                report.survived, report.total,
                                batch.aperture))
                    refined.append(rb)
                stats = SampledStatistics(refined[0], refined[1], refined[2],
                                          imap.nprime, threads=cfg.threads)
            n = imap.nprime
        elif cfg.mode == 'oracle':
            stats = ExactStatistics(truth)
        else:
            stats = SampledStatistics(batches[0], batches[1], batches[2], n,
                                      threads=cfg.threads)

        consts = LearnerConstants(n, cfg.k, cfg.zeta, cfg.omega, cfg.delta,
                                  cfg.weight_floor, cfg.varsigma)
        result = learn_mixture(stats, consts, self._rng(STREAM_LEARN),
                               tight_scale=cfg.tight_scale,
                               match_tol=cfg.match_tol, tau=cfg.tau,
                               projection=cfg.projection, threads=cfg.threads)
        learned = result.source
        if imap is not None:
            learned = pull_back(imap, learned)
        wall_ms = 0 if cfg.no_timings else int(round(1000 * (time.time() - start)))

        if cfg.out:
            learned.save(cfg.out)
        if cfg.manifest:
            manifest = run_manifest(result, seed=cfg.seed)
            manifest['config'] = cfg.to_json()
            manifest['model'] = learned.to_json()
            write_json(manifest, cfg.manifest)

        row = dict(run_id=cfg.run_id or 'seed%d' % cfg.seed, n=learned.n,
                   k=cfg.k, N1=counts[0], N2=counts[1], Nhi=counts[2],
                   seed=cfg.seed, tran_dist='', max_l1_err='', max_w_err='',
                   wall_ms=wall_ms)
        if truth is not None:
            row.update(_errors_against(truth, learned))
        self._write_csv(CSV_COLUMNS, [row])

    def lowerbound(self):
        cfg = self.cfg
        k = cfg.k
        b = cfg.b if cfg.b is not None else 2 * k - 1
        m = cfg.m if cfg.m is not None else 2 * k - 2
        pair = hard_pair(k, b, cfg.rho)
        g1 = moments_of(pair.first, b + 1).values
        g2 = moments_of(pair.second, b + 1).values
        tv = tv_snapshot_distance(pair.first, pair.second, b)

        rows = []
        def add(quantity, index, first, second=''):
            rows.append(dict(quantity=quantity, index=index, first=first,
                             second=second))
        for i in range(k):
            add('weight', i, pair.first.weights[i], pair.second.weights[i])
        for i in range(k):
            add('location', i, pair.first.locations[i],
                pair.second.locations[i])
        for l in range(b + 1):
            add('moment', l, g1[l], g2[l])
        add('lp_value', '', pair.lp_value)
        add('tv_closed_form', b, tv.closed_form)
        add('tv_exact', b, tv.exact)
        add('tv_brute_force', b,
            '' if tv.brute_force is None else tv.brute_force)
        add('tv_aperture', m, aperture_indistinguishability(pair, m))
        add('sample_size_bound', cfg.psi, sample_size_bound(pair, cfg.psi))
        self._write_csv(['quantity', 'index', 'first', 'second'], rows)

    #------ PRIVATE ------#
    def _rng(self, stream):
        return RngStream(self.cfg.seed, stream)

    def _emit(self, text):
        self.output.write(text)
        self.output.write('\n')

    def _load_model(self):
        try:
            return MixtureSource.load(self.cfg.model)
        except (InputError, ValueError) as e:
            raise IOError('cannot read model %s: %s' % (self.cfg.model, e))

    def _read_batch(self, path, n):
        try:
            return SnapshotBatch.read_csv(path, n)
        except InputError as e:
            raise IOError(str(e))

    def _sampled_batches(self, truth):
        """ The three batches of a sampled run: read from CSV files when
            given, drawn from the model otherwise.
        """
        cfg = self.cfg
        paths = (cfg.batch1, cfg.batch2, cfg.batch_hi)
        n = truth.n if truth is not None else cfg.n
        if all(paths):
            batches = [self._read_batch(path, n) for path in paths]
            config_assert(batches[2].aperture == 2 * cfg.k - 1,
                          '--batch-hi holds %d-snapshots, k=%d needs %d' % (
                              batches[2].aperture, cfg.k, 2 * cfg.k - 1))
            return batches
        config_assert(not any(paths),
                      'give all three of --batch1, --batch2, --batch-hi')
        config_assert(truth is not None,
                      'sampled mode needs --model or the three batch files')
        config_assert(truth.k == cfg.k, 'model has k=%d, config k=%d' % (
            truth.k, cfg.k))
        return [draw_snapshots(truth, m, N, self._rng(stream),
                               poisson=cfg.poisson, threads=cfg.threads)
                for m, N, stream in ((1, cfg.samples1, STREAM_BATCH1),
                                     (2, cfg.samples2, STREAM_BATCH2),
                                     (2 * cfg.k - 1, cfg.samples_hi,
                                      STREAM_BATCH_HI))]

    def _write_csv(self, columns, rows):
        if self.cfg.csv:
            with open(self.cfg.csv, 'w', newline='') as f:
                _write_rows(f, columns, rows)
        else:
            _write_rows(self.output, columns, rows)


def _write_rows(stream, columns, rows):
    writer = csv.DictWriter(stream, fieldnames=columns, lineterminator='\n')
    writer.writeheader()
    for row in rows:
        writer.writerow(dict((key, _csv_value(value))
                             for key, value in row.items()))


def _csv_value(value):
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return value


def _errors_against(truth, learned):
    """ Transport distance to the true source, and the worst l1 and weight
        errors of each true constituent against the learned constituent
        receiving most of its mass in the optimal plan.
    """
    plan = mixture_transport(truth, learned)
    partner = np.argmax(plan.flow, axis=1)
    l1 = [np.abs(truth.constituents[t] - learned.constituents[s]).sum()
          for t, s in enumerate(partner)]
    werr = [abs(truth.weights[t] - learned.weights[s])
            for t, s in enumerate(partner)]
    return dict(tran_dist=plan.cost, max_l1_err=max(l1), max_w_err=max(werr))


def main(stream=None):
    # parse the command-line arguments and run the chosen command
    argparser = argparse.ArgumentParser(
            usage='usage: %(prog)s <command> [options]',
            description=SCRIPT_DESCRIPTION,
            prog='snapmix.py')
    argparser.add_argument('command', choices=COMMANDS,
            help='One of: %s' % ', '.join(COMMANDS))
    argparser.add_argument('-v', '--version',
            action='version', version=VERSION_STRING)
    argparser.add_argument('-V', '--verbose',
            action='store_true', dest='verbose',
            help='Log debugging information on stderr')
    argparser.add_argument('--config', metavar='<file>',
            help='JSON file whose keys override the command-line options')
    argparser.add_argument('--n', type=int, help='Domain size')
    argparser.add_argument('--k', type=int, help='Number of constituents')
    argparser.add_argument('--seed', type=int, help='Random seed')
    argparser.add_argument('--samples1', type=int,
            help='Number of 1-snapshots')
    argparser.add_argument('--samples2', type=int,
            help='Number of 2-snapshots')
    argparser.add_argument('--samples-hi', type=int, dest='samples_hi',
            help='Number of (2k-1)-snapshots')
    argparser.add_argument('--zeta', type=float, help='Width of the mixture')
    argparser.add_argument('--omega', type=float,
            help='Confidence parameter (> 1)')
    argparser.add_argument('--delta', type=float,
            help='Accuracy of the direction program')
    argparser.add_argument('--varsigma', type=float,
            help='Per-direction sample accuracy (reported only)')
    argparser.add_argument('--w-min', type=float, dest='w_min',
            help='Lower bound on the mixture weights (default 1/2k)')
    argparser.add_argument('--tau', type=float,
            help='Spike separation handed to the 1-D learner')
    argparser.add_argument('--sigma', type=float,
            help='Split granularity of the isotropizing map')
    argparser.add_argument('--eps', type=float,
            help='Target accuracy (sets the default sigma)')
    argparser.add_argument('--mode', choices=MODES,
            help='oracle: exact statistics of --model; sampled: snapshots')
    argparser.add_argument('--isotropize', action='store_true', default=None,
            help='Refine the domain before learning')
    argparser.add_argument('--strict-survival', action='store_true',
            dest='strict_survival', default=None,
            help='Fail if too few snapshots survive the refinement')
    argparser.add_argument('--match-tol', type=float, dest='match_tol',
            help='Override the spike matching threshold')
    argparser.add_argument('--poisson', action='store_true', default=None,
            help='Draw Poisson-distributed sample counts')
    argparser.add_argument('--tight-scale', action='store_true',
            dest='tight_scale', default=None,
            help='Project on a/2||a||_inf instead of a/2H')
    argparser.add_argument('--projection', choices=('lp', 'fast'),
            help='Simplex l1 projection method')
    argparser.add_argument('--threads', type=int,
            help='Worker threads')
    argparser.add_argument('--run-id', dest='run_id',
            help='Run identifier written to the CSV report')
    argparser.add_argument('--model', metavar='<file>',
            help='Mixture model JSON (input)')
    argparser.add_argument('--batch1', metavar='<file>',
            help='1-snapshot CSV')
    argparser.add_argument('--batch2', metavar='<file>',
            help='2-snapshot CSV')
    argparser.add_argument('--batch-hi', metavar='<file>', dest='batch_hi',
            help='(2k-1)-snapshot CSV')
    argparser.add_argument('--out', metavar='<file>',
            help='Output model JSON')
    argparser.add_argument('--csv', metavar='<file>',
            help='CSV report (default: standard output)')
    argparser.add_argument('--manifest', metavar='<file>',
            help='Run manifest JSON')
    argparser.add_argument('--no-timings', action='store_true',
            dest='no_timings', default=None,
            help='Write wall_ms=0 so that repeated runs are identical')
    argparser.add_argument('--b', type=int,
            help='Aperture of the lower-bound pair (default 2k-1)')
    argparser.add_argument('--rho', type=float,
            help='Scale of the lower-bound pair (>= 2)')
    argparser.add_argument('--m', type=int,
            help='Aperture compared by the lower bound (default 2k-2)')
    argparser.add_argument('--psi', type=float,
            help='Failure probability of the sample-size bound')
    argparser.add_argument('--traceback',
            action='store_true', dest='show_traceback',
            help='Dump the Python traceback on errors')

    args = argparser.parse_args()
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format='%(levelname)s %(name)s: %(message)s')

    try:
        cfg = ExperimentConfig.from_args(args).validate()
        command = SnapmixCommand(cfg, stream or sys.stdout)
        getattr(command, args.command)()
    except MatchingError as ex:
        _fail('matching error: %s' % ex, args, EXIT_FAILURE)
    except (ConfigError, InputError) as ex:
        _fail('configuration error: %s' % ex, args, EXIT_CONFIG)
    except SnapmixError as ex:
        _fail('snapmix error: %s' % ex, args, EXIT_FAILURE)
    except (IOError, OSError, ValueError) as ex:
        _fail('I/O error: %s' % ex, args, EXIT_IO)


def _fail(message, args, code):
    sys.stdout.flush()
    sys.stderr.write('%s\n' % message)
    if args.show_traceback:
        traceback.print_exc()
    sys.exit(code)


#-------------------------------------------------------------------------------
if __name__ == '__main__':
    main()
