#-------------------------------------------------------------------------------
# snapmix: common/config.py
#
# Configuration of a command-line experiment: built from parsed arguments,
# overridden by an optional JSON file, then validated.
#-------------------------------------------------------------------------------
from .exceptions import ConfigError
from .utils import config_assert, read_json

MODES = ('oracle', 'sampled')

# Every configurable field with its default. A JSON config file may set any
# of them.
DEFAULTS = dict(
    n=20,
    k=2,
    seed=0,
    samples1=1000000,
    samples2=1000000,
    samples_hi=1000000,
    zeta=0.2,
    omega=2.0,
    delta=1e-12,
    varsigma=None,
    w_min=None,
    tau=None,
    sigma=None,
    eps=0.1,
    mode='oracle',
    isotropize=False,
    strict_survival=False,
    match_tol=None,
    poisson=False,
    tight_scale=False,
    projection='lp',
    threads=1,
    run_id=None,
    model=None,
    batch1=None,
    batch2=None,
    batch_hi=None,
    out=None,
    csv=None,
    manifest=None,
    no_timings=False,
    # lower-bound demonstrations
    b=None,
    rho=2.0,
    m=None,
    psi=0.01,
)


class ExperimentConfig(object):
    """ Settings of one CLI run. Attributes are the keys of DEFAULTS.

        overrides:
            Keyword values replacing the defaults; unknown keys raise
            ConfigError.
    """
    def __init__(self, **overrides):
        for key, value in DEFAULTS.items():
            setattr(self, key, value)
        self.update(overrides)

    @classmethod
    def from_args(cls, args):
        """ Build from an argparse namespace: arguments left at None keep the
            defaults, then the file named by args.config (if any) is applied.
        """
        values = dict((key, getattr(args, key)) for key in DEFAULTS
                      if getattr(args, key, None) is not None)
        cfg = cls(**values)
        path = getattr(args, 'config', None)
        if path:
            cfg.apply_json(path)
        return cfg

    def update(self, values):
        unknown = sorted(set(values) - set(DEFAULTS))
        if unknown:
            raise ConfigError('unknown configuration keys: %s' %
                              ', '.join(unknown))
        for key, value in values.items():
            setattr(self, key, value)

    def apply_json(self, path):
        obj = read_json(path)
        config_assert(isinstance(obj, dict),
                      'config file %s must hold a JSON object' % path)
        self.update(obj)

    @property
    def weight_floor(self):
        """ w_min, defaulting to half the uniform weight.
        """
        return self.w_min if self.w_min is not None else 0.5 / self.k

    def validate(self):
        """ Check types and ranges; raises ConfigError.
        """
        for key in ('n', 'k', 'seed', 'samples1', 'samples2', 'samples_hi',
                    'threads'):
            value = getattr(self, key)
            config_assert(isinstance(value, int) and not isinstance(value, bool),
                          '%s must be an integer, got %r' % (key, value))
            config_assert(value >= 0, '%s must be nonnegative' % key)
        config_assert(self.n >= 1 and self.k >= 1, 'n and k must be positive')
        config_assert(self.seed < 2 ** 64, 'seed must fit in 64 bits')
        config_assert(self.threads >= 1, 'threads must be at least 1')
        config_assert(self.mode in MODES,
                      'mode must be one of %s, got %r' % (MODES, self.mode))
        config_assert(self.projection in ('lp', 'fast'),
                      'projection must be lp or fast')
        config_assert(self.zeta > 0, 'zeta must be positive')
        config_assert(self.omega > 1, 'omega must exceed 1')
        config_assert(0 < self.delta < 1, 'delta must lie in (0, 1)')
        config_assert(0 < self.weight_floor <= 1.0 / self.k,
                      'w_min must lie in (0, 1/k]')
        config_assert(0 < self.eps < 1, 'eps must lie in (0, 1)')
        for key in ('tau', 'sigma', 'match_tol', 'varsigma'):
            value = getattr(self, key)
            config_assert(value is None or value > 0,
                          '%s must be positive' % key)
        config_assert(self.tau is None or self.tau <= 1, 'tau must be at most 1')
        config_assert(self.sigma is None or self.sigma < 1,
                      'sigma must be below 1')
        config_assert(self.rho >= 2, 'rho must be at least 2')
        config_assert(0 < self.psi < 1, 'psi must lie in (0, 1)')
        if self.b is not None:
            config_assert(self.b >= 2 * self.k - 1, 'b must be at least 2k-1')
        if self.m is not None:
            config_assert(self.m >= 0, 'm must be nonnegative')
        return self

    def to_json(self):
        return dict((key, getattr(self, key)) for key in DEFAULTS)

    def __repr__(self):
        return 'ExperimentConfig(n=%d, k=%d, seed=%d, mode=%r)' % (
            self.n, self.k, self.seed, self.mode)
