"""
Three-block Gibbs sampler:

 1. latent regime path by forward filtering, backward sampling;
 2. transition probabilities from their conjugate Beta (Dirichlet) posteriors;
 3. every continuous parameter by Griddy Gibbs: the full conditional
    kernel is evaluated on a grid, integrated by the trapezoid rule and
    inverted at a uniform draw.

Regimes are relabelled by ascending a0 after each sweep.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid

import config
from .common import log, DomainError, ComputationError, ModelError
from .families import ModelFamily
from .models import RegimeParams, TransitionMatrix, REGIME_FIELDS
from .regime_filter import normal_logpdf, _normalize_log
from .signals_definitions import gibbs_progress
from .stability import stationary_distribution
from .volatility import FractionalLags, regime_path, variance_paths


# probability floor keeping drawn transition matrices primitive
TRANSITION_EPS = 1e-10


@dataclass(frozen=True, eq=False)
class PriorSpec:
    """
    Uniform priors on the continuous parameters and Beta (Dirichlet)
    priors on transition rows.

    `bounds` maps a field name (a0, b1, w, ...) or a regime-specific
    name (a0_2) to (lower, upper). `beta` is a scalar or m x m array c_rs.
    """
    bounds: dict = field(default_factory=lambda: dict(config.PRIOR_BOUNDS))
    beta: object = config.BETA_PRIOR
    sample_b2: bool = False

    def __post_init__(self):
        bounds = dict(config.PRIOR_BOUNDS)
        bounds.update(self.bounds)
        for name, (lo, hi) in bounds.items():
            base = name.split('_')[0]
            if base not in config.PRIOR_BOUNDS:
                raise DomainError('Unknown prior {}'.format(name))
            if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
                raise DomainError('Prior {} needs finite bounds lo < hi, got {}, {}'.format(
                    name, lo, hi))
            if lo < 0:
                raise DomainError('Prior {} must not extend below zero'.format(name))
            if base in ('d', 'w', 'b1', 'b2') and hi > 1:
                raise DomainError('Prior {} must lie within [0, 1]'.format(name))
        if bounds['d'][1] >= 1 or bounds['d'][0] <= 0:
            raise DomainError('Prior d must lie strictly inside (0, 1)')
        object.__setattr__(self, 'bounds', bounds)
        if np.any(np.asarray(self.beta, dtype=float) <= 0):
            raise DomainError('Beta hyperparameters must be positive')

    def support(self, name, regime=None):
        if regime is not None:
            key = '{}_{}'.format(name, regime + 1)
            if key in self.bounds:
                return self.bounds[key]
        return self.bounds[name]

    def beta_matrix(self, m):
        return np.broadcast_to(np.asarray(self.beta, dtype=float), (m, m))


@dataclass(frozen=True)
class GibbsConfig:
    iterations: int = config.GIBBS_ITERATIONS
    warmup: int = config.GIBBS_WARMUP
    grid_points: int = config.GRID_POINTS
    seed: int = None
    chains: int = config.GIBBS_CHAINS
    keep_states: bool = False

    def __post_init__(self):
        if self.iterations < 1:
            raise DomainError('iterations must be positive')
        if not 0 <= self.warmup < self.iterations:
            raise DomainError('warmup must be in [0, iterations), got {} of {}'.format(
                self.warmup, self.iterations))
        if self.grid_points < 3:
            raise DomainError('grid_points must be at least 3')
        if self.chains < 1:
            raise DomainError('chains must be at least 1')


def mc_standard_error(x, batches=20):
    """ Batch-means Monte Carlo standard error of the mean of a chain """
    x = np.asarray(x, dtype=float)
    size = len(x) // batches
    if size < 2:
        return float(np.std(x, ddof=1) / np.sqrt(len(x))) if len(x) > 1 else float('nan')
    means = x[:size * batches].reshape(batches, size).mean(axis=1)
    return float(np.std(means, ddof=1) / np.sqrt(batches))


@dataclass(frozen=True, eq=False)
class PosteriorDraws:
    """
    Retained draws, one row per iteration (all chains stacked),
    columns as `names`: continuous parameters then transitions.
    """
    family: str
    m: int
    names: list
    draws: np.ndarray
    chain: np.ndarray
    states: np.ndarray = None

    def column(self, name):
        return self.draws[:, self.names.index(name)]

    @property
    def eta(self):
        """ diagonal transition probabilities (p11, p22, ...) per draw """
        diag = ['p{0}{0}'.format(r) for r in range(1, self.m + 1)]
        return self.draws[:, [self.names.index(name) for name in diag if name in self.names]]

    @property
    def means(self):
        return dict(zip(self.names, self.draws.mean(axis=0)))

    @property
    def stds(self):
        if len(self.draws) < 2:
            return dict.fromkeys(self.names, 0.0)
        return dict(zip(self.names, self.draws.std(axis=0, ddof=1)))

    @property
    def chains(self):
        return int(self.chain.max()) + 1 if len(self.chain) else 0

    def chain_means(self):
        return [dict(zip(self.names, self.draws[self.chain == c].mean(axis=0)))
                for c in range(self.chains)]

    def mc_errors(self):
        ret = {}
        for k, name in enumerate(self.names):
            per_chain = [mc_standard_error(self.draws[self.chain == c, k])
                         for c in range(self.chains)]
            ret[name] = float(np.sqrt(np.mean(np.square(per_chain))))
        return ret

    def summary(self):
        """ key -> value document: family, m, and mean/std/mcse per parameter """
        doc = {'family': self.family, 'm': self.m, 'draws': len(self.draws),
               'chains': self.chains}
        means, stds, errors = self.means, self.stds, self.mc_errors()
        for name in self.names:
            doc[name + '.mean'] = float(means[name])
            doc[name + '.std'] = float(stds[name])
            doc[name + '.mcse'] = errors[name]
        if self.chains > 1:
            for c, chain_mean in enumerate(self.chain_means(), 1):
                for name in self.names:
                    doc['{}.chain{}'.format(name, c)] = float(chain_mean[name])
        return doc

    def histograms(self, bins=None):
        """ name -> (bin edges, probability masses) """
        bins = bins or config.HISTOGRAM_BINS
        ret = {}
        for k, name in enumerate(self.names):
            counts, edges = np.histogram(self.draws[:, k], bins=bins)
            ret[name] = (edges, counts / counts.sum())
        return ret


def _draw_index(prob, u):
    cum = np.cumsum(prob)
    return min(int(np.searchsorted(cum, u * cum[-1], side='right')), len(prob) - 1)


def ffbs_sample_states(spec, y, rng, paths=None, lags=None):
    """
    One joint draw of the regime path given parameters and data.

    Forward: p(z_t | y_0..y_t) from the stationary start, in log space.
    Backward: z_{T-1} from the last filtered law, then
    z_t with probability proportional to p(z_t | y_0..y_t) p[z_t, z_{t+1}].
    """
    y = np.asarray(y, dtype=float)
    T, m = len(y), spec.m
    if m == 1:
        return np.zeros(T, dtype=int)
    if paths is None:
        paths = variance_paths(spec, y, lags=lags)
    P = spec.transition.p
    log_f = normal_logpdf(y[:, None], paths.h)
    filtered = np.empty((T, m))
    pred = stationary_distribution(spec.transition)
    with np.errstate(divide='ignore'):
        for t in range(T):
            filtered[t] = _normalize_log(np.log(pred) + log_f[t])
            pred = filtered[t] @ P
    u = rng.random(T)
    z = np.empty(T, dtype=int)
    z[T-1] = _draw_index(filtered[T-1], u[T-1])
    for t in range(T - 2, -1, -1):
        z[t] = _draw_index(filtered[t] * P[:, z[t+1]], u[t])
    return z


def count_transitions(z, m):
    counts = np.zeros((m, m))
    z = np.asarray(z, dtype=int)
    if len(z) > 1:
        np.add.at(counts, (z[:-1], z[1:]), 1)
    return counts


def sample_transition(prior, z, m, rng):
    """
    Conjugate draw of the transition matrix given a state path.
    Two regimes: p11 ~ Beta(c11+n11, c12+n12), p22 ~ Beta(c22+n22, c21+n21).
    """
    if m == 1:
        return TransitionMatrix.single()
    n = count_transitions(z, m)
    c = prior.beta_matrix(m)
    if m == 2:
        p11 = rng.beta(c[0, 0] + n[0, 0], c[0, 1] + n[0, 1])
        p22 = rng.beta(c[1, 1] + n[1, 1], c[1, 0] + n[1, 0])
        p11, p22 = np.clip([p11, p22], TRANSITION_EPS, 1 - TRANSITION_EPS)
        return TransitionMatrix.two_state(p11, p22)
    rows = []
    for r in range(m):
        row = np.clip(rng.dirichlet(c[r] + n[r]), TRANSITION_EPS, None)
        rows.append(row / row.sum())
    return TransitionMatrix(np.array(rows))


def griddy_draw(grid, log_kernel, rng):
    """
    Draws from the density proportional to exp(log_kernel), linear
    between grid points. The cumulative integral is built with the
    trapezoid rule and inverted exactly within the selected cell.
    The result lies strictly inside (grid[0], grid[-1]).
    """
    grid = np.asarray(grid, dtype=float)
    log_kernel = np.asarray(log_kernel, dtype=float)
    finite = np.isfinite(log_kernel)
    if not finite.any():
        raise ComputationError('Griddy kernel vanished on the grid [{:.4g}, {:.4g}]'.format(
            grid[0], grid[-1]))
    k = np.where(finite, np.exp(log_kernel - log_kernel[finite].max()), 0.0)
    cdf = cumulative_trapezoid(k, grid, initial=0)
    if not cdf[-1] > 0:
        raise ComputationError('Griddy kernel has no mass on the grid [{:.4g}, {:.4g}]'.format(
            grid[0], grid[-1]))
    return _invert(grid, k, cdf, rng.uniform(0, cdf[-1]))


def _invert(grid, k, cdf, u):
    i = int(np.clip(np.searchsorted(cdf, u, side='right'), 1, len(grid) - 1))
    width = grid[i] - grid[i-1]
    k0 = k[i-1]
    slope = (k[i] - k0) / width
    r = u - cdf[i-1]
    root = k0 + np.sqrt(max(k0 * k0 + 2 * slope * r, 0.0))
    x = 2 * r / root if root > 0 else 0.0
    x = grid[i-1] + min(max(x, 0.0), width)
    return float(np.clip(x, np.nextafter(grid[0], np.inf), np.nextafter(grid[-1], -np.inf)))


@dataclass(eq=False)
class ChainState:
    """ Current draw of a chain: (m, 8) regime array, transitions, fixed weight """
    regimes: np.ndarray
    transition: TransitionMatrix
    w: float = None


def _grid_bounds(slot, state, prior):
    j, name = slot
    lo, hi = prior.support(name, j)
    if j is None:
        return lo, hi
    row = dict(zip(REGIME_FIELDS, state.regimes[j]))
    if name == 'b1':
        lo, hi = max(lo, row['b2']), min(hi, row['d'])
    elif name == 'b2':
        hi = min(hi, row['b1'], (1 - row['d']) / 2)
    elif name == 'd':
        lo, hi = max(lo, row['b1']), min(hi, 1 - 2 * row['b2'])
    return lo, hi


def griddy_sample_param(i, state, z, y, prior, grid_points, rng, layout,
                        lags=None, h_init=None, K=None):
    """
    New value of parameter `i` (index into layout.slots) given the
    current state, regime path z and returns y.
    """
    K = K or config.FRACDIFF_K
    if lags is None:
        lags = FractionalLags(y)
    if h_init is None:
        h_init = float(np.var(lags.y))
    slot = layout.slots[i]
    j, name = slot
    lo, hi = _grid_bounds(slot, state, prior)
    current = state.w if j is None else state.regimes[j, REGIME_FIELDS.index(name)]
    if not lo < hi:
        return float(current)
    grid = np.linspace(lo, hi, grid_points)
    weight_mode = layout.family.weight_mode
    regime = 0 if j is None else j
    mask = np.asarray(z) == regime
    y_sel = lags.y[mask]
    log_kernel = np.empty(grid_points)
    row = state.regimes[regime].copy()
    k = None if j is None else REGIME_FIELDS.index(name)
    for n, value in enumerate(grid):
        w = state.w
        if j is None:
            w = value
        else:
            row[k] = value
        try:
            h = regime_path(RegimeParams.from_sequence(row), lags, K, h_init, weight_mode, w)[3]
        except DomainError:
            log_kernel[n] = -np.inf
            continue
        log_kernel[n] = normal_logpdf(y_sel, h[mask]).sum()
    return griddy_draw(grid, log_kernel, rng)


def initial_state(layout, y, prior, values=None):
    """
    Starting point inside the prior support, regimes ordered by a0.
    `values` (name -> value) overrides the defaults.
    """
    var = float(np.var(y)) or 1.0
    m = layout.m
    regimes = np.empty((m, len(REGIME_FIELDS)))
    for j in range(m):
        start = dict(a0=0.1 * var * (j + 1), a1=0.2, a2=0.1, b0=0.1 * var * (j + 1),
                     b1=0.1, b2=0.0, d=0.4, gamma=1.0)
        for k, name in enumerate(REGIME_FIELDS):
            lo, hi = prior.support(name, j)
            regimes[j, k] = np.clip(start[name], lo + 0.01 * (hi - lo), hi - 0.01 * (hi - lo))
        # b2 starts at zero, its own prior floor when sampled
        regimes[j, REGIME_FIELDS.index('b2')] = prior.support('b2', j)[0] if prior.sample_b2 else 0.0
    w = 0.5 if layout.family.weight_mode == 'fixed' else None
    if m == 1:
        transition = TransitionMatrix.single()
    else:
        off = 0.1 / (m - 1)
        transition = TransitionMatrix(np.full((m, m), off) + np.eye(m) * (0.9 - off))
    if values:
        spec = layout.spec_from_values(values)
        regimes = np.array([p.as_tuple() for p in spec.regimes])
        transition, w = spec.transition, spec.w
    return ChainState(regimes, transition, w)


def _relabel(state, z):
    order = np.argsort(state.regimes[:, 0], kind='stable')
    if np.array_equal(order, np.arange(len(order))):
        return state, z
    inverse = np.empty_like(order)
    inverse[order] = np.arange(len(order))
    return ChainState(state.regimes[order], state.transition.permuted(order), state.w), inverse[z]


def _run_chain(chain, y, layout, prior, cfg, rng, K, initial=None):
    state = initial_state(layout, y, prior, initial)
    lags = FractionalLags(y)
    h_init = float(np.var(y))
    keep = cfg.iterations - cfg.warmup
    rows = np.empty((keep, len(layout.all_names)))
    states = np.empty((keep, len(y)), dtype=np.int8) if cfg.keep_states else None
    z = None
    for it in range(cfg.iterations):
        try:
            spec = layout.spec(state.regimes, state.transition, state.w, K)
            paths = variance_paths(spec, y, h_init=h_init, lags=lags)
            z = ffbs_sample_states(spec, y, rng, paths=paths)
            loglik = float(normal_logpdf(y, paths.h[np.arange(len(y)), z]).sum())
            state.transition = sample_transition(prior, z, layout.m, rng)
            for i, (j, name) in enumerate(layout.slots):
                value = griddy_sample_param(i, state, z, y, prior, cfg.grid_points, rng,
                                            layout, lags, h_init, K)
                if j is None:
                    state.w = value
                else:
                    state.regimes[j, REGIME_FIELDS.index(name)] = value
            state, z = _relabel(state, z)
        except ModelError as e:
            raise ComputationError('Gibbs chain {} iteration {}: {}'.format(
                chain + 1, it + 1, e)) from e
        gibbs_progress.send('gibbs', chain=chain + 1, iteration=it + 1,
                            total=cfg.iterations, loglik=loglik)
        if it >= cfg.warmup:
            rows[it - cfg.warmup] = layout.row(state.regimes, state.transition, state.w)
            if states is not None:
                states[it - cfg.warmup] = z
    return rows, states


def run_gibbs(y, family, m=None, prior=None, cfg=None, initial=None, K=None):
    """
    Runs cfg.chains independent chains (sequentially, one RNG each)
    and returns the retained draws of all of them.
    """
    if isinstance(family, str):
        family = ModelFamily.get(family)
    if m is None:
        m = family.default_states()
    prior = prior or PriorSpec()
    cfg = cfg or GibbsConfig()
    K = K or config.FRACDIFF_K
    y = np.asarray(y, dtype=float)
    if len(y) < config.GIBBS_MIN_OBS:
        raise DomainError('Need at least {} observations to fit, got {}'.format(
            config.GIBBS_MIN_OBS, len(y)))
    if not np.all(np.isfinite(y)):
        raise DomainError('Returns contain non-finite values')
    layout = family.layout(m, prior.sample_b2)
    log.info('Gibbs: family={} m={} T={} iterations={} warmup={} grid={} chains={}'.format(
        family.name, m, len(y), cfg.iterations, cfg.warmup, cfg.grid_points, cfg.chains))

    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.chains)
    parts, paths, chain_ids = [], [], []
    for c, seed in enumerate(seeds):
        rows, states = _run_chain(c, y, layout, prior, cfg, np.random.default_rng(seed),
                                  K, initial)
        parts.append(rows)
        paths.append(states)
        chain_ids.append(np.full(len(rows), c))
    return PosteriorDraws(
        family=family.name, m=m, names=layout.all_names,
        draws=np.vstack(parts), chain=np.concatenate(chain_ids),
        states=np.vstack(paths) if cfg.keep_states else None,
    )
