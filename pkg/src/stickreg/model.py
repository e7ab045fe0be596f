"""Permuted stick-breaking scaffold over pluggable binary classifiers.

Category s is assigned to stick position z_s by a permutation z.  Stick
position j owns one binary classifier with success curve pi_j(x).  Two
constructions assemble category probabilities from the stick curves:

  "pasb"  : p_s = pi_{z_s}^[z_s not last] * prod_{j < z_s} (1 - pi_j)
  "parsb" : p_s = (1 - pi_{z_s})^[z_s not last] * prod_{j < z_s} pi_j

The last stick is the reference: its curve never enters the assembled
probabilities, but it is still trained against its deterministic
outcome column so permutation proposals can promote it.  Both
constructions sum to one over categories by telescoping, for any stick
curves whatsoever.

The permutation is inferred by Metropolis-Hastings pair swaps; all
other updates are the links' own Gibbs sweeps against their stick
outcome columns.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict

import numpy as np

from .links import LogisticLink, PriorSpec, RobitLink, SvmLink
from .rng import RngStream
from .softplus import MsrLink

CONSTRUCTIONS = ("pasb", "parsb")


# ---------------------------------------------------------------------------
# Probability assembly
# ---------------------------------------------------------------------------

def _check_construction(construction):
    if construction not in CONSTRUCTIONS:
        raise ValueError(f"construction must be one of {CONSTRUCTIONS}, "
                         f"got {construction!r}")


def assemble_probs(stick_probs, sticks, construction="pasb"):
    """Assemble per-category probabilities from stick success curves.

    stick_probs: (N, S) matrix, column j the success probability of the
    classifier at stick position j.  sticks: permutation of 0..S-1 with
    sticks[s] the position of category s.  Returns an (N, S) matrix
    whose rows sum to one.
    """
    _check_construction(construction)
    p = np.atleast_2d(np.asarray(stick_probs, float))
    z = np.asarray(sticks, int)
    s_count = p.shape[1]
    log_p = np.log(p)
    log_1m = np.log1p(-p)
    if construction == "pasb":
        run, own = log_1m, log_p
    else:
        run, own = log_p, log_1m
    # prefix[j] = sum of run over stick positions strictly below j
    prefix = np.concatenate(
        [np.zeros((p.shape[0], 1)), np.cumsum(run, axis=1)[:, :-1]], axis=1)
    out = prefix[:, z]
    not_last = z != s_count - 1
    out[:, not_last] += own[:, z[not_last]]
    result = np.exp(out)
    if np.ndim(stick_probs) == 1:
        return result[0]
    return result


def sample_stick_outcomes(labels, stick_probs, sticks, construction, rng):
    """Draw the stick-level binary outcomes consistent with each
    observation's category.

    Under "pasb", observation i with winning stick w = sticks[labels_i]
    has zeros below w, a one at w, Bernoulli(pi_ij) fills strictly
    between w and the last stick, and the last column is 1(w is last).
    Under "parsb" the deterministic entries flip (ones below, zero at,
    last column complemented); the Bernoulli fill is unchanged.
    """
    _check_construction(construction)
    p = np.asarray(stick_probs, float)
    n, s_count = p.shape
    w = np.asarray(sticks, int)[np.asarray(labels, int)][:, None]  # (N, 1)
    j = np.arange(s_count)[None, :]
    bern = (rng.random((n, s_count)) < p).astype(float)
    if construction == "pasb":
        below, at, last = 0.0, 1.0, (w == s_count - 1)
    else:
        below, at, last = 1.0, 0.0, (w != s_count - 1)
    out = np.where(j < w, below, np.where(j == w, at, bern))
    out[:, s_count - 1] = np.squeeze(last, axis=1).astype(float)
    return out


def generative_draw(stick_probs, sticks, construction, rng):
    """Draw categories by running every stick's Bernoulli independently
    and reading off which category's outcome pattern fired.

    Under "pasb" the winning stick position is the first with a success
    (last position wins if none); under "parsb", the first with a
    failure.  Returns integer category labels.  Distributionally equal
    to a categorical draw from ``assemble_probs``.
    """
    _check_construction(construction)
    p = np.asarray(stick_probs, float)
    n, s_count = p.shape
    z = np.asarray(sticks, int)
    b = rng.random((n, s_count)) < p
    hit = b if construction == "pasb" else ~b
    hit = hit.copy()
    hit[:, s_count - 1] = True  # reference wins by default
    win = hit.argmax(axis=1)
    cat_of_stick = np.argsort(z)
    return cat_of_stick[win]


def sequential_utility_draw(weights, sticks, rng):
    """Category draw by sequential utility maximization: stick position
    j is examined in order and taken when a standard logistic shock
    exceeds -weights[:, j]; the last position absorbs the remainder.

    With weights[:, j] the logistic stick's linear score x beta_j, this
    reproduces the "pasb" assembly law under a logistic link.
    """
    w = np.atleast_2d(np.asarray(weights, float))
    n, s_count = w.shape
    z = np.asarray(sticks, int)
    eps = rng.logistic(size=(n, s_count))
    take = eps > -w
    take[:, s_count - 1] = True
    win = take.argmax(axis=1)
    cat_of_stick = np.argsort(z)
    return cat_of_stick[win]


# ---------------------------------------------------------------------------
# Mapping inference
# ---------------------------------------------------------------------------

def data_log_likelihood(labels, stick_probs, sticks, construction):
    """Sum over observations of log p_{y_i}(x_i)."""
    probs = assemble_probs(stick_probs, sticks, construction)
    n = probs.shape[0]
    return float(np.log(probs[np.arange(n), np.asarray(labels, int)]).sum())


def mh_mapping_step(labels, stick_probs, sticks, construction, rng):
    """One Metropolis step on the category-to-stick permutation.

    Proposes a uniformly chosen unordered pair swap and accepts with
    the assembled-likelihood ratio.  Returns (new_sticks, accepted).
    """
    z = np.asarray(sticks, int)
    s_count = z.size
    if s_count < 2:
        return z.copy(), False
    pair = rng.choice(s_count, size=2, replace=False)
    znew = z.copy()
    znew[pair[0]], znew[pair[1]] = z[pair[1]], z[pair[0]]
    cur = data_log_likelihood(labels, stick_probs, z, construction)
    prop = data_log_likelihood(labels, stick_probs, znew, construction)
    if np.log(rng.random()) < prop - cur:
        return znew, True
    return z.copy(), False


# ---------------------------------------------------------------------------
# Link construction
# ---------------------------------------------------------------------------

@dataclass
class LinkSpec:
    """Configuration of the per-stick binary classifier."""

    kind: str = "logistic"          # logistic | robit | svm | msr
    dof: float = 1.0                # robit degrees of freedom
    n_experts: int = 1              # msr mixture size
    n_layers: int = 1               # msr depth
    gamma0: float = 1.0             # msr weight prior mass
    c0: float = 1.0                 # msr weight prior rate
    fix_weights: bool = False       # pin msr weights at 1
    spike_prob: float = 0.5         # svm inclusion prior
    slab_var: float = 1.0           # svm slab variance
    pg_method: str = "exact"        # msr Polya-Gamma path
    prior: PriorSpec = field(default_factory=PriorSpec)

    def build(self, ncov: int, nobs: int):
        if self.kind == "logistic":
            return LogisticLink(ncov, prior=self.prior)
        if self.kind == "robit":
            return RobitLink(ncov, nobs, dof=self.dof, prior=self.prior)
        if self.kind == "svm":
            return SvmLink(ncov, spike_prob=self.spike_prob,
                           slab_var=self.slab_var)
        if self.kind == "msr":
            return MsrLink(ncov, nobs, n_experts=self.n_experts,
                           n_layers=self.n_layers, gamma0=self.gamma0,
                           c0=self.c0, prior=self.prior,
                           fix_weights=self.fix_weights,
                           pg_method=self.pg_method)
        raise ValueError(f"unknown link kind {self.kind!r}")

    def to_dict(self):
        d = asdict(self)
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        prior = d.pop("prior", None)
        spec = cls(**d)
        if prior is not None:
            spec.prior = PriorSpec(**prior)
        return spec


@dataclass
class McmcConfig:
    """Run-length and inference settings for one MCMC run."""

    iters: int = 1000
    burn_in: int = 500
    thin: int = 1
    construction: str = "pasb"
    permute: bool = True
    mh_proposals: int = 1
    init_sticks: tuple | None = None
    seed: int = 0

    def __post_init__(self):
        _check_construction(self.construction)
        if not 0 <= self.burn_in < self.iters:
            raise ValueError("need 0 <= burn_in < iters")
        if self.thin < 1:
            raise ValueError("thin must be >= 1")

    def to_dict(self):
        d = asdict(self)
        if d["init_sticks"] is not None:
            d["init_sticks"] = list(d["init_sticks"])
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if d.get("init_sticks") is not None:
            d["init_sticks"] = tuple(d["init_sticks"])
        return cls(**d)


# ---------------------------------------------------------------------------
# Trace storage
# ---------------------------------------------------------------------------

class TraceStore:
    """Retained posterior samples of everything prediction needs.

    Per retained sweep: the permutation, the training log-likelihood,
    and each stick's predictive parameter snapshot.  ``finalize()``
    stacks snapshots into (M, ...) arrays keyed "stick{j}/{name}".
    """

    def __init__(self, construction, link_meta, config_dict, n_categories):
        self.construction = construction
        self.link_meta = link_meta
        self.config = config_dict
        self.n_categories = int(n_categories)
        self.sticks_trace = []
        self.loglik_trace = []
        self._snaps = []
        self.proposed = 0
        self.accepted = 0
        self.arrays = None

    def append(self, sticks, loglik, snaps):
        self.sticks_trace.append(np.array(sticks, int))
        self.loglik_trace.append(float(loglik))
        self._snaps.append(snaps)

    def finalize(self):
        self.sticks_trace = np.array(self.sticks_trace, int)
        self.loglik_trace = np.array(self.loglik_trace, float)
        arrays = {}
        if self._snaps:
            s_count = len(self._snaps[0])
            for j in range(s_count):
                keys = self._snaps[0][j].keys()
                for key in keys:
                    arrays[f"stick{j}/{key}"] = np.stack(
                        [snap[j][key] for snap in self._snaps])
        self.arrays = arrays
        self._snaps = []
        return self

    @property
    def n_samples(self):
        return len(self.loglik_trace)

    def snapshot_at(self, index):
        """Per-stick snapshot dicts for retained sample ``index``."""
        out = []
        s_count = len(self.link_meta)
        for j in range(s_count):
            snap = {}
            for key, arr in self.arrays.items():
                prefix, name = key.split("/", 1)
                if prefix == f"stick{j}":
                    snap[name] = arr[index]
            out.append(snap)
        return out


# ---------------------------------------------------------------------------
# The model
# ---------------------------------------------------------------------------

class StickModel:
    """S binary classifiers on stick positions plus a permutation."""

    def __init__(self, links, construction="pasb", sticks=None):
        _check_construction(construction)
        self.links = list(links)
        self.construction = construction
        s_count = len(self.links)
        if sticks is None:
            self.sticks = np.arange(s_count)
        else:
            self.sticks = np.asarray(sticks, int).copy()
            if sorted(self.sticks.tolist()) != list(range(s_count)):
                raise ValueError("sticks must be a permutation of 0..S-1")

    @property
    def n_categories(self):
        return len(self.links)

    def stick_probs(self, X):
        """(N, S) matrix of stick success probabilities, stick order."""
        return np.column_stack([link.pi(X) for link in self.links])

    def category_probs(self, X):
        return assemble_probs(self.stick_probs(X), self.sticks,
                              self.construction)

    def log_likelihood(self, X, labels):
        return data_log_likelihood(labels, self.stick_probs(X), self.sticks,
                                   self.construction)

    def gibbs_sweep(self, X, labels, streams, permute=True, mh_proposals=1):
        """One full sweep: outcomes, link updates, permutation moves.

        ``streams`` is a dict with keys "outcomes", "mh" and "sticks"
        (a list of per-stick generators).  Returns the number of
        accepted permutation proposals.
        """
        probs = self.stick_probs(X)
        b = sample_stick_outcomes(labels, probs, self.sticks,
                                  self.construction, streams["outcomes"])
        for j, link in enumerate(self.links):
            link.update(X, b[:, j], streams["sticks"][j])
        accepted = 0
        if permute and mh_proposals > 0:
            probs = self.stick_probs(X)
            for _ in range(mh_proposals):
                self.sticks, acc = mh_mapping_step(
                    labels, probs, self.sticks, self.construction,
                    streams["mh"])
                accepted += int(acc)
        return accepted

    def snapshots(self):
        return [link.snapshot() for link in self.links]

    def restore(self, snaps, sticks=None):
        for link, snap in zip(self.links, snaps):
            link.restore(snap)
        if sticks is not None:
            self.sticks = np.asarray(sticks, int).copy()


def link_meta_for(spec: LinkSpec, ncov: int):
    """Reconstruction recipe stored alongside traces."""
    return {"spec": spec.to_dict(), "ncov": int(ncov)}


def run_mcmc(X, labels, n_categories, link_spec, config: McmcConfig,
             progress=None):
    """Fit the model by Gibbs sweeps; return (model, finalized trace).

    Randomness comes entirely from config.seed through fixed stream
    paths: outcome sampling, one stream per stick, and the permutation
    sampler each own a substream, so results never depend on execution
    schedule.
    """
    X = np.asarray(X, float)
    labels = np.asarray(labels, int)
    n, ncov = X.shape
    s_count = int(n_categories)
    if labels.size != n:
        raise ValueError("labels length must match design rows")
    if labels.min(initial=0) < 0 or (labels.size and labels.max() >= s_count):
        raise ValueError("labels must lie in 0..S-1")

    links = [link_spec.build(ncov, n) for _ in range(s_count)]
    model = StickModel(links, construction=config.construction,
                       sticks=config.init_sticks)
    root = RngStream(config.seed)
    streams = {
        "outcomes": root.child(0).generator,
        "mh": root.child(2).generator,
        "sticks": [root.child(1, j).generator for j in range(s_count)],
    }
    # mixture links start from a prior draw: identically-zero experts
    # are a symmetric fixed point that the count thinning is slow to
    # leave, so symmetry is broken before the first sweep
    for j, link in enumerate(model.links):
        draw = getattr(link, "_prior_param_draw", None)
        if draw is not None:
            draw(streams["sticks"][j])
    store = TraceStore(config.construction,
                       [link_meta_for(link_spec, ncov)] * s_count,
                       config.to_dict(), s_count)
    for sweep in range(config.iters):
        acc = model.gibbs_sweep(X, labels, streams,
                                permute=config.permute,
                                mh_proposals=config.mh_proposals)
        store.proposed += config.mh_proposals if config.permute else 0
        store.accepted += acc
        retain = (sweep >= config.burn_in
                  and (sweep - config.burn_in) % config.thin == 0)
        if retain or progress is not None:
            loglik = model.log_likelihood(X, labels)
        if retain:
            store.append(model.sticks, loglik, model.snapshots())
        if progress is not None:
            progress(sweep, loglik)
    return model, store.finalize()


def predict_probs(store: TraceStore, X, mode="average"):
    """Posterior predictive category probabilities on new rows.

    mode="average" averages assembled probabilities over every retained
    sample; mode="best" uses only the sample with the highest training
    log-likelihood.  Rows sum to one up to floating point error.
    """
    if mode not in ("average", "best"):
        raise ValueError("mode must be 'average' or 'best'")
    X = np.asarray(X, float)
    metas = store.link_meta
    links = [LinkSpec.from_dict(meta["spec"]).build(meta["ncov"], 0)
             for meta in metas]
    model = StickModel(links, construction=store.construction)
    if mode == "best":
        indices = [int(np.argmax(store.loglik_trace))]
    else:
        indices = range(store.n_samples)
    acc = np.zeros((X.shape[0], store.n_categories))
    count = 0
    for idx in indices:
        model.restore(store.snapshot_at(idx), store.sticks_trace[idx])
        acc += model.category_probs(X)
        count += 1
    return acc / count


def collect_transform(model: StickModel):
    """Harvest softplus hyperplanes from a fitted stick model.

    Every stick link must be a softplus-mixture link.  Each expert
    that still explains at least one training outcome contributes all
    of its layer hyperplanes, so the record holds
    sum_s (active experts at stick s) * n_layers rows.
    """
    from .data import TransformRecord

    planes = []
    ncov = None
    for link in model.links:
        if not hasattr(link, "active_experts"):
            raise ValueError("covariate transform needs softplus-mixture "
                             "links on every stick")
        ncov = link.B.shape[2]
        for k in link.active_experts():
            for t in range(link.B.shape[1]):
                planes.append(link.B[k, t].copy())
    if planes:
        return TransformRecord(np.array(planes))
    return TransformRecord(np.zeros((0, ncov if ncov else 1)))
