"""The measure-valued urn process and its tree couplings.

The canonical urn state is generative: either an :class:`UrnTrace` (initial
measure plus the ordered drawn colours) or a labelled tree.  Three exactly
law-equivalent simulators are provided -- the direct two-case drawing scheme,
a labelled recursive tree, and a labelled complete binary tree whose leaves
carry the urn -- plus the without-replacement kappa-ary variant and a forest
construction for initial measures of arbitrary mass.

In the tree couplings every node is one unit-mass packet of the urn: the
root (or one moving leaf tag, in the binary form) is the initial-measure
packet, and every other node is the replacement measure of the colour drawn
when that node was created.  Children of the initial packet therefore draw
their colour from the normalized initial measure; all other children draw
from the replacement kernel at the parent's colour.  This makes the
represented measure equal in law to the direct chain exactly, step by step,
not only asymptotically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .kernels import (
    DColourKernel,
    KDiscreteKernel,
    MMInfQueueKernel,
    RandomWalkKernel,
    ReplacementKernel,
    RenormalisationPlan,
    StableWalkKernel,
    sym_shuffle,
)
from .measures import AtomicMeasure, normalize, sample_atom
from .randomness import RngStream
from .trees import KARY, PLANAR, GrowingTree
from . import stats


# ---------------------------------------------------------------------------
# representations
# ---------------------------------------------------------------------------


@dataclass
class UrnTrace:
    """Generative urn state: initial measure + ordered drawn colours."""

    m0: AtomicMeasure
    kernel: ReplacementKernel
    drawn: list = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.drawn)

    @property
    def total_mass(self) -> float:
        return self.m0.total_mass + self.n

    def materialize(self) -> AtomicMeasure:
        """Exact atomic composition; requires an atomic kernel."""
        pairs = list(self.m0.atoms())
        for c in self.drawn:
            add = self.kernel.atoms(c)
            if add is None:
                raise ValueError("cannot materialize a non-atomic kernel")
            pairs.extend(add.atoms())
        return AtomicMeasure(pairs)


@dataclass
class LabelledTree:
    """Tree-coupled urn state.

    kind "rrt": every node is a packet, the root is the initial packet.
    kind "bst": packets live on the leaves of a complete binary tree; the
    initial packet is the leaf with m0_flag set.  kind "kary": leaves are
    balls of weight 1/kappa.
    """

    kind: str
    tree: GrowingTree
    labels: list
    m0: AtomicMeasure
    kernel: ReplacementKernel
    m0_flags: list = field(default_factory=list)

    @property
    def n(self) -> int:
        if self.kind == "rrt":
            return self.tree.n_nodes - 1
        if self.kind == "bst":
            return (self.tree.n_nodes - 1) // 2
        return (self.tree.n_nodes - 1) // self.tree.kappa

    def packet_nodes(self) -> list:
        """Node ids carrying one unit-mass packet each (root/initial first)."""
        if self.kind == "rrt":
            return list(range(self.tree.n_nodes))
        if self.kind == "bst":
            return self.tree.leaves()
        raise ValueError("kary urns have balls, not unit packets")

    def represented_measure(self) -> AtomicMeasure:
        """Exact composition; requires an atomic kernel (or kappa-discrete)."""
        if self.kind == "kary":
            k = self.tree.kappa
            return AtomicMeasure(
                (self.labels[u], 1.0 / k) for u in self.tree.leaf_list
            )
        pairs = list(self.m0.atoms())
        if self.kind == "rrt":
            nodes = range(1, self.tree.n_nodes)
            flags = None
        else:
            nodes = self.tree.leaves()
            flags = self.m0_flags
        for u in nodes:
            if flags is not None and flags[u]:
                continue
            add = self.kernel.atoms(self.labels[u])
            if add is None:
                raise ValueError("cannot materialize a non-atomic kernel")
            pairs.extend(add.atoms())
        return AtomicMeasure(pairs)

    @property
    def total_mass(self) -> float:
        if self.kind == "kary":
            return len(self.tree.leaf_list) / self.tree.kappa
        return self.m0.total_mass + self.n


@dataclass
class ForestUrn:
    """Forest coupling for initial mass > 1: unit-root trees plus at most one
    fractional-weight root."""

    trees: list
    labels: list  # labels[i][u]; None at roots (they are initial packets)
    root_weights: list
    m0: AtomicMeasure
    kernel: ReplacementKernel

    def sizes(self) -> list:
        return [t.n_nodes for t in self.trees]


# ---------------------------------------------------------------------------
# simulators
# ---------------------------------------------------------------------------


def mvpp_direct(m0: AtomicMeasure, kernel: ReplacementKernel, n: int, s: RngStream) -> UrnTrace:
    """Direct simulation of the drawing scheme.

    At a step with k past draws and initial mass m, the next colour comes
    from the normalized initial measure with probability m/(m+k), otherwise
    from the replacement measure of a uniformly chosen past colour.
    """
    if m0.total_mass <= 0:
        raise ValueError("initial measure must have positive mass")
    if n < 0:
        raise ValueError("n must be >= 0")
    nor0 = normalize(m0)
    trace = UrnTrace(m0=m0, kernel=kernel, drawn=[])
    m = m0.total_mass
    for k in range(n):
        u = s.next_uniform() * (m + k)
        if u < m:
            c = sample_atom(nor0, s)
        else:
            c = kernel.sample(trace.drawn[int(u - m)], s)
        trace.drawn.append(c)
    return trace


def mvpp_via_rrt(m0: AtomicMeasure, kernel: ReplacementKernel, n: int, s: RngStream) -> LabelledTree:
    """Urn coupled to a labelled recursive tree (unit initial mass)."""
    if abs(m0.total_mass - 1.0) > 1e-12:
        raise ValueError("tree coupling needs an initial measure of mass 1")
    if n < 0:
        raise ValueError("n must be >= 0")
    nor0 = normalize(m0)
    t = GrowingTree(PLANAR)
    labels = [sample_atom(nor0, s)]
    for k in range(1, n + 1):
        parent = int(s.next_uniform() * k)
        t.add_child(parent)
        if parent == 0:
            labels.append(sample_atom(nor0, s))
        else:
            labels.append(kernel.sample(labels[parent], s))
    return LabelledTree(kind="rrt", tree=t, labels=labels, m0=m0, kernel=kernel)


def mvpp_via_bst(m0: AtomicMeasure, kernel: ReplacementKernel, n: int, s: RngStream) -> LabelledTree:
    """Urn coupled to the leaves of a uniformly grown complete binary tree.

    The drawn leaf's packet is copied to one child (fair coin) and the fresh
    packet -- the replacement measure of the colour just drawn -- goes to the
    other child.
    """
    if abs(m0.total_mass - 1.0) > 1e-12:
        raise ValueError("tree coupling needs an initial measure of mass 1")
    if n < 0:
        raise ValueError("n must be >= 0")
    nor0 = normalize(m0)
    t = GrowingTree(KARY, 2)
    labels: list = [None]
    flags = [True]
    for _ in range(n):
        u = t.leaf_list[int(s.next_uniform() * len(t.leaf_list))]
        if flags[u]:
            c = sample_atom(nor0, s)
        else:
            c = kernel.sample(labels[u], s)
        kids = t.split_leaf(u)  # consecutive ids, so append order matches
        keep_first = s.next_uniform() < 0.5
        for i, _child in enumerate(kids):
            if (i == 0) == keep_first:
                labels.append(labels[u])
                flags.append(flags[u])
            else:
                labels.append(c)
                flags.append(False)
    return LabelledTree(kind="bst", tree=t, labels=labels, m0=m0, kernel=kernel, m0_flags=flags)


def mvpp_forest(m0: AtomicMeasure, kernel: ReplacementKernel, n: int, s: RngStream) -> ForestUrn:
    """Forest coupling for arbitrary initial mass.

    The initial measure is split into floor(m) unit parts plus one
    fractional part; each part roots its own tree, parts are drawn
    proportionally to their weight, every added node has weight 1, and every
    root's children draw their colour from the normalized initial measure.
    """
    m = m0.total_mass
    if m <= 0:
        raise ValueError("initial measure must have positive mass")
    if n < 0:
        raise ValueError("n must be >= 0")
    nor0 = normalize(m0)
    k_full = int(math.floor(m + 1e-12))
    frac = m - k_full
    if frac < 1e-12:
        frac = 0.0
    roots = [1.0] * k_full + ([frac] if frac > 0 else [])
    trees = [GrowingTree(PLANAR) for _ in roots]
    labels: list = [[None] for _ in roots]
    # all weight-1 nodes, flat; fractional root handled by leftover mass
    flat = [(i, 0) for i in range(k_full)]
    for step in range(n):
        u = s.next_uniform() * (m + step)
        if int(u) < len(flat):
            ti, node = flat[int(u)]
        else:
            ti, node = len(roots) - 1, 0  # fractional root
        t = trees[ti]
        t.add_child(node)
        nid = t.n_nodes - 1
        if node == 0:
            labels[ti].append(sample_atom(nor0, s))
        else:
            labels[ti].append(kernel.sample(labels[ti][node], s))
        flat.append((ti, nid))
    return ForestUrn(trees=trees, labels=labels, root_weights=roots, m0=m0, kernel=kernel)


def mvpp_kdiscrete(m0: AtomicMeasure, kernel: KDiscreteKernel, n: int, s: RngStream) -> LabelledTree:
    """Without-replacement urn on a kappa-ary tree.

    Leaves are the live balls (weight 1/kappa each).  A uniform leaf is
    drawn, removed (it becomes internal) and its kappa children receive the
    atoms of the replacement measure in a uniformly shuffled order, so that
    labels along any branch form a Markov chain under the kernel.  The tree
    starts from the single ball whose colour is drawn from the normalized
    initial measure.
    """
    if not isinstance(kernel, KDiscreteKernel):
        raise ValueError("mvpp_kdiscrete needs a kappa-discrete kernel")
    if n < 0:
        raise ValueError("n must be >= 0")
    kappa = kernel.kappa
    for _, w in m0.atoms():
        balls = w * kappa
        if abs(balls - round(balls)) > 1e-9:
            raise ValueError(f"atom weight {w} is not a multiple of 1/{kappa}")
    t = GrowingTree(KARY, kappa)
    labels = [sample_atom(normalize(m0), s)]
    for _ in range(n):
        u = t.leaf_list[int(s.next_uniform() * len(t.leaf_list))]
        atoms = sym_shuffle(kernel.atom_tuple(labels[u]), s, kappa)
        t.split_leaf(u)
        labels.extend(atoms)
    return LabelledTree(kind="kary", tree=t, labels=labels, m0=m0, kernel=kernel)


# ---------------------------------------------------------------------------
# sampling from the current urn
# ---------------------------------------------------------------------------


def sample_colour(rep, s: RngStream):
    """One exact draw from the normalized current urn measure."""
    if isinstance(rep, UrnTrace):
        m = rep.m0.total_mass
        u = s.next_uniform() * (m + rep.n)
        if u < m:
            return sample_atom(normalize(rep.m0), s)
        return rep.kernel.sample(rep.drawn[int(u - m)], s)
    if rep.kind == "kary":
        t = rep.tree
        return rep.labels[t.leaf_list[int(s.next_uniform() * len(t.leaf_list))]]
    packets = rep.packet_nodes()
    u = packets[int(s.next_uniform() * len(packets))]
    if rep.kind == "rrt":
        is_m0 = u == 0
    else:
        is_m0 = rep.m0_flags[u]
    if is_m0:
        return sample_atom(normalize(rep.m0), s)
    return rep.kernel.sample(rep.labels[u], s)


def sample_pair(rep, s: RngStream) -> tuple:
    """Two conditionally independent kernel draws off the current urn.

    Tree form: two independent uniform packets, each pushed through the
    replacement kernel at its colour (the initial packet contributes a fresh
    draw from the normalized initial measure pushed through the kernel).
    Trace form: the drawing-scheme equivalent of the same construction.
    """
    if isinstance(rep, UrnTrace):
        if rep.n < 1:
            raise ValueError("pair sampling needs n >= 1")

        def one():
            m = rep.m0.total_mass
            u = s.next_uniform() * (m + rep.n)
            if u < m:
                c = sample_atom(normalize(rep.m0), s)
            else:
                c = rep.drawn[int(u - m)]
            return rep.kernel.sample(c, s)

        return one(), one()
    if rep.n < 1:
        raise ValueError("pair sampling needs n >= 1")
    if rep.kind == "kary":
        t = rep.tree

        def one_leaf():
            leaf = t.leaf_list[int(s.next_uniform() * len(t.leaf_list))]
            return rep.kernel.sample(rep.labels[leaf], s)

        return one_leaf(), one_leaf()

    def one_node():
        u = int(s.next_uniform() * rep.tree.n_nodes)
        if rep.kind == "rrt":
            colour = rep.labels[u] if u != 0 else sample_atom(normalize(rep.m0), s)
        else:
            colour = (
                sample_atom(normalize(rep.m0), s)
                if rep.m0_flags[u]
                else rep.labels[u]
            )
        return rep.kernel.sample(colour, s)

    return one_node(), one_node()


# ---------------------------------------------------------------------------
# vectorized batch simulators (additive kernels, point-mass start)
# ---------------------------------------------------------------------------


def _m0_sampler_np(m0: AtomicMeasure):
    atoms = m0.atoms()
    if len(atoms) == 1:
        c = float(atoms[0][0])
        return lambda s, size: np.full(size, c)
    vals = np.array([float(a[0]) for a in atoms])
    cum = np.cumsum([a[1] for a in atoms])
    cum /= cum[-1]

    def draw(s, size):
        return vals[np.searchsorted(cum, s.uniforms(size), side="right").clip(0, len(vals) - 1)]

    return draw


def batch_rrt_walk_labels(n, reps, increment, s, m0=None, dtype=float) -> np.ndarray:
    """Labels of `reps` independent walk-labelled recursive trees, as a
    (reps, n+1) array in node-creation order.  Law-equivalent to repeated
    mvpp_via_rrt with a walk kernel; one stream drives the whole batch in a
    fixed draw order."""
    m0_draw = _m0_sampler_np(m0) if m0 is not None else (lambda s, size: np.zeros(size))
    labels = np.empty((reps, n + 1), dtype=dtype)
    labels[:, 0] = m0_draw(s, reps)
    rows = np.arange(reps)
    for k in range(1, n + 1):
        parents = s.integers(0, k, reps)
        inc = increment.draw_many(s, reps)
        new = labels[rows, parents] + inc
        at_root = parents == 0
        if at_root.any():
            new[at_root] = m0_draw(s, int(at_root.sum()))
        labels[:, k] = new
    return labels


def batch_bmc_walk_labels(n, reps, increment, s, x0: float = 0.0) -> np.ndarray:
    """Labels of the pure branching walk on the recursive tree: the root
    carries x0 and every child is its parent's label plus an increment.
    This is the tree-indexed walk behind the Fourier-martingale machinery;
    it differs from the urn coupling only at the root's children."""
    labels = np.empty((reps, n + 1), dtype=float)
    labels[:, 0] = x0
    rows = np.arange(reps)
    for k in range(1, n + 1):
        parents = s.integers(0, k, reps)
        labels[:, k] = labels[rows, parents] + increment.draw_many(s, reps)
    return labels


def batch_rrt_depths(n, reps, s) -> np.ndarray:
    """(reps, n+1) node depths of independent recursive trees."""
    depths = np.zeros((reps, n + 1), dtype=np.int32)
    rows = np.arange(reps)
    for k in range(1, n + 1):
        parents = s.integers(0, k, reps)
        depths[:, k] = depths[rows, parents] + 1
    return depths


def batch_direct_walk_colours(n, reps, increment, s, m0=None, m0_mass: float = 1.0) -> np.ndarray:
    """(reps, n) drawn colours of the direct scheme for a walk kernel."""
    m0_draw = _m0_sampler_np(m0) if m0 is not None else (lambda s, size: np.zeros(size))
    colours = np.empty((reps, n), dtype=float)
    rows = np.arange(reps)
    for k in range(n):
        u = s.uniforms(reps)
        from_m0 = u < m0_mass / (m0_mass + k)
        if k == 0:
            colours[:, 0] = m0_draw(s, reps)
            continue
        idx = s.integers(0, k, reps)
        inc = increment.draw_many(s, reps)
        new = colours[rows, idx] + inc
        if from_m0.any():
            new[from_m0] = m0_draw(s, int(from_m0.sum()))
        colours[:, k] = new
    return colours


def batch_bst_walk_leaf_colours(n, reps, increment, s, m0=None) -> tuple:
    """Leaf packets of the binary-tree coupling for a walk kernel.

    Returns (colours, m0_flags), each (reps, n+1); column order is leaf
    creation order.  Coin flips are omitted: they permute leaf positions
    without changing the packet multiset."""
    m0_draw = _m0_sampler_np(m0) if m0 is not None else (lambda s, size: np.zeros(size))
    colours = np.zeros((reps, n + 1), dtype=float)
    flags = np.zeros((reps, n + 1), dtype=bool)
    flags[:, 0] = True
    rows = np.arange(reps)
    for k in range(n):
        idx = s.integers(0, k + 1, reps)
        chosen = colours[rows, idx]
        chflag = flags[rows, idx]
        inc = increment.draw_many(s, reps)
        new = chosen + inc
        if chflag.any():
            new[chflag] = m0_draw(s, int(chflag.sum()))
        colours[:, k + 1] = new
    return colours, flags


def batch_kary_shift_leaf_labels(n, reps, kappa, s) -> np.ndarray:
    """(reps, 1+n*(kappa-1)) leaf labels under the +1 shift kernel; the label
    of a ball equals its depth in the kappa-ary tree."""
    n_leaves = 1 + n * (kappa - 1)
    labels = np.zeros((reps, n_leaves), dtype=np.int32)
    rows = np.arange(reps)
    for k in range(n):
        size = 1 + k * (kappa - 1)
        idx = s.integers(0, size, reps)
        v = labels[rows, idx] + 1
        labels[rows, idx] = v
        labels[:, size : size + kappa - 1] = v[:, None]
    return labels


def batch_exact_colour_samples(colours, flags, increment, s, m0=None, draws_per_rep: int = 1) -> np.ndarray:
    """Exact draws from the normalized urn measure of batched tree states.

    colours: (reps, p) packet colours; flags marks initial-measure packets.
    Picks a uniform packet per draw, then one kernel step (or a fresh initial
    draw for flagged packets)."""
    m0_draw = _m0_sampler_np(m0) if m0 is not None else (lambda s, size: np.zeros(size))
    reps, p = colours.shape
    out = np.empty((reps, draws_per_rep))
    rows = np.arange(reps)
    for j in range(draws_per_rep):
        idx = s.integers(0, p, reps)
        chosen = colours[rows, idx]
        inc = increment.draw_many(s, reps)
        new = chosen + inc
        if flags is not None:
            f = flags[rows, idx]
            if f.any():
                new[f] = m0_draw(s, int(f.sum()))
        out[:, j] = new
    return out


# ---------------------------------------------------------------------------
# theorem verification pipeline
# ---------------------------------------------------------------------------


def _rescale(x, plan: RenormalisationPlan, t: float):
    return (np.asarray(x, dtype=float) - plan.b(t)) / plan.a(t)


def composite_reference(plan: RenormalisationPlan):
    """Closed-form law of G*g(L) + f(L) when one exists, else None."""
    gamma = plan.gamma_reference
    if plan.name in ("brw", "kdiscrete-shift") and isinstance(gamma, (stats.Normal, stats.PointMass)):
        var = gamma.var if isinstance(gamma, stats.Normal) else 0.0
        mean_sq = plan.f(1.0) ** 2  # f(x) = m x, so f(1) = m
        return stats.Normal(0.0, var + mean_sq)
    if plan.name == "ergodic":
        return gamma
    return None


def verify_main_theorem(
    kernel: ReplacementKernel,
    plan: RenormalisationPlan,
    m0: AtomicMeasure,
    n_grid,
    replicas: int,
    s: RngStream,
    urns: int = 16,
    ks_threshold: float = 0.05,
    tv_threshold: float = 0.05,
) -> dict:
    """Rescaled-limit check: pooled pair marginals against the plan's limit.

    For each n, grows several independent urns, draws `replicas` pair samples
    in total, rescales them by (a(log n), b(log n)) -- with log n replaced by
    beta*log n for kappa-discrete kernels -- and reports the KS distance to
    the composite limit (or the total variation, for lattice ergodic limits)
    together with the pooled pair correlation of a bounded test function.
    """
    results = []
    for n in n_grid:
        t_arg = math.log(n)
        if isinstance(kernel, KDiscreteKernel):
            t_arg *= 1.0 + 1.0 / (kernel.kappa - 1)
        entry = {"n": int(n), "ks": None, "tv": None, "decorrelation": None}
        a_pairs = b_pairs = None
        if isinstance(kernel, (RandomWalkKernel, StableWalkKernel)) and getattr(kernel, "dim", 1) == 1:
            inc = kernel.increment if isinstance(kernel, RandomWalkKernel) else _StableInc(kernel)
            per = max(replicas // urns, 1)
            labels = batch_rrt_walk_labels(n, urns, inc, s, m0=m0)
            rows = np.repeat(np.arange(urns), per)
            iu = s.integers(0, n + 1, urns * per)
            iv = s.integers(0, n + 1, urns * per)
            a_pairs = labels[rows, iu] + inc.draw_many(s, urns * per)
            b_pairs = labels[rows, iv] + inc.draw_many(s, urns * per)
        elif isinstance(kernel, KDiscreteKernel):
            rep = mvpp_kdiscrete(m0, kernel, n, s)
            pairs = [sample_pair(rep, s) for _ in range(replicas)]
            a_pairs = np.array([p[0] for p in pairs], dtype=float)
            b_pairs = np.array([p[1] for p in pairs], dtype=float)
        elif isinstance(kernel, MMInfQueueKernel):
            trace = mvpp_direct(m0, kernel, n, s)
            pmf = {}
            mat = trace.materialize()
            for c, w in mat.atoms():
                pmf[int(c)] = w / mat.total_mass
            ref = plan.gamma_reference
            upto = max(pmf) + 10
            entry["tv"] = stats.total_variation(pmf, ref.pmf_dict(upto))
            entry["pass"] = entry["tv"] <= tv_threshold
            results.append(entry)
            continue
        elif isinstance(kernel, DColourKernel):
            trace = mvpp_direct(m0, kernel, n, s)
            from .kernels import leading_eigenpair

            mat = trace.materialize()
            lam, v1 = leading_eigenpair(kernel.rows)
            comp = np.array([mat.weight(j) for j in range(kernel.d)]) / n
            entry["l1"] = float(np.abs(comp - lam * v1).sum())
            entry["pass"] = entry["l1"] <= tv_threshold
            results.append(entry)
            continue
        else:
            raise ValueError(f"no verification route for kernel {type(kernel).__name__}")

        a_resc = _rescale(a_pairs, plan, t_arg)
        b_resc = _rescale(b_pairs, plan, t_arg)
        pooled = np.concatenate([a_resc, b_resc])
        ref = composite_reference(plan)
        if ref is not None and hasattr(ref, "cdf"):
            entry["ks"] = stats.ks_statistic(pooled, ref)
            entry["pass"] = entry["ks"] <= ks_threshold
        else:
            entry["hill"] = stats.hill_tail_exponent(pooled, max(len(pooled) // 20, 10))
            entry["pass"] = True  # qualitative: caller inspects hill/qq
        phi_a = np.cos(a_resc)
        phi_b = np.cos(b_resc)
        if np.std(phi_a) > 0 and np.std(phi_b) > 0:
            entry["decorrelation"] = float(np.corrcoef(phi_a, phi_b)[0, 1])
        results.append(entry)
    return {
        "plan": plan.name,
        "claimed": bool(plan.claimed),
        "replicas": int(replicas),
        "results": results,
        "pass": all(r.get("pass", False) for r in results),
    }


class _StableInc:
    """Adapter exposing a stable walk's increment through the batch API."""

    def __init__(self, kernel: StableWalkKernel):
        self.kernel = kernel

    def draw(self, s: RngStream) -> float:
        return s.next_stable(self.kernel.alpha, self.kernel.skew, self.kernel.scale)

    def draw_many(self, s: RngStream, size: int) -> np.ndarray:
        return s.stables(self.kernel.alpha, size, self.kernel.skew, self.kernel.scale)
