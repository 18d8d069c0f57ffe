import pytest

from mvpp import oracle
from mvpp.kernels import DColourKernel, KDiscreteKernel
from mvpp.measures import AtomicMeasure

IDENT2 = DColourKernel([[1.0, 0.0], [0.0, 1.0]])


def test_exact_law_validation():
    law = oracle.ExactLaw({0: 0.5, 1: 0.5})
    law.check()
    with pytest.raises(AssertionError):
        oracle.ExactLaw({0: 0.7}).check()


# ---------------------------------------------------------------------------
# urn laws
# ---------------------------------------------------------------------------


def test_identity_urn_two_unit_balls():
    # classical exchangeable urn: all three count vectors equally likely,
    # compositions (3,1), (2,2), (1,3)
    m0 = AtomicMeasure([(0, 1.0), (1, 1.0)])
    law = oracle.exact_urn_law(m0, IDENT2, 2)
    for counts in ((2, 0), (1, 1), (0, 2)):
        assert law.probs[counts] == pytest.approx(1 / 3, abs=1e-12)
    assert oracle.dcolour_composition(m0, IDENT2, (2, 0)) == (3.0, 1.0)


def test_urn_law_n0_point_mass():
    m0 = AtomicMeasure([(0, 0.5), (1, 0.5)])
    law = oracle.exact_urn_law(m0, IDENT2, 0)
    assert law.probs == {(0, 0): 1.0}


def test_urn_law_mass_conservation():
    m0 = AtomicMeasure([(0, 0.25), (1, 0.75)])
    kern = DColourKernel([[0.5, 0.5], [0.25, 0.75]])
    n = 4
    law = oracle.exact_urn_law(m0, kern, n)
    for counts in law.probs:
        comp = oracle.dcolour_composition(m0, kern, counts)
        assert sum(comp) == pytest.approx(m0.total_mass + n, abs=1e-12)


def test_urn_law_budgets():
    m0 = AtomicMeasure([(0, 1.0), (1, 1.0)])
    with pytest.raises(oracle.BudgetError):
        oracle.exact_urn_law(m0, IDENT2, 9)


def test_urn_law_kdiscrete_states():
    kern = KDiscreteKernel.from_offsets((0, 1))
    m0 = AtomicMeasure([(0, 0.5)])  # one ball of colour 0
    law = oracle.exact_urn_law(m0, kern, 1)
    # drawing the single ball yields balls at 0 and 1
    assert law.probs == {((0, 1), (1, 1)): pytest.approx(1.0)}
    law2 = oracle.exact_urn_law(m0, kern, 2)
    assert law2.check().total() == pytest.approx(1.0)


# ---------------------------------------------------------------------------
# joint depth laws
# ---------------------------------------------------------------------------


def test_rrt_joint_depths_n1():
    law = oracle.exact_rrt_joint_depths(1)
    # two nodes: each of U, V uniform on {root, child}
    assert law.probs[(0, 0, 0)] == pytest.approx(0.25)
    assert law.probs[(1, 1, 1)] == pytest.approx(0.25)
    assert law.probs[(0, 1, 0)] == pytest.approx(0.25)
    assert law.probs[(1, 0, 0)] == pytest.approx(0.25)


def test_rrt_joint_depths_n2_lca_marginal():
    # recomputed by enumeration: 2 histories x 9 ordered pairs gives 2/3
    law = oracle.exact_rrt_joint_depths(2)
    assert law.marginal(lambda o: o[2]).probs[0] == pytest.approx(2 / 3, abs=1e-12)


def test_rrt_depth_marginal_consistency():
    joint = oracle.exact_rrt_joint_depths(3).marginal(lambda o: o[0])
    single = oracle.exact_rrt_depth(3)
    assert joint.max_abs_diff(single) < 1e-12


def test_bst_joint_depths_n1_and_n2():
    dlaw, llaw = oracle.exact_bst_joint_depths(1)
    assert dlaw.probs == {(0, 0, 0): pytest.approx(1.0)}
    dlaw2, _ = oracle.exact_bst_joint_depths(2)
    m = dlaw2.marginal(lambda o: o[2])
    assert m.probs[0] == pytest.approx(0.75)
    assert m.probs[1] == pytest.approx(0.25)


def test_left_depth_transport_law_at_n3():
    # pair-depth law: BST left-depths equal RRT depths minus one over the
    # non-root nodes
    _, llaw = oracle.exact_bst_joint_depths(3)
    bst_pairs = llaw.marginal(lambda o: (o[0], o[1]))
    rrt = oracle.exact_rrt_joint_depths(3, include_root=False)
    rrt_pairs = rrt.marginal(lambda o: (o[0] - 1, o[1] - 1))
    assert bst_pairs.max_abs_diff(rrt_pairs) < 1e-12


def test_depth_budgets():
    with pytest.raises(oracle.BudgetError):
        oracle.exact_rrt_joint_depths(9)
    with pytest.raises(oracle.BudgetError):
        oracle.exact_bst_joint_depths(9)


# ---------------------------------------------------------------------------
# kappa-ary subtree laws
# ---------------------------------------------------------------------------


def test_kary_tree_count():
    assert oracle.kary_tree_count(2, 2) == 2  # (1/3) C(4,2)
    assert oracle.kary_tree_count(0, 3) == 1
    assert oracle.kary_tree_count(3, 2) == 5  # Catalan
    assert oracle.kary_tree_count(2, 3) == 3


def test_kary_subtree_law_small():
    law = oracle.exact_kary_subtree_law(2, 2)
    assert law.probs[(1, 0)] == pytest.approx(0.5)
    assert law.probs[(0, 1)] == pytest.approx(0.5)


def test_kary_enumerated_vs_closed_form():
    for n, kappa in ((4, 2), (3, 3), (2, 4)):
        enum = oracle.exact_kary_subtree_law(n, kappa)
        closed = oracle.closed_form_kary(n, kappa)
        assert enum.max_abs_diff(closed) <= 1e-10, (n, kappa)


def test_kary_budget():
    with pytest.raises(oracle.BudgetError):
        oracle.exact_kary_subtree_law(13, 2)


# ---------------------------------------------------------------------------
# coupling laws
# ---------------------------------------------------------------------------


def test_coupling_one_step_identical():
    m0 = AtomicMeasure([(0, 0.5), (1, 0.5)])
    kern = DColourKernel([[0.5, 0.5], [0.25, 0.75]])
    laws = oracle.exact_coupling_law(m0, kern, 1)
    assert laws["direct"].max_abs_diff(laws["rrt"]) < 1e-15
    assert laws["direct"].max_abs_diff(laws["bst"]) < 1e-15


def test_coupling_three_steps_all_constructions():
    m0 = AtomicMeasure([(0, 0.5), (1, 0.5)])
    kern = DColourKernel([[0.5, 0.5], [0.25, 0.75]])
    laws = oracle.exact_coupling_law(m0, kern, 3)
    assert laws["direct"].max_abs_diff(laws["rrt"]) <= 1e-12
    assert laws["direct"].max_abs_diff(laws["bst"]) <= 1e-12
    with pytest.raises(oracle.BudgetError):
        oracle.exact_coupling_law(m0, kern, 4)


def test_coupling_point_mass_start():
    m0 = AtomicMeasure([(1, 1.0)])
    kern = DColourKernel([[0.9, 0.1], [0.2, 0.8]])
    laws = oracle.exact_coupling_law(m0, kern, 2)
    assert laws["direct"].max_abs_diff(laws["rrt"]) <= 1e-12
    assert laws["direct"].max_abs_diff(laws["bst"]) <= 1e-12


# ---------------------------------------------------------------------------
# kappa-discrete leaf law
# ---------------------------------------------------------------------------


def test_kdiscrete_leaf_law_example():
    kern = KDiscreteKernel.from_offsets((0, 1))
    law = oracle.exact_kdiscrete_leaf_law(kern, 2, 0)
    assert law.probs[(0, 1, 1)] == pytest.approx(0.5)
    assert law.probs[(0, 1, 2)] == pytest.approx(0.5)
    # the colour-0 ball persists in every outcome here
    assert all(min(outcome) == 0 for outcome in law.probs)


def test_kdiscrete_leaf_law_matches_measure_dynamics():
    # the sorted leaf multiset determines the urn state: compare with the
    # direct without-replacement enumeration started from one ball
    kern = KDiscreteKernel.from_offsets((0, 1))
    leaf_law = oracle.exact_kdiscrete_leaf_law(kern, 2, 0)
    urn_law = oracle.exact_urn_law(AtomicMeasure([(0, 0.5)]), kern, 2)
    derived = oracle.ExactLaw()
    for leaves, p in leaf_law.probs.items():
        balls = {}
        for c in leaves:
            balls[c] = balls.get(c, 0) + 1
        derived.add(tuple(sorted(balls.items())), p)
    assert derived.max_abs_diff(urn_law) < 1e-12
