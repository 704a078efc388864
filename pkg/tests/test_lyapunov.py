import itertools
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from cartanlab.catalog import EXAMPLE_A, EXAMPLE_B, example_action, quartic_action, symplectic_family
from cartanlab.lyapunov import (
    FunctionalFamily,
    LinearFunctional,
    NoSeparatorError,
    SymplecticPairError,
    chamber_diagram,
    coarse_classes,
    invariant_splitting,
    kernel_element,
    negative_pairs,
    pipart_perturbation,
    proportionality,
    separating_element,
)

# (log chi_A, log chi_B) per joint eigendirection; A and B are symmetric, so
# numpy's eigh gives an independent route (see test below). Frozen to 7 digits.
EXAMPLE_COEFFS = (
    (1.6191738, 1.1777252),
    (-0.4414486, -1.6191738),
    (-1.1777252, 0.4414486),
)


def example_family() -> FunctionalFamily:
    return example_action().family


def test_example_functionals_match_frozen_oracle():
    fam = example_family()
    assert np.allclose(fam.matrix(), EXAMPLE_COEFFS, atol=1e-7)
    assert fam.det_one
    assert fam.weighted_sum_norm() < 1e-10


def test_example_functionals_match_symmetric_eigh():
    w, v = np.linalg.eigh(EXAMPLE_A.to_numpy())
    b = EXAMPLE_B.to_numpy()
    pairs = sorted(((math.log(wa), math.log(v[:, k] @ b @ v[:, k])) for k, wa in enumerate(w)), reverse=True)
    assert np.allclose(example_family().matrix(), pairs, atol=1e-12)


def test_functional_values_at_generators():
    fam = example_family()
    assert np.allclose(np.exp(fam.values((1, 0))), (5.048917339522305, 0.6431041321077906, 0.30797852836990414))


def test_det_one_family_must_sum_to_zero():
    with pytest.raises(ValueError, match="nonzero exponent sum"):
        FunctionalFamily((LinearFunctional([1.0, 0.0]), LinearFunctional([0.5, 0.0])), det_one=True)


def test_example_chambers():
    d = chamber_diagram(example_family())
    assert len(d) == 6
    labels = d.labels()
    assert "+++" not in labels and "---" not in labels
    assert len(set(labels)) == 6
    assert len(d.kernel_directions) == 3


def test_quartic_chambers():
    d = chamber_diagram(quartic_action().family)
    assert len(d) == 2**4 - 2
    for ch in d.chambers:
        assert tuple(np.sign(d.family.values(ch.point)).astype(int)) == ch.signs


def test_chamber_diagram_rejects_zero_functional():
    fam = FunctionalFamily((LinearFunctional([0.0, 0.0]), LinearFunctional([1.0, 0.0])))
    with pytest.raises(ValueError, match="zero functional"):
        chamber_diagram(fam)


def test_kernel_and_separator():
    fam = example_family()
    for f in fam.functionals:
        s = kernel_element(f)
        assert abs(f(s)) < 1e-12 and abs(np.linalg.norm(s) - 1) < 1e-12
    s0 = separating_element(fam[0], fam[1])
    assert abs(fam[0](s0)) < 1e-12 and fam[1](s0) > 0
    with pytest.raises(NoSeparatorError):
        separating_element(fam[0], fam[0].scaled(2.0))


def test_pipart_example():
    fam = example_family()
    for i in range(3):
        p = pipart_perturbation(fam, i)
        assert abs(p.values_s0[i]) < 1e-12
        assert p.values_s1[i] < 0
        for j in range(3):
            if j != i:
                assert np.sign(p.values_s1[j]) == np.sign(p.values_s0[j]) != 0


def test_pipart_symplectic_pair():
    fam = symplectic_family()
    assert negative_pairs(fam) == [(0, 1), (2, 3)]
    with pytest.raises(SymplecticPairError) as info:
        pipart_perturbation(fam, 0)
    assert info.value.pairs == [(0, 1), (2, 3)]


def test_pipart_groups_positive_multiples():
    fam = FunctionalFamily(
        (LinearFunctional([1.0, 1.0]), LinearFunctional([2.0, 2.0]), LinearFunctional([1.0, -3.0]))
    )
    p = pipart_perturbation(fam, 0)
    assert p.values_s1[0] < 0 and p.values_s1[1] < 0


def test_coarse_classes_example_and_symplectic():
    classes, pairs = coarse_classes(example_family())
    assert len(classes) == 3 and pairs == []
    classes, pairs = coarse_classes(symplectic_family())
    assert len(classes) == 4 and pairs == [(0, 1), (2, 3)]


def test_zero_functionals_form_one_flagged_class():
    fam = FunctionalFamily((LinearFunctional([0.0, 0.0]), LinearFunctional([1.0, 0.0]), LinearFunctional([0.0, 0.0])))
    classes, _ = coarse_classes(fam)
    zero = [c for c in classes if c.zero]
    assert len(zero) == 1 and zero[0].member_indices == {0, 2}


functional_coeffs = st.lists(st.floats(-5, 5, allow_nan=False), min_size=2, max_size=2)


@settings(max_examples=60, deadline=None)
@given(
    st.lists(functional_coeffs, min_size=1, max_size=6),
    st.lists(st.floats(0.1, 10), min_size=6, max_size=6),
)
def test_coarse_classes_partition_and_scaling(coeffs, scales):
    fam = FunctionalFamily(tuple(LinearFunctional(c) for c in coeffs))
    classes, _ = coarse_classes(fam)
    members = [i for c in classes for i in c.member_indices]
    assert sorted(members) == list(range(len(fam)))
    scaled = FunctionalFamily(tuple(f.scaled(s) for f, s in zip(fam.functionals, scales)))
    again, _ = coarse_classes(scaled)
    assert {c.member_indices for c in classes} == {c.member_indices for c in again}


@settings(max_examples=60, deadline=None)
@given(functional_coeffs, functional_coeffs, st.floats(0.1, 10))
def test_proportionality_symmetry(u, v, c):
    f, g = LinearFunctional(u), LinearFunctional(v)
    assert proportionality(f, g) == proportionality(g, f)
    assume(not f.is_zero())
    assert proportionality(f, f.scaled(c)) == 1
    assert proportionality(f, f.scaled(-c)) == -1


@settings(max_examples=60, deadline=None)
@given(st.integers(-20, 20), st.integers(-20, 20))
def test_splitting_partitions_indices(a, b):
    assume((a, b) != (0, 0))
    u, s, z = invariant_splitting(example_family(), (a, b))
    assert sorted(u + s + z) == [0, 1, 2]
    # det-one: unstable and stable are both nonempty unless everything is neutral
    assert (u and s) or len(z) == 3


def test_splitting_on_kernel_is_neutral():
    fam = example_family()
    u, s, z = invariant_splitting(fam, kernel_element(fam[0]) * 3)
    assert z == [0] and len(u) == 1 and len(s) == 1
    with pytest.raises(ValueError):
        invariant_splitting(fam, (0, 0))


@pytest.mark.parametrize("i,j", list(itertools.permutations(range(3), 2)))
def test_example_functionals_pairwise_independent(i, j):
    assert proportionality(example_family()[i], example_family()[j]) == 0
