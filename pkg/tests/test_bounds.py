import math

import numpy as np
import pytest

from conftest import random_model, scalar_context
from mgcdiff import (
    MgcContext,
    TiedCovarianceRequired,
    TruncationBudget,
    TruncationNotFound,
    ValidationError,
    bound_eta,
    bound_gb1,
    bound_gb2,
    certify_pair_error,
    diffusion_distance,
    embed_batch,
    lagrange_remainder,
    select_truncation,
    trp_assemble,
    trp_solve,
    worst_case_norms,
)
from mgcdiff.bounds import h_norm_bound, log_gram_prefactor
from mgcdiff.features import whitened_centers

# mpmath references
LAGRANGE_HALF_3 = 0.0042935449757815837
GB1_PAIR = 0.16927083333333333
GB2_S1_L3 = 0.018988156876153809
ETA_SCALAR = 13572.291997303331  # B = 1/24, nu_min = 1e-3, 2D = 1.5


def test_lagrange_remainder():
    assert lagrange_remainder(1.0, 1.0, 1) == pytest.approx(math.e / 2, rel=1e-15)
    assert math.e - 2 <= lagrange_remainder(1.0, 1.0, 1)
    assert lagrange_remainder(0.0, 2.0, 5) == 0.0
    assert lagrange_remainder(0.5, 0.5, 3) == pytest.approx(LAGRANGE_HALF_3, rel=1e-14)
    with pytest.raises(ValidationError):
        lagrange_remainder(2.0, 1.0, 1)


def test_scalar_trp_assembly(scalar_ctx):
    p = trp_assemble(scalar_ctx, 0)
    assert p.a[0, 0] == pytest.approx(np.sqrt(0.375) * (2 / 3), rel=1e-14)
    assert p.b[0] == 0.0
    assert trp_solve(p).value == pytest.approx(1 / 6, rel=1e-13)


def test_assembly_reproduces_centers(rng):
    ctx = MgcContext(random_model(rng, 2, 3, tied=True), 1.7)
    x = rng.standard_normal(2)
    chat = whitened_centers(ctx, x)
    for j in range(3):
        p = trp_assemble(ctx, j)
        np.testing.assert_allclose(p.a @ x + p.b, chat[j], rtol=1e-12, atol=1e-14)


def test_worst_norms_dominate_samples(rng):
    ctx = MgcContext(random_model(rng, 2, 3, tied=True), 0.9)
    s = worst_case_norms(ctx, 2.0)
    x = rng.standard_normal((10_000, 2))
    x *= 2.0 * rng.uniform(0, 1, (10_000, 1)) ** 0.5 / np.linalg.norm(x, axis=1, keepdims=True)
    sampled = np.max(np.sum(whitened_centers(ctx, x) ** 2, axis=-1), axis=0)
    assert np.all(s >= sampled - 1e-12)


def test_untied_rejected(rng):
    ctx = MgcContext(random_model(rng, 2, 2), 1.0)
    with pytest.raises(TiedCovarianceRequired):
        trp_assemble(ctx, 0)


def test_gb_values():
    assert bound_gb1([1.0], 3) == pytest.approx(1 / 24, rel=1e-14)
    assert bound_gb1([1.0, 0.25], 2) == pytest.approx(GB1_PAIR, rel=1e-14)
    assert bound_gb2([1.0], 3) == pytest.approx(GB2_S1_L3, rel=1e-12)
    assert bound_gb2([0.0], 4) == 0.0 and bound_gb1([0.0], 4) == 0.0


def test_gb_decrease_and_dominance():
    for s in (0.1, 1.0, 5.0, 30.0):
        g1 = [bound_gb1([s], l) for l in range(40)]
        g2 = [bound_gb2([s], l) for l in range(40)]
        assert all(b < a for a, b in zip(g2, g2[1:]) if a > 1e-300)
        tail = [g for l, g in enumerate(g1) if l + 1 > s]
        assert all(b < a for a, b in zip(tail, tail[1:]) if a > 0)
        assert all(b2 <= b1 * (1 + 1e-12) for b1, b2 in zip(g1, g2))


def test_eta_scalar(scalar_ctx):
    pref = math.exp(log_gram_prefactor(scalar_ctx))
    assert pref == pytest.approx((2 * math.pi) ** -0.5 * 1.5 ** -0.5, rel=1e-14)
    eta = pref / 1e-6 * (1 / 24)
    assert eta == pytest.approx(ETA_SCALAR, rel=1e-12)
    assert bound_eta(scalar_ctx, 3, 1e-3, worst_norms=[0.0]) == 0.0


def test_strict_not_above_unit(rng):
    ctx = MgcContext(random_model(rng, 2, 3, tied=True), 1.0)
    assert h_norm_bound(ctx, "strict") <= 1.0
    for l in (1, 5, 10):
        assert bound_eta(ctx, l, 1e-3, "strict") <= bound_eta(ctx, l, 1e-3, "unit")
    with pytest.raises(ValidationError):
        h_norm_bound(ctx, "other")


def test_eta_decreasing_in_l(scalar_ctx):
    etas = [bound_eta(scalar_ctx, l, 1e-3) for l in range(1, 15)]
    assert all(b < a for a, b in zip(etas, etas[1:]))


def test_select_truncation_crossing(scalar_ctx):
    budget = select_truncation(scalar_ctx, 0.1, 1e-3)
    target = 0.1 ** 2 / 4
    assert budget.eta <= target
    assert bound_eta(scalar_ctx, budget.l_max - 1, 1e-3) > target
    assert budget.recomputed_eta() == pytest.approx(budget.eta, rel=1e-14)
    assert select_truncation(scalar_ctx, 1e6, 1e-3).l_max == 1


def test_select_truncation_not_found():
    ctx = scalar_context(0.01)
    with pytest.raises(TruncationNotFound):
        select_truncation(ctx, 1e-6, 1e-3, rho_x=50.0, l_cap=3)


def test_budget_json_round_trip(scalar_ctx):
    budget = select_truncation(scalar_ctx, 0.5, 1e-3)
    assert TruncationBudget.from_json(budget.to_json()) == budget


def test_certify_interval(scalar_ctx, rng):
    budget = select_truncation(scalar_ctx, 0.1, 1e-3)
    assert certify_pair_error(budget, 0.0) == (0.0, 0.1)
    x, z = rng.uniform(-1, 1, (30, 1)), rng.uniform(-1, 1, (30, 1))
    d = diffusion_distance(scalar_ctx, x, z)
    dl = np.linalg.norm(embed_batch(scalar_ctx, x, budget.l_max) - embed_batch(scalar_ctx, z, budget.l_max), axis=1)
    for di, dli in zip(d, dl):
        lo, hi = certify_pair_error(budget, dli)
        assert lo <= di <= hi
    zero = TruncationBudget(**{**budget.__dict__, "zeta": 0.0})
    assert certify_pair_error(zero, 0.3) == (0.3, 0.3)
