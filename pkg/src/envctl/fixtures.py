"""Finite instances used by the tests, the CLI and the experiment scripts."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb

from envctl.algebra import AtomSpace, Event, build_space, full_space
from envctl.assessment import Prior, StatisticalModel, Strategy, strategy_from_model


class BadGrid(ValueError):
    pass


@dataclass(frozen=True)
class FiniteInstance:
    space: AtomSpace
    prior: Prior
    model: StatisticalModel
    sigma: Strategy

    @classmethod
    def build(cls, space: AtomSpace, prior: Prior, rows) -> FiniteInstance:
        model = StatisticalModel(space, tuple(tuple(Fraction(x) for x in r) for r in rows))
        return cls(space, prior, model, strategy_from_model(space, model))


def grid_2x2() -> FiniteInstance:
    sp = full_space(2, 2)
    prior = Prior.on_cells(sp, [Fraction(1, 2), Fraction(1, 2)])
    return FiniteInstance.build(sp, prior, [[Fraction(1, 4), Fraction(3, 4)], [Fraction(3, 4), Fraction(1, 4)]])


def vacuity() -> FiniteInstance:
    """All prior mass on a row that never produces E1; the other two rows are null."""
    sp = full_space(3, 2)
    prior = Prior.on_cells(sp, [1, 0, 0])
    rows = [[0, 1], [Fraction(1, 2), Fraction(1, 2)], [Fraction(1, 3), Fraction(2, 3)]]
    return FiniteInstance.build(sp, prior, rows)


def binomial(theta: Fraction, n: int) -> list[Fraction]:
    return [comb(n, x) * theta**x * (1 - theta) ** (n - x) for x in range(n + 1)]


def binomial_surrogate(n: int) -> FiniteInstance:
    """Nine null rows ``Theta = i/10`` plus one row carrying all prior mass.

    The massive row stands for the remaining parameter values under a uniform prior, so
    its likelihood is the uniform predictive ``1/(n+1)``.
    """
    thetas = [Fraction(i, 10) for i in range(1, 10)]
    rows = [binomial(t, n) for t in thetas] + [[Fraction(1, n + 1)] * (n + 1)]
    sp = full_space(10, n + 1, row_labels=[f"T{i}" for i in range(1, 10)] + ["Trest"], col_labels=[f"X{x}" for x in range(n + 1)])
    prior = Prior.on_cells(sp, [0] * 9 + [1])
    return FiniteInstance.build(sp, prior, rows)


def binomial_events(inst: FiniteInstance) -> tuple[Event, Event]:
    """``C = (X = n)`` and ``D = (Theta in {1/10, ..., 9/10})``."""
    sp = inst.space
    C = sp.E(sp.n_observable - 1)
    D = sp.empty
    for i in range(9):
        D = D | sp.H(i)
    return C, D


def uniform_grid(k: int, n: int) -> FiniteInstance:
    """``Theta`` uniform on ``{0, 1/k, ..., 1}`` with a binomial(n, Theta) count."""
    if k < 1 or n < 0:
        raise BadGrid("grid needs k >= 1 and n >= 0")
    thetas = [Fraction(j, k) for j in range(k + 1)]
    rows = [binomial(t, n) for t in thetas]
    compat = [[x > 0 for x in r] for r in rows]
    sp = build_space(compat, row_labels=[f"T{j}" for j in range(k + 1)], col_labels=[f"X{x}" for x in range(n + 1)])
    prior = Prior.on_cells(sp, [Fraction(1, k + 1)] * (k + 1))
    return FiniteInstance.build(sp, prior, rows)


def theta_interval(inst: FiniteInstance, k: int, lo: Fraction, hi: Fraction) -> Event:
    """Rows with ``lo < Theta <= hi``."""
    sp = inst.space
    ev = sp.empty
    for j in range(k + 1):
        if lo < Fraction(j, k) <= hi:
            ev = ev | sp.H(j)
    return ev


@dataclass(frozen=True)
class BayesRow:
    k: int
    posterior: Fraction  # fully disintegrable Q(theta1 < Theta <= theta2 | X = n)
    limit: Fraction
    predictive: Fraction  # P^d(X = n)

    @property
    def error(self) -> Fraction:
        return abs(self.posterior - self.limit)


def bayes_convergence(k: int, n: int, theta1: Fraction, theta2: Fraction, levels: int = 1) -> list[BayesRow]:
    """Posterior of ``(theta1, theta2]`` after ``n`` successes in ``n`` trials on grids ``k, 2k, ...``.

    The limit is the uniform-prior value ``theta2^(n+1) - theta1^(n+1)``.
    """
    from envctl.envelopes import disintegrable_joint, fully_dis_envelope

    theta1, theta2 = Fraction(theta1), Fraction(theta2)
    if k < 2 or levels < 1:
        raise BadGrid("need k >= 2 and at least one level")
    if not 0 <= theta1 < theta2 <= 1:
        raise BadGrid("need 0 <= theta1 < theta2 <= 1")
    if (theta1 * k).denominator != 1 or (theta2 * k).denominator != 1:
        raise BadGrid(f"theta1 and theta2 must lie on the grid of step 1/{k}")
    limit = theta2 ** (n + 1) - theta1 ** (n + 1)
    out = []
    for level in range(levels):
        kk = k << level
        inst = uniform_grid(kk, n)
        A = theta_interval(inst, kk, theta1, theta2)
        B = inst.space.E(n)
        post = fully_dis_envelope(inst.prior, inst.sigma, A, B)
        if post.lower != post.upper:  # X = n has positive disintegrable mass on every grid
            raise ArithmeticError(f"posterior is not a point at k={kk}")
        out.append(BayesRow(kk, post.lower, limit, disintegrable_joint(inst.prior, inst.sigma, B)))
    return out
