"""Ready-made problems: the three pricing test cases and the manufactured solution."""

from __future__ import annotations

import numpy as np

from .bs1d import BoundaryProfiles, make_boundary_profiles
from .lod2d import Problem
from .model import (
    Butterfly,
    CashOrNothing,
    DomainBox,
    MarketParams,
    Payoff,
    Ramp,
    manufactured_case,
    manufactured_source,
)

TP_PARAMS = MarketParams(r=0.1, xi=1.0, mu=0.0, rho=0.9)


def pricing_problem(name: str, params: MarketParams, box: DomainBox, payoff: Payoff,
                    homogeneous: bool = False) -> Problem:
    payoff.check_box(box.X)

    def initial(x, y):
        return payoff(x) + 0.0 * y

    def boundary(grid, K):
        return make_boundary_profiles(params, box, payoff, grid, K, homogeneous=homogeneous)

    nonneg = not isinstance(payoff, Butterfly)
    return Problem(name, params, box, initial, boundary, payoff=payoff, nonnegative_data=nonneg)


def tp1(zeta: float = 0.01, params: MarketParams = TP_PARAMS) -> Problem:
    """Vanilla call, E = 57."""
    return pricing_problem("tp1", params, DomainBox(X=100.0, Y=1.0, T=1.0, zeta=zeta), Ramp(57.0))


def tp2(zeta: float = 0.01, params: MarketParams = TP_PARAMS, B: float = 1.0) -> Problem:
    """Cash-or-nothing call, E = 57."""
    return pricing_problem("tp2", params, DomainBox(X=100.0, Y=0.36, T=1.0, zeta=zeta),
                           CashOrNothing(B=B, E=57.0))


def tp3(zeta: float = 0.01, params: MarketParams = TP_PARAMS) -> Problem:
    """Butterfly delta payoff with homogeneous Dirichlet data."""
    return pricing_problem("tp3", params, DomainBox(X=100.0, Y=0.36, T=1.0, zeta=zeta),
                           Butterfly(40.0, 50.0, 60.0), homogeneous=True)


def manufactured(params: MarketParams, box: DomainBox) -> Problem:
    """u = x exp(-y t) with its induced source and exact Dirichlet data."""

    def exact(x, y, t):
        return manufactured_case(params, x, y, t)[0]

    def initial(x, y):
        return np.asarray(x, dtype=float) + 0.0 * y

    def boundary(grid, K):
        return BoundaryProfiles.from_function(grid, box.T * np.arange(K + 1) / K, exact)

    return Problem("manufactured", params, box, initial, boundary,
                   source=manufactured_source(params), exact=exact)


MANUFACTURED_SETS = {
    "a": MarketParams(r=0.0, xi=1.0, mu=0.0, rho=0.5),
    "b": MarketParams(r=0.1, xi=1.0, mu=0.1, rho=0.9),
}
UNIT_BOX = DomainBox(X=1.0, Y=1.0, T=1.0, zeta=0.01)
