import pytest

from reebtwist import lincr, plane, profiles


@pytest.fixture(scope="session")
def default_pair():
    return profiles.default_pair()


@pytest.fixture(scope="session")
def tp(default_pair):
    return default_pair[0]


@pytest.fixture(scope="session")
def bp(default_pair):
    return default_pair[1]


@pytest.fixture(scope="session")
def matched(tp):
    return profiles.matched_binding_profile(tp)


@pytest.fixture(scope="session")
def plane_sol(bp):
    return plane.solve_plane(bp, r_at_1=bp.core_end / 2.0)


@pytest.fixture(scope="session")
def we(bp, plane_sol):
    return lincr.assemble_W_equation(bp, plane_sol)


@pytest.fixture(scope="session")
def kernel_report(we):
    return lincr.kernel_dimension(we, k_max=5, n=2)
