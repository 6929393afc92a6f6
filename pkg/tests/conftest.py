import numpy as np
import pytest

from greenbeam.model import BeamformerSet, Channel, SystemConfig

# Section IV parameters in W
PMAX = 1.5
P_SUM = 10 ** 1.6
ETA = 0.38
P_RF = 0.35
P_C = 20.0


def make_cfg(n=4, k=2, gamma=1.0, beta=0.5, sigma2=1.0, **kw):
    args = dict(n_antennas=n, n_users=k, sinr_targets=gamma, p_antenna_max=PMAX,
                p_sum_max=P_SUM, eta_max=ETA, beta=beta, p_rf=P_RF, p_static=P_C,
                sigma2=sigma2)
    args.update(kw)
    return SystemConfig(**args)


def random_channel(rng, k, n, scale=1.0):
    h = rng.standard_normal((k, n)) + 1j * rng.standard_normal((k, n))
    return Channel(np.sqrt(scale / 2) * h)


def random_beams(rng, k, n, scale=1.0):
    return BeamformerSet(scale * (rng.standard_normal((k, n)) + 1j * rng.standard_normal((k, n))))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_socp(rng, n=None, with_eq=None):
    """Random SOCP with strictly feasible primal and dual, hence a finite optimum."""
    from greenbeam.socp import ConeProblem, ConeSpec, NonNeg, SecondOrder

    n = n or int(rng.integers(2, 8))
    blocks = [NonNeg(int(rng.integers(1, 5)))]
    blocks += [SecondOrder(int(rng.integers(1, 6))) for _ in range(int(rng.integers(1, 4)))]
    spec = ConeSpec(blocks)

    def interior():
        parts = []
        for b in blocks:
            if isinstance(b, NonNeg):
                parts.append(rng.uniform(0.1, 2.0, b.length))
            else:
                u = rng.standard_normal(b.dim - 1)
                parts.append(np.concatenate([[np.linalg.norm(u) + rng.uniform(0.1, 2.0)], u]))
        return np.concatenate(parts)

    m = spec.dim
    G = rng.standard_normal((m, n))
    x0, s0, z0 = rng.standard_normal(n), interior(), interior()
    h = G @ x0 + s0
    if with_eq is None:
        with_eq = rng.random() < 0.3
    if with_eq and n > 1:
        A = rng.standard_normal((1, n))
        b = A @ x0
        y0 = rng.standard_normal(1)
        c = -(G.T @ z0 + A.T @ y0)
        return ConeProblem(c=c, G=G, h=h, A=A, b=b, cones=spec)
    return ConeProblem(c=-G.T @ z0, G=G, h=h, cones=spec)


# acceptance criteria append (number, passed, detail) here; printed after the run
ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(ACCEPTANCE_LINES, key=lambda r: r[0]):
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
