import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nhskin import _kernels
from nhskin.dynamics import (
    channel_phase,
    dynamical_matrix,
    evolve,
    launch_state,
    snapshot,
    time_grid,
)
from nhskin.errors import ConvergenceError
from nhskin.model import ChainParams, build_real_space, dissipation_matrix

from conftest import match_distance

GAMMA = 0.1


def fig3(r=-1.0, n=5):
    return ChainParams.from_ratios(n, r, -GAMMA, 0.5, gamma=GAMMA)


def test_rejects_gain():
    with pytest.raises(ValueError, match="gain"):
        dynamical_matrix(ChainParams.reducible(3, 0.0, 0.2, 1.0))


def test_shift_by_loss():
    p = fig3(0.4)
    a = np.linalg.eigvals(build_real_space(p)) - 0.1j
    b = np.linalg.eigvals(dynamical_matrix(p))
    assert match_distance(a, b) <= 1e-10


def test_passive_for_unit_loss():
    for r in np.linspace(-2, 2, 21):
        h = dynamical_matrix(ChainParams.from_ratios(10, r, -1.0, 1.0))
        assert np.linalg.eigvals(h).imag.max() <= 1e-7


def test_lossless_equals_hamiltonian():
    p = ChainParams.reducible(4, 0.3, 0.0, 0.7)
    assert np.array_equal(dynamical_matrix(p), build_real_space(p))


def test_ports_optional():
    p = fig3()
    diff = dynamical_matrix(p, include_ports=True) - dynamical_matrix(p)
    assert np.abs(diff - dissipation_matrix(p.n, GAMMA)).max() <= 1e-16


def test_channel_phase_sign():
    assert channel_phase(fig3(-1.0)) == pytest.approx(np.pi / 2)
    assert channel_phase(fig3(1.0)) == pytest.approx(-np.pi / 2)


def test_launch_state_shape():
    psi = launch_state(fig3(), "right")
    assert np.linalg.norm(psi) == pytest.approx(1.0)
    assert np.abs(psi[8]) ** 2 == pytest.approx(0.5)
    assert psi[9] == pytest.approx(1j / np.sqrt(2))
    with pytest.raises(ValueError):
        launch_state(fig3(), "middle")


def test_time_grid():
    t = time_grid(60.0)
    assert t.size == 601 and t[-1] == 60.0
    with pytest.raises(ValueError):
        time_grid(-1.0)


def test_requires_normalized_state():
    with pytest.raises(ValueError):
        evolve(fig3(), 2 * launch_state(fig3()), 1.0)


def test_backward_blocked():
    p = fig3()
    occ = evolve(p, launch_state(p, "right"), 60.0).unit_occupations()
    assert occ[:, 0, :].max() <= 1e-12


@pytest.mark.parametrize("phase", [0.0, 0.7, np.pi / 2, -np.pi / 2])
def test_backward_blocked_for_any_phase(phase):
    # units n-1 and n form a closed sector when launched from the right
    p = fig3()
    occ = evolve(p, launch_state(p, "right", phase), 60.0).unit_occupations()
    assert occ[:, :3, :].max() <= 1e-30


def test_counter_channel_stays_in_last_unit():
    p = fig3()
    occ = evolve(p, launch_state(p, "right", -np.pi / 2), 60.0).unit_occupations()
    assert occ[:, :4, :].max() <= 1e-30


def test_forward_equal_sublattices():
    p = fig3()
    traj = evolve(p, launch_state(p, "left"), 60.0)
    u = traj.unit_occupations()
    assert np.abs(u[..., 0] - u[..., 1]).max() <= 1e-9
    assert u[:, -1, :].sum(axis=1).max() > 1e-2


def test_forward_snapshot_moves_right():
    p = fig3()
    snap = snapshot(evolve(p, launch_state(p, "left"), 60.0), 60.0)
    pops = np.array([a + b for _, a, b in snap])
    com = (np.arange(1, 6) * pops).sum() / pops.sum()
    assert com > 3.0


def test_snapshot_initial_and_range():
    p = fig3()
    traj = evolve(p, launch_state(p, "left"), 5.0)
    s0 = snapshot(traj, 0.0)
    assert s0[0] == (1, pytest.approx(0.5), pytest.approx(0.5))
    assert all(a == 0 and b == 0 for _, a, b in s0[1:])
    with pytest.raises(ValueError):
        snapshot(traj, 6.0)


def test_unitary_when_lossless():
    p = ChainParams.reducible(5, 0.4, 0.0, 0.3)
    traj = evolve(p, launch_state(p, "left", phase=0.3), 60.0)
    assert np.abs(traj.total() - 1).max() <= 1e-9


@pytest.mark.parametrize("r", [-1.0, -0.5, 0.3])
def test_integrators_agree(r):
    p = fig3(r)
    psi = launch_state(p, "left")
    a = evolve(p, psi, 60.0)
    b = evolve(p, psi, 60.0, method="rk45")
    assert np.abs(a.amplitudes - b.amplitudes).max() <= 1e-8
    assert b.metadata["steps"] > 0


def test_integrator_with_ports():
    p = fig3(-0.6)
    psi = launch_state(p, "right")
    a = evolve(p, psi, 30.0, include_ports=True)
    b = evolve(p, psi, 30.0, method="rk45", include_ports=True)
    assert np.abs(a.amplitudes - b.amplitudes).max() <= 1e-8


def test_integrator_step_cap():
    p = fig3()
    h = dynamical_matrix(p)
    *_, status = _kernels.dopri5(h, launch_state(p), np.linspace(0, 60, 3), 1e-10, 5)
    assert status == _kernels.MAX_STEPS


def test_integrator_failure_raises(monkeypatch):
    def broken(*args, **kwargs):
        return None, 0, 0, _kernels.STEP_UNDERFLOW

    monkeypatch.setattr(_kernels, "dopri5", broken)
    with pytest.raises(ConvergenceError):
        evolve(fig3(), launch_state(fig3()), 1.0, method="rk45")


def test_unknown_method():
    with pytest.raises(ValueError):
        evolve(fig3(), launch_state(fig3()), 1.0, method="euler")


def test_mirror_symmetry():
    fwd = fig3(-1.0)
    bwd = fig3(1.0)
    a = evolve(fwd, launch_state(fwd, "left"), 60.0).unit_occupations().sum(axis=2)
    b = evolve(bwd, launch_state(bwd, "right"), 60.0).unit_occupations().sum(axis=2)
    assert np.abs(a - b[:, ::-1]).max() <= 1e-9


@given(r=st.floats(-2, 2), phase=st.floats(0, 2 * np.pi), side=st.sampled_from(["left", "right"]))
def test_monotone_decay(r, phase, side):
    p = ChainParams.from_ratios(4, r, -GAMMA, 0.5)
    total = evolve(p, launch_state(p, side, phase), 40.0).total()
    assert np.diff(total).max() <= 1e-10


def test_metadata_records_launch():
    p = fig3()
    traj = evolve(p, launch_state(p, "left"), 1.0)
    meta = traj.metadata
    assert meta["params"] == p.to_dict()
    assert meta["initial"][1] == [pytest.approx(0.0, abs=1e-16), pytest.approx(1 / np.sqrt(2))]
