import pytest
from hypothesis import given, strategies as st

from cmp3d.perf_model import WorkloadSpec, perf, phase_plan, speedup
from cmp3d.power_model import DomainError


@pytest.mark.parametrize("r, expected", [(1, 1.0), (256, 16.0), (64, 8.0)])
def test_perf(r, expected):
    assert perf(r) == expected


def test_perf_rejects_small_core():
    with pytest.raises(DomainError):
        perf(0.5)


@pytest.mark.parametrize("f, r, n, serial, parallel", [
    (1.0, 1, 256, 0.0, 1 / 256),
    (0.0, 256, 1, 1 / 16, 0.0),
    (0.5, 256, 4, 0.03125, 0.0078125),
])
def test_phase_plan(f, r, n, serial, parallel):
    plan = phase_plan(WorkloadSpec(f), r, n)
    assert plan.serial_duration == pytest.approx(serial, abs=1e-15)
    assert plan.parallel_duration == pytest.approx(parallel, abs=1e-15)
    assert plan.n_cores_total == n


def test_phase_plan_scales_with_t_base():
    plan = phase_plan(WorkloadSpec(0.5, t_base=20.0), 4, 2)
    assert plan.serial_duration == pytest.approx(5.0)
    assert plan.parallel_duration == pytest.approx(2.5)


@pytest.mark.parametrize("f, r, n, expected", [(1.0, 1, 256, 256.0), (0.0, 256, 7, 16.0), (1.0, 256, 4, 64.0)])
def test_speedup(f, r, n, expected):
    assert speedup(WorkloadSpec(f), r, n) == pytest.approx(expected, rel=1e-14)


def test_workload_invariants():
    with pytest.raises(DomainError):
        WorkloadSpec(f=1.1)
    with pytest.raises(DomainError):
        WorkloadSpec(t_base=0)
    with pytest.raises(DomainError):
        phase_plan(WorkloadSpec(), 1, 0)


fs = st.floats(0, 1)
rs = st.floats(1, 256)
ns = st.integers(1, 4096)


@given(fs, fs, rs, ns)
def test_speedup_nondecreasing_in_f(f1, f2, r, n):
    lo, hi = sorted((f1, f2))
    assert speedup(WorkloadSpec(hi), r, n) >= speedup(WorkloadSpec(lo), r, n) * (1 - 1e-12)


@given(fs, rs, ns, ns)
def test_speedup_nondecreasing_in_n(f, r, n1, n2):
    lo, hi = sorted((n1, n2))
    assert speedup(WorkloadSpec(f), r, hi) >= speedup(WorkloadSpec(f), r, lo) * (1 - 1e-12)


@given(fs, st.floats(0.1, 100))
def test_identity_machine(f, t_base):
    plan = phase_plan(WorkloadSpec(f, t_base), 1, 1)
    assert plan.serial_duration + plan.parallel_duration == pytest.approx(t_base, rel=1e-12)


@given(rs, rs)
def test_perf_multiplicative(a, b):
    assert perf(a * b) == pytest.approx(perf(a) * perf(b), rel=1e-12)


@given(fs, rs, ns)
def test_phase_durations_zero_iff_endpoint(f, r, n):
    plan = phase_plan(WorkloadSpec(f), r, n)
    assert (plan.serial_duration == 0) == (f == 1)
    assert (plan.parallel_duration == 0) == (f == 0)
