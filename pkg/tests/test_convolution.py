import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlheat import convolution, kernels
from nlheat.errors import DomainTooSmallError, GridMismatchError
from nlheat.grid import GridFunction, integrate, make_grid, read_csv, sample


def _uniform_j(half_extent=4.0, spacing=0.01, rho=1.0):
    grid = make_grid(half_extent, spacing)
    return kernels.discretize(kernels.uniform(rho), grid)


def test_convolve_requires_common_grid():
    f = _uniform_j()
    g = _uniform_j(half_extent=5.0)
    with pytest.raises(GridMismatchError):
        convolution.convolve_direct(f, g)
    with pytest.raises(GridMismatchError):
        convolution.convolve_fft(f, g)


@pytest.mark.parametrize("conv", [convolution.convolve_direct, convolution.convolve_fft])
def test_delta_is_identity(conv):
    """h * delta at the center node convolves to the other factor."""
    j = _uniform_j()
    grid = j.grid
    delta = np.zeros(grid.point_count)
    delta[grid.center_index] = 1.0 / grid.spacing
    out = conv(GridFunction(grid, delta), j)
    assert np.allclose(out.values, j.values, rtol=0, atol=1e-13)


@pytest.mark.parametrize("conv", [convolution.convolve_direct, convolution.convolve_fft])
def test_uniform_self_convolution_is_hat(conv):
    # closed form: (J*J)(x) = (2 - |x|)/4 on [-2, 2] for rho = 1
    j = _uniform_j(spacing=0.01)
    out = conv(j, j)
    grid = j.grid
    peak = out.values[grid.center_index]
    assert abs(peak - 0.5) <= grid.spacing / 4
    for x in (0.5, -0.5, 1.0, 1.5):
        i = grid.center_index + round(x / grid.spacing)
        assert abs(out.values[i] - (2 - abs(x)) / 4) <= grid.spacing
    # exact zero beyond the summed supports
    far = np.abs(grid.nodes) > 2.0 + grid.spacing / 2
    assert np.all(out.values[far] == 0.0)


@pytest.mark.parametrize("conv", [convolution.convolve_direct, convolution.convolve_fft])
def test_mass_is_multiplicative(conv):
    j = _uniform_j(half_extent=6.0)
    jj = conv(j, j)
    assert abs(integrate(jj) - integrate(j) ** 2) < 1e-12


def test_fft_matches_direct_on_kernels():
    for spec in (kernels.uniform(1.0), kernels.gaussian(1.0), kernels.exponential_tail(2.0)):
        grid = make_grid(12.0, 0.02)
        j = kernels.discretize(spec, grid)
        a = convolution.convolve_direct(j, j).values
        b = convolution.convolve_fft(j, j).values
        scale = np.max(np.abs(a))
        assert np.max(np.abs(a - b)) <= 1e-12 * scale


def test_fft_matches_direct_on_random_data():
    rng = np.random.default_rng(7)
    grid = make_grid(2.555, 0.01)
    for _ in range(3):
        f = GridFunction(grid, rng.standard_normal(grid.point_count))
        g = GridFunction(grid, rng.standard_normal(grid.point_count))
        a = convolution.convolve_direct(f, g).values
        b = convolution.convolve_fft(f, g).values
        assert np.max(np.abs(a - b)) <= 1e-10 * max(1.0, np.max(np.abs(a)))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 999))
def test_commutativity(seed):
    rng = np.random.default_rng(seed)
    grid = make_grid(1.0, 0.05)
    f = GridFunction(grid, rng.uniform(0, 1, grid.point_count))
    g = GridFunction(grid, rng.uniform(0, 1, grid.point_count))
    ab = convolution.convolve_fft(f, g).values
    ba = convolution.convolve_fft(g, f).values
    assert np.max(np.abs(ab - ba)) <= 1e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 999), st.floats(-2.0, 2.0))
def test_linearity_in_first_argument(seed, c):
    rng = np.random.default_rng(seed)
    grid = make_grid(1.0, 0.05)
    f1 = GridFunction(grid, rng.uniform(-1, 1, grid.point_count))
    f2 = GridFunction(grid, rng.uniform(-1, 1, grid.point_count))
    g = GridFunction(grid, rng.uniform(-1, 1, grid.point_count))
    lhs = convolution.convolve_fft(
        GridFunction(grid, f1.values + c * f2.values), g
    ).values
    rhs = (
        convolution.convolve_fft(f1, g).values
        + c * convolution.convolve_fft(f2, g).values
    )
    assert np.max(np.abs(lhs - rhs)) <= 1e-11


def test_even_inputs_give_even_output():
    j = _uniform_j()
    out = convolution.convolve_fft(j, j).values
    assert np.max(np.abs(out - out[::-1])) <= 1e-15


def test_support_radius():
    j = _uniform_j(half_extent=4.0, spacing=0.01, rho=1.0)
    assert convolution.support_radius(j, 1e-14) == pytest.approx(1.0)
    zero = GridFunction(j.grid, np.zeros(j.grid.point_count))
    assert convolution.support_radius(zero, 1e-14) == 0.0
    with pytest.raises(ValueError):
        convolution.support_radius(j, 0.0)


class TestIterate:
    def test_first_terms(self):
        j = _uniform_j(half_extent=8.0)
        it = convolution.iterate(j, 3)
        grid = j.grid
        assert it.order == 3
        # J*^0 is the discrete delta
        d = it.term(0).values
        assert d[grid.center_index] == 1.0 / grid.spacing
        assert np.count_nonzero(d) == 1
        # J*^1 is J itself, bitwise
        assert np.array_equal(it.term(1).values, j.values)

    def test_masses_stay_near_one(self):
        j = _uniform_j(half_extent=25.0, spacing=0.05)
        it = convolution.iterate(j, 20)
        for n, mass in enumerate(it.masses):
            assert abs(mass - 1.0) <= 1e-11, f"n={n}: mass={mass}"
            assert it.truncation_deficit(n) <= 1e-11

    def test_support_additivity_exact(self):
        """supp J*^n = [-n rho, n rho] for the uniform kernel.

        Measured with the direct route at a threshold tiny enough that only
        exact zeros fall below it; FFT results would blur the edge.
        """
        rho = 1.0
        j = _uniform_j(half_extent=14.0, spacing=0.05, rho=rho)
        it = convolution.iterate(j, 12, method="direct")
        h = j.grid.spacing
        for n in range(1, 13):
            r = convolution.support_radius(it.term(n), 1e-300)
            assert abs(r - n * rho) <= h + 1e-12, f"n={n}: radius={r}"

    def test_gaussian_power_closed_form(self):
        # J*^n for a gaussian kernel with parameter g is gaussian with
        # variance n/(2 g^2): sqrt(g^2/(n pi)) exp(-g^2 x^2 / n)
        g = 1.0
        grid = make_grid(15.0, 0.01)
        j = kernels.discretize(kernels.gaussian(g), grid)
        it = convolution.iterate(j, 5)
        n = 5
        xs = np.array([0.0, 0.5, 1.0, 2.0, 4.0])
        expected = math.sqrt(g * g / (n * math.pi)) * np.exp(-g * g * xs * xs / n)
        idx = grid.center_index + np.round(xs / grid.spacing).astype(int)
        got = it.term(n).values[idx]
        assert np.max(np.abs(got / expected - 1.0)) < 1e-9

    def test_methods_agree(self):
        j = _uniform_j(half_extent=10.0, spacing=0.05)
        a = convolution.iterate(j, 6, method="fft")
        b = convolution.iterate(j, 6, method="direct")
        for n in range(7):
            diff = np.max(np.abs(a.term(n).values - b.term(n).values))
            assert diff <= 1e-12 * max(1.0, np.max(a.term(n).values))

    def test_powers_nonnegative_and_even(self):
        j = _uniform_j(half_extent=10.0, spacing=0.05)
        it = convolution.iterate(j, 8)
        for t in it.terms:
            assert np.all(t.values >= 0.0)
            assert np.array_equal(t.values, t.values[::-1])

    def test_domain_too_small(self):
        j = _uniform_j(half_extent=3.0, spacing=0.05)
        with pytest.raises(DomainTooSmallError) as exc:
            convolution.iterate(j, 30)
        assert exc.value.min_half_extent > 3.0

    def test_bad_arguments(self):
        j = _uniform_j()
        with pytest.raises(ValueError):
            convolution.iterate(j, -1)
        with pytest.raises(ValueError):
            convolution.iterate(j, 2, method="auto")

    def test_dump_round_trip(self, tmp_path):
        j = _uniform_j(half_extent=5.0, spacing=0.1)
        it = convolution.iterate(j, 3)
        index_path = it.dump(tmp_path / "powers")
        index = json.loads(index_path.read_text())
        assert index["method"] == "fft"
        assert len(index["terms"]) == 4
        entry = index["terms"][2]
        back = read_csv(index_path.parent / entry["file"])
        assert np.array_equal(back.values, it.term(2).values)
        assert entry["mass"] == pytest.approx(it.masses[2])
