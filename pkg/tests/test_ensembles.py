import itertools
import math

import numpy as np
import pytest

from derivzeros.ensembles import (Augmented, CoulombGas, FixedRoots, IidZeros, McmcConfig,
                                  PairedChoice, Perturbed, RemoveOne, coulomb_energy,
                                  coulomb_sweep, ensemble_from_dict, log_cesaro_stat, run_chain)
from derivzeros.errors import CoincidentPoints, InvalidSpec
from derivzeros.measures import (AtomMixture, ComplexGaussian, CustomGrid, SequenceSpec,
                                 UniformAnnulus, UniformCircle, UniformDisk, measure_from_dict,
                                 sequence_from_dict)
from derivzeros.pointsio import load_points, save_points
from derivzeros.potential import equilibrium_radial, ks_radial
from derivzeros.radial import CustomRadial, MittagLeffler
from derivzeros.rng import child_seed, stream

DISK = UniformDisk(1.0)
GINIBRE = MittagLeffler(1.0, 0.0)


def strat(seed=0, measure=DISK):
    return SequenceSpec("stratified", measure, seed)


# ---------------------------------------------------------------- rng and measures

def test_streams_are_reproducible_and_distinct():
    assert np.array_equal(stream(1, 2).random(5), stream(1, 2).random(5))
    assert not np.array_equal(stream(1, 2).random(5), stream(2, 1).random(5))
    assert child_seed(3, 4) == child_seed(3, 4) != child_seed(4, 3)


@pytest.mark.parametrize("mu, check", [
    (UniformDisk(2.0), lambda z: np.abs(z).max() <= 2.0),
    (UniformCircle(1.5), lambda z: np.allclose(np.abs(z), 1.5, atol=1e-15)),
    (UniformAnnulus(0.5, 1.0), lambda z: (np.abs(z).min() >= 0.5 - 1e-15) & (np.abs(z).max() <= 1.0)),
    (ComplexGaussian(2.0), lambda z: abs(np.mean(np.abs(z) ** 2) - 4.0) < 0.2),
    (CustomGrid((0, 1), (0, 2), np.array([[1.0, 0.0]])),
     lambda z: (z.real.min() >= 0) & (z.real.max() <= 1) & (z.imag.max() <= 1)),
])
def test_measure_supports(mu, check):
    z = mu.sample(stream(9), 5000)
    assert z.shape == (5000,)
    assert check(z)


def test_uniform_disk_radial_law():
    z = DISK.sample(stream(1), 20000)
    # P(|z| <= 1/2) = 1/4
    assert abs(np.mean(np.abs(z) <= 0.5) - 0.25) < 0.01


def test_atom_mixture_frequencies():
    mu = AtomMixture(atoms=(0, 1j), weights=(0.25, 0.25), continuous=UniformDisk(5.0),
                     continuous_weight=0.5)
    z = mu.sample(stream(2), 40000)
    assert abs(np.mean(z == 0) - 0.25) < 0.01
    assert abs(np.mean(z == 1j) - 0.25) < 0.01
    with pytest.raises(InvalidSpec):
        AtomMixture(atoms=(0,), weights=(0.5,))


def test_measure_round_trip():
    for mu in (DISK, UniformCircle(2.0), ComplexGaussian(0.5), UniformAnnulus(0.1, 0.3),
               AtomMixture((1, 2j), (0.5, 0.5)), CustomGrid((0, 1), (0, 1), np.ones((2, 3)))):
        back = measure_from_dict(mu.to_dict())
        u = stream(4).random((10, 2))
        assert np.array_equal(back.transform(u), mu.transform(u))


def test_invalid_measures():
    with pytest.raises(InvalidSpec):
        UniformDisk(0.0)
    with pytest.raises(InvalidSpec):
        UniformAnnulus(1.0, 0.5)
    with pytest.raises(InvalidSpec):
        CustomGrid(values=np.array([[-1.0]]))
    with pytest.raises(InvalidSpec):
        measure_from_dict({"type": "nope"})


# ---------------------------------------------------------------- sequences

def test_sequences_are_frozen():
    for kind in ("stratified", "iid"):
        s = SequenceSpec(kind, DISK, seed=5)
        assert np.array_equal(s.row(100), s.row(100))
        # prefix property for the non-triangular sequence
        assert np.array_equal(s.row(100)[:40], s.row(40))
        assert np.array_equal(sequence_from_dict(s.to_dict()).row(50), s.row(50))
    tri = SequenceSpec("iid", DISK, seed=5, triangular=True)
    assert not np.array_equal(tri.row(100)[:40], tri.row(40))


def test_stratified_sequence_is_equidistributed():
    z = strat(3).row(4096)
    r2 = np.sort(np.abs(z) ** 2)
    # |z|^2 uniform on [0,1]; low discrepancy beats the i.i.d. rate 1/sqrt(n)
    ks = np.max(np.abs(r2 - (np.arange(1, r2.size + 1) - 0.5) / r2.size))
    assert ks < 0.005


def test_explicit_sequence():
    s = SequenceSpec("explicit", points=(1, 2, 3))
    assert np.array_equal(s.row(2), [1, 2])
    with pytest.raises(InvalidSpec):
        s.row(4)


# ---------------------------------------------------------------- models

def test_iid_on_circle_has_unit_moduli():
    p = IidZeros(UniformCircle(1.0), 4).sample(123)
    assert p.degree == 4
    assert np.allclose(np.abs(p.roots), 1.0, atol=1e-15)


@pytest.mark.parametrize("spec", [
    IidZeros(DISK, 50),
    PairedChoice(strat(1), strat(2), 50),
    Perturbed(strat(3), ComplexGaussian(0.1), 50),
    RemoveOne(strat(4), 50),
    Augmented(strat(5), 50, 3, DISK),
    CoulombGas(GINIBRE, 1.0, 20, McmcConfig(sweeps=20, burn_in=10)),
])
def test_determinism_and_degree(spec):
    a, b = spec.sample(77), spec.sample(77)
    assert np.array_equal(a.roots, b.roots)
    assert a.degree == spec.degree
    assert not np.array_equal(a.roots, spec.sample(78).roots)
    assert ensemble_from_dict(spec.to_dict()).sample(77).roots.tobytes() == a.roots.tobytes()


def test_remove_one_drops_exactly_one():
    n = 12
    spec = RemoveOne(SequenceSpec("explicit", points=tuple(range(n + 1))), n)
    for seed in range(20):
        out = sorted(spec.sample(seed).roots.real.astype(int).tolist())
        assert len(out) == n
        missing = set(range(n + 1)) - set(out)
        assert len(missing) == 1
    assert spec.regime_note() is not None
    assert RemoveOne(strat(), n).regime_note() is None


def test_remove_one_uniform_index():
    n = 9
    spec = RemoveOne(SequenceSpec("explicit", points=tuple(range(n + 1))), n)
    counts = np.zeros(n + 1)
    for seed in range(10000):
        counts[list(set(range(n + 1)) - set(spec.sample(seed).roots.real.astype(int)))[0]] += 1
    assert np.all(np.abs(counts / 10000 - 0.1) <= 0.01)


def test_paired_equal_sequences_give_a():
    a = strat(8)
    spec = PairedChoice(a, a, 30)
    for seed in range(5):
        assert np.array_equal(spec.sample(seed).roots, a.row(30))


def test_paired_marginals():
    spec = PairedChoice(strat(1), strat(2), 16)
    a, _ = spec.pairs()
    hits = np.zeros(16)
    for seed in range(10000):
        hits += spec.sample(seed).roots == a
    assert np.all(np.abs(hits / 10000 - 0.5) <= 0.02)


def test_paired_separation_enforced():
    pts = tuple(np.linspace(0, 1, 40))
    a = SequenceSpec("iid", DISK, seed=1)
    spec = PairedChoice(a, a, 40)
    total, equal = spec.separation_stat()
    assert (total, equal) == (0.0, 40)
    b = SequenceSpec("explicit", points=tuple(np.array(pts) + 1e-30))
    spec = PairedChoice(SequenceSpec("explicit", points=pts), b, 40)
    total, _ = spec.separation_stat()
    assert total > 0    # explicit lists are diagnosed, not changed
    # generated pairs never get closer than exp(-sqrt(n))
    near = PairedChoice(SequenceSpec("iid", DISK, seed=1), SequenceSpec("iid", UniformDisk(1e-300), seed=2), 40)
    a_row, b_row = near.pairs()
    d = np.abs(a_row - b_row)
    assert d.min() >= math.exp(-math.sqrt(40)) * (1 - 1e-12)


def test_perturbed_noise_is_centered_with_scale():
    spec = Perturbed(strat(3), ComplexGaussian(1.0), 8, scale=2.0, exponent=0.5)
    base = spec.z_seq.row(8)
    noise = np.array([(base - spec.sample(s).roots) / spec.sigmas() for s in range(4000)])
    assert np.all(np.abs(noise.mean(axis=0)) < 0.05)
    assert np.allclose(np.mean(np.abs(noise) ** 2, axis=0), 1.0, atol=0.08)
    assert np.all(np.diff(spec.sigmas()) < 0)


def test_invalid_ensembles():
    with pytest.raises(InvalidSpec):
        Perturbed(strat(), AtomMixture((1,), (1.0,)), 10)
    with pytest.raises(InvalidSpec):
        Perturbed(strat(), ComplexGaussian(1.0), 10, exponent=0.0)
    with pytest.raises(InvalidSpec):
        Augmented(strat(), 10, 2, AtomMixture((1,), (1.0,)))
    with pytest.raises(InvalidSpec):
        IidZeros(DISK, 1)
    with pytest.raises(InvalidSpec):
        CoulombGas(GINIBRE, 0.0, 10)
    with pytest.raises(InvalidSpec):
        ensemble_from_dict({"type": "martian"})


def test_fixed_roots_default_to_roots_of_unity():
    p = FixedRoots(6).sample(0)
    assert np.allclose(p.roots ** 6, 1)
    assert isinstance(FixedRoots(6).target(), UniformCircle)


def test_log_cesaro_examples():
    assert log_cesaro_stat(DISK.sample(stream(1), 100)) == 0.0
    assert log_cesaro_stat([math.e, math.e]) == pytest.approx(1.0)
    assert log_cesaro_stat([math.e ** 2, 1]) == pytest.approx(1.0)


def test_points_file_round_trip(tmp_path):
    z = DISK.sample(stream(5), 17)
    w = np.full(17, 1 / 17)
    path = save_points(tmp_path / "pts.txt", z, w)
    z2, w2 = load_points(path)
    assert np.array_equal(z, z2) and np.array_equal(w, w2)
    save_points(tmp_path / "plain.txt", z)
    z3, w3 = load_points(tmp_path / "plain.txt")
    assert np.array_equal(z, z3) and w3 is None


# ---------------------------------------------------------------- Coulomb energy and sweeps

def test_coulomb_energy_examples():
    assert coulomb_energy([0, 1], GINIBRE, 2) == pytest.approx(2.0, abs=1e-15)
    assert coulomb_energy([0, 2], GINIBRE, 2) == pytest.approx(8 - 2 * math.log(2), abs=1e-14)
    z = [1, -1, 1j]
    brute = 0.0
    for a, b in itertools.combinations(z, 2):
        brute += 2 * math.log(1 / abs(a - b))
    brute += 3 * sum(abs(a) ** 2 for a in z)
    assert coulomb_energy(z, GINIBRE, 3) == pytest.approx(brute, abs=1e-14)
    with pytest.raises(CoincidentPoints):
        coulomb_energy([1, 1], GINIBRE, 2)


class ScriptedRng:
    """Stands in for a Generator: fixed proposal displacements and uniforms."""

    def __init__(self, normals, uniforms):
        self.normals = np.asarray(normals, float)
        self.uniforms = np.asarray(uniforms, float)

    def standard_normal(self, shape):
        return self.normals.reshape(shape).copy()

    def random(self, n):
        return self.uniforms[:n].copy()


def _accept_prob(state, move, potential, beta, step):
    """Fraction of a uniform grid for which particle 0's proposal is accepted."""
    grid = (np.arange(2000) + 0.5) / 2000
    hits = 0
    for u in grid:
        nrm = np.zeros((2, 2))
        nrm[0] = np.array([move.real, move.imag]) * math.sqrt(2.0) / step
        res = coulomb_sweep(state, potential, beta, step, ScriptedRng(nrm, [u, 0.5]))
        hits += res.points[0] != state[0]
    return hits / grid.size


@pytest.mark.parametrize("potential", [
    GINIBRE,
    CustomRadial(lambda r: r ** 2, lambda r: 2 * r, name="quadratic"),
])
def test_detailed_balance_two_particles(potential):
    beta, step = 1.0, 0.6
    grid = [0.3 + 0.2j, -0.4 + 0.1j, 0.5j, 0.7 - 0.3j]
    other = -0.2 - 0.6j
    for s0, t0 in itertools.permutations(grid, 2):
        s = np.array([s0, other])
        t = np.array([t0, other])
        pi_s = math.exp(-beta * coulomb_energy(s, potential, 2))
        pi_t = math.exp(-beta * coulomb_energy(t, potential, 2))
        # Gaussian proposal is symmetric, so q cancels
        lhs = pi_s * _accept_prob(s, t0 - s0, potential, beta, step)
        rhs = pi_t * _accept_prob(t, s0 - t0, potential, beta, step)
        assert lhs == pytest.approx(rhs, rel=2e-3, abs=1e-12)


def test_incremental_energy_matches_recomputation():
    rng = stream(5)
    z = DISK.sample(rng, 40)
    for pot in (GINIBRE, MittagLeffler(2.0, 0.5),
                CustomRadial(lambda r: r ** 4, lambda r: 4 * r ** 3, name="quartic")):
        h0 = coulomb_energy(z, pot, 40)
        res = coulomb_sweep(z, pot, 1.0, 0.1, rng)
        assert coulomb_energy(res.points, pot, 40) - h0 == pytest.approx(res.delta_energy, abs=1e-9)
    chain = run_chain(GINIBRE, 1.0, 32, McmcConfig(sweeps=200, burn_in=50), stream(6))
    assert chain.energy_drift < 1e-9


def test_cold_chain_rejects_uphill_moves():
    rng = stream(7)
    accepted = 0
    for _ in range(10000):
        res = coulomb_sweep(np.array([0j]), GINIBRE, 1e6, 0.1, rng, n_scale=1)
        accepted += res.points[0] != 0
    assert accepted / 10000 < 1e-3


def test_zero_step_keeps_state():
    z = DISK.sample(stream(8), 10)
    res = coulomb_sweep(z, GINIBRE, 1.0, 0.0, stream(9))
    assert res.acceptance == 1.0
    assert np.array_equal(res.points, z)


def test_small_ginibre_chain_matches_disk_law():
    spec = CoulombGas(GINIBRE, 1.0, 64, McmcConfig(sweeps=500, burn_in=200, thin=5))
    chain = run_chain(spec.potential, 1.0, 64, spec.mcmc, stream(0xC0, 1))
    pooled = np.concatenate(chain.snapshots)
    assert ks_radial(pooled, equilibrium_radial(GINIBRE)) <= 0.08
    assert 0.15 < np.mean(chain.acceptance[200:]) < 0.45
