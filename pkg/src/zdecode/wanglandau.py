"""Wang-Landau density of states for a torus RBIM instance.

Energies exclude the constant offsets ``K_e``. Uniform +-1 couplings give
integer energies and an exact discrete spectrum; general couplings are
binned with ``bin_width = (E_max - E_min) / 2048``.

Moves are uniform single-spin flips accepted with ``min(1, g(E)/g(E'))``.
The modification factor starts at ``ln f = 1`` and is halved each time the
histogram is flat (``min h >= alpha * mean h``) until ``ln f <= ln_f_stop``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .noise import as_generator
from .pfaffian import LogZ
from .statmech import RbimInstance, edge_endpoints

DEFAULT_ALPHA = 0.8
DEFAULT_LN_F_STOP = 1e-8
DEFAULT_SWEEPS = 10_000
DEFAULT_BINS = 2048
# couplings are held as integers in units of 2^-40 so that a configuration
# always maps to the same energy, whatever path the walk took
_SCALE = float(1 << 40)


class SpectrumIncomplete(RuntimeError):
    """Raised when the walk reaches an energy outside the given spectrum."""

    def __init__(self, energy: float):
        super().__init__(f"energy {energy!r} is outside the spectrum")
        self.energy = energy


@dataclass(frozen=True)
class EnergySpectrum:
    bins: np.ndarray
    bin_width: float

    @property
    def exact(self) -> bool:
        return self.bin_width == 0.0

    def __len__(self) -> int:
        return len(self.bins)


@dataclass(frozen=True)
class DensityOfStates:
    log_g: np.ndarray
    spectrum: EnergySpectrum
    final_log_f: float
    bin_min_energy: np.ndarray

    def as_dict(self) -> dict:
        return {float(e): float(v) for e, v in zip(self.spectrum.bins, self.log_g)}


def _neighbours(inst: RbimInstance):
    L = inst.L
    a, b = edge_endpoints(L)
    n = L * L
    nbr = np.zeros((n, 4), dtype=np.int64)
    cpl = np.zeros((n, 4), dtype=np.int64)
    fill = np.zeros(n, dtype=np.int64)
    J = np.rint(inst.couplings.astype(np.float64) * _SCALE).astype(np.int64)
    for q in range(len(a)):
        for u, v in ((a[q], b[q]), (b[q], a[q])):
            nbr[u, fill[u]] = v
            cpl[u, fill[u]] = J[q]
            fill[u] += 1
    return nbr, cpl


@numba.njit(cache=True)
def _energy(spins, nbr, cpl):
    e = 0
    for i in range(spins.shape[0]):
        for k in range(4):
            e -= cpl[i, k] * spins[i] * spins[nbr[i, k]]
    return e // 2


@numba.njit(cache=True)
def _bin_index(Ei, lo, width, exact, table):
    E = Ei / 1099511627776.0
    if exact:
        k = int(math.floor(E - lo + 0.5))
    else:
        k = int(math.floor((E - lo) / width))
    if k < 0 or k >= table.shape[0]:
        return -2
    return table[k]


@numba.njit(cache=True)
def _explore(spins, nbr, cpl, lo, width, exact, table_size, steps, seed):
    # WL walk over a provisional grid; unvisited cells count as g = 0
    np.random.seed(seed)
    n = spins.shape[0]
    log_g = np.zeros(table_size)
    seen = np.zeros(table_size, dtype=np.bool_)
    emin = np.full(table_size, np.inf)
    Ei = _energy(spins, nbr, cpl)
    E = Ei / 1099511627776.0
    if exact:
        cur = int(math.floor(E - lo + 0.5))
    else:
        cur = int(math.floor((E - lo) / width))
    seen[cur] = True
    emin[cur] = E
    for t in range(steps):
        i = np.random.randint(n)
        h = 0
        for k in range(4):
            h += cpl[i, k] * spins[nbr[i, k]]
        Ei2 = Ei + 2 * spins[i] * h
        E2 = Ei2 / 1099511627776.0
        if exact:
            nxt = int(math.floor(E2 - lo + 0.5))
        else:
            nxt = int(math.floor((E2 - lo) / width))
        if nxt < 0:
            nxt = 0
        if nxt >= table_size:
            nxt = table_size - 1
        if (not seen[nxt]) or np.random.random() < math.exp(log_g[cur] - log_g[nxt]):
            spins[i] = -spins[i]
            Ei = Ei2
            E = E2
            cur = nxt
            seen[cur] = True
            if E < emin[cur]:
                emin[cur] = E
        log_g[cur] += 0.5
    return seen, emin


@numba.njit(cache=True)
def _wl_kernel(spins, nbr, cpl, lo, width, exact, table, nb, alpha, ln_f_stop, n_steps,
               max_iterations, seed):
    np.random.seed(seed)
    n = spins.shape[0]
    log_g = np.zeros(nb)
    hist = np.zeros(nb)
    emin = np.full(nb, np.inf)
    Ei = _energy(spins, nbr, cpl)
    E = Ei / 1099511627776.0
    cur = _bin_index(Ei, lo, width, exact, table)
    if cur < 0:
        return log_g, emin, 0.0, E, 1
    if E < emin[cur]:
        emin[cur] = E
    ln_f = 1.0
    iterations = 0
    while ln_f > ln_f_stop:
        for b in range(nb):
            hist[b] = 0.0
        while True:
            for t in range(n_steps):
                i = np.random.randint(n)
                h = 0
                for k in range(4):
                    h += cpl[i, k] * spins[nbr[i, k]]
                Ei2 = Ei + 2 * spins[i] * h
                nxt = _bin_index(Ei2, lo, width, exact, table)
                if nxt < 0:
                    return log_g, emin, ln_f, Ei2 / 1099511627776.0, 1
                if log_g[cur] >= log_g[nxt] or np.random.random() < math.exp(log_g[cur] - log_g[nxt]):
                    spins[i] = -spins[i]
                    Ei = Ei2
                    E = Ei / 1099511627776.0
                    cur = nxt
                    if E < emin[cur]:
                        emin[cur] = E
                log_g[cur] += ln_f
                hist[cur] += 1.0
            iterations += 1
            if iterations > max_iterations:
                return log_g, emin, ln_f, E, 2
            if hist.min() >= alpha * hist.mean():
                break
        ln_f *= 0.5
    return log_g, emin, ln_f, E, 0


def _seed(rng) -> int:
    return int(as_generator(rng).integers(0, 2**31 - 1))


def _energy_bound(inst: RbimInstance) -> float:
    return float(np.sum(np.abs(inst.couplings))) + 1e-9


def estimate_spectrum(inst: RbimInstance, steps: int = 100_000, rng=None,
                      n_bins: int = DEFAULT_BINS) -> EnergySpectrum:
    """Energies reachable by a Wang-Landau random walk of ``steps`` moves."""
    if steps < 10_000:
        raise ValueError("steps must be at least 1e4")
    nbr, cpl = _neighbours(inst)
    bound = _energy_bound(inst)
    spins = np.ones(inst.n_spins, dtype=np.int64)
    if inst.uniform:
        lo = -math.ceil(bound)
        size = 2 * int(math.ceil(bound)) + 1
        seen, _ = _explore(spins, nbr, cpl, float(lo), 1.0, True, size, steps, _seed(rng))
        bins = (np.flatnonzero(seen) + lo).astype(float)
        return EnergySpectrum(bins, 0.0)
    # first pass: locate the visited range on a fine grid
    fine = 1 << 16
    w0 = 2 * bound / (fine - 1) if bound > 0 else 1.0
    gen = as_generator(rng)
    seen, emin = _explore(spins, nbr, cpl, -bound, w0, False, fine, steps // 2, _seed(gen))
    e_lo = float(np.min(emin[seen]))
    e_hi = -bound + (np.flatnonzero(seen).max() + 1) * w0
    width = (e_hi - e_lo) / n_bins if e_hi > e_lo else 1.0
    # second pass on the final grid, anchored at e_lo, with room on both sides
    lo = e_lo - math.ceil((e_lo + bound) / width) * width
    size = int(math.ceil(2 * bound / width)) + 2
    spins = np.ones(inst.n_spins, dtype=np.int64)
    seen2, _ = _explore(spins, nbr, cpl, lo, width, False, size, steps - steps // 2, _seed(gen))
    cells = np.flatnonzero(seen2)
    return EnergySpectrum(lo + (cells + 0.5) * width, float(width))


def _table(spectrum: EnergySpectrum, bound: float):
    if spectrum.exact:
        lo = -math.ceil(bound)
        size = 2 * int(math.ceil(bound)) + 1
        cells = np.rint(spectrum.bins - lo).astype(np.int64)
        width = 1.0
    else:
        width = spectrum.bin_width
        edge = float(spectrum.bins[0]) - 0.5 * width
        lo = edge - math.ceil((edge + bound) / width) * width
        size = int(math.ceil(2 * bound / width)) + 2
        cells = np.rint((spectrum.bins - lo) / width - 0.5).astype(np.int64)
    table = np.full(size, -1, dtype=np.int64)
    table[cells] = np.arange(len(cells))
    return float(lo), width, table


def wang_landau(inst: RbimInstance, spectrum: EnergySpectrum, alpha: float = DEFAULT_ALPHA,
                ln_f_stop: float = DEFAULT_LN_F_STOP, N: int = DEFAULT_SWEEPS, rng=None,
                max_iterations: int = 10_000) -> DensityOfStates:
    """Single-walker Wang-Landau run; raises SpectrumIncomplete on a
    proposal outside ``spectrum``.

    ``N`` counts sweeps (``n_spins`` proposals each) between flatness checks.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if ln_f_stop <= 0 or N <= 0:
        raise ValueError("ln_f_stop and N must be positive")
    nbr, cpl = _neighbours(inst)
    lo, width, table = _table(spectrum, _energy_bound(inst))
    spins = np.ones(inst.n_spins, dtype=np.int64)
    log_g, emin, ln_f, E, status = _wl_kernel(
        spins, nbr, cpl, lo, width, spectrum.exact, table, len(spectrum), float(alpha),
        float(ln_f_stop), int(N) * inst.n_spins, int(max_iterations), _seed(rng))
    if status == 1:
        raise SpectrumIncomplete(float(E))
    if status == 2:
        raise RuntimeError("Wang-Landau did not reach a flat histogram within max_iterations")
    return rescale_dos(DensityOfStates(log_g, spectrum, float(ln_f), emin), inst.n_spins)


def _extend(spectrum: EnergySpectrum, energy: float) -> EnergySpectrum:
    if spectrum.exact:
        new = np.union1d(spectrum.bins, [float(round(energy))])
    else:
        w = spectrum.bin_width
        edge = spectrum.bins[0] - 0.5 * w
        k = math.floor((energy - edge) / w)
        new = np.union1d(spectrum.bins, [edge + (k + 0.5) * w])
    return EnergySpectrum(new, spectrum.bin_width)


def density_of_states(inst: RbimInstance, rng, alpha: float = DEFAULT_ALPHA,
                      ln_f_stop: float = DEFAULT_LN_F_STOP, N: int = DEFAULT_SWEEPS,
                      spectrum_steps: int = 100_000) -> DensityOfStates:
    """Estimate the spectrum, then run Wang-Landau, extending and
    restarting whenever the spectrum turns out incomplete."""
    gen = as_generator(rng)
    spectrum = estimate_spectrum(inst, spectrum_steps, gen)
    for _ in range(1000):
        try:
            return wang_landau(inst, spectrum, alpha, ln_f_stop, N, gen)
        except SpectrumIncomplete as exc:
            spectrum = _extend(spectrum, exc.energy)
    raise RuntimeError("spectrum kept growing")


def rescale_dos(dos: DensityOfStates, n_spins: int) -> DensityOfStates:
    """Shift ``log_g`` so that the degeneracies sum to ``2**n_spins``."""
    lg = np.asarray(dos.log_g, dtype=float)
    if lg.size == 0:
        raise ValueError("empty density of states")
    top = lg.max()
    total = top + math.log(np.exp(lg - top).sum())
    return DensityOfStates(lg - total + n_spins * math.log(2.0), dos.spectrum, dos.final_log_f,
                           dos.bin_min_energy)


def ground_state(dos: DensityOfStates) -> tuple[float, float]:
    """(E_min, log g(E_min)) of the lowest occupied bin."""
    e = dos.bin_min_energy[0]
    if not np.isfinite(e):
        e = float(dos.spectrum.bins[0])
    return float(e), float(dos.log_g[0])


def partition_from_dos(dos: DensityOfStates, T: float, energy_offset: float = 0.0) -> LogZ:
    """``log sum_E g(E) exp(-(E + offset)/T)``.

    At ``T = 0`` the Boltzmann factor of the ground state is divided out and
    the result is ``log g(E_min)``, which is what zero-temperature class
    comparisons use after ordering by ``E_min``.
    """
    if T < 0:
        raise ValueError("temperature must be nonnegative")
    if T == 0:
        return LogZ(ground_state(dos)[1], 53)
    x = dos.log_g - (dos.spectrum.bins + energy_offset) / T
    top = x.max()
    return LogZ(float(top + math.log(np.exp(x - top).sum())), 53)


def zero_temperature_key(dos: DensityOfStates, digits: int = 6) -> tuple:
    """Sort key (higher is better): ``(-E_min, n_max)``.

    Ground states pair up under the global spin flip, so the number of
    distinct minimum-energy errors is ``g(E_min) / 2``.
    """
    e, lg = ground_state(dos)
    return (-round(e, digits), max(1, int(round(math.exp(lg) / 2))))
