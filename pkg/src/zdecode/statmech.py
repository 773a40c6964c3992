"""Random-bond Ising model on the torus obtained from a bitflip error.

Spins sit on the vertices of the ``L x L`` torus and each qubit (edge) is a
bond. The instance Hamiltonian is ``H = -sum_e J_e s_a s_b - sum_e K_e``.

Uniform noise keeps ``|J| = 1`` and puts the rate into the Nishimori
temperature ``2 / ln((1-p)/p)``. Non-uniform noise stores
``|J_e| = ln((1-p_e)/p_e) / 2`` and fixes the Nishimori temperature to 1.
The offsets are chosen so that ``exp(-beta_N H(all up)) = P(e)``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import gmpy2
import numpy as np

from .codes import CodeKind, CodeSpec
from .noise import RateVector


def edge_endpoints(L: int) -> tuple[np.ndarray, np.ndarray]:
    """Vertex indices (a, b) of every bond in qubit order."""
    i, j = np.divmod(np.arange(L * L), L)
    here = i * L + j
    right = i * L + (j + 1) % L
    down = ((i + 1) % L) * L + j
    return np.concatenate([here, here]), np.concatenate([right, down])


@dataclass(frozen=True)
class RbimInstance:
    L: int
    signs: np.ndarray
    magnitudes: np.ndarray
    rates: RateVector
    uniform: bool

    @property
    def n_spins(self) -> int:
        return self.L * self.L

    @property
    def couplings(self) -> np.ndarray:
        return self.signs * self.magnitudes

    @property
    def error_support(self) -> np.ndarray:
        return self.signs < 0

    @property
    def offsets(self) -> np.ndarray:
        p = self.rates.p
        if self.uniform:
            return np.log(p * (1 - p)) / np.log((1 - p) / p)
        return 0.5 * np.log(p * (1 - p))

    def couplings_mp(self, prec: int) -> list:
        """Signed couplings as mpfr values at ``prec`` bits."""
        with gmpy2.context(gmpy2.get_context(), precision=prec):
            if self.uniform:
                return [gmpy2.mpfr(int(s)) for s in self.signs]
            return [int(s) * gmpy2.log((1 - gmpy2.mpfr(float(p))) / gmpy2.mpfr(float(p))) / 2
                    for s, p in zip(self.signs, self.rates.p)]

    def offsets_mp(self, prec: int) -> list:
        with gmpy2.context(gmpy2.get_context(), precision=prec):
            out = []
            for p in self.rates.p:
                p = gmpy2.mpfr(float(p))
                k = gmpy2.log(p * (1 - p))
                out.append(k / gmpy2.log((1 - p) / p) if self.uniform else k / 2)
            return out


@dataclass(frozen=True)
class TemperatureSpec:
    """Temperature resolved against a noise model.

    ``mode`` is ``"nishimori"``, ``"fraction"`` (of the Nishimori value) or
    ``"absolute"``. ``p_ref`` is the uniform rate behind the Nishimori value,
    or None when the couplings already carry the rates (T_N = 1).
    """

    mode: str
    fraction: float
    resolved_T: float
    p_ref: float | None

    @property
    def beta(self) -> float:
        return 1.0 / self.resolved_T

    def beta_mp(self, prec: int):
        with gmpy2.context(gmpy2.get_context(), precision=prec):
            if self.mode == "absolute":
                return 1 / gmpy2.mpfr(self.resolved_T)
            if self.p_ref is None:
                bn = gmpy2.mpfr(1)
            else:
                p = gmpy2.mpfr(self.p_ref)
                bn = gmpy2.log((1 - p) / p) / 2
            return bn / gmpy2.mpfr(self.fraction)


def nishimori_temperature(rates: RateVector) -> TemperatureSpec:
    if not rates.uniform:
        return TemperatureSpec("nishimori", 1.0, 1.0, None)
    p = rates.mean
    if not 0.0 < p < 0.5:
        raise ValueError(f"Nishimori temperature needs 0 < p < 1/2, got {p}")
    return TemperatureSpec("nishimori", 1.0, 2.0 / np.log((1 - p) / p), p)


def temperature(rates: RateVector, spec) -> TemperatureSpec:
    """Resolve ``"nishimori"``, a float fraction of T_N, or ``("absolute", T)``."""
    tn = nishimori_temperature(rates)
    if isinstance(spec, TemperatureSpec):
        return spec
    if spec == "nishimori":
        return tn
    if isinstance(spec, tuple) and spec[0] == "absolute":
        T = float(spec[1])
        if T <= 0:
            raise ValueError("absolute temperature must be positive")
        return TemperatureSpec("absolute", T / tn.resolved_T, T, tn.p_ref)
    f = float(spec)
    if f <= 0:
        raise ValueError("temperature fraction must be positive")
    if f == 1.0:
        return tn
    return TemperatureSpec("fraction", f, f * tn.resolved_T, tn.p_ref)


def build_rbim(code: CodeSpec, rates: RateVector, e) -> RbimInstance:
    if code.kind is not CodeKind.TORUS:
        raise ValueError("the partition-function pipeline supports the torus only")
    e = np.asarray(e).astype(np.uint8)
    if e.shape != (code.n_qubits,) or len(rates.p) != code.n_qubits:
        raise ValueError("error and rate vectors must match the number of qubits")
    signs = np.where(e & 1, -1, 1).astype(np.int8)
    if rates.uniform:
        mags = np.ones(code.n_qubits)
    else:
        mags = 0.5 * np.log((1 - rates.p) / rates.p)
    signs.setflags(write=False)
    mags.setflags(write=False)
    return RbimInstance(code.distance, signs, mags, rates, rates.uniform)


def class_flipped_instance(inst: RbimInstance, rep) -> RbimInstance:
    rep = np.asarray(rep).astype(bool)
    signs = np.where(rep, -inst.signs, inst.signs).astype(np.int8)
    signs.setflags(write=False)
    return replace(inst, signs=signs)


def _check_spins(inst: RbimInstance, sigma) -> np.ndarray:
    s = np.asarray(sigma)
    if s.shape != (inst.n_spins,):
        raise ValueError(f"spin configuration must have length {inst.n_spins}")
    return s.astype(np.int64)


def energy(inst: RbimInstance, sigma) -> float:
    s = _check_spins(inst, sigma)
    a, b = edge_endpoints(inst.L)
    return float(-np.sum(inst.couplings * s[a] * s[b]) - np.sum(inst.offsets))


def log_boltzmann_weight(inst: RbimInstance, sigma, T: TemperatureSpec, prec: int = 256):
    """``-beta * H(sigma)`` as an mpfr value at ``prec`` bits."""
    s = _check_spins(inst, sigma)
    a, b = edge_endpoints(inst.L)
    bonds = s[a] * s[b]
    J = inst.couplings_mp(prec)
    K = inst.offsets_mp(prec)
    with gmpy2.context(gmpy2.get_context(), precision=prec):
        beta = T.beta_mp(prec)
        total = gmpy2.fsum([j * int(x) for j, x in zip(J, bonds)] + K)
        return beta * total
