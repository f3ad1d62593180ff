"""Almost Kaehler tori ``(T^{2n+2}, omega_0, J_q)`` and their spectral grids.

Coordinates ``x^1..x^{2m}`` (``m = n + 1``) live on ``R/Z``. The first ``k``
coordinate planes carry the coframe ``theta^j = dx^{2j-1} + i q dx^{2j}``, the
others ``theta^a = dx^{2a-1} + i dx^{2a}``; ``q > 0`` depends only on the last
plane ``(x^{2m-1}, x^{2m})``, the *active* plane. The remaining ``2n``
circles are *passive*: every coefficient is constant along them, so they are
either collocated or replaced by a single Fourier mode.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import fourier

__all__ = ["QSpec", "TorusModel", "SpectralGrid", "CoframeField", "build_coframe", "coframe_on", "ModelError"]


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class QSpec:
    """The positive function ``q`` on the active plane.

    ``constant``: ``q = c``. ``exp_sin``: ``q = exp(sin(2 pi f (y1 + y2)))``.
    ``sampled``: the trigonometric interpolant of positive samples on a
    ``M x M`` grid of the active plane.
    """

    kind: str
    c: float = 1.0
    freq: int = 1
    samples: np.ndarray | None = field(default=None, compare=False, repr=False)
    label: str = ""

    def __post_init__(self):
        if self.kind not in ("constant", "exp_sin", "sampled"):
            raise ModelError(f"unknown q variant {self.kind!r}")
        if self.kind == "constant" and not self.c > 0:
            raise ModelError("constant q must be positive")
        if self.kind == "exp_sin" and (not isinstance(self.freq, (int, np.integer)) or self.freq < 1):
            raise ModelError("exp_sin frequency must be a positive integer")
        if self.kind == "sampled":
            s = np.asarray(self.samples, float)
            if s.ndim != 2 or s.shape[0] != s.shape[1]:
                raise ModelError("sampled q needs a square sample grid")
            if not np.all(s > 0):
                raise ModelError("sampled q must have strictly positive samples")
            object.__setattr__(self, "samples", s)

    @classmethod
    def constant(cls, c: float = 1.0) -> "QSpec":
        return cls("constant", c=float(c))

    @classmethod
    def exp_sin(cls, freq: int = 1) -> "QSpec":
        return cls("exp_sin", freq=int(freq))

    @classmethod
    def sampled(cls, samples, label: str = "") -> "QSpec":
        s = np.ascontiguousarray(samples, dtype=float)
        # equality and hashing ignore the array, so the label carries a digest of it
        digest = hashlib.sha1(s.tobytes() + str(s.shape).encode()).hexdigest()[:10]
        return cls("sampled", samples=s, label=f"{label}#{digest}" if label else digest)

    @classmethod
    def random_trig(cls, rng: np.random.Generator, degree: int = 2, amplitude: float = 0.8,
                    M: int = 64) -> "QSpec":
        """``q = exp(P)`` sampled on ``M x M`` nodes, ``P`` a random real trig polynomial."""
        ks = [(a, b) for a in range(-degree, degree + 1) for b in range(-degree, degree + 1)
              if (a, b) > (0, 0) and (a, b) != (0, 0)]
        y = fourier.nodes(M)
        Y1, Y2 = np.meshgrid(y, y, indexing="ij")
        P = np.zeros((M, M))
        for a, b in ks:
            amp = rng.normal(size=2) / (1 + a * a + b * b)
            phase = 2 * np.pi * (a * Y1 + b * Y2)
            P += amp[0] * np.cos(phase) + amp[1] * np.sin(phase)
        P *= amplitude / max(np.abs(P).max(), 1e-300)
        return cls.sampled(np.exp(P), label=f"trig(deg={degree})")

    def describe(self) -> str:
        if self.kind == "constant":
            return f"const:{self.c:g}"
        if self.kind == "exp_sin":
            return "exp-sin" if self.freq == 1 else f"exp-sin:{self.freq}"
        return f"sampled:{self.label or self.samples.shape[0]}"

    def evaluate(self, y1, y2):
        """``(q, dq/dy1, dq/dy2)`` on the tensor grid ``y1 x y2``."""
        y1 = np.atleast_1d(np.asarray(y1, float))
        y2 = np.atleast_1d(np.asarray(y2, float))
        shape = (y1.size, y2.size)
        if self.kind == "constant":
            return np.full(shape, self.c), np.zeros(shape), np.zeros(shape)
        if self.kind == "exp_sin":
            w = 2 * np.pi * self.freq
            s = w * (y1[:, None] + y2[None, :])
            q = np.exp(np.sin(s))
            dq = q * w * np.cos(s)
            return q, dq, dq.copy()
        s = self.samples
        return (fourier.interpolate_2d(s, y1, y2),
                fourier.interpolate_2d(s, y1, y2, (1, 0)),
                fourier.interpolate_2d(s, y1, y2, (0, 1)))


@dataclass(frozen=True)
class TorusModel:
    """``(T^{2n+2}, omega_0, J_q)`` with the first ``k`` planes perturbed."""

    n: int
    k: int
    qspec: QSpec

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ModelError("n must be a positive integer")
        if not 0 < self.k <= self.n:
            raise ModelError("need 0 < k <= n")

    @property
    def m(self) -> int:
        """Complex dimension ``n + 1``."""
        return self.n + 1

    @property
    def real_dim(self) -> int:
        return 2 * self.m

    @property
    def b1(self) -> int:
        return 2 * self.m

    def perturbed(self, plane: int) -> bool:
        """Whether plane ``plane`` (0-based) carries ``q``."""
        return plane < self.k

    def check_compatibility(self, grid: "SpectralGrid") -> dict:
        """Pointwise taming and symmetry of ``g = omega_0(., J .)`` on the grid nodes."""
        q, _, _ = self.qspec.evaluate(grid.active_nodes, grid.active_nodes)
        if not np.all(q > 0):
            raise ModelError("q is not positive on the grid")
        # per perturbed plane g = diag(1/q, q); unperturbed planes are flat
        taming = bool(np.all(1 / q > 0) and np.all(q > 0))
        J = np.zeros(q.shape + (2, 2))
        J[..., 1, 0] = 1 / q
        J[..., 0, 1] = -q
        Om = np.array([[0.0, 1.0], [-1.0, 0.0]])
        G = Om @ J
        sym = float(np.max(np.abs(G - np.swapaxes(G, -1, -2))))
        eig = np.linalg.eigvalsh(0.5 * (G + np.swapaxes(G, -1, -2)))
        J2 = J @ J + np.eye(2)
        return {"taming": taming and bool(np.all(eig > 0)), "symmetric": sym <= 1e-12 * float(np.max(q + 1 / q)),
                "J_squared": float(np.max(np.abs(J2))), "q_min": float(q.min()), "q_max": float(q.max())}


@dataclass(frozen=True)
class SpectralGrid:
    """Tensor grid: ``N`` nodes on each active circle.

    Block form (``modes`` given): each passive circle ``i`` is replaced by the
    single Fourier mode ``exp(2 pi i modes[i] x^i)``. Full form
    (``passive_N`` given): passive circles carry ``passive_N`` nodes each.
    """

    N: int
    modes: tuple[int, ...] | None = None
    passive_N: int | None = None

    def __post_init__(self):
        if self.N < 4 or self.N & (self.N - 1):
            raise ModelError("N must be a power of two >= 4")
        if (self.modes is None) == (self.passive_N is None):
            raise ModelError("give exactly one of modes (block form) or passive_N (full form)")
        if self.modes is not None:
            object.__setattr__(self, "modes", tuple(int(v) for v in self.modes))
        if self.passive_N is not None and (self.passive_N < 2 or self.passive_N & (self.passive_N - 1)):
            raise ModelError("passive_N must be a power of two")

    @classmethod
    def block(cls, N: int, modes) -> "SpectralGrid":
        return cls(N, modes=tuple(modes))

    @classmethod
    def full(cls, N: int, passive_N: int) -> "SpectralGrid":
        return cls(N, passive_N=passive_N)

    @property
    def is_block(self) -> bool:
        return self.modes is not None

    @property
    def active_nodes(self) -> np.ndarray:
        return fourier.nodes(self.N)

    def circles(self, real_dim: int) -> list[tuple[str, int]]:
        """Per coordinate: ``("grid", nodes)`` or ``("mode", wavenumber)``."""
        passive = real_dim - 2
        out = []
        for i in range(passive):
            if self.is_block:
                if len(self.modes) != passive:
                    raise ModelError(f"block grid needs {passive} passive modes")
                out.append(("mode", self.modes[i]))
            else:
                out.append(("grid", self.passive_N))
        out += [("grid", self.N), ("grid", self.N)]
        return out

    def shape(self, real_dim: int) -> tuple[int, ...]:
        return tuple(v for kind, v in self.circles(real_dim) if kind == "grid")

    def size(self, real_dim: int) -> int:
        return int(np.prod(self.shape(real_dim)))

    def cell_volume(self, real_dim: int) -> float:
        return float(np.prod([1.0 / v for v in self.shape(real_dim)]))

    def refined(self) -> "SpectralGrid":
        return SpectralGrid(2 * self.N, self.modes, self.passive_N)


@dataclass(frozen=True, eq=False)
class CoframeField:
    """Coframe data on the active plane (arrays indexed ``[i1, i2, ...]``).

    ``C[..., A, a]``: ``zeta^A = sum_a C[A, a] dx^a`` with
    ``zeta = (theta^1..theta^m, conj theta^1..conj theta^m)``; ``Cinv`` its
    pointwise inverse (so ``Cinv[..., a, B]`` are the dual vector fields);
    ``Gamma[..., A, B, D]`` the coefficient of ``zeta^B ^ zeta^D`` (``B < D``)
    in ``d zeta^A``; ``scale[..., j] = sqrt(q_j)``.
    """

    model: TorusModel
    N: int
    q: np.ndarray
    dq: tuple[np.ndarray, np.ndarray]
    C: np.ndarray
    Cinv: np.ndarray
    Gamma: np.ndarray
    scale: np.ndarray

    @property
    def a(self) -> np.ndarray:
        """``conj(v_m) q / (2q) = (q_1 + i q_2) / (4 q)``."""
        return (self.dq[0] + 1j * self.dq[1]) / (4 * self.q)

    @property
    def b(self) -> np.ndarray:
        """``v_m q / (2q) = (q_1 - i q_2) / (4 q)``."""
        return (self.dq[0] - 1j * self.dq[1]) / (4 * self.q)

    def duality_defect(self) -> float:
        eye = np.eye(self.C.shape[-1])
        return float(np.max(np.abs(self.C @ self.Cinv - eye)))


def build_coframe(model: TorusModel, N: int) -> CoframeField:
    y = fourier.nodes(N)
    return coframe_on(model, y, y, N)


def coframe_on(model: TorusModel, y1, y2, N: int = 0) -> CoframeField:
    """Coframe data on the tensor grid ``y1 x y2`` of the active plane."""
    q, q1, q2 = model.qspec.evaluate(y1, y2)
    if not np.all(q > 0):
        raise ModelError("q has a nonpositive value on the grid")
    m, D = model.m, 2 * model.m
    shp = q.shape
    C = np.zeros(shp + (D, D), complex)
    dC = np.zeros((D,) + shp + (D, D), complex)
    scale = np.ones(shp + (m,))
    act = (D - 2, D - 1)
    for j in range(m):
        qj = q if model.perturbed(j) else np.ones(shp)
        C[..., j, 2 * j] = 1
        C[..., j, 2 * j + 1] = 1j * qj
        C[..., m + j, 2 * j] = 1
        C[..., m + j, 2 * j + 1] = -1j * qj
        scale[..., j] = np.sqrt(qj)
        if model.perturbed(j):
            for i, dqi in zip(act, (q1, q2)):
                dC[i][..., j, 2 * j + 1] = 1j * dqi
                dC[i][..., m + j, 2 * j + 1] = -1j * dqi
    Cinv = np.linalg.inv(C)
    # d zeta^A = sum_{i,a} d_i C[A,a] dx^i ^ dx^a, dx^i = sum_B Cinv[i,B] zeta^B
    T = np.einsum("i...Aa,...iB,...aD->...ABD", dC, Cinv, Cinv)
    Gamma = T - np.swapaxes(T, -1, -2)
    upper = np.triu(np.ones((D, D), bool), 1)
    Gamma = Gamma * upper
    return CoframeField(model, N, q, (q1, q2), C, Cinv, Gamma, scale)
