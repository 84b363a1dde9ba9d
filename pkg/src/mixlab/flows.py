"""Declarative shear and 2D velocity specifications.

Shears U(t,y) and plane flows u(theta,x,y) are sums of harmonic terms with a
scalar time factor (constant, or cos/sin of one full period).  Plane flows are
specified through a streamfunction, so the velocity is divergence-free by
construction.  Analytic bounds consumed by the certificates (M = sup|U|, the
W^{1,1} seminorm of U, the Lipschitz size of u) are declared data validated
against a sampling grid, not computed suprema.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .spectral import Lattice, FieldError

__all__ = [
    "FlowSpecError",
    "ShearTerm",
    "ShearSpec",
    "FlowTerm",
    "FlowSpec",
    "SpectralVelocity",
    "mean_zero_reduce",
    "phase_integral",
    "time_average",
    "preset_shear",
    "preset_flow",
    "flow_to_json",
    "flow_from_json",
]

_TWO_PI = 2.0 * np.pi

# Declared analytic bounds must dominate sampled values within this slack.
_BOUND_TOL = 1e-9

# Composite Gauss-Legendre quadrature: panels per period and nodes per panel.
_GL_PANELS = 64
_GL_NODES = 5
_GL_X, _GL_W = np.polynomial.legendre.leggauss(_GL_NODES)


class FlowSpecError(ValueError):
    """A shear/flow specification is inconsistent with its declared bounds."""


def _time_factor(mode: str, omega: float, t: np.ndarray | float) -> np.ndarray | float:
    if mode == "const":
        return np.ones_like(np.asarray(t, dtype=float)) if np.ndim(t) else 1.0
    if mode == "cos":
        return np.cos(omega * np.asarray(t, dtype=float))
    if mode == "sin":
        return np.sin(omega * np.asarray(t, dtype=float))
    raise FlowSpecError(f"unknown time mode {mode!r}")


def _integrate_time(mode: str, omega: float, t: float, panels_per_period: int = _GL_PANELS) -> float:
    """Integral of the time factor over [0, t].

    Constant factors integrate exactly to t; oscillating factors use composite
    Gauss-Legendre quadrature with ``panels_per_period`` panels per period.
    """
    if t == 0.0:
        return 0.0
    if mode == "const":
        return t
    period = _TWO_PI / omega
    n_panels = max(1, int(np.ceil(panels_per_period * abs(t) / period)))
    edges = np.linspace(0.0, t, n_panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = mid[:, None] + half[:, None] * _GL_X[None, :]
    vals = _time_factor(mode, omega, nodes)
    return float(np.sum(half[:, None] * _GL_W[None, :] * vals))


@dataclass(frozen=True)
class ShearTerm:
    """One shear harmonic: ampl * tau(t) * {cos|sin}(ky*y); ky=0 means constant in y."""

    ampl: float
    ky: int
    phase: str = "cos"
    time_mode: str = "const"

    def __post_init__(self) -> None:
        if self.phase not in ("cos", "sin"):
            raise FlowSpecError(f"phase must be cos or sin, got {self.phase!r}")
        if self.time_mode not in ("const", "cos", "sin"):
            raise FlowSpecError(f"time_mode must be const, cos or sin, got {self.time_mode!r}")
        if self.ky == 0 and self.phase == "sin":
            raise FlowSpecError("ky=0 with sin spatial phase is identically zero")

    def spatial(self, y: np.ndarray) -> np.ndarray:
        if self.ky == 0:
            return np.ones_like(y)
        return np.cos(self.ky * y) if self.phase == "cos" else np.sin(self.ky * y)

    def dy_spatial(self, y: np.ndarray) -> np.ndarray:
        if self.ky == 0:
            return np.zeros_like(y)
        if self.phase == "cos":
            return -self.ky * np.sin(self.ky * y)
        return self.ky * np.cos(self.ky * y)


@dataclass(frozen=True)
class ShearSpec:
    """Time-dependent shear U(t,y) with declared sup and W^{1,1} bounds.

    ``M`` bounds sup_{t,y} |U| and ``w11`` bounds sup_t (1/2pi) int |dU/dy| dy
    (normalized measure).  When omitted they are estimated from a sampling
    grid; when given they are checked to dominate the sampled values.
    """

    terms: tuple[ShearTerm, ...] = ()
    period: float = _TWO_PI
    M: float | None = None
    w11: float | None = None

    def __post_init__(self) -> None:
        if self.period <= 0:
            raise FlowSpecError("period must be positive")
        object.__setattr__(self, "terms", tuple(self.terms))
        m_sampled, w_sampled = self._sampled_bounds()
        if self.M is None:
            object.__setattr__(self, "M", m_sampled)
        elif self.M < m_sampled - _BOUND_TOL:
            raise FlowSpecError(f"declared M={self.M} below sampled sup {m_sampled}")
        if self.w11 is None:
            object.__setattr__(self, "w11", w_sampled)
        elif self.w11 < w_sampled - _BOUND_TOL:
            raise FlowSpecError(f"declared w11={self.w11} below sampled seminorm {w_sampled}")

    @property
    def omega(self) -> float:
        return _TWO_PI / self.period

    @property
    def time_kind(self) -> str:
        if all(t.time_mode == "const" for t in self.terms):
            return "steady"
        return "periodic"

    @property
    def max_ky(self) -> int:
        return max((abs(t.ky) for t in self.terms), default=0)

    def is_zero(self) -> bool:
        return all(t.ampl == 0.0 for t in self.terms) or not self.terms

    def _time_grid(self, n: int = 128) -> np.ndarray:
        if self.time_kind == "steady":
            return np.array([0.0])
        return np.linspace(0.0, self.period, n, endpoint=False)

    def _sampled_bounds(self, ny: int = 512) -> tuple[float, float]:
        y = np.linspace(0.0, _TWO_PI, ny, endpoint=False)
        ts = self._time_grid()
        m = 0.0
        w = 0.0
        for t in ts:
            u = self.sample(t, y)
            du = self.dy_sample(t, y)
            m = max(m, float(np.max(np.abs(u))))
            w = max(w, float(np.mean(np.abs(du))))
        return m, w

    def sample(self, t: float, y: np.ndarray) -> np.ndarray:
        """Values of U(t, .) at the points y."""
        out = np.zeros_like(np.asarray(y, dtype=float))
        for term in self.terms:
            out += term.ampl * _time_factor(term.time_mode, self.omega, t) * term.spatial(y)
        return out

    def dy_sample(self, t: float, y: np.ndarray) -> np.ndarray:
        out = np.zeros_like(np.asarray(y, dtype=float))
        for term in self.terms:
            out += term.ampl * _time_factor(term.time_mode, self.omega, t) * term.dy_spatial(y)
        return out

    def y_coeffs(self, t: float, lmax: int) -> np.ndarray:
        """Fourier coefficients of U(t, .) over l in [-lmax, lmax]."""
        out = np.zeros(2 * lmax + 1, dtype=complex)
        for term in self.terms:
            a = term.ampl * _time_factor(term.time_mode, self.omega, t)
            _add_harmonic(out, lmax, term.ky, term.phase, a)
        return out


def _add_harmonic(vec: np.ndarray, lmax: int, ky: int, phase: str, a: float) -> None:
    if abs(ky) > lmax:
        raise FieldError(f"harmonic ky={ky} outside lmax={lmax}")
    if ky == 0:
        vec[lmax] += a
        return
    if phase == "cos":
        vec[lmax + ky] += 0.5 * a
        vec[lmax - ky] += 0.5 * a
    else:
        vec[lmax + ky] += -0.5j * a
        vec[lmax - ky] += 0.5j * a


def mean_zero_reduce(shear: ShearSpec) -> tuple[ShearSpec, Callable[[float], float]]:
    """Split U into its y-mean-free part and the rigid drift it generates.

    Returns (U - Ubar(t), X) where Ubar(t) is the y-average and
    X(t) = int_0^t Ubar(s) ds.  Transport by the constant-in-y part is a rigid
    x-translation, which leaves every Fourier modulus unchanged.
    """
    reduced_terms = tuple(t for t in shear.terms if t.ky != 0)
    mean_terms = tuple(t for t in shear.terms if t.ky == 0)
    reduced = ShearSpec(reduced_terms, period=shear.period, w11=shear.w11)
    omega = shear.omega

    def drift(t: float) -> float:
        return sum(term.ampl * _integrate_time(term.time_mode, omega, t) for term in mean_terms)

    return reduced, drift


def phase_integral(shear: ShearSpec, t: float, lmax: int | None = None) -> np.ndarray:
    """Fourier coefficients over l of Phi(., t) = int_0^t U(., s) ds.

    The shear should be mean-zero-reduced first; steady terms integrate to
    exactly t*U, oscillating terms by Gauss-Legendre quadrature.
    """
    lmax = shear.max_ky if lmax is None else lmax
    lmax = max(lmax, 1)
    out = np.zeros(2 * lmax + 1, dtype=complex)
    for term in shear.terms:
        a = term.ampl * _integrate_time(term.time_mode, shear.omega, t)
        _add_harmonic(out, lmax, term.ky, term.phase, a)
    return out


@dataclass(frozen=True)
class FlowTerm:
    """One streamfunction harmonic ampl * tau(theta) * {cos|sin}(kx*x + ky*y)."""

    ampl: float
    kx: int
    ky: int
    phase: str = "cos"
    time_mode: str = "const"

    def __post_init__(self) -> None:
        if self.phase not in ("cos", "sin"):
            raise FlowSpecError(f"phase must be cos or sin, got {self.phase!r}")
        if self.time_mode not in ("const", "cos", "sin"):
            raise FlowSpecError(f"time_mode must be const, cos or sin, got {self.time_mode!r}")
        if self.kx == 0 and self.ky == 0:
            raise FlowSpecError("constant streamfunction term generates no velocity")


@dataclass(frozen=True)
class SpectralVelocity:
    """A steady velocity field as coefficient arrays of its two components."""

    lattice: Lattice
    u: np.ndarray
    v: np.ndarray

    def divergence_max(self) -> float:
        k = self.lattice.k_values()[:, None].astype(float)
        l = self.lattice.l_values()[None, :].astype(float)
        return float(np.max(np.abs(1j * k * self.u + 1j * l * self.v)))

    def max_band(self) -> int:
        mags = np.abs(self.u) + np.abs(self.v)
        idx = np.argwhere(mags > 1e-14)
        if idx.size == 0:
            return 0
        k = np.abs(idx[:, 0] - self.lattice.kmax)
        l = np.abs(idx[:, 1] - self.lattice.lmax)
        return int(max(k.max(), l.max()))

    def sup_norm_estimate(self, n: int = 256) -> float:
        """Sampled sup of |u| over a grid (diagnostic, not a certified bound)."""
        x = np.linspace(0.0, _TWO_PI, n, endpoint=False)
        u1 = _eval_coeffs_grid(self.lattice, self.u, x, x)
        u2 = _eval_coeffs_grid(self.lattice, self.v, x, x)
        return float(np.max(np.sqrt(np.abs(u1) ** 2 + np.abs(u2) ** 2)))


def _eval_coeffs_grid(lattice: Lattice, coeff: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    ks = lattice.k_values()
    ls = lattice.l_values()
    ex = np.exp(1j * np.outer(x, ks))
    ey = np.exp(1j * np.outer(ls, y))
    return ex @ coeff @ ey


@dataclass(frozen=True)
class FlowSpec:
    """Divergence-free plane flow from a streamfunction, periodic in its phase.

    The velocity is u = (-d_y psi, d_x psi).  ``lip`` declares a bound on the
    sup over phase of max(|u|, |first derivatives of u|); it is validated
    against sampled values on construction.
    """

    terms: tuple[FlowTerm, ...] = ()
    period: float = _TWO_PI
    lip: float | None = None

    def __post_init__(self) -> None:
        if self.period <= 0:
            raise FlowSpecError("period must be positive")
        object.__setattr__(self, "terms", tuple(self.terms))
        sampled = self._sampled_lip()
        if self.lip is None:
            object.__setattr__(self, "lip", sampled)
        elif self.lip < sampled - _BOUND_TOL:
            raise FlowSpecError(f"declared lip={self.lip} below sampled value {sampled}")

    @property
    def omega(self) -> float:
        return _TWO_PI / self.period

    @property
    def max_band(self) -> int:
        return max((max(abs(t.kx), abs(t.ky)) for t in self.terms), default=0)

    def is_steady(self) -> bool:
        return all(t.time_mode == "const" for t in self.terms)

    def velocity_lattice(self) -> Lattice:
        b = max(1, self.max_band)
        return Lattice(b, b)

    def velocity_coeffs(self, theta: float, lattice: Lattice | None = None) -> SpectralVelocity:
        """Spectral representation of u(theta, .) on the given lattice."""
        lattice = self.velocity_lattice() if lattice is None else lattice
        u = np.zeros(lattice.shape, dtype=complex)
        v = np.zeros(lattice.shape, dtype=complex)
        for term in self.terms:
            a = term.ampl * _time_factor(term.time_mode, self.omega, theta)
            if abs(term.kx) > lattice.kmax or abs(term.ky) > lattice.lmax:
                raise FieldError(f"flow harmonic ({term.kx},{term.ky}) outside lattice {lattice}")
            i, j = term.kx + lattice.kmax, term.ky + lattice.lmax
            im, jm = -term.kx + lattice.kmax, -term.ky + lattice.lmax
            # psi harmonic -> u = (-i*l*psi_hat, i*k*psi_hat) per mode
            if term.phase == "cos":
                psi_p, psi_m = 0.5 * a, 0.5 * a
            else:
                psi_p, psi_m = -0.5j * a, 0.5j * a
            u[i, j] += -1j * term.ky * psi_p
            u[im, jm] += -1j * (-term.ky) * psi_m
            v[i, j] += 1j * term.kx * psi_p
            v[im, jm] += 1j * (-term.kx) * psi_m
        return SpectralVelocity(lattice, u, v)

    def velocity_grid(self, theta: float, x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Velocity components sampled on the tensor grid x (x) y."""
        sv = self.velocity_coeffs(theta)
        u1 = _eval_coeffs_grid(sv.lattice, sv.u, x, y)
        u2 = _eval_coeffs_grid(sv.lattice, sv.v, x, y)
        return u1.real, u2.real

    def _sampled_lip(self, n: int = 128, n_theta: int = 32) -> float:
        if not self.terms:
            return 0.0
        x = np.linspace(0.0, _TWO_PI, n, endpoint=False)
        thetas = [0.0] if self.is_steady() else np.linspace(0.0, self.period, n_theta, endpoint=False)
        worst = 0.0
        k = None
        for theta in thetas:
            sv = self.velocity_coeffs(theta)
            if k is None:
                kk = sv.lattice.k_values()[:, None].astype(float)
                ll = sv.lattice.l_values()[None, :].astype(float)
                k = (kk, ll)
            for comp in (sv.u, sv.v):
                vals = _eval_coeffs_grid(sv.lattice, comp, x, x)
                worst = max(worst, float(np.max(np.abs(vals))))
                for dcomp in (1j * k[0] * comp, 1j * k[1] * comp):
                    dvals = _eval_coeffs_grid(sv.lattice, dcomp, x, x)
                    worst = max(worst, float(np.max(np.abs(dvals))))
        return worst


def time_average(flow: FlowSpec, panels: int = _GL_PANELS) -> SpectralVelocity:
    """Phase average (1/L) int_0^L u(theta, .) dtheta by Gauss-Legendre quadrature.

    Averaging acts on the time factor only, so the result stays
    divergence-free; quadrature error is spectrally small for the smooth
    phase dependence allowed here.
    """
    lattice = flow.velocity_lattice()
    u = np.zeros(lattice.shape, dtype=complex)
    v = np.zeros(lattice.shape, dtype=complex)
    edges = np.linspace(0.0, flow.period, panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    for p in range(panels):
        for xg, wg in zip(_GL_X, _GL_W):
            theta = mid[p] + half[p] * xg
            sv = flow.velocity_coeffs(theta, lattice)
            w = half[p] * wg / flow.period
            u += w * sv.u
            v += w * sv.v
    return SpectralVelocity(lattice, u, v)


def preset_shear(name: str) -> ShearSpec:
    """Named shears: "zero" and "couette".

    True Couette flow U = y is not a continuous torus function; the "couette"
    preset ships the periodic analogue U = sin y and keeps the name only as a
    mnemonic for a steady single-harmonic shear.
    """
    if name == "zero":
        return ShearSpec(())
    if name == "couette":
        return ShearSpec((ShearTerm(1.0, 1, "sin"),))
    raise FlowSpecError(f"unknown shear preset {name!r}")


def preset_flow(name: str) -> FlowSpec:
    """Named flows: "zero" and the steady "cellular" flow psi = sin x sin y."""
    if name == "zero":
        return FlowSpec(())
    if name == "cellular":
        return FlowSpec((FlowTerm(1.0, 1, 1, "cos"), FlowTerm(-1.0, 1, -1, "cos")), period=_TWO_PI)
    raise FlowSpecError(f"unknown flow preset {name!r}")


def flow_to_json(spec: ShearSpec | FlowSpec) -> dict:
    """Serialize to the shared schema {kind, terms, bounds, period}."""
    if isinstance(spec, ShearSpec):
        return {
            "kind": "shear",
            "terms": [
                {"ampl": t.ampl, "kx": 0, "ky": t.ky, "phase_mode": t.phase, "time_mode": t.time_mode}
                for t in spec.terms
            ],
            "bounds": {"M": spec.M, "w11": spec.w11},
            "period": spec.period,
        }
    return {
        "kind": "flow2d",
        "terms": [
            {"ampl": t.ampl, "kx": t.kx, "ky": t.ky, "phase_mode": t.phase, "time_mode": t.time_mode}
            for t in spec.terms
        ],
        "bounds": {"lip": spec.lip},
        "period": spec.period,
    }


def flow_from_json(data: dict | str) -> ShearSpec | FlowSpec:
    """Parse the {kind, terms, bounds, period} schema; strings name presets."""
    if isinstance(data, str):
        try:
            return preset_shear(data)
        except FlowSpecError:
            return preset_flow(data)
    kind = data.get("kind")
    bounds = data.get("bounds", {}) or {}
    period = float(data.get("period", _TWO_PI))
    if kind == "shear":
        terms = []
        for t in data.get("terms", []):
            if int(t.get("kx", 0)) != 0:
                raise FlowSpecError("shear terms must have kx = 0")
            terms.append(
                ShearTerm(float(t["ampl"]), int(t["ky"]), t.get("phase_mode", "cos"), t.get("time_mode", "const"))
            )
        return ShearSpec(tuple(terms), period=period, M=bounds.get("M"), w11=bounds.get("w11"))
    if kind == "flow2d":
        terms = tuple(
            FlowTerm(float(t["ampl"]), int(t["kx"]), int(t["ky"]), t.get("phase_mode", "cos"), t.get("time_mode", "const"))
            for t in data.get("terms", [])
        )
        return FlowSpec(terms, period=period, lip=bounds.get("lip"))
    raise FlowSpecError(f"unknown spec kind {kind!r}")
