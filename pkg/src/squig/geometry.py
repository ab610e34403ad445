"""Planar geometry for the generalized sine maps.

Everything here is parameterized by one integer ``n >= 3`` and three derived
vertices:

* ``A`` on the positive real axis (half the fundamental period),
* ``B = omega * A`` with ``omega = exp(2*pi*i/n)``,
* ``P`` on the wedge bisector, the corner shared by the curved images.

The kite ``Pi`` has vertex cycle ``0 -> A -> P -> B``; the rosette ``Omega``
is the union of its ``n`` rotated copies; the slit plane ``Sigma`` is the
plane minus the ``n`` rays ``{r * omega**k : r >= 1}``.

``fold`` reduces a point of the closed rosette (for ``n == 3``: any point of
the plane) to a canonical representative in the lower half-kite triangle
``(0, A, P)``, recording the rotation, reflection and lattice translation
needed to restore the original point.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

from .errors import DomainError, ParameterError
from .numerics import integrate_smooth

_MIN_N = 3
_MAX_N = 64

# Membership slack for the triangle tests, in units of |A|^2 (signed areas).
_EDGE_TOL = 1e-10
# Half-width of the exclusion band around each slit ray.
_SLIT_TOL = 1e-8
# Relative radius of the "at the obstruction corner" flag.
_POLE_TOL = 1e-6
# Angular snap for points sitting on a wedge boundary ray.
_RAY_SNAP = 1e-12


@dataclass(eq=False)
class SquigContext:
    """Fixed-n bundle of constants shared by every operation.

    Treated as immutable after construction; ``series_cache`` is filled
    lazily (keyed by term count) but entries are never mutated.
    """

    n: int
    omega: complex
    pi_n: float
    A: complex
    B: complex
    P: complex
    series_cache: dict = field(default_factory=dict, repr=False)

    @property
    def beta(self) -> float:
        return (self.n - 1) / self.n

    @property
    def R(self) -> float:
        """Distance from the origin to the obstruction corner ``P``."""
        return abs(self.P)

    @property
    def cell_shift_1(self) -> complex:
        """First hexagonal lattice generator, ``A * (1 - omega)`` (n == 3 only)."""
        return self.A * (1.0 - self.omega)

    @property
    def cell_shift_2(self) -> complex:
        """Second hexagonal lattice generator, ``A * (1 - omega**2)`` (n == 3 only)."""
        return self.A * (1.0 - self.omega * self.omega)


@dataclass(frozen=True)
class FoldResult:
    """Canonical representative plus the bookkeeping to undo the fold.

    The original point is recovered (up to roundoff) as

        ``omega**rotation_k * (conj(folded) if conjugated else folded)
          + lattice_shift[0] * cell_shift_1 + lattice_shift[1] * cell_shift_2``

    where the lattice part is zero unless ``n == 3``.
    """

    folded: complex
    rotation_k: int
    conjugated: bool
    lattice_shift: tuple[int, int]
    at_pole: bool


def make_context(n: int) -> SquigContext:
    """Build the shared constant bundle for a given ``n``.

    The period is computed by quadrature, not from a closed form, so it can
    serve as an independent check against gamma-function evaluations.  The
    reflection ``x -> (1 - x**n)**(1/n)`` swaps the two halves of ``[0, 1]``,
    so integrating only up to the fixed point ``2**(-1/n)`` sees a bounded
    integrand and still determines the full period.
    """
    if isinstance(n, bool) or not isinstance(n, int):
        raise ParameterError(f"n must be an integer, got {n!r}")
    if not _MIN_N <= n <= _MAX_N:
        raise ParameterError(f"n must lie in [{_MIN_N}, {_MAX_N}], got {n}")

    beta = (n - 1.0) / n
    cut = 2.0 ** (-1.0 / n)
    quarter = integrate_smooth(lambda x: (1.0 - x**n) ** (-beta), 0.0, cut, tol=1e-13)
    pi_n = 4.0 * quarter.value.real

    omega = cmath.exp(2j * math.pi / n)
    half = pi_n / 2.0
    corner = (pi_n / 4.0) / math.cos(math.pi / n) * cmath.exp(1j * math.pi / n)
    return SquigContext(
        n=n,
        omega=omega,
        pi_n=pi_n,
        A=complex(half, 0.0),
        B=omega * complex(half, 0.0),
        P=corner,
    )


def _cross(o: complex, a: complex, b: complex) -> float:
    """Signed area of the parallelogram spanned by ``a - o`` and ``b - o``."""
    return (a.real - o.real) * (b.imag - o.imag) - (a.imag - o.imag) * (b.real - o.real)


def _in_triangle(p: complex, v0: complex, v1: complex, v2: complex, tol: float) -> bool:
    # Vertices are expected counterclockwise; tol is an area slack.
    return (
        _cross(v0, v1, p) >= -tol
        and _cross(v1, v2, p) >= -tol
        and _cross(v2, v0, p) >= -tol
    )


def contains_Pi(ctx: SquigContext, z: complex) -> bool:
    """Closed-kite membership, with a 1e-10 relative slack on the edges.

    The kite is the union of the triangles (0, A, P) and (0, P, B); testing
    the two halves separately keeps the test correct when the corner at P
    turns reflex (n >= 5).
    """
    z = complex(z)
    tol = _EDGE_TOL * abs(ctx.A) ** 2
    zero = 0j
    return _in_triangle(z, zero, ctx.A, ctx.P, tol) or _in_triangle(
        z, zero, ctx.P, ctx.B, tol
    )


def contains_Sigma(ctx: SquigContext, w: complex) -> bool:
    """True unless ``w`` sits within 1e-8 of one of the n slit rays."""
    w = complex(w)
    for k in range(ctx.n):
        u = w * cmath.exp(-2j * math.pi * k / ctx.n)
        if abs(u.imag) <= _SLIT_TOL and u.real >= 1.0 - _SLIT_TOL:
            return False
    return True


def _reduce_to_cell(ctx: SquigContext, z: complex) -> tuple[int, int, complex]:
    """Translate ``z`` by the hexagonal lattice into the Voronoi cell of 0.

    The cell of the lattice spanned by ``cell_shift_1``/``cell_shift_2`` is
    exactly the closed rosette for n == 3 (a regular hexagon with vertices
    A, P, B, -A, -P, -B).  Rounding the oblique coordinates only lands in a
    rhombus, so a sweep over the six nearest neighbours finishes the
    reduction; distance ties keep whichever cell is closer to the origin.
    """
    c1 = ctx.cell_shift_1
    c2 = ctx.cell_shift_2
    det = c1.real * c2.imag - c1.imag * c2.real
    x1 = (z.real * c2.imag - z.imag * c2.real) / det
    x2 = (c1.real * z.imag - c1.imag * z.real) / det
    m1 = round(x1)
    m2 = round(x2)

    tie = 1e-12 * abs(ctx.A)
    for _ in range(3):
        v = z - m1 * c1 - m2 * c2
        best = (m1, m2)
        best_d = abs(v)
        for d1, d2 in ((1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1)):
            cand1 = m1 + d1
            cand2 = m2 + d2
            d = abs(z - cand1 * c1 - cand2 * c2)
            if d < best_d - tie:
                best = (cand1, cand2)
                best_d = d
            elif abs(d - best_d) <= tie:
                # tie: prefer the cell whose lattice point is nearer 0
                if abs(cand1 * c1 + cand2 * c2) < abs(best[0] * c1 + best[1] * c2) - tie:
                    best = (cand1, cand2)
                    best_d = d
        if best == (m1, m2):
            break
        m1, m2 = best
    return m1, m2, z - m1 * c1 - m2 * c2


def fold(ctx: SquigContext, z: complex) -> FoldResult:
    """Reduce ``z`` to the canonical half-kite triangle ``(0, A, P)``.

    For n == 3 the whole plane folds (lattice translation, then rotation and
    reflection); for n >= 4 the point must lie in the closed rosette, else a
    DomainError naming the region is raised.

    Tie conventions: points on a shared wedge ray fold without conjugation,
    points on the bisector ray fold with ``conjugated=False``, and the
    obstruction-corner flag fires within ``1e-6 * |P|`` of the corner.
    """
    z = complex(z)
    m1 = m2 = 0
    v = z
    if ctx.n == 3:
        m1, m2, v = _reduce_to_cell(ctx, z)

    tau = 2.0 * math.pi / ctx.n
    theta = cmath.phase(v)
    if theta < 0.0:
        theta += 2.0 * math.pi

    # Snap onto a wedge boundary ray when within _RAY_SNAP radians of it.
    k_near = round(theta / tau)
    if abs(theta - k_near * tau) <= _RAY_SNAP:
        k = k_near % ctx.n
        local = 0.0
    else:
        k = int(theta // tau) % ctx.n
        local = theta - (theta // tau) * tau

    u = v * cmath.exp(-2j * math.pi * k / ctx.n)
    if local > tau / 2.0 + _RAY_SNAP:
        t = cmath.exp(2j * math.pi / ctx.n) * u.conjugate()
        rotation_k = (k + 1) % ctx.n
        conjugated = True
    else:
        t = u
        rotation_k = k
        conjugated = False

    tol = _EDGE_TOL * abs(ctx.A) ** 2
    if not _in_triangle(t, 0j, ctx.A, ctx.P, tol):
        if ctx.n == 3:
            # Unreachable by construction (the Voronoi cell is the rosette);
            # kept as a guard against roundoff at the hexagon corners.
            pass
        else:
            raise DomainError(
                f"point {z} lies outside the closed region Omega_{ctx.n}",
                region=f"Omega_{ctx.n}",
            )

    at_pole = abs(t - ctx.P) <= _POLE_TOL * abs(ctx.P)
    return FoldResult(
        folded=t,
        rotation_k=rotation_k,
        conjugated=conjugated,
        lattice_shift=(m1, m2),
        at_pole=at_pole,
    )


def unfold(ctx: SquigContext, result: FoldResult) -> complex:
    """Invert :func:`fold`: rotate, conjugate and translate back."""
    t = result.folded.conjugate() if result.conjugated else result.folded
    z = t * cmath.exp(2j * math.pi * result.rotation_k / ctx.n)
    if result.lattice_shift != (0, 0):
        m1, m2 = result.lattice_shift
        z += m1 * ctx.cell_shift_1 + m2 * ctx.cell_shift_2
    return z


def _sample_edges(vertices: list[complex], samples_per_edge: int) -> list[complex]:
    """Closed polyline through ``vertices``; first point repeated at the end."""
    pts: list[complex] = []
    m = len(vertices)
    for i in range(m):
        a = vertices[i]
        b = vertices[(i + 1) % m]
        for j in range(samples_per_edge):
            s = j / samples_per_edge
            pts.append(a + s * (b - a))
    pts.append(vertices[0])
    return pts


def boundary_polyline(
    ctx: SquigContext,
    which: str,
    samples_per_edge: int = 16,
    radius: float | None = None,
) -> list[complex]:
    """Counterclockwise closed polyline tracing a named region boundary.

    ``which`` is one of ``"pi"`` (the kite), ``"omega"`` (the rosette) or
    ``"gamma"`` (one wedge of the circle of the given ``radius``: outbound
    ray, arc, return ray).  The first point is repeated at the end so the
    polyline closes exactly.
    """
    if not isinstance(samples_per_edge, int) or samples_per_edge < 2:
        raise ParameterError(
            f"samples_per_edge must be an integer >= 2, got {samples_per_edge!r}"
        )

    if which == "pi":
        return _sample_edges([0j, ctx.A, ctx.P, ctx.B], samples_per_edge)

    if which == "omega":
        verts: list[complex] = []
        for k in range(ctx.n):
            rot = cmath.exp(2j * math.pi * k / ctx.n)
            verts.append(rot * ctx.A)
            verts.append(rot * ctx.P)
        return _sample_edges(verts, samples_per_edge)

    if which == "gamma":
        if radius is None or not radius > 0.0:
            raise ParameterError("the gamma boundary needs a positive radius")
        tau = 2.0 * math.pi / ctx.n
        pts = []
        for j in range(samples_per_edge):
            pts.append(complex(radius * j / samples_per_edge, 0.0))
        for j in range(samples_per_edge + 1):
            pts.append(radius * cmath.exp(1j * tau * j / samples_per_edge))
        for j in range(1, samples_per_edge + 1):
            pts.append(
                radius * cmath.exp(1j * tau) * (1.0 - j / samples_per_edge)
            )
        return pts

    raise ParameterError(f"unknown boundary tag {which!r}; use pi, omega or gamma")


def sample_domain(
    ctx: SquigContext,
    rng,
    count: int,
    pole_clearance: float = 0.05,
) -> list[complex]:
    """Draw ``count`` points uniformly over the closed rosette.

    Keeps a relative distance of at least ``pole_clearance`` (in units of
    ``|P|``) from every rotated obstruction corner.  The two half-kite
    triangles have equal area, so a coin flip plus a barycentric draw is
    uniform on the kite, and a uniform rotation spreads it over the rosette.
    """
    if count < 0:
        raise ParameterError("count must be nonnegative")
    pts: list[complex] = []
    corners = [ctx.P * cmath.exp(2j * math.pi * k / ctx.n) for k in range(ctx.n)]
    while len(pts) < count:
        a = rng.random()
        b = rng.random()
        if a + b > 1.0:
            a, b = 1.0 - a, 1.0 - b
        base = ctx.A if rng.random() < 0.5 else ctx.B
        p = a * base + b * ctx.P
        p *= cmath.exp(2j * math.pi * rng.randrange(ctx.n) / ctx.n)
        if min(abs(p - c) for c in corners) < pole_clearance * abs(ctx.P):
            continue
        pts.append(p)
    return pts
