"""The abelian group of points on y^2 = x^3 + a*x + b over a small prime field.

Affine coordinates throughout: on desk-scale fields the per-operation field
inversion is cheap, and the chord-and-tangent case analysis stays easy to
audit. The identity is the point at infinity O.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import CapacityError, ConfigError
from .field import FieldElement, is_prime, sqrt_candidates

DEFAULT_ENUMERATION_BOUND = 10_000


@dataclass(frozen=True, slots=True)
class Point:
    """A curve point: affine integer coordinates, or the identity O."""

    x: int | None
    y: int | None

    def __post_init__(self):
        if (self.x is None) != (self.y is None):
            raise ValueError("affine points need both coordinates")

    @property
    def is_infinity(self) -> bool:
        return self.x is None

    def __repr__(self) -> str:
        return "O" if self.x is None else f"({self.x}, {self.y})"


INFINITY = Point(None, None)


class Curve:
    """y^2 = x^3 + a*x + b over F_s with s prime.

    Requires s >= 5: the short Weierstrass group law divides by 2 and the
    discriminant test by 27, so characteristics 2 and 3 are out of scope.
    Construction rejects singular parameter choices (4a^3 + 27b^2 = 0 mod s).
    """

    def __init__(self, a: int, b: int, s: int,
                 enumeration_bound: int = DEFAULT_ENUMERATION_BOUND):
        if not isinstance(s, int) or not is_prime(s):
            raise ConfigError(f"field size {s!r} is not prime", path="curve.s")
        if s < 5:
            raise ConfigError("short Weierstrass form needs characteristic > 3", path="curve.s")
        if not isinstance(a, int) or not isinstance(b, int):
            raise ConfigError("curve coefficients must be integers", path="curve")
        a %= s
        b %= s
        if (4 * a * a * a + 27 * b * b) % s == 0:
            raise ConfigError(f"singular curve: 4a^3 + 27b^2 = 0 mod {s}", path="curve")
        self.a = a
        self.b = b
        self.s = s
        self.enumeration_bound = enumeration_bound
        self._affine: list[Point] | None = None

    def __repr__(self) -> str:
        return f"Curve(a={self.a}, b={self.b}, s={self.s})"

    def __eq__(self, other):
        if not isinstance(other, Curve):
            return NotImplemented
        return (self.a, self.b, self.s) == (other.a, other.b, other.s)

    def __hash__(self):
        return hash((self.a, self.b, self.s))

    # -- membership ------------------------------------------------------

    def contains(self, p: Point) -> bool:
        """True iff p is O or satisfies the curve equation."""
        if p.is_infinity:
            return True
        x, y = p.x % self.s, p.y % self.s
        return (y * y - (x * x * x + self.a * x + self.b)) % self.s == 0

    def _require_on_curve(self, p: Point) -> None:
        if not self.contains(p):
            raise ValueError(f"{p!r} is not on {self!r}")

    # -- group law -------------------------------------------------------

    def negate(self, p: Point) -> Point:
        if p.is_infinity:
            return INFINITY
        return Point(p.x, (-p.y) % self.s)

    def add(self, p: Point, q: Point) -> Point:
        """Group addition; dispatches to doubling when p == q."""
        self._require_on_curve(p)
        self._require_on_curve(q)
        return self._add(p, q)

    def _add(self, p: Point, q: Point) -> Point:
        # internal fast path: callers guarantee membership
        if p.is_infinity:
            return q
        if q.is_infinity:
            return p
        s = self.s
        if p.x == q.x and (p.y + q.y) % s == 0:
            # q = -p, which also covers doubling a point with y = 0
            return INFINITY
        xp, yp = FieldElement(p.x, s), FieldElement(p.y, s)
        if p == q:
            lam = (FieldElement(3 * p.x * p.x + self.a, s)
                   * FieldElement(2 * p.y, s).inverse())
        else:
            xq, yq = FieldElement(q.x, s), FieldElement(q.y, s)
            lam = (yq - yp) * (xq - xp).inverse()
        xr = lam * lam - xp - FieldElement(q.x, s)
        yr = lam * (xp - xr) - yp
        return Point(xr.value, yr.value)

    def scalar_mul(self, k: int, p: Point) -> Point:
        """k-fold sum of p via double-and-add; k = 0 gives O."""
        if not isinstance(k, int) or k < 0:
            raise ValueError("scalar must be a non-negative integer")
        self._require_on_curve(p)
        result, addend = INFINITY, p
        while k:
            if k & 1:
                result = self._add(result, addend)
            addend = self._add(addend, addend)
            k >>= 1
        return result

    # -- enumeration and derived quantities --------------------------------

    def affine_points(self) -> list[Point]:
        """All affine points, sorted by (x, y). Cached after the first call."""
        if self._affine is None:
            if self.s > self.enumeration_bound:
                raise CapacityError(
                    f"field size {self.s} exceeds enumeration bound {self.enumeration_bound}"
                )
            pts = []
            for x in range(self.s):
                rhs = FieldElement(x * x * x + self.a * x + self.b, self.s)
                for root in sqrt_candidates(rhs):
                    pts.append(Point(x, root.value))
            pts.sort(key=lambda p: (p.x, p.y))
            self._affine = pts
        return self._affine

    def points(self) -> list[Point]:
        """The full group: O first, then affine points sorted by (x, y)."""
        return [INFINITY] + self.affine_points()

    def order(self) -> int:
        return len(self.affine_points()) + 1

    def point_order(self, p: Point) -> int:
        """Smallest n >= 1 with n*p = O; the order of O itself is 1."""
        self._require_on_curve(p)
        if p.is_infinity:
            return 1
        n, acc = 1, p
        while not acc.is_infinity:
            acc = self._add(acc, p)
            n += 1
        return n

    def cofactor(self, p: Point) -> int:
        """Group order divided by the order of p (an integer by Lagrange)."""
        return self.order() // self.point_order(p)

    def nearest_affine(self, x: float, y: float) -> Point:
        """Affine point minimizing squared Euclidean distance to (x, y).

        Ties resolve to the lexicographically smallest point; iteration over
        the sorted point list with a strict comparison guarantees that. This
        is the single projection routine shared by the switching map and the
        partition export, so the two can never disagree.
        """
        best: Point | None = None
        best_d = math.inf
        for p in self.affine_points():
            dx = p.x - x
            dy = p.y - y
            d = dx * dx + dy * dy
            if d < best_d:
                best, best_d = p, d
        if best is None:
            raise ConfigError("curve has no affine points", path="curve")
        return best
