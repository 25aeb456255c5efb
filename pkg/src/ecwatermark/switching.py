"""Secret-keyed switching of watermark filter taps.

One evaluation takes the last shared output sample through three stages:

1. scale the sample into curve coordinates through two fixed nonlinear maps
   (one per coordinate), reduced into [0, s);
2. snap those coordinates to the nearest affine curve point, then multiply
   that point by the secret scalar;
3. run the resulting point through a per-tap polynomial feature map and
   clamp the outcome into the admissible tap set (nonzero leading tap,
   contractive tail), which keeps the inverse filter provably stable.

Both endpoints evaluate this exact code path, in a fixed floating-point
operation order, on identically configured values; equal inputs therefore
produce bit-identical taps with no communication beyond the initial shared
configuration.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass

from .curve import Curve, Point
from .errors import ConfigError, ConfigurationWarning, InputError

__all__ = [
    "FirParams",
    "ThetaValidation",
    "SwitchingConfig",
    "SwitchOutcome",
    "alpha1",
    "alpha2",
    "eta1",
    "eta2",
    "validate_theta",
    "sigma",
    "sigma_detail",
]


@dataclass(frozen=True)
class FirParams:
    """FIR tap vector (b0, ..., bn). A plain carrier: admissibility of the
    taps is checked by validate_theta, not at construction, so that
    diagnostic code can evaluate inadmissible vectors too."""

    taps: tuple[float, ...]

    def __post_init__(self):
        taps = tuple(float(v) for v in self.taps)
        if len(taps) < 1:
            raise ValueError("need at least the leading tap b0")
        if not all(math.isfinite(v) for v in taps):
            raise ValueError("taps must be finite")
        object.__setattr__(self, "taps", taps)

    @property
    def b0(self) -> float:
        return self.taps[0]

    @property
    def order(self) -> int:
        return len(self.taps) - 1

    def __len__(self):
        return len(self.taps)

    def __iter__(self):
        return iter(self.taps)

    def __getitem__(self, i):
        return self.taps[i]


@dataclass(frozen=True)
class ThetaValidation:
    """Outcome of the admissibility test, naming the first violated condition."""

    ok: bool
    violation: str | None = None

    def __bool__(self) -> bool:
        return self.ok


def validate_theta(taps) -> ThetaValidation:
    """Check the three admissibility conditions on a tap vector.

    In order: b0 nonzero, |b1| strictly below 1, and the tail radius
    sum_{i>=2} |b_i / b0| strictly below 1 - |b1|. The report names the
    first condition that fails.
    """
    if isinstance(taps, FirParams):
        taps = taps.taps
    taps = tuple(float(v) for v in taps)
    if len(taps) < 2:
        raise ValueError("need at least taps b0 and b1")
    if taps[0] == 0.0:
        return ThetaValidation(False, "b0 must be nonzero")
    if abs(taps[1]) >= 1.0:
        return ThetaValidation(False, "|b1| must be below 1")
    total = 0.0
    for v in taps[2:]:
        total += abs(v / taps[0])
    if total >= 1.0 - abs(taps[1]):
        return ThetaValidation(False, "sum(|b_i/b0|, i>=2) must stay below 1 - |b1|")
    return ThetaValidation(True)


# squashed second tap never exceeds this in magnitude
_B1_CAP = 1.0 - 2.0**-20


def _mod_interval(value: float, s: int) -> float:
    # Python's float % can land exactly on s for tiny negative inputs;
    # fold that case back to 0 so results stay in [0, s).
    r = value % s
    return 0.0 if r == s else r


def _scale_component(y: float, coeffs, s: int) -> float:
    if len(coeffs) < 2:
        raise ValueError("scaling needs at least the two arctangent coefficients")
    t = abs(y)
    inner = 0.0
    for c in reversed(coeffs[2:]):
        inner = inner * t + c
    value = coeffs[0] * math.atan(coeffs[1] * y) + inner * t * t
    if not math.isfinite(value):
        raise InputError(f"scaling of y={y!r} overflowed double precision")
    return _mod_interval(value, s)


def alpha1(y: float, coeffs_x, coeffs_y, s: int) -> tuple[float, float]:
    """Scale a measurement into real coordinates in [0, s) x [0, s).

    Each coordinate is a0*atan(a1*y) + sum_{j>=2} a_j*|y|^j reduced mod s,
    with its own coefficient list, so the two coordinates differ in general.
    The polynomial part is evaluated by Horner's rule so both endpoints
    round identically.
    """
    if not isinstance(y, (int, float)) or not math.isfinite(y):
        raise InputError(f"measurement must be finite, got {y!r}")
    return (_scale_component(y, coeffs_x, s), _scale_component(y, coeffs_y, s))


def alpha2(pt: tuple[float, float], curve: Curve) -> Point:
    """Project scaled coordinates onto the nearest affine curve point.

    O is never a candidate; equidistant candidates resolve to the
    lexicographically smallest point.
    """
    return curve.nearest_affine(pt[0], pt[1])


def eta1(point: Point, rows) -> tuple[float, ...]:
    """Polynomial feature map of a curve point, one coefficient row per tap.

    Each output component i is sum_j rows[i][j] * ||point||^j where the norm
    treats the coordinates as their canonical integers in [0, s-1].
    """
    if point.is_infinity:
        raise ValueError("the identity point has no coordinates to map")
    t = math.hypot(point.x, point.y)
    out = []
    for row in rows:
        acc = 0.0
        for c in reversed(row):
            acc = acc * t + c
        out.append(acc)
    return tuple(out)


def eta2(b_raw, *, floor: float, slope: float, margin: float) -> FirParams:
    """Clamp a raw tap vector into the admissible set. Total by construction.

    b0 keeps its raw value when |raw| >= floor, else it is floored to
    +-floor (the sign of a raw zero counts as +). b1 is squashed through
    x / (|x| + slope), so |b1| < 1 always. The tail is rescaled so that
    sum |b_i/b0| equals 1 - |b1| - margin exactly, using the clamped b0 and
    b1; an all-zero tail is passed through untouched, and a tail whose
    scale is too extreme relative to b0 to normalize in double precision
    collapses to zero. When the configured margin leaves no headroom
    against 1 - |b1| it is shrunk to half the headroom, keeping the map
    total.

    With floor >= 1 every output provably has a stable inverse filter; the
    configuration layer warns when a smaller floor is chosen.
    """
    b_raw = tuple(float(v) for v in b_raw)
    if len(b_raw) < 2:
        raise ValueError("need at least raw taps for b0 and b1")
    if not all(math.isfinite(v) for v in b_raw):
        raise ValueError("raw taps must be finite")
    raw0 = b_raw[0]
    if abs(raw0) >= floor:
        b0 = raw0
    else:
        b0 = floor if raw0 >= 0.0 else -floor
    raw1 = b_raw[1]
    b1 = raw1 / (abs(raw1) + slope)
    # the squash is strictly inside (-1, 1) in exact arithmetic, but double
    # rounding reaches +-1.0 once |raw1| dwarfs the slope; cap with margin
    if b1 > _B1_CAP:
        b1 = _B1_CAP
    elif b1 < -_B1_CAP:
        b1 = -_B1_CAP
    tail = b_raw[2:]
    if all(v == 0.0 for v in tail):
        return FirParams((b0, b1) + (0.0,) * len(tail))
    headroom = 1.0 - abs(b1)
    eps = min(margin, 0.5 * headroom)
    denom = 0.0
    for v in tail:
        denom += abs(v / b0)
    if denom == 0.0 or math.isinf(denom):
        # tail magnitudes vanish (or blow past double range) relative to b0;
        # a zero tail is the only representable admissible outcome
        return FirParams((b0, b1) + (0.0,) * len(tail))
    # divide before scaling: each ratio is bounded by |b0|, so no overflow
    return FirParams((b0, b1) + tuple((v / denom) * (headroom - eps) for v in tail))


@dataclass(frozen=True)
class SwitchingConfig:
    """The shared secret material held by both endpoints.

    Covers the curve, the secret scalar, the two scaling coefficient lists,
    the per-tap feature-map coefficient rows, and the three clamp constants.
    Serialized to a documented JSON schema; both endpoints must load
    byte-identical files.
    """

    curve: Curve
    l: int
    alpha_x: tuple[float, ...]
    alpha_y: tuple[float, ...]
    eta1_rows: tuple[tuple[float, ...], ...]
    n_h: int
    eta_floor: float = 1.0
    eta_margin: float = 0.05
    eta_slope: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "alpha_x", tuple(float(v) for v in self.alpha_x))
        object.__setattr__(self, "alpha_y", tuple(float(v) for v in self.alpha_y))
        object.__setattr__(
            self, "eta1_rows", tuple(tuple(float(v) for v in row) for row in self.eta1_rows)
        )
        if not isinstance(self.l, int) or self.l < 1:
            raise ConfigError("secret scalar must be a positive integer", path="l")
        for name, coeffs in (("alpha.x", self.alpha_x), ("alpha.y", self.alpha_y)):
            if len(coeffs) < 2:
                raise ConfigError("need at least 2 coefficients", path=name)
            if not all(math.isfinite(v) for v in coeffs):
                raise ConfigError("coefficients must be finite", path=name)
        if not isinstance(self.n_h, int) or self.n_h < 1:
            raise ConfigError("filter order must be a positive integer", path="n_h")
        if len(self.eta1_rows) != self.n_h + 1:
            raise ConfigError(
                f"expected {self.n_h + 1} coefficient rows, got {len(self.eta1_rows)}",
                path="eta1",
            )
        for i, row in enumerate(self.eta1_rows):
            if len(row) < 1 or not all(math.isfinite(v) for v in row):
                raise ConfigError("each row needs at least one finite coefficient",
                                  path=f"eta1[{i}]")
        if not (self.eta_floor > 0.0 and math.isfinite(self.eta_floor)):
            raise ConfigError("tap floor must be positive", path="eta_floor")
        if not (self.eta_slope > 0.0 and math.isfinite(self.eta_slope)):
            raise ConfigError("squash slope must be positive", path="eta_slope")
        if not (0.0 < self.eta_margin < 1.0):
            raise ConfigError("margin must lie in (0, 1)", path="eta_margin")
        if self.eta_floor < 1.0:
            warnings.warn(
                "tap floor below 1.0: admissible taps are still produced but the "
                "inverse filter is no longer provably stable",
                ConfigurationWarning,
                stacklevel=2,
            )
        if self.l % self.curve.order() == 0:
            warnings.warn(
                "secret scalar is a multiple of the group order, so every "
                "multiplication lands on the identity and the fallback rule "
                "always applies",
                ConfigurationWarning,
                stacklevel=2,
            )

    # -- serialization -----------------------------------------------------

    @classmethod
    def from_dict(cls, data: dict, path: str = "config") -> "SwitchingConfig":
        def need(d, key, where):
            if not isinstance(d, dict) or key not in d:
                raise ConfigError("missing required field", path=f"{where}.{key}")
            return d[key]

        curve_d = need(data, "curve", path)
        curve = Curve(
            need(curve_d, "a", f"{path}.curve"),
            need(curve_d, "b", f"{path}.curve"),
            need(curve_d, "s", f"{path}.curve"),
        )
        alpha = need(data, "alpha", path)
        try:
            return cls(
                curve=curve,
                l=need(data, "l", path),
                alpha_x=need(alpha, "x", f"{path}.alpha"),
                alpha_y=need(alpha, "y", f"{path}.alpha"),
                eta1_rows=need(data, "eta1", path),
                n_h=need(data, "n_h", path),
                eta_floor=float(data.get("eta_floor", 1.0)),
                eta_margin=float(data.get("eta_margin", 0.05)),
                eta_slope=float(data.get("eta_slope", 1.0)),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc), path=path) from exc

    def to_dict(self) -> dict:
        return {
            "curve": {"s": self.curve.s, "a": self.curve.a, "b": self.curve.b},
            "l": self.l,
            "n_h": self.n_h,
            "alpha": {"x": list(self.alpha_x), "y": list(self.alpha_y)},
            "eta1": [list(row) for row in self.eta1_rows],
            "eta_floor": self.eta_floor,
            "eta_margin": self.eta_margin,
            "eta_slope": self.eta_slope,
        }

    @classmethod
    def from_json(cls, text: str, path: str = "config") -> "SwitchingConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}", path=path) from exc
        return cls.from_dict(data, path=path)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def load(cls, filename) -> "SwitchingConfig":
        with open(filename, "r", encoding="utf-8") as fh:
            return cls.from_json(fh.read(), path=str(filename))

    def save(self, filename) -> None:
        with open(filename, "w", encoding="utf-8") as fh:
            fh.write(self.to_json() + "\n")


@dataclass(frozen=True)
class SwitchOutcome:
    """Every intermediate of one switching evaluation, for reports and tests."""

    scaled: tuple[float, float]
    generator_point: Point
    secret_multiple: Point
    fallback_used: bool
    raw_taps: tuple[float, ...]
    theta: FirParams


def sigma_detail(y_prev: float, cfg: SwitchingConfig) -> SwitchOutcome:
    """Full switching evaluation on the previous shared output sample.

    When the scalar multiple lands on the identity, the generator point
    itself is substituted; the rule is fixed in configuration and never
    depends on runtime data, so both endpoints agree without communication.
    """
    scaled = alpha1(y_prev, cfg.alpha_x, cfg.alpha_y, cfg.curve.s)
    p = alpha2(scaled, cfg.curve)
    s_pt = cfg.curve.scalar_mul(cfg.l, p)
    fallback = s_pt.is_infinity
    if fallback:
        s_pt = p
    raw = eta1(s_pt, cfg.eta1_rows)
    theta = eta2(raw, floor=cfg.eta_floor, slope=cfg.eta_slope, margin=cfg.eta_margin)
    return SwitchOutcome(scaled, p, s_pt, fallback, raw, theta)


def sigma(y_prev: float, cfg: SwitchingConfig) -> FirParams:
    """New tap vector from the previous shared output sample."""
    return sigma_detail(y_prev, cfg).theta
