"""Zippered rectangles ``(lam, pi, delta)``, the flow ``P^t``, the map ``U``
and the first-return map ``F`` to the transversal ``Y+ | Y-``.

A state keeps raw vectors plus a scalar ``log_scale`` ``s`` and represents
``(e^s lam, pi, e^-s delta)``. The flow only changes ``s``, so with rational
raw vectors area conservation and the commutation ``U P^t = P^t U`` are exact.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import BoundaryError, CapExceededError, InvalidInputError, NumericalError
from .induction import DEFAULT_CAP, IETPoint, _inverse_step, _log, _type_of, _zorich_raw
from .rauzy import Permutation, RauzyClass, rauzy_op

__all__ = [
    "ZipperedRectangle",
    "cone_check",
    "heights",
    "area",
    "a_params",
    "flow_Pt",
    "map_U",
    "in_transversal",
    "first_return_F",
    "random_zippered",
    "orbit_csv",
]


def cone_check(pi: Permutation, delta: Sequence) -> bool:
    """Membership of ``delta`` in the cone ``K(pi)``."""
    m = pi.m
    if len(delta) != m:
        return False
    top = bottom = 0
    for i in range(1, m):
        top += delta[i - 1]
        bottom += delta[pi.inv(i) - 1]
        if top > 0 or bottom < 0:
            return False
    return True


def _raw_heights(pi: Permutation, delta: Sequence) -> tuple:
    m = pi.m
    out = []
    for r in range(1, m + 1):
        h = -sum(delta[: r - 1]) + sum(delta[pi.inv(i) - 1] for i in range(1, pi(r)))
        out.append(h)
    return tuple(out)


@dataclass(frozen=True)
class ZipperedRectangle:
    lam: tuple
    pi: Permutation
    delta: tuple
    log_scale: float = 0

    def __post_init__(self):
        norm = lambda v: Fraction(v) if isinstance(v, int) else v  # noqa: E731
        object.__setattr__(self, "lam", tuple(norm(v) for v in self.lam))
        object.__setattr__(self, "delta", tuple(norm(v) for v in self.delta))
        if len(self.lam) != self.pi.m or len(self.delta) != self.pi.m:
            raise InvalidInputError("lambda, delta and pi sizes differ")
        if any(not v > 0 for v in self.lam):
            raise InvalidInputError("all lengths must be positive")

    @property
    def scale(self) -> float:
        return math.exp(self.log_scale)

    @property
    def actual_lambda(self) -> tuple:
        if self.log_scale == 0:
            return self.lam
        return tuple(float(v) * self.scale for v in self.lam)

    @property
    def actual_delta(self) -> tuple:
        if self.log_scale == 0:
            return self.delta
        return tuple(float(v) / self.scale for v in self.delta)

    @property
    def iet(self) -> IETPoint:
        return IETPoint.normalized(self.lam, self.pi)

    def to_json(self) -> dict:
        return {
            "lambda": [str(v) for v in self.lam],
            "pi": self.pi.to_json(),
            "delta": [str(v) for v in self.delta],
            "log_scale": float(self.log_scale),
            "area": str(area(self)),
        }


def heights(zr: ZipperedRectangle) -> tuple:
    raw = _raw_heights(zr.pi, zr.delta)
    if zr.log_scale == 0:
        return raw
    return tuple(float(h) / zr.scale for h in raw)


def area(zr: ZipperedRectangle):
    """``sum lam_r h_r``; independent of ``log_scale``."""
    return sum(l * h for l, h in zip(zr.lam, _raw_heights(zr.pi, zr.delta)))


def a_params(zr: ZipperedRectangle) -> tuple:
    """Veech parameters ``a_r = -(delta_1 + ... + delta_r)``."""
    out, acc = [], 0
    for d in zr.actual_delta:
        acc += d
        out.append(-acc)
    return tuple(out)


def flow_Pt(zr: ZipperedRectangle, t) -> ZipperedRectangle:
    if t == 0:
        return zr
    return replace(zr, log_scale=zr.log_scale + t)


def map_U(zr: ZipperedRectangle) -> ZipperedRectangle:
    c = _type_of(zr.lam, zr.pi)
    lam = _inverse_step(c, zr.pi, list(zr.lam))
    delta = _inverse_step(c, zr.pi, list(zr.delta))
    pi = rauzy_op(c, zr.pi)
    if not cone_check(pi, delta) and _is_exact(delta):
        raise ArithmeticError("image left the cone K(pi)")
    return ZipperedRectangle(tuple(lam), pi, tuple(delta), zr.log_scale)


def _is_exact(values) -> bool:
    return all(isinstance(v, Fraction) for v in values)


def in_transversal(zr: ZipperedRectangle) -> bool:
    """Membership in ``Y+`` (type a, ``a_m < 0``) or ``Y-`` (type b, ``a_m > 0``)."""
    c = _type_of(zr.lam, zr.pi)
    total = sum(zr.delta)
    if total == 0:
        raise BoundaryError("a_m(delta) = 0")
    return (c == "a") == (total > 0)


def first_return_F(zr: ZipperedRectangle, cap: int = DEFAULT_CAP):
    """First return to ``Y+ | Y-`` under the flow; returns ``(F(x), time)``.

    The input must have ``|lam| = 1`` and ``log_scale = 0``. Each step flows
    for ``tau0`` and applies ``U``; the result is renormalized so that
    ``|lam| = 1`` again, which keeps rational inputs exact.
    """
    if zr.log_scale != 0 or abs(sum(zr.lam) - 1) > 1e-12:
        raise InvalidInputError("first_return_F expects |lambda| = 1 and zero log-scale")
    if not in_transversal(zr):
        raise InvalidInputError("point is not on the transversal Y+ | Y-")
    # F covers exactly one Zorich step of the underlying interval exchange
    _, _, lam, pi, delta = _zorich_raw(list(zr.lam), zr.pi, cap, list(zr.delta))
    total = sum(delta)
    if total == 0:
        raise BoundaryError("a_m(delta) = 0 after the return")
    if (_type_of(lam, pi) == "a") != (total > 0):
        raise NumericalError("return point missed the transversal")
    norm = sum(lam)
    out = ZipperedRectangle(
        tuple(v / norm for v in lam), pi, tuple(v * norm for v in delta)
    )
    return out, -_log(norm)


def random_zippered(rng: np.random.Generator, where: Permutation | RauzyClass,
                    transversal: bool = False, max_tries: int = 100_000) -> ZipperedRectangle:
    """Dirichlet ``lam``, box-uniform ``delta`` rejected into ``K(pi)`` and
    rescaled to unit area; optionally also rejected into ``Y+ | Y-``."""
    members = where.members if isinstance(where, RauzyClass) else (where,)
    for _ in range(max_tries):
        pi = members[int(rng.integers(len(members)))]
        lam = tuple(float(v) for v in rng.dirichlet(np.ones(pi.m)))
        delta = tuple(float(v) for v in rng.uniform(-1.0, 1.0, pi.m))
        if not cone_check(pi, delta):
            continue
        zr = ZipperedRectangle(lam, pi, delta)
        a = area(zr)
        if a <= 0:
            continue
        zr = ZipperedRectangle(lam, pi, tuple(d / a for d in delta))
        if lam[pi.inv(pi.m) - 1] == lam[-1] or sum(delta) == 0:
            continue
        if transversal and not in_transversal(zr):
            continue
        return zr
    raise CapExceededError("rejection sampling did not produce a point")


def orbit_csv(zr: ZipperedRectangle, steps: int, cap: int = DEFAULT_CAP) -> str:
    """CSV log ``t, lambda, delta, area`` of an ``F``-orbit."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(["step", "t", "lambda", "delta", "area"])
    t = 0.0
    for k in range(steps + 1):
        writer.writerow([
            k,
            repr(t),
            " ".join(str(v) for v in zr.lam),
            " ".join(str(v) for v in zr.delta),
            str(area(zr)),
        ])
        if k < steps:
            zr, dt = first_return_F(zr, cap)
            t += dt
    return buf.getvalue()
