"""Price profiles and the price classes UNI, ASC, DESC and SIGN."""

from __future__ import annotations

from fractions import Fraction

from .model import Instance, q


def _sign(x) -> int:
    return (x > 0) - (x < 0)


def make_price_profile(kind: str, instance: Instance, *args) -> tuple:
    """Build a price vector of length ``instance.T``.

    kinds: ``uniform(c)``, ``ascending(start, step)``, ``descending(start, step)``,
    ``supply_sign(magnitudes)`` and ``explicit(values)``.
    """
    T = instance.T
    if kind == "uniform":
        (c,) = args
        return (q(c),) * T
    if kind in ("ascending", "descending"):
        start, step = q(args[0]), q(args[1])
        if step <= 0:
            raise ValueError(f"{kind} prices need a positive step, got {step}")
        sign = 1 if kind == "ascending" else -1
        return tuple(start + sign * step * t for t in range(T))
    if kind == "supply_sign":
        (magnitudes,) = args
        mags = tuple(q(m) for m in magnitudes)
        if len(mags) != T:
            raise ValueError(f"supply_sign needs {T} magnitudes, got {len(mags)}")
        out = []
        for t, m in enumerate(mags, 1):
            if m < 0:
                raise ValueError(f"magnitude at t={t} must be >= 0, got {m}")
            sign = -_sign(instance.net_supply(t))
            if sign != 0 and m == 0:
                raise ValueError(f"magnitude at t={t} must be > 0 where net supply is nonzero")
            out.append(sign * m)
        return tuple(out)
    if kind == "explicit":
        (values,) = args
        values = tuple(q(v) for v in values)
        if len(values) != T:
            raise ValueError(f"expected {T} prices, got {len(values)}")
        return values
    raise ValueError(f"unknown price kind {kind!r}")


def classify_prices(prices, instance: Instance, strict: bool = False) -> set:
    """Return the subset of {"UNI", "ASC", "DESC", "SIGN"} the profile belongs to.

    ASC and DESC are weak by default; ``strict=True`` demands strict monotonicity.
    """
    p = tuple(q(x) for x in prices)
    if len(p) != instance.T:
        raise ValueError(f"expected {instance.T} prices, got {len(p)}")
    pairs = list(zip(p, p[1:]))
    out = set()
    if all(a == b for a, b in pairs):
        out.add("UNI")
    if all((a < b) if strict else (a <= b) for a, b in pairs):
        out.add("ASC")
    if all((a > b) if strict else (a >= b) for a, b in pairs):
        out.add("DESC")
    if all(_sign(pt) == -_sign(instance.net_supply(t)) for t, pt in enumerate(p, 1)):
        out.add("SIGN")
    return out


def parse_prices(text: str, instance: Instance) -> tuple:
    """Parse the command-line price syntax.

    ``1,2,3`` | ``uniform:c`` | ``asc:start,step`` | ``desc:start,step`` | ``sign:m1,...,mT``
    """
    if ":" in text:
        head, _, rest = text.partition(":")
        vals = [v for v in rest.split(",") if v]
        kinds = {"uniform": "uniform", "asc": "ascending", "desc": "descending"}
        if head in kinds:
            return make_price_profile(kinds[head], instance, *vals)
        if head == "sign":
            return make_price_profile("supply_sign", instance, vals)
        raise ValueError(f"unknown price form {head!r}")
    return make_price_profile("explicit", instance, [v.strip() for v in text.split(",")])


def default_prices(instance: Instance) -> tuple:
    if instance.prices is not None:
        return instance.prices
    return tuple(Fraction(t) for t in range(1, instance.T + 1))
