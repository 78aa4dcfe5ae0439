"""Text form of expression trees, readable back by :mod:`cauchyop.parser`."""

from __future__ import annotations

from .nodes import Add, Deriv, Func, Mul, Num, Param, Pow, Pressure, Sym, Var

# binding strength: sum < product < power < atom
_SUM, _PROD, _POW, _ATOM = 0, 1, 2, 3


def _num(v):
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def _prec(e):
    if isinstance(e, Add):
        return _SUM if len(e.args) != 1 else _prec(e.args[0])
    if isinstance(e, Mul):
        return _PROD
    if isinstance(e, Num):
        if e.value < 0:
            return _SUM
        return _ATOM if e.value.denominator == 1 else _PROD
    if isinstance(e, Pow):
        return _POW
    return _ATOM


def _wrap(e, need):
    s = to_text(e)
    return f"({s})" if _prec(e) < need else s


def _negated(e):
    """If ``e`` prints with a leading minus, return the text after it."""
    if isinstance(e, Num) and e.value < 0:
        return _num(-e.value)
    if isinstance(e, Mul) and e.args and isinstance(e.args[0], Num) and e.args[0].value < 0:
        c = -e.args[0].value
        rest = e.args[1:]
        if not rest:
            return _num(c)
        body = _product(rest)
        return body if c == 1 else f"{_num(c)}*{body}"
    return None


def _product(args):
    parts = []
    for i, a in enumerate(args):
        if isinstance(a, Num) and i == 0 and a.value >= 0:
            parts.append(_num(a.value))
        elif isinstance(a, Num):
            parts.append(f"({_num(a.value)})")
        else:
            parts.append(_wrap(a, _PROD if i == 0 else _POW))
    return "*".join(parts)


def to_text(e):
    if isinstance(e, Num):
        return ("-" + _num(-e.value)) if e.value < 0 else _num(e.value)
    if isinstance(e, (Param, Var, Sym)):
        return e.name
    if isinstance(e, Pressure):
        return f"leray_pressure({','.join(e.fields)})"
    if isinstance(e, Func):
        return f"{e.name}({to_text(e.arg)})"
    if isinstance(e, Deriv):
        if not e.alpha:
            return to_text(e.arg)
        vars_ = ",".join(v for v, c in e.alpha for _ in range(c))
        return f"D({to_text(e.arg)};{vars_})"
    if isinstance(e, Pow):
        ex = e.exponent
        if isinstance(ex, Num) and ex.value >= 0 and ex.value.denominator == 1:
            ex_s = _num(ex.value)
        else:
            ex_s = f"({to_text(ex)})"
        return f"{_wrap(e.base, _ATOM)}^{ex_s}"
    if isinstance(e, Mul):
        if not e.args:
            return "1"
        neg = _negated(e)
        # "-a*b" reads back as -(a*b)
        return "-" + neg if neg is not None else _product(e.args)
    if isinstance(e, Add):
        if not e.args:
            return "0"
        out = []
        for i, a in enumerate(e.args):
            neg = _negated(a)
            if neg is not None:
                out.append(("-" if i == 0 else " - ") + neg)
            else:
                s = _wrap(a, _PROD)
                out.append(s if i == 0 else " + " + s)
        return "".join(out)
    raise TypeError(f"cannot print {type(e).__name__}")

