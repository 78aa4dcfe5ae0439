import pytest

from cauchyop.expr import Deriv, Func, Pressure, Sym, normalize
from cauchyop.parser import ParseError, parse_expr, parse_system, serialize
from cauchyop.system import SemanticError

BURGERS = "eq: dt(v) = nu*D(v;x,x) - v*D(v;x); init: v = sin(x);"


def test_burgers_system():
    s = parse_system(BURGERS)
    assert s.dim == 1
    assert s.unknowns == ("v",)
    assert s.params == {"nu": None}
    assert s.rhs["v"] == normalize(parse_expr("nu*D(v;x,x) - v*D(v;x)", unknowns=["v"]))
    assert s.init["v"] == normalize(parse_expr("sin(x)"))


def test_ode_system_is_zero_dimensional():
    s = parse_system("eq: dt(v) = v^2; init: v = 1;")
    assert s.dim == 0
    assert s.space_vars == ()


def test_init_for_undeclared_unknown():
    with pytest.raises(SemanticError) as info:
        parse_system("eq: dt(v) = D(v;x); init: w = 0;")
    assert str(info.value) == "unknown w not declared"
    assert info.value.symbol == "w"


def test_burgers_round_trip_is_bit_identical():
    s = parse_system("param nu = 0.1;\n" + BURGERS)
    text = serialize(s)
    again = parse_system(text)
    assert again == s
    assert serialize(again) == text


def test_round_trip_keeps_flags_and_multi_dim():
    text = """
    dim 2;
    unknowns a, b;
    param k = -2.5;
    time_dependent;
    eq: dt(a) = D(a;x1,x2) + s*b;
    eq: dt(b) = a*x2;
    init: a = cos(x1);
    """
    s = parse_system(text)
    assert s.time_dependent and s.dim == 2 and s.params == {"k": -2.5}
    assert "b" not in s.init
    assert parse_system(serialize(s)) == s


def test_unknowns_inferred_in_equation_order():
    s = parse_system("eq: dt(q) = p; eq: dt(p) = -q;")
    assert s.unknowns == ("q", "p")


def test_statement_split_skips_semicolons_inside_derivatives():
    s = parse_system("eq: dt(u) = D(u;x,x); init: u = x;")
    assert s.rhs["u"] == Deriv(Sym("u"), ["x", "x"])


def test_syntax_error_reports_line_and_column():
    with pytest.raises(ParseError) as info:
        parse_system("eq: dt(u) = u;\neq: dt(w) = w + * 2;")
    assert (info.value.line, info.value.col) == (2, 17)


def test_unbalanced_parenthesis():
    with pytest.raises(ParseError):
        parse_expr("sin(x")
    with pytest.raises(ParseError):
        parse_expr("u)")


def test_mixed_coordinate_names_are_a_dimension_error():
    with pytest.raises(SemanticError):
        parse_system("eq: dt(u) = x*u + x1;")


def test_coordinate_beyond_declared_dim():
    with pytest.raises(SemanticError) as info:
        parse_system("dim 1; eq: dt(u) = x2*u;")
    assert info.value.symbol == "x2"


def test_clock_symbol_needs_time_dependent():
    with pytest.raises(SemanticError):
        parse_system("eq: dt(u) = s;")
    assert parse_system("time_dependent; eq: dt(u) = s;").time_dependent


def test_derivative_of_parameter_is_rejected():
    with pytest.raises(SemanticError) as info:
        parse_system("eq: dt(v) = D(w;x);")
    assert info.value.symbol == "w"


def test_initial_data_may_not_mention_unknowns():
    with pytest.raises(SemanticError):
        parse_system("eq: dt(u) = u; init: u = u + 1;")


def test_power_is_right_associative_and_binds_tighter_than_minus():
    assert normalize(parse_expr("2^3^2")) == normalize(parse_expr("2^9"))
    assert normalize(parse_expr("-u^2")) == normalize(parse_expr("-(u^2)"))


def test_pressure_marker_round_trip():
    e = parse_expr("leray_pressure(v1,v2)", unknowns=["v1", "v2"])
    assert e == Pressure(("v1", "v2"))
    assert parse_expr(serialize(e), unknowns=["v1", "v2"]) == e


def test_functions_and_reciprocal():
    e = parse_expr("recip(1 + u)", unknowns=["u"])
    assert isinstance(e, Func) and e.name == "recip"
    with pytest.raises(ParseError):
        parse_expr("tan(u)")


def test_identifier_resolution_policy():
    e = parse_expr("a*b", unknowns=["a"])
    assert normalize(e) == normalize(parse_expr("a*b", params=["b"]))
