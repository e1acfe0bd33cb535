import pytest
from hypothesis import given
from hypothesis import strategies as st

from ppszkit.cnf import (Assignment, CnfFormula, ContractViolation, DimacsError, emit_dimacs,
                         is_satisfied_by, make_clause, parse_dimacs, restrict, restrict_all,
                         restrict_with_dirty)

from conftest import formulas


def test_parse_two_clauses():
    f = parse_dimacs("p cnf 2 2\n1 0\n-1 2 0")
    assert f.n == 2 and f.m == 2
    assert f.clauses == {(1,), (-1, 2)}


def test_parse_comments_and_percent_terminator():
    f = parse_dimacs("c hello\np cnf 3 1\nc mid\n1 -3 0\n%\n0\n")
    assert f.clauses == {(1, -3)}
    assert f.variables == {1, 2, 3}


def test_parse_clause_across_lines_and_unterminated_tail():
    f = parse_dimacs("p cnf 3 2\n1\n2 0 -3")
    assert f.clauses == {(1, 2), (-3,)}


def test_parse_bytes_and_duplicates():
    f = parse_dimacs(b"p cnf 2 3\n1 2 0\n2 1 0\n1 1 2 0\n")
    assert f.m == 1


def test_parse_empty_clause():
    f = parse_dimacs("p cnf 1 1\n0\n")
    assert f.has_empty_clause


@pytest.mark.parametrize("text, line", [
    ("1 2 0\np cnf 2 1\n", 1),
    ("p cnf 2 1\np cnf 2 1\n", 2),
    ("p cnf x 1\n", 1),
    ("p dnf 2 1\n", 1),
    ("p cnf 2 1\n1 a 0\n", 2),
    ("p cnf 2 1\n\n3 0\n", 3),
    ("p cnf 2 1\n1 -1 0\n", 2),
])
def test_parse_errors_name_line(text, line):
    with pytest.raises(DimacsError) as exc:
        parse_dimacs(text)
    assert exc.value.line == line
    assert f"line {line}" in str(exc.value)


def test_parse_missing_header():
    with pytest.raises(DimacsError):
        parse_dimacs("c only comments\n")


def test_make_clause_rejects_tautology_and_zero():
    with pytest.raises(ValueError):
        make_clause([1, -1])
    with pytest.raises(ValueError):
        make_clause([0])
    assert make_clause([3, -1, 3]) == (-1, 3)


def test_from_clauses_checks_variable_set():
    with pytest.raises(ContractViolation):
        CnfFormula.from_clauses([[1, 2]], [1])
    f = CnfFormula.from_clauses([[1]], [1, 5])
    assert f.n == 2 and f.k == 1


def test_restrict_worked():
    f = CnfFormula.from_clauses([[1, 2], [-1, 3], [2, 3]])
    g = restrict(f, 1)
    assert g.clauses == {(3,), (2, 3)}
    assert g.variables == {2, 3}
    h, dirty = restrict_with_dirty(f, -2)
    assert h.clauses == {(1,), (-1, 3), (3,)}
    assert dirty == {(1,), (3,)}


def test_restrict_may_create_empty_clause():
    f = CnfFormula.from_clauses([[1]])
    assert restrict(f, -1).has_empty_clause


def test_restrict_unknown_variable():
    with pytest.raises(ContractViolation):
        restrict(CnfFormula.from_clauses([[1]]), 2)


def test_assignment_views():
    a = Assignment.from_literals([1, -2])
    assert a[1] is True and a[2] is False
    assert a.literals == {1, -2}
    assert a.to_mask([1, 2]) == 1
    assert Assignment.from_mask([1, 2], 1) == a
    assert hash(Assignment({1: True, 2: False})) == hash(a)
    with pytest.raises(ContractViolation):
        Assignment.from_literals([1, -1])


def test_is_satisfied_requires_total():
    f = CnfFormula.from_clauses([[1, 2]])
    assert is_satisfied_by(f, {1: False, 2: True})
    assert not is_satisfied_by(f, {1: False, 2: False})
    with pytest.raises(ContractViolation):
        is_satisfied_by(f, {1: True})


def test_emit_uses_max_variable():
    f = CnfFormula.from_clauses([[1, -3]], [1, 3])
    assert emit_dimacs(f) == "p cnf 3 1\n1 -3 0\n"


@given(formulas(max_n=7, max_m=12))
def test_dimacs_round_trip(f):
    assert parse_dimacs(emit_dimacs(f)) == f


@given(formulas(max_n=6, max_m=10), st.data())
def test_restrictions_commute(f, data):
    vs = f.sorted_vars
    if len(vs) < 2:
        return
    x, y = data.draw(st.lists(st.sampled_from(vs), min_size=2, max_size=2, unique=True))
    lx = x if data.draw(st.booleans()) else -x
    ly = y if data.draw(st.booleans()) else -y
    assert restrict(restrict(f, lx), ly) == restrict(restrict(f, ly), lx)
    assert restrict_all(f, [lx, ly]) == restrict(restrict(f, lx), ly)


@given(formulas(max_n=6, max_m=10), st.data())
def test_restriction_semantics(f, data):
    v = data.draw(st.sampled_from(f.sorted_vars))
    lit = v if data.draw(st.booleans()) else -v
    g = restrict(f, lit)
    bits = data.draw(st.lists(st.booleans(), min_size=f.n, max_size=f.n))
    alpha = dict(zip(f.sorted_vars, bits))
    alpha[v] = lit > 0
    rest = {u: alpha[u] for u in g.variables}
    assert is_satisfied_by(f, alpha) == is_satisfied_by(g, rest)
