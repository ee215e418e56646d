from fractions import Fraction

import pytest

from tstts import formula as F
from tstts.smt import (
    HandshakeFailure, LaunchFailure, Session, SolverConfig, SolverVerdict, is_sat, solve, to_smt,
)

X, Y = F.Var("x", F.BOOL), F.Var("y", F.BOOL)
C = F.Var("c", F.CLOCK)
N = F.Var("n", F.bounded_int(2, 4))


def test_empty_stack_is_sat(solver):
    with Session(solver, "QF_LRA") as s:
        assert s.check() is SolverVerdict.SAT


def test_missing_binary():
    with pytest.raises(LaunchFailure):
        Session(SolverConfig(command=["/nonexistent/solver-binary"]))


def test_unsupported_logic(solver):
    with pytest.raises(HandshakeFailure):
        Session(solver, "QF_NOT_A_LOGIC")


def test_false_is_unsat(solver):
    with Session(solver) as s:
        s.assert_formula(F.FALSE)
        assert s.check() is SolverVerdict.UNSAT


def test_model_values(solver):
    with Session(solver) as s:
        s.assert_formula(F.And((X, F.Not(Y))))
        assert s.check() is SolverVerdict.SAT
        assert s.get_model([X, Y]) == {"x": True, "y": False}


def test_push_pop(solver):
    with Session(solver) as s:
        s.push()
        s.assert_formula(F.FALSE)
        assert s.check() is SolverVerdict.UNSAT
        s.pop()
        assert s.check() is SolverVerdict.SAT


def test_assumptions(solver):
    with Session(solver, "QF_LIA") as s:
        s.assert_formula(F.Implies(X, F.Cmp("<", N, F.num(2))))
        assert s.check([X]) is SolverVerdict.UNSAT
        assert s.check([Y]) is SolverVerdict.SAT


def test_exact_rationals_and_domains(solver):
    m = solve(solver, [F.ClockAtom(C, ">", Fraction(1)), F.ClockAtom(C, "<", Fraction(3, 2))], [C])
    assert 1 < m["c"] < Fraction(3, 2) and isinstance(m["c"], Fraction)
    # bounded ints carry their range; clock non-negativity is left to the encodings
    assert not is_sat(solver, [F.Cmp("<", N, F.num(2))], "QF_LIA")


def test_domain_constraint_survives_pop(solver):
    with Session(solver, "QF_LIA") as s:
        s.push()
        s.assert_formula(F.Cmp(">=", N, F.num(0)))
        s.pop()
        s.assert_formula(F.Cmp(">", N, F.num(4)))
        assert s.check() is SolverVerdict.UNSAT


def test_dump_dir(tmp_path):
    cfg = SolverConfig(dump_dir=str(tmp_path))
    with Session(cfg) as s:
        s.assert_formula(X)
        s.check()
    files = list(tmp_path.glob("*.smt2"))
    assert len(files) == 1
    assert "(check-sat" in files[0].read_text()


def test_printing():
    assert to_smt(F.ClockAtom(C, "<=", Fraction(5, 2))) == "(<= |c| (/ 5.0 2.0))"
