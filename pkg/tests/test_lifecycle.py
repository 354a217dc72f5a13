import warnings

import pytest

from patternguard.dsl import Align, Base, ClassAtom, Count, Delim, EnumAtom, Literal, Pattern, Recursive, Rep, matcher_for, sample_string
from patternguard.gentree import default_tree
from patternguard.lifecycle import (
    CORRECT,
    ERROR,
    NEEDS_RELEARN,
    NO_OP,
    UPDATED,
    FeedbackRecord,
    apply_feedback,
    generate_examples,
    incremental_update,
    latest_records,
    validate_batch,
)

T = default_tree()
M = matcher_for(T)
FIG1 = Recursive(Align((Base(Pattern((ClassAtom("UPPER"),))), Delim(","),
                        Base(Pattern((ClassAtom("DIGIT"),))))), ";")
DIGITS = Base(Pattern((ClassAtom("DIGIT"),)))


def test_validate_batch_examples():
    rep = validate_batch([FIG1], ["CSS,12345;JAVA,4567", "CSS,12345:JAVA"], T)
    ok, bad = rep.entries
    assert ok.passed and ok.pattern_index == 0
    assert not bad.passed and bad.fail_offset == 9
    assert rep.summary() == {"total": 2, "passed": 1, "failed": 1}
    empty = validate_batch([FIG1], [], T)
    assert empty.summary() == {"total": 0, "passed": 0, "failed": 0}
    with pytest.raises(ValueError):
        validate_batch([], ["x"])


def test_validate_pass_if_any_and_deepest_failure():
    letters = Base(Pattern((ClassAtom("LOWER"),)))
    rep = validate_batch([DIGITS, letters], ["abc", "12", "ab1"], T)
    assert [e.passed for e in rep.entries] == [True, True, False]
    assert rep.entries[0].pattern_index == 1
    assert rep.entries[2].pattern_index == 1 and rep.entries[2].fail_offset == 2


def test_update_nca_widening():
    out, status = incremental_update([DIGITS], "12a3", T)
    assert status == UPDATED
    assert out == [Base(Pattern((ClassAtom("ALNUM"),)))]


def test_update_no_op():
    out, status = incremental_update([DIGITS], "123", T)
    assert status == NO_OP and out == [DIGITS]


def test_update_count_widening():
    k = Recursive(Base(Pattern((ClassAtom("LOWER"),))), ";", Count.exactly(3))
    out, status = incremental_update([k], "a;b", T)
    assert status == UPDATED and out[0].count == Count(2, 3)


def test_update_structural_needs_relearn():
    out, status = incremental_update([FIG1], "CSS,12345:JAVA", T)
    assert status == NEEDS_RELEARN and out == [FIG1]
    k = Base(Pattern((ClassAtom("ALNUM"),)))
    assert incremental_update([k], "ab-cd", T).status == NEEDS_RELEARN


def test_update_enum_and_literal():
    k = Base(Pattern((EnumAtom(("DELETE", "ADD")), Literal(" "), ClassAtom("DIGIT"))))
    out, status = incremental_update([k], "MERGE 12", T)
    assert status == UPDATED
    assert M.accepts(out[0], "MERGE 12") and M.accepts(out[0], "ADD 7")


def test_update_fixed_rep_grows():
    k = Base(Pattern((ClassAtom("DIGIT", Rep.exactly(3)),)))
    out, status = incremental_update([k], "1234", T)
    assert status == UPDATED and M.accepts(out[0], "123") and M.accepts(out[0], "1234")


def test_update_keeps_previous_strings():
    k = Base(Pattern((ClassAtom("DIGIT"), Literal("-"), ClassAtom("UPPER"))))
    before = [sample_string(k, i) for i in range(300)]
    out, status = incremental_update([k], "12-Ab", T)
    assert status == UPDATED
    assert all(M.accepts(out[0], s) for s in before + ["12-Ab"])


def test_generate_examples_fig8():
    before = Base(Pattern((ClassAtom("DIGIT"), ClassAtom("ALPHA"), ClassAtom("DIGIT"))))
    after = Base(Pattern((ClassAtom("DIGIT"), Literal("x"), ClassAtom("DIGIT"))))
    ex = generate_examples(before, after, T, k=6, seed=1)
    assert ex and len(ex) <= 6
    assert any(e.sibling_class == "UPPER" for e in ex)
    for e in ex:
        assert M.accepts(before, e.candidate) and not M.accepts(after, e.candidate)
        assert e.atom_index == 1


def test_generate_examples_empty_cases():
    assert generate_examples(DIGITS, DIGITS, T) == []
    before = Base(Pattern((ClassAtom("ALNUM"),)))
    assert generate_examples(before, DIGITS, T, k=0) == []
    assert generate_examples(before, DIGITS, T, round_index=3, max_rounds=3) == []
    assert len(generate_examples(before, DIGITS, T, k=4)) <= 4


def test_feedback_correct_delegates():
    rec = FeedbackRecord("12a3", CORRECT, 1.0)
    res = apply_feedback([DIGITS], [rec], T)
    assert res.patterns == incremental_update([DIGITS], "12a3", T).patterns
    assert res.statuses == {"12a3": UPDATED}


def test_feedback_demotes_accepting_pattern():
    a = Base(Pattern((ClassAtom("UPPER"),)))
    b = Base(Pattern((ClassAtom("ALNUM"),)))
    c = Base(Pattern((ClassAtom("LOWER"),)))
    res = apply_feedback([a, b, c], [FeedbackRecord("a1", ERROR, 1.0)], T)
    assert res.patterns == [a, c, b]
    assert res.negatives == ["a1"]


def test_feedback_empty_and_idempotent():
    assert apply_feedback([DIGITS], [], T).patterns == [DIGITS]
    recs = [FeedbackRecord("12a3", CORRECT, 1.0), FeedbackRecord("zz", ERROR, 2.0)]
    once = apply_feedback([DIGITS], recs, T).patterns
    twice = apply_feedback(once, recs, T).patterns
    assert once == twice


def test_contradictory_feedback_keeps_latest():
    recs = [FeedbackRecord("x1", CORRECT, 1.0), FeedbackRecord("x1", ERROR, 2.0)]
    with pytest.warns(UserWarning, match="contradictory"):
        kept = latest_records(recs)
    assert kept == [recs[1]]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = apply_feedback([DIGITS], recs, T)
    assert res.patterns == [DIGITS] and res.statuses == {"x1": "recorded"}


def test_feedback_record_validation():
    with pytest.raises(ValueError):
        FeedbackRecord("x", "maybe")
