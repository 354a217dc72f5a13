import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from patternguard import PatternValidator, learn_patterns
from patternguard.config import LearnConfig
from patternguard.lifecycle import ERROR, FeedbackRecord
from patternguard.syntax import serialize

TRAIN = ["CSS,12345;JAVA,4567", "GO,1;RUST,22", "HTML,9", "SQL,12;KT,99999;PHP,4", "ELM,5",
         "CSS,77;GO,8", "JAVA,123", "RUST,4;HTML,5", "PHP,66", "KT,1;SQL,2"]


def test_params_and_clone():
    est = PatternValidator(top_k=2, depth=2)
    assert est.get_params()["top_k"] == 2
    c = clone(est)
    assert c.get_params() == est.get_params()
    est.set_params(beta=0.5)
    assert est.beta == 0.5


def test_fit_predict():
    est = PatternValidator().fit(TRAIN)
    pred = est.predict(["CSS,1;GO,2", "CSS,12345:JAVA", "css"])
    assert pred.tolist() == [1, -1, -1]
    assert est.n_features_in_ == 1 and est.training_count_ == len(TRAIN)
    scores = est.score_samples(["CSS,1", "CSS,12345:JAVA"])
    assert scores[0] == 1.0 and 0 < scores[1] < 1
    assert est.decision_function(["CSS,1"])[0] == 0
    assert est.transform(["CSS,1"]).shape == (1, 1)


def test_fit_accepts_column_array():
    est = PatternValidator().fit(np.array(TRAIN, dtype=object).reshape(-1, 1))
    assert all(est.predict(np.array(TRAIN, dtype=object)) == 1)


def test_not_fitted():
    with pytest.raises(NotFittedError):
        PatternValidator().predict(["x"])


def test_fit_rejects_bad_input():
    with pytest.raises(TypeError):
        PatternValidator().fit(["a", 1])
    with pytest.raises(ValueError):
        PatternValidator().fit(["", ""])


def test_no_refine_variant():
    plain = PatternValidator(refine=False).fit(TRAIN)
    assert plain.patterns_ == plain.skeletons_
    refined = PatternValidator().fit(TRAIN)
    assert refined.patterns_ != refined.skeletons_


def test_report_and_strings():
    est = PatternValidator().fit(TRAIN)
    rep = est.report(["CSS,12345:JAVA"])
    assert rep.entries[0].fail_offset == 9
    assert est.pattern_strings()[0].startswith("Recursive{Align{")


def test_partial_fit_and_feedback():
    est = PatternValidator().fit(TRAIN)
    est.partial_fit(["CSS,12345:JAVA"])
    assert est.update_statuses_ == ["needs-relearn"]
    est.apply_feedback([FeedbackRecord("CSS,1", ERROR, 1.0)])
    assert est.feedback_statuses_ == {"CSS,1": "recorded"}
    fresh = PatternValidator().partial_fit(TRAIN)
    assert hasattr(fresh, "patterns_")


def test_from_patterns():
    fitted = PatternValidator().fit(TRAIN)
    est = PatternValidator.from_patterns(fitted.patterns_, fitted.skeletons_)
    assert est.predict(["GO,5"]).tolist() == [1]
    assert isinstance(est.generate_examples(k=2), list)


def test_learn_patterns_residual_skeleton():
    values = ["12-34"] * 8 + ["abc"] * 4
    res = learn_patterns(values, LearnConfig(top_k=2))
    from patternguard.dsl import matcher_for
    m = matcher_for()
    assert all(any(m.accepts(k, v) for k in res.patterns) for v in values)
    assert len(res.patterns) <= 2
    assert all(isinstance(serialize(k), str) for k in res.patterns)
