import json

import pytest

from app.core.exceptions import ConfigurationError, NotFoundException
from app.models import VerificationRun
from app.schemas.horizon import LemmaName
from app.services.verification import LEMMA_ORDER, get_run, list_runs, record_reports, run_lemma, run_suite, select_lemmas

SEED = 20240607


def test_select_lemmas():
    assert select_lemmas("all") == LEMMA_ORDER
    assert select_lemmas("hessian-rank") == [LemmaName.HESSIAN_RANK]
    with pytest.raises(ConfigurationError):
        select_lemmas("bogus")


def test_zero_samples_is_configuration_error(params):
    with pytest.raises(ConfigurationError):
        run_lemma(LemmaName.DOUBLE_CHAR, 0, SEED, params)


def test_same_seed_same_report(params):
    a = run_lemma(LemmaName.DOUBLE_CHAR, 20, SEED, params)
    b = run_lemma(LemmaName.DOUBLE_CHAR, 20, SEED, params)
    assert a == b


def test_suite_order(params):
    reports = run_suite("all", 10, SEED, params)
    assert [r.lemma for r in reports] == LEMMA_ORDER
    assert all(r.passed for r in reports)


def test_record_and_list_runs(params, db_session):
    reports = run_suite("all", 10, SEED, params)
    rows = record_reports(db_session, reports, SEED, params)
    assert [row.lemma for row in rows] == [lemma.value for lemma in LEMMA_ORDER]
    assert all(row.id is not None and row.created_at is not None for row in rows)

    stored = json.loads(rows[0].report_json)
    assert stored["pass"] is True
    assert json.loads(rows[0].params_json)["r_s"] == 2.0

    total, items = list_runs(db_session)
    assert total == 4
    assert items[0].id > items[-1].id

    total, items = list_runs(db_session, lemma="subprincipal")
    assert total == 1
    assert items[0].lemma == "subprincipal"

    total, items = list_runs(db_session, page=2, size=3)
    assert total == 4 and len(items) == 1
    assert db_session.query(VerificationRun).count() == 4

    assert get_run(db_session, rows[2].id).lemma == "hessian-rank"
    with pytest.raises(NotFoundException):
        get_run(db_session, 9999)
