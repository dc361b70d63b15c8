from __future__ import annotations

import json

import pytest

from insightloop.errors import (
    CorruptSession,
    IoError,
    NoOpenRound,
    RoundStillOpen,
    SchemaError,
    UnknownRound,
    UnknownView,
)
from insightloop.session import (
    StepSnapshot,
    end_round,
    load,
    persist,
    record_step,
    select_path,
    start_session,
)


@pytest.fixture()
def session(superstore_spec, superstore_table):
    return start_session(superstore_spec, superstore_table, "analyze sales")


def _scored_stub(i=0):
    return {"insight": {"type": "trend", "description": f"finding {i}",
                        "parameters": {"direction": 1}},
            "combined": 0.8}


class TestStartSession:
    def test_opens_round_one(self, session):
        assert session.m == 1
        assert session.open_round().index == 1
        assert session.open_round().steps == []

    def test_invalid_spec_for_dataset(self, superstore_spec, superstore_table):
        doc = superstore_spec.to_document()
        doc["viewsInfo"][0]["layers"][0]["encoding"]["geography"]["field"] = "Nope"
        from insightloop.spec import system_spec_from_document
        bad = system_spec_from_document(doc)
        with pytest.raises(SchemaError):
            start_session(bad, superstore_table, "t")

    def test_ids_distinct(self, superstore_spec, superstore_table):
        a = start_session(superstore_spec, superstore_table, "t")
        b = start_session(superstore_spec, superstore_table, "t")
        assert a.session_id != b.session_id


class TestRecordStep:
    def test_snapshot_ref_naming(self, session):
        record = record_step(session, "Sales Trend", insights=[_scored_stub()])
        assert record.snapshot_ref == "1_1_Sales Trend"
        second = record_step(session, "Sales|By State", insights=[_scored_stub(1)])
        assert second.snapshot_ref == "2_2_Sales|By State".replace("2_2", "1_2")

    def test_interaction_step(self, session):
        record = record_step(
            session, "Sales|By Segment",
            interaction={"viewName": "Sales|By Segment", "dimName": "Segment",
                         "value": ["Consumer"]})
        assert record.insights == []
        assert record.interaction["dimName"] == "Segment"

    def test_unknown_view(self, session):
        with pytest.raises(UnknownView):
            record_step(session, "Nope")

    def test_indices_gapless(self, session):
        for _ in range(3):
            record_step(session, "Sales Trend", insights=[_scored_stub()])
        end_round(session)
        record_step(session, "Sales Trend", insights=[_scored_stub()])
        assert [s.step_index for s in session.rounds[0].steps] == [1, 2, 3]
        assert [r.index for r in session.rounds] == [1, 2]
        assert session.rounds[1].steps[0].step_index == 1

    def test_snapshot_refs_unique(self, session):
        refs = set()
        for _ in range(3):
            refs.add(record_step(session, "Sales Trend").snapshot_ref)
        end_round(session)
        for _ in range(2):
            refs.add(record_step(session, "Sales Trend").snapshot_ref)
        assert len(refs) == 5


class TestRounds:
    def test_end_round_summary(self, session):
        for _ in range(4):
            record_step(session, "Sales Trend", insights=[_scored_stub()])
        assert end_round(session) == {"round": 1, "steps": 4}

    def test_double_end(self, session):
        end_round(session)
        with pytest.raises(NoOpenRound):
            end_round(session)

    def test_new_round_after_end(self, session):
        end_round(session)
        record = record_step(session, "Sales Trend")
        assert session.m == 2
        assert record.snapshot_ref.startswith("2_1_")

    def test_select_path_of_closed_round(self, session):
        for _ in range(4):
            record_step(session, "Sales Trend", insights=[_scored_stub()])
        end_round(session)
        records = select_path(session, 1)
        assert [r.step_index for r in records] == [1, 2, 3, 4]

    def test_select_open_round(self, session):
        record_step(session, "Sales Trend")
        with pytest.raises(RoundStillOpen):
            select_path(session, 1)

    def test_select_unknown_round(self, session):
        with pytest.raises(UnknownRound):
            select_path(session, 99)


class TestPersistence:
    def test_round_trip(self, session, tmp_path):
        for _ in range(4):
            record_step(session, "Sales Trend", insights=[_scored_stub()],
                        snapshot=StepSnapshot(data={"values": [1, 2, 3]}))
        end_round(session)
        persist(session, tmp_path)
        again = load(tmp_path, session.session_id)
        assert again.structural_equal(session)
        assert again.rounds[0].steps[0].snapshot_data == {"values": [1, 2, 3]}

    def test_client_image_persisted(self, session, tmp_path):
        png = b"\x89PNG\r\n\x1a\nfakedata"
        record = record_step(session, "Sales Trend",
                             snapshot=StepSnapshot(data={}, image_png=png))
        persist(session, tmp_path)
        path = tmp_path / session.session_id / "snapshots" / \
            f"{record.snapshot_ref}.png"
        assert path.read_bytes() == png

    def test_truncated_file_is_corrupt(self, session, tmp_path):
        record_step(session, "Sales Trend")
        directory = persist(session, tmp_path)
        target = directory / "session.json"
        target.write_text(target.read_text()[:50], encoding="utf-8")
        with pytest.raises(CorruptSession):
            load(tmp_path, session.session_id)

    def test_edited_file_fails_checksum(self, session, tmp_path):
        record_step(session, "Sales Trend")
        directory = persist(session, tmp_path)
        target = directory / "session.json"
        doc = json.loads(target.read_text())
        doc["task"] = "tampered"
        target.write_text(json.dumps(doc), encoding="utf-8")
        with pytest.raises(CorruptSession):
            load(tmp_path, session.session_id)

    def test_unknown_id(self, tmp_path):
        with pytest.raises(IoError):
            load(tmp_path, "missing")
