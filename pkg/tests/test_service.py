import json

import pytest
from fastapi.testclient import TestClient

from gridtalk.evaluation import read_transcripts
from gridtalk.service import create_app

from conftest import SCEN_A


@pytest.fixture
def client():
    return TestClient(create_app())


def new_session(client, **overrides):
    body = {"scenario": SCEN_A.to_json(), "human_role": "letters",
            "agent": "greedy", "agent_seed": 5}
    body.update(overrides)
    resp = client.post("/sessions", json=body)
    assert resp.status_code == 201, resp.text
    return resp.json()


def sse_events(text):
    events = []
    for block in text.strip().split("\n\n"):
        lines = dict(line.split(": ", 1) for line in block.splitlines())
        events.append((int(lines["id"]), lines["event"], json.loads(lines["data"])))
    return events


def cell_dicts(blob):
    """Every board-cell-like object anywhere in a response payload."""
    found = []
    stack = [blob]
    while stack:
        node = stack.pop()
        if isinstance(node, dict):
            if "color" in node and "row" in node:
                found.append(node)
            stack.extend(node.values())
        elif isinstance(node, list):
            stack.extend(node)
    return found


# ------------------------------------------------------------- creation --

def test_create_from_seed_and_distinct_ids(client):
    a = client.post("/sessions", json={"seed": 3}).json()
    b = client.post("/sessions", json={"seed": 3}).json()
    assert a["session"]["id"] != b["session"]["id"]
    assert a["session"]["status"] in ("awaiting_human",)
    assert a["session"]["agent"] == "pip"


def test_view_hides_partner_symbols_until_finished(client):
    view = new_session(client)["session"]
    cells = cell_dicts(view["board"])
    assert len(cells) == 6
    assert all("letter" in c and "digit" not in c for c in cells)
    digits_view = new_session(client, human_role="digits")["session"]
    assert all("digit" in c and "letter" not in c
               for c in cell_dicts(digits_view["board"]))


def test_invalid_config_yields_field_error(client):
    resp = client.post("/sessions", json={
        "scenario": SCEN_A.to_json(), "config": {"alpha": -2}})
    assert resp.status_code == 400
    err = resp.json()["error"]
    assert err["rule"] == "invalid_config"
    assert "config" in err["message"] and "alpha" in err["message"]
    resp = client.post("/sessions", json={
        "scenario": SCEN_A.to_json(), "config": {"beta": 1}})
    assert resp.status_code == 400


def test_unknown_agent_rejected(client):
    resp = client.post("/sessions", json={"seed": 1, "agent": "oracle"})
    assert resp.status_code == 400
    assert resp.json()["error"]["rule"] == "unknown_policy"


def test_missing_scenario_and_seed(client):
    resp = client.post("/sessions", json={"agent": "random"})
    assert resp.status_code == 400
    assert resp.json()["error"]["rule"] == "invalid_request"


def test_unknown_session_is_404(client):
    resp = client.get("/sessions/nope")
    assert resp.status_code == 404
    assert resp.json()["error"]["rule"] == "not_found"


# --------------------------------------------------------------- moves --

def test_first_step_click_rejected(client):
    sid = new_session(client)["session"]["id"]
    resp = client.post(f"/sessions/{sid}/actions",
                       json={"type": "click", "row": 1, "col": 1})
    assert resp.status_code == 400
    assert resp.json()["error"]["rule"] == "first_step_click"


def test_three_word_message_rejected(client):
    sid = new_session(client)["session"]["id"]
    resp = client.post(f"/sessions/{sid}/actions",
                       json={"type": "message", "raw": "blue top left"})
    assert resp.status_code == 400
    assert resp.json()["error"]["rule"] == "too_many_words"


def test_agent_opens_when_it_moves_first(client):
    created = new_session(client, human_role="digits")
    assert created["agent_action"] is not None
    assert created["agent_action"]["type"] == "message"
    view = created["session"]
    assert view["status"] == "awaiting_human"
    assert len(view["history"]) == 1


def test_correct_click_finishes_and_reveals(client):
    created = new_session(client, human_role="digits")
    sid = created["session"]["id"]
    resp = client.post(f"/sessions/{sid}/actions",
                       json={"type": "click", "row": 1, "col": 1})
    assert resp.status_code == 200
    view = resp.json()["session"]
    assert view["status"] == "finished"
    assert view["outcome"] == {"correct": True, "clicked": [1, 1]}
    assert view["utility"] == -50.0 * 2 + 100.0
    assert view["scoreboard"]["correct_clicks"] == 1
    assert all("letter" in c and "digit" in c for c in cell_dicts(view["board"]))
    assert resp.json()["agent_action"] is None

    after = client.post(f"/sessions/{sid}/actions",
                        json={"type": "message", "raw": "yes"})
    assert after.status_code == 409
    assert after.json()["error"]["rule"] == "game_over"


def test_wrong_click_counts_and_scores(client):
    created = new_session(client, human_role="digits")
    sid = created["session"]["id"]
    view = client.post(f"/sessions/{sid}/actions",
                       json={"type": "click", "row": 1, "col": 3}).json()["session"]
    assert view["outcome"] == {"correct": False, "clicked": [1, 3]}
    assert view["scoreboard"]["wrong_clicks"] == 1
    assert view["utility"] == -50.0 * 2 - 100.0


def test_message_flow_updates_scoreboard(client):
    sid = new_session(client)["session"]["id"]
    resp = client.post(f"/sessions/{sid}/actions",
                       json={"type": "message", "words": ["blue", "top"]})
    assert resp.status_code == 200
    body = resp.json()
    assert body["agent_action"] is not None
    view = body["session"]
    assert len(view["history"]) == 2
    assert view["scoreboard"]["words_sent"] >= 2
    assert view["status"] == "awaiting_human"


def test_agent_replies_are_seeded(client):
    replies = []
    for _ in range(2):
        created = new_session(client, agent="random", agent_seed=42)
        sid = created["session"]["id"]
        r = client.post(f"/sessions/{sid}/actions",
                        json={"type": "message", "words": ["blue"]})
        replies.append(r.json()["agent_action"])
    assert replies[0] == replies[1]


# -------------------------------------------------------------- events --

def test_event_feed_in_order_with_cursor(client):
    sid = new_session(client)["session"]["id"]
    client.post(f"/sessions/{sid}/actions", json={"type": "message", "words": ["blue"]})
    feed = client.get(f"/sessions/{sid}/events").text
    events = sse_events(feed)
    assert [e[0] for e in events] == [1, 2]
    assert all(kind == "action" for _, kind, _ in events)
    assert events[0][2]["player"] == "letters"

    replay = sse_events(client.get(f"/sessions/{sid}/events", params={"cursor": 1}).text)
    assert [e[0] for e in replay] == [2]


def test_outcome_event_delivered_once(client):
    created = new_session(client, human_role="digits")
    sid = created["session"]["id"]
    client.post(f"/sessions/{sid}/actions", json={"type": "click", "row": 1, "col": 1})
    events = sse_events(client.get(f"/sessions/{sid}/events").text)
    kinds = [kind for _, kind, _ in events]
    assert kinds == ["action", "action", "outcome"]
    outcome = events[-1][2]
    assert outcome["correct"] is True and outcome["clicked"] == [1, 1]
    assert "utility" in outcome


# ------------------------------------------------------------- beliefs --

def test_beliefs_require_debug_flag(client):
    sid = new_session(client)["session"]["id"]
    resp = client.get(f"/sessions/{sid}/beliefs")
    assert resp.status_code == 403
    assert resp.json()["error"]["rule"] == "debug_disabled"


def test_beliefs_prior_and_update(client):
    created = new_session(client, debug=True, agent="greedy")
    sid = created["session"]["id"]
    resp = client.get(f"/sessions/{sid}/beliefs")
    assert resp.status_code == 200
    body = resp.json()
    assert body["viewer"] == "digits" and body["about"] == "letters"
    matrix = body["marginals"]
    assert len(matrix) == 2 and len(matrix[0]) == 3
    assert all(0.0 < x < 1.0 for row in matrix for x in row)

    client.post(f"/sessions/{sid}/actions", json={"type": "message", "words": ["blue"]})
    after = client.get(f"/sessions/{sid}/beliefs").json()["marginals"]
    blue = min(after[0][0], after[1][1])
    others = [after[0][1], after[0][2], after[1][0], after[1][2]]
    assert blue >= max(others) - 1e-12


# ------------------------------------------------- hiding + export --

def test_no_endpoint_leaks_partner_symbols_before_end(client):
    created = new_session(client, debug=True)
    sid = created["session"]["id"]
    move = client.post(f"/sessions/{sid}/actions",
                       json={"type": "message", "words": ["blue"]})
    payloads = [
        created,
        move.json(),
        client.get(f"/sessions/{sid}").json(),
        client.get(f"/sessions/{sid}/beliefs").json(),
        sse_events(client.get(f"/sessions/{sid}/events").text),
    ]
    for blob in payloads:
        text = json.dumps(blob)
        assert '"objects"' not in text  # no raw scenario dump anywhere
        for cell in cell_dicts(blob):
            assert "digit" not in cell, cell


def test_finished_games_export_to_jsonl(tmp_path):
    export = tmp_path / "played.jsonl"
    client = TestClient(create_app(export_path=str(export)))
    created = new_session(client, human_role="digits")
    sid = created["session"]["id"]
    client.post(f"/sessions/{sid}/actions", json={"type": "click", "row": 1, "col": 1})
    games = read_transcripts(export)
    assert len(games) == 1
    assert games[0].outcome is not None and games[0].outcome.correct
    assert games[0].scenario == SCEN_A
