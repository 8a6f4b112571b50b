import time

import pytest

pytest.importorskip("fastapi")
from fastapi.testclient import TestClient

from claimkit.corpus import Comment
from claimkit.defaults import default_compiled_grammar
from claimkit.labeler import weak_label_corpus
from claimkit.service import create_app
from claimkit.store import Workspace
from claimkit.taxonomy import ClaimType
from conftest import make_sentence

# Sentence texts with known weak labels under the packaged starter grammar.
# "overly harsh new rule" stays Neutral until "harsh" joins POLARITY_NEG,
# then flips to LikelyOpposition via POLARITY_NP.
_SUPPORT = "We support the proposal as written in section four."
_BURDEN = "The recordkeeping here is too costly for small firms."
_FLIP = "This overly harsh new rule is unwelcome in our region."
_NEUTRAL = "The agency published the notice in the federal register entry {i}."


def _build_workspace(root) -> Workspace:
    ws = Workspace(root)
    sentences = []
    comments = []
    texts = (
        [_SUPPORT] * 6 + [_BURDEN] * 6 + [_FLIP] + [_NEUTRAL.format(i=i) for i in range(12)]
    )
    for i, text in enumerate(texts):
        comment_id = f"C-{i // 5}"
        sentences.append(make_sentence(i, text, comment_id=comment_id, index=i % 5))
    seen = sorted({s.comment_id for s in sentences})
    for j, cid in enumerate(seen):
        body = " ".join(s.text for s in sentences if s.comment_id == cid)
        comments.append(Comment(cid, f"D-{j % 2}", "AGENCY", body))
    ws.write_comments(comments)
    ws.write_sentences(sentences)
    labels = weak_label_corpus(sentences, default_compiled_grammar())
    ws.write_labels(labels, grammar_version=1)
    return ws


@pytest.fixture()
def client(tmp_path):
    ws = _build_workspace(tmp_path / "ws")
    app = create_app(ws, seed=0)
    with TestClient(app) as c:
        yield c


def _wait_job(client, job_id, timeout=60.0):
    deadline = time.time() + timeout
    while time.time() < deadline:
        job = client.get(f"/jobs/{job_id}").json()
        if job["status"] != "running":
            return job
        time.sleep(0.05)
    raise AssertionError("job did not finish in time")


def test_requires_sentences(tmp_path):
    ws = Workspace(tmp_path / "empty")
    with pytest.raises(ValueError, match="no sentences"):
        create_app(ws)


def test_missing_workspace_dir(tmp_path):
    with pytest.raises(FileNotFoundError):
        create_app(str(tmp_path / "nope"))


def test_sentences_listing_and_counts(client):
    body = client.get("/sentences").json()
    assert body["page"] == 0
    assert body["total"] == 25
    assert len(body["items"]) == 25
    counts = body["label_counts"]
    assert counts["ExplicitSupport"] == 6
    assert counts["Burdensome"] == 6
    assert counts["Neutral"] == 13
    assert sum(counts.values()) == 25
    first = body["items"][0]
    assert first["sentence_id"] == 0
    assert first["claim"] == "ExplicitSupport"
    assert first["span"] is not None
    assert first["docket_id"] in {"D-0", "D-1"}
    # span indexes into the served token list
    lo, hi = first["span"]
    assert first["tokens"][lo:hi] == ["we", "support"]


def test_sentences_pagination(client):
    page0 = client.get("/sentences", params={"page_size": 10}).json()
    page2 = client.get("/sentences", params={"page_size": 10, "page": 2}).json()
    assert len(page0["items"]) == 10
    assert len(page2["items"]) == 5
    assert page2["total"] == 25
    ids = [s["sentence_id"] for s in page0["items"] + page2["items"]]
    assert ids == list(range(10)) + list(range(20, 25))


def test_sentences_filters(client):
    by_label = client.get("/sentences", params={"label": "Burdensome"}).json()
    assert by_label["total"] == 6
    assert all(item["claim"] == "Burdensome" for item in by_label["items"])
    by_comment = client.get("/sentences", params={"comment": "C-0"}).json()
    assert by_comment["total"] == 5
    docket = by_comment["items"][0]["docket_id"]
    by_docket = client.get("/sentences", params={"docket": docket}).json()
    assert by_docket["total"] >= 5
    assert all(item["docket_id"] == docket for item in by_docket["items"])


def test_sentences_validation_errors(client):
    r = client.get("/sentences", params={"label": "Nope"})
    assert r.status_code == 400
    assert r.json()["code"] == "unknown_label"
    assert "message" in r.json()
    r = client.get("/sentences", params={"page": -1})
    assert r.status_code == 400
    assert r.json()["code"] == "bad_page"
    r = client.get("/sentences", params={"page": "x"})
    assert r.status_code == 400
    assert r.json()["code"] == "validation"


def test_versions_seeded_from_packaged_grammar(client):
    versions = client.get("/versions").json()
    assert [v["version"] for v in versions] == [1]
    assert versions[0]["parent"] is None
    one = client.get("/versions/1").json()
    assert "POLARITY_NP" in one["files"]["grammar"]
    assert "POLARITY_NEG" in one["files"]["lexicons"]
    missing = client.get("/versions/99")
    assert missing.status_code == 404
    assert missing.json()["code"] == "unknown_version"


def test_unknown_job_and_missing_metrics(client):
    r = client.get("/jobs/42")
    assert r.status_code == 404
    assert r.json()["code"] == "unknown_job"
    r = client.get("/metrics/latest")
    assert r.status_code == 404
    assert r.json()["code"] == "no_reports"


def test_clusters(client):
    body = client.get("/clusters", params={"k": 2, "pool": "Neutral"}).json()
    assert body["k"] == 2 and body["pool"] == "Neutral"
    assert len(body["clusters"]) == 2
    sizes = sum(c["size"] for c in body["clusters"])
    assert sizes == 13
    for c in body["clusters"]:
        assert c["dominant_label"] == "Neutral"
        assert c["exemplars"][0]["sentence_id"] in c["sentence_ids"]
    all_pool = client.get("/clusters", params={"k": 3, "pool": "all"}).json()
    assert sum(c["size"] for c in all_pool["clusters"]) == 25


def test_clusters_validation(client):
    assert client.get("/clusters", params={"k": 0}).json()["code"] == "bad_k"
    assert (
        client.get("/clusters", params={"k": 99, "pool": "Neutral"}).json()["code"] == "bad_k"
    )
    assert (
        client.get("/clusters", params={"k": 1, "pool": "Blah"}).json()["code"]
        == "unknown_pool"
    )
    assert (
        client.get("/clusters", params={"k": 1, "pool": "TooNarrow"}).json()["code"]
        == "empty_pool"
    )
    r = client.get("/clusters")
    assert r.status_code == 400
    assert r.json()["code"] == "validation"


def test_add_phrase_then_relabel_flips_one_sentence(client):
    r = client.post("/lexicons/POLARITY_NEG/entries", json={"phrase": "harsh"})
    assert r.status_code == 201
    created = r.json()
    assert created["version"] == 2
    assert created["parent"] == 1
    assert created["meta"]["parent"] == 1
    versions = client.get("/versions").json()
    assert [v["version"] for v in versions] == [1, 2]
    assert "harsh" in client.get("/versions/2").json()["files"]["lexicons"]["POLARITY_NEG"]

    diff = client.post("/relabel", json={"version": 2})
    assert diff.status_code == 200
    body = diff.json()
    assert body["size"] == 1
    (sid, change), = body["changes"].items()
    assert change == {"old": "Neutral", "new": "LikelyOpposition"}
    assert body["delta"] == {"LikelyOpposition": 1, "Neutral": -1}
    assert body["counts"]["Neutral"] == 12
    assert body["counts"]["LikelyOpposition"] == 1

    # the listing reflects the new labels and agrees with the diff counts
    listing = client.get("/sentences").json()
    assert listing["label_counts"] == body["counts"]
    flipped = client.get("/sentences", params={"label": "LikelyOpposition"}).json()
    assert [s["sentence_id"] for s in flipped["items"]] == [int(sid)]

    # relabel job is also recorded and pollable
    job = client.get(f"/jobs/{body['job_id']}").json()
    assert job["kind"] == "relabel"
    assert job["status"] == "done"
    assert job["result"]["size"] == 1


def test_relabel_is_idempotent_per_version(client):
    first = client.post("/relabel", json={"version": 1}).json()
    assert first["size"] == 0
    assert first["changes"] == {}
    assert first["delta"] == {}


def test_relabel_unknown_version(client):
    r = client.post("/relabel", json={"version": 7})
    assert r.status_code == 404
    assert r.json()["code"] == "unknown_version"


def test_add_phrase_errors(client):
    dup = client.post("/lexicons/POLARITY_NEG/entries", json={"phrase": "bad"})
    assert dup.status_code == 409
    assert dup.json()["code"] == "duplicate_phrase"
    missing = client.post("/lexicons/NOPE/entries", json={"phrase": "x"})
    assert missing.status_code == 404
    assert missing.json()["code"] == "unknown_lexicon"
    empty = client.post("/lexicons/POLARITY_NEG/entries", json={"phrase": "   "})
    assert empty.status_code == 400
    assert empty.json()["code"] == "empty_phrase"
    long = client.post(
        "/lexicons/POLARITY_NEG/entries", json={"phrase": "a b c d e f"}
    )
    assert long.status_code == 400
    assert long.json()["code"] == "invalid_phrase"
    bad_body = client.post("/lexicons/POLARITY_NEG/entries", json={"note": "no phrase"})
    assert bad_body.status_code == 400
    assert bad_body.json()["code"] == "validation"
    # failed mutations never mint a version
    assert [v["version"] for v in client.get("/versions").json()] == [1]


def test_train_job_and_metrics(client):
    r = client.post(
        "/train",
        json={"strategy": "flat", "task": "claim-id-imbalanced", "epochs": 5},
    )
    assert r.status_code == 202
    job_id = r.json()["job_id"]
    job = _wait_job(client, job_id)
    assert job["status"] == "done", job
    report = job["result"]["report"]
    assert report["task"] == "claim-id-imbalanced"
    assert report["strategy"] == "flat"
    latest = client.get("/metrics/latest").json()
    assert latest == report


def test_train_validation(client):
    r = client.post("/train", json={"strategy": "ensemble", "task": "stance"})
    assert r.status_code == 400
    assert r.json()["code"] == "invalid_task"
    r = client.post("/train", json={"strategy": "flat"})
    assert r.status_code == 400
    assert r.json()["code"] == "validation"


def test_mutation_lock_conflict(client):
    state = client.app.state.service_state
    assert state.mutation_lock.acquire(blocking=False)
    try:
        r = client.post("/lexicons/POLARITY_NEG/entries", json={"phrase": "harsh"})
        assert r.status_code == 409
        assert r.json()["code"] == "job_in_flight"
        r = client.post("/relabel", json={"version": 1})
        assert r.status_code == 409
        r = client.post("/train", json={"strategy": "flat", "task": "stance"})
        assert r.status_code == 409
    finally:
        state.mutation_lock.release()


def test_labels_persist_across_restart(client, tmp_path):
    client.post("/lexicons/POLARITY_NEG/entries", json={"phrase": "harsh"})
    client.post("/relabel", json={"version": 2})
    ws = client.app.state.workspace
    reopened = create_app(Workspace(ws.root, create=False), seed=0)
    with TestClient(reopened) as c2:
        counts = c2.get("/sentences").json()["label_counts"]
        assert counts["LikelyOpposition"] == 1
        assert ws.labels_state() == {"grammar_version": 2}
