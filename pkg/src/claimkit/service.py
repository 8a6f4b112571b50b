"""HTTP facade for the labeling workbench.

Serves sentence browsing, lexicon editing, grammar-version inspection,
relabeling, clustering, training, and metrics over one workspace. Mutations
(version creation, relabel, train) hold a single job lock: concurrent
mutating requests get 409. Relabel runs synchronously and returns its diff;
training runs as a background job polled via GET /jobs/{id}.
"""

from __future__ import annotations

import threading
from dataclasses import replace

from fastapi import FastAPI, Request
from fastapi.exceptions import HTTPException, RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .corpus import Sentence
from .defaults import default_grammar_text, default_lexicon_texts
from .evaluation import (
    ExperimentConfig,
    SplitConfig,
    run_experiment,
    validate_task,
)
from .features import EmbeddingTable, embedding_matrix
from .grammar import compile_grammar
from .labeler import cluster_candidates, weak_label_corpus
from .models import TrainConfig
from .store import DuplicatePhraseError, Workspace
from .taxonomy import ClaimType

__all__ = ["create_app"]

_ALLOWED_LABELS = tuple(c.value for c in ClaimType)


class PhraseIn(BaseModel):
    phrase: str
    note: str = ""


class RelabelIn(BaseModel):
    version: int


class TrainIn(BaseModel):
    strategy: str
    task: str
    epochs: int | None = None
    seed: int = 0


def _error(status: int, code: str, message: str) -> HTTPException:
    return HTTPException(status_code=status, detail={"code": code, "message": message})


class _State:
    """In-memory view of the workspace plus the mutation lock and job table."""

    def __init__(self, ws: Workspace, seed: int):
        self.ws = ws
        self.seed = seed
        try:
            sentences = ws.read_sentences()
        except FileNotFoundError:
            sentences = []
        self.sentences = sorted(sentences, key=lambda s: s.sentence_id)
        if not self.sentences:
            raise ValueError("workspace has no sentences; segment a corpus first")
        try:
            comments = {c.comment_id: c for c in ws.read_comments()}
        except FileNotFoundError:
            comments = {}
        self.dockets = {
            s.sentence_id: (comments[s.comment_id].docket_id if s.comment_id in comments else None)
            for s in self.sentences
        }
        self.labels = ws.read_labels() or {}
        self.emb: EmbeddingTable | None = None
        if ws.vectors_path.exists():
            self.emb = EmbeddingTable.load(ws.vectors_path)
        if ws.latest_version() is None:
            ws.create_version(
                default_grammar_text(), default_lexicon_texts(), note="packaged starter grammar"
            )
        self.mutation_lock = threading.Lock()
        self.jobs: dict[str, dict] = {}
        self._job_seq = 0

    def claim_of(self, sentence_id: int) -> ClaimType:
        label = self.labels.get(sentence_id)
        return ClaimType.NEUTRAL if label is None else label.claim

    def label_counts(self) -> dict[str, int]:
        counts = {c.value: 0 for c in ClaimType}
        for s in self.sentences:
            counts[self.claim_of(s.sentence_id).value] += 1
        return counts

    def sentence_record(self, s: Sentence) -> dict:
        label = self.labels.get(s.sentence_id)
        record = s.to_record()
        # spans index into this token list; clients highlight without
        # tokenizing on their own
        record["tokens"] = list(s.tokens)
        record["docket_id"] = self.dockets.get(s.sentence_id)
        record["claim"] = self.claim_of(s.sentence_id).value
        record["span"] = list(label.span) if label is not None else None
        record["rule_id"] = label.rule_id if label is not None else None
        return record

    def new_job(self, kind: str) -> dict:
        self._job_seq += 1
        job = {
            "job_id": str(self._job_seq),
            "kind": kind,
            "status": "running",
            "result": None,
            "error": None,
        }
        self.jobs[job["job_id"]] = job
        return job


def create_app(
    workspace: Workspace | str,
    seed: int = 0,
    default_page_size: int = 50,
    max_page_size: int = 500,
) -> FastAPI:
    ws = workspace if isinstance(workspace, Workspace) else Workspace(workspace, create=False)
    state = _State(ws, seed)
    app = FastAPI(title="claim labeling workbench api")

    @app.exception_handler(HTTPException)
    async def http_error(request: Request, exc: HTTPException):
        detail = exc.detail
        if not (isinstance(detail, dict) and "code" in detail):
            detail = {"code": "error", "message": str(detail)}
        return JSONResponse(status_code=exc.status_code, content=detail)

    @app.exception_handler(RequestValidationError)
    async def validation_error(request: Request, exc: RequestValidationError):
        first = exc.errors()[0] if exc.errors() else {}
        loc = ".".join(str(p) for p in first.get("loc", ()))
        message = f"{loc}: {first.get('msg', 'invalid request')}"
        return JSONResponse(status_code=400, content={"code": "validation", "message": message})

    def acquire_lock_or_409() -> None:
        if not state.mutation_lock.acquire(blocking=False):
            raise _error(409, "job_in_flight", "another mutating job is in progress")

    # -- read endpoints ------------------------------------------------------

    @app.get("/sentences")
    def get_sentences(
        label: str | None = None,
        docket: str | None = None,
        comment: str | None = None,
        page: int = 0,
        page_size: int | None = None,
    ):
        if label is not None and label not in _ALLOWED_LABELS:
            raise _error(
                400, "unknown_label", f"unknown label {label!r}; allowed: {', '.join(_ALLOWED_LABELS)}"
            )
        if page < 0:
            raise _error(400, "bad_page", "page must be >= 0")
        size = default_page_size if page_size is None else page_size
        size = max(1, min(size, max_page_size))
        items = state.sentences
        if label is not None:
            items = [s for s in items if state.claim_of(s.sentence_id).value == label]
        if docket is not None:
            items = [s for s in items if state.dockets.get(s.sentence_id) == docket]
        if comment is not None:
            items = [s for s in items if s.comment_id == comment]
        window = items[page * size : (page + 1) * size]
        return {
            "page": page,
            "page_size": size,
            "total": len(items),
            "label_counts": state.label_counts(),
            "items": [state.sentence_record(s) for s in window],
        }

    @app.get("/versions")
    def get_versions():
        return [state.ws.version_meta(v) for v in state.ws.list_versions()]

    @app.get("/versions/{version}")
    def get_version(version: int):
        try:
            meta = state.ws.version_meta(version)
            files = state.ws.read_version_files(version)
        except KeyError:
            raise _error(404, "unknown_version", f"grammar version {version} not found")
        return {"meta": meta, "files": files}

    @app.get("/jobs/{job_id}")
    def get_job(job_id: str):
        job = state.jobs.get(job_id)
        if job is None:
            raise _error(404, "unknown_job", f"job {job_id} not found")
        return job

    @app.get("/metrics/latest")
    def get_metrics_latest():
        report = state.ws.latest_report()
        if report is None:
            raise _error(404, "no_reports", "no evaluation report has been produced yet")
        return report

    @app.get("/clusters")
    def get_clusters(k: int, pool: str = ClaimType.NEUTRAL.value):
        if pool != "all" and pool not in _ALLOWED_LABELS:
            raise _error(
                400, "unknown_pool", f"unknown pool {pool!r}; allowed: all, {', '.join(_ALLOWED_LABELS)}"
            )
        if pool == "all":
            members = state.sentences
        else:
            members = [s for s in state.sentences if state.claim_of(s.sentence_id).value == pool]
        if not members:
            raise _error(400, "empty_pool", f"pool {pool!r} has no sentences")
        if k < 1 or k > len(members):
            raise _error(400, "bad_k", f"k must lie in [1, {len(members)}] for pool {pool!r}")
        vectors = embedding_matrix(members, state.emb, seed=state.seed)
        clusters = cluster_candidates(members, vectors, k, seed=state.seed)
        by_id = {s.sentence_id: s for s in members}
        payload = []
        for cluster in clusters:
            claims = [state.claim_of(sid).value for sid in cluster.sentence_ids]
            tally: dict[str, int] = {}
            for c in claims:
                tally[c] = tally.get(c, 0) + 1
            dominant = min(tally, key=lambda c: (-tally[c], c))
            payload.append(
                {
                    "cluster_id": cluster.cluster_id,
                    "size": len(cluster.sentence_ids),
                    "dominant_label": dominant,
                    "exemplars": [state.sentence_record(by_id[cluster.exemplar_id])],
                    "sentence_ids": sorted(cluster.sentence_ids)[:100],
                }
            )
        return {"k": k, "pool": pool, "clusters": payload}

    # -- mutations -------------------------------------------------------------

    @app.post("/lexicons/{name}/entries", status_code=201)
    def post_lexicon_entry(name: str, body: PhraseIn):
        if not body.phrase.strip():
            raise _error(400, "empty_phrase", "phrase must not be empty")
        acquire_lock_or_409()
        try:
            base = state.ws.latest_version()
            try:
                version = state.ws.add_lexicon_phrase(base, name, body.phrase, note=body.note)
            except KeyError:
                raise _error(404, "unknown_lexicon", f"lexicon {name!r} not found")
            except DuplicatePhraseError as exc:
                raise _error(409, "duplicate_phrase", str(exc))
            except ValueError as exc:
                raise _error(400, "invalid_phrase", str(exc))
            meta = state.ws.version_meta(version)
        finally:
            state.mutation_lock.release()
        return {"version": version, "parent": base, "lexicon": name,
                "phrase": body.phrase, "meta": meta}

    @app.post("/relabel")
    def post_relabel(body: RelabelIn):
        if body.version not in state.ws.list_versions():
            raise _error(404, "unknown_version", f"grammar version {body.version} not found")
        acquire_lock_or_409()
        job = state.new_job("relabel")
        try:
            grammar, lexicons = state.ws.load_version(body.version)
            compiled = compile_grammar(grammar, lexicons)
            new_labels = weak_label_corpus(state.sentences, compiled)
            changes: dict[str, dict] = {}
            delta: dict[str, int] = {}
            for s in state.sentences:
                old = state.claim_of(s.sentence_id)
                new_label = new_labels.get(s.sentence_id)
                new = ClaimType.NEUTRAL if new_label is None else new_label.claim
                if old is not new:
                    changes[str(s.sentence_id)] = {"old": old.value, "new": new.value}
                    delta[old.value] = delta.get(old.value, 0) - 1
                    delta[new.value] = delta.get(new.value, 0) + 1
            state.labels = new_labels
            state.ws.write_labels(new_labels, grammar_version=body.version)
            diff = {
                "version": body.version,
                "size": len(changes),
                "changes": changes,
                "delta": {c: d for c, d in sorted(delta.items()) if d != 0},
                "counts": state.label_counts(),
                "job_id": job["job_id"],
            }
            job["status"] = "done"
            job["result"] = diff
        except Exception as exc:
            job["status"] = "failed"
            job["error"] = {"code": "relabel_failed", "message": str(exc)}
            raise _error(500, "relabel_failed", str(exc))
        finally:
            state.mutation_lock.release()
        return diff

    @app.post("/train", status_code=202)
    def post_train(body: TrainIn):
        try:
            validate_task(body.task, body.strategy)
        except ValueError as exc:
            raise _error(400, "invalid_task", str(exc))
        acquire_lock_or_409()
        job = state.new_job("train")
        labels_snapshot = dict(state.labels)
        sentences = state.sentences

        def work() -> None:
            try:
                claims = {
                    s.sentence_id: (
                        ClaimType.NEUTRAL
                        if labels_snapshot.get(s.sentence_id) is None
                        else labels_snapshot[s.sentence_id].claim
                    )
                    for s in sentences
                }
                train_cfg = TrainConfig(seed=body.seed)
                if body.epochs is not None:
                    train_cfg = replace(train_cfg, epochs=body.epochs)
                cfg = ExperimentConfig(
                    split=SplitConfig(seed=body.seed), train=train_cfg, seed=body.seed
                )
                report = run_experiment(sentences, claims, body.strategy, body.task, cfg)
                name = f"{body.task}-{body.strategy}".replace("+", "-")
                report.write(state.ws.report_path(name))
                state.ws.write_latest_report(report.to_dict())
                job["status"] = "done"
                job["result"] = {"report": report.to_dict(), "report_name": name}
            except Exception as exc:
                job["status"] = "failed"
                job["error"] = {"code": "train_failed", "message": str(exc)}
            finally:
                state.mutation_lock.release()

        threading.Thread(target=work, name=f"train-job-{job['job_id']}", daemon=True).start()
        return {"job_id": job["job_id"], "status": job["status"]}

    app.state.workspace = ws
    app.state.service_state = state
    return app
