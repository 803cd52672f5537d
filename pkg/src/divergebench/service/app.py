"""HTTP API over the project store.

Fixed paths:

* ``POST /projects`` creates a project from full documents in the body
* ``GET /projects/{id}/session`` returns the caller's blinded session
* ``GET /projects/{id}/next`` returns the first item with an unjudged output
* ``POST /projects/{id}/judgments`` records one verdict durably
* ``GET /projects/{id}/progress`` counts effective judgments
* ``GET /projects/{id}/export`` returns unblinded judgments (admin only)

Authentication is a static bearer token resolved against the project roster.
Annotator-facing payloads are built from session data only and never name a
system; the session payload also omits the master seed, since seed plus
outputs document would let a determined annotator recompute the blinding.
All errors use one shape: {code, message, detail}.
"""

from __future__ import annotations

import json
import threading
from contextlib import asynccontextmanager
from pathlib import Path
from typing import Any

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from ..core import ChallengeItem, DocumentError, parse_challenge_set, parse_outputs
from ..scoring import ScoringError, Verdict, judgments_to_dict
from ..session import SessionItem
from .store import (
    DuplicateProjectError,
    ProjectStore,
    StoreError,
    UnknownProjectError,
    UnknownSlotError,
    parse_roster,
    resolve_data_dir,
)


class ServiceError(Exception):
    def __init__(self, status: int, code: str, message: str, detail: Any = None):
        self.status = status
        self.code = code
        self.message = message
        self.detail = detail
        super().__init__(message)

    def response(self) -> JSONResponse:
        return JSONResponse(
            status_code=self.status,
            content={"code": self.code, "message": self.message, "detail": self.detail},
        )


def _bearer(request: Request) -> str:
    header = request.headers.get("authorization", "")
    scheme, _, token = header.partition(" ")
    if scheme.lower() != "bearer" or not token.strip():
        raise ServiceError(401, "invalid-token", "missing bearer token")
    return token.strip()


def _require(body: Any, key: str) -> Any:
    if not isinstance(body, dict) or key not in body:
        raise ServiceError(400, "invalid-request", f"missing field {key!r}")
    return body[key]


def _item_payload(item: ChallengeItem, session_item: SessionItem, verdicts: dict) -> dict:
    payload: dict[str, Any] = {
        "item_id": item.id,
        "question": item.question,
        "source": item.source,
        "source_highlights": [[s.start, s.end] for s in item.source_highlights],
        "reference": item.reference,
        "reference_highlights": [[s.start, s.end] for s in item.reference_highlights],
        "outputs": [
            {
                "label": o.label,
                "translation": o.translation,
                "verdict": verdicts[o.label].value if o.label in verdicts else None,
            }
            for o in session_item.outputs
        ],
    }
    if item.notes:
        payload["notes"] = item.notes
    return payload


def create_app(data_dir: str | Path | None = None) -> FastAPI:
    root = resolve_data_dir(data_dir)
    stores: dict[str, ProjectStore] = {}
    stores_lock = threading.Lock()

    @asynccontextmanager
    async def lifespan(_app: FastAPI):
        yield
        with stores_lock:
            for store in stores.values():
                store.close()
            stores.clear()

    app = FastAPI(title="divergebench annotation service", lifespan=lifespan)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["GET", "POST"],
        allow_headers=["Authorization", "Content-Type"],
    )

    def get_store(project_id: str) -> ProjectStore:
        with stores_lock:
            store = stores.get(project_id)
            if store is None:
                try:
                    store = ProjectStore.open(root, project_id)
                except UnknownProjectError:
                    raise ServiceError(
                        404, "unknown-project", f"no project {project_id!r}"
                    ) from None
                stores[project_id] = store
            return store

    def annotator_of(store: ProjectStore, request: Request) -> str:
        token = _bearer(request)
        annotator_id = store.roster.annotator_for_token(token)
        if annotator_id is None:
            if store.roster.is_admin(token):
                raise ServiceError(403, "forbidden", "admin token has no annotation session")
            raise ServiceError(401, "invalid-token", "token not in project roster")
        return annotator_id

    @app.exception_handler(ServiceError)
    async def _service_error(_request: Request, exc: ServiceError):
        return exc.response()

    @app.exception_handler(RequestValidationError)
    async def _validation_error(_request: Request, exc: RequestValidationError):
        return ServiceError(400, "invalid-request", "malformed request body",
                            detail=str(exc)).response()

    @app.post("/projects", status_code=201)
    async def create_project(body: dict) -> dict:
        try:
            challenge_set = parse_challenge_set(json.dumps(_require(body, "challenge_set")))
            outputs = parse_outputs(
                json.dumps(_require(body, "outputs")), challenge_set
            )
            roster = parse_roster(_require(body, "roster"))
        except DocumentError as exc:
            raise ServiceError(400, "invalid-document", str(exc)) from exc
        master_seed = _require(body, "master_seed")
        if not isinstance(master_seed, int) or isinstance(master_seed, bool):
            raise ServiceError(400, "invalid-request", "master_seed must be an integer")
        project_id = body.get("project_id")
        try:
            store = ProjectStore.create(
                root, challenge_set, outputs, roster, master_seed, project_id
            )
        except DuplicateProjectError as exc:
            raise ServiceError(409, "duplicate-project", str(exc)) from exc
        except DocumentError as exc:
            raise ServiceError(400, "invalid-document", str(exc)) from exc
        except StoreError as exc:
            raise ServiceError(500, "storage-failure", str(exc)) from exc
        with stores_lock:
            stores[store.project_id] = store
        return {
            "project_id": store.project_id,
            "annotators": list(store.roster.annotator_ids),
            "items": len(challenge_set.items),
            "systems": len(outputs.systems),
            "slots": len(challenge_set.items)
            * len(outputs.systems)
            * len(store.roster.annotator_ids),
        }

    @app.get("/projects/{project_id}/session")
    async def get_session(project_id: str, request: Request) -> dict:
        store = get_store(project_id)
        annotator_id = annotator_of(store, request)
        session = store.session_for(annotator_id)
        return {
            "project_id": project_id,
            "annotator_id": annotator_id,
            "total_items": len(session.items),
            "items": [
                {
                    "item_id": si.item_id,
                    "outputs": [
                        {"label": o.label, "translation": o.translation}
                        for o in si.outputs
                    ],
                }
                for si in session.items
            ],
        }

    @app.get("/projects/{project_id}/next")
    async def next_pending(project_id: str, request: Request) -> dict:
        store = get_store(project_id)
        annotator_id = annotator_of(store, request)
        session = store.session_for(annotator_id)
        mine = store.progress()["annotators"][annotator_id]
        pending = store.next_pending(annotator_id)
        if pending is None:
            return {
                "done": True,
                "judged": mine["judged"],
                "total": mine["total"],
                "verdicts": mine["verdicts"],
            }
        position = next(
            i + 1 for i, si in enumerate(session.items) if si.item_id == pending.item_id
        )
        return {
            "done": False,
            "position": position,
            "total_items": len(session.items),
            "judged_slots": mine["judged"],
            "total_slots": mine["total"],
            "item": _item_payload(
                store.challenge_set.item(pending.item_id),
                pending,
                store.verdicts_for(annotator_id, pending.item_id),
            ),
        }

    @app.post("/projects/{project_id}/judgments", status_code=201)
    async def submit_judgment(project_id: str, request: Request, body: dict) -> dict:
        store = get_store(project_id)
        annotator_id = annotator_of(store, request)
        item_id = _require(body, "item_id")
        blind_label = _require(body, "blind_label")
        try:
            verdict = Verdict.parse(_require(body, "verdict"))
        except ScoringError as exc:
            raise ServiceError(400, "invalid-verdict", str(exc)) from exc
        try:
            record = store.submit(annotator_id, item_id, blind_label, verdict)
        except UnknownSlotError as exc:
            raise ServiceError(404, "unknown-slot", str(exc)) from exc
        except StoreError as exc:
            raise ServiceError(500, "storage-failure", str(exc)) from exc
        return {
            "item_id": record.item_id,
            "blind_label": record.blind_label,
            "verdict": record.verdict.value,
            "revision": record.revision,
        }

    @app.get("/projects/{project_id}/progress")
    async def progress(project_id: str, request: Request) -> dict:
        store = get_store(project_id)
        token = _bearer(request)
        if store.roster.annotator_for_token(token) is None and not store.roster.is_admin(token):
            raise ServiceError(401, "invalid-token", "token not in project roster")
        return store.progress()

    @app.get("/projects/{project_id}/export")
    async def export(project_id: str, request: Request) -> dict:
        store = get_store(project_id)
        token = _bearer(request)
        if not store.roster.is_admin(token):
            if store.roster.annotator_for_token(token) is not None:
                raise ServiceError(403, "forbidden", "export requires the admin token")
            raise ServiceError(401, "invalid-token", "token not in project roster")
        judgments, pending = store.export()
        doc = judgments_to_dict(judgments)
        doc["complete"] = not pending
        doc["pending"] = pending
        return doc

    return app
