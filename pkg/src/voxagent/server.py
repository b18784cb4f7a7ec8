"""HTTP + WebSocket API over the controller, consumed by the web UI and
the evaluation harness.

Turn input is either JSON {"text": ...} or a multipart WAV upload (field
name "audio", 16 kHz mono PCM-16). The event stream replays from ?since=N
so clients can reconnect without losing anything.
"""

from __future__ import annotations

import asyncio
import base64
import json
from typing import Any, Optional

from fastapi import FastAPI, File, Request, UploadFile, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse

from .config import SessionConfig
from .controller import Controller, TurnResult
from .errors import (
    InvalidConfigError,
    LlmError,
    ParseExhaustedError,
    SessionBusyError,
    SessionClosedError,
    SpeechError,
    UnknownSessionError,
)
from .speech import check_wav, encode_wav
from .state import SessionState, save_session


def _step_json(step) -> dict[str, Any]:
    return {
        "index": step.index,
        "action": {"kind": step.action.kind, "payload": step.action.payload,
                   "thought": step.action.thought},
        "observation": {"source": step.observation.source, "outcome": step.observation.outcome,
                        "content": step.observation.content,
                        "structured": step.observation.structured},
    }


def _turn_json(result: TurnResult) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "agent_message": result.agent_message,
        "steps_taken": [_step_json(s) for s in result.steps_taken],
        "dialog_state": result.dialog_state,
    }
    if result.audio is not None:
        doc["audio_b64"] = base64.b64encode(encode_wav(result.audio)).decode("ascii")
    return doc


def create_app(controller: Controller,
               default_config: SessionConfig | None = None) -> FastAPI:
    app = FastAPI(title="voxagent")
    base_config = default_config or SessionConfig()

    @app.exception_handler(UnknownSessionError)
    async def _unknown(request, exc):
        return JSONResponse(status_code=404, content={"error": str(exc)})

    @app.exception_handler(SessionBusyError)
    async def _busy(request, exc):
        return JSONResponse(status_code=409, content={"error": str(exc)})

    @app.exception_handler(SessionClosedError)
    async def _closed(request, exc):
        return JSONResponse(status_code=409, content={"error": f"session closed: {exc}"})

    @app.exception_handler(InvalidConfigError)
    async def _bad_config(request, exc):
        return JSONResponse(status_code=400, content={"error": str(exc)})

    @app.exception_handler(SpeechError)
    async def _speech(request, exc):
        return JSONResponse(status_code=422, content={"error": f"asr/tts failed: {exc}"})

    @app.exception_handler(LlmError)
    async def _llm(request, exc):
        return JSONResponse(status_code=502, content={"error": str(exc)})

    @app.exception_handler(ParseExhaustedError)
    async def _parse(request, exc):
        return JSONResponse(status_code=502, content={"error": str(exc)})

    @app.post("/sessions")
    def create_session(overrides: Optional[dict[str, Any]] = None):
        config = base_config
        if overrides:
            merged = base_config.to_dict()
            merged.update(overrides)
            config = SessionConfig.from_dict(merged)
        session_id = controller.create_session(config)
        return {"session_id": session_id}

    @app.post("/sessions/{session_id}/turns")
    async def post_turn(session_id: str, request: Request,
                        audio: UploadFile | None = File(default=None)):
        content_type = request.headers.get("content-type", "")
        if audio is not None:
            clip = check_wav(await audio.read())
            result = await asyncio.to_thread(
                controller.handle_user_turn, session_id, clip=clip)
        elif content_type.startswith("application/json"):
            body = await request.json()
            text = body.get("text", "")
            if not isinstance(text, str) or not text.strip():
                return JSONResponse(status_code=400,
                                    content={"error": "body must carry non-empty 'text'"})
            result = await asyncio.to_thread(
                controller.handle_user_turn, session_id, text=text)
        else:
            return JSONResponse(
                status_code=400,
                content={"error": "send JSON {text} or multipart WAV in field 'audio'"})
        return _turn_json(result)

    @app.get("/sessions/{session_id}/transcript")
    def get_transcript(session_id: str):
        utterances, dialog_state = controller.get_transcript(session_id)
        return {
            "utterances": [
                {"speaker": u.speaker, "text": u.text, "timestamp_ms": u.timestamp_ms}
                for u in utterances
            ],
            "dialog_state": dialog_state,
        }

    @app.get("/sessions/{session_id}/state")
    def get_state(session_id: str):
        state: SessionState = controller.get_state(session_id)
        return json.loads(save_session(state))

    @app.delete("/sessions/{session_id}")
    def close_session(session_id: str):
        path = controller.close_session(session_id)
        return {"closed": True, "saved_to": path}

    @app.websocket("/sessions/{session_id}/events")
    async def events(websocket: WebSocket, session_id: str, since: int = 0):
        await websocket.accept()
        cursor = since
        try:
            controller.get_state(session_id)
        except UnknownSessionError:
            await websocket.close(code=4404)
            return
        try:
            while True:
                for event in controller.events_since(session_id, cursor):
                    await websocket.send_text(json.dumps(event, ensure_ascii=False))
                    cursor = event["seq"]
                await asyncio.sleep(0.05)
        except (WebSocketDisconnect, RuntimeError):
            return

    return app
