"""WebSocket control endpoint for live sessions.

One asyncio task owns the session and executes the tick loop; client
handlers only enqueue events, so the engine-thread contract holds with
tasks in place of threads. Every completed unit is broadcast to all
connected clients as a snapshot:

    {"tu": n, "state": ..., "objects": [{"id", "state", "remaining"}],
     "pendingPoints": [...], "messages": [...], "flags": [...]}

Clients steer the run with {"trigger": "pointId"}, {"set": {"var": k,
"value": v}} or {"transport": "start"|"pause"} and receive one ack per
message. The score document is served over plain HTTP GET /score on the
same address so a UI can fetch the timeline once and then listen.
"""

from __future__ import annotations

import asyncio
import json
import logging
from typing import Optional

from websockets.asyncio.server import serve

from .compiler import CompiledScore
from .runtime import RuntimeConfig, Session
from .score import score_to_dict

log = logging.getLogger(__name__)


class ControlServer:
    """Serves one session over ws://host:port with HTTP /score alongside."""

    def __init__(self, cs: CompiledScore, cfg: Optional[RuntimeConfig] = None,
                 host: str = "127.0.0.1", port: int = 8765):
        self.cs = cs
        self.cfg = cfg or RuntimeConfig()
        self.session = Session(cs, self.cfg)
        self.host = host
        self.port = port  # rewritten with the bound port once listening
        self.score_json = json.dumps(score_to_dict(cs.score), indent=2,
                                     sort_keys=True) + "\n"
        self._clients: set = set()
        self._running = asyncio.Event()  # transport: set = playing
        self._stop = asyncio.Event()

    # -- client messages

    def _handle(self, raw) -> dict:
        try:
            msg = json.loads(raw)
        except (json.JSONDecodeError, UnicodeDecodeError):
            return {"ack": "error", "status": "error", "reason": "not JSON"}
        if not isinstance(msg, dict) or len(msg) != 1:
            return {"ack": "error", "status": "error",
                    "reason": "expected one of trigger/set/transport"}
        (key, body), = msg.items()
        if key == "trigger":
            if not isinstance(body, str):
                return {"ack": "trigger", "status": "error",
                        "reason": "point id must be a string"}
            ack = self.session.inject_event("ev_" + body)
            return {"ack": "trigger", "point": body, **ack}
        if key == "set":
            if (not isinstance(body, dict) or set(body) != {"var", "value"}
                    or not isinstance(body.get("var"), str)
                    or not isinstance(body.get("value"), int)
                    or isinstance(body.get("value"), bool)):
                return {"ack": "set", "status": "error",
                        "reason": 'expected {"var": name, "value": integer}'}
            ack = self.session.inject_event(body["var"], body["value"])
            return {"ack": "set", "var": body["var"], **ack}
        if key == "transport":
            if body == "start":
                if self.session.state in ("done", "aborted"):
                    return {"ack": "transport", "status": "error",
                            "reason": self.session.state}
                if self.session.state == "ready":
                    self.session.start()
                self._running.set()
                return {"ack": "transport", "status": "accepted",
                        "mode": "running"}
            if body == "pause":
                self._running.clear()
                return {"ack": "transport", "status": "accepted",
                        "mode": "paused"}
            return {"ack": "transport", "status": "error",
                    "reason": "expected start or pause"}
        return {"ack": "error", "status": "error", "reason": f"unknown {key}"}

    async def _client(self, conn) -> None:
        self._clients.add(conn)
        try:
            await conn.send(json.dumps(self.session.snapshot()))
            async for raw in conn:
                await conn.send(json.dumps(self._handle(raw)))
        except Exception:
            log.debug("client connection dropped", exc_info=True)
        finally:
            self._clients.discard(conn)

    async def _broadcast(self, text: str) -> None:
        for conn in list(self._clients):
            try:
                await conn.send(text)
            except Exception:
                self._clients.discard(conn)

    # -- the clock

    async def _tick_loop(self) -> None:
        loop = asyncio.get_running_loop()
        period = self.cfg.tu_period_ms / 1000.0
        while not self._stop.is_set():
            waiter = asyncio.ensure_future(self._running.wait())
            stopper = asyncio.ensure_future(self._stop.wait())
            await asyncio.wait({waiter, stopper},
                               return_when=asyncio.FIRST_COMPLETED)
            waiter.cancel()
            stopper.cancel()
            if self._stop.is_set():
                return
            if self.session.state != "running":
                self._running.clear()
                continue
            t0 = loop.time()
            self.session.tick()
            await self._broadcast(json.dumps(self.session.snapshot()))
            if self.session.state != "running":
                self._running.clear()  # completed or aborted: hold the clock
                continue
            await asyncio.sleep(max(0.0, period - (loop.time() - t0)))

    # -- plain HTTP alongside the websocket handshake

    def _process_request(self, conn, request):
        if request.path == "/score":
            resp = conn.respond(200, self.score_json)
            del resp.headers["Content-Type"]
            resp.headers["Content-Type"] = "application/json"
            resp.headers["Cache-Control"] = "no-store"
            resp.headers["Access-Control-Allow-Origin"] = "*"
            return resp
        if "upgrade" not in request.headers.get("Connection", "").lower():
            return conn.respond(404, "not found\n")
        return None  # proceed with the websocket handshake

    # -- lifecycle

    async def serve_forever(self, ready_cb=None) -> None:
        async with serve(self._client, self.host, self.port,
                         process_request=self._process_request) as server:
            self.port = server.sockets[0].getsockname()[1]
            if ready_cb is not None:
                ready_cb(self.host, self.port)
            ticker = asyncio.ensure_future(self._tick_loop())
            try:
                await self._stop.wait()
            finally:
                self._stop.set()
                ticker.cancel()

    def stop(self) -> None:
        self._stop.set()

    def run(self, ready_cb=None) -> None:
        """Blocking entry point; returns once stop() is called."""
        asyncio.run(self.serve_forever(ready_cb))
