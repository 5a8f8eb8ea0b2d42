"""Network front end for the console core.

Operator clients connect over WebSocket at /ws (role picked by query
parameter); the dashboard bundle, when built, is served at /. The robot is
either the embedded simulator running in-process behind the configured
link impairment, or an external process speaking newline-delimited
envelopes over TCP (--robot listen:<port>).

Everything runs on one asyncio event loop, so every core mutation stays on
a single logical thread and the core's ordering guarantees hold.
"""

from __future__ import annotations

import asyncio
import time
from contextlib import asynccontextmanager
from pathlib import Path

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import HTMLResponse
from fastapi.staticfiles import StaticFiles

from .config import ConsoleConfig
from .core import ConsoleCore, Role
from .errors import ConsoleError
from .sim import CameraSpec, LinkModel, RobotProcess
from .wire import decode, encode

CORE_TICK = 0.05

FALLBACK_PAGE = """<!doctype html>
<html><head><title>operator console</title></head>
<body style="font-family: sans-serif; background: #1b1e23; color: #e8e8e8">
<h2>operator console core is running</h2>
<p>No dashboard bundle found. Build it with <code>npm run build</code> in
<code>frontend/</code>, or connect a client to <code>/ws</code>.</p>
</body></html>"""


class ServerState:
    def __init__(
        self,
        config: ConsoleConfig | None,
        config_path: str | None,
        robot_mode: str,
        link: LinkModel | None,
        tick_rate: float,
        default_role: Role,
        recorder=None,
        cameras: list[CameraSpec] | None = None,
    ):
        self.core = ConsoleCore(
            config,
            mono=time.monotonic,
            wall=time.time,
            config_path=config_path,
            recorder=recorder,
        )
        self.robot_mode = robot_mode
        self.tick_rate = tick_rate
        self.default_role = default_role
        self.cameras = cameras
        self.uplink = link or LinkModel()
        self.downlink = LinkModel(
            base_latency=self.uplink.base_latency,
            jitter=self.uplink.jitter,
            drop_probability=self.uplink.drop_probability,
            seed=self.uplink.seed + 1,
        )
        self.robot: RobotProcess | None = None
        self._tasks: list[asyncio.Task] = []
        self._robot_writer: asyncio.StreamWriter | None = None

    # -- embedded simulator -----------------------------------------------------

    def start_embedded_sim(self) -> None:
        loop = asyncio.get_running_loop()

        def robot_send(envelope):
            due = self.uplink.transmit(envelope, time.monotonic())
            if due is None:
                return
            data = encode(envelope)
            loop.call_later(max(0.0, due - time.monotonic()), self.core.on_robot_message, data)

        self.robot = RobotProcess(
            mono=time.monotonic, wall=time.time, send=robot_send, cameras=self.cameras
        )

        def core_to_robot(data: bytes) -> None:
            try:
                envelope = decode(data)
            except ConsoleError:
                return
            due = self.downlink.transmit(envelope, time.monotonic())
            if due is None:
                return
            loop.call_later(max(0.0, due - time.monotonic()), self.robot.on_envelope, envelope)

        self.core.attach_robot(core_to_robot)
        self.robot.start()
        self._tasks.append(loop.create_task(self._sim_loop()))

    async def _sim_loop(self) -> None:
        period = 1.0 / self.tick_rate
        while True:
            self.robot.tick()
            await asyncio.sleep(period)

    async def _core_tick_loop(self) -> None:
        while True:
            self.core.tick()
            await asyncio.sleep(CORE_TICK)

    # -- external robot over TCP ---------------------------------------------------

    async def start_robot_listener(self, port: int) -> None:
        async def handle(reader: asyncio.StreamReader, writer: asyncio.StreamWriter):
            if self._robot_writer is not None:
                writer.close()
                return
            self._robot_writer = writer

            def send(data: bytes) -> None:
                writer.write(data + b"\n")

            self.core.attach_robot(send)
            try:
                while True:
                    line = await reader.readline()
                    if not line:
                        break
                    self.core.on_robot_message(line.strip())
            finally:
                self.core.detach_robot()
                self._robot_writer = None
                writer.close()

        server = await asyncio.start_server(handle, "0.0.0.0", port)
        self._tasks.append(asyncio.get_running_loop().create_task(server.serve_forever()))

    async def start(self) -> None:
        loop = asyncio.get_running_loop()
        self._tasks.append(loop.create_task(self._core_tick_loop()))
        if self.robot_mode == "embedded-sim":
            self.start_embedded_sim()
        elif self.robot_mode.startswith("listen:"):
            await self.start_robot_listener(int(self.robot_mode.split(":", 1)[1]))

    async def stop(self) -> None:
        for task in self._tasks:
            task.cancel()
        self._tasks.clear()


def build_app(state: ServerState, frontend_dir: str | None = None) -> FastAPI:
    @asynccontextmanager
    async def lifespan(app: FastAPI):
        await state.start()
        try:
            yield
        finally:
            await state.stop()

    app = FastAPI(title="operator console", lifespan=lifespan)

    @app.websocket("/ws")
    async def client_socket(socket: WebSocket):
        await socket.accept()
        role_name = socket.query_params.get("role", state.default_role.value)
        try:
            role = Role(role_name)
        except ValueError:
            role = state.default_role
        queue: asyncio.Queue[bytes] = asyncio.Queue()
        conn_id = state.core.attach_client(queue.put_nowait, role=role)

        async def writer():
            while True:
                data = await queue.get()
                await socket.send_text(data.decode("utf-8"))

        writer_task = asyncio.get_running_loop().create_task(writer())
        try:
            while True:
                message = await socket.receive_text()
                state.core.on_client_message(conn_id, message)
        except WebSocketDisconnect:
            pass
        finally:
            writer_task.cancel()
            state.core.detach_client(conn_id)

    bundle = Path(frontend_dir) if frontend_dir else None
    if bundle and bundle.is_dir():
        app.mount("/", StaticFiles(directory=str(bundle), html=True), name="dashboard")
    else:

        @app.get("/")
        async def index():
            return HTMLResponse(FALLBACK_PAGE)

    return app


def find_frontend_bundle() -> str | None:
    """Locate frontend/dist next to an installed or checked-out tree."""
    here = Path(__file__).resolve()
    for base in [here.parent, *here.parents]:
        candidate = base / "frontend" / "dist"
        if candidate.is_dir():
            return str(candidate)
    return None
