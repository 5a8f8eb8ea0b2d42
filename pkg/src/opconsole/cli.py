"""Command-line entry points: serve the console, run a standalone robot
simulator, measure crack lengths in snapshots, and replay recorded
sessions."""

from __future__ import annotations

import argparse
import asyncio
import json
import sys
import time
from pathlib import Path

from . import config as config_store
from .core import Role
from .errors import ConsoleError
from .harness import SimHarness, TraceRecorder, replay_trace
from .measure import Homography, rectify_image, run_session
from .sim import CameraSpec, LinkModel, RobotProcess
from .wire import decode, encode


def _parse_camera(spec: str) -> CameraSpec:
    if ":" in spec:
        name, fps = spec.split(":", 1)
        return CameraSpec(id=name, fps=float(fps))
    return CameraSpec(id=spec)


def _link_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--latency", type=float, default=0.0, help="base link latency in seconds")
    parser.add_argument("--jitter", type=float, default=0.0, help="uniform jitter half-width in seconds")
    parser.add_argument("--drop", type=float, default=0.0, help="drop probability in [0, 1]")
    parser.add_argument("--seed", type=int, default=0, help="link randomness seed")


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .server import ServerState, build_app, find_frontend_bundle

    config = config_store.load(args.config) if args.config else config_store.default_config()
    recorder = None
    record_file = None
    if args.record:
        record_file = open(args.record, "w", encoding="utf-8")

        def recorder(t, conn, envelope):
            record_file.write(
                json.dumps({"t": t, "conn": conn, "data": encode(envelope).decode()}) + "\n"
            )
            record_file.flush()

    state = ServerState(
        config=config,
        config_path=args.config,
        robot_mode=args.robot,
        link=LinkModel(args.latency, args.jitter, args.drop, seed=args.seed),
        tick_rate=args.tick_rate,
        default_role=Role(args.role),
        recorder=recorder,
        cameras=[_parse_camera(c) for c in args.camera] if args.camera else None,
    )
    app = build_app(state, frontend_dir=args.frontend or find_frontend_bundle())
    host, _, port = args.listen.rpartition(":")
    try:
        uvicorn.run(app, host=host or "127.0.0.1", port=int(port), log_level="warning")
    finally:
        if record_file:
            record_file.close()
    return 0


async def _run_standalone_sim(args: argparse.Namespace) -> int:
    host, _, port = args.connect.rpartition(":")
    reader, writer = await asyncio.open_connection(host or "127.0.0.1", int(port))
    loop = asyncio.get_running_loop()
    uplink = LinkModel(args.latency, args.jitter, args.drop, seed=args.seed)
    downlink = LinkModel(args.latency, args.jitter, args.drop, seed=args.seed + 1)

    def send(envelope):
        due = uplink.transmit(envelope, time.monotonic())
        if due is None:
            return
        data = encode(envelope) + b"\n"
        loop.call_later(max(0.0, due - time.monotonic()), writer.write, data)

    robot = RobotProcess(
        mono=time.monotonic,
        wall=time.time,
        send=send,
        cameras=[_parse_camera(c) for c in args.camera] if args.camera else None,
    )
    robot.start()
    scenario = []
    if args.scenario:
        scenario = json.loads(Path(args.scenario).read_text())
        scenario.sort(key=lambda e: e.get("t", 0.0))
    started = time.monotonic()
    for event in scenario:
        def fire(event=event):
            kind = event.get("event")
            if kind == "hardware_estop":
                robot.set_hardware_estop(event["name"], bool(event["pressed"]))
            elif kind == "diagnostic":
                from .telemetry import DiagnosticLevel

                robot.set_diagnostic(
                    event["name"], DiagnosticLevel[event["level"]], event.get("message", "")
                )
        loop.call_later(max(0.0, event.get("t", 0.0)), fire)

    async def read_loop():
        while True:
            line = await reader.readline()
            if not line:
                return
            try:
                envelope = decode(line.strip())
            except ConsoleError:
                continue
            due = downlink.transmit(envelope, time.monotonic())
            if due is None:
                continue
            loop.call_later(max(0.0, due - time.monotonic()), robot.on_envelope, envelope)

    reader_task = loop.create_task(read_loop())
    period = 1.0 / args.tick_rate
    try:
        while not reader_task.done():
            robot.tick()
            await asyncio.sleep(period)
    finally:
        reader_task.cancel()
        writer.close()
    return 0


def cmd_sim(args: argparse.Namespace) -> int:
    return asyncio.run(_run_standalone_sim(args))


def cmd_measure(args: argparse.Namespace) -> int:
    clicks = json.loads(Path(args.clicks).read_text())
    try:
        session = run_session(clicks)
    except ConsoleError as exc:
        print(f"measurement failed: {exc}", file=sys.stderr)
        return 1
    output = json.dumps(session, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(output + "\n")
    else:
        print(output)
    for warning in session["warnings"]:
        print(f"warning: {warning}", file=sys.stderr)
    if args.rectified:
        if not args.image:
            print("--rectified needs --image", file=sys.stderr)
            return 2
        import numpy as np
        from PIL import Image

        image = np.asarray(Image.open(args.image).convert("RGB"))
        homography = Homography(matrix=tuple(tuple(row) for row in session["homography"]))
        scale = session["target_px_per_cm"]
        width = int(round(session["panel_cm"][0] * scale))
        height = int(round(session["panel_cm"][1] * scale))
        out = rectify_image(homography, image, (width, height))
        Image.fromarray(out).save(args.rectified)
        print(f"rectified view written to {args.rectified}", file=sys.stderr)
    return 0


def cmd_replay(args: argparse.Namespace) -> int:
    config = config_store.load(args.config) if args.config else config_store.default_config()
    entries = TraceRecorder.load(args.trace)
    harness = SimHarness(
        config=config,
        seed=args.seed,
        base_latency=args.latency,
        jitter=args.jitter,
        drop=args.drop,
    )
    replay_trace(harness, entries, settle=args.settle)
    summary = {
        "events_replayed": len(entries),
        "virtual_time": harness.clock.mono(),
        "clients": {c.name: c.model.shared_state() for c in harness.clients},
        "robot": {
            "x": harness.robot.robot.x,
            "y": harness.robot.robot.y,
            "yaw": harness.robot.robot.yaw,
            "estop_latched": harness.robot.robot.estop_latched,
        },
    }
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="opconsole", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the console gateway and dashboard server")
    serve.add_argument("--config", help="console profile (JSON property tree)")
    serve.add_argument("--listen", default="127.0.0.1:8765", help="addr:port for HTTP/WebSocket")
    serve.add_argument(
        "--robot",
        default="embedded-sim",
        help="'embedded-sim' or 'listen:<port>' for an external robot over TCP",
    )
    serve.add_argument("--role", choices=[r.value for r in Role], default="developer",
                       help="default role for connecting clients")
    serve.add_argument("--record", help="record inbound client envelopes to this JSONL file")
    serve.add_argument("--tick-rate", type=float, default=100.0, help="sim tick rate in Hz")
    serve.add_argument("--camera", action="append", help="camera id[:fps], repeatable")
    serve.add_argument("--frontend", help="path to the built dashboard bundle")
    _link_args(serve)
    serve.set_defaults(fn=cmd_serve)

    sim = sub.add_parser("sim", help="run the robot simulator as a separate process")
    sim.add_argument("--connect", required=True, help="console robot listener host:port")
    sim.add_argument("--tick-rate", type=float, default=100.0)
    sim.add_argument("--camera", action="append", help="camera id[:fps], repeatable")
    sim.add_argument("--scenario", help="JSON timeline of scripted robot events")
    _link_args(sim)
    sim.set_defaults(fn=cmd_sim)

    measure = sub.add_parser("measure", help="rectify a snapshot and measure marked cracks")
    measure.add_argument("--clicks", required=True, help="click script JSON")
    measure.add_argument("--image", help="snapshot PNG (needed for --rectified)")
    measure.add_argument("--out", help="write the session document here instead of stdout")
    measure.add_argument("--rectified", help="write a rectified PNG preview here")
    measure.set_defaults(fn=cmd_measure)

    replay = sub.add_parser("replay", help="re-run a recorded session against a fresh sim")
    replay.add_argument("trace", help="JSONL trace recorded by serve --record")
    replay.add_argument("--config", help="console profile used for the original session")
    replay.add_argument("--settle", type=float, default=2.0, help="extra virtual seconds after the last event")
    _link_args(replay)
    replay.set_defaults(fn=cmd_replay)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
