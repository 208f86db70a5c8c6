"""Scorer protocol v1 server loop.

Wire contract (LF-terminated UTF-8 lines, one request in flight):

    harness -> adapter   HELLO forgebench/1
    adapter -> harness   READY <name>
    harness -> adapter   VIDEO <request-id> <n>, then n lines FRAME <path>
    adapter -> harness   SCORES <request-id> <n>, then n lines S <float>
    harness -> adapter   BYE            (adapter exits 0)

An unreadable frame aborts only its request with one line
`ERR <request-id> <message>`; a malformed harness line exits nonzero.
"""

from __future__ import annotations

import argparse
import importlib
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, TextIO

PROTOCOL_HELLO = "HELLO forgebench/1"
DEFAULT_HOOK = "forgebench_adapter.hooks:mean_green"

Hook = Callable[[bytes], float]


@dataclass
class AdapterConfig:
    model_hook: str = DEFAULT_HOOK
    log_path: str | None = None
    name: str = "forgebench-adapter"


def resolve_hook(spec: str) -> Hook:
    """Resolve 'package.module:callable' to the scoring function."""
    module_name, _, attr = spec.partition(":")
    if not module_name or not attr:
        raise ValueError(f"hook must look like 'module:callable', got {spec!r}")
    module = importlib.import_module(module_name)
    try:
        hook = getattr(module, attr)
    except AttributeError:
        raise ValueError(f"module {module_name!r} has no attribute {attr!r}") from None
    if not callable(hook):
        raise ValueError(f"hook {spec!r} is not callable")
    return hook


def clamp_score(value: float, log: Callable[[str], None]) -> float:
    value = float(value)
    if value != value:  # NaN
        log("hook returned NaN, clamping to 0.0")
        return 0.0
    if value < 0.0:
        log(f"hook returned {value!r}, clamping to 0.0")
        return 0.0
    if value > 1.0:
        log(f"hook returned {value!r}, clamping to 1.0")
        return 1.0
    return value


def serve(config: AdapterConfig, stdin: TextIO, stdout: TextIO) -> int:
    log_file = open(config.log_path, "a", encoding="utf-8") if config.log_path else None

    def log(message: str) -> None:
        target = log_file if log_file is not None else sys.stderr
        print(f"[{config.name}] {message}", file=target, flush=True)

    def send(line: str) -> None:
        stdout.write(line + "\n")
        stdout.flush()

    try:
        hook = resolve_hook(config.model_hook)

        hello = stdin.readline()
        if hello.strip() != PROTOCOL_HELLO:
            log(f"bad handshake line: {hello.strip()!r}")
            return 1
        send(f"READY {config.name}")

        while True:
            line = stdin.readline()
            if line == "":
                log("harness closed the stream without BYE")
                return 1
            line = line.rstrip("\n")
            if line == "BYE":
                return 0
            parts = line.split()
            if len(parts) != 3 or parts[0] != "VIDEO":
                log(f"malformed request line: {line!r}")
                return 1
            request_id = parts[1]
            try:
                n = int(parts[2])
            except ValueError:
                log(f"malformed frame count: {line!r}")
                return 1

            paths = []
            malformed = None
            for _ in range(n):
                frame_line = stdin.readline()
                if frame_line == "":
                    log("harness closed mid-request")
                    return 1
                frame_line = frame_line.rstrip("\n")
                if not frame_line.startswith("FRAME "):
                    malformed = frame_line
                    break
                paths.append(frame_line[len("FRAME "):])
            if malformed is not None:
                log(f"malformed frame line: {malformed!r}")
                return 1

            scores = []
            failed = None
            for path in paths:
                try:
                    payload = Path(path).read_bytes()
                    scores.append(clamp_score(hook(payload), log))
                except Exception as exc:  # noqa: BLE001 - reported via ERR line
                    failed = f"{path}: {exc}"
                    break
            if failed is not None:
                send(f"ERR {request_id} {failed}")
                continue
            send(f"SCORES {request_id} {n}")
            for score in scores:
                send(f"S {score!r}")
    finally:
        if log_file is not None:
            log_file.close()


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description="forgebench scorer-protocol adapter")
    parser.add_argument(
        "--hook", default=DEFAULT_HOOK,
        help=f"scoring callable as 'module:function' (default: {DEFAULT_HOOK})",
    )
    parser.add_argument("--log", default=None, help="append warnings to this file")
    parser.add_argument("--name", default="forgebench-adapter")
    args = parser.parse_args(argv)

    config = AdapterConfig(model_hook=args.hook, log_path=args.log, name=args.name)
    try:
        resolve_hook(config.model_hook)
    except (ValueError, ImportError) as exc:
        print(f"cannot resolve hook: {exc}", file=sys.stderr)
        return 2
    return serve(config, sys.stdin, sys.stdout)


if __name__ == "__main__":
    sys.exit(main())
