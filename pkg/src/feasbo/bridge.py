"""Line-delimited JSON bridge to an external objective evaluator.

Each request is one UTF-8 line ``{"id":<int>,"x":[<reals>]}`` written to the
child's stdin; the child answers with one line ``{"id":<int>,"f":<real>}`` on
stdout. Floats are written with ``repr`` so they round-trip exactly.

Modes
-----
``per_call``
    spawn the command once per evaluation, send one request, read one reply.
``persistent``
    keep one child alive and exchange one request/response pair at a time.
``file``
    compatibility shim for batch-script workflows: the command contains
    ``{input}`` and ``{output}`` placeholders; the request line is written to
    the input file and the response line read back from the output file.
"""

from __future__ import annotations

import json
import os
import queue
import shlex
import subprocess
import tempfile
import threading
import time
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

MODES = ("per_call", "persistent", "file")


class EvaluatorError(RuntimeError):
    pass


class EvaluationTimeout(EvaluatorError):
    def __init__(self, request_id: int, timeout: float):
        super().__init__(f"request {request_id} timed out after {timeout}s")
        self.request_id = request_id


class ProtocolError(EvaluatorError):
    def __init__(self, message: str, raw: str):
        super().__init__(f"{message}: {raw!r}")
        self.raw = raw


class ChildFailureError(EvaluatorError):
    def __init__(self, message: str, returncode: Optional[int], stderr: str):
        super().__init__(f"{message} (exit status {returncode}); stderr: {stderr.strip()!r}")
        self.returncode = returncode
        self.stderr = stderr


class InfeasibleRequestError(EvaluatorError):
    """Refused to send a point that fails the configured feasibility guard."""


@dataclass(frozen=True)
class EvaluatorSpec:
    command: Union[str, Sequence[str]]
    timeout: float = 60.0
    mode: str = "per_call"

    def __post_init__(self):
        if not self.timeout > 0:
            raise ValueError("timeout must be positive")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if not self.argv:
            raise ValueError("empty evaluator command")

    @property
    def argv(self) -> list:
        if isinstance(self.command, str):
            return shlex.split(self.command)
        return list(self.command)


def encode_request(request_id: int, x) -> str:
    values = [float(v) for v in np.asarray(x, dtype=float).ravel()]
    return json.dumps({"id": int(request_id), "x": values}, separators=(",", ":"), allow_nan=False) + "\n"


def decode_request(line: str) -> tuple:
    record = json.loads(line)
    return int(record["id"]), [float(v) for v in record["x"]]


def encode_response(request_id: int, f: float) -> str:
    return json.dumps({"id": int(request_id), "f": float(f)}, separators=(",", ":")) + "\n"


def decode_response(line: str) -> tuple:
    """Parse a response line into ``(id, f)``; raise ProtocolError on anything else."""
    try:
        record = json.loads(line)
    except json.JSONDecodeError:
        raise ProtocolError("response is not valid JSON", line) from None
    if not isinstance(record, dict) or set(record) != {"id", "f"}:
        raise ProtocolError("response must have exactly the fields id and f", line)
    rid, f = record["id"], record["f"]
    if isinstance(rid, bool) or not isinstance(rid, int) or rid < 0:
        raise ProtocolError("response id must be a nonnegative integer", line)
    if isinstance(f, bool) or not isinstance(f, (int, float)):
        raise ProtocolError("response f must be a number", line)
    return rid, float(f)


class ExternalEvaluator:
    """Callable objective backed by an external process.

    :param guard: optional predicate checked before each request; points
        failing it raise :class:`InfeasibleRequestError` and are never sent.
    """

    def __init__(self, spec: EvaluatorSpec, guard: Optional[Callable] = None):
        self.spec = spec
        self.guard = guard
        self._next_id = 0
        self._abandoned: set = set()
        self._proc: Optional[subprocess.Popen] = None
        self._lines: Optional[queue.Queue] = None
        self._stderr: list = []
        self.requests: list = []

    def __call__(self, x) -> float:
        return self.evaluate(x)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def evaluate(self, x) -> float:
        x = np.asarray(x, dtype=float)
        if self.guard is not None and not self.guard(x):
            raise InfeasibleRequestError(f"refusing to send infeasible point {x.tolist()}")
        rid = self._next_id
        self._next_id += 1
        line = encode_request(rid, x)
        self.requests.append((rid, x.copy()))
        if self.spec.mode == "per_call":
            return self._per_call(rid, line)
        if self.spec.mode == "file":
            return self._file_call(rid, line)
        return self._persistent_call(rid, line)

    def _match(self, rid: int, raw: str) -> float:
        got, f = decode_response(raw)
        if got != rid:
            raise ProtocolError(f"expected response id {rid}, got {got}", raw)
        return f

    def _per_call(self, rid: int, line: str) -> float:
        try:
            done = subprocess.run(self.spec.argv, input=line, capture_output=True, text=True,
                                  timeout=self.spec.timeout, encoding="utf-8")
        except subprocess.TimeoutExpired:
            raise EvaluationTimeout(rid, self.spec.timeout) from None
        if done.returncode != 0:
            raise ChildFailureError("evaluator failed", done.returncode, done.stderr)
        replies = [ln for ln in done.stdout.splitlines() if ln.strip()]
        if not replies:
            raise ChildFailureError("evaluator exited without a response", done.returncode, done.stderr)
        return self._match(rid, replies[0])

    def _file_call(self, rid: int, line: str) -> float:
        with tempfile.TemporaryDirectory() as tmp:
            src, dst = os.path.join(tmp, "request.json"), os.path.join(tmp, "response.json")
            with open(src, "w", encoding="utf-8") as fh:
                fh.write(line)
            argv = [a.replace("{input}", src).replace("{output}", dst) for a in self.spec.argv]
            try:
                done = subprocess.run(argv, capture_output=True, text=True, timeout=self.spec.timeout)
            except subprocess.TimeoutExpired:
                raise EvaluationTimeout(rid, self.spec.timeout) from None
            if done.returncode != 0:
                raise ChildFailureError("evaluator failed", done.returncode, done.stderr)
            if not os.path.exists(dst):
                raise ChildFailureError("evaluator wrote no output file", done.returncode, done.stderr)
            with open(dst, encoding="utf-8") as fh:
                raw = fh.readline()
        return self._match(rid, raw.rstrip("\n"))

    def _start(self):
        self._proc = subprocess.Popen(
            self.spec.argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE, stderr=subprocess.PIPE,
            text=True, encoding="utf-8", bufsize=1,
        )
        self._lines = queue.Queue()
        self._stderr = []

        def pump(stream, sink):
            for ln in stream:
                sink(ln)
            sink(None)

        threading.Thread(target=pump, args=(self._proc.stdout, self._lines.put), daemon=True).start()
        threading.Thread(target=pump, args=(self._proc.stderr, self._stderr.append), daemon=True).start()

    def _child_failure(self, message: str) -> ChildFailureError:
        try:
            code = self._proc.wait(timeout=1.0)
        except subprocess.TimeoutExpired:
            code = None
        stderr = "".join(s for s in self._stderr if s)
        self._proc = None
        return ChildFailureError(message, code, stderr)

    def _persistent_call(self, rid: int, line: str) -> float:
        if self._proc is None or self._proc.poll() is not None:
            self._start()
        try:
            self._proc.stdin.write(line)
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError):
            raise self._child_failure("evaluator closed its input") from None
        end = time.monotonic() + self.spec.timeout
        while True:
            remaining = end - time.monotonic()
            if remaining <= 0:
                self._abandoned.add(rid)
                raise EvaluationTimeout(rid, self.spec.timeout)
            try:
                raw = self._lines.get(timeout=remaining)
            except queue.Empty:
                self._abandoned.add(rid)
                raise EvaluationTimeout(rid, self.spec.timeout) from None
            if raw is None:
                raise self._child_failure("evaluator exited without a response")
            raw = raw.rstrip("\n")
            if not raw.strip():
                continue
            got, f = decode_response(raw)
            if got in self._abandoned:
                # late answer to a request that already timed out
                self._abandoned.discard(got)
                continue
            if got != rid:
                raise ProtocolError(f"expected response id {rid}, got {got}", raw)
            return f

    def close(self):
        if self._proc is not None:
            try:
                self._proc.stdin.close()
            except OSError:
                pass
            try:
                self._proc.wait(timeout=self.spec.timeout)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()
            self._proc = None


def evaluate_external(spec: EvaluatorSpec, x) -> float:
    """One-shot evaluation of ``x`` through a fresh evaluator."""
    with ExternalEvaluator(spec) as ev:
        return ev.evaluate(x)

