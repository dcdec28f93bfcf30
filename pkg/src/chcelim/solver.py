"""External CHC solver bridge: emit SMT-LIB, run the configured command with
a timeout, classify the outcome, and parse the model on sat.

No solver is vendored; the command is a template with a {file} placeholder.
When no real solver is configured (CHC_SOLVER_CMD unset), the bundled stub
(`python -m chcelim.stub_solver`) is used: it replays canned answers or
recognizes all-false models, which is enough for offline CI of the bridge.
"""

from __future__ import annotations

import os
import shlex
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .core import Program
from .smt2 import Model, Smt2Error, emit_smt2, parse_model

SAT, UNSAT, UNKNOWN, TIMEOUT, ERROR = \
    "sat", "unsat", "unknown", "timeout", "error"


@dataclass(frozen=True)
class SolverConfig:
    command: str                 # e.g. "z3 -smt2 {file} fp.engine=spacer"
    timeout: float = 60.0
    extra_options: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")

    def argv(self, file: str) -> list[str]:
        parts = shlex.split(self.command)
        out = [p.replace("{file}", file) for p in parts]
        for k, v in self.extra_options:
            out.append(f"{k}={v}")
        return out


def default_config(timeout: float = 60.0) -> SolverConfig:
    cmd = os.environ.get("CHC_SOLVER_CMD")
    if not cmd:
        cmd = f"{shlex.quote(sys.executable)} -m chcelim.stub_solver {{file}}"
    return SolverConfig(cmd, timeout)


@dataclass
class SolveOutcome:
    status: str                       # sat | unsat | unknown | timeout | error
    model: Optional[Model] = None
    wall_time: float = 0.0
    raw_output: str = ""
    detail: str = ""

    @property
    def is_sat(self) -> bool:
        return self.status == SAT


def _classify(stdout: str) -> Optional[str]:
    for line in stdout.splitlines():
        word = line.strip()
        if word in (SAT, UNSAT, UNKNOWN):
            return word
    return None


def solve(program: Program, cfg: SolverConfig,
          workdir: Optional[str] = None,
          keep_script: Optional[str] = None) -> SolveOutcome:
    """Emit the program, run the solver, classify, parse the model on sat."""
    script = emit_smt2(program)
    if keep_script:
        path = Path(keep_script)
        path.write_text(script)
        file = str(path)
        cleanup = False
    else:
        fd, file = tempfile.mkstemp(suffix=".smt2", dir=workdir)
        os.write(fd, script.encode())
        os.close(fd)
        cleanup = True
    t0 = time.monotonic()
    try:
        proc = subprocess.run(cfg.argv(file), capture_output=True, text=True,
                              timeout=cfg.timeout)
    except subprocess.TimeoutExpired as e:
        wall = time.monotonic() - t0
        raw = (e.stdout or "") if isinstance(e.stdout, str) else ""
        return SolveOutcome(TIMEOUT, None, wall, raw,
                            f"timed out after {cfg.timeout}s")
    except FileNotFoundError as e:
        return SolveOutcome(ERROR, None, time.monotonic() - t0, "",
                            f"solver executable not found: {e}")
    finally:
        if cleanup:
            try:
                os.unlink(file)
            except OSError:
                pass
    wall = time.monotonic() - t0
    raw = proc.stdout + (("\n" + proc.stderr) if proc.stderr.strip() else "")
    status = _classify(proc.stdout)
    if status is None:
        return SolveOutcome(ERROR, None, wall, raw,
                            f"unrecognized solver output (exit {proc.returncode})")
    if status != SAT:
        return SolveOutcome(status, None, wall, raw)
    try:
        model = parse_model(proc.stdout, program)
    except Smt2Error as e:
        return SolveOutcome(ERROR, None, wall, raw, f"model rejected: {e}")
    return SolveOutcome(SAT, model, wall, raw)


def baseline_attempt(program: Program, cfg: SolverConfig,
                     workdir: Optional[str] = None,
                     keep_script: Optional[str] = None) -> SolveOutcome:
    """Semantically identical to solve(); separate verb for the negative
    control on untransformed clauses."""
    return solve(program, cfg, workdir, keep_script)
