from __future__ import annotations

import logging
import os
import shlex
import subprocess
import tempfile
from dataclasses import replace

from ..logic.core import Verdict
from ..smtlib.ast import Script
from ..smtlib.printer import print_script


LOGGER = logging.getLogger(__name__)

_VERDICTS = {v.value: v for v in Verdict}


def run_external(script: Script, command: str, timeout: float) -> Verdict:
    """Run an external solver on the canonical text of ``script``.

    ``command`` is a template; ``{file}`` is replaced by the path of a
    temporary .smt2 file (appended when the placeholder is absent). The first
    stdout token decides the verdict; anything else is UNKNOWN.
    """
    text = print_script(replace(script, has_check_sat=True))
    handle, path = tempfile.mkstemp(suffix=".smt2", prefix="oracle-")
    try:
        with os.fdopen(handle, "w", encoding="utf-8") as fh:
            fh.write(text)
        parts = shlex.split(command)
        if "{file}" in command:
            args = [part.replace("{file}", path) for part in parts]
        else:
            args = parts + [path]
        try:
            proc = subprocess.run(args, capture_output=True, text=True, timeout=timeout, check=False)
        except subprocess.TimeoutExpired:
            LOGGER.warning("External solver timed out after %.1fs: %s", timeout, command)
            return Verdict.UNKNOWN
        except OSError as exc:
            LOGGER.warning("External solver could not be started (%s): %s", command, exc)
            return Verdict.UNKNOWN
    finally:
        try:
            os.unlink(path)
        except OSError:
            pass

    if proc.returncode != 0:
        LOGGER.warning("External solver exited with status %d", proc.returncode)
        return Verdict.UNKNOWN
    tokens = proc.stdout.split()
    if not tokens:
        return Verdict.UNKNOWN
    return _VERDICTS.get(tokens[0].lower(), Verdict.UNKNOWN)
