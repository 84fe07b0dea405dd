# -*- coding: utf-8 -*-
"""Output directory of one CLI run.

Files are written atomically (temporary file in the target directory, then
``os.replace``). If the run fails, :class:`RunWriter` used as a context
manager removes every file it wrote, so no partial output is left behind.
The manifest records what is needed to reproduce the run.
"""

from __future__ import annotations

import json
import logging
import os
import platform
import sys
import tempfile
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import scipy

from spin_sbs import config
from spin_sbs.core.errors import OutputError

logger = logging.getLogger(__name__)


def atomic_write_text(path: str, text: str) -> str:
    directory = os.path.dirname(os.path.abspath(path))
    tmp = None
    try:
        os.makedirs(directory, exist_ok=True)
        fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
        tmp = None
    except OSError as e:
        raise OutputError(f"could not write {path}: {e}") from e
    finally:
        if tmp is not None and os.path.exists(tmp):
            os.unlink(tmp)
    return path


class RunWriter:
    """Collects the files of one run under ``out_dir``."""

    def __init__(self, out_dir: str):
        self.out_dir = os.path.abspath(out_dir or os.getcwd())
        self.files: List[str] = []

    def path(self, name: str) -> str:
        return os.path.join(self.out_dir, name)

    def write_text(self, name: str, text: str) -> str:
        path = atomic_write_text(self.path(name), text)
        self.files.append(path)
        logger.info("wrote %s", path)
        return path

    def adopt(self, path: str) -> str:
        """Track a file produced by another writer (e.g. the SVG exporter)."""
        self.files.append(os.path.abspath(path))
        return path

    def write_manifest(self, command: Sequence[str], scenario: Dict[str, str], seed: int,
                       wall_time_s: float, extra: Optional[Dict[str, Any]] = None) -> str:
        outputs = [os.path.relpath(p, self.out_dir) for p in self.files]
        info = {
            "app": config.APP_NAME,
            "version": config.APP_VERSION,
            "created_utc": datetime.now(timezone.utc).isoformat(),
            "command": list(command),
            "seed": int(seed),
            "scenario": scenario,
            "scenario_file": config.SCENARIO_COPY_NAME,
            "wall_time_s": float(wall_time_s),
            "environment": {
                "python": sys.version.split()[0],
                "platform": platform.platform(),
                "numpy": np.__version__,
                "scipy": scipy.__version__,
            },
            "outputs": outputs,
        }
        if extra:
            info.update(extra)
        return self.write_text(config.MANIFEST_NAME, json.dumps(info, indent=2) + "\n")

    def discard(self) -> None:
        for p in reversed(self.files):
            try:
                os.unlink(p)
            except FileNotFoundError:
                pass
            except OSError as e:
                logger.warning("could not remove partial output %s: %s", p, e)
        self.files.clear()

    def __enter__(self) -> "RunWriter":
        return self

    def __exit__(self, exc_type, exc, tb) -> bool:
        if exc_type is not None:
            logger.warning("run failed, removing %d partial file(s)", len(self.files))
            self.discard()
        return False
