# -*- coding: utf-8 -*-
"""Logging setup.

Creates a per-user rotating log file plus console output.

The default location uses :class:`QStandardPaths.AppDataLocation`, so it is
consistent across Windows/Linux/macOS; ``log_dir`` overrides it.
"""

from __future__ import annotations

import logging
import os
from logging.handlers import RotatingFileHandler
from typing import Optional

from PyQt5 import QtCore

from spin_sbs import config

_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

# handlers installed by setup_logging, replaced on each call
_installed = []


def default_log_dir() -> str:
    QtCore.QCoreApplication.setOrganizationName(config.ORG_NAME)
    QtCore.QCoreApplication.setApplicationName(config.APP_NAME)
    base = QtCore.QStandardPaths.writableLocation(QtCore.QStandardPaths.AppDataLocation)
    if not base:
        base = os.path.abspath(os.getcwd())
    return os.path.join(base, "logs")


def setup_logging(level: int = logging.INFO, log_dir: Optional[str] = None) -> str:
    """Configure root logging to a rotating file and the console.

    Returns:
        The log file path.
    """
    log_dir = log_dir or default_log_dir()
    os.makedirs(log_dir, exist_ok=True)
    log_path = os.path.join(log_dir, "spin_sbs.log")

    root = logging.getLogger()
    root.setLevel(level)
    for h in _installed:
        root.removeHandler(h)
        h.close()
    _installed.clear()

    fmt = logging.Formatter(_FORMAT)

    fh = RotatingFileHandler(log_path, maxBytes=2 * 1024 * 1024, backupCount=5, encoding="utf-8")
    fh.setFormatter(fmt)
    fh.setLevel(level)

    ch = logging.StreamHandler()
    ch.setFormatter(fmt)
    ch.setLevel(level)

    for h in (fh, ch):
        root.addHandler(h)
        _installed.append(h)

    logging.getLogger(__name__).info("Logging initialized: %s", log_path)
    return log_path
