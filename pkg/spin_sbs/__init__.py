# -*- coding: utf-8 -*-

"""Decoherence factors, fidelities and SBS bounds for central-spin models."""

from spin_sbs.config import APP_NAME, APP_VERSION

__all__ = ["APP_NAME", "APP_VERSION"]
