# -*- coding: utf-8 -*-
"""Stable defaults for the spin-environment toolkit.

This module intentionally contains only *stable* defaults.
Per-run scenario values (spins, temperatures, grids, seeds) are read from
INI scenario files via :mod:`spin_sbs.core.settings`.
"""

from __future__ import annotations

APP_NAME = "spin-sbs"
APP_VERSION = "1.0.0"

# Identity used for QStandardPaths (log directory lookup).
ORG_NAME = "spin-sbs"

# Spin cap: 2j <= MAX_TWICE_J
MAX_TWICE_J = 40

# Numerical tolerances
STRUCTURE_TOL = 1e-12   # Hermiticity, trace, commutators
DERIVED_TOL = 1e-10     # derived equalities, Hermitian-input check
FIDELITY_NEG_TOL = 1e-10
STATE_NEG_TOL = 1e-10
KAPPA_FAIL_TOL = 1e-9   # unit norm of the SU(2) kernel behind kappa~
QUAD_TOL = 1e-11
QUAD_MAX_DOUBLINGS = 8

# Below this beta*Omega the thermal averages switch to Boltzmann moment sums.
SMALL_BETA_OMEGA = 1e-2

# Coupling experiment defaults (random uniform couplings, intermediate temperature)
DEFAULT_BETA_OMEGA = 0.9
DEFAULT_FRACTION_SIZE = 5
DEFAULT_UNOBSERVED_SIZE = 5
DEFAULT_FRACTIONS = 1
DEFAULT_G_LOW = 0.0
DEFAULT_G_HIGH = 10.0
DEFAULT_REALIZATIONS = 100
DEFAULT_SEED = 42
DEFAULT_M = "-1/2"
DEFAULT_M_PRIME = "1/2"
DEFAULT_J_S = "1/2"
DEFAULT_J_LIST = "1/2 1 3/2 2 5/2"

# Time grid defaults (units of 1/Omega)
DEFAULT_T_START = 0.0
DEFAULT_T_STOP = 30.0
DEFAULT_T_POINTS = 600

# Output
CSV_DIGITS = 17
DEFAULT_FORMAT = "csv"   # "csv" | "json-lines"
MANIFEST_NAME = "manifest.json"
SCENARIO_COPY_NAME = "scenario.ini"

# SVG chart size (px)
SVG_WIDTH = 900
SVG_HEIGHT = 500
