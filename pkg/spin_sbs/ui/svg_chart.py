# -*- coding: utf-8 -*-
"""Quick-look SVG line charts.

Uses a pyqtgraph PlotWidget rendered off screen and its SVG exporter; no
window is shown. Purely for inspection; the tabular outputs are the data.
"""

from __future__ import annotations

import os
from typing import Sequence, Tuple

import numpy as np

from spin_sbs import config
from spin_sbs.core.errors import OutputError

Series = Tuple[str, Sequence[float]]


def write_svg_chart(path: str, x: Sequence[float], series: Sequence[Series], title: str = "",
                    x_label: str = "t (1/Omega)", y_label: str = "") -> str:
    os.environ.setdefault("QT_QPA_PLATFORM", "offscreen")
    import pyqtgraph as pg
    from pyqtgraph.exporters import SVGExporter

    pg.mkQApp()
    plot = pg.PlotWidget(title=title)
    plot.setBackground("w")
    plot.showGrid(x=True, y=True, alpha=0.3)
    plot.addLegend()
    plot.setLabel("bottom", x_label)
    plot.setLabel("left", y_label)
    plot.resize(config.SVG_WIDTH, config.SVG_HEIGHT)

    xs = np.asarray(x, dtype=float)
    n = max(len(series), 1)
    for i, (label, y) in enumerate(series):
        pen = pg.mkPen(pg.intColor(i, hues=n), width=2)
        plot.plot(xs, np.asarray(y, dtype=float), pen=pen, name=label)

    try:
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        SVGExporter(plot.getPlotItem()).export(path)
    except OSError as e:
        raise OutputError(f"could not write {path}: {e}") from e
    finally:
        plot.close()
    return path
