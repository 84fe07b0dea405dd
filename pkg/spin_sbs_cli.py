# -*- coding: utf-8 -*-
"""spin-sbs command-line launcher.

Thin wrapper around :func:`spin_sbs.app.main`.

Dependencies:
  pip install -r requirements.txt

Run:
  python spin_sbs_cli.py demo fig1 --out runs/fig1
  python spin_sbs_cli.py thermal --j 3/2 --g 3 --t 0.5
"""

from spin_sbs.app import main


if __name__ == "__main__":
    raise SystemExit(main())
