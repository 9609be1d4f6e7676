"""
Serve tiles over HTTP
=====================

Starts the tile service on the demo checkpoint and corpus.  Try:

    curl http://127.0.0.1:8000/meta
    curl -o tile.png "http://127.0.0.1:8000/tile?image_id=tex00&x=0&y=0&w=48&h=48&scale=3.5"

or point the viewer in frontend/ at it.  Ctrl-C stops the server.
"""

from pathlib import Path

import uvicorn

from texsr.service import app_from_paths

here = Path(__file__).parent
app = app_from_paths(
    here / "out" / "run" / "last.ckpt",
    here / "out" / "corpus",
)
uvicorn.run(app, host="127.0.0.1", port=8000)
