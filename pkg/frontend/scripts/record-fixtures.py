#!/usr/bin/env python3
"""Record service responses as JSON fixtures for the explorer contract tests.

Regenerate with:  python3 scripts/record-fixtures.py
The dataset is fully seeded, so the recorded payloads are reproducible.
"""

import json
import tempfile
import threading
import urllib.request
from pathlib import Path

from costlens.service import create_server
from costlens.synth import generate_suite, write_dataset

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "test" / "fixtures"


def record():
    FIXTURE_DIR.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        suite = generate_suite(3, 9, height=48, width=64, noise=0.3)
        write_dataset(suite, tmp)
        server = create_server(tmp, port=0)
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        base = f"http://127.0.0.1:{server.server_address[1]}"

        def get(path):
            with urllib.request.urlopen(base + path) as resp:
                return json.loads(resp.read())

        def post(path, doc):
            req = urllib.request.Request(
                base + path, data=json.dumps(doc).encode(),
                headers={"Content-Type": "application/json"})
            with urllib.request.urlopen(req) as resp:
                return json.loads(resp.read())

        scenes = get("/api/scenes")
        scene_id = scenes[0]["id"]
        fixtures = {
            "scenes.json": scenes,
            "decide_robotistic.json": post(
                "/api/decide",
                {"scene": scene_id, "alpha": 1, "beta": 0, "gamma": 0}),
            "decide_altruistic.json": post(
                "/api/decide",
                {"scene": scene_id, "alpha": 0, "beta": 1, "gamma": 0}),
            "sweep_recall_person_roi1.json": get(
                "/api/sweep?metric=recall&class=person&roi=1&step=0.5"),
            "corners.json": get("/api/corners"),
        }
        server.shutdown()
        server.server_close()
    for name, doc in fixtures.items():
        (FIXTURE_DIR / name).write_text(json.dumps(doc, indent=2) + "\n")
        print(f"wrote {FIXTURE_DIR / name}")


if __name__ == "__main__":
    record()
