#!/usr/bin/env python3
"""Exercise the HTTP clients against the bundled stub server.

All remote backends (judge, generator, embedder, grounder) speak small JSON
wire shapes.  The stub server implements every route in-process, which makes
integration tests — and this demo — run with no external services.  It can
also inject failures to show the retry policy working.
"""

import os

from vireo.modelio import HttpGenerator, HttpJudge, StubServer
from vireo.core import Frame
import numpy as np


def main() -> None:
    os.environ.setdefault("TIVI_JUDGE_API_KEY", "demo-key")
    os.environ.setdefault("TIVI_GEN_API_KEY", "demo-key")
    frame = Frame(np.full((32, 32, 3), (200, 60, 60), dtype=np.uint8))

    with StubServer(chat_replies=("A plausible clip, 7/10.",)) as stub:
        print(f"stub serving at {stub.base_url}  (routes: /chat /embed /ground /generate)")

        judge = HttpJudge(endpoint=stub.url("/chat"))
        reply = judge.chat([frame], "Rate this clip against the prompt.")
        print(f"\njudge reply: {reply!r}")
        _, body = stub.requests[-1]
        parts = body["messages"][0]["content"]
        print(f"wire payload: {sum(p['type'] == 'text' for p in parts)} text part, "
              f"{sum(p['type'] == 'image' for p in parts)} image part(s)")

        generator = HttpGenerator(endpoint=stub.url("/generate"), n_frames=4)
        clip = generator.generate(frame, "hold still", seed=0)
        print(f"generator returned {len(clip)} frames of {clip.frames[0].size}")

    # retries: the stub fails twice, the client backs off and succeeds
    with StubServer(chat_replies=("recovered",), fail_times={"/chat": 2}) as stub:
        judge = HttpJudge(endpoint=stub.url("/chat"), retry_base_delay=0.05)
        print(f"\nwith 2 injected failures: judge.chat -> {judge.chat([], 'ping')!r}")
        print(f"requests the stub saw: {len(stub.requests)} (2 failures + 1 success)")

    print("\nthe same server backs `vireo stub-server` for CLI integration runs")


if __name__ == "__main__":
    main()
