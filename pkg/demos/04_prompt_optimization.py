#!/usr/bin/env python3
"""Optimize a task prompt through judge feedback on generated clips.

One optimization step: generate candidate clips from the current prompt,
rank them, ask the judge what is wrong with the best attempt (a textual
loss), how the prompt should change (a textual gradient), and for a revised
prompt.  The trace records every stage.  Here the judge is scripted so the
loop runs offline; swap in an HTTP judge for the real thing.
"""

import json
from pathlib import Path

from vireo import taskgen
from vireo.core import Dataset, Difficulty, SCHEMA_VERSION, Task
from vireo.modelio import OracleGenerator, ScriptedJudge
from vireo.tpo import TpoConfig, run_tpo, save_trace

OUT = Path(__file__).parent / "out" / "tpo"


def main() -> None:
    sample = taskgen.generate(Task.COUNTING_OBJECTS, Difficulty.EASY, seed=5)
    dataset = Dataset(None, SCHEMA_VERSION, [sample], {})

    judge = ScriptedJudge([
        # step 1: loss, gradient, revised prompt
        "The clip adds the shapes too quickly to count.",
        "Ask for one shape to appear at a time, holding each for a beat.",
        sample.prompt + " Add exactly one shape at a time, pausing after each.",
        # step 2
        "Better pacing, but the final count is still ambiguous.",
        "Ask for the final frame to hold steady with all shapes visible.",
        sample.prompt + " Add one shape at a time and hold the final frame.",
    ])

    trace = run_tpo(
        sample, OracleGenerator(dataset), judge,
        TpoConfig(n_steps=2, n_candidates=2),
    )

    print(f"optimizing: {sample.id}\n")
    for step, (loss, grad) in enumerate(zip(trace.losses, trace.gradients), 1):
        print(f"step {step}")
        print(f"  loss     : {loss}")
        print(f"  gradient : {grad}")
        print(f"  prompt   : ...{trace.prompts[step][-60:]}")
    print(f"\njudge calls: {len(judge.transcript)} (3 per step)")
    print(f"prompt versions: {len(trace.prompts)} (initial + one per step)")

    OUT.mkdir(parents=True, exist_ok=True)
    path = OUT / "trace.json"
    save_trace(trace, path)
    print(f"trace saved to {path}")
    candidates = json.loads(path.read_text())["candidates"]
    print(f"candidate clips per step: {[len(step) for step in candidates]}")


if __name__ == "__main__":
    main()
