"""Drive the whole workbench end to end on a desk-scale corpus.

Six stages connected only by files: simulate matches, encode them as
letter sequences, mine patterns and motif rates, train the window
classifier, train the classifier system, and log GA diagnostics.  The
same resolved config replays to identical artifacts.
"""

import json
import tempfile
from pathlib import Path

from matchdna import pipeline_run, resolve_config


def main():
    out = Path(tempfile.mkdtemp(prefix="matchdna-demo-")) / "run"
    config = resolve_config({
        "seed": 42,
        "out_dir": str(out),
        "simulate": {"matches": 3, "cycles": 1000},
        "train_lcs": {"iters": 5000},
        "diagnose": {"generations": 4, "run_steps": 200, "trials": 3},
    })

    artifacts = pipeline_run(config)
    print("stages completed:")
    for stage, path in artifacts.items():
        print(f"  {stage:<12} {Path(path).relative_to(out)}")

    manifest = json.loads((out / "manifest.json").read_text())
    print(f"\ncorpus: {len(manifest['entries'])} matches, "
          f"window = {manifest['window_cycles']} cycles")

    report = json.loads((out / "mining/report.json").read_text())
    print("top mined patterns:", report["patterns"][:5])

    metrics = json.loads((out / "fmaca/metrics.json").read_text())
    print(f"window classifier: {metrics['n_windows']} training windows, "
          f"accuracy {metrics['training_accuracy']:.3f}")

    curve = (out / "lcs/curve.csv").read_text().splitlines()
    if len(curve) > 2:
        print("classifier system final block:", curve[-1])

    print(f"\nall artifacts under {out}")


if __name__ == "__main__":
    main()
