"""Classify play windows with an attractor-basin tree.

A window of action letters becomes a vector of cell values; a GA finds
a rule vector whose attractor basins separate the classes, and impure
basins recurse into child nodes.  The trained tree doubles as a shot
gate: windows that land in goal basins get the go-ahead.
"""

from matchdna import GaConfig, ca_feedback, classify, fit_window_classifier
from matchdna.attractor_tree import encode_window

GOAL_WINDOWS = ["TCCCT", "CACCT", "CGCCT", "CTCCT", "ACCCT", "TTCCT"]
THREAT_WINDOWS = ["CTCCC", "CCACC", "GCACA", "CCGCC", "ACTCC", "CCCCA"]


def main():
    windows = GOAL_WINDOWS + THREAT_WINDOWS
    labels = ["goal"] * len(GOAL_WINDOWS) + ["threat"] * len(THREAT_WINDOWS)

    tree = fit_window_classifier(windows, labels,
                                 GaConfig(population_size=30, generations=20,
                                          rng_seed=5))
    print(f"trained tree: depth {tree.depth()}, {tree.n_cells} cells per window")

    correct = sum(classify(tree, encode_window(w)) == tree.goal_class
                  for w in GOAL_WINDOWS)
    print(f"goal windows recovered: {correct}/{len(GOAL_WINDOWS)}")

    print("\nshot-gate decisions:")
    for window in ("TCCCT", "CCACC", "GGGGG", "CT"):
        decision = ca_feedback(tree, window)
        verdict = "proceed" if decision.proceed else "veto"
        note = " (window too short to judge)" if decision.flagged else ""
        print(f"  {window:<6} -> {verdict}{note}")


if __name__ == "__main__":
    main()
