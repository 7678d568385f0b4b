"""Walk a fuzzy cellular automaton until it settles.

Each cell holds a membership value in [0, 1] and follows one of the
supported OR/NOR rules; a vector of per-cell rules defines the update.
The script replays a small 4-cell configuration step by step, prints the
neighbor-dependency structure, and shows the complement duality that
pairs every OR rule with its NOR mirror.
"""

import numpy as np

from matchdna import (
    COMPLEMENT_OF,
    dependency_matrix,
    eval_rule,
    evolve,
    format_rule_vector,
    parse_rule_vector,
)


def main():
    rules = parse_rule_vector("238,254,238,252")
    start = [0.80, 0.20, 0.20, 0.00]

    print(f"rule vector <{format_rule_vector(rules)}>, start {start}")
    trajectory = evolve(start, rules)
    for t, state in enumerate(trajectory.states):
        print(f"  P({t}) = ({', '.join(f'{v:.2f}' for v in state)})")
    terminal = trajectory.terminal
    if terminal.kind == "fixed_point":
        print(f"fixed point reached at step {terminal.index}")
    elif terminal.kind == "cycle":
        print(f"cycle of period {terminal.period} from step {terminal.start}")
    else:
        print(f"no convergence within {terminal.steps} steps")

    print("\nneighbor dependencies (rows = cells, cols = l/s/r read):")
    for row in dependency_matrix(rules).astype(int):
        print("  " + "".join(str(v) for v in row))

    print("\ncomplement duality: NOR(x) == 1 - OR(x) for every neighborhood")
    rng = np.random.default_rng(1)
    base, comp = 238, COMPLEMENT_OF[238]
    worst = 0.0
    for left, self_state, right in rng.random((200, 3)):
        a = eval_rule(base, left, self_state, right)
        b = eval_rule(comp, left, self_state, right)
        worst = max(worst, abs(a - (1.0 - b)))
    print(f"  rules {base}/{comp}: max |OR - (1 - NOR)| over 200 draws = {worst:.2e}")


if __name__ == "__main__":
    main()
