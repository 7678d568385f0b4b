"""Entropy and mutual-information probes for rule vectors.

Site entropy measures how busy a cell's binarized time series is;
lagged mutual information measures how much one step tells you about
the next.  Three calibration vectors bracket the scale, then the same
probes run over a short GA trace.
"""

from matchdna import (
    EDGE_OF_CHAOS_ENTROPY,
    DiagnosticsConfig,
    GaConfig,
    ga_diagnostics,
    measure_entropy,
    measure_mi,
)
from matchdna.diagnostics import diagnostics_to_csv

CONFIG = DiagnosticsConfig(window=10, run_steps=400, trials=5, rng_seed=3)


def main():
    print("calibration vectors (6 cells each):")
    frozen = measure_entropy([0] * 6, CONFIG)
    print(f"  all rule   0 (constant):    entropy {frozen.mean_entropy:.3f}")
    identity = measure_mi([204] * 6, CONFIG)
    print(f"  all rule 204 (identity):    MI      {identity.mean_mi:.3f}")
    blinker = measure_entropy([51] * 6, CONFIG)
    print(f"  all rule  51 (alternating): entropy {blinker.mean_entropy:.3f}")
    print(f"  useful-computation reference level: {EDGE_OF_CHAOS_ENTROPY}")

    mixed = [51, 238, 51, 204, 51, 252]
    e = measure_entropy(mixed, CONFIG)
    mi = measure_mi(mixed, CONFIG)
    print(f"\nmixed vector {mixed}:")
    print(f"  entropy {e.mean_entropy:.3f} +/- {e.std_dev:.3f}, "
          f"MI {mi.mean_mi:.3f}")

    print("\nper-generation diagnostics of a small classifier GA:")
    rows = ga_diagnostics(6, GaConfig(population_size=10, generations=4,
                                      rng_seed=3), CONFIG)
    print(diagnostics_to_csv(rows))


if __name__ == "__main__":
    main()
