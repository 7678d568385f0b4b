"""Entropy and mutual-information diagnostics for fuzzy CA rule vectors.

Fuzzy states are binarized at a threshold (ties count as 1) and measured
with bit-level Shannon statistics: per-cell temporal entropy over a
moving window, and lagged mutual information between whole states with
cells as the samples.  Normalized MI divides by the smaller marginal
entropy so that an exact copy scores 1; constant patterns score 0 by
convention.

EDGE_OF_CHAOS_ENTROPY is the reference entropy level that evolved
rule populations are reported to approach; it is context for reading
reports, not a gate.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .fuzzy_ca import RuleSet

EDGE_OF_CHAOS_ENTROPY = 0.84

CSV_SCHEMA_HEADER = "# schema_version=1"
CSV_COLUMNS = ("generation", "n", "mean_entropy", "std_entropy", "mean_mi")


@dataclass(frozen=True)
class DiagnosticsConfig:
    window: int = 10
    run_steps: int = 10000
    trials: int = 15
    binarize_threshold: float = 0.5
    mi_lag: int = 1
    rng_seed: int = 0

    def __post_init__(self):
        if self.window < 2:
            raise ValueError("window must be >= 2")
        if self.run_steps < self.window:
            raise ValueError("run_steps must be >= window")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not 0.0 < self.binarize_threshold < 1.0:
            raise ValueError("binarize_threshold must be in (0, 1)")
        if self.mi_lag < 1:
            raise ValueError("mi_lag must be >= 1")


@dataclass
class EntropyReport:
    mean_entropy: float
    std_dev: float
    per_trial: list = field(default_factory=list)


@dataclass
class MiReport:
    mean_mi: float
    per_trial: list = field(default_factory=list)


def binarize(state, threshold: float = 0.5) -> np.ndarray:
    """Fuzzy values to bits; values equal to the threshold become 1."""
    return (np.asarray(state, dtype=float) >= threshold).astype(np.uint8)


def _h_bernoulli(p):
    """Shannon entropy of a 0/1 source with P(1) = p, elementwise."""
    p = np.asarray(p, dtype=float)
    out = np.zeros_like(p)
    interior = (p > 0.0) & (p < 1.0)
    q = p[interior]
    out[interior] = -q * np.log2(q) - (1.0 - q) * np.log2(1.0 - q)
    return out


def site_entropy(window_bits) -> float:
    """Mean per-cell Shannon entropy of one binarized window.

    Accepts a (w,) series for a single cell or a (w, n) block; the
    result is the average over cells.
    """
    b = np.asarray(window_bits)
    if b.ndim == 1:
        b = b[:, None]
    if b.ndim != 2 or b.shape[0] < 1:
        raise ValueError("window must be a non-empty 1-D or 2-D bit array")
    return float(np.mean(_h_bernoulli(b.mean(axis=0))))


def mutual_information(p1, p2) -> float:
    """Normalized MI between two equal-length bit patterns.

    Cells are the samples of the joint distribution.  The plug-in MI is
    divided by min(H(p1), H(p2)); if either marginal is constant the
    result is 0 by convention.
    """
    a = np.asarray(p1).ravel()
    b = np.asarray(p2).ravel()
    if a.shape != b.shape:
        raise ValueError("patterns must have equal lengths")
    n = a.size
    if n == 0:
        raise ValueError("patterns must be non-empty")
    pa = a.mean()
    pb = b.mean()
    h_a = float(_h_bernoulli(pa))
    h_b = float(_h_bernoulli(pb))
    if h_a == 0.0 or h_b == 0.0:
        return 0.0
    mi = 0.0
    for x in (0, 1):
        px = pa if x else 1.0 - pa
        for y in (0, 1):
            py = pb if y else 1.0 - pb
            pxy = np.mean((a == x) & (b == y))
            if pxy > 0.0:
                mi += pxy * np.log2(pxy / (px * py))
    return float(np.clip(mi / min(h_a, h_b), 0.0, 1.0))


def _trial_bit_series(rules, config: DiagnosticsConfig) -> np.ndarray:
    """Binarized trajectories, shape (run_steps + 1, trials, n).

    Each trial starts from its own seeded uniform state; all trials step
    together as one batch.
    """
    rs = RuleSet.coerce(rules)
    seqs = np.random.SeedSequence(config.rng_seed).spawn(config.trials)
    cur = np.vstack([np.random.default_rng(s).random(rs.n) for s in seqs])
    bits = np.empty((config.run_steps + 1, config.trials, rs.n), dtype=np.uint8)
    bits[0] = cur >= config.binarize_threshold
    for t in range(1, config.run_steps + 1):
        cur = rs.apply(cur)
        bits[t] = cur >= config.binarize_threshold
    return bits


def _analysis_slice(bits, window):
    """Drop a transient of up to `window` steps, keeping at least one
    window's worth of samples."""
    start = min(window, bits.shape[0] - window)
    return bits[start:]


def measure_entropy(rules, config: DiagnosticsConfig = DiagnosticsConfig()) -> EntropyReport:
    """Moving-window site entropy, averaged within trials, mean/std across."""
    w = config.window
    series = _analysis_slice(_trial_bit_series(rules, config), w)
    # rolling per-cell one-counts via cumulative sums
    csum = np.cumsum(series, axis=0, dtype=np.int64)
    pad = np.zeros((1,) + csum.shape[1:], dtype=np.int64)
    csum = np.concatenate([pad, csum], axis=0)
    counts = csum[w:] - csum[:-w]          # (windows, trials, n)
    h_table = _h_bernoulli(np.arange(w + 1) / w)
    per_trial = h_table[counts].mean(axis=(0, 2))
    return EntropyReport(mean_entropy=float(per_trial.mean()),
                         std_dev=float(per_trial.std()),
                         per_trial=[float(v) for v in per_trial])


def measure_mi(rules, config: DiagnosticsConfig = DiagnosticsConfig()) -> MiReport:
    """Mean normalized MI between states at lag mi_lag, per trial."""
    lag = config.mi_lag
    series = _analysis_slice(_trial_bit_series(rules, config), config.window)
    if series.shape[0] <= lag:
        raise ValueError("run too short for the requested mi_lag")
    a = series[:-lag].astype(np.float64)   # (T, trials, n)
    b = series[lag:].astype(np.float64)
    n = a.shape[2]
    pa = a.mean(axis=2)                    # (T, trials)
    pb = b.mean(axis=2)
    h_a = _h_bernoulli(pa)
    h_b = _h_bernoulli(pb)
    mi = np.zeros_like(pa)
    for x in (0, 1):
        px = pa if x else 1.0 - pa
        for y in (0, 1):
            py = pb if y else 1.0 - pb
            pxy = ((a == x) & (b == y)).sum(axis=2) / n
            good = pxy > 0.0
            with np.errstate(divide="ignore", invalid="ignore"):
                term = pxy * np.log2(pxy / (px * py))
            mi += np.where(good, np.nan_to_num(term), 0.0)
    h_min = np.minimum(h_a, h_b)
    norm = np.where(h_min > 0.0, np.clip(mi / np.where(h_min > 0, h_min, 1.0),
                                         0.0, 1.0), 0.0)
    per_trial = norm.mean(axis=0)
    return MiReport(mean_mi=float(per_trial.mean()),
                    per_trial=[float(v) for v in per_trial])


# ----- per-generation GA diagnostics ------------------------------------------

def rule_vector_diagnostics(rules, config: DiagnosticsConfig, generation: int = 0) -> dict:
    ent = measure_entropy(rules, config)
    mi = measure_mi(rules, config)
    return {"generation": generation, "n": len(RuleSet.coerce(rules)),
            "mean_entropy": ent.mean_entropy, "std_entropy": ent.std_dev,
            "mean_mi": mi.mean_mi}


def ga_diagnostics(n: int, ga_config, diag_config: DiagnosticsConfig,
                   n_per_class: int = 25) -> list:
    """Evolve a rule vector on a synthetic 2-class task and measure the
    per-generation best, one CSV row per generation.

    The task is the standard separated-band set: class 1 features in
    [0, 0.3], class 2 in [0.7, 1.0], n cells wide.
    """
    from .attractor_tree import _evolve_rules, GaConfig  # local to avoid cycle

    if not isinstance(ga_config, GaConfig):
        raise TypeError("ga_config must be a GaConfig")
    rng = np.random.default_rng(np.random.SeedSequence(ga_config.rng_seed).spawn(1)[0])
    lo = rng.uniform(0.0, 0.3, size=(n_per_class, n))
    hi = rng.uniform(0.7, 1.0, size=(n_per_class, n))
    patterns = np.vstack([lo, hi])
    labels = np.array([1] * n_per_class + [2] * n_per_class)

    rows = []

    def on_generation(gen, best_rules, best_fit):
        rows.append(rule_vector_diagnostics(best_rules, diag_config, generation=gen))

    _evolve_rules(patterns, labels, ga_config,
                  np.random.default_rng(ga_config.rng_seed),
                  on_generation=on_generation)
    return rows


def diagnostics_to_csv(rows) -> str:
    buf = io.StringIO()
    buf.write(CSV_SCHEMA_HEADER + "\n")
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        out = dict(row)
        for key in ("mean_entropy", "std_entropy", "mean_mi"):
            out[key] = f"{row[key]:.6f}"
        writer.writerow(out)
    return buf.getvalue()
