"""Substring mining over play sequences: unique patterns, tandem repeats,
and wildcard goal/threat motifs.

Sequences are plain strings over the five-letter play alphabet
{A, C, G, T, -}.  '-' is an ordinary symbol for literal mining but is not
covered by the motif wildcard 'x' unless explicitly allowed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

ALPHABET = ("A", "C", "G", "T", "-")
WILDCARD = "x"

GOAL = "goal"
THREAT = "threat"


@dataclass(frozen=True)
class PatternQuery:
    """Length band for unique-substring enumeration."""
    min_len: int
    max_len: int
    alphabet: tuple = ALPHABET

    def __post_init__(self):
        if not 1 <= self.min_len <= self.max_len:
            raise ValueError(f"need 1 <= min_len <= max_len, got "
                             f"[{self.min_len}, {self.max_len}]")


@dataclass(frozen=True)
class Motif:
    """A literal-plus-wildcard template tagged with what it precedes.

    confidence_band is the reported frequency band for the motif:
    one of '95', '75', '50', '<50' (percent).
    """
    template: str
    label: str
    confidence_band: str = "<50"

    def __post_init__(self):
        if not self.template:
            raise ValueError("motif template must be non-empty")
        bad = set(self.template) - set(ALPHABET) - {WILDCARD}
        if bad:
            raise ValueError(f"motif template contains {sorted(bad)}")
        if self.label not in (GOAL, THREAT):
            raise ValueError(f"motif label must be goal or threat, got {self.label!r}")


# Frequency bands observed for play windows preceding goals and threats.
GOAL_MOTIFS = (
    Motif("TCCCT", GOAL, "95"),
    Motif("CACCT", GOAL, "75"),
    Motif("CxCCT", GOAL, "50"),
    Motif("CCAT", GOAL, "<50"),
)
THREAT_MOTIFS = (
    Motif("CTCCC", THREAT, "95"),
    Motif("CCACC", THREAT, "75"),
    Motif("CCxCC", THREAT, "50"),
    Motif("GCAC", THREAT, "<50"),
)
DEFAULT_MOTIFS = GOAL_MOTIFS + THREAT_MOTIFS


@dataclass
class PatternReport:
    """Per-sequence occurrence rows plus located tandem runs."""
    rows: list = field(default_factory=list)        # (pattern, occurrences, sequence_id)
    tandem_runs: list = field(default_factory=list)  # (pattern, sequence_id, start, copies)


@dataclass
class AnnotatedSequence:
    """A play string with the window indices of its goal/threat events."""
    sequence_id: str
    letters: str
    events: list = field(default_factory=list)  # (window_index, label)


def enumerate_unique(sequence: str, query: PatternQuery) -> set:
    """All distinct substrings of `sequence` with length in the query band."""
    n = len(sequence)
    out = set()
    for length in range(query.min_len, min(query.max_len, n) + 1):
        for i in range(n - length + 1):
            out.add(sequence[i:i + length])
    return out


def count_occurrences(sequence: str, pattern: str) -> tuple[int, list[int]]:
    """Count possibly overlapping literal occurrences; also return starts."""
    if not pattern:
        raise ValueError("pattern must be non-empty")
    starts = []
    i = sequence.find(pattern)
    while i != -1:
        starts.append(i)
        i = sequence.find(pattern, i + 1)
    return len(starts), starts


def find_tandem_repeats(sequence: str, pattern: str) -> list[tuple[int, int]]:
    """Maximal runs of >= 2 adjacent back-to-back copies of `pattern`.

    Runs are located greedily left to right; each is reported once as
    (start_index, copy_count) and cannot be extended by another copy on
    either side.
    """
    if not pattern:
        raise ValueError("pattern must be non-empty")
    runs = []
    k = len(pattern)
    i = 0
    n = len(sequence)
    while i + 2 * k <= n:
        copies = 0
        while sequence.startswith(pattern, i + copies * k):
            copies += 1
        if copies >= 2:
            runs.append((i, copies))
            i += copies * k
        else:
            i += 1
    return runs


def match_motif(window: str, motif: Motif, wildcard_matches_idle: bool = False) -> bool:
    """True iff `window` matches the template position by position.

    'x' stands for any play letter; it does not match the idle symbol
    '-' unless wildcard_matches_idle is set.
    """
    if len(window) != len(motif.template):
        raise ValueError(f"window length {len(window)} != template "
                         f"length {len(motif.template)}")
    for w, t in zip(window, motif.template):
        if t == WILDCARD:
            if w == "-" and not wildcard_matches_idle:
                return False
            if w not in ALPHABET:
                return False
        elif w != t:
            return False
    return True


def find_motif(sequence: str, motif: Motif,
               wildcard_matches_idle: bool = False) -> list[int]:
    """Start indices of all sliding-window matches of the motif."""
    k = len(motif.template)
    return [i for i in range(len(sequence) - k + 1)
            if match_motif(sequence[i:i + k], motif, wildcard_matches_idle)]


def motif_occurrence_rate(corpus, motif: Motif, lookback: int,
                          wildcard_matches_idle: bool = False) -> float:
    """Percentage of the motif's events preceded by a motif match.

    For every annotated event carrying the motif's label, the lookback
    letters ending at the event window are scanned for a sliding match.
    The event's own window is included: the final action of a scoring
    pattern lands in the window the goal is recorded in.
    """
    if lookback < len(motif.template):
        raise ValueError("lookback shorter than the motif template")
    hits = 0
    total = 0
    for seq in corpus:
        for index, label in seq.events:
            if label != motif.label:
                continue
            total += 1
            window = seq.letters[max(0, index + 1 - lookback):index + 1]
            if find_motif(window, motif, wildcard_matches_idle):
                hits += 1
    if total == 0:
        raise ValueError(f"corpus has no events labelled {motif.label!r}")
    return 100.0 * hits / total


def mine_report(sequences, query: PatternQuery) -> PatternReport:
    """Full report over (sequence_id, letters) pairs: occurrence counts for
    every enumerated pattern plus all tandem runs per sequence."""
    report = PatternReport()
    for sequence_id, letters in sequences:
        for pattern in sorted(enumerate_unique(letters, query)):
            count, _ = count_occurrences(letters, pattern)
            report.rows.append((pattern, count, sequence_id))
            for start, copies in find_tandem_repeats(letters, pattern):
                report.tandem_runs.append((pattern, sequence_id, start, copies))
    return report
