"""
Loading shot logs and free-throw logs into per-player, per-game sequences.

Both readers work on a canonical column set. A ``schema_map`` translates
canonical names to whatever headers the source file uses, so the same code
reads the NBA stats shot log and a Basketball-Reference free-throw scrape.
"""

from __future__ import annotations

import csv
import enum
import logging
import re
import unicodedata
from collections import defaultdict
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, TextIO

import numpy as np

log = logging.getLogger(__name__)

REGULATION_PERIODS = 4
REGULATION_SECONDS = 720.0
OVERTIME_SECONDS = 300.0
MAX_PERIOD = 8

SHOT_COLUMNS = (
    "game_id", "player_id", "player_name", "period", "clock_remaining_s", "made",
    "shot_distance_ft", "dribbles", "defender_distance_ft",
)
FREE_THROW_COLUMNS = (
    "game_id", "player_id", "player_name", "trip_id", "attempt_index", "trip_size",
    "made", "technical_flag",
)
# columns a file may omit without a schema error
_OPTIONAL = {"player_name", "player_id", "trip_id", "technical_flag"}


class SchemaError(ValueError):
    """A mapped column is missing from the source header."""


class PriorOutcome(str, enum.Enum):
    MAKE = "MAKE"
    MISS = "MISS"
    UNKNOWN = "UNKNOWN"


@dataclass(frozen=True)
class RowError:
    line: int
    message: str


@dataclass(frozen=True)
class ShotEvent:
    player_id: str
    game_id: str
    period: int
    clock_remaining: float
    made: bool
    shot_distance: float
    dribbles: int
    defender_distance: float
    prior_outcome: PriorOutcome = PriorOutcome.UNKNOWN
    player_name: str = ""
    row: int = field(default=0, compare=False)

    @property
    def elapsed(self) -> float:
        return elapsed_game_time(self.period, self.clock_remaining)


@dataclass(frozen=True)
class FreeThrowTrip:
    player_id: str
    game_id: str
    outcomes: tuple

    @property
    def trip_size(self) -> int:
        return len(self.outcomes)


@dataclass(frozen=True)
class PlayerGameSequence:
    player_id: str
    game_id: str
    events: tuple

    @property
    def outcomes(self) -> np.ndarray:
        return np.fromiter((e.made for e in self.events), dtype=bool, count=len(self.events))

    @property
    def elapsed_game_time(self) -> np.ndarray:
        return np.array([e.elapsed for e in self.events], dtype=float)

    def __len__(self):
        return len(self.events)


# --------------------------------------------------------------------------
# helpers

def normalize_name(name: str) -> str:
    """Case-folded, accent- and punctuation-free key for a player name."""
    s = unicodedata.normalize("NFKD", name)
    s = "".join(c for c in s if not unicodedata.combining(c))
    s = re.sub(r"[^\w\s]", "", s.casefold())
    return " ".join(s.split())


def period_length(period: int) -> float:
    return REGULATION_SECONDS if period <= REGULATION_PERIODS else OVERTIME_SECONDS


def elapsed_game_time(period: int, clock_remaining: float) -> float:
    """Seconds since tip-off: completed periods plus time used in this one."""
    done = REGULATION_SECONDS * min(period - 1, REGULATION_PERIODS)
    done += OVERTIME_SECONDS * max(period - 1 - REGULATION_PERIODS, 0)
    return done + period_length(period) - clock_remaining


def read_schema_map(source) -> dict:
    """Parse a flat ``canonical=source_header`` mapping file.

    Blank lines and ``#`` comments are ignored.
    """
    text = _read_text(source)
    out = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise SchemaError(f"line {n}: expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _read_text(source):
    if hasattr(source, "read"):
        return source.read()
    with open(source, encoding="utf-8") as f:
        return f.read()


def _open_stream(source):
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        return open(source, encoding="utf-8", newline=""), True
    return source, False


def _resolve_columns(header, canonical, schema_map):
    schema_map = dict(schema_map or {})
    index = {h.strip(): i for i, h in enumerate(header)}
    cols = {}
    for name in canonical:
        src = schema_map.get(name, name)
        if src in index:
            cols[name] = index[src]
        elif name in schema_map or name not in _OPTIONAL:
            raise SchemaError(f"column {src!r} (for {name!r}) not found in header")
    if "player_id" not in cols and "player_name" not in cols:
        raise SchemaError("need a player_id or player_name column")
    return cols


def _parse_bool(s: str) -> bool:
    v = s.strip().casefold()
    if v in ("1", "true", "t", "yes", "y", "made", "make", "hit", "h"):
        return True
    if v in ("0", "false", "f", "no", "n", "missed", "miss", "m", ""):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _parse_clock(s: str) -> float:
    s = s.strip()
    if ":" in s:
        m, sec = s.split(":", 1)
        return 60 * int(m) + float(sec)
    return float(s)


def _nonneg(x, what):
    if not x >= 0:
        raise ValueError(f"{what} must be >= 0, got {x}")
    return x


def _player_key(raw, cols):
    if "player_id" in cols:
        pid = raw[cols["player_id"]].strip()
        if pid:
            return pid
    return normalize_name(raw[cols["player_name"]])


# --------------------------------------------------------------------------
# shot log

def _shot_from_row(raw, cols, line) -> ShotEvent:
    period = int(raw[cols["period"]])
    if not 1 <= period <= MAX_PERIOD:
        raise ValueError(f"period {period} outside 1..{MAX_PERIOD}")
    clock = _nonneg(_parse_clock(raw[cols["clock_remaining_s"]]), "clock")
    if clock > period_length(period):
        raise ValueError(f"clock {clock} exceeds period length")
    return ShotEvent(
        player_id=_player_key(raw, cols),
        game_id=raw[cols["game_id"]].strip(),
        period=period,
        clock_remaining=clock,
        made=_parse_bool(raw[cols["made"]]),
        shot_distance=_nonneg(float(raw[cols["shot_distance_ft"]]), "shot distance"),
        dribbles=int(_nonneg(int(float(raw[cols["dribbles"]])), "dribbles")),
        defender_distance=_nonneg(float(raw[cols["defender_distance_ft"]]), "defender distance"),
        player_name=raw[cols["player_name"]].strip() if "player_name" in cols else "",
        row=line,
    )


def shot_sort_key(e: ShotEvent):
    return (e.game_id, e.period, -e.clock_remaining, e.row)


def parse_shot_log(source, schema_map: Mapping | None = None, delimiter=","):
    """Read a shot log into ``ShotEvent`` objects.

    Parameters
    ----------
    source : path or text stream
        Delimited text with a header row.
    schema_map : mapping, optional
        Canonical column name -> source header. Unmapped names are looked
        up verbatim.

    Returns
    -------
    events : list of ShotEvent
        Sorted by (player, game, period, clock descending, source row).
    errors : list of RowError
        One entry per skipped row.
    """
    stream, owned = _open_stream(source)
    try:
        reader = csv.reader(stream, delimiter=delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError("empty input: header row required") from None
        cols = _resolve_columns(header, SHOT_COLUMNS, schema_map)
        width = max(cols.values()) + 1
        events, errors = [], []
        for line, raw in enumerate(reader, 2):
            if not raw:
                continue
            if len(raw) < width:
                errors.append(RowError(line, "short row"))
                continue
            try:
                events.append(_shot_from_row(raw, cols, line))
            except ValueError as exc:
                errors.append(RowError(line, str(exc)))
    finally:
        if owned:
            stream.close()
    if errors:
        log.info("skipped %d malformed shot rows", len(errors))
    events.sort(key=lambda e: (e.player_id,) + shot_sort_key(e))
    return events, errors


def write_shot_log(events: Iterable[ShotEvent], stream: TextIO, delimiter=","):
    """Serialise events in the canonical shot-log schema."""
    w = csv.writer(stream, delimiter=delimiter, lineterminator="\n")
    w.writerow(SHOT_COLUMNS)
    for e in events:
        w.writerow([e.game_id, e.player_id, e.player_name, e.period, repr(e.clock_remaining),
                    int(e.made), repr(e.shot_distance), e.dribbles, repr(e.defender_distance)])


# --------------------------------------------------------------------------
# free throws

def parse_free_throws(source, schema_map: Mapping | None = None, delimiter=","):
    """Read free-throw attempts and group them into trips.

    Trips are keyed by ``trip_id`` when the column exists, otherwise a new
    trip starts whenever ``attempt_index`` fails to increase for the same
    (player, game). Technical/flagrant trips and single-attempt trips are
    dropped. A trip where an attempt index exceeds the trip size is
    rejected with an error.

    Returns ``(trips, errors)``.
    """
    stream, owned = _open_stream(source)
    try:
        reader = csv.reader(stream, delimiter=delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError("empty input: header row required") from None
        cols = _resolve_columns(header, FREE_THROW_COLUMNS, schema_map)
        width = max(cols.values()) + 1
        errors = []
        trips = {}  # key -> [player, game, [(idx, made)], size, technical, bad_line]
        order = []
        counter = defaultdict(int)
        last_idx = {}
        for line, raw in enumerate(reader, 2):
            if not raw:
                continue
            if len(raw) < width:
                errors.append(RowError(line, "short row"))
                continue
            try:
                player = _player_key(raw, cols)
                game = raw[cols["game_id"]].strip()
                idx = int(raw[cols["attempt_index"]])
                size = int(raw[cols["trip_size"]])
                made = _parse_bool(raw[cols["made"]])
                tech = "technical_flag" in cols and _parse_bool(raw[cols["technical_flag"]])
            except ValueError as exc:
                errors.append(RowError(line, str(exc)))
                continue
            pg = (player, game)
            if "trip_id" in cols:
                key = pg + (raw[cols["trip_id"]].strip(),)
            else:
                if pg in last_idx and idx <= last_idx[pg]:
                    counter[pg] += 1
                last_idx[pg] = idx
                key = pg + (counter[pg],)
            if key not in trips:
                trips[key] = [player, game, [], size, False, None]
                order.append(key)
            t = trips[key]
            t[2].append((idx, made))
            t[4] = t[4] or tech
            if (idx > size or idx < 1) and t[5] is None:
                t[5] = line
    finally:
        if owned:
            stream.close()

    out = []
    for key in order:
        player, game, attempts, size, tech, bad = trips[key]
        if bad is not None:
            errors.append(RowError(bad, f"attempt index exceeds trip size {size}"))
            continue
        if tech or len(attempts) < 2:
            continue
        attempts.sort(key=lambda a: a[0])
        out.append(FreeThrowTrip(player, game, tuple(m for _, m in attempts)))
    return out, errors


# --------------------------------------------------------------------------
# sequences

def build_sequences(events: Iterable[ShotEvent]) -> dict:
    """Group events into one ordered sequence per (player, game).

    Returns ``{player_id: [PlayerGameSequence, ...]}`` with games sorted by
    game id.
    """
    groups = defaultdict(list)
    for e in events:
        groups[(e.player_id, e.game_id)].append(e)
    out = defaultdict(list)
    for (player, game) in sorted(groups):
        evs = sorted(groups[(player, game)], key=shot_sort_key)
        out[player].append(PlayerGameSequence(player, game, tuple(evs)))
    return dict(out)


def recode_first_shots(sequences: Mapping) -> dict:
    """Set each event's prior outcome from the previous shot in the same game.

    The first shot of every game gets ``UNKNOWN`` so nothing carries over
    between games.
    """
    out = {}
    for player, games in sequences.items():
        new_games = []
        for seq in games:
            evs, prev = [], None
            for e in seq.events:
                if prev is None:
                    prior = PriorOutcome.UNKNOWN
                else:
                    prior = PriorOutcome.MAKE if prev.made else PriorOutcome.MISS
                evs.append(e if e.prior_outcome is prior else replace(e, prior_outcome=prior))
                prev = e
            new_games.append(replace(seq, events=tuple(evs)))
        out[player] = new_games
    return out


def player_totals(games) -> tuple:
    """(makes, misses) over a player's sequences."""
    makes = sum(int(s.outcomes.sum()) for s in games)
    total = sum(len(s) for s in games)
    return makes, total - makes


def filter_min_outcomes(sequences: Mapping, min_hits=0, min_misses=0) -> dict:
    """Players with at least ``min_hits`` makes and ``min_misses`` misses."""
    out = {}
    for player, games in sequences.items():
        makes, misses = player_totals(games)
        if makes >= min_hits and misses >= min_misses:
            out[player] = games
    return out


def filter_min_attempts(sequences: Mapping, min_attempts=0) -> dict:
    return {p: g for p, g in sequences.items() if sum(len(s) for s in g) >= min_attempts}


def games_as_arrays(sequences: Mapping) -> dict:
    """``{player: [outcome array per game]}`` for the numeric kernels."""
    return {p: [s.outcomes for s in games] for p, games in sequences.items()}


def load_shots(path, schema_map=None, delimiter=","):
    """Parse, sequence and recode a shot log in one step."""
    events, errors = parse_shot_log(path, schema_map, delimiter)
    return recode_first_shots(build_sequences(events)), errors
