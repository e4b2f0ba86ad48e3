import numpy as np
import pytest

from hothand import ingest

ACCEPTANCE_LINES = []


def make_sequences(league, **features):
    """``{player: [[made, ...] per game]}`` -> ingest-style sequences.

    Shots are spread evenly through the four quarters. Extra per-shot
    features can be given as ``{name: {player: [[value, ...] per game]}}``.
    """
    events = []
    for player, games in league.items():
        for gi, game in enumerate(games):
            n = len(game)
            for i, made in enumerate(game):
                period = 1 + (4 * i) // max(n, 1)
                kw = {k: float(v[player][gi][i]) for k, v in features.items()}
                kw.setdefault("shot_distance", 10.0)
                kw.setdefault("dribbles", 1)
                kw.setdefault("defender_distance", 4.0)
                kw["dribbles"] = int(kw["dribbles"])
                events.append(ingest.ShotEvent(player, f"g{gi:03d}", period,
                                               float(700 - (i % 50) * 10), bool(made), **kw))
    return ingest.recode_first_shots(ingest.build_sequences(events))


def quarter_sequences(games_by_quarter):
    """``{player: [{period: [made, ...]}, ...]}`` -> sequences."""
    events = []
    for player, games in games_by_quarter.items():
        for gi, quarters in enumerate(games):
            for q, shots in quarters.items():
                for i, made in enumerate(shots):
                    events.append(ingest.ShotEvent(player, f"g{gi:03d}", q, float(700 - 10 * i),
                                                   bool(made), 10.0, 1, 4.0))
    return ingest.recode_first_shots(ingest.build_sequences(events))


@pytest.fixture
def rng():
    return np.random.default_rng(20150101)


@pytest.fixture
def acceptance():
    def record(number, name, ok, detail=""):
        status = ok if isinstance(ok, str) else ("PASS" if ok else "FAIL")
        ACCEPTANCE_LINES.append(f"[{number:>2}] {status}  {name}  {detail}".rstrip())
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s[1:3])):
            terminalreporter.write_line(line)
