"""Non-textual benchmark similarities between parties.

Five families, each with its own input data:

* expert surveys  -- absolute differences / Euclidean distances of placement
                     scores (lrgen, lreco, galtan, the 2-D ch2d combination,
                     and a multi-variable Euclidean distance)
* manifesto codes -- cosine similarity of 56-topic shares and |delta rile|
* roll-call votes -- turnout-weighted, chance-corrected agreement (a modified
                     kappa over the ternary ballot space Y/N/A)
* coalitions      -- day-by-day ternary score (1 partners, 1/2 co-opposition,
                     0 opposite sides) averaged over both adjacent terms
* candidacies     -- genealogical similarity over the candidate-overlap DAG
* returns         -- Pearson correlation of municipal vote shares

Measure functions return None when a value cannot be computed for a pair
(missing survey fields, no common votes, ...); callers record these as
missing cells, never as zeros.
"""

from __future__ import annotations

import csv
import datetime
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import IngestError, ValidationError

BALLOTS = ("Y", "N", "A")  # ABSENT is tracked for turnout but never agreed on
SURVEY_MEASURES = ("lrgen", "lreco", "galtan", "ch2d", "vdem")

VOTES_HEADER = ["vote_id", "date", "mp_id", "party_id", "ballot"]
COALITIONS_HEADER = ["term_id", "date_from", "date_to", "party_id", "side"]
CANDIDACIES_HEADER = ["person_id", "election_id", "party_id", "list_rank"]
RETURNS_HEADER = ["election_id", "municipality_id", "party_id", "vote_share"]


def _agree(s: str, t: str) -> float:
    """Ternary ballot agreement: 1 same, 1/2 if one side abstains, 0 opposite."""
    if s == t:
        return 1.0
    if "A" in (s, t):
        return 0.5
    return 0.0


# ---------------------------------------------------------------------------
# expert surveys and manifesto codes


@dataclass
class SurveyRow:
    party_id: str
    election_id: str
    lrgen: float | None = None
    lrecon: float | None = None
    galtan: float | None = None
    rile: float | None = None
    vdem: np.ndarray | None = None
    marpor: np.ndarray | None = None


def survey_distance(a: SurveyRow, b: SurveyRow, which: str) -> float | None:
    """Placement distance, or None when a needed field is missing."""
    if which == "lrgen":
        if a.lrgen is None or b.lrgen is None:
            return None
        return abs(a.lrgen - b.lrgen)
    if which == "lreco":
        if a.lrecon is None or b.lrecon is None:
            return None
        return abs(a.lrecon - b.lrecon)
    if which == "galtan":
        if a.galtan is None or b.galtan is None:
            return None
        return abs(a.galtan - b.galtan)
    if which == "ch2d":
        if None in (a.lrecon, b.lrecon, a.galtan, b.galtan):
            return None
        return math.hypot(a.lrecon - b.lrecon, a.galtan - b.galtan)
    if which == "vdem":
        if a.vdem is None or b.vdem is None:
            return None
        if a.vdem.shape != b.vdem.shape:
            raise ValidationError(
                f"ideology vectors of {a.party_id!r} and {b.party_id!r} differ in length")
        return float(np.linalg.norm(a.vdem - b.vdem))
    raise ValidationError(f"unknown survey measure {which!r}")


def marpor_measures(a: SurveyRow, b: SurveyRow) -> tuple[float | None, float | None]:
    """(topic-vector cosine similarity, |delta rile|); None where missing."""
    topic = None
    if a.marpor is not None and b.marpor is not None:
        na, nb = float(np.linalg.norm(a.marpor)), float(np.linalg.norm(b.marpor))
        if na > 0.0 and nb > 0.0:
            topic = float(a.marpor @ b.marpor) / (na * nb)
    rile = None
    if a.rile is not None and b.rile is not None:
        rile = abs(a.rile - b.rile)
    return topic, rile


def load_survey(path: str | Path, column_map: dict) -> dict[tuple[str, str], SurveyRow]:
    """Read a survey/manifesto table keyed by (party_id, election_id).

    `column_map` names the CSV columns: optional scalar keys "lrgen",
    "lrecon", "galtan", "rile" and optional list keys "vdem_cols",
    "marpor_cols".  Empty cells mean missing; a vector field is missing if
    any of its cells is empty.
    """
    path = Path(path)
    rows: dict[tuple[str, str], SurveyRow] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise IngestError(f"empty survey file: {path}")
        needed = {"party_id", "election_id"}
        for key in ("lrgen", "lrecon", "galtan", "rile"):
            if key in column_map:
                needed.add(column_map[key])
        needed.update(column_map.get("vdem_cols", []))
        needed.update(column_map.get("marpor_cols", []))
        missing_cols = needed - set(reader.fieldnames)
        if missing_cols:
            raise ValidationError(
                f"survey file {path} lacks columns: {sorted(missing_cols)}")
        for rec in reader:
            key = (rec["party_id"], rec["election_id"])
            if key in rows:
                raise ValidationError(f"duplicate survey row for {key}")

            def scalar(name: str) -> float | None:
                col = column_map.get(name)
                if col is None or rec[col] == "":
                    return None
                return float(rec[col])

            def vector(cols_key: str) -> np.ndarray | None:
                cols = column_map.get(cols_key, [])
                if not cols or any(rec[c] == "" for c in cols):
                    return None
                return np.array([float(rec[c]) for c in cols])

            marpor = vector("marpor_cols")
            if marpor is not None and (marpor < 0).any():
                raise ValidationError(f"negative topic share for {key}")
            rows[key] = SurveyRow(
                party_id=key[0], election_id=key[1],
                lrgen=scalar("lrgen"), lrecon=scalar("lrecon"),
                galtan=scalar("galtan"), rile=scalar("rile"),
                vdem=vector("vdem_cols"), marpor=marpor)
    return rows


# ---------------------------------------------------------------------------
# roll-call votes


@dataclass
class VoteRecord:
    vote_id: str
    date: datetime.date
    ballots: dict[str, str]      # mp_id -> Y | N | A | ABSENT
    mp_party: dict[str, str]     # mp_id -> party_id

    def party_counts(self, party: str) -> tuple[Counter, int]:
        """(Y/N/A counts among voting MPs, seat count incl. absentees)."""
        cast: Counter = Counter()
        seats = 0
        for mp, p in self.mp_party.items():
            if p != party:
                continue
            seats += 1
            ballot = self.ballots[mp]
            if ballot != "ABSENT":
                cast[ballot] += 1
        return cast, seats


def load_votes(path: str | Path) -> list[VoteRecord]:
    """Read roll-call CSV `vote_id,date,mp_id,party_id,ballot`, grouped by vote."""
    path = Path(path)
    votes: dict[str, VoteRecord] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != VOTES_HEADER:
            raise ValidationError(f"votes header must be {','.join(VOTES_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 5:
                raise ValidationError(f"bad votes row at line {lineno}: {row}")
            vote_id, date_s, mp_id, party_id, ballot = row
            if ballot not in ("Y", "N", "A", "ABSENT"):
                raise ValidationError(
                    f"bad ballot {ballot!r} at line {lineno} (Y/N/A/ABSENT)")
            date = datetime.date.fromisoformat(date_s)
            rec = votes.get(vote_id)
            if rec is None:
                rec = votes[vote_id] = VoteRecord(vote_id, date, {}, {})
            elif rec.date != date:
                raise ValidationError(f"vote {vote_id!r} has two dates")
            if mp_id in rec.ballots:
                raise ValidationError(
                    f"MP {mp_id!r} appears twice in vote {vote_id!r}")
            rec.ballots[mp_id] = ballot
            rec.mp_party[mp_id] = party_id
    return [votes[k] for k in sorted(votes)]


def vote_agreement_term(votes: list[VoteRecord], party_x: str,
                        party_y: str) -> float | None:
    """Chance-corrected mean agreement between two parties over one term.

    Per vote, the observed agreement is the expected ternary agreement of a
    random voting MP from each party, weighted by the product of the two
    turnouts (voting MPs over seats).  The chance model pairs the parties'
    pooled term-level ballot distributions.  Returns None when the parties
    share no vote in which both cast ballots; returns 1.0 when both are
    pinned to the same unanimous behaviour (expected agreement 1).
    """
    num = 0.0
    den = 0.0
    pooled_x: Counter = Counter()
    pooled_y: Counter = Counter()
    for vote in votes:
        cx, seats_x = vote.party_counts(party_x)
        cy, seats_y = vote.party_counts(party_y)
        nx, ny = sum(cx.values()), sum(cy.values())
        if nx == 0 or ny == 0:
            continue
        o_v = sum(cx[s] * cy[t] * _agree(s, t) for s in BALLOTS for t in BALLOTS)
        o_v /= nx * ny
        u_v = (nx / seats_x) * (ny / seats_y)
        num += u_v * o_v
        den += u_v
        pooled_x.update(cx)
        pooled_y.update(cy)
    if den == 0.0:
        return None
    p_o = num / den
    tx, ty = sum(pooled_x.values()), sum(pooled_y.values())
    p_e = sum(pooled_x[s] * pooled_y[t] * _agree(s, t)
              for s in BALLOTS for t in BALLOTS) / (tx * ty)
    if p_e >= 1.0:
        return 1.0
    return (p_o - p_e) / (1.0 - p_e)


def vote_kappa(backward_votes: list[VoteRecord] | None,
               forward_votes: list[VoteRecord] | None,
               party_x: str, party_y: str) -> float | None:
    """Mean of the two adjacent-term kappas; one side missing -> the other."""
    back = vote_agreement_term(backward_votes, party_x, party_y) if backward_votes else None
    fwd = vote_agreement_term(forward_votes, party_x, party_y) if forward_votes else None
    if back is None:
        return fwd
    if fwd is None:
        return back
    return 0.5 * (back + fwd)


# ---------------------------------------------------------------------------
# coalitions


@dataclass
class CoalitionTimeline:
    """Which side every party sat on, for each day of one term."""

    term_id: str
    sides: dict[datetime.date, dict[str, str]] = field(default_factory=dict)

    def check(self) -> None:
        if not self.sides:
            raise ValidationError(f"term {self.term_id!r} has no days")
        days = sorted(self.sides)
        span = (days[-1] - days[0]).days + 1
        if span != len(days):
            raise ValidationError(f"term {self.term_id!r} has gaps in its days")


def load_coalitions(path: str | Path) -> dict[str, CoalitionTimeline]:
    """Read `term_id,date_from,date_to,party_id,side` ranges into timelines."""
    path = Path(path)
    timelines: dict[str, CoalitionTimeline] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != COALITIONS_HEADER:
            raise ValidationError(
                f"coalitions header must be {','.join(COALITIONS_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 5:
                raise ValidationError(f"bad coalitions row at line {lineno}")
            term_id, d_from, d_to, party_id, side = row
            if side not in ("COALITION", "OPPOSITION"):
                raise ValidationError(
                    f"bad side {side!r} at line {lineno} (COALITION/OPPOSITION)")
            start = datetime.date.fromisoformat(d_from)
            stop = datetime.date.fromisoformat(d_to)
            if stop < start:
                raise ValidationError(f"date_to before date_from at line {lineno}")
            tl = timelines.setdefault(term_id, CoalitionTimeline(term_id))
            day = start
            while day <= stop:
                assigned = tl.sides.setdefault(day, {})
                if assigned.get(party_id, side) != side:
                    raise ValidationError(
                        f"party {party_id!r} on both sides on {day} (term {term_id!r})")
                assigned[party_id] = side
                day += datetime.timedelta(days=1)
    for tl in timelines.values():
        tl.check()
    return timelines


def coalition_term_mean(timeline: CoalitionTimeline, x: str, y: str) -> float | None:
    """Mean day score over days when both parties sat in parliament."""
    total = 0.0
    days = 0
    for sides in timeline.sides.values():
        sx, sy = sides.get(x), sides.get(y)
        if sx is None or sy is None:
            continue
        days += 1
        if sx != sy:
            continue  # opposite sides score 0
        total += 1.0 if sx == "COALITION" else 0.5
    return total / days if days else None


def coalition_similarity(timelines: list[CoalitionTimeline], x: str,
                         y: str) -> float | None:
    """Mean of the per-term day averages (usually the two adjacent terms)."""
    means = [m for tl in timelines if (m := coalition_term_mean(tl, x, y)) is not None]
    return sum(means) / len(means) if means else None


# ---------------------------------------------------------------------------
# candidate genealogy


@dataclass(frozen=True)
class CandidacyRecord:
    person_id: str
    election_id: str
    party_id: str
    list_rank: int | None = None

    def __post_init__(self) -> None:
        if self.list_rank is not None and self.list_rank < 1:
            raise ValidationError(
                f"list rank must be >= 1 ({self.person_id!r}, {self.election_id!r})")


def load_candidacies(path: str | Path) -> list[CandidacyRecord]:
    """Read `person_id,election_id,party_id,list_rank` (rank empty = none)."""
    path = Path(path)
    records: list[CandidacyRecord] = []
    seen: set[tuple[str, str]] = set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != CANDIDACIES_HEADER:
            raise ValidationError(
                f"candidacies header must be {','.join(CANDIDACIES_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 4:
                raise ValidationError(f"bad candidacies row at line {lineno}")
            person_id, election_id, party_id, rank_s = row
            key = (person_id, election_id)
            if key in seen:
                raise ValidationError(
                    f"person {person_id!r} listed twice in election {election_id!r}")
            seen.add(key)
            rank = int(rank_s) if rank_s != "" else None
            records.append(CandidacyRecord(person_id, election_id, party_id, rank))
    return records


Vertex = tuple[str, str]  # (party_id, election_id)


@dataclass
class GenealogyGraph:
    """Candidate-overlap DAG with per-vertex best-ancestor-path tables.

    Edges run from a party at one election to parties at the directly
    preceding election that share candidates.  `ancestors[v]` maps each
    ancestor z (including v itself, weight 1) to the weight of the best path,
    where best means maximum product of edge weights, then fewest edges, then
    lexicographically smallest vertex sequence.
    """

    vertices: list[Vertex]
    edges: dict[Vertex, list[tuple[Vertex, float]]]
    ancestors: dict[Vertex, dict[Vertex, float]]


def _party_weight(records: list[CandidacyRecord], people: set[str] | None,
                  listed: bool) -> float:
    """w(p) or w(p ∩ q): size, or sum of inverse list ranks when listed."""
    chosen = records if people is None else [r for r in records if r.person_id in people]
    if not listed:
        return float(len(chosen))
    return sum(1.0 / r.list_rank for r in chosen)


def build_genealogy(candidacies: list[CandidacyRecord], elections: list[str],
                    systems: dict[str, str] | None = None) -> GenealogyGraph:
    """Build the overlap DAG over (party, election) vertices.

    `elections` orders the elections oldest first; `systems` maps election_id
    to "list" (inverse-rank candidate weights) or "nonlist" (plain counts,
    the default).  An edge from p at election k to q at election k-1 exists
    iff they share a candidate; its weight is w(p ∩ q) / w(p), with candidate
    weights taken on p's side.
    """
    if len(set(elections)) != len(elections):
        raise ValidationError("duplicate election in ordering")
    order = {e: i for i, e in enumerate(elections)}
    systems = systems or {}
    for e, s in systems.items():
        if s not in ("list", "nonlist"):
            raise ValidationError(f"unknown electoral system {s!r} for {e!r}")

    by_vertex: dict[Vertex, list[CandidacyRecord]] = defaultdict(list)
    for rec in candidacies:
        if rec.election_id not in order:
            raise ValidationError(
                f"candidacy in unknown election {rec.election_id!r}")
        listed = systems.get(rec.election_id, "nonlist") == "list"
        if listed and rec.list_rank is None:
            raise ValidationError(
                f"missing list rank for {rec.person_id!r} in list-system "
                f"election {rec.election_id!r}")
        by_vertex[(rec.party_id, rec.election_id)].append(rec)

    vertices = sorted(by_vertex)
    people_of = {v: {r.person_id for r in recs} for v, recs in by_vertex.items()}

    edges: dict[Vertex, list[tuple[Vertex, float]]] = {v: [] for v in vertices}
    for v in vertices:
        party, election = v
        k = order[election]
        if k == 0:
            continue
        prev = elections[k - 1]
        listed = systems.get(election, "nonlist") == "list"
        denom = _party_weight(by_vertex[v], None, listed)
        if denom <= 0.0:
            raise ValidationError(f"party {v} has zero candidate weight")
        for u in vertices:
            if u[1] != prev:
                continue
            shared = people_of[v] & people_of[u]
            if not shared:
                continue
            weight = _party_weight(by_vertex[v], shared, listed) / denom
            edges[v].append((u, weight))

    # best ancestor paths: process elections oldest-first so every edge
    # target is finished before its sources; key = (-weight, edges, path)
    best: dict[Vertex, dict[Vertex, tuple[float, int, tuple[Vertex, ...]]]] = {}
    for v in sorted(vertices, key=lambda t: order[t[1]]):
        table = {v: (1.0, 0, (v,))}
        for u, w in edges[v]:
            for z, (wz, ez, pz) in best[u].items():
                cand = (w * wz, ez + 1, (v,) + pz)
                old = table.get(z)
                if old is None or (-cand[0], cand[1], cand[2]) < (-old[0], old[1], old[2]):
                    table[z] = cand
        best[v] = table

    ancestors = {v: {z: t[0] for z, t in table.items()} for v, table in best.items()}
    return GenealogyGraph(vertices=vertices, edges=edges, ancestors=ancestors)


def genealogical_similarity(graph: GenealogyGraph, x: Vertex, y: Vertex) -> float:
    """Sum over common ancestors of the smaller best-path weight."""
    if x not in graph.ancestors or y not in graph.ancestors:
        raise ValidationError(f"unknown vertex: {x if x not in graph.ancestors else y}")
    ax, ay = graph.ancestors[x], graph.ancestors[y]
    return sum(min(ax[z], ay[z]) for z in ax.keys() & ay.keys())


# ---------------------------------------------------------------------------
# electoral returns


@dataclass
class MunicipalReturns:
    election_id: str
    shares: dict[str, dict[str, float]] = field(default_factory=dict)  # muni -> party -> share


def load_returns(path: str | Path) -> dict[str, MunicipalReturns]:
    """Read `election_id,municipality_id,party_id,vote_share` into per-election maps."""
    path = Path(path)
    out: dict[str, MunicipalReturns] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != RETURNS_HEADER:
            raise ValidationError(f"returns header must be {','.join(RETURNS_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 4:
                raise ValidationError(f"bad returns row at line {lineno}")
            election_id, muni, party, share_s = row
            share = float(share_s)
            if not 0.0 <= share <= 1.0:
                raise ValidationError(
                    f"vote share {share} out of [0, 1] at line {lineno}")
            ret = out.setdefault(election_id, MunicipalReturns(election_id))
            muni_shares = ret.shares.setdefault(muni, {})
            if party in muni_shares:
                raise ValidationError(
                    f"duplicate share for {party!r} in {muni!r} at line {lineno}")
            muni_shares[party] = share
    for ret in out.values():
        for muni, shares in ret.shares.items():
            if sum(shares.values()) > 1.0 + 1e-6:
                raise ValidationError(
                    f"shares in municipality {muni!r} sum past 1")
    return out


def electoral_similarity(returns: MunicipalReturns, x: str, y: str,
                         min_municipalities: int = 3) -> float | None:
    """Pearson r of the two parties' shares over shared municipalities."""
    xs, ys = [], []
    for shares in returns.shares.values():
        if x in shares and y in shares:
            xs.append(shares[x])
            ys.append(shares[y])
    if len(xs) < min_municipalities:
        return None
    ax, ay = np.array(xs), np.array(ys)
    # min == max catches constant columns exactly; std() can pick up
    # rounding noise from the mean and miss them
    if ax.min() == ax.max() or ay.min() == ay.max():
        return None
    return float(np.corrcoef(ax, ay)[0, 1])
