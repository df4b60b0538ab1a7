"""Seeded synthetic tweet stream and its translation into RDF transactions.

Authors come from a finite pool. Most tweets are written by an author who
tweeted recently (a session), the rest by an author drawn uniformly from the
pool, so a stream keeps revisiting authors. Each revisit may mutate some of
the author's profile fields; the translator then removes the last-seen value
of every changed field and adds the new one. First-time authors get their
whole profile added.

All tuning constants live in :class:`FirehoseConfig`. The defaults are set so
that a 10,000 tweet stream averages 18 added and 9 removed statements per
transaction, and a pretty-printed transaction document averages around
5,000 bytes.
"""

from __future__ import annotations

import random
import struct
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, Optional

from .model import ADD, REMOVE, IRI, Literal, Statement, Transaction, UpdateOp

RDF_TYPE = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"
SIOC = "http://rdfs.org/sioc/ns#"
SIOCT = "http://rdfs.org/sioc/types#"
FOAF = "http://xmlns.com/foaf/0.1/"
DCT = "http://purl.org/dc/terms/"
GEO = "http://www.w3.org/2003/01/geo/wgs84_pos#"
TL = "http://twitlogic.net/ns#"
BASE = "http://twitlogic.net/"

WORDS = """
the be to of and a in that have it for not on with he as you do at this but his by from
they we say her she or an will my one all would there their what so up out if about who get
which go me when make can like time no just him know take people into year your good some
could them see other than then now look only come its over think also back after use two how
our work first well way even new want because any these give day most us great morning night
coffee music game team city rain sun weekend today tomorrow love happy sad tired watching
reading listening going home office meeting lunch dinner party friends family news update
data web semantic stream real fast slow think wonder finally again never always maybe really
""".split()
CITIES = [
    "New York, NY", "San Francisco, CA", "London", "Tokyo", "Paris", "Berlin", "Troy, NY",
    "Oakland, CA", "Chicago", "Sao Paulo", "Toronto", "Sydney", "Mumbai", "Seoul", "Madrid",
    "Amsterdam", "Austin, TX", "Boston, MA", "Seattle, WA", "Mexico City", "Jakarta", "Lagos",
]
TIME_ZONES = [
    "Eastern Time (US & Canada)", "Pacific Time (US & Canada)", "Central Time (US & Canada)",
    "London", "Tokyo", "Berlin", "Brasilia", "Sydney", "Mumbai", "Seoul", "Madrid", "Amsterdam",
]
LANGS = ["en", "en", "en", "ja", "es", "pt", "de", "fr", "ko", "id"]
CLIENTS = ["web", "TweetDeck", "Twitter for iPhone", "Twitter for Android", "Echofon", "txt",
           "HootSuite", "Seesmic", "UberTwitter", "Tweetie"]
START_EPOCH = 1275350400  # 2010-06-01T00:00:00Z


@dataclass(frozen=True)
class ProfileField:
    """One mutable author description field.

    ``presence`` is the chance a new author has the field at all; ``churn`` is
    the chance it changes on each later appearance. ``on_point`` places the
    statement on the author's geo point resource instead of the author.
    """

    name: str
    predicate: str
    kind: str
    presence: float
    churn: float
    on_point: bool = False


DEFAULT_FIELDS = (
    ProfileField("name", FOAF + "name", "name", 1.0, 0.05),
    ProfileField("location", TL + "location", "city", 0.75, 0.5),
    ProfileField("description", DCT + "description", "text", 0.8, 0.45),
    ProfileField("followers", TL + "followersCount", "count", 1.0, 0.95),
    ProfileField("friends", TL + "friendsCount", "count", 1.0, 0.95),
    ProfileField("statuses", TL + "statusesCount", "tick", 1.0, 1.0),
    ProfileField("favourites", TL + "favouritesCount", "count", 1.0, 0.9),
    ProfileField("listed", TL + "listedCount", "count", 1.0, 0.7),
    ProfileField("latest", TL + "latestPost", "latest", 1.0, 1.0),
    ProfileField("active", DCT + "modified", "active", 1.0, 1.0),
    ProfileField("client", TL + "lastClient", "client", 1.0, 0.8),
    ProfileField("image", FOAF + "depiction", "image", 1.0, 0.5),
    ProfileField("homepage", FOAF + "homepage", "homepage", 0.35, 0.1),
    ProfileField("timezone", TL + "timeZone", "timezone", 0.7, 0.1),
    ProfileField("utc_offset", TL + "utcOffset", "offset", 0.7, 0.1),
    ProfileField("lang", TL + "lang", "lang", 1.0, 0.05),
    ProfileField("bg_color", TL + "backgroundColor", "color", 1.0, 0.25),
    ProfileField("text_color", TL + "textColor", "color", 1.0, 0.25),
    ProfileField("link_color", TL + "linkColor", "color", 1.0, 0.25),
    ProfileField("sidebar_color", TL + "sidebarColor", "color", 1.0, 0.25),
    ProfileField("bg_image", TL + "backgroundImage", "image", 0.6, 0.15),
    ProfileField("lat", GEO + "lat", "lat", 0.5, 0.85, on_point=True),
    ProfileField("long", GEO + "long", "long", 0.5, 0.85, on_point=True),
)


@dataclass(frozen=True)
class FirehoseConfig:
    pool_size: int = 10_000
    # share of tweets written by one of the last ``session_window`` distinct authors
    session_probability: float = 0.85
    session_window: int = 200
    fields: tuple[ProfileField, ...] = DEFAULT_FIELDS
    topic_weights: tuple[float, ...] = (0.45, 0.25, 0.2, 0.1)  # P(0..3 hashtags)
    link_weights: tuple[float, ...] = (0.55, 0.35, 0.1)  # P(0..2 links)
    reply_probability: float = 0.25
    geo_tweet_probability: float = 0.1
    text_min: int = 20
    text_max: int = 140

    def __post_init__(self):
        for name in ("session_probability", "reply_probability", "geo_tweet_probability"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")
        if self.pool_size < 1 or self.session_window < 1:
            raise ValueError("pool_size and session_window must be positive")
        if not 0 < self.text_min <= self.text_max:
            raise ValueError("need 0 < text_min <= text_max")
        for f in self.fields:
            if not (0.0 <= f.presence <= 1.0 and 0.0 <= f.churn <= 1.0):
                raise ValueError(f"field {f.name}: presence and churn must be in [0, 1]")


@dataclass(frozen=True)
class AuthorProfile:
    author_id: int
    screen_name: str
    joined: str
    values: dict  # field name -> lexical value, only for fields the author has


@dataclass(frozen=True)
class TweetRecord:
    tweet_id: int
    author: AuthorProfile
    text: str
    created: str
    topics: tuple[str, ...] = ()
    links: tuple[str, ...] = ()
    reply_to: Optional[int] = None
    geo: Optional[tuple[float, float]] = None


@dataclass
class UserState:
    author_id: int
    screen_name: str
    last_seen: dict = field(default_factory=dict)

    @property
    def display_name(self):
        return self.last_seen.get("name")

    @property
    def location(self):
        return self.last_seen.get("location")

    @property
    def description(self):
        return self.last_seen.get("description")

    @property
    def followers(self):
        return self.last_seen.get("followers")

    @property
    def geo(self):
        if "lat" in self.last_seen:
            return self.last_seen["lat"], self.last_seen["long"]
        return None


def post_iri(tweet_id: int) -> str:
    return f"{BASE}post/{tweet_id}"


def author_iri(author_id: int) -> str:
    return f"{BASE}user/{author_id}"


def _timestamp(seconds: float) -> str:
    whole, ms = divmod(int(round(seconds * 1000)), 1000)
    return time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime(whole)) + f".{ms:03d}Z"


class Firehose:
    """A deterministic tweet generator; the stream is a pure function of (seed, config)."""

    def __init__(self, seed: int = 0, config: FirehoseConfig = FirehoseConfig(), rate: float = 1000.0):
        self.config = config
        self.rng = random.Random(seed)
        self.rate = rate
        self.authors: dict[int, AuthorProfile] = {}
        self.next_id = 1
        self.registry: dict[int, UserState] = {}
        self.recent: deque[int] = deque(maxlen=config.session_window)

    def _words(self, lo: int, hi: int) -> str:
        target = self.rng.randint(lo, hi)
        out = []
        n = 0
        while n < target:
            w = self.rng.choice(WORDS)
            out.append(w)
            n += len(w) + 1
        return " ".join(out)[:hi].rstrip() or "hello"

    def _value(self, f: ProfileField, old: Optional[str], author_id: int) -> str:
        rng = self.rng
        kind = f.kind
        if kind == "name":
            return f"{rng.choice(WORDS).title()} {rng.choice(WORDS).title()}"
        if kind == "city":
            return rng.choice(CITIES)
        if kind == "text":
            return self._words(20, 80)
        if kind == "count":
            if old is None:
                return str(int(rng.lognormvariate(4.5, 1.5)))
            return str(max(0, int(old) + rng.randint(-3, 25)))
        if kind == "tick":
            return str(int(old) + 1) if old is not None else str(rng.randint(1, 20000))
        if kind == "latest":
            return post_iri(self.next_id)
        if kind == "active":
            return _timestamp(START_EPOCH + self.next_id / self.rate)
        if kind == "client":
            return rng.choice(CLIENTS)
        if kind == "image":
            return f"http://a{rng.randint(0, 3)}.twimg.com/p/{rng.randint(10**6, 10**8)}.png"
        if kind == "homepage":
            return f"http://www.{rng.choice(WORDS)}{rng.randint(1, 999)}.com/"
        if kind == "timezone":
            return rng.choice(TIME_ZONES)
        if kind == "offset":
            return str(rng.randint(-12, 12) * 3600)
        if kind == "lang":
            return rng.choice(LANGS)
        if kind == "color":
            return f"{rng.randrange(1 << 24):06X}"
        if kind == "lat":
            base = float(old) if old is not None else rng.uniform(-60, 70)
            return f"{max(-90.0, min(90.0, base + rng.uniform(-0.05, 0.05))):.5f}"
        if kind == "long":
            base = float(old) if old is not None else rng.uniform(-180, 180)
            return f"{max(-180.0, min(180.0, base + rng.uniform(-0.05, 0.05))):.5f}"
        raise ValueError(f"unknown field kind {kind!r}")

    def _pick_author(self) -> int:
        cfg = self.config
        if self.recent and self.rng.random() < cfg.session_probability:
            return self.rng.choice(self.recent)
        author_id = self.rng.randrange(cfg.pool_size)
        if author_id not in self.recent:
            self.recent.append(author_id)
        return author_id

    def _touch_author(self, author_id: int) -> AuthorProfile:
        prev = self.authors.get(author_id)
        values = {}
        if prev is None:
            rng = self.rng
            syll = "".join(rng.choice("bcdfghjklmnprstvwz") + rng.choice("aeiou") for _ in range(3))
            screen = f"{syll}{rng.randint(0, 9999)}"
            joined = _timestamp(START_EPOCH - rng.randint(86400, 4 * 365 * 86400))
            has_geo = None
            for f in self.config.fields:
                if f.on_point:
                    # lat/long share one presence draw
                    if has_geo is None:
                        has_geo = rng.random() < f.presence
                    present = has_geo
                else:
                    present = rng.random() < f.presence
                if present:
                    values[f.name] = self._value(f, None, author_id)
            profile = AuthorProfile(author_id, screen, joined, values)
        else:
            moved = None
            for f in self.config.fields:
                if f.name not in prev.values:
                    continue
                old = prev.values[f.name]
                if f.on_point:
                    if moved is None:
                        moved = self.rng.random() < f.churn
                    change = moved
                else:
                    change = self.rng.random() < f.churn
                values[f.name] = self._value(f, old, author_id) if change else old
            profile = AuthorProfile(author_id, prev.screen_name, prev.joined, values)
        self.authors[author_id] = profile
        return profile

    def next_tweet(self) -> TweetRecord:
        cfg = self.config
        rng = self.rng
        author = self._touch_author(self._pick_author())
        tweet_id = self.next_id
        n_topics = rng.choices(range(len(cfg.topic_weights)), cfg.topic_weights)[0]
        n_links = rng.choices(range(len(cfg.link_weights)), cfg.link_weights)[0]
        topics = tuple(sorted({rng.choice(WORDS) for _ in range(n_topics)}))
        links = tuple(
            sorted({f"http://bit.ly/{rng.randrange(36 ** 6):x}" for _ in range(n_links)})
        )
        reply_to = rng.randint(1, tweet_id - 1) if tweet_id > 1 and rng.random() < cfg.reply_probability else None
        geo = None
        if rng.random() < cfg.geo_tweet_probability:
            geo = (round(rng.uniform(-60, 70), 5), round(rng.uniform(-180, 180), 5))
        tweet = TweetRecord(
            tweet_id=tweet_id,
            author=author,
            text=self._words(cfg.text_min, cfg.text_max),
            created=_timestamp(START_EPOCH + tweet_id / self.rate),
            topics=topics,
            links=links,
            reply_to=reply_to,
            geo=geo,
        )
        self.next_id += 1
        return tweet

    def next_transaction(self) -> Transaction:
        return tweet_to_transaction(self.next_tweet(), self.registry, self.config)

    def __iter__(self):
        while True:
            yield self.next_transaction()


def generate_tweet(stream: Firehose) -> TweetRecord:
    return stream.next_tweet()


def _object(f: ProfileField, value: str):
    if f.kind in ("latest", "image", "homepage"):
        return IRI(value)
    return Literal(value)


def _op(kind, s, p, o):
    return UpdateOp(kind, Statement(s, p, o))


def tweet_to_transaction(
    tweet: TweetRecord, registry: dict[int, UserState], config: FirehoseConfig = FirehoseConfig()
) -> Transaction:
    """Translate one tweet, removing stale author values before adding new ones.

    ``registry`` maps author id to the values last emitted for that author and
    is updated in place.
    """
    a = tweet.author
    author = IRI(author_iri(a.author_id))
    point = IRI(author_iri(a.author_id) + "/point")
    state = registry.get(a.author_id)
    first = state is None
    if first:
        state = UserState(a.author_id, a.screen_name)
        registry[a.author_id] = state
    last = state.last_seen
    removes = []
    changed = []
    for f in config.fields:
        new = a.values.get(f.name)
        old = last.get(f.name)
        if new == old:
            continue
        subject = point if f.on_point else author
        if old is not None:
            removes.append(_op(REMOVE, subject, IRI(f.predicate), _object(f, old)))
        if new is not None:
            changed.append(_op(ADD, subject, IRI(f.predicate), _object(f, new)))

    post = IRI(post_iri(tweet.tweet_id))
    adds = [
        _op(ADD, post, IRI(RDF_TYPE), IRI(SIOCT + "MicroblogPost")),
        _op(ADD, post, IRI(SIOC + "content"), Literal(tweet.text)),
        _op(ADD, post, IRI(DCT + "created"), Literal(tweet.created)),
        _op(ADD, post, IRI(SIOC + "has_creator"), author),
    ]
    for topic in tweet.topics:
        adds.append(_op(ADD, post, IRI(SIOC + "topic"), IRI(f"{BASE}hashtag/{topic}")))
    for link in tweet.links:
        adds.append(_op(ADD, post, IRI(SIOC + "links_to"), IRI(link)))
    if tweet.reply_to is not None:
        adds.append(_op(ADD, post, IRI(SIOC + "reply_of"), IRI(post_iri(tweet.reply_to))))
    if tweet.geo is not None:
        where = IRI(post.value + "/point")
        adds.append(_op(ADD, post, IRI(GEO + "location"), where))
        adds.append(_op(ADD, where, IRI(GEO + "lat"), Literal(f"{tweet.geo[0]:.5f}")))
        adds.append(_op(ADD, where, IRI(GEO + "long"), Literal(f"{tweet.geo[1]:.5f}")))
    if first:
        adds.append(_op(ADD, author, IRI(RDF_TYPE), IRI(SIOC + "UserAccount")))
        adds.append(_op(ADD, author, IRI(FOAF + "nick"), Literal(a.screen_name)))
        adds.append(_op(ADD, author, IRI(DCT + "created"), Literal(a.joined)))
        if "lat" in a.values:
            adds.append(_op(ADD, author, IRI(FOAF + "based_near"), point))
    adds.extend(changed)

    state.last_seen = dict(a.values)
    return Transaction(tuple(removes + adds))


class TimedTransaction(NamedTuple):
    due: float  # seconds after stream start
    transaction: Transaction


def firehose_stream(
    seed: int, rate: float, count: int, config: FirehoseConfig = FirehoseConfig()
) -> Iterator[TimedTransaction]:
    """Lazily yield ``count`` transactions tagged with their target emission time."""
    if rate <= 0:
        raise ValueError("rate must be positive")
    hose = Firehose(seed, config, rate)
    for i in range(count):
        yield TimedTransaction(i / rate, hose.next_transaction())


# length-prefixed corpus files: 4-byte big-endian length, then the document

def write_corpus(path, documents) -> int:
    n = 0
    with open(path, "wb") as fh:
        for doc in documents:
            fh.write(struct.pack(">I", len(doc)))
            fh.write(doc)
            n += 1
    return n


def read_corpus(path) -> Iterator[bytes]:
    with open(path, "rb") as fh:
        while True:
            head = fh.read(4)
            if not head:
                return
            if len(head) < 4:
                raise ValueError(f"{path}: truncated length prefix")
            (size,) = struct.unpack(">I", head)
            doc = fh.read(size)
            if len(doc) < size:
                raise ValueError(f"{path}: truncated record")
            yield doc
