"""JSON-over-HTTP scoring service with a bounded per-owner result cache."""

from __future__ import annotations

import hashlib
import json
import logging
import threading
from collections import OrderedDict
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Optional, Sequence

import numpy as np

from .classifiers import ClassifierModel
from .errors import LinkTrustError
from .features import extract_corpus, feature_matrix
from .heuristic import rank_friends, recommendation_size
from .model import COUNTER_FIELDS, LinkDisposition, LinkRecord

log = logging.getLogger(__name__)

DEFAULT_CACHE_SIZE = 10_000


class BadRequest(Exception):
    """Payload is not a well-formed score request (HTTP 400)."""


class Unprocessable(Exception):
    """Payload is well-formed but violates a link invariant (HTTP 422)."""


class ModelUnavailable(Exception):
    pass


def score_owner(links: Sequence[LinkRecord], model: Optional[ClassifierModel] = None) -> dict:
    """Ranking, recommendations and (with a model) restriction probabilities for one owner."""
    ranking = rank_friends(links)
    out = {
        "owner": links[0].owner,
        "ranking": [{"friend": s.friend, "score": s.score, "rank_position": s.rank_position}
                    for s in ranking],
        "recommended": [s.friend for s in ranking[:recommendation_size(len(ranking))]],
    }
    if model is not None:
        probs = model.predict_proba(feature_matrix(extract_corpus(links)))
        out["probabilities"] = {l.friend: float(p) for l, p in zip(links, probs)}
    return out


def _int(item: dict, name: str, default=None) -> int:
    value = item.get(name, default)
    if isinstance(value, bool) or not isinstance(value, int):
        raise BadRequest(f"{name} must be an integer")
    return value


def parse_request(payload) -> tuple[str, list[LinkRecord], bool]:
    if not isinstance(payload, dict):
        raise BadRequest("request body must be a JSON object")
    owner = payload.get("owner")
    links = payload.get("links")
    want_probs = payload.get("probabilities", False)
    if not isinstance(owner, str) or not owner:
        raise BadRequest("owner must be a non-empty string")
    if not isinstance(links, list):
        raise BadRequest("links must be a list")
    if not isinstance(want_probs, bool):
        raise BadRequest("probabilities must be a boolean")
    if not links:
        raise Unprocessable("links must not be empty")
    records, seen = [], set()
    for item in links:
        if not isinstance(item, dict):
            raise BadRequest("each link must be a JSON object")
        if item.get("owner", owner) != owner:
            raise Unprocessable(f"link owner {item.get('owner')!r} differs from {owner!r}")
        friend = item.get("friend")
        if not isinstance(friend, str):
            raise BadRequest("friend must be a string")
        if friend in seen:
            raise Unprocessable(f"duplicate friend {friend!r}")
        seen.add(friend)
        family = item.get("are_family", False)
        if isinstance(family, int) and not isinstance(family, bool) and family in (0, 1):
            family = bool(family)
        if not isinstance(family, bool):
            raise BadRequest("are_family must be a boolean")
        ffc = item.get("friend_friend_count")
        if ffc is not None:
            ffc = _int(item, "friend_friend_count")
        try:
            disposition = LinkDisposition(item.get("disposition", "all_unrestricted"))
        except ValueError:
            raise BadRequest(f"unknown disposition {item.get('disposition')!r}") from None
        counters = {name: _int(item, name, 0) for name in COUNTER_FIELDS}
        try:
            records.append(LinkRecord(
                owner=owner, friend=friend, are_family=family,
                owner_friend_count=_int(item, "owner_friend_count", len(links)),
                friend_friend_count=ffc, disposition=disposition, **counters))
        except (ValueError, LinkTrustError) as exc:
            raise Unprocessable(str(exc)) from None
    return owner, records, want_probs


def cache_key(owner: str, links: Sequence[LinkRecord], want_probs: bool) -> tuple:
    canon = json.dumps(sorted(
        [l.friend, int(l.are_family), *(getattr(l, n) for n in COUNTER_FIELDS),
         l.owner_friend_count, l.friend_friend_count] for l in links),
        separators=(",", ":"))
    return owner, hashlib.sha256(canon.encode()).hexdigest(), want_probs


class LruCache:
    def __init__(self, capacity: int = DEFAULT_CACHE_SIZE):
        self.capacity = capacity
        self._data: OrderedDict = OrderedDict()
        self._lock = threading.Lock()

    def get(self, key):
        with self._lock:
            if key not in self._data:
                return None
            self._data.move_to_end(key)
            return self._data[key]

    def put(self, key, value) -> None:
        with self._lock:
            self._data[key] = value
            self._data.move_to_end(key)
            while len(self._data) > self.capacity:
                self._data.popitem(last=False)

    def __len__(self) -> int:
        with self._lock:
            return len(self._data)


class ScoringService:
    def __init__(self, model: Optional[ClassifierModel] = None,
                 cache_size: int = DEFAULT_CACHE_SIZE):
        self.model = model
        self.cache = LruCache(cache_size)

    def score(self, payload) -> dict:
        owner, links, want_probs = parse_request(payload)
        if want_probs and self.model is None:
            raise ModelUnavailable("no model loaded")
        key = cache_key(owner, links, want_probs)
        cached = self.cache.get(key)
        if cached is not None:
            return {**cached, "cacheHit": True}
        result = score_owner(links, self.model if want_probs else None)
        if not want_probs:
            result["probabilities"] = None
        self.cache.put(key, result)
        return {**result, "cacheHit": False}

    def handle_score(self, body: bytes) -> tuple[int, dict]:
        try:
            payload = json.loads(body)
        except (ValueError, UnicodeDecodeError) as exc:
            return 400, {"error": "BadRequest", "message": f"invalid JSON: {exc}"}
        try:
            return 200, self.score(payload)
        except BadRequest as exc:
            return 400, {"error": "BadRequest", "message": str(exc)}
        except Unprocessable as exc:
            return 422, {"error": "Unprocessable", "message": str(exc)}
        except ModelUnavailable as exc:
            return 503, {"error": "ModelUnavailable", "message": str(exc)}


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(type(o).__name__)


def make_handler(service: ScoringService):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def _send(self, status: int, body: dict) -> None:
            data = json.dumps(body, sort_keys=True, default=_json_default).encode()
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)

        def do_GET(self):
            if self.path == "/health":
                self._send(200, {"status": "ok", "model": service.model is not None})
            else:
                self._send(404, {"error": "NotFound", "message": self.path})

        def do_POST(self):
            length = int(self.headers.get("Content-Length") or 0)
            body = self.rfile.read(length)
            if self.path != "/score":
                self._send(404, {"error": "NotFound", "message": self.path})
                return
            self._send(*service.handle_score(body))

        def log_message(self, fmt, *args):
            log.debug("%s " + fmt, self.address_string(), *args)

    return Handler


class ScoringServer(ThreadingHTTPServer):
    daemon_threads = True
    request_queue_size = 128


def make_server(host: str, port: int, service: ScoringService) -> ScoringServer:
    return ScoringServer((host, port), make_handler(service))
