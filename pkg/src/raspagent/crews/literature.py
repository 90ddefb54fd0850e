"""Paper search and retrieval.

Two backends share one interface: a local fixture corpus
(``<root>/<id>/meta`` + ``<root>/<id>/body``) ranked by token overlap, and a
Semantic Scholar Graph API client. Papers are plain text with ``#`` headers.
"""

from __future__ import annotations

import json
import re
import threading
from dataclasses import dataclass
from pathlib import Path

import httpx

from ..errors import LiteratureError, SectionNotFoundError

_TOKEN_RE = re.compile(r"[a-z0-9]+")
_HEADER_RE = re.compile(r"^(#+)\s+(.*?)\s*$")


def tokens(text: str) -> set[str]:
    return set(_TOKEN_RE.findall(text.lower()))


@dataclass(frozen=True)
class SearchHit:
    identifier: str
    title: str
    abstract: str
    doi: str | None = None
    score: float = 0.0


@dataclass(frozen=True)
class PaperRecord:
    identifier: str
    title: str
    abstract: str
    sections: tuple[tuple[str, str], ...]
    source: str = "fixture"
    doi: str | None = None

    def headers(self) -> list[str]:
        return [h for h, _ in self.sections]


def split_sections(body: str) -> tuple[tuple[str, str], ...]:
    """Split on ``#`` headers; repeated headers get `` (2)``, `` (3)`` suffixes."""
    sections: list[list] = []
    preamble: list[str] = []
    for line in body.splitlines():
        m = _HEADER_RE.match(line)
        if m:
            sections.append([m.group(2), []])
        elif sections:
            sections[-1][1].append(line)
        else:
            preamble.append(line)
    out = []
    if "\n".join(preamble).strip():
        out.append(["Front matter", preamble])
    out.extend(sections)
    seen: dict[str, int] = {}
    result = []
    for header, lines in out:
        n = seen.get(header, 0) + 1
        seen[header] = n
        name = header if n == 1 else f"{header} ({n})"
        result.append((name, "\n".join(lines).strip("\n")))
    return tuple(result)


def read_headers(record: PaperRecord) -> list[str]:
    return record.headers()


def read_section(record: PaperRecord, header: str) -> str:
    for h, body in record.sections:
        if h == header:
            return body
    raise SectionNotFoundError(
        f"no section {header!r} in {record.identifier}; available: {', '.join(record.headers())}"
    )


class FixtureCorpus:
    def __init__(self, root: str | Path):
        self.root = Path(root)

    def _ids(self) -> list[str]:
        if not self.root.is_dir():
            return []
        return sorted(p.name for p in self.root.iterdir() if (p / "meta").is_file())

    def meta(self, identifier: str) -> dict:
        path = self.root / identifier / "meta"
        if not path.is_file():
            raise LiteratureError(f"paper {identifier!r} not in corpus")
        return json.loads(path.read_text())

    def search(self, query: str, limit: int = 10) -> list[SearchHit]:
        if not query or not query.strip():
            raise ValueError("search query must not be empty")
        if limit < 1:
            raise ValueError("limit must be at least 1")
        q = tokens(query)
        hits = []
        for identifier in self._ids():
            meta = self.meta(identifier)
            overlap = len(q & tokens(meta.get("title", "") + " " + meta.get("abstract", "")))
            if overlap:
                hits.append(SearchHit(identifier, meta.get("title", ""), meta.get("abstract", ""), meta.get("doi"), float(overlap)))
        hits.sort(key=lambda h: (-h.score, h.identifier))
        return hits[:limit]

    def resolve(self, key: str) -> str:
        """Map a DOI or identifier to a corpus identifier."""
        key = key.strip()
        if key.lower().startswith("doi:"):
            key = key[4:]
        for identifier in self._ids():
            if identifier == key or (self.meta(identifier).get("doi") or "").lower() == key.lower():
                return identifier
        raise LiteratureError(f"no paper with DOI or id {key!r} in the corpus")

    def download(self, key: str) -> PaperRecord:
        identifier = self.resolve(key)
        meta = self.meta(identifier)
        body = (self.root / identifier / "body").read_text()
        return PaperRecord(
            identifier=identifier,
            title=meta.get("title", ""),
            abstract=meta.get("abstract", ""),
            sections=split_sections(body),
            source="fixture",
            doi=meta.get("doi"),
        )


class SemanticScholarClient:
    """Minimal Graph API client: keyword search and lookup by DOI."""

    FIELDS = "title,abstract,externalIds"

    def __init__(self, base_url: str = "https://api.semanticscholar.org", api_key: str | None = None,
                 download_dir: str | Path | None = None, client: httpx.Client | None = None, timeout: float = 30.0):
        self.base_url = base_url.rstrip("/")
        self.api_key = api_key
        self.download_dir = Path(download_dir) if download_dir else None
        self.client = client or httpx.Client(timeout=timeout)
        self._locks: dict[str, threading.Lock] = {}
        self._guard = threading.Lock()

    def _get(self, path: str, params: dict) -> dict:
        headers = {"x-api-key": self.api_key} if self.api_key else {}
        try:
            response = self.client.get(self.base_url + path, params=params, headers=headers)
        except httpx.TransportError as exc:
            raise LiteratureError(f"network failure: {exc}", retryable=True) from None
        if response.status_code == 429 or response.status_code >= 500:
            raise LiteratureError(f"HTTP {response.status_code} from Semantic Scholar", retryable=True)
        if response.status_code == 404:
            raise LiteratureError(f"not found: {path}")
        if response.status_code >= 400:
            raise LiteratureError(f"HTTP {response.status_code}: {response.text[:200]}")
        return response.json()

    def search(self, query: str, limit: int = 10) -> list[SearchHit]:
        if not query or not query.strip():
            raise ValueError("search query must not be empty")
        doc = self._get("/graph/v1/paper/search", {"query": query, "limit": limit, "fields": self.FIELDS})
        hits = []
        for rank, item in enumerate(doc.get("data") or ()):
            doi = (item.get("externalIds") or {}).get("DOI")
            hits.append(SearchHit(item.get("paperId", ""), item.get("title") or "", item.get("abstract") or "", doi, float(-rank)))
        return hits[:limit]

    def download(self, doi: str) -> PaperRecord:
        key = doi[4:] if doi.lower().startswith("doi:") else doi
        with self._guard:
            lock = self._locks.setdefault(key, threading.Lock())
        with lock:
            item = self._get(f"/graph/v1/paper/DOI:{key}", {"fields": self.FIELDS + ",openAccessPdf"})
            title = item.get("title") or ""
            abstract = item.get("abstract") or ""
            body = f"# Abstract\n{abstract}\n"
            identifier = item.get("paperId") or key.replace("/", "_")
            if self.download_dir is not None:
                folder = self.download_dir / identifier
                folder.mkdir(parents=True, exist_ok=True)
                (folder / "meta").write_text(json.dumps({"id": identifier, "doi": key, "title": title, "abstract": abstract, "pdf": (item.get("openAccessPdf") or {}).get("url")}, indent=2, sort_keys=True))
                (folder / "body").write_text(body)
        return PaperRecord(identifier, title, abstract, split_sections(body), "downloaded", key)


def search_papers(backend, query: str, limit: int = 10) -> list[SearchHit]:
    return backend.search(query, limit)
