"""Ontology readers and writer: an OBO 1.4 flat-file subset plus a JSON
interchange format.

The OBO reader only consumes what the pipeline needs from a `[Term]`
stanza: `id:`, `name:`, `is_a:`, `synonym:` and `is_obsolete:`. Everything
else is skipped silently. The JSON format is the round-trip form emitted
by :func:`serialize_ontology`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import ParseError
from .model import Ontology, OntologyClass

OBO_PURL_PREFIX = "http://purl.obolibrary.org/obo/"


@dataclass
class ParseReport:
    """Parsed ontology plus (1-based line number, message) warnings."""

    ontology: Ontology
    warnings: list[tuple[int, str]] = field(default_factory=list)


def obo_id_to_iri(obo_id: str) -> str:
    """Map an OBO id to its PURL IRI: ``GO:0001`` -> ``.../obo/GO_0001``.

    Ids that already look like absolute IRIs pass through unchanged.
    """
    if "://" in obo_id:
        return obo_id
    return OBO_PURL_PREFIX + obo_id.replace(":", "_", 1)


def _strip_obo_comment(value: str) -> str:
    """Drop a trailing ``! comment`` from a tag value."""
    return value.split("!", 1)[0].strip()


def _synonym_text(value: str) -> str | None:
    """Text between the first pair of double quotes, or None."""
    first = value.find('"')
    if first < 0:
        return None
    second = value.find('"', first + 1)
    if second < 0:
        return None
    return value[first + 1 : second]


class _Stanza:
    __slots__ = ("line", "id", "name", "synonyms", "parents", "obsolete")

    def __init__(self, line: int):
        self.line = line
        self.id: str | None = None
        self.name = ""
        self.synonyms: list[str] = []
        self.parents: list[str] = []
        self.obsolete = False


def parse_obo(text: str) -> ParseReport:
    """Parse the `[Term]` stanzas of an OBO flat file.

    Obsolete terms are dropped without a warning; a stanza without a valid
    `id:` is skipped with one. Raises :class:`ParseError` when no term
    survives.
    """
    lines = text.splitlines()
    warnings: list[tuple[int, str]] = []
    ontology_id = "obo"

    stanzas: list[_Stanza] = []
    current: _Stanza | None = None
    in_header = True
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("["):
            in_header = False
            current = _Stanza(lineno) if line == "[Term]" else None
            if current is not None:
                stanzas.append(current)
            continue
        if ":" not in line:
            continue
        tag, _, value = line.partition(":")
        tag = tag.strip()
        value = value.strip()
        if in_header:
            if tag == "ontology":
                ontology_id = value
            continue
        if current is None:
            continue
        if tag == "id":
            ident = _strip_obo_comment(value)
            if ident and " " not in ident:
                current.id = ident
        elif tag == "name":
            current.name = value
        elif tag == "is_a":
            parent = _strip_obo_comment(value)
            if parent:
                current.parents.append(parent)
        elif tag == "synonym":
            syn = _synonym_text(value)
            if syn:
                current.synonyms.append(syn)
        elif tag == "is_obsolete":
            current.obsolete = value.lower() == "true"

    classes: dict[str, OntologyClass] = {}
    for stanza in stanzas:
        if stanza.obsolete:
            continue
        if not stanza.id:
            warnings.append((stanza.line, "term stanza without id: skipped"))
            continue
        iri = obo_id_to_iri(stanza.id)
        parents = {obo_id_to_iri(p) for p in stanza.parents}
        if iri in parents:
            warnings.append((stanza.line, f"self is_a on {stanza.id} dropped"))
            parents.discard(iri)
        if iri in classes:
            warnings.append((stanza.line, f"duplicate id {stanza.id}: previous term replaced"))
        classes[iri] = OntologyClass(
            iri=iri,
            label=stanza.name,
            synonyms=frozenset(stanza.synonyms),
            parents=frozenset(parents),
        )

    if not classes:
        raise ParseError("no terms parsed from OBO input")
    return ParseReport(Ontology(id=ontology_id, classes=classes), warnings)


def parse_json_ontology(text: str) -> ParseReport:
    """Parse the JSON interchange form.

    Expected shape: ``{"id": str, "classes": [{"iri", "label",
    "synonyms", "parents"}, ...]}`` where `synonyms` and `parents`
    default to empty. Duplicate IRIs keep the last entry and add a warning.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("id"), str):
        raise ParseError('ontology document must be an object with a string "id"')
    entries = doc.get("classes")
    if not isinstance(entries, list):
        raise ParseError('ontology document must carry a "classes" list')

    warnings: list[tuple[int, str]] = []
    classes: dict[str, OntologyClass] = {}
    for entry in entries:
        if not isinstance(entry, dict) or not isinstance(entry.get("iri"), str) or not entry["iri"]:
            raise ParseError(f'class entry without "iri": {entry!r}')
        iri = entry["iri"]
        synonyms = {s for s in entry.get("synonyms", []) if s}
        parents = {p for p in entry.get("parents", [])}
        if iri in parents:
            warnings.append((1, f"self is_a on {iri} dropped"))
            parents.discard(iri)
        if iri in classes:
            warnings.append((1, f"duplicate iri {iri}: previous class replaced"))
        classes[iri] = OntologyClass(
            iri=iri,
            label=entry.get("label", "") or "",
            synonyms=frozenset(synonyms),
            parents=frozenset(parents),
        )

    if not classes:
        raise ParseError("ontology document has zero classes")
    return ParseReport(Ontology(id=doc["id"], classes=classes), warnings)


def serialize_ontology(o: Ontology) -> str:
    """Emit the JSON interchange form, classes sorted by IRI.

    Stable under round trips: parsing the output and serializing again
    yields the identical string.
    """
    payload = {
        "id": o.id,
        "classes": [
            {
                "iri": iri,
                "label": o.classes[iri].label,
                "synonyms": sorted(o.classes[iri].synonyms),
                "parents": sorted(o.classes[iri].parents),
            }
            for iri in o.sorted_iris()
        ],
    }
    return json.dumps(payload, indent=2, ensure_ascii=False) + "\n"


def parse_ontology_file(path: str) -> ParseReport:
    """Parse `path` as OBO or JSON, sniffing by extension then content."""
    with open(path, "r", encoding="utf-8") as handle:
        text = handle.read()
    lower = path.lower()
    if lower.endswith(".json"):
        return parse_json_ontology(text)
    if lower.endswith(".obo"):
        return parse_obo(text)
    return parse_json_ontology(text) if text.lstrip().startswith("{") else parse_obo(text)
