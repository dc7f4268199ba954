"""Lexical tokenizer for raw HTML.

This is a single-pass scanner over the character stream, not a DOM
parser, so it is total: any byte string produces a token stream and
malformed markup degrades gracefully. Rules:

* the whole document is lowercased first;
* a markup tag name becomes one token carrying its bracket form
  (``<div``, ``</div``);
* attribute names and attribute values become word tokens with quotes
  stripped;
* text content, script bodies, style bodies and comment interiors are
  split on whitespace and punctuation; punctuation runs are discarded
  and alphanumeric/underscore/hyphen runs are kept;
* tokens longer than ``LONG_TOKEN_LIMIT`` characters are kept in the
  stream but flagged as eligible for vocabulary pruning downstream;
* empty input yields an empty stream.

Script and style bodies run until the matching close tag, so ``<`` and
``>`` inside code never open phantom tags.
"""

import re
from dataclasses import dataclass, field

LONG_TOKEN_LIMIT = 64

# a word run may contain letters, digits, underscores and hyphens, and
# must contain at least one letter or digit
_WORD_RUN = re.compile(r"[\w\-]+", re.UNICODE)
_HAS_ALNUM = re.compile(r"[^\W_]", re.UNICODE)
_TAG_NAME = re.compile(r"[a-z][\w\-]*")
_WHITESPACE = " \t\n\r\f\v"
_ATTR_STOP = set(_WHITESPACE) | {"=", ">", "/", '"', "'"}

_RAWTEXT_TAGS = ("script", "style")


@dataclass
class TokenStream:
    """Ordered tokens extracted from one document."""

    sample_id: str = ""
    tokens: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)


def oversized(token: str) -> bool:
    """True when a token exceeds LONG_TOKEN_LIMIT and may be pruned."""
    return len(token) > LONG_TOKEN_LIMIT


def _emit_words(text: str, out: list[str]) -> None:
    for run in _WORD_RUN.findall(text):
        if _HAS_ALNUM.search(run):
            out.append(run)


def tokenize(html: str | bytes, sample_id: str = "") -> TokenStream:
    """Tokenize raw HTML into a TokenStream.

    Accepts str or bytes; invalid UTF-8 byte sequences are replaced
    rather than raised. The same input always yields the same stream.
    """
    if isinstance(html, bytes):
        html = html.decode("utf-8", errors="replace")
    s = html.lower()
    n = len(s)
    out: list[str] = []
    i = 0
    text_start = 0

    def flush_text(end: int) -> None:
        if end > text_start:
            _emit_words(s[text_start:end], out)

    while i < n:
        lt = s.find("<", i)
        if lt < 0:
            break
        nxt = s[lt + 1] if lt + 1 < n else ""

        if nxt == "!":
            if s.startswith("<!--", lt):
                flush_text(lt)
                close = s.find("-->", lt + 4)
                body_end = close if close >= 0 else n
                _emit_words(s[lt + 4 : body_end], out)
                i = body_end + 3 if close >= 0 else n
                text_start = i
                continue
            m = _TAG_NAME.match(s, lt + 2)
            flush_text(lt)
            if m:
                out.append("<!" + m.group())
                i = _scan_attrs(s, m.end(), out)
            else:
                i = _scan_attrs(s, lt + 2, out)
            text_start = i
            continue

        if nxt == "?":
            m = _TAG_NAME.match(s, lt + 2)
            flush_text(lt)
            if m:
                out.append("<?" + m.group())
                i = _scan_attrs(s, m.end(), out)
            else:
                i = _scan_attrs(s, lt + 2, out)
            text_start = i
            continue

        if nxt == "/":
            m = _TAG_NAME.match(s, lt + 2)
            if m:
                flush_text(lt)
                out.append("</" + m.group())
                i = _scan_attrs(s, m.end(), out)
                text_start = i
            else:
                # stray "</" with no name: treat "<" as punctuation
                i = lt + 1
            continue

        m = _TAG_NAME.match(s, lt + 1)
        if m:
            name = m.group()
            flush_text(lt)
            out.append("<" + name)
            i = _scan_attrs(s, m.end(), out)
            text_start = i
            if name in _RAWTEXT_TAGS:
                close = s.find("</" + name, i)
                body_end = close if close >= 0 else n
                _emit_words(s[i:body_end], out)
                i = body_end
                text_start = i
            continue

        # "<" not followed by a tag construct: plain punctuation
        i = lt + 1

    flush_text(n)
    return TokenStream(sample_id=sample_id, tokens=out)


def _scan_attrs(s: str, i: int, out: list[str]) -> int:
    """Scan attributes from inside a tag; return the index after '>'."""
    n = len(s)
    while i < n:
        c = s[i]
        if c == ">":
            return i + 1
        if c in _WHITESPACE or c == "/":
            i += 1
            continue
        if c == "=":
            i += 1
            # skip whitespace between '=' and the value
            while i < n and s[i] in _WHITESPACE:
                i += 1
            if i < n and s[i] in "\"'":
                quote = s[i]
                end = s.find(quote, i + 1)
                if end < 0:
                    _emit_words(s[i + 1 :], out)
                    return n
                _emit_words(s[i + 1 : end], out)
                i = end + 1
            else:
                start = i
                while i < n and s[i] not in _WHITESPACE and s[i] != ">":
                    i += 1
                _emit_words(s[start:i], out)
            continue
        if c in "\"'":
            # quoted run in attribute position without '=': keep the words
            quote = c
            end = s.find(quote, i + 1)
            if end < 0:
                _emit_words(s[i + 1 :], out)
                return n
            _emit_words(s[i + 1 : end], out)
            i = end + 1
            continue
        start = i
        while i < n and s[i] not in _ATTR_STOP:
            i += 1
        _emit_words(s[start:i], out)
    return n
