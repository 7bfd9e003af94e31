"""Minimal HTML text extraction on top of html.parser.

Pages from EDGAR and OSHA are scraped by markers in element text rather
than by fixed DOM paths, so all we need is (a) the text of every <div>
(nested divs included, as an XPath `//div` string value would give) split
into lines, and (b) the cell texts of every table row.
"""

from __future__ import annotations

import re
from html.parser import HTMLParser

_WS = re.compile(r"[ \t\r\f\v\xa0]+")
_BLOCK_BREAKS = {"br", "p", "tr", "li", "h1", "h2", "h3", "h4", "h5", "h6", "div", "table"}


def clean_line(text: str) -> str:
    return _WS.sub(" ", text).strip()


class _Collector(HTMLParser):
    def __init__(self, tag: str):
        super().__init__(convert_charrefs=True)
        self.tag = tag
        self.open: list[list[str]] = []
        self.slots: list[str | None] = []
        self.index: list[int] = []

    def handle_starttag(self, tag, attrs):
        if tag in _BLOCK_BREAKS:
            self._put("\n")
        if tag == self.tag:
            self.open.append([])
            self.index.append(len(self.slots))
            self.slots.append(None)

    def handle_startendtag(self, tag, attrs):
        if tag in _BLOCK_BREAKS:
            self._put("\n")

    def handle_endtag(self, tag):
        if tag == self.tag and self.open:
            buf = self.open.pop()
            text = "".join(buf)
            self._put(text + "\n")
            self.slots[self.index.pop()] = text
        elif tag in _BLOCK_BREAKS:
            self._put("\n")

    def handle_data(self, data):
        self._put(data)

    def _put(self, text):
        if self.open:
            self.open[-1].append(text)


def element_lines(html: str, tag: str = "div") -> list[str]:
    """Text lines of every `tag` element in document order, blanks and
    bare separators dropped. Nested text is repeated in each ancestor.
    Elements left unclosed at end of input are flushed as if closed."""
    parser = _Collector(tag)
    parser.feed(html)
    parser.close()
    while parser.open:
        parser.handle_endtag(tag)
    lines = []
    for text in parser.slots:
        if text is None:
            continue
        for line in text.split("\n"):
            line = clean_line(line)
            if line and line != "|":
                lines.append(line)
    return lines


class _Rows(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.rows: list[list[str]] = []
        self.row: list[str] | None = None
        self.cell: list[str] | None = None

    def handle_starttag(self, tag, attrs):
        if tag == "tr":
            self._close_row()
            self.row = []
        elif tag in ("td", "th"):
            self._close_cell()
            if self.row is None:
                self.row = []
            self.cell = []
        elif tag == "br" and self.cell is not None:
            self.cell.append(" ")

    def handle_endtag(self, tag):
        if tag in ("td", "th"):
            self._close_cell()
        elif tag == "tr":
            self._close_row()
        elif tag == "table":
            self._close_row()

    def handle_data(self, data):
        if self.cell is not None:
            self.cell.append(data)

    def _close_cell(self):
        if self.cell is not None and self.row is not None:
            self.row.append(clean_line("".join(self.cell)))
        self.cell = None

    def _close_row(self):
        self._close_cell()
        if self.row is not None:
            self.rows.append(self.row)
        self.row = None


def table_rows(html: str) -> list[list[str]]:
    parser = _Rows()
    parser.feed(html)
    parser.close()
    parser._close_row()
    return parser.rows


def find_links(html: str) -> list[tuple[str, str]]:
    """(href, anchor text) pairs for every <a> element."""
    links: list[tuple[str, str]] = []

    class _Links(HTMLParser):
        def __init__(self):
            super().__init__(convert_charrefs=True)
            self.href = None
            self.buf: list[str] = []

        def handle_starttag(self, tag, attrs):
            if tag == "a":
                self.href = dict(attrs).get("href")
                self.buf = []

        def handle_data(self, data):
            if self.href is not None:
                self.buf.append(data)

        def handle_endtag(self, tag):
            if tag == "a" and self.href is not None:
                links.append((self.href, clean_line("".join(self.buf))))
                self.href = None

    p = _Links()
    p.feed(html)
    p.close()
    return links
