"""Parser and printer for the pulse-sequence expression language.

    sequence := item+
    item     := '~' item | atom repeat?
    atom     := NAME | '(' sequence ')'
    repeat   := INT

Juxtaposition concatenates, ``~`` inverts the phase of every pulse in its
operand and an integer after an atom repeats it. ``#`` comments run to the
end of the line. Expressions expand to a flat list of (block, inverted)
entries.
"""

import logging
import math
import re
from pathlib import Path
from typing import Dict, List, NamedTuple, Optional, Tuple, Union

from ..errors import SequenceSyntaxError, UnknownBlockError
from .pulses import BLOCK_REGISTRY, BlockBuilder, Supercycle, SupercycleEntry

logger = logging.getLogger(__name__)

_TOKEN = re.compile(
    r"(?P<ws>\s+)|(?P<comment>#[^\n]*)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<int>\d+)|(?P<op>[~()])"
)


class Token(NamedTuple):
    kind: str
    text: str
    position: int


def tokenize(text: str) -> List[Token]:
    tokens: List[Token] = []
    position = 0
    while position < len(text):
        match = _TOKEN.match(text, position)
        if match is None:
            raise SequenceSyntaxError(f"unexpected character {text[position]!r}", position)
        kind = match.lastgroup
        if kind in ("name", "int", "op"):
            tokens.append(Token(kind, match.group(), position))
        position = match.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


# flat expansion: (block name, inverted, position of the name)
_Flat = List[Tuple[str, bool, int]]


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.index = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def advance(self) -> Token:
        token = self.current
        self.index += 1
        return token

    def parse(self) -> _Flat:
        if self.current.kind == "end":
            raise SequenceSyntaxError("empty sequence", self.current.position)
        flat = self.sequence()
        if self.current.kind != "end":
            raise SequenceSyntaxError(f"unexpected '{self.current.text}'", self.current.position)
        return flat

    def sequence(self) -> _Flat:
        flat: _Flat = []
        while self.current.kind == "name" or self.current.text in ("~", "("):
            flat.extend(self.item())
        if not flat:
            raise SequenceSyntaxError("expected a block name, '~' or '('", self.current.position)
        return flat

    def item(self) -> _Flat:
        if self.current.text == "~":
            self.advance()
            if self.current.kind == "end":
                raise SequenceSyntaxError("'~' needs an operand", self.current.position)
            return [(name, not inv, pos) for name, inv, pos in self.item()]
        flat = self.atom()
        if self.current.kind == "int":
            token = self.advance()
            count = int(token.text)
            if count < 1:
                raise SequenceSyntaxError("repeat count must be >= 1", token.position)
            flat = flat * count
        return flat

    def atom(self) -> _Flat:
        token = self.current
        if token.kind == "name":
            self.advance()
            return [(token.text, False, token.position)]
        if token.text == "(":
            self.advance()
            flat = self.sequence()
            if self.current.text != ")":
                raise SequenceSyntaxError("missing ')'", self.current.position)
            self.advance()
            return flat
        raise SequenceSyntaxError(
            f"expected a block name or '(' but found '{token.text or 'end of input'}'",
            token.position,
        )


def parse_sequence(
    text: str,
    theta: float = math.pi,
    registry: Optional[Dict[str, BlockBuilder]] = None,
) -> Supercycle:
    """Expand a sequence expression into a flat supercycle of blocks."""
    registry = BLOCK_REGISTRY if registry is None else registry
    flat = _Parser(text).parse()
    blocks = {}
    entries = []
    for name, inverted, position in flat:
        if name not in registry:
            raise UnknownBlockError(name, position)
        if name not in blocks:
            blocks[name] = registry[name](theta)
        entries.append(SupercycleEntry(block=blocks[name], inverted=inverted))
    logger.debug("parsed %d blocks from %r", len(entries), text)
    return Supercycle(entries=tuple(entries))


def format_sequence(sc: Supercycle) -> str:
    """Canonical flat form, e.g. ``R3 ~R3 ~R3 R3``."""
    return sc.canonical()


def load_sequence(path: Union[str, Path], theta: float = math.pi) -> Supercycle:
    """Read one sequence expression from a UTF-8 text file."""
    text = Path(path).read_text(encoding="utf-8")
    return parse_sequence(text, theta=theta)
