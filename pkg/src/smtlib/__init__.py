"""SMT-LIB v2 subset: lexer, parser, canonical printer and signature extraction."""

from .ast import BOOL, INT, Declaration, Script, Sort, SortKind, Term, bitvec  # noqa: F401
from .lexer import LexError  # noqa: F401
from .parser import ParseError, SortError, parse  # noqa: F401
from .printer import print_script, print_term  # noqa: F401
from .signature import Signature, extract_signature  # noqa: F401
