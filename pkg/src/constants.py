SMT_COMMANDS = {
    "set-logic",
    "set-option",
    "set-info",
    "declare-const",
    "declare-fun",
    "define-fun",
    "declare-sort",
    "assert",
    "check-sat",
    "push",
    "pop",
    "check-sat-assuming",
    "get-model",
    "get-value",
    "get-info",
    "get-option",
    "get-assignment",
    "get-proof",
    "get-unsat-core",
    "get-unsat-assumptions",
    "define-fun-rec",
    "define-funs-rec",
    "define-sort",
    "echo",
    "exit",
    "reset",
    "reset-assertions",
}

# Read-only or declarative commands that carry no constraint for the single check.
IGNORED_COMMANDS = {
    "set-option",
    "set-info",
    "declare-sort",
    "get-model",
    "get-value",
    "get-info",
    "get-option",
    "get-assignment",
    "get-proof",
    "get-unsat-core",
    "get-unsat-assumptions",
    "echo",
    "exit",
}

REJECTED_COMMANDS = {
    "push",
    "pop",
    "check-sat-assuming",
    "define-fun-rec",
    "define-funs-rec",
    "define-sort",
    "reset",
    "reset-assertions",
}

SMT_RESERVED = {
    "true",
    "false",
    "not",
    "and",
    "or",
    "xor",
    "=>",
    "=",
    "distinct",
    "ite",
    "let",
    "forall",
    "exists",
    "as",
    "par",
    "_",
    "!",
    "Bool",
    "Int",
    "Real",
    "String",
    "BitVec",
    "Array",
}

# Theory constants that may appear bare (no declaration) inside opaque terms.
THEORY_CONSTANTS = {
    "re.allchar",
    "re.all",
    "re.none",
    "RNE",
    "RNA",
    "RTP",
    "RTN",
    "RTZ",
    "roundNearestTiesToEven",
    "roundNearestTiesToAway",
    "roundTowardPositive",
    "roundTowardNegative",
    "roundTowardZero",
}

PYTHON_KEYWORDS = {
    "False",
    "None",
    "True",
    "and",
    "as",
    "assert",
    "async",
    "await",
    "break",
    "class",
    "continue",
    "def",
    "del",
    "elif",
    "else",
    "except",
    "finally",
    "for",
    "from",
    "global",
    "if",
    "import",
    "in",
    "is",
    "lambda",
    "nonlocal",
    "not",
    "or",
    "pass",
    "raise",
    "return",
    "try",
    "while",
    "with",
    "yield",
}
