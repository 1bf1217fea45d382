"""Ordered rule tables mapping diagnostic messages to canonical error ids.

First matching rule wins; a miss yields the per-language fallback
``<LANG>_UNCLASSIFIED``.  Rule order goes from specific to generic, so
keep new rules above the family they specialize.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .language import LanguageId
from .parse import Diagnostic, Severity

TAXONOMY_VERSION = "1.0.0"

_ID_RE = re.compile(r"^[A-Z][A-Z0-9]*(_[A-Z0-9]+)+$")


@dataclass(frozen=True)
class CanonicalErrorId:
    id: str
    taxonomy_version: str = TAXONOMY_VERSION

    def __post_init__(self):
        if not _ID_RE.match(self.id):
            raise ValueError(f"invalid canonical error id: {self.id!r}")


def _table(prefix: str, rules: list[tuple[str, str]]) -> list[tuple[re.Pattern, str]]:
    return [(re.compile(pattern, re.IGNORECASE), f"{prefix}_{name}") for pattern, name in rules]


# Messages quote identifiers with ASCII or typographic quotes depending on locale.
_Q = r"['\"`‘’]"

_C_FAMILY_RULES = [
    (rf"expected ({_Q},{_Q} or )?{_Q}?;", "SEMICOLON_EXPECTED"),
    (rf"expected {_Q}?\)", "PAREN_EXPECTED"),
    (rf"expected {_Q}?\}}", "BRACE_EXPECTED"),
    (rf"expected {_Q}?\]", "BRACKET_EXPECTED"),
    (r"expected identifier", "IDENTIFIER_EXPECTED"),
    (r"expected expression", "EXPRESSION_EXPECTED"),
    (r"expected declaration or statement at end", "UNTERMINATED_BLOCK"),
    (r"no such file or directory", "INCLUDE_NOT_FOUND"),
    (r"file not found", "INCLUDE_NOT_FOUND"),
    (r"undeclared \(first use", "UNDECLARED_IDENTIFIER"),
    (r"use of undeclared identifier", "UNDECLARED_IDENTIFIER"),
    (r"implicit declaration of function", "IMPLICIT_FUNCTION_DECLARATION"),
    (r"implicitly declaring library function", "IMPLICIT_FUNCTION_DECLARATION"),
    (r"unknown type name", "UNKNOWN_TYPE"),
    (r"conflicting types for", "CONFLICTING_TYPES"),
    (r"redefinition of", "REDEFINITION"),
    (r"incompatible (pointer )?types?", "INCOMPATIBLE_TYPES"),
    (r"incompatible integer to pointer", "INCOMPATIBLE_TYPES"),
    (r"too few arguments", "TOO_FEW_ARGS"),
    (r"too many arguments", "TOO_MANY_ARGS"),
    (r"invalid operands to binary", "INVALID_OPERANDS"),
    (r"lvalue required", "LVALUE_REQUIRED"),
    (r"assignment of read-only", "ASSIGN_READONLY"),
    (r"cannot assign to variable .* const", "ASSIGN_READONLY"),
    (r"subscripted value is neither array nor pointer", "BAD_SUBSCRIPT"),
    (r"called object .* is not a function", "NOT_A_FUNCTION"),
    (r"dereferencing pointer to incomplete type", "INCOMPLETE_TYPE_DEREF"),
    (r"void value not ignored", "VOID_VALUE_USED"),
    (rf"stray {_Q}", "STRAY_TOKEN"),
    (r"undefined reference to", "UNDEFINED_REFERENCE"),
    (r"duplicate case value", "DUPLICATE_CASE"),
    (r"\breturn\b.*with no value", "RETURN_VALUE_MISSING"),
]

_CPP_SPECIFIC_RULES = [
    (r"was not declared in this scope", "UNDECLARED_IDENTIFIER"),
    (r"no matching function for call", "NO_MATCHING_FUNCTION"),
    (r"(has no member|no member named)", "NO_MEMBER"),
    (r"invalid conversion from", "INVALID_CONVERSION"),
    (r"cannot convert", "CANNOT_CONVERT"),
    (r"use of deleted function", "DELETED_FUNCTION"),
    (r"is (private|protected) within this context", "ACCESS_VIOLATION"),
    (r"template argument", "TEMPLATE_ARGUMENT"),
    (r"expected primary-expression", "PRIMARY_EXPRESSION_EXPECTED"),
    (r"does not name a type", "UNKNOWN_TYPE"),
    (r"no match for .?operator", "NO_MATCHING_OPERATOR"),
    (r"invalid use of incomplete type", "INCOMPLETE_TYPE_USE"),
    (r"abstract class", "ABSTRACT_INSTANTIATION"),
]

_PY_RULES = [
    (r"^ModuleNotFoundError:", "MODULE_NOT_FOUND"),
    (r"^ImportError: cannot import name", "IMPORT_NAME_ERROR"),
    (r"^ImportError:", "IMPORT_ERROR"),
    (r"^IndentationError: unexpected indent", "UNEXPECTED_INDENT"),
    (r"^IndentationError: expected an indented block", "EXPECTED_INDENT"),
    (r"^(IndentationError|TabError):", "INDENTATION_ERROR"),
    (r"^SyntaxError: .*never closed", "UNCLOSED_BRACKET"),
    (r"^SyntaxError: unexpected EOF", "UNEXPECTED_EOF"),
    (r"^SyntaxError: invalid syntax", "INVALID_SYNTAX"),
    (r"^SyntaxError: cannot assign", "INVALID_ASSIGNMENT"),
    (r"^SyntaxError: \(unicode error\)", "UNICODE_ESCAPE_ERROR"),
    (r"^SyntaxError:", "SYNTAX_ERROR"),
    (r"^NameError:", "NAME_ERROR"),
    (r"^UnboundLocalError:", "UNBOUND_LOCAL"),
    (r"^AttributeError: module .* has no attribute", "MODULE_ATTRIBUTE_ERROR"),
    (r"^AttributeError:", "ATTRIBUTE_ERROR"),
    (r"^TypeError: .*positional arguments?", "ARGUMENT_COUNT"),
    (r"^TypeError: unsupported operand", "UNSUPPORTED_OPERAND"),
    (r"^TypeError: .* object is not (callable|subscriptable|iterable)", "OBJECT_NOT_USABLE"),
    (r"^TypeError: can only concatenate", "BAD_CONCATENATION"),
    (r"^TypeError:", "TYPE_ERROR"),
    (r"^(json\.decoder\.)?JSONDecodeError:", "JSON_DECODE_ERROR"),
    (r"^ValueError: invalid literal", "INVALID_LITERAL"),
    (r"^ValueError: not enough values to unpack", "UNPACK_MISMATCH"),
    (r"^ValueError:", "VALUE_ERROR"),
    (r"^KeyError:", "KEY_ERROR"),
    (r"^IndexError:", "INDEX_ERROR"),
    (r"^ZeroDivisionError:", "ZERO_DIVISION"),
    (r"^FileNotFoundError:", "FILE_NOT_FOUND"),
    (r"^RecursionError:", "RECURSION_LIMIT"),
    (r"^OverflowError:", "OVERFLOW"),
    (r"^RuntimeError:", "RUNTIME_ERROR"),
]

_GO_RULES = [
    (r"^undefined:", "UNDEFINED_IDENTIFIER"),
    (r"imported and not used", "UNUSED_IMPORT"),
    (r"declared (and|but) not used", "UNUSED_VARIABLE"),
    (r"^cannot use .* as .* value", "TYPE_MISMATCH"),
    (r"^cannot use ", "TYPE_MISMATCH"),
    (r"mismatched types", "MISMATCHED_TYPES"),
    (r"^syntax error: unexpected newline", "UNEXPECTED_NEWLINE"),
    (r"^syntax error: unexpected", "SYNTAX_UNEXPECTED"),
    (r"^syntax error:", "SYNTAX_ERROR"),
    (r"^missing return", "MISSING_RETURN"),
    (r"not enough arguments in call", "TOO_FEW_ARGS"),
    (r"too many arguments in call", "TOO_MANY_ARGS"),
    (r"(cannot find package|is not in std|no required module provides)", "PACKAGE_NOT_FOUND"),
    (r"has no field or method", "NO_FIELD_OR_METHOD"),
    (r"^cannot assign to", "CANNOT_ASSIGN"),
    (r"non-declaration statement outside function body", "STATEMENT_OUTSIDE_FUNC"),
    (r"missing function body", "MISSING_FUNC_BODY"),
    (r"redeclared in this block", "REDECLARED"),
    (r"cannot refer to unexported", "UNEXPORTED_REFERENCE"),
    (r"^invalid character", "INVALID_CHARACTER"),
    (r"expected declaration", "DECLARATION_EXPECTED"),
    (r"^cannot convert", "CANNOT_CONVERT"),
    (r"non-boolean condition", "NON_BOOL_CONDITION"),
    (r"^cannot range over", "BAD_RANGE"),
    (r"assignment mismatch", "ASSIGNMENT_MISMATCH"),
    (r"unknown field", "UNKNOWN_FIELD"),
    (r"^import cycle", "IMPORT_CYCLE"),
    (r"^invalid operation:", "INVALID_OPERATION"),
    (r"used as value", "VALUE_FROM_STATEMENT"),
    (r"is not a type", "NOT_A_TYPE"),
]

_TABLES: dict[LanguageId, list[tuple[re.Pattern, str]]] = {
    LanguageId.C: _table("C", _C_FAMILY_RULES),
    LanguageId.CPP: _table("CPP", _CPP_SPECIFIC_RULES) + _table("CPP", _C_FAMILY_RULES),
    LanguageId.PYTHON: _table("PY", _PY_RULES),
    LanguageId.GO: _table("GO", _GO_RULES),
}

_FALLBACK = {
    LanguageId.C: "C_UNCLASSIFIED",
    LanguageId.CPP: "CPP_UNCLASSIFIED",
    LanguageId.PYTHON: "PY_UNCLASSIFIED",
    LanguageId.GO: "GO_UNCLASSIFIED",
}


def shipped_ids(language: LanguageId) -> list[str]:
    """Every id the table can produce for a language, fallback included."""
    seen: list[str] = []
    for _, cid in _TABLES[language]:
        if cid not in seen:
            seen.append(cid)
    seen.append(_FALLBACK[language])
    return seen


def canonicalize(diag: Diagnostic, language: LanguageId) -> CanonicalErrorId:
    """Map an Error diagnostic to its canonical id; total, never fails."""
    if diag.severity is not Severity.ERROR:
        raise ValueError("canonicalize is defined for Error diagnostics only")
    for pattern, cid in _TABLES[language]:
        if pattern.search(diag.message):
            return CanonicalErrorId(cid)
    return CanonicalErrorId(_FALLBACK[language])
