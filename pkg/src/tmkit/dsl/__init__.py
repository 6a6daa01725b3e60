"""Textual concrete syntax: parsing, printing, and JSON interchange."""

from .json_io import from_json, to_json
from .parser import ParseResult, parse
from .printer import format, format_parts

__all__ = ["parse", "ParseResult", "format", "format_parts", "to_json", "from_json"]
