"""JSON model documents: strict parsing, reaction-string sugar and canonical emit.

A document looks like::

    {
      "name": "toy",
      "species": ["A", "B"],
      "reactions": [
        {"reaction": "A -> B", "k": 1, "terms": [{"a": 1, "F": {"A": 1}}]},
        {"reactant": {"B": 1}, "product": {"A": 1}, "k": "1/2"}
      ]
    }

Decimal literals are read as exact fractions; numbers may also be given as
``"p/q"`` strings. A reaction without ``terms`` gets mass-action kinetics.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

from .errors import SchemaError
from .kinetics import PolyPLKinetics, Term
from .network import Network

TOP_KEYS = {"name", "description", "species", "reactions", "decompositions", "options", "claims"}
REACTION_KEYS = {"reaction", "reactant", "product", "k", "terms", "label"}
TERM_KEYS = {"a", "F"}
OPTION_KEYS = {"seed", "starts", "tol_residual", "tol_dedup", "lex", "rates", "ccb_point",
               "point", "trials", "decomposition"}
CLAIM_KEYS = {"deficiency", "weakly_reversible", "kinetic_deficiency",
              "kinetic_reactant_deficiency", "classification", "py_tik"}
FLOAT_OPTIONS = {"tol_residual", "tol_dedup"}

_ARROW = "->"
_TERM_RE = re.compile(r"^\s*(\d*)\s*([A-Za-z_][A-Za-z0-9_]*)\s*$")


@dataclass
class ReactionEntry:
    reactant: dict
    product: dict
    k: Any
    terms: list | None = None
    label: str | None = None


@dataclass
class ModelDocument:
    species: list
    reactions: list
    name: str | None = None
    description: str | None = None
    decompositions: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)
    claims: dict = field(default_factory=dict)

    def network(self) -> Network:
        return Network.from_reactions(self.species, [(r.reactant, r.product)
                                                     for r in self.reactions])

    def kinetics(self) -> PolyPLKinetics:
        terms = []
        for r in self.reactions:
            if r.terms is None:
                orders = tuple(r.reactant.get(s, 0) for s in self.species)
                terms.append((Term(1, orders),))
            else:
                terms.append(tuple(Term(a, tuple(F.get(s, 0) for s in self.species))
                                   for a, F in r.terms))
        return PolyPLKinetics(tuple(r.k for r in self.reactions), tuple(terms))


def _reject_duplicates(pairs):
    out = {}
    for k, v in pairs:
        if k in out:
            raise SchemaError(f"duplicate key {k!r}")
        out[k] = v
    return out


def _number(v, where: str):
    if isinstance(v, bool) or not isinstance(v, (int, Fraction, float, str)):
        raise SchemaError(f"{where}: expected a number, got {v!r}")
    if isinstance(v, str):
        try:
            return Fraction(v.strip())
        except ValueError:
            raise SchemaError(f"{where}: cannot read {v!r} as a number")
    return Fraction(v) if isinstance(v, int) else v


def _check_keys(obj, allowed: set, where: str) -> None:
    if not isinstance(obj, dict):
        raise SchemaError(f"{where}: expected an object")
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise SchemaError(f"{where}: unknown field(s) {unknown}")


def _species_map(obj, species: list, where: str) -> dict:
    if not isinstance(obj, dict):
        raise SchemaError(f"{where}: expected a species -> number object")
    unknown = sorted(set(obj) - set(species))
    if unknown:
        raise SchemaError(f"{where}: undeclared species {unknown}")
    return {s: _number(v, f"{where}.{s}") for s, v in obj.items()}


def parse_reaction_string(text: str, where: str = "reaction") -> tuple[dict, dict]:
    """``"X + 2Y -> Z"`` to a pair of coefficient maps; ``0`` is the empty complex."""
    if text.count(_ARROW) != 1:
        raise SchemaError(f"{where}: expected exactly one '->' in {text!r}")
    sides = []
    for side in text.split(_ARROW):
        side = side.strip()
        out: dict[str, int] = {}
        if side not in ("", "0"):
            for part in side.split("+"):
                m = _TERM_RE.match(part)
                if not m:
                    raise SchemaError(f"{where}: cannot read {part.strip()!r} in {text!r}")
                coef = int(m.group(1)) if m.group(1) else 1
                out[m.group(2)] = out.get(m.group(2), 0) + coef
        sides.append(out)
    return sides[0], sides[1]


def _reaction(obj, i: int, species: list) -> ReactionEntry:
    where = f"reactions[{i}]"
    _check_keys(obj, REACTION_KEYS, where)
    if "k" not in obj:
        raise SchemaError(f"{where}: missing required field 'k'")
    if "reaction" in obj:
        if "reactant" in obj or "product" in obj:
            raise SchemaError(f"{where}: give either 'reaction' or 'reactant'/'product'")
        if not isinstance(obj["reaction"], str):
            raise SchemaError(f"{where}.reaction: expected a string")
        y, yp = parse_reaction_string(obj["reaction"], where)
        y = _species_map(y, species, where)
        yp = _species_map(yp, species, where)
    else:
        for key in ("reactant", "product"):
            if key not in obj:
                raise SchemaError(f"{where}: missing required field {key!r}")
        y = _species_map(obj["reactant"], species, f"{where}.reactant")
        yp = _species_map(obj["product"], species, f"{where}.product")
    terms = None
    if "terms" in obj:
        if not isinstance(obj["terms"], list) or not obj["terms"]:
            raise SchemaError(f"{where}.terms: expected a non-empty list")
        terms = []
        for t, term in enumerate(obj["terms"]):
            tw = f"{where}.terms[{t}]"
            _check_keys(term, TERM_KEYS, tw)
            for key in ("a", "F"):
                if key not in term:
                    raise SchemaError(f"{tw}: missing required field {key!r}")
            terms.append((_number(term["a"], f"{tw}.a"),
                          _species_map(term["F"], species, f"{tw}.F")))
    label = obj.get("label")
    if label is not None and not isinstance(label, str):
        raise SchemaError(f"{where}.label: expected a string")
    return ReactionEntry(y, yp, _number(obj["k"], f"{where}.k"), terms, label)


def _options(obj) -> dict:
    _check_keys(obj, OPTION_KEYS, "options")
    out = dict(obj)
    for key in FLOAT_OPTIONS & set(out):
        out[key] = float(_number(out[key], f"options.{key}"))
    for key in ("ccb_point", "point"):
        if key in out:
            if not isinstance(out[key], list):
                raise SchemaError(f"options.{key}: expected a list of numbers")
            out[key] = [_number(v, f"options.{key}") for v in out[key]]
    return out


def parse_document(data: dict) -> ModelDocument:
    _check_keys(data, TOP_KEYS, "document")
    for key in ("species", "reactions"):
        if key not in data:
            raise SchemaError(f"document: missing required field {key!r}")
    species = data["species"]
    if not isinstance(species, list) or not all(isinstance(s, str) for s in species):
        raise SchemaError("species: expected a list of names")
    if not isinstance(data["reactions"], list) or not data["reactions"]:
        raise SchemaError("reactions: expected a non-empty list")
    reactions = [_reaction(r, i, species) for i, r in enumerate(data["reactions"])]
    decomps = data.get("decompositions", {})
    if not isinstance(decomps, dict):
        raise SchemaError("decompositions: expected an object of named block lists")
    for name, blocks in decomps.items():
        if not (isinstance(blocks, list) and all(
                isinstance(b, list) and all(isinstance(j, int) and not isinstance(j, bool)
                                            for j in b) for b in blocks)):
            raise SchemaError(f"decompositions.{name}: expected a list of index lists")
    claims = data.get("claims", {})
    _check_keys(claims, CLAIM_KEYS, "claims")
    return ModelDocument(species=list(species), reactions=reactions, name=data.get("name"),
                         description=data.get("description"), decompositions=dict(decomps),
                         options=_options(data.get("options", {})), claims=dict(claims))


def parse(source) -> ModelDocument:
    """Parse a path or a JSON string."""
    if isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith("{")):
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = source
    try:
        data = json.loads(text, parse_float=Fraction, object_pairs_hook=_reject_duplicates)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return parse_document(data)


def jsonable(v):
    """Fractions become ints or ``"p/q"`` strings; containers are walked."""
    if isinstance(v, bool) or v is None or isinstance(v, str):
        return v
    if isinstance(v, Fraction):
        return v.numerator if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    if isinstance(v, int):
        return v
    if isinstance(v, float):
        return v
    if isinstance(v, dict):
        return {str(k): jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [jsonable(x) for x in v]
    if hasattr(v, "item"):
        return jsonable(v.item())
    if hasattr(v, "tolist"):
        return jsonable(v.tolist())
    raise TypeError(f"cannot serialize {type(v).__name__}")


def _nonzero(mapping: dict, species: list) -> dict:
    return {s: mapping[s] for s in species if mapping.get(s, 0) != 0}


def to_data(doc: ModelDocument) -> dict:
    out: dict = {}
    if doc.name is not None:
        out["name"] = doc.name
    if doc.description is not None:
        out["description"] = doc.description
    out["species"] = list(doc.species)
    reactions = []
    for r in doc.reactions:
        entry: dict = {}
        if r.label is not None:
            entry["label"] = r.label
        entry["reactant"] = _nonzero(r.reactant, doc.species)
        entry["product"] = _nonzero(r.product, doc.species)
        entry["k"] = r.k
        if r.terms is not None:
            entry["terms"] = [{"a": a, "F": _nonzero(F, doc.species)} for a, F in r.terms]
        reactions.append(entry)
    out["reactions"] = reactions
    for key in ("decompositions", "options", "claims"):
        if getattr(doc, key):
            out[key] = getattr(doc, key)
    return jsonable(out)


def emit(doc: ModelDocument) -> str:
    """Canonical JSON text; ``emit(parse(emit(d))) == emit(d)``."""
    return json.dumps(to_data(doc), indent=2, ensure_ascii=False) + "\n"
