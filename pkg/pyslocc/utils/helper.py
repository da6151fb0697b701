import json
import os
import re
from fractions import Fraction
from typing import Any, Callable, Optional, TextIO

from jsonschema import ValidationError, validate

from .. import config as cfg
from ..models.canon import CanonicalForm, Run, TensorState
from ..models.exactmat import DimensionMismatch, Matrix, Scalar, SloccError
from ..models.nilpoly import OrderMismatch, PatternViolation, PolyGrid, TruncPoly


class ParseError(SloccError):
    """入力ファイル・リテラルを解釈できない"""

    def __init__(self, message: str, where: str = "$", line: Optional[int] = None,
                 column: Optional[int] = None, source: Optional[str] = None):
        self.message = message
        self.where = where
        self.line = line
        self.column = column
        self.source = source
        super().__init__(self._describe())

    def _describe(self) -> str:
        if self.line is None:
            return f"{self.where}: {self.message}"
        return f"{self.source}:{self.line}:{self.column}: {self.where}: {self.message}"

    def locate(self, source: str, text: str):
        """attach the line and column of self.where inside the JSON text of source"""
        self.source = source
        self.line, self.column = json_position(text, self.where)
        self.args = (self._describe(),)


def get_schema_path(schema_name) -> str:
    """
    schema_nameファイルのパスを返す
    """
    return os.path.join(cfg.JSON_SCHEMA_PATH, schema_name)


def validate_json(js: dict, schema_name: str):
    """
    与えられたjsonをjson schemaによって検証する

    Parameters
    ----------
    js: dict
        検証の対象となるjson
    schema_name: str
        検証に使いたいjsonファイルの名前.
        ファイル名のみを記述する.
        e.g.) state.json

    Raises
    ------
    ParseError
        schemaに違反している場合. 違反箇所のjson pathを持つ
    """
    path = get_schema_path(schema_name)
    with open(path) as j:
        json_schema = json.load(j)
    try:
        validate(js, json_schema)
    except ValidationError as e:
        raise ParseError(e.message, e.json_path) from e


# ==============================
#  SCALAR LITERALS
# ==============================
RATIONAL_RE = re.compile(r"^\s*([+-]?\d+(?:/\d+)?)\s*$")


def _rational(text: str, where: str) -> Fraction:
    m = RATIONAL_RE.match(text)
    if m is None:
        raise ParseError(f"malformed rational literal {text!r}", where)
    num, _, den = m.group(1).partition("/")
    if den and int(den) == 0:
        raise ParseError(f"zero denominator in {text!r}", where)
    return Fraction(int(num), int(den) if den else 1)


def _part(value: Any, where: str) -> Fraction:
    if isinstance(value, bool) or isinstance(value, float):
        raise ParseError(f"{value!r} is not an exact literal", where)
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return _rational(value, where)
    raise ParseError(f"unexpected {type(value).__name__} literal", where)


def parse_scalar(value: Any, where: str = "$") -> Scalar:
    """
    厳密なスカラーリテラルを読む

    integers, "p/q", "a+bi" strings and {"re": ..., "im": ...} objects are
    accepted; floats are rejected.
    """
    if isinstance(value, dict):
        if set(value) != {"re", "im"}:
            raise ParseError("complex literal needs exactly 're' and 'im'", where)
        return Scalar(_part(value["re"], f"{where}.re"), _part(value["im"], f"{where}.im"))
    if isinstance(value, str) and value.strip().endswith("i"):
        body = value.strip()[:-1].replace(" ", "")
        cut = max(body.rfind("+"), body.rfind("-"))
        re_text, im_text = (body[:cut], body[cut:]) if cut > 0 else ("", body)
        if im_text in ("", "+", "-"):
            im_text += "1"
        re_part = _rational(re_text, where) if re_text else Fraction(0)
        return Scalar(re_part, _rational(im_text, where))
    return Scalar(_part(value, where))


def format_scalar(s: Scalar) -> Any:
    """real -> "p/q" string, complex -> {"re", "im"}"""
    if s.is_real():
        return str(s.re)
    return {"re": str(s.re), "im": str(s.im)}


def parse_scalar_list(text: Optional[str], where: str = "--hints") -> list[Scalar]:
    """comma separated literals, e.g. "1, -1/2, 2+3i" """
    if text is None or not text.strip():
        return []
    return [parse_scalar(tok.strip(), f"{where}[{k}]") for k, tok in enumerate(text.split(","))]


# ==============================
#  FILES
# ==============================
PATH_STEP_RE = re.compile(r"\.([^.\[]+)|\[(\d+)\]")
_DECODER = json.JSONDecoder()


def _skip_ws(text: str, idx: int) -> int:
    while idx < len(text) and text[idx] in " \t\r\n":
        idx += 1
    return idx


def _find_member(text: str, idx: int, step) -> Optional[int]:
    """offset of the value named step inside the object or array opening at idx"""
    opening = text[idx]
    idx = _skip_ws(text, idx + 1)
    count = 0
    while idx < len(text) and text[idx] not in "}]":
        if opening == "{":
            key, idx = json.decoder.scanstring(text, idx + 1)
            idx = _skip_ws(text, _skip_ws(text, idx) + 1)
            if key == step:
                return idx
        elif count == step:
            return idx
        _, idx = _DECODER.raw_decode(text, idx)
        idx = _skip_ws(text, idx)
        if idx < len(text) and text[idx] == ",":
            idx = _skip_ws(text, idx + 1)
        count += 1
    return None


def json_position(text: str, where: str) -> tuple[int, int]:
    """
    1-based (line, column) of the value at the JSON path where, e.g. "$.gammas[0][1]".
    Stops at the deepest value that exists.
    """
    idx = _skip_ws(text, 0)
    for key, index in PATH_STEP_RE.findall(where[1:] if where.startswith("$") else ""):
        if idx >= len(text) or text[idx] not in ("{" if key else "["):
            break
        found = _find_member(text, idx, key if key else int(index))
        if found is None:
            break
        idx = found
    line = text.count("\n", 0, idx) + 1
    return line, idx - text.rfind("\n", 0, idx)


def load_json(path: str) -> Any:
    """
    Raises
    ------
    ParseError
        invalid JSON, with the line and column reported by the decoder
    """
    try:
        with open(path, encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON ({e.msg})", "$", e.lineno, e.colno, path) from e


def load_document(path: str, decode: Callable[[Any], Any]) -> Any:
    """
    load_json followed by decode; a ParseError raised while decoding gets
    the line and column of its JSON path in the file
    """
    js = load_json(path)
    try:
        return decode(js)
    except ParseError as e:
        with open(path, encoding="utf-8") as f:
            e.locate(path, f.read())
        raise


def dump_json(obj: Any, stream: TextIO):
    """2 space indent, fixed key order, newline terminated"""
    stream.write(json.dumps(obj, indent=2, ensure_ascii=False))
    stream.write("\n")


def decode_state(js: dict) -> TensorState:
    validate_json(js, "state.json")
    L, N, gammas = js["L"], js["N"], js["gammas"]
    if len(gammas) != L:
        raise ParseError(f"expected {L} slots, found {len(gammas)}", "$.gammas")
    mats = []
    for k, g in enumerate(gammas):
        if len(g) != N or any(len(row) != N for row in g):
            raise ParseError(f"slot {k} is not {N}x{N}", f"$.gammas[{k}]")
        mats.append(Matrix([[parse_scalar(v, f"$.gammas[{k}][{i}][{j}]") for j, v in enumerate(row)]
                            for i, row in enumerate(g)]))
    try:
        return TensorState(tuple(mats))
    except SloccError as e:
        raise ParseError(str(e), "$.gammas") from e


def encode_matrix(m: Matrix) -> list[list[Any]]:
    return [[format_scalar(v) for v in row] for row in m.tolist()]


def encode_state(psi: TensorState) -> dict:
    return {
        "L": psi.L,
        "N": psi.N,
        "gammas": [encode_matrix(g) for g in psi.gammas],
    }


def decode_canon(js: dict) -> CanonicalForm:
    validate_json(js, "canon.json")
    runs = []
    for k, block in enumerate(js["blocks"]):
        where = f"$.blocks[{k}]"
        coeffs = [parse_scalar(v, f"{where}.coeffs[{d}]") for d, v in enumerate(block["coeffs"])]
        try:
            f = TruncPoly.of(block["size"], coeffs)
        except OrderMismatch as e:
            raise ParseError(str(e), where) from e
        runs.append(Run(parse_scalar(block["lambda"], f"{where}.lambda"), PolyGrid.single(f)))
    for k, run in enumerate(js.get("runs", [])):
        where = f"$.runs[{k}]"
        sizes = tuple(run["sizes"])
        grid = run["grid"]
        if len(grid) != len(sizes) or any(len(row) != len(sizes) for row in grid):
            raise ParseError(f"grid must be {len(sizes)}x{len(sizes)}", f"{where}.grid")
        order = max(sizes)
        try:
            entries = tuple(
                tuple(TruncPoly.of(order, [parse_scalar(v, f"{where}.grid[{i}][{j}][{d}]")
                                           for d, v in enumerate(cell)])
                      for j, cell in enumerate(row))
                for i, row in enumerate(grid))
            runs.append(Run(parse_scalar(run["lambda"], f"{where}.lambda"), PolyGrid(sizes, entries)))
        except (OrderMismatch, PatternViolation) as e:
            raise ParseError(str(e), where) from e
    try:
        cf = CanonicalForm.merged(runs)
    except (PatternViolation, DimensionMismatch) as e:
        raise ParseError(str(e)) from e
    if cf.N != js["N"]:
        raise ParseError(f"block sizes sum to {cf.N}, not {js['N']}", "$.N")
    return cf


def encode_canon(cf: CanonicalForm) -> dict:
    blocks, runs = [], []
    for run in cf.runs:
        if run.grid.is_single():
            blocks.append({
                "lambda": format_scalar(run.lam),
                "size": run.sizes[0],
                "coeffs": [format_scalar(c) for c in run.coeffs()],
            })
        else:
            runs.append({
                "lambda": format_scalar(run.lam),
                "sizes": list(run.sizes),
                "grid": [[[format_scalar(c) for c in f.coeffs] for f in row] for row in run.grid.entries],
            })
    js = {"N": cf.N, "blocks": blocks}
    if runs:
        js["runs"] = runs
    return js
