import pyslocc.config as cfg
from pyslocc.models.symmetry import CANONICAL_ORDER, SymmetryParams, apply_all
from pyslocc.utils.helper import (ParseError, decode_canon, format_scalar,
                                  load_document, parse_scalar)

from .app_handler import CommandHandler


class SymmetryMapHandler(CommandHandler):
    """標準形にパラメータ付きの対称変換を施す"""
    name = "symmetry-map"

    def params(self) -> SymmetryParams:
        return SymmetryParams(*(parse_scalar(getattr(self.args, k), f"--{k}")
                                for k in ("z1", "z2", "z3", "d2", "d3")))

    async def run(self) -> int:
        cf = load_document(self.args.input, decode_canon)
        sp = self.params()
        order = tuple(self.args.order.split(",")) if self.args.order else CANONICAL_ORDER
        if any(tag not in CANONICAL_ORDER for tag in order):
            raise ParseError(f"stages must be among {','.join(CANONICAL_ORDER)}", "--order")
        self.report["params"] = {k: format_scalar(v) for k, v in sp.as_dict().items()}
        self.report["order"] = list(order)
        self.lines.append("params: " + " ".join(f"{k}={v}" for k, v in sp.as_dict().items()))
        self.record_form(apply_all(cf, sp, order))
        return cfg.EXIT_OK
