import argparse
import sys
from typing import Any, Optional, TextIO

import pyslocc.config as cfg
from pyslocc.harness import BadProfile
from pyslocc.models.canon import (CanonicalForm, NoSplitFound, NotCommuting,
                                  TensorState, canonicalize, rank_profile)
from pyslocc.models.exactmat import NotInField, SloccError
from pyslocc.models.symmetry import DegenerateParameter, ZeroScale
from pyslocc.utils.helper import (ParseError, decode_canon, decode_state,
                                  dump_json, encode_canon, load_document,
                                  parse_scalar_list)
from pyslocc.utils.log import get_logger


class CommandHandler:
    """
    サブコマンドの基底クラス

    `run`は終了コードを返すか例外を送出する. 例外から終了コードへの変換は
    `execute`でのみ行う.
    """
    name = ""

    def __init__(self, args: argparse.Namespace, stdout: Optional[TextIO] = None) -> None:
        self.args = args
        self.stdout = stdout if stdout is not None else sys.stdout
        self.report: dict[str, Any] = {"command": self.name}
        self.lines: list[str] = []

    def prepare(self):
        self.logger = get_logger(self.__class__.__module__)
        self.logger.debug(f"{self.name} {vars(self.args)}")

    async def run(self) -> int:
        raise NotImplementedError

    async def execute(self) -> int:
        """
        コマンドを実行し, 終了コードを返す
        """
        self.prepare()
        try:
            code = await self.run()
        except (ParseError, BadProfile) as e:
            code = self.fail(cfg.EXIT_PARSE, "parse error", e)
        except NotInField as e:
            code = self.fail(cfg.EXIT_NOT_IN_FIELD, "eigenvalue outside the field", e)
        except NotCommuting as e:
            code = self.fail(cfg.EXIT_NOT_COMMUTING, "slots do not commute", e)
        except (DegenerateParameter, ZeroScale) as e:
            code = self.fail(cfg.EXIT_UNDECIDED, "degenerate parameter", e)
        except NoSplitFound as e:
            code = self.fail(cfg.EXIT_UNDECIDED, "no split found", e)
        except SloccError as e:
            code = self.fail(cfg.EXIT_FAIL, type(e).__name__, e)
        except Exception as e:
            self.logger.error(e, exc_info=True)
            code = self.fail(cfg.EXIT_FAIL, "internal error", e)
        else:
            self.emit()
        self.logger.info(f"{self.name} exits with {code}")
        return code

    def fail(self, code: int, kind: str, e: Exception) -> int:
        self.logger.error(f"{kind}: {e}")
        self.report["error"] = {"kind": kind, "message": str(e)}
        self.lines.append(f"error ({kind}): {e}")
        self.emit()
        return code

    def emit(self):
        """report to stdout: one JSON object with --json, text lines otherwise"""
        if getattr(self.args, "json", False):
            dump_json(self.report, self.stdout)
        else:
            for line in self.lines:
                self.stdout.write(line + "\n")

    # ==============================
    #  INPUTS
    # ==============================
    @property
    def hints(self):
        return parse_scalar_list(getattr(self.args, "hints", None))

    def load_form(self, path: str) -> CanonicalForm:
        """
        canonical file, or a state file that is canonicalized on the fly
        """
        form = load_document(path, lambda js: decode_state(js) if isinstance(js, dict) and "gammas" in js
                             else decode_canon(js))
        if isinstance(form, TensorState):
            cf, _ = canonicalize(form, self.hints, getattr(self.args, "shift", False), self.args.seed)
            self.logger.debug(f"{path}: canonicalized state to {cf}")
            return cf
        return form

    # ==============================
    #  OUTPUTS
    # ==============================
    def record_form(self, cf: CanonicalForm, key: str = "canonical"):
        profile = rank_profile(cf)
        self.report[key] = encode_canon(cf)
        self.report["jordan"] = [[str(lam), n] for lam, n in cf.spec.blocks]
        self.report["rank_profile"] = {"E": profile.e, "J": profile.j, "A": profile.a,
                                       "ordered": profile.ordered}
        self.lines.append(f"{key}: {cf}")
        self.lines.append("jordan: " + ", ".join(f"J_{n}({lam})" for lam, n in cf.spec.blocks))
        self.lines.append(f"rank profile: r(E)={profile.e} r(J)={profile.j} r(A)={profile.a}"
                          + (" (ordered)" if profile.ordered else ""))
        out = getattr(self.args, "out", None)
        if out:
            with open(out, "w", encoding=cfg.PREFERRED_ENCODING) as f:
                dump_json(encode_canon(cf), f)
            self.logger.info(f"canonical form written to {out}")
