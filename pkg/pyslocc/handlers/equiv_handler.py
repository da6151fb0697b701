import pyslocc.config as cfg
from pyslocc.models.symmetry import (EQUIVALENT, INEQUIVALENT, UNDECIDED,
                                     orbit_equivalent)
from pyslocc.utils.helper import format_scalar

from .app_handler import CommandHandler

EXIT_BY_VERDICT = {
    EQUIVALENT: cfg.EXIT_OK,
    INEQUIVALENT: cfg.EXIT_FAIL,
    UNDECIDED: cfg.EXIT_UNDECIDED,
}


class EquivHandler(CommandHandler):
    """
    2つの状態(または標準形)が同じ軌道に属するかを判定する

    Inequivalent means no element of the group generated by the three
    superpositions, rescaling and block permutations connects the forms.
    """
    name = "equiv"

    async def run(self) -> int:
        cf1 = self.load_form(self.args.a)
        cf2 = self.load_form(self.args.b)
        decision = orbit_equivalent(cf1, cf2, seed=self.args.seed)

        self.report["verdict"] = decision.verdict
        self.report["detail"] = decision.detail
        self.report["tried"] = decision.tried
        self.lines.append(decision.verdict.capitalize())
        if decision.detail:
            self.lines.append(f"detail: {decision.detail}")
        if decision.witness is not None:
            params = decision.witness.as_dict()
            self.report["witness"] = {k: format_scalar(v) for k, v in params.items()}
            self.report["matching"] = list(decision.matching) if decision.matching is not None else None
            self.lines.append("witness: " + " ".join(f"{k}={v}" for k, v in params.items()))
        return EXIT_BY_VERDICT[decision.verdict]
