import pyslocc.config as cfg
from pyslocc.models.canon import (NotCommuting, TensorState, beta_canonical_check,
                                  canonicalize, commuting_pair_canonical,
                                  eigen_shift, full_rank_reduce,
                                  max_rank_combination, nonfull_rank_split,
                                  rank_order, reduce_to_pair)
from pyslocc.utils.helper import (decode_state, encode_matrix, encode_state,
                                  format_scalar, load_document)

from .app_handler import CommandHandler


class CanonicalizeHandler(CommandHandler):
    """状態ファイルの標準形を求める"""
    name = "canonicalize"

    async def run(self) -> int:
        psi = load_document(self.args.input, decode_state)
        hints = self.hints
        search = max_rank_combination(psi, seed=self.args.seed)
        self.report["max_rank"] = {
            "t": [format_scalar(v) for v in search.t],
            "rank": search.rank,
            "N": psi.N,
            "certified": search.certified,
            "samples": search.samples,
        }
        self.lines.append(
            f"max rank {search.rank}/{psi.N} at t=({', '.join(str(v) for v in search.t)})"
            + ("" if search.certified else f", best of {search.samples} samples"))
        if not search.certified:
            return self.split(psi)

        reduced = full_rank_reduce(psi, seed=self.args.seed)
        if self.args.shift:
            reduced = eigen_shift(reduced, hints)
        pair = reduce_to_pair(reduced)
        if self.args.shift:
            pair = rank_order(pair, hints)
        commuting = pair.gammas[1].commutator(pair.gammas[2]).is_zero()
        self.report["commuting"] = commuting
        self.lines.append(f"commuting: {'yes' if commuting else 'no'}")
        if not commuting:
            self.report["reduced"] = encode_state(pair)
            raise NotCommuting("[B1, B2] != 0 after reduction")
        cf, _ = commuting_pair_canonical(pair.gammas[1], pair.gammas[2], hints)
        self.record_form(cf)
        return cfg.EXIT_OK

    def split(self, psi: TensorState) -> int:
        pf = nonfull_rank_split(psi, seed=self.args.seed)
        ok = beta_canonical_check(pf, seed=self.args.seed)
        self.report["split"] = {
            "n": pf.n,
            "m": pf.m,
            "i": pf.i,
            "lambda_prime": encode_matrix(pf.lambda_prime),
            "beta": [encode_matrix(b) for b in pf.beta_part],
            "beta_condition": ok,
        }
        self.lines.append(f"split: n={pf.n} m={pf.m} i={pf.i}, beta rank condition "
                          + ("holds" if ok else "fails"))
        gamma = pf.gamma_state()
        if gamma is not None:
            cf, _ = canonicalize(gamma, self.hints, self.args.shift, self.args.seed)
            self.record_form(cf)
        return cfg.EXIT_OK
