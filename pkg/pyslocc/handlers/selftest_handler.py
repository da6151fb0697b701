import asyncio
from concurrent.futures import ProcessPoolExecutor

import pandas as pd

import pyslocc.config as cfg
from pyslocc.harness import (PASS, SUITES, BadProfile, run_trial,
                             write_jsonl)

from .app_handler import CommandHandler

RECORD_COLUMNS = ["suite", "seed", "index", "profile", "verdict", "detail", "redraws"]


def summarize(records: list[dict]) -> pd.DataFrame:
    """suiteごとのpass/fail/undecided数とredraw数"""
    df = pd.DataFrame.from_records(records, columns=RECORD_COLUMNS)
    for verdict in ("pass", "fail", "undecided"):
        df[verdict] = (df["verdict"] == verdict).astype(int)
    summary = df.groupby("suite", sort=False).agg(
        trials=("verdict", "size"),
        passed=("pass", "sum"),
        failed=("fail", "sum"),
        undecided=("undecided", "sum"),
        redraws=("redraws", "sum"),
    )
    return summary


class SelftestHandler(CommandHandler):
    """ハーネスの各スイートを実行する"""
    name = "selftest"

    def suites(self) -> list[str]:
        if not self.args.profile:
            return list(SUITES)
        names = [s.strip() for s in self.args.profile.split(",") if s.strip()]
        unknown = [s for s in names if s not in SUITES]
        if unknown or not names:
            raise BadProfile(f"unknown suite(s) {unknown}; choose from {', '.join(SUITES)}")
        return names

    def trial_count(self, name: str) -> int:
        return SUITES[name].trials if self.args.trials is None else self.args.trials

    async def run_trials(self, names: list[str]) -> list[dict]:
        seed = self.args.seed
        if self.args.jobs <= 1:
            return [run_trial(name, seed, k) for name in names for k in range(self.trial_count(name))]

        loop = asyncio.get_running_loop()
        records = []
        with ProcessPoolExecutor(max_workers=self.args.jobs) as pool:
            for name in names:
                futures = [loop.run_in_executor(pool, run_trial, name, seed, k)
                           for k in range(self.trial_count(name))]
                # gather keeps trial order whatever order they finish in
                records.extend(await asyncio.gather(*futures))
                self.logger.info(f"suite {name}: {len(futures)} trials done")
        return records

    async def run(self) -> int:
        names = self.suites()
        records = await self.run_trials(names)
        summary = summarize(records)

        if self.args.csv:
            pd.DataFrame.from_records(records, columns=RECORD_COLUMNS).to_csv(self.args.csv, index=False)
            self.logger.info(f"trial records written to {self.args.csv}")
        if self.args.records:
            with open(self.args.records, "w", encoding=cfg.PREFERRED_ENCODING) as f:
                write_jsonl(records, f)

        failures = [r for r in records if r["verdict"] != PASS]
        self.report["seed"] = self.args.seed
        self.report["suites"] = summary.reset_index().to_dict(orient="records")
        self.report["failures"] = failures
        self.lines.append(f"seed {self.args.seed}")
        self.lines.append(summary.to_string())
        for r in failures:
            self.lines.append(f"{r['suite']}#{r['index']} {r['verdict']} (seed {r['seed']}): {r['detail']}")
        self.lines.append("all suites pass" if not failures else f"{len(failures)} trial(s) did not pass")
        return cfg.EXIT_OK if not failures else cfg.EXIT_FAIL
