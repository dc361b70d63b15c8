"""Benchmark harness: a provider's raw insight-task accuracy vs the native oracle.

Instances are generated deterministically per seed; ground truth always comes
from the native insight functions, never from the provider under test. The
bundled :class:`OracleProvider` answers trials with those same functions
(optionally corrupted at a fixed error rate) so the harness can validate
itself offline.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from insightloop.errors import IoError, ProviderError, UnsupportedTask
from insightloop.insights import change_point, seasonality, trend
from insightloop.provider import PromptDoc, build_prompt, parse_braced_answers
from insightloop.tabular import Series

SUPPORTED_TASKS = ("outstanding_no1", "outstanding_top2", "outstanding_last",
                   "trend", "change_point", "seasonality")

DEFAULT_ROW_COUNTS = (20, 50, 80, 100, 120, 150, 180, 200)

_TASK_MINIMUM = {"outstanding_no1": 5, "outstanding_top2": 6, "outstanding_last": 5,
                 "trend": 4, "change_point": 6, "seasonality": 12}


@dataclass(frozen=True)
class BenchConfig:
    tasks: tuple[str, ...] = SUPPORTED_TASKS
    row_counts: tuple[int, ...] = DEFAULT_ROW_COUNTS
    trials: int = 50
    seed: int = 0
    provider_id: str = "mock"
    value_range: tuple[int, int] = (1, 1000)

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.row_counts or any(n <= 0 for n in self.row_counts):
            raise ValueError("row counts must be positive")
        if list(self.row_counts) != sorted(self.row_counts):
            raise ValueError("row counts must be ascending")

    def to_payload(self) -> dict:
        return {"tasks": list(self.tasks), "rowCounts": list(self.row_counts),
                "trials": self.trials, "seed": self.seed,
                "provider": self.provider_id,
                "valueRange": list(self.value_range)}


@dataclass
class BenchInstance:
    task: str
    n: int
    trial_seed: int
    values: list[float]
    rows: list[tuple[str, int, int]] | None   # (category, individual_index, value)
    ground_truth: object


@dataclass
class TrialRecord:
    seed: int
    expected: object
    answered: object
    correct: bool
    unparseable: bool = False
    transport_failed: bool = False

    def to_payload(self) -> dict:
        return {"seed": self.seed, "expected": self.expected,
                "answered": self.answered, "correct": self.correct,
                "unparseable": self.unparseable,
                "transportFailed": self.transport_failed}


@dataclass
class CellResult:
    task: str
    row_count: int
    trials: int
    correct_count: int
    per_trial: list[TrialRecord] = field(default_factory=list)

    def to_payload(self) -> dict:
        return {"task": self.task, "rowCount": self.row_count, "trials": self.trials,
                "correctCount": self.correct_count,
                "perTrial": [t.to_payload() for t in self.per_trial]}


@dataclass
class BenchResult:
    config: BenchConfig
    cells: list[CellResult]

    def cell(self, task: str, row_count: int) -> CellResult:
        for c in self.cells:
            if c.task == task and c.row_count == row_count:
                return c
        raise KeyError((task, row_count))

    def to_payload(self) -> dict:
        return {"config": self.config.to_payload(),
                "cells": [c.to_payload() for c in self.cells]}


# --- instance generation -------------------------------------------------------------

def _trial_seed(config_seed: int, task: str, n: int, trial: int) -> int:
    ss = np.random.SeedSequence([config_seed, _task_index(task), n, trial])
    return int(ss.generate_state(1)[0])


def _task_index(task: str) -> int:
    try:
        return SUPPORTED_TASKS.index(task)
    except ValueError:
        raise UnsupportedTask(f"no benchmark task {task!r}") from None


def gen_instance(task: str, n: int, seed: int,
                 value_range: tuple[int, int] = (1, 1000)) -> BenchInstance:
    """Deterministic task instance; ground truth is computed by the native oracle."""
    if task not in SUPPORTED_TASKS:
        raise UnsupportedTask(f"no benchmark task {task!r}")
    if n < _TASK_MINIMUM[task]:
        raise UnsupportedTask(f"{task} needs at least {_TASK_MINIMUM[task]} rows")
    rng = np.random.default_rng(seed)
    lo, hi = value_range

    if task.startswith("outstanding"):
        values = rng.integers(lo, hi + 1, size=n)
        categories = rng.integers(1, 4, size=n)
        rows = [(f"category{int(c)}", i, int(v))
                for i, (c, v) in enumerate(zip(categories, values))]
        desc_sorted = np.sort(values)[::-1]
        if task == "outstanding_no1":
            truth: object = int(desc_sorted[0])
        elif task == "outstanding_top2":
            truth = [int(desc_sorted[0]), int(desc_sorted[1])]
        else:
            truth = int(np.sort(values)[0])
        return BenchInstance(task, n, seed, [float(v) for v in values], rows, truth)

    if task == "trend":
        slope = float(rng.uniform(-1.0, 1.0))
        walk = np.cumsum(rng.normal(0.0, 1.0, size=n)) * 2.0
        values = walk + slope * np.arange(n)
        truth = trend(Series("value", values)).parameters["direction"]
        return BenchInstance(task, n, seed, [float(v) for v in values], None, truth)

    if task == "change_point":
        k0 = int(rng.integers(2, n - 1))
        shift = float(rng.uniform(4.0, 8.0)) * (1.0 if rng.random() < 0.5 else -1.0)
        values = rng.normal(0.0, 1.0, size=n)
        values[k0:] += shift
        truth = change_point(Series("value", values)).parameters["index"]
        return BenchInstance(task, n, seed, [float(v) for v in values], None, truth)

    # seasonality
    period = int(rng.integers(4, max(5, n // 3) + 1))
    amp = float(rng.uniform(3.0, 6.0))
    t = np.arange(n)
    values = amp * np.sin(2.0 * np.pi * t / period) + rng.normal(0.0, 0.5, size=n)
    truth = seasonality(Series("value", values)).parameters["period"]
    return BenchInstance(task, n, seed, [float(v) for v in values], None, truth)


_QUESTIONS = {
    "outstanding_no1":
        "What is the outstanding No.1 value for an individual? Use {} to include "
        "the result. For example, if the No.1 value is 970, please output {970} "
        "at the end.",
    "outstanding_top2":
        "What are the outstanding top 2 values for individuals? Use {} to include "
        "each result, largest first, like {970}, {910}.",
    "outstanding_last":
        "What is the outstanding last value for an individual? Use {} to include "
        "the result.",
    "trend":
        "What is the trend of the data in the time series over time? Use {} to "
        "include 1 for increased, -1 for decreased, or 0 for no distinct trend.",
    "change_point":
        "At which position does the level of the time series change? Use {} to "
        "include the 0-based index of the first point after the change.",
    "seasonality":
        "What is the period of the repeating pattern in the time series? Use {} "
        "to include the period as an integer number of steps.",
}


def build_trial_prompt(instance: BenchInstance) -> PromptDoc:
    """Benchmark prompt: data block, task question, brace-format instruction."""
    if instance.rows is not None:
        table_lines = ["category,individual_index,value"]
        table_lines += [f'"{c}",{i},{v}' for c, i, v in instance.rows]
        intro = ("I have a table that shows the values for each individual, each "
                 "belonging to one category, for a total of three categories.")
        data_block = "\n".join(table_lines)
    else:
        intro = "I have a time series sampled at equal intervals."
        data_block = ", ".join(f"{v:.4f}" for v in instance.values)
    question = _QUESTIONS[instance.task]
    return build_prompt(
        "open_question",
        question=question,
        state={"intro": intro, "data": data_block},
        bench_task=instance.task,
        values=list(instance.values),
        trial_seed=instance.trial_seed,
        format_requirements="Use {} to include the result.",
    )


class OracleProvider:
    """Answers benchmark prompts with the native statistics.

    ``error_rate`` > 0 corrupts answers deterministically (seeded per trial)
    into guaranteed-wrong values, which gives an exact Binomial(trials,
    1 - error_rate) distribution of correct counts per cell.
    """

    def __init__(self, error_rate: float = 0.0, seed: int = 0):
        if not 0.0 <= error_rate <= 1.0:
            raise ValueError("error rate must be in [0, 1]")
        self.error_rate = error_rate
        self.seed = seed

    def complete(self, prompt: PromptDoc, *, max_tokens: int = 1024,
                 timeout_ms: int = 30_000) -> str:
        payload = prompt.payload
        task = payload.get("bench_task")
        if task not in SUPPORTED_TASKS:
            raise ProviderError(f"oracle provider cannot answer task {task!r}")
        values = np.asarray(payload.get("values", []), dtype=np.float64)
        answer = self._answer(task, values)
        if self.error_rate > 0.0:
            rng = np.random.default_rng([self.seed, payload.get("trial_seed", 0)])
            if rng.random() < self.error_rate:
                answer = _corrupt(task, answer)
        if isinstance(answer, list):
            return "The outstanding top 2 values are " + ", ".join(
                "{" + str(v) + "}" for v in answer) + "."
        return f"The answer is {{{answer}}}."

    @staticmethod
    def _answer(task: str, values: np.ndarray):
        if task == "outstanding_no1":
            return int(np.sort(values)[::-1][0])
        if task == "outstanding_top2":
            desc = np.sort(values)[::-1]
            return [int(desc[0]), int(desc[1])]
        if task == "outstanding_last":
            return int(np.sort(values)[0])
        if task == "trend":
            return trend(Series("value", values)).parameters["direction"]
        if task == "change_point":
            return change_point(Series("value", values)).parameters["index"]
        return seasonality(Series("value", values)).parameters["period"]


def _corrupt(task: str, answer):
    """A deliberately wrong answer of the right shape."""
    if task == "outstanding_top2":
        return [answer[0], answer[1] - 4]  # right leader, wrong runner-up
    if task == "trend":
        return {1: 0, 0: -1, -1: 1}[answer]
    return answer + 1


# --- trials and the suite ---------------------------------------------------------------

def run_trial(provider, task: str, instance: BenchInstance) -> TrialRecord:
    """One prompt round-trip, judged against the instance's ground truth."""
    prompt = build_trial_prompt(instance)
    try:
        reply = provider.complete(prompt)
    except ProviderError:
        return TrialRecord(instance.trial_seed, instance.ground_truth, None,
                           correct=False, transport_failed=True)
    answers = parse_braced_answers(reply)
    truth = instance.ground_truth
    if not answers:
        return TrialRecord(instance.trial_seed, truth, None, correct=False,
                           unparseable=True)
    if isinstance(truth, list):
        answered = answers[: len(truth)]
        correct = len(answered) == len(truth) and all(
            _num_eq(a, e) for a, e in zip(answered, truth))
    else:
        answered = answers[0]
        correct = _num_eq(answered, truth)
    return TrialRecord(instance.trial_seed, truth, answered, correct=correct)


def _num_eq(a, b) -> bool:
    if isinstance(a, (int, float)) and isinstance(b, (int, float)):
        return float(a) == float(b)
    return a == b


def run_suite(config: BenchConfig, provider, out_dir=None,
              resume: bool = True) -> BenchResult:
    """The full (task x rowCount) grid; resumable via per-cell files."""
    cells: list[CellResult] = []
    cell_dir = None
    if out_dir is not None:
        cell_dir = Path(out_dir) / "cells"
        cell_dir.mkdir(parents=True, exist_ok=True)
    for task in config.tasks:
        for n in config.row_counts:
            cache = None
            if cell_dir is not None:
                cache = cell_dir / f"{task}_{n}.json"
                if resume and cache.exists():
                    doc = json.loads(cache.read_text(encoding="utf-8"))
                    cells.append(CellResult(
                        doc["task"], doc["rowCount"], doc["trials"],
                        doc["correctCount"],
                        [TrialRecord(t["seed"], t["expected"], t["answered"],
                                     t["correct"], t["unparseable"],
                                     t["transportFailed"])
                         for t in doc["perTrial"]]))
                    continue
            records = []
            for trial in range(config.trials):
                seed = _trial_seed(config.seed, task, n, trial)
                instance = gen_instance(task, n, seed, config.value_range)
                records.append(run_trial(provider, task, instance))
            usable = [r for r in records if not r.transport_failed]
            cell = CellResult(task, n, len(usable),
                              sum(1 for r in usable if r.correct), records)
            cells.append(cell)
            if cache is not None:
                cache.write_text(json.dumps(cell.to_payload(), indent=2),
                                 encoding="utf-8")
    return BenchResult(config, cells)


def emit_results(result: BenchResult, out_dir) -> tuple[Path, Path]:
    """results.csv (one row per cell) plus plot_data.json (accuracy vs rows)."""
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["task", "rowCount", "correctCount", "trials"])
        for cell in result.cells:
            writer.writerow([cell.task, cell.row_count, cell.correct_count,
                             cell.trials])
        csv_path = out_dir / "results.csv"
        csv_path.write_text(buffer.getvalue(), encoding="utf-8")

        plot: dict = {"rows": list(result.config.row_counts), "tasks": {}}
        for cell in result.cells:
            entry = plot["tasks"].setdefault(cell.task, {"correct": [], "trials": []})
            entry["correct"].append(cell.correct_count)
            entry["trials"].append(cell.trials)
        json_path = out_dir / "plot_data.json"
        json_path.write_text(json.dumps(plot, indent=2, sort_keys=True),
                             encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write benchmark results: {exc}") from exc
    return csv_path, json_path
