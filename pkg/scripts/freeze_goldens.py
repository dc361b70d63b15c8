"""Regenerate the frozen golden values under fixtures/golden/insights/.

The numbers are computed by the independent oracles in tests/oracles.py,
never by the package implementation itself.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))
import oracles  # noqa: E402


def main() -> None:
    rng = np.random.default_rng(20220301)
    ramp = np.arange(1.0, 13.0)
    step = np.where(np.arange(12) < 6, 1.0, 12.0).astype(float)
    noise50 = np.random.default_rng(42).normal(size=50)

    golden = {
        "outstanding_no1_sig_100_10_9_8_7_6":
            oracles.powerlaw_leader_significance([100, 10, 9, 8, 7, 6], 1),
        "outstanding_top2_sig_100_99_10_9_8_7":
            oracles.powerlaw_leader_significance([100, 99, 10, 9, 8, 7], 2),
        "attribution_sig_50_30_20": oracles.attribution_significance([50, 30, 20]),
        "evenness_sig_12_9_11_8": oracles.evenness_significance([12, 9, 11, 8]),
        "changepoint_sig_ramp_1_12": oracles.changepoint_significance(ramp),
        "changepoint_sig_step_6": oracles.changepoint_significance(step),
        "outlier_flags_lone_extreme": oracles.outlier_flags([1] * 7 + [100]),
        "outlier_flag_count_seeded_normal_50": len(oracles.outlier_flags(noise50)),
        "changepoint_k_seeded_example": oracles.changepoint_exhaustive(
            rng.normal(size=10) + np.where(np.arange(10) >= 6, 5.0, 0.0))[0],
    }
    target = Path(__file__).resolve().parent.parent / "fixtures" / "golden" / "insights"
    target.mkdir(parents=True, exist_ok=True)
    (target / "golden.json").write_text(json.dumps(golden, indent=2) + "\n",
                                        encoding="utf-8")
    print(json.dumps(golden, indent=2))


if __name__ == "__main__":
    main()
