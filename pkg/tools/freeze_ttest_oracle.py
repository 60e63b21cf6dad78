"""Freeze scipy two-sample t-test results into tests/fixtures/ttest_oracle.json."""

import json
from pathlib import Path

import numpy as np
from scipy import stats

OUT = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "ttest_oracle.json"


def main():
    rng = np.random.default_rng(20190701)
    cases = []
    for i in range(10):
        n1, n2 = int(rng.integers(3, 30)), int(rng.integers(3, 30))
        a = rng.normal(rng.uniform(-5, 5), rng.uniform(0.2, 4), n1).round(6)
        b = rng.normal(rng.uniform(-5, 5), rng.uniform(0.2, 4), n2).round(6)
        case = {"a": a.tolist(), "b": b.tolist()}
        for variant, equal in (("welch", False), ("pooled", True)):
            r = stats.ttest_ind(a, b, equal_var=equal)
            df = r.df if hasattr(r, "df") else None
            case[variant] = {"t": float(r.statistic), "p": float(r.pvalue), "df": None if df is None else float(df)}
        cases.append(case)
    OUT.write_text(json.dumps({"generator": "scipy.stats.ttest_ind", "scipy": __import__("scipy").__version__,
                               "cases": cases}, indent=1) + "\n")


if __name__ == "__main__":
    main()
