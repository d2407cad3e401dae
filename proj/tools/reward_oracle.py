# Copyright 2026 The Gascraft Authors
# SPDX-License-Identifier: Apache-2.0
"""Reference implementation of the training rewards.

Recomputes the reward and score values frozen in the C++ tests from first
principles. Run directly to print the canonical fixture table; exits nonzero
if any internal identity fails.
"""

import random
import sys

SUCCESS_BONUS = 200.0
FAILURE_BASE = -100.0
PER_ERROR = -10.0
MAX_COUNTED = 10
COMPILE_FAIL = -200.0
SCALE = 1500.0
DEPLOY_WEIGHT = 0.35
FUNCTION_WEIGHT = 0.65
DEPLOY_BUDGET = 1_200_000.0
FUNCTION_BUDGET = 90_000.0


def phase1(compile_ok: bool, distinct_errors: int) -> float:
    if compile_ok:
        return SUCCESS_BONUS
    counted = min(max(distinct_errors, 1), MAX_COUNTED)
    return FAILURE_BASE + counted * PER_ERROR


def budget_fractions(deploy_gas: float, functions: list[tuple[bool, float]]) -> tuple[float, float]:
    deploy_frac = min(max(deploy_gas / DEPLOY_BUDGET, 0.0), 1.0)
    charged = [gas if passed else FUNCTION_BUDGET for passed, gas in functions]
    func_avg = sum(charged) / len(charged) if charged else 0.0
    func_frac = min(max(func_avg / FUNCTION_BUDGET, 0.0), 1.0)
    return deploy_frac, func_frac


def phase2(compile_ok: bool, deploy_gas: float, functions: list[tuple[bool, float]]) -> float:
    if not compile_ok:
        return COMPILE_FAIL
    deploy_frac, func_frac = budget_fractions(deploy_gas, functions)
    return SCALE * (DEPLOY_WEIGHT * (1.0 - deploy_frac) + FUNCTION_WEIGHT * (1.0 - func_frac))


def normalized_score(compile_ok: bool, deploy_gas: float,
                     functions: list[tuple[bool, float]]) -> float:
    """Weighted budget-relative gas fraction; lower is better, compile success only."""
    if not compile_ok:
        raise ValueError("normalized gas score requires a compiling contract")
    deploy_frac, func_frac = budget_fractions(deploy_gas, functions)
    return DEPLOY_WEIGHT * deploy_frac + FUNCTION_WEIGHT * func_frac


def feedback(passed: bool, gas: float) -> tuple[float, float]:
    return (1.0 if passed else 0.0, 1.0 - min(max(gas / FUNCTION_BUDGET, 0.0), 1.0))


def main() -> int:
    rows = [
        ("phase1 compile ok", phase1(True, 0)),
        ("phase1 fail 0 errors", phase1(False, 0)),
        ("phase1 fail 1 error", phase1(False, 1)),
        ("phase1 fail 3 errors", phase1(False, 3)),
        ("phase1 fail 12 errors (capped)", phase1(False, 12)),
        ("phase2 compile fail", phase2(False, 0, [])),
        ("phase2 600k deploy, 45k/45k pass", phase2(True, 600_000, [(True, 45_000), (True, 45_000)])),
        ("phase2 600k deploy, 30k pass + fail", phase2(True, 600_000, [(True, 30_000), (False, 20_000)])),
        ("phase2 over budget everywhere", phase2(True, 2_400_000, [(True, 180_000)])),
        ("phase2 golden mini (537300, 56820, 65293)",
         phase2(True, 537_300, [(True, 56_820), (True, 65_293)])),
        ("score golden mini",
         normalized_score(True, 537_300, [(True, 56_820), (True, 65_293)])),
        ("score deploy 470765, single fn 38931",
         normalized_score(True, 470_765, [(True, 38_931)])),
        ("feedback efficiency 56820", feedback(True, 56_820)[1]),
        ("feedback efficiency 65293", feedback(True, 65_293)[1]),
    ]
    width = max(len(name) for name, _ in rows)
    for name, value in rows:
        print(f"{name:<{width}}  {value!r}")

    rng = random.Random(20260816)
    for _ in range(1000):
        deploy = rng.uniform(0, 2_500_000)
        fns = [(rng.random() < 0.8, rng.uniform(0, 200_000))
               for _ in range(rng.randint(1, 4))]
        r = phase2(True, deploy, fns)
        s = normalized_score(True, deploy, fns)
        if abs(s + r / SCALE - 1.0) > 1e-9:
            print(f"identity violated: score={s} reward={r}", file=sys.stderr)
            return 1
    print("identity score + phase2/scale == 1 held over 1000 random reports")
    return 0


if __name__ == "__main__":
    sys.exit(main())
