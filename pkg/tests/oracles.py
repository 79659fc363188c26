"""Independent reference implementations for checking the planners.

Everything here deliberately takes a different route from the package code:
stdlib ``Fraction.limit_denominator`` instead of the hand-rolled mediant
descent, exhaustive scans instead of analytic inversion, brute-force sweeps
instead of staged search.  Expected test values are computed from these, not
from the code under test.
"""

from __future__ import annotations

import math
from fractions import Fraction


def exact_plans(f_in, f_target, cons):
    """Brute force every exact plan in the searched family.

    Sweeps all integer feedback values with the VCO in window, taking the
    exact rational output divider for each; then all integer output
    dividers, keeping those whose exact fractional feedback survives a
    bounded-denominator (Farey) search unchanged.  Returns
    (f_vco, feedback, output) triples.
    """
    plans = []
    a = math.ceil(cons.vco_min / f_in)
    while f_in * a <= cons.vco_max:
        if cons.fb_int_min <= a <= cons.fb_int_max:
            f_vco = f_in * a
            out = f_vco / f_target
            if (out.denominator <= cons.max_denominator
                    and cons.ms_int_min <= out < cons.ms_int_max + 1):
                plans.append((f_vco, Fraction(a), out))
        a += 1
    o = math.ceil(cons.vco_min / f_target)
    while f_target * o <= cons.vco_max:
        if cons.ms_int_min <= o <= cons.ms_int_max:
            f_vco = f_target * o
            fb = f_vco / f_in
            if (fb.limit_denominator(cons.max_denominator) == fb
                    and cons.fb_int_min <= fb < cons.fb_int_max + 1):
                plans.append((f_vco, fb, Fraction(o)))
        o += 1
    return plans


def has_exact_plan(f_in, f_target, cons) -> bool:
    return bool(exact_plans(f_in, f_target, cons))


def assert_plan_valid(plan, cons):
    """Every invariant a plan must satisfy, recomputed from scratch."""
    assert cons.vco_min <= plan.f_vco <= cons.vco_max
    assert cons.fb_int_min <= plan.feedback.a <= cons.fb_int_max
    assert cons.ms_int_min <= plan.output.a <= cons.ms_int_max
    assert 1 <= plan.feedback.c <= cons.max_denominator
    assert 1 <= plan.output.c <= cons.max_denominator
    if plan.feedback.b:
        assert math.gcd(plan.feedback.b, plan.feedback.c) == 1
    if plan.output.b:
        assert math.gcd(plan.output.b, plan.output.c) == 1
    assert plan.f_vco == plan.f_in * plan.feedback.value
    assert plan.f_achieved == plan.f_vco / plan.output.value
    assert plan.rel_error == abs(plan.f_achieved - plan.f_target) / plan.f_target


def phase_steps(offset: Fraction, quantum: Fraction, limit: int = 127) -> int:
    """Exhaustive scan for the step count with minimal residual; ties go
    away from zero (the larger magnitude of the two nearest)."""
    return min(range(-limit, limit + 1),
               key=lambda s: (abs(offset - s * quantum), -abs(s)))


def supply_code(rail, v_target: Fraction) -> int:
    """Exhaustive 256-point argmin; ties to the lower code."""
    return min(range(rail.steps),
               key=lambda code: (abs(rail.predict(code) - v_target), code))


def band_targets(rng, count: int, cons) -> list[Fraction]:
    """Seeded pseudo-random targets across the band: integer-Hz values,
    small multiples of the reference, and large-denominator rationals."""
    lo, hi = int(cons.f_out_min), int(cons.f_out_max)
    rough_denominators = (999983, 1048573, 2**20 - 3, 10**6 + 3)
    targets = []
    while len(targets) < count:
        kind = len(targets) % 4
        if kind in (0, 1):
            targets.append(Fraction(rng.randint(lo, hi)))
        elif kind == 2:
            p, q = rng.randint(1, 64), rng.randint(1, 64)
            t = cons.f_in * p / q
            if cons.f_out_min <= t <= cons.f_out_max:
                targets.append(t)
        else:
            q = rng.choice(rough_denominators)
            targets.append(Fraction(rng.randint(lo * q, hi * q), q))
    return targets
