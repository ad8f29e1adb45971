#!/usr/bin/env python3
"""Survey every bundled reference system and recheck its recorded facts.

Prints one block per system: dimensions, delay profile, invariant zeros,
then the stored fact list with pass/fail. Exits nonzero if any fact fails,
so this doubles as a quick regression sweep after library changes.
"""

import argparse
import sys

import numpy as np

import delayfilter as df


def survey(example_id: str) -> bool:
    model, noise, _ = df.reference_example(example_id)
    profile = df.analyze_delays(model)
    print(f"== {example_id} ==")
    print(f"   n={model.n} p={model.p} l={model.l} m={model.m}")
    print(f"   minimal delay: {profile.minimal_delay}   "
          f"feasible: {list(profile.feasible_delays)}   "
          f"invertible: {list(profile.invertible_delays)}")

    report = df.invariant_zeros(model)
    if report.zeros:
        zs = ", ".join(f"{z:.6g}" for z in np.sort_complex(list(report.zeros)))
        print(f"   zeros: {zs}  ({report.classification})")
    else:
        print(f"   zeros: none  ({report.classification})")

    if profile.minimal_delay is not None:
        r = profile.minimal_delay
        try:
            if model.l == model.p:
                gain = df.square_gain(model, r)
            else:
                gain, _, _ = df.steady_state_gain(model, noise, r, max_iter=2000)
            rho = df.gain_spectral_radius(model, r, gain.L)
            verdict = df.classify_convergence(model, r, gain.L)
            print(f"   gain at r={r}: |L|={np.linalg.norm(gain.L):.4g}  "
                  f"rho={rho:.6g}  {verdict}")
        except df.DelayFilterError as exc:
            # some systems only admit a divergent gain; the covariance
            # recursion then blows through the singularity gate
            print(f"   gain at r={r}: {type(exc).__name__}: {exc}")

    ok = True
    for res in df.check_example_facts(example_id):
        mark = "ok  " if res.passed else "FAIL"
        print(f"   [{mark}] {res.name}: {res.detail}")
        ok = ok and res.passed
    print()
    return ok


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("ids", nargs="*", default=None,
                    help="subset of example ids (default: all)")
    args = ap.parse_args(argv)

    ids = args.ids or list(df.EXAMPLE_IDS)
    bad = [i for i in ids if i not in df.EXAMPLE_IDS]
    if bad:
        ap.error(f"unknown example ids {bad}; known: {list(df.EXAMPLE_IDS)}")

    all_ok = True
    for example_id in ids:
        all_ok = survey(example_id) and all_ok
    print("all facts hold" if all_ok else "SOME FACTS FAILED")
    return 0 if all_ok else 1


if __name__ == "__main__":
    sys.exit(main())
