"""Compare every closed-form envelope with the LP oracle on random instances.

Instances up to ``--exhaustive`` atoms are swept over all queries; larger ones over a random sample.
Coarse prior blocks are drawn too, so the non-unique-joint branches get exercised.
"""

from __future__ import annotations

import argparse
import random
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from strategies import random_grouped_instance  # noqa: E402

from envctl.algebra import Event  # noqa: E402
from envctl.coherence import ExtensionOracle, assessment_from_prior_strategy  # noqa: E402
from envctl.envelopes import NotIntegrable, conditional_envelope, dis_extension_envelope, fully_dis_envelope  # noqa: E402


def queries(sp, rng, sample, exhaustive):
    if sp.n_atoms <= exhaustive and not sample:
        for km in range(1, sp.full_mask + 1):
            for fm in range(sp.full_mask + 1):
                yield Event(sp, fm), Event(sp, km)
        return
    for _ in range(sample or 200):
        yield Event(sp, rng.randrange(sp.full_mask + 1)), Event(sp, rng.randrange(1, sp.full_mask + 1))


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--count", type=int, default=20)
    ap.add_argument("--rows", type=int, default=4)
    ap.add_argument("--cols", type=int, default=3)
    ap.add_argument("--exhaustive", type=int, default=6, help="largest atom count swept over every query")
    ap.add_argument("--sample", type=int, default=0, help="random queries per instance (0: all when small)")
    args = ap.parse_args()
    rng = random.Random(args.seed)
    t0 = time.perf_counter()
    total = mismatches = nesting = skipped = 0
    for _ in range(args.count):
        inst = random_grouped_instance(rng, rng.randint(1, args.rows), rng.randint(1, args.cols))
        orc = ExtensionOracle(assessment_from_prior_strategy(inst.prior, inst.sigma))
        for F, K in queries(inst.space, rng, args.sample, args.exhaustive):
            total += 1
            c = conditional_envelope(inst.prior, inst.sigma, F, K)
            mismatches += c.interval != orc.interval(F, K)
            envs = [c]
            for fn in (dis_extension_envelope, fully_dis_envelope):
                try:
                    envs.append(fn(inst.prior, inst.sigma, F, K))
                except NotIntegrable:
                    skipped += 1
                    break
            nesting += any(not inner.within(outer) for outer, inner in zip(envs, envs[1:]))
    dt = time.perf_counter() - t0
    print(f"{total} queries: {mismatches} oracle mismatches, {nesting} nesting failures, "
          f"{skipped} dis/fd envelopes undefined (not integrable); {dt:.1f}s")
    sys.exit(1 if mismatches or nesting else 0)


if __name__ == "__main__":
    main()
