"""Regenerate the model files under fixtures/ from the constructors in the library."""

from __future__ import annotations

import argparse
from fractions import Fraction
from pathlib import Path

from envctl.capacity import Capacity
from envctl.countable import parity_model, ultrafilter_model
from envctl.fixtures import binomial_surrogate, grid_2x2, vacuity
from envctl.modelfile import ExtraEntry, ModelFile, Query, serialize

THETAS = " | ".join(f"T{i}" for i in range(1, 10))


def documents() -> dict[str, ModelFile]:
    docs = {
        "grid_2x2": ModelFile("finite", finite=grid_2x2(), queries=(Query("H1", "E1", ("coherent",)),)),
        "vacuity": ModelFile("finite", finite=vacuity(), queries=(Query("H3", "E1", ("coherent",)),)),
        "contradiction": ModelFile(
            "finite",
            finite=grid_2x2(),
            assessments=(ExtraEntry("E1", "H1", Fraction(1, 4)), ExtraEntry("E1", "H1", Fraction(1, 2))),
        ),
        "ultrafilter": ModelFile(
            "countable", countable=ultrafilter_model(), queries=(Query("E1", "Bc", ("fully-dis", "fsc")),)
        ),
        "parity": ModelFile(
            "countable", countable=parity_model(), queries=(Query("E1", "Omega", ("sc", "fsc", "coherent")),)
        ),
        "capacity_additive": ModelFile(
            "capacity",
            capacity=Capacity.from_dict("abc", {"a": Fraction(1, 2), "b": Fraction(1, 3), "c": Fraction(1, 6),
                                                 ("a", "b"): Fraction(5, 6), ("a", "c"): Fraction(2, 3),
                                                 ("b", "c"): Fraction(1, 2)}),
            integrands=(("X", (Fraction(1), Fraction(0), Fraction(1, 2))),),
        ),
        "capacity_pair": ModelFile(
            "capacity",
            capacity=Capacity.from_dict("ab", {"a": Fraction(1, 5), "b": Fraction(3, 10)}),
            integrands=(("X", (Fraction(1), Fraction(0))),),
        ),
        "capacity_not2": ModelFile(
            "capacity", capacity=Capacity.from_dict("ab", {"a": Fraction(4, 5), "b": Fraction(4, 5)})
        ),
    }
    for n in (2, 3):
        kinds = ("coherent", "dis", "fully-dis")
        docs[f"binomial_n{n}"] = ModelFile(
            "finite", finite=binomial_surrogate(n), queries=(Query(f"X{n}", THETAS, kinds),)
        )
    return docs


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "fixtures")
    args = ap.parse_args()
    args.out.mkdir(exist_ok=True)
    for name, mf in documents().items():
        (args.out / f"{name}.yaml").write_text(serialize(mf), encoding="utf-8")
        print(args.out / f"{name}.yaml")


if __name__ == "__main__":
    main()
