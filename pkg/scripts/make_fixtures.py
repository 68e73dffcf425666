"""Regenerate the scenario documents bundled under src/epsm/data/scenarios."""
from dataclasses import replace
from pathlib import Path

from epsm import synth
from epsm.scenario import dump_scenario

OUT = Path(__file__).resolve().parents[1] / "src" / "epsm" / "data" / "scenarios"


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    urban = replace(synth.random_corpus(1, seed=11)[0], id="urban")
    corpus = [synth.crossing_scenario(), synth.perfect_scenario(), urban]
    for sc in corpus:
        dump_scenario(sc, OUT / f"{sc.id}.json")
    for name, sc in synth.tree_case_scenarios().items():
        dump_scenario(sc, OUT / f"tree_{name}.json")
    for p in sorted(OUT.glob("*.json")):
        print(p.relative_to(OUT.parents[3]))


if __name__ == "__main__":
    main()
