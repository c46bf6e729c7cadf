"""Regenerate the shipped scenario fixtures from the tables in greenconstraints.scenarios."""

from pathlib import Path

from greenconstraints.scenarios import SPECS, write_fixture

ROOT = Path(__file__).resolve().parent.parent / "src" / "greenconstraints" / "fixtures"

if __name__ == "__main__":
    for name, spec in SPECS.items():
        print(write_fixture(spec, ROOT / name))
