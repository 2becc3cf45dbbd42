"""Regenerate the bundled toy lexicons and golden report.

Run after any change that intentionally alters scoring output:

    python scripts/make_fixtures.py
"""

from pathlib import Path

from stcons import lexicon
from stcons.cli import FIXTURE_GOLDEN, FIXTURE_LEX_ST, FIXTURE_LEX_TS, fixtures_dir, selfcheck_report

# fixed so regenerated lexicon files (and their checksums in the report) are stable
CREATED = "2020-01-01T00:00:00Z"


def main():
    fx = fixtures_dir()
    src, tgt = fx / "toy_bitext.en", fx / "toy_bitext.de"
    for bitext, direction, name in (
        (lexicon.Bitext.from_files(src, tgt, normalize_text=True), ("en", "de"), FIXTURE_LEX_ST),
        (lexicon.Bitext.from_files(tgt, src, normalize_text=True), ("de", "en"), FIXTURE_LEX_TS),
    ):
        lex = lexicon.train(bitext, iterations=10, direction=direction, created=CREATED)
        lexicon.save(lex, fx / name)
        print(f"{name}: {len(lex)} entries, floor {lex.floor_logprob:.4f}")
    Path(fx / FIXTURE_GOLDEN).write_text(selfcheck_report(), encoding="utf-8", newline="\n")
    print(f"{FIXTURE_GOLDEN} written")


if __name__ == "__main__":
    main()
