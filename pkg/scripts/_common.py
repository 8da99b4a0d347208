import json
from pathlib import Path

from learnlab.cli import dumps, plot_data


def write_results(docs, outdir: str, stem: str) -> None:
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    for i, d in enumerate(docs):
        (out / f"{stem}-{i:03d}.json").write_text(dumps(d))
    (out / f"{stem}.csv").write_text(plot_data(docs))
    print((out / f"{stem}.csv").read_text(), end="")


def result(est, n, series, **extra) -> dict:
    return dict(est.to_dict(), config={"n": n, "options": {"series": series, **extra}})
