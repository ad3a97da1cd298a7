"""Scenario files: validation, suite dispatch and artifact writing."""
from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional

from .errors import ConfigError
from .export import write_csv, write_json
from .fixtures import load_fixture, validate_fixture
from .suites import SUITES, SuiteConfig, SuiteReport, run_suite

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
_KEYS = {"suite", "fixture", "fixture2", "grid", "harmonics", "tol", "seed", "out", "name"}


@dataclass
class Scenario:
    name: str
    suites: List[str]
    fixture: str
    fixture2: Optional[str] = None
    grid: Optional[int] = None
    harmonics: int = 64
    tol: Optional[float] = None
    seed: int = 0
    out: str = "out"

    @property
    def config(self) -> SuiteConfig:
        return SuiteConfig(grid=self.grid, harmonics=self.harmonics, tol=self.tol, seed=self.seed)


def _line_of(text: str, key: str):
    for i, ln in enumerate(text.splitlines(), 1):
        if f'"{key}"' in ln:
            return i
    return None


def parse_scenario(doc: dict, text: str = "", base: Path = Path(".")) -> Scenario:
    if not isinstance(doc, dict):
        raise ConfigError("scenario must be a JSON object", line=1)
    for k in doc:
        if k not in _KEYS:
            raise ConfigError(f"unknown key {k!r}", field=k, line=_line_of(text, k))
    suite = doc.get("suite")
    if suite != "all" and suite not in SUITES:
        raise ConfigError(f"suite must be one of {', '.join(SUITES)} or all",
                          field="suite", line=_line_of(text, "suite"))
    if "fixture" not in doc:
        raise ConfigError("scenario needs 'fixture'", field="fixture")

    def typed(key, kind, default, positive=True):
        v = doc.get(key, default)
        if v is None:
            return v
        if not isinstance(v, kind) or isinstance(v, bool) or (positive and v <= 0) or v < 0:
            raise ConfigError(f"'{key}' must be a {'positive ' if positive else ''}"
                              f"{kind.__name__ if isinstance(kind, type) else 'number'}",
                              field=key, line=_line_of(text, key))
        return v

    grid = typed("grid", int, None)
    if grid is not None and grid < 8:
        raise ConfigError("'grid' must be at least 8", field="grid", line=_line_of(text, "grid"))

    def resolve(ref):
        if ref is None:
            return None
        p = base / ref
        return str(p) if p.exists() else str(ref)

    out = doc.get("out", "out")
    return Scenario(name=str(doc.get("name", suite)),
                    suites=list(SUITES) if suite == "all" else [suite],
                    fixture=resolve(doc["fixture"]), fixture2=resolve(doc.get("fixture2")),
                    grid=grid, harmonics=typed("harmonics", int, 64),
                    tol=typed("tol", (int, float), None), seed=typed("seed", int, 0, positive=False),
                    out=str(base / out))


def load_scenario(path) -> Scenario:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"scenario file not found: {path}", field="scenario")
    text = path.read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg}", line=exc.lineno) from None
    return parse_scenario(doc, text, path.parent)


def _fixtures(sc: Scenario):
    fxs = [load_fixture(sc.fixture)]
    if sc.fixture2:
        fxs.append(load_fixture(sc.fixture2))
    for f in fxs:
        validate_fixture(f)
    return fxs


def _run_one(args):
    name, refs, cfg = args
    fxs = [load_fixture(r) for r in refs]
    return run_suite(name, fxs, cfg)


def run_suites(names, fixtures, cfg: SuiteConfig, parallel: bool = False) -> List[SuiteReport]:
    if parallel and len(names) > 1:
        refs = [f.source_ref for f in fixtures] if all(hasattr(f, "source_ref") for f in fixtures) \
            else None
        if refs is not None:
            with ProcessPoolExecutor() as ex:
                return list(ex.map(_run_one, [(n, refs, cfg) for n in names]))
    return [run_suite(n, fixtures, cfg) for n in names]


def write_artifacts(reports: List[SuiteReport], outdir, plots: bool = True) -> dict:
    """report.json plus one CSV (and figure) per suite table."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    suites = []
    rows = []
    for rep in reports:
        files = []
        for tname, (header, trows) in rep.tables.items():
            files.append(write_csv(outdir / f"{rep.suite}_{tname}.csv", header, trows).name)
        if plots and rep.tables:
            from .plotting import plot_tables

            files += [p.name for p in plot_tables(rep.tables, outdir, prefix=f"{rep.suite}_")]
        suites.append({"suite": rep.suite, "fixtures": rep.fixtures, "passed": rep.passed,
                       "error": rep.error, "elapsed": round(rep.elapsed, 3), "rows": rep.rows(),
                       "artifacts": sorted(files)})
        rows += [dict(r, suite=rep.suite) for r in rep.rows()]
        if rep.error:
            rows.append({"suite": rep.suite, "name": "suite error", "status": "FAIL",
                         "worst_margin": "-inf", "tolerance": None, "detail": rep.error})
    doc = {"passed": all(r.passed for r in reports), "suites": suites, "rows": rows}
    write_json(outdir / "report.json", doc)
    return doc


def run_scenario(path, parallel: bool = False, plots: bool = True, overrides: dict = None):
    """Run a scenario file. Returns (exit code, report document or error message)."""
    try:
        sc = load_scenario(path)
        for k, v in (overrides or {}).items():
            if v is not None:
                setattr(sc, k, v)
        fxs = _fixtures(sc)
        for f, ref in zip(fxs, [sc.fixture, sc.fixture2]):
            f.source_ref = ref
    except ConfigError as exc:
        return EXIT_CONFIG, str(exc)
    reports = run_suites(sc.suites, fxs, sc.config, parallel)
    doc = write_artifacts(reports, sc.out, plots)
    doc["scenario"] = sc.name
    return (EXIT_PASS if doc["passed"] else EXIT_FAIL), doc
