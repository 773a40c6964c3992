"""Command line entry point.

    zdecode sweep CONFIG [--set key=value ...] [--seed N] [--workers N]
    zdecode decode CONFIG ...
    zdecode ensemble-opt CONFIG ...
    zdecode ci-analysis CONFIG ...
    zdecode wl CONFIG ...
    zdecode oracle --check fkt|estimators|matching [--seed N] [--cases N]

Each run writes ``<name>.csv`` and ``<name>.manifest.json`` (plus
``<name>.svg`` with ``svg: true``) into ``output_dir``. A manifest can be
given back as CONFIG to repeat the run; CSV output is then byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import importlib.metadata
import io
import json
import logging
import math
import os
import platform
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import config as cfgmod
from . import noise, stats, svg
from .codes import build_code, label_index, logical_effect
from .estimators import ESTIMATORS, SweepConfig, estimator_samples, run_sweep, worker_count
from .matching import decode_trial
from .noise import sample_error, sample_rates, substream, uniform_rates
from .pfaffian import class_log_partitions
from .statmech import build_rbim, class_flipped_instance, temperature
from .wanglandau import density_of_states, ground_state, partition_from_dos

log = logging.getLogger("zdecode")

COLUMNS = ("code", "distance", "p_mean", "p_sigma", "temperature_mode", "precision_bits", "estimator",
           "n_samples", "value", "ci_low", "ci_high", "ci_method", "seed")
CI_COLUMNS = ("code", "distance", "p_mean", "p_sigma", "temperature_mode", "precision_bits", "estimator",
              "reference_estimator", "ci_method", "fraction", "width", "reference_width",
              "crossing_fraction", "n_samples", "seed")
COUNTING = {"maxz_counting", "probz_counting"}
PAIRS = (("decoding_ratio", "maxz_counting"), ("order_ratio", "probz_counting"))


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _csv_text(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in columns])
    return buf.getvalue()


def _target(t):
    return 1.0 if t == "nishimori" else t


def temperature_mode(t) -> str:
    t = _target(t)
    if t == "zero":
        return "zero"
    return "nishimori" if float(t) == 1.0 else f"{float(t):g}*nishimori"


def _precision(sc: SweepConfig, t, n_qubits: int) -> int:
    t = _target(t)
    if t == "zero":
        return 0
    T = temperature(uniform_rates(sc.p, n_qubits), float(t))
    return sc.precision_for(t, T)


def _n_qubits(code: str, d: int) -> int:
    return build_code(code, d).n_qubits


def _sweep_config(c: dict, d: int, p: float, targets) -> SweepConfig:
    wl = c.get("wl", cfgmod.WL_DEFAULTS)
    return SweepConfig(c["code"], d, p, c["sigma_p"], tuple(_target(t) for t in targets), c["n_samples"],
                       c["seed"], dict(c.get("precision", {})), wl["alpha"], wl["ln_f_stop"], wl["sweeps"])


def _ci_row(base: dict, estimator: str, x: np.ndarray, method: str, rng, c: dict) -> dict:
    ci = stats.ci_for(x, method, rng, c["n_resamples"], c["level"])
    return {**base, "estimator": estimator, "n_samples": len(x), "value": float(x.mean()),
            "ci_low": ci.lower, "ci_high": ci.upper, "ci_method": method}


def run_sweep_command(c: dict, workers: int) -> tuple:
    rows = []
    for d in c["distances"]:
        nq = _n_qubits(c["code"], d)
        for p in c["p"]:
            sc = _sweep_config(c, d, p, c["temperatures"])
            log.info("sweep d=%d p=%g (%d samples)", d, p, sc.n_samples)
            records = run_sweep(sc, workers)
            for t in c["temperatures"]:
                key = _key(t)
                base = {"code": c["code"], "distance": d, "p_mean": p, "p_sigma": c["sigma_p"],
                        "temperature_mode": temperature_mode(t),
                        "precision_bits": _precision(sc, t, nq), "seed": c["seed"]}
                for est in c["estimators"]:
                    x = estimator_samples(records[key], est)
                    for m in c["ci_methods"]:
                        if m == "jeffreys" and est not in COUNTING:
                            continue
                        rng = substream(c["seed"], len(rows), noise.STREAM_MISC)
                        rows.append(_ci_row(base, est, x, m, rng, c))
    return COLUMNS, rows, {}


def _key(t) -> str:
    from .estimators import _target_key

    return _target_key(_target(t))


def _trial(args):
    code, d, p, sigma_p, seed, index, sigmas, n_ensemble, mode = args
    return decode_trial(build_code(code, d), p, sigma_p, seed, index, sigmas, n_ensemble, mode)


def _map(fn, jobs, workers: int):
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, jobs, chunksize=max(1, len(jobs) // (8 * workers))))
    return [fn(j) for j in jobs]


def _decode_rows(c: dict, sigmas, workers: int, mode: str = "weights") -> list:
    rows = []
    for d in c["distances"]:
        for p in c["p"]:
            log.info("decode %s d=%d p=%g (%d samples)", c["code"], d, p, c["n_samples"])
            jobs = [(c["code"], d, p, c["sigma_p"], c["seed"], i, tuple(sigmas), c["n_ensemble"], mode)
                    for i in range(c["n_samples"])]
            trials = _map(_trial, jobs, workers)
            base = {"code": c["code"], "distance": d, "p_mean": p, "p_sigma": c["sigma_p"],
                    "temperature_mode": "none", "precision_bits": 0, "seed": c["seed"]}
            series = [("mwpm_counting", np.array([t.mwpm_success for t in trials], dtype=float))]
            for k, s in enumerate(sigmas):
                series.append((f"ensemble_counting(sigma={s:g})",
                               np.array([t.ensemble_success[k] for t in trials], dtype=float)))
            for est, x in series:
                for m in c["ci_methods"]:
                    rng = substream(c["seed"], len(rows), noise.STREAM_MISC)
                    rows.append(_ci_row(base, est, x, m, rng, c))
    return rows


def run_decode_command(c: dict, workers: int) -> tuple:
    return COLUMNS, _decode_rows(c, c["ensemble_sigma"], workers, c["mode"]), {}


def run_ensemble_opt_command(c: dict, workers: int) -> tuple:
    c = {**c, "ci_methods": ["jeffreys"]}
    rows = _decode_rows(c, c["sigmas"], workers)
    score = {}
    for r in rows:
        if r["estimator"].startswith("ensemble"):
            score.setdefault(r["estimator"], []).append(r["value"])
    best = max(score, key=lambda k: (float(np.mean(score[k])), -c["sigmas"][list(score).index(k)]))
    optimum = c["sigmas"][list(score).index(best)]
    log.info("optimum ensemble sigma: %g", optimum)
    return COLUMNS, rows, {"optimum_sigma": optimum,
                           "mean_success": {k: float(np.mean(v)) for k, v in score.items()}}


def run_ci_analysis_command(c: dict, workers: int) -> tuple:
    sc = _sweep_config(c, c["distance"], c["p"], [c["temperature"]])
    records = run_sweep(sc, workers)[_key(c["temperature"])]
    nq = _n_qubits(c["code"], c["distance"])
    base = {"code": c["code"], "distance": c["distance"], "p_mean": c["p"], "p_sigma": c["sigma_p"],
            "temperature_mode": temperature_mode(c["temperature"]),
            "precision_bits": _precision(sc, c["temperature"], nq), "n_samples": len(records),
            "seed": c["seed"]}
    rows, summary = [], {}
    for k, (ratio, counting) in enumerate(PAIRS):
        x = estimator_samples(records, ratio)
        y = estimator_samples(records, counting)
        curve = stats.ci_width_vs_fraction(
            x, c["fractions"], "bootstrap", substream(c["seed"], 2 * k, noise.STREAM_MISC),
            reference_samples=y, reference_method=c["reference_method"],
            n_resamples=c["n_resamples"], level=c["level"])
        own = stats.ci_width_vs_fraction(
            y, c["fractions"], c["reference_method"], substream(c["seed"], 2 * k + 1, noise.STREAM_MISC),
            n_resamples=c["n_resamples"], level=c["level"])
        summary[ratio] = curve.crossing
        for f, w in zip(curve.fractions, curve.widths):
            rows.append({**base, "estimator": ratio, "reference_estimator": counting, "ci_method": "bootstrap",
                         "fraction": f, "width": w, "reference_width": curve.reference_width,
                         "crossing_fraction": curve.crossing})
        for f, w in zip(own.fractions, own.widths):
            rows.append({**base, "estimator": counting, "reference_estimator": counting,
                         "ci_method": c["reference_method"], "fraction": f, "width": w,
                         "reference_width": curve.reference_width, "crossing_fraction": None})
        log.info("%s reaches the full-sample %s CI width at fraction %s", ratio, counting, curve.crossing)
    return CI_COLUMNS, rows, {"crossing_fraction": summary}


def run_wl_command(c: dict, workers: int) -> tuple:
    code = build_code(c["code"], c["distance"])
    i = c["sample"]
    rates = sample_rates(c["p"], c["sigma_p"], code.n_qubits, substream(c["seed"], i, noise.STREAM_RATES))
    e = sample_error(rates, substream(c["seed"], i, noise.STREAM_ERROR))
    own = label_index(logical_effect(code, e))
    inst = build_rbim(code, rates, e)
    tn = temperature(rates, "nishimori")
    fkt = class_log_partitions(code, rates, e, tn)
    rows, summary = [], {"true_class": own, "classes": []}
    for a in range(code.n_classes):
        ci = class_flipped_instance(inst, code.logical_reps[a ^ own])
        dos = density_of_states(ci, substream(c["seed"], i, 100 + a), c["wl"]["alpha"],
                                c["wl"]["ln_f_stop"], c["wl"]["sweeps"])
        emin, lg = ground_state(dos)
        lz = float(partition_from_dos(dos, tn.resolved_T, -float(ci.offsets.sum())).value) - math.log(2)
        summary["classes"].append({"class": a, "E_min": emin, "log_g_min": lg,
                                   "n_max": max(1, int(round(math.exp(lg) / 2))),
                                   "logz_nishimori_wl": lz, "logz_nishimori_fkt": float(fkt[a])})
        for E, g in zip(dos.spectrum.bins, dos.log_g):
            rows.append({"class": a, "energy": float(E), "log_g": float(g)})
    return ("class", "energy", "log_g"), rows, summary


COMMANDS = {
    "sweep": run_sweep_command,
    "decode": run_decode_command,
    "ensemble-opt": run_ensemble_opt_command,
    "ci-analysis": run_ci_analysis_command,
    "wl": run_wl_command,
}


def _versions() -> dict:
    out = {"python": platform.python_version()}
    for pkg in ("zdecode", "numpy", "scipy", "gmpy2", "networkx", "numba", "scikit-learn", "jsonschema"):
        try:
            out[pkg] = importlib.metadata.version(pkg)
        except importlib.metadata.PackageNotFoundError:
            out[pkg] = None
    return out


def _svg(command: str, rows: list) -> str | None:
    series = {}
    if command == "ci-analysis":
        for r in rows:
            s = series.setdefault(f"{r['estimator']} ({r['ci_method']})", ([], [], [], []))
            for lst, v in zip(s, (r["fraction"], r["width"], r["width"], r["width"])):
                lst.append(v)
        return svg.line_plot(series, "sample fraction", "CI width", "CI width versus sample fraction")
    if command == "wl":
        for r in rows:
            s = series.setdefault(f"class {r['class']}", ([], [], [], []))
            for lst, v in zip(s, (r["energy"], r["log_g"], r["log_g"], r["log_g"])):
                lst.append(v)
        return svg.line_plot(series, "energy", "ln g(E)", "density of states")
    for r in rows:
        label = f"d={r['distance']} {r['estimator']} {r['temperature_mode']} {r['ci_method']}"
        s = series.setdefault(label, ([], [], [], []))
        for lst, v in zip(s, (r["p_mean"], r["value"], r["ci_low"], r["ci_high"])):
            lst.append(v)
    return svg.line_plot(series, "p", "success probability", command)


def execute(command: str, c: dict, workers: int | None = None) -> dict:
    """Run a resolved config and write its outputs; returns the manifest."""
    workers = c.get("workers") or (worker_count() if workers is None else workers)
    start = time.time()
    columns, rows, summary = COMMANDS[command](c, workers)
    os.makedirs(c["output_dir"], exist_ok=True)
    stem = os.path.join(c["output_dir"], c["name"])
    body = _csv_text(columns, rows)
    with open(stem + ".csv", "w", newline="") as f:
        f.write(body)
    outputs = {os.path.basename(stem + ".csv"): hashlib.sha256(body.encode()).hexdigest()}
    if c.get("svg"):
        text = _svg(command, rows)
        with open(stem + ".svg", "w") as f:
            f.write(text)
        outputs[os.path.basename(stem + ".svg")] = hashlib.sha256(text.encode()).hexdigest()
    manifest = {"subcommand": command, "config": c, "seed": c["seed"], "versions": _versions(),
                "outputs": outputs, "summary": summary,
                "created": time.strftime("%Y-%m-%dT%H:%M:%S%z"), "elapsed_s": round(time.time() - start, 3)}
    with open(stem + ".manifest.json", "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True, default=float)
        f.write("\n")
    return manifest


def _oracle(check: str, seed: int, cases: int) -> int:
    from . import oracle
    from .matching import Matching, SyndromeGraph, mwpm
    from .pfaffian import torus_log_partition

    rng = np.random.default_rng(seed)
    worst = 0.0
    if check == "fkt":
        for k in range(cases):
            d = (2, 3)[k % 2]
            p = (0.05, 0.1, 0.15)[k % 3]
            code = build_code("torus", d)
            rates = uniform_rates(p, code.n_qubits)
            inst = build_rbim(code, rates, sample_error(rates, rng))
            for frac in (1.0, 0.1):
                T = temperature(rates, frac)
                a = torus_log_partition(inst, T, 256).value
                b = oracle.enumerate_partition(inst, T, 256).value
                worst = max(worst, abs(float(a - b)))
        ok = worst < 1e-20
        print(f"fkt: {cases} disorders, max |log Z_FKT - log Z_enum| = {worst:.3e}")
    elif check == "estimators":
        code = build_code("torus", 2)
        rates = uniform_rates(0.1, code.n_qubits)
        tn = temperature(rates, "nishimori")
        for s, probs in oracle.enumerate_class_probabilities(code, rates).items():
            e = oracle.coset(code, np.array(s, dtype=np.uint8))[0]
            lz = class_log_partitions(code, rates, e, tn)
            for z, q in zip(lz, probs):
                worst = max(worst, abs(float(z.value) - math.log(float(q))))
        ok = worst < 1e-15
        print(f"estimators: d=2 syndromes, max |log Z - log P(class)| = {worst:.3e}")
    elif check == "matching":
        bad = 0
        for _ in range(cases):
            n = 2 * int(rng.integers(1, 7))
            W = rng.random((n, n)) * 5
            W = np.triu(W, 1)
            W = W + W.T
            sg = SyndromeGraph(tuple(range(n)), 0, W, {})
            a, b = mwpm(sg), oracle.exhaustive_matching(sg)
            worst = max(worst, abs(a.total_weight - b.total_weight))
            bad += not math.isclose(a.total_weight, b.total_weight, rel_tol=1e-12, abs_tol=1e-12)
        ok = bad == 0
        print(f"matching: {cases} graphs, {bad} mismatches, max weight gap {worst:.3e}")
    else:
        raise ValueError(check)
    print("PASS" if ok else "FAIL")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="zdecode", description=__doc__.split("\n")[0])
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("config", help="JSON config or manifest")
        sp.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config entry (dotted path, JSON value)")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--workers", type=int)
        sp.add_argument("--output-dir")
    sp = sub.add_parser("oracle")
    sp.add_argument("--check", choices=("fkt", "estimators", "matching"), required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--cases", type=int, default=50)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "oracle":
        return _oracle(args.check, args.seed, args.cases)
    try:
        overrides = [cfgmod.parse_override(o) for o in args.overrides]
        if args.seed is not None:
            overrides.append(("seed", args.seed))
        if args.output_dir is not None:
            overrides.append(("output_dir", args.output_dir))
        c = cfgmod.resolve(args.command, cfgmod.load(args.config), overrides)
    except (cfgmod.ConfigError, OSError) as exc:
        print(f"zdecode: {exc}", file=sys.stderr)
        return 2
    m = execute(args.command, c, args.workers)
    for name in m["outputs"]:
        print(os.path.join(c["output_dir"], name))
    if m["summary"] and args.command != "wl":
        print(json.dumps(m["summary"], sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
