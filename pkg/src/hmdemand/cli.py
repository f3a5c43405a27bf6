"""Command-line front end.

Subcommands mirror the pipeline stages (``hedonic``, ``distances``,
``estimate``, ``simulate``, ``compare``) and ``run`` chains them from a JSON
config. Every subcommand writes into an output directory: ``--output-dir``
if given, else ``$HMDEMAND_OUTPUT_DIR``, else the config's ``output_dir``
(``run``) or the current directory.

Failures exit with status 1 (2 for usage errors) and print one JSON object
on stderr: ``{"error": <code>, "message": <text>}``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .demand import (DM_F_O_NNFO, DM_OWNPRICE, VARIANTS, ci_containment, fit_dm, fit_hm,
                     fit_original, load_fit)
from .errors import HMDemandError, LoadError
from .estimator import SUR_MAX_ITER
from .hedonic import FORMS, fit_hedonic, read_hedonic_csv, write_hedonic_csv
from .metrics import read_matrix_csv, write_matrix_csv
from .panel import (attribute_profile, bundled_profiles_path, load_purchases, read_panel,
                    write_panel, write_purchases)
from .pipeline import distance_bundle
from .reference import MILK_TYPES
from .report import comparison_text, write_containment_csv, write_report
from .synth import PRESETS, gen_panel, gen_purchases, load_truth, preset_truth, save_truth

OUTPUT_ENV = "HMDEMAND_OUTPUT_DIR"


def output_dir(flag=None, fallback="."):
    out = Path(flag or os.environ.get(OUTPUT_ENV) or fallback)
    out.mkdir(parents=True, exist_ok=True)
    return out


# --- stage helpers shared by the subcommands and ``run`` -------------------


def _profile(path, types):
    return attribute_profile(load_purchases(path or bundled_profiles_path(), types=types))


def _hedonic(purchases_path, coef_path, form, types):
    if coef_path:
        return read_hedonic_csv(coef_path, form)
    if purchases_path:
        return fit_hedonic(load_purchases(purchases_path, types=types), form)
    return None


def _bundle(profiles, shares, hedonic, form, types):
    profile = None if profiles is None else _profile(profiles, types)
    return distance_bundle(profile, shares, hedonic, form)


def _estimate(panel, model, bundle, distances=DM_F_O_NNFO, ownprice=DM_OWNPRICE, drop=None,
              max_iter=SUR_MAX_ITER):
    if model == "original":
        return fit_original(panel, drop=drop, max_iter=max_iter)
    if model == "dm":
        return fit_dm(panel, bundle.all, bundle.chars, names=tuple(distances),
                      ownprice=tuple(ownprice), drop=drop, max_iter=max_iter)
    if model == "hm":
        return fit_hm(panel, bundle.hedonic["HEDONIC"], bundle.hedonic["NN-HEDONIC"],
                      shares=bundle.chars.share, drop=drop, max_iter=max_iter)
    raise HMDemandError(f"unknown model variant {model!r}")


def _drop_index(panel, drop):
    if drop is None:
        return None
    if drop not in panel.types:
        raise HMDemandError(f"dropped equation {drop!r} is not one of {panel.types}")
    return panel.types.index(drop)


def _distances_from_dir(path):
    path = Path(path)
    if not path.is_dir():
        raise LoadError(f"no such distance directory: {path}")
    files = sorted(p for p in path.glob("*.csv") if p.name != "closeness_index.csv")
    return {m.name: m for m in map(read_matrix_csv, files)}


def _split(names):
    if names is None:
        return None
    if isinstance(names, str):
        names = names.split(",")
    return tuple(n.strip() for n in names if n.strip())


# --- subcommands -----------------------------------------------------------


def cmd_hedonic(args):
    table = load_purchases(args.purchases, types=args.types)
    fit = fit_hedonic(table, args.form)
    out = output_dir(args.output_dir)
    path = write_hedonic_csv(fit, out / f"hedonic_{args.form}.csv")
    print(path)
    return 0


def write_distances(bundle, out):
    """One labelled CSV per matrix plus the hedonic closeness index."""
    out.mkdir(parents=True, exist_ok=True)
    paths = [write_matrix_csv(m, out / f"{name}.csv") for name, m in bundle.all.items()]
    index = out / "closeness_index.csv"
    index.write_text("type,closeness_index\n" + "".join(
        f"{t},{v!r}\n" for t, v in zip(bundle.chars.types, bundle.index.tolist())))
    return paths + [index]


def cmd_distances(args):
    shares = None if args.panel is None else read_panel(args.panel).mean_shares()
    hedonic = _hedonic(args.purchases, args.hedonic, args.hedonic_form, args.types)
    bundle = _bundle(args.profiles, shares, hedonic, args.hedonic_form, args.types)
    for p in write_distances(bundle, output_dir(args.output_dir)):
        print(p)
    return 0


def cmd_estimate(args):
    panel = read_panel(args.panel)
    hedonic = _hedonic(args.purchases, args.hedonic, args.hedonic_form, panel.types)
    bundle = _bundle(args.profiles, panel.mean_shares(), hedonic, args.hedonic_form,
                     panel.types)
    if args.distance_dir:
        bundle = type(bundle)(_distances_from_dir(args.distance_dir), bundle.hedonic,
                              bundle.index, bundle.chars, bundle.value_added)
    names = _split(args.distances) or DM_F_O_NNFO
    fit = _estimate(panel, args.model, bundle, names, _split(args.ownprice) or DM_OWNPRICE,
                    _drop_index(panel, args.drop), args.max_iter)
    containment = None
    report = fit.report()
    if args.baseline:
        containment = ci_containment(report, load_fit(args.baseline).report())
    out = output_dir(args.output_dir)
    for p in write_report(fit, out, args.model, report, containment):
        print(p)
    return 0


def cmd_simulate(args):
    if args.truth in PRESETS:
        truth = preset_truth(args.truth)
    else:
        truth = load_truth(args.truth)
    out = output_dir(args.output_dir)
    seed = np.random.SeedSequence(args.seed).spawn(2)
    panel = gen_panel(truth, args.weeks, seed=seed[0])
    paths = [write_panel(panel, out / "panel.csv"), save_truth(truth, out / "truth.json")]
    if args.records:
        table = gen_purchases(truth, args.records, seed=seed[1], weeks=args.weeks,
                              jitter=args.jitter)
        paths.append(write_purchases(table, out / "purchases.csv"))
    for p in paths:
        print(p)
    return 0


def cmd_compare(args):
    a, b = load_fit(args.fit_a), load_fit(args.fit_b)
    text, result = comparison_text(a, b, args.label_a, args.label_b)
    out = output_dir(args.output_dir)
    (out / "comparison.txt").write_text(text, encoding="utf-8")
    write_containment_csv(result, a.types, out / "containment.csv")
    sys.stdout.write(text)
    return 0


# --- config-driven run -----------------------------------------------------


@dataclass
class RunConfig:
    """Everything one end-to-end run needs.

    Either ``panel`` (an existing panel CSV) or ``simulate`` (a truth preset
    or truth JSON path plus ``weeks`` and optional ``records``) supplies the
    data. ``models`` lists fits as ``{"variant": ..., "distances": [...]}``;
    ``baseline`` is a fit JSON path or the label of one of the models.
    """

    types: tuple = MILK_TYPES
    panel: str | None = None
    purchases: str | None = None
    profiles: str | None = None
    simulate: dict | None = None
    hedonic_form: str = "semilog"
    models: list = field(default_factory=lambda: [{"variant": "original"}])
    baseline: str | None = None
    output_dir: str = "hmdemand-out"
    seed: int = 0
    base: Path = field(default=Path("."), repr=False)

    def __post_init__(self):
        self.types = tuple(self.types)
        if not self.types:
            raise HMDemandError("config type list is empty")
        if self.hedonic_form not in FORMS:
            raise HMDemandError(f"unknown hedonic form {self.hedonic_form!r}")
        if (self.panel is None) == (self.simulate is None):
            raise HMDemandError("config needs exactly one of 'panel' or 'simulate'")
        for m in self.models:
            if m.get("variant") not in VARIANTS:
                raise HMDemandError(f"unknown model variant {m.get('variant')!r}")
        for key in ("panel", "purchases", "profiles"):
            value = getattr(self, key)
            if value is not None and not self.resolve(value).exists():
                raise LoadError(f"config {key} file not found: {value}")

    def resolve(self, path):
        p = Path(path)
        return p if p.is_absolute() else self.base / p

    @classmethod
    def load(cls, path):
        path = Path(path)
        if not path.exists():
            raise LoadError(f"no such config file: {path}")
        try:
            d = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise LoadError(f"config is not valid JSON ({exc.msg})", row=exc.lineno) from None
        known = set(cls.__dataclass_fields__) - {"base"}
        extra = sorted(set(d) - known)
        if extra:
            raise HMDemandError(f"unknown config keys: {', '.join(extra)}")
        return cls(**d, base=path.parent)


def _label(model):
    return model.get("label") or model["variant"]


def run(config, out=None):
    """Execute a :class:`RunConfig`; returns the list of written paths."""
    out = output_dir(out, config.resolve(config.output_dir))
    written = []
    purchases = config.purchases and config.resolve(config.purchases)
    if config.simulate is not None:
        sim = config.simulate
        source = sim.get("truth", "original")
        truth = preset_truth(source) if source in PRESETS else load_truth(config.resolve(source))
        s_panel, s_purch = np.random.SeedSequence(config.seed).spawn(2)
        panel = gen_panel(truth, int(sim.get("weeks", 209)), seed=s_panel)
        written += [write_panel(panel, out / "panel.csv"), save_truth(truth, out / "truth.json")]
        if sim.get("records"):
            table = gen_purchases(truth, int(sim["records"]), seed=s_purch,
                                  weeks=panel.T, jitter=float(sim.get("jitter", 0.0)))
            purchases = write_purchases(table, out / "purchases.csv")
            written.append(purchases)
    else:
        panel = read_panel(config.resolve(config.panel))
    if tuple(panel.types) != config.types:
        raise HMDemandError(f"panel types {panel.types} differ from config types {config.types}")

    hedonic = None
    if purchases:
        hedonic = fit_hedonic(load_purchases(purchases, types=config.types), config.hedonic_form)
        written.append(write_hedonic_csv(hedonic, out / f"hedonic_{config.hedonic_form}.csv"))
    profiles = config.profiles and config.resolve(config.profiles)
    bundle = _bundle(profiles, panel.mean_shares(), hedonic, config.hedonic_form, config.types)
    written += write_distances(bundle, out / "distances")

    fits = {}
    for model in config.models:
        label = _label(model)
        fits[label] = _estimate(panel, model["variant"], bundle,
                                model.get("distances", DM_F_O_NNFO),
                                model.get("ownprice", DM_OWNPRICE),
                                _drop_index(panel, model.get("drop")),
                                int(model.get("max_iter", SUR_MAX_ITER)))
    baseline = None
    if config.baseline in fits:
        baseline = fits[config.baseline]
    elif config.baseline:
        baseline = load_fit(config.resolve(config.baseline))

    for label, fit in fits.items():
        report = fit.report()
        containment = None
        if baseline is not None and fit is not baseline:
            containment = ci_containment(report, baseline.report())
        written += write_report(fit, out, label, report, containment)
    if baseline is not None:
        for label, fit in fits.items():
            if fit is baseline:
                continue
            text, result = comparison_text(fit, baseline, label, config.baseline)
            path = out / f"{label}_comparison.txt"
            path.write_text(text, encoding="utf-8")
            written += [path, write_containment_csv(result, fit.types,
                                                    out / f"{label}_containment.csv")]
    return written


def demo_config_path():
    return Path(__file__).with_name("data") / "demo_config.json"


def cmd_run(args):
    path = demo_config_path() if args.config == "demo" else args.config
    config = RunConfig.load(path)
    for p in run(config, args.output_dir):
        print(p)
    return 0


# --- argument parsing ------------------------------------------------------


def _types(text):
    return _split(text)


class _Parser(argparse.ArgumentParser):
    """Usage errors also come out as one JSON line."""

    def error(self, message):
        _fail("usage", f"{self.prog}: {message}")
        self.exit(2)


def build_parser():
    parser = _Parser(
        prog="hmdemand",
        description="Rotterdam demand systems with distance-metric and hedonic-metric "
                    "approximations.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help):
        p = sub.add_parser(name, help=help, description=help)
        p.set_defaults(func=func)
        p.add_argument("--output-dir", "-o",
                       help=f"directory for outputs (default: ${OUTPUT_ENV} or current dir)")
        return p

    types_help = "comma-separated product types in equation order (default: milk types)"

    p = add("hedonic", cmd_hedonic, "fit a hedonic price regression on purchase records")
    p.add_argument("--purchases", required=True, help="purchase-record CSV")
    p.add_argument("--form", choices=FORMS, default="linear", help="functional form")
    p.add_argument("--types", type=_types, default=MILK_TYPES, help=types_help)

    p = add("distances", cmd_distances, "build closeness matrices and the closeness index")
    p.add_argument("--profiles", help="purchase CSV defining type profiles (default: bundled)")
    p.add_argument("--panel", help="panel CSV supplying mean shares (default: published)")
    p.add_argument("--purchases", help="purchase CSV to fit the hedonic regression on")
    p.add_argument("--hedonic", help="hedonic coefficient CSV (overrides --purchases)")
    p.add_argument("--hedonic-form", choices=FORMS, default="semilog",
                   help="hedonic form; published coefficients when no fit is supplied")
    p.add_argument("--types", type=_types, default=MILK_TYPES, help=types_help)

    p = add("estimate", cmd_estimate, "fit a demand system and report elasticities")
    p.add_argument("--panel", required=True, help="weekly panel CSV")
    p.add_argument("--model", choices=VARIANTS, default="original", help="model variant")
    p.add_argument("--distances",
                   help="comma-separated distance names for the DM model "
                        f"(default: {','.join(DM_F_O_NNFO)})")
    p.add_argument("--ownprice", help="comma-separated DM own-price characteristics "
                                      f"(default: {','.join(DM_OWNPRICE)})")
    p.add_argument("--distance-dir", help="directory of matrix CSVs from 'distances'")
    p.add_argument("--profiles", help="purchase CSV defining type profiles (default: bundled)")
    p.add_argument("--purchases", help="purchase CSV to fit the hedonic regression on")
    p.add_argument("--hedonic", help="hedonic coefficient CSV")
    p.add_argument("--hedonic-form", choices=FORMS, default="semilog", help="hedonic form")
    p.add_argument("--baseline", help="fit JSON whose 95%% intervals mark the elasticities")
    p.add_argument("--drop", help="type whose equation is dropped (default: last)")
    p.add_argument("--max-iter", type=int, default=SUR_MAX_ITER,
                   help=f"FGLS iteration cap (default: {SUR_MAX_ITER})")

    p = add("simulate", cmd_simulate, "generate a synthetic panel (and purchases)")
    p.add_argument("--truth", default="original",
                   help=f"ground-truth JSON or a preset ({', '.join(PRESETS)})")
    p.add_argument("--weeks", type=int, default=209, help="number of weeks")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.add_argument("--records", type=int, default=0, help="purchase records (0 = none)")
    p.add_argument("--jitter", type=float, default=0.0, help="attribute jitter sd")

    p = add("compare", cmd_compare, "mark a fit's elasticities against baseline confidence intervals")
    p.add_argument("fit_a", help="candidate fit JSON")
    p.add_argument("fit_b", help="baseline fit JSON")
    p.add_argument("--label-a", default="candidate", help="label for the candidate")
    p.add_argument("--label-b", default="baseline", help="label for the baseline")

    p = add("run", cmd_run, "run the whole pipeline from a JSON config")
    p.add_argument("config", help="config JSON path, or 'demo' for the bundled demo")
    return parser


def _fail(code, message):
    sys.stderr.write(json.dumps({"error": code, "message": message}) + "\n")


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except HMDemandError as exc:
        _fail(exc.code, str(exc))
    except OSError as exc:
        _fail("io_error", str(exc))
    except (ValueError, np.linalg.LinAlgError) as exc:
        _fail("invalid_input", str(exc))
    return 1


if __name__ == "__main__":
    sys.exit(main())
