"""Command-line front end.

Subcommands: ``linkbudget``, ``pie``, ``sweep``, ``table2``, ``mc-validate``.
Every parameter can come from ``--key value`` flags or a JSON ``--config``
file using the same unit-suffixed key names; flags win. Exit codes: 0
success, 1 validation or analysis failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import dataclass
from importlib import metadata
from pathlib import Path

import numpy as np

from . import caplimits, linkbudget as lb, mcoracle, refdata
from .detstats import pnr_stats, qpg_stats, sif_stats
from .errors import is_infinite
from .linkbudget import ChannelPoint, NoiseModel
from .optimize import Model, default_nf_range, optimize_cell, sweep
from .ppmcore import Mode, pie_hard, pie_soft_bound, pie_unrestricted_bandwidth

TOOL = "pielimits"
Z_BAND = 3.0


def _version():
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0.0.0"


class UsageError(Exception):
    """Bad or inconsistent parameters; exit code 2."""


@dataclass(frozen=True)
class Param:
    key: str
    type: type = float
    default: object = None
    help: str = ""


def _flag(key):
    return "--" + key.replace("_", "-")


def _bool(value):
    if isinstance(value, bool):
        return value
    if str(value).lower() in ("1", "true", "yes", "on"):
        return True
    if str(value).lower() in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {value!r}")


def _floats(value):
    if isinstance(value, (list, tuple)):
        return tuple(float(v) for v in value)
    return tuple(float(v) for v in str(value).split(","))


LINKBUDGET_PARAMS = (
    Param("range_m", help="link range"),
    Param("range_au", help="link range in astronomical units"),
    Param("d_tx_m", help="transmit aperture diameter"),
    Param("d_rx_m", help="receive aperture diameter"),
    Param("f_c_hz", help="carrier frequency"),
    Param("wavelength_nm", help="carrier wavelength (alternative to --f-c-hz)"),
    Param("eta_rx", default=1.0, help="receiver efficiency (dimensionless)"),
    Param("eta_atm", default=1.0, help="atmospheric transmission (dimensionless)"),
    Param("p_tx_w", help="transmitted power"),
    Param("signal_flux_phps", help="received signal photon flux, instead of a geometry"),
    Param("slot_ns", help="slot duration"),
    Param("slot_rate_hz", help="slot rate (alternative to --slot-ns)"),
    Param("bg_flux_phps", help="detected background photon flux (multimode)"),
    Param("noise_psd_w_per_hz", help="background noise power spectral density"),
    Param("noise_psd_dbm_per_hz", help="background noise PSD in dB-mW/Hz"),
    Param("mode_count", int, help="number of temporal modes passed by the filter"),
)

PIE_PARAMS = (
    Param("model", str, help="S1, S2, GH, SIF_HARD, SIF_SOFT, QPG_ONOFF or QPG_PNR"),
    Param("ns", help="signal photons per slot"),
    Param("ns_db", help="signal photons per slot, dB"),
    Param("nn", help="single-mode noise photons"),
    Param("nn_db", help="single-mode noise photons, dB"),
    Param("nb", help="multimode noise photons per slot"),
    Param("nb_db", help="multimode noise photons per slot, dB"),
    Param("nf", help="pulse photons (omit with --optimize)"),
    Param("m", int, help="integer PPM order for SIF_HARD"),
    Param("optimize", _bool, False, "maximize over pulse energy"),
    Param("nf_lo", help="lower end of the pulse-energy search"),
    Param("nf_hi", help="upper end of the pulse-energy search"),
)

SWEEP_PARAMS = (
    Param("model", str, help="SIF_HARD, SIF_SOFT, QPG_ONOFF or QPG_PNR"),
    Param("ns_min", default=1e-6),
    Param("ns_max", default=1.0),
    Param("ns_points", int, 61),
    Param("noise_min", default=1e-6),
    Param("noise_max", default=1.0),
    Param("noise_points", int, 61),
    Param("nf_lo"),
    Param("nf_hi"),
    Param("matrices", _bool, False, "also write <out>_pie/_nf_star/_m_star matrix CSVs"),
)

TABLE2_PARAMS = (
    Param("night_nb_db", default=refdata.NIGHT_NB_DB),
    Param("night_nn_db", default=refdata.NIGHT_NN_DB),
    Param("day_nn_db", default=refdata.DAY_NN_DB),
    Param("day_nb_db", default=refdata.NIGHT_NB_DB + refdata.DAY_PENALTY_DB),
    Param("flux_phps", _floats, refdata.SIGNAL_FLUX_PHPS, "comma-separated signal fluxes"),
    Param("include_sif_day", _bool, False, "also compute the unpublished SIF+DD day column"),
)

MC_PARAMS = (
    Param("model", str, help="sif, qpg, pnr or hard"),
    Param("nf", default=0.5),
    Param("nb", help="multimode noise (sif, hard)"),
    Param("nn", help="single-mode noise (qpg, pnr)"),
    Param("ns", help="signal per slot (hard)"),
    Param("m", int, 16),
    Param("samples", int, 10**6),
    Param("seed", int, 0),
    Param("corrupt_analytic", default=0.0, help=argparse.SUPPRESS),
)

COMMANDS = {
    "linkbudget": LINKBUDGET_PARAMS,
    "pie": PIE_PARAMS,
    "sweep": SWEEP_PARAMS,
    "table2": TABLE2_PARAMS,
    "mc-validate": MC_PARAMS,
}


def build_parser():
    parser = argparse.ArgumentParser(prog=TOOL, description="Photon information efficiency limits.")
    parser.add_argument("--version", action="version", version=f"{TOOL} {_version()}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, params in COMMANDS.items():
        p = sub.add_parser(name)
        for prm in params:
            extra = {"nargs": "?", "const": "true"} if prm.type is _bool else {}
            p.add_argument(_flag(prm.key), dest=prm.key, type=str, default=None, help=prm.help,
                           **extra)
        p.add_argument("--config", type=Path, help="JSON file of parameters")
        p.add_argument("--out", type=Path, help="output path (default stdout)")
        p.add_argument("--format", choices=("csv", "json"), default=None)
    return parser


def resolve_config(command, args):
    """Merge JSON config and flags into typed values; unknown keys are rejected."""
    params = {p.key: p for p in COMMANDS[command]}
    raw = {}
    if args.config is not None:
        try:
            loaded = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config: {exc}") from exc
        if not isinstance(loaded, dict):
            raise UsageError("config must be a JSON object")
        unknown = sorted(set(loaded) - set(params) - {"out", "format"})
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        raw.update(loaded)
    for key in params:
        value = getattr(args, key)
        if value is not None:
            raw[key] = value
    out = {}
    for key, prm in params.items():
        value = raw.get(key)
        if value is None:
            out[key] = prm.default
            continue
        try:
            out[key] = prm.type(value)
        except (TypeError, ValueError) as exc:
            raise UsageError(f"invalid value for {_flag(key)}: {value!r}") from exc
    out["out"] = args.out or (Path(raw["out"]) if raw.get("out") else None)
    out["format"] = args.format or raw.get("format") or "csv"
    return out


def _pick(cfg, *keys, required=True, convert=None):
    """Value of the single key given among alternatives, optionally converted."""
    given = [k for k in keys if cfg.get(k) is not None]
    if len(given) > 1:
        raise UsageError(f"give only one of {', '.join(_flag(k) for k in keys)}")
    if not given:
        if required:
            raise UsageError(f"missing {' or '.join(_flag(k) for k in keys)}")
        return None
    key = given[0]
    value = cfg[key]
    return convert[key](value) if convert and key in convert else value


def _db_or_nan(x):
    return lb.db(x) if x > 0 else -math.inf


# --- linkbudget -------------------------------------------------------------


def cmd_linkbudget(cfg):
    outputs, units = {}, {}
    f_c = _pick(cfg, "f_c_hz", "wavelength_nm", required=False,
                convert={"wavelength_nm": lambda nm: lb.frequency_from_wavelength(nm * 1e-9)})
    flux = cfg["signal_flux_phps"]
    geometry_keys = ("range_m", "range_au", "d_tx_m", "d_rx_m", "p_tx_w")
    if any(cfg[k] is not None for k in geometry_keys):
        if flux is not None:
            raise UsageError("give either a link geometry or --signal-flux-phps")
        r = _pick(cfg, "range_m", "range_au", convert={"range_au": lambda au: au * lb.AU})
        for k in ("d_tx_m", "d_rx_m", "p_tx_w"):
            if cfg[k] is None:
                raise UsageError(f"missing {_flag(k)}")
        if f_c is None:
            raise UsageError("missing --f-c-hz or --wavelength-nm")
        geom = lb.LinkGeometry(r, cfg["d_tx_m"], cfg["d_rx_m"], f_c, cfg["eta_rx"],
                               cfg["eta_atm"], cfg["p_tx_w"])
        loss = lb.diffraction_loss(geom)
        p_rx = lb.received_power(geom)
        flux = lb.photon_flux(p_rx, f_c)
        outputs.update(diffraction_loss=loss, diffraction_loss_db=lb.db(loss),
                       p_rx_w=p_rx, p_rx_dbw=_db_or_nan(p_rx))
        units.update(diffraction_loss="1", diffraction_loss_db="dB", p_rx_w="W", p_rx_dbw="dBW")
    if f_c is not None:
        outputs["f_c_hz"] = f_c
        units["f_c_hz"] = "Hz"
    if flux is not None:
        outputs["signal_flux_phps"] = flux
        units["signal_flux_phps"] = "photons/s"

    slot_rate = _pick(cfg, "slot_ns", "slot_rate_hz", required=False,
                      convert={"slot_ns": lambda ns: 1e9 / ns})
    modes = cfg["mode_count"]
    if slot_rate is not None:
        outputs["slot_rate_hz"] = slot_rate
        units["slot_rate_hz"] = "Hz"
        if flux is not None:
            n_s = lb.signal_per_slot(flux, slot_rate)
            outputs.update(n_s=n_s, n_s_db=_db_or_nan(n_s))
            units.update(n_s="photons/slot", n_s_db="dB")

    psd = _pick(cfg, "noise_psd_w_per_hz", "noise_psd_dbm_per_hz", required=False,
                convert={"noise_psd_dbm_per_hz": lambda d: lb.from_db(d) * 1e-3})
    if cfg["bg_flux_phps"] is not None and psd is not None:
        raise UsageError("give either --bg-flux-phps or a noise PSD")
    n_b = n_n = None
    if cfg["bg_flux_phps"] is not None:
        if slot_rate is None:
            raise UsageError("--bg-flux-phps needs --slot-ns or --slot-rate-hz")
        n_b = lb.signal_per_slot(cfg["bg_flux_phps"], slot_rate)
        if modes is not None:
            n_n = n_b / modes
    elif psd is not None:
        if f_c is None:
            raise UsageError("a noise PSD needs --f-c-hz or --wavelength-nm")
        n_n = lb.noise_per_slot(psd, f_c, 1)
        if modes is not None:
            n_b = lb.noise_per_slot(psd, f_c, modes)
    if n_b is not None:
        outputs.update(n_b=n_b, n_b_db=_db_or_nan(n_b))
        units.update(n_b="photons/slot", n_b_db="dB")
    if n_n is not None:
        outputs.update(n_n=n_n, n_n_db=_db_or_nan(n_n))
        units.update(n_n="photons/mode", n_n_db="dB")
    if not outputs:
        raise UsageError("nothing to compute: give a geometry, a flux or a noise level")
    return outputs, units


# --- pie --------------------------------------------------------------------

COHERENT = {"S1": caplimits.shannon_s1, "S2": caplimits.shannon_s2, "GH": caplimits.gordon_holevo}


def cmd_pie(cfg):
    name = (cfg["model"] or "").upper()
    if name not in COHERENT and name not in Model.__members__:
        raise UsageError(f"unknown model {cfg['model']!r}")
    from_db = {k + "_db": lb.from_db for k in ("ns", "nn", "nb")}
    n_s = _pick(cfg, "ns", "ns_db", convert=from_db)
    multimode = name.startswith("SIF")
    own, other = (("nb", "nb_db"), ("nn", "nn_db")) if multimode else (("nn", "nn_db"), ("nb", "nb_db"))
    if any(cfg[k] is not None for k in other):
        kind = "multimode n_b" if multimode else "single-mode n_n"
        raise UsageError(f"model {name} takes {kind} noise ({_flag(own[0])})")
    noise = _pick(cfg, *own, convert=from_db)
    outputs = {}
    units = {"pie": "bits/photon"}

    if name in COHERENT:
        res = COHERENT[name](n_s, noise)
        outputs.update(pie=res.pie, rate_per_slot=res.rate_per_slot)
        units["rate_per_slot"] = "bits/slot"
        return outputs, units

    model = Model(name)
    channel = ChannelPoint(n_s, noise, model.noise_model)
    lo, hi = default_nf_range(model)
    lo = cfg["nf_lo"] if cfg["nf_lo"] is not None else lo
    hi = cfg["nf_hi"] if cfg["nf_hi"] is not None else hi
    if cfg["optimize"]:
        if cfg["nf"] is not None:
            raise UsageError("--nf and --optimize are exclusive")
        if n_s == 0:
            if model is Model.SIF_HARD:
                raise UsageError("hard decoding has no unrestricted-bandwidth limit")
            mode = Mode.PNR if model is Model.QPG_PNR else Mode.ONOFF
            sup = pie_unrestricted_bandwidth(channel, mode, nf_cap=hi, nf_lo=lo)
            outputs.update(pie=sup.pie, nf_star=sup.nf_star, boundary_hit=sup.boundary_hit)
        else:
            pt = optimize_cell(model, n_s, noise, (lo, hi))
            outputs.update(pie=pt.pie_star, nf_star=pt.nf_star, m_star=pt.m_star,
                           boundary_hit=pt.boundary_hit, flags=list(pt.flags))
        units.update(nf_star="photons", m_star="slots")
        return outputs, units

    if model is Model.SIF_HARD:
        m = cfg["m"]
        if m is None:
            if cfg["nf"] is None or n_s <= 0:
                raise UsageError("SIF_HARD needs --m or --nf with --ns > 0")
            m = max(2, round(cfg["nf"] / n_s))
        outputs.update(pie=pie_hard(channel, m * n_s, m), nf=m * n_s, m=m)
    else:
        if cfg["nf"] is None:
            raise UsageError("give --nf or --optimize")
        mode = Mode.PNR if model is Model.QPG_PNR else Mode.ONOFF
        outputs.update(pie=pie_soft_bound(channel, cfg["nf"], mode), nf=cfg["nf"])
        if n_s > 0:
            outputs["m"] = cfg["nf"] / n_s
    units.update(nf="photons", m="slots")
    return outputs, units


# --- sweep ------------------------------------------------------------------

SWEEP_COLUMNS = (
    "model", "n_s[photons/slot]", "noise[photons/slot]", "pie[bits/photon]",
    "nf_star[photons]", "m_star[slots]", "boundary_hit", "flags",
)


def _fmt(x):
    return repr(float(x))


def sweep_csv(table) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for n_s, noise, cell in table.rows():
        w.writerow([table.model.value, _fmt(n_s), _fmt(noise), _fmt(cell.pie_star),
                    _fmt(cell.nf_star), _fmt(cell.m_star), int(cell.boundary_hit),
                    ";".join(cell.flags)])
    return buf.getvalue()


def matrix_csv(table, attr) -> str:
    """Heatmap layout: first column noise, then one column per n_s."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["noise\\n_s"] + [_fmt(x) for x in table.ns_grid])
    for noise, row in zip(table.noise_grid, getattr(table, attr)):
        w.writerow([_fmt(noise)] + [_fmt(v) for v in row])
    return buf.getvalue()


def read_sweep_csv(source):
    """Parse sweep CSV text (or a path) back into typed row dicts."""
    text = Path(source).read_text() if isinstance(source, Path) else source
    rows = []
    for rec in csv.DictReader(io.StringIO(text)):
        rows.append({
            "model": rec["model"],
            "n_s": float(rec["n_s[photons/slot]"]),
            "noise": float(rec["noise[photons/slot]"]),
            "pie": float(rec["pie[bits/photon]"]),
            "nf_star": float(rec["nf_star[photons]"]),
            "m_star": float(rec["m_star[slots]"]),
            "boundary_hit": rec["boundary_hit"] == "1",
            "flags": tuple(f for f in rec["flags"].split(";") if f),
        })
    return rows


def cmd_sweep(cfg):
    if not cfg["model"] or cfg["model"].upper() not in Model.__members__:
        raise UsageError("--model must be one of " + ", ".join(Model.__members__))
    model = Model(cfg["model"].upper())
    for k in ("ns_points", "noise_points"):
        if cfg[k] < 1:
            raise UsageError(f"{_flag(k)} must be >= 1")
    ns_grid = np.geomspace(cfg["ns_min"], cfg["ns_max"], cfg["ns_points"])
    noise_grid = np.geomspace(cfg["noise_min"], cfg["noise_max"], cfg["noise_points"])
    lo, hi = default_nf_range(model)
    nf_range = (cfg["nf_lo"] or lo, cfg["nf_hi"] or hi)
    return sweep(model, ns_grid, noise_grid, nf_range)


# --- table2 -----------------------------------------------------------------


def table2_rows(night_nb_db=refdata.NIGHT_NB_DB, night_nn_db=refdata.NIGHT_NN_DB,
                day_nn_db=refdata.DAY_NN_DB, flux=refdata.SIGNAL_FLUX_PHPS,
                include_sif_day=False, day_nb_db=refdata.NIGHT_NB_DB + refdata.DAY_PENALTY_DB):
    """Attainable unrestricted-bandwidth rates (Mbps) for each signal flux.

    Each rate is the supremal PIE for a receiver and noise level times the
    received photon flux. Returns ``(rows, pies)``; ``pies`` maps each
    column to its bits-per-photon value.
    """
    pies = {
        "sif_dd_night": pie_unrestricted_bandwidth(
            ChannelPoint.multimode(0.0, lb.from_db(night_nb_db)), Mode.ONOFF).pie,
        "qpg_dd_night": pie_unrestricted_bandwidth(
            ChannelPoint.single_mode(0.0, lb.from_db(night_nn_db)), Mode.ONOFF).pie,
        "qpg_dd_day": pie_unrestricted_bandwidth(
            ChannelPoint.single_mode(0.0, lb.from_db(day_nn_db)), Mode.ONOFF).pie,
        "gh_night": caplimits.gh_pie_asymptote(lb.from_db(night_nn_db)),
        "gh_day": caplimits.gh_pie_asymptote(lb.from_db(day_nn_db)),
    }
    if include_sif_day:
        pies["sif_dd_day"] = pie_unrestricted_bandwidth(
            ChannelPoint.multimode(0.0, lb.from_db(day_nb_db)), Mode.ONOFF).pie
    rows = []
    for i, phi in enumerate(flux):
        row = {"flux_phps": phi}
        if len(flux) == len(refdata.DISTANCE_AU) and tuple(flux) == refdata.SIGNAL_FLUX_PHPS:
            row["distance_au"] = refdata.DISTANCE_AU[i]
            row["expected_mbps"] = refdata.EXPECTED_RATE_MBPS[i]
        for col, pie in pies.items():
            row[col + "_mbps"] = round(pie * phi / 1e6, 3)
        rows.append(row)
    return rows, pies


def cmd_table2(cfg):
    return table2_rows(cfg["night_nb_db"], cfg["night_nn_db"], cfg["day_nn_db"], cfg["flux_phps"],
                       cfg["include_sif_day"], cfg["day_nb_db"])


# --- mc-validate ------------------------------------------------------------


@dataclass(frozen=True)
class Check:
    name: str
    analytic: float
    empirical: float
    std_err: float

    @property
    def z(self):
        if self.std_err == 0:
            return 0.0 if self.analytic == self.empirical else math.inf
        return (self.empirical - self.analytic) / self.std_err

    @property
    def passed(self):
        return abs(self.z) <= Z_BAND


def _binary_checks(stats, pulse, empty, bias):
    return [
        Check("pulse_click_p", stats.p + bias, *_est(pulse.click_probability())),
        Check("empty_click_q", stats.q + bias, *_est(empty.click_probability())),
    ]


def _est(e):
    return e.value, e.std_err


def mc_checks(model, nf, noise, samples, seed, ns=None, m=16, bias=0.0):
    """Run the Monte Carlo checks for one parameter point.

    ``bias`` is added to every analytic value and exists to exercise the
    failure path.
    """
    model = model.lower()
    if model == "sif":
        return _binary_checks(sif_stats(nf, noise), mcoracle.sample_sif_counts(nf + noise, samples, seed),
                              mcoracle.sample_sif_counts(noise, samples, seed + 1), bias)
    if model == "qpg":
        return _binary_checks(qpg_stats(nf, noise), mcoracle.sample_qpg_counts(nf, noise, samples, seed),
                              mcoracle.sample_qpg_counts(0.0, noise, samples, seed + 1), bias)
    if model == "pnr":
        st = pnr_stats(nf, noise)
        checks = []
        for label, pmf, hist in (
            ("p", st.p_k, mcoracle.sample_qpg_counts(nf, noise, samples, seed)),
            ("q", st.q_k, mcoracle.sample_qpg_counts(0.0, noise, samples, seed + 1)),
        ):
            n = hist.samples
            for k, _ in mcoracle.bin_z_scores(hist, pmf):
                est = hist.probability(k)
                se = math.sqrt(pmf[k] * (1 - pmf[k]) / n)
                checks.append(Check(f"{label}_{k}", pmf[k] + bias, est.value, se))
            mean = hist.mean()
            target = nf + noise if label == "p" else noise
            checks.append(Check(f"{label}_mean", target + bias, mean.value, mean.std_err))
        return checks
    if model == "hard":
        if ns is None:
            raise UsageError("hard model needs --ns")
        channel = ChannelPoint.multimode(ns, noise)
        est = mcoracle.simulate_hard_frames(ns, noise, m, frames=samples, seed=seed)
        return [Check("hard_pie", pie_hard(channel, m * ns, m) + bias, est.value, est.std_err)]
    raise UsageError(f"unknown mc model {model!r}")


def cmd_mc_validate(cfg):
    model = (cfg["model"] or "").lower()
    noise_key = {"sif": "nb", "hard": "nb", "qpg": "nn", "pnr": "nn"}.get(model)
    if noise_key is None:
        raise UsageError("--model must be sif, qpg, pnr or hard")
    noise = cfg[noise_key]
    if noise is None:
        raise UsageError(f"model {model} needs {_flag(noise_key)}")
    return mc_checks(model, cfg["nf"], noise, cfg["samples"], cfg["seed"], cfg["ns"], cfg["m"],
                     cfg["corrupt_analytic"])


# --- output -----------------------------------------------------------------


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return _jsonable(x.item())
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def json_document(command, inputs, outputs, units, provenance=""):
    """Common JSON envelope shared by every subcommand."""
    doc = {
        "tool": TOOL,
        "version": _version(),
        "command": command,
        "inputs": inputs,
        "outputs": outputs,
        "units": units,
        "provenance": provenance,
    }
    return json.dumps(_jsonable(doc), indent=2, sort_keys=False) + "\n"


def _kv_csv(outputs, units):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["quantity", "value", "unit"])
    for k, v in outputs.items():
        if isinstance(v, (list, tuple)):
            v = ";".join(map(str, v))
        elif isinstance(v, bool):
            v = int(v)
        elif isinstance(v, float):
            v = "inf" if is_infinite(v) else _fmt(v)
        w.writerow([k, v, units.get(k, "")])
    return buf.getvalue()


def _rows_csv(rows):
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def _emit(text, path):
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, newline="\n")


def _inputs(cfg):
    return {k: v for k, v in cfg.items() if k not in ("out", "format") and v is not None}


def run(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    command = args.command
    try:
        cfg = resolve_config(command, args)
        fmt, out = cfg["format"], cfg["out"]
        inputs = _inputs(cfg)
        if command == "linkbudget":
            outputs, units = cmd_linkbudget(cfg)
            text = json_document(command, inputs, outputs, units) if fmt == "json" else _kv_csv(outputs, units)
            _emit(text, out)
        elif command == "pie":
            outputs, units = cmd_pie(cfg)
            text = json_document(command, inputs, outputs, units) if fmt == "json" else _kv_csv(outputs, units)
            _emit(text, out)
        elif command == "sweep":
            start = time.perf_counter()
            table = cmd_sweep(cfg)
            elapsed = time.perf_counter() - start
            if fmt == "json":
                rows = read_sweep_csv(sweep_csv(table))
                units = {"n_s": "photons/slot", "noise": "photons/slot", "pie": "bits/photon",
                         "nf_star": "photons", "m_star": "slots"}
                _emit(json_document(command, inputs, {"rows": rows}, units), out)
            else:
                _emit(sweep_csv(table), out)
            if cfg["matrices"]:
                if out is None:
                    raise UsageError("--matrices needs --out")
                stem = Path(out).with_suffix("")
                for attr in ("pie", "nf_star", "m_star"):
                    _emit(matrix_csv(table, attr), f"{stem}_{attr}.csv")
            print(f"{table.model.value}: {table.ns_grid.size}x{table.noise_grid.size} cells "
                  f"in {elapsed:.1f} s", file=sys.stderr)
        elif command == "table2":
            rows, pies = cmd_table2(cfg)
            provenance = "expected_mbps: " + refdata.EXPECTED_RATE_SOURCE
            if cfg["include_sif_day"]:
                provenance += "; sif_dd_day_mbps: not published; computed here only"
            if fmt == "json":
                units = {"flux_phps": "photons/s", "distance_au": "au", "pies": "bits/photon",
                         "*_mbps": "Mbit/s"}
                _emit(json_document(command, inputs, {"rows": rows, "pies": pies}, units, provenance), out)
            else:
                _emit(_rows_csv(rows), out)
                print(provenance, file=sys.stderr)
        elif command == "mc-validate":
            checks = cmd_mc_validate(cfg)
            failed = [c for c in checks if not c.passed]
            if fmt == "json":
                outputs = {
                    "checks": [dict(name=c.name, analytic=c.analytic, empirical=c.empirical,
                                    std_err=c.std_err, z=c.z, passed=c.passed) for c in checks],
                    "passed": not failed,
                }
                _emit(json_document(command, inputs, outputs, {"z": "standard errors"}), out)
            else:
                lines = [f"{c.name}: analytic={c.analytic:.10g} empirical={c.empirical:.10g} "
                         f"se={c.std_err:.3g} z={c.z:+.3f} {'PASS' if c.passed else 'FAIL'}"
                         for c in checks]
                lines.append("RESULT: " + ("PASS" if not failed else
                                           "FAIL (" + ", ".join(c.name for c in failed) + ")"))
                _emit("\n".join(lines) + "\n", out)
            return 1 if failed else 0
    except UsageError as exc:
        parser.exit(2, f"{TOOL} {command}: error: {exc}\n")
    except ValueError as exc:
        parser.exit(2, f"{TOOL} {command}: error: {exc}\n")
    except ArithmeticError as exc:
        print(f"{TOOL} {command}: analysis failed: {exc}", file=sys.stderr)
        return 1
    return 0


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
