"""Command-line front end.

Examples::

    gausscap capacity --channel loss --strength 0.5 --nbar 3 --protocol squeezed
    gausscap sweep --channel loss --nbar 3 --axis strength --from 0 --to 1 --steps 101
    gausscap region --channel loss --nth 1 --strength-steps 200 --nbar-to 20
    gausscap efficiency --channel loss --strength 0.7 --nbar-from 0.01 --nbar-to 100
    gausscap critical-n --nth 1
    gausscap number-state --strength 0.7 --nbar 3
"""

from __future__ import annotations

import argparse
import contextlib
import datetime
import math
import shlex
import sys

import numpy as np

from . import __version__
from .gaussian_core import ChannelKind, ChannelParams, DomainError
from .general import optimal_gaussian_capacity
from .holevo import GaussianEnsemble, holevo_bound, holevo_quantity
from .number_state import ConvergenceError, number_state_capacity
from .protocols import (
    UnsupportedProtocolError,
    coarse_grained_coherent_capacity,
    coherent_capacity,
    coherent_single_quadrature_capacity,
    critical_photon_number,
    squeezed_capacity,
)
from .sweeps import (
    PROTOCOLS,
    SweepSpec,
    check_supported,
    efficiency_rows,
    format_csv,
    format_number,
    region_critical_n,
    region_rows,
    sweep_rows,
    usable_protocols,
)

EXIT_OK, EXIT_USAGE, EXIT_CONVERGENCE = 0, 2, 3


class UsageError(Exception):
    pass


def _protocol_list(text: str) -> list[str]:
    names = [p.strip() for p in text.split(",") if p.strip()]
    unknown = [p for p in names if p not in PROTOCOLS]
    if unknown:
        raise argparse.ArgumentTypeError(f"unknown protocol(s): {', '.join(unknown)}")
    if not names:
        raise argparse.ArgumentTypeError("empty protocol list")
    return names


def _common(p: argparse.ArgumentParser, strength=True, nbar=True) -> None:
    p.add_argument("--channel", choices=[k.value for k in ChannelKind], default="loss")
    if strength:
        p.add_argument("--strength", type=float, help="transmissivity (loss) or gain (amp)")
    p.add_argument("--nth", type=float, default=0.0, help="thermal photons of the environment")
    if nbar:
        p.add_argument("--nbar", type=float, help="mean photon number per channel use")
    p.add_argument("--out", help="write output to FILE instead of standard output")
    p.add_argument("--reproducible", action="store_true", help="omit the timestamp from metadata")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gausscap", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("capacity", help="capacity of one protocol at one point")
    _common(p)
    p.add_argument("--protocol", choices=list(PROTOCOLS), required=True)
    p.add_argument("--w", type=float, default=None,
                   help="heterodyne variance factor (>1 coarse-grained; coherent protocol on amp only)")

    p = sub.add_parser("sweep", help="capacities along one parameter axis (CSV)")
    _common(p)
    p.add_argument("--axis", choices=["strength", "nbar"], default="strength")
    p.add_argument("--from", dest="start", type=float, required=True)
    p.add_argument("--to", dest="stop", type=float, required=True)
    p.add_argument("--steps", type=int, default=101)
    p.add_argument("--scale", choices=["linear", "log"], default="linear")
    p.add_argument("--protocols", type=_protocol_list, default=list(PROTOCOLS))
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("region", help="C_coh - C_sq over a (strength, nbar) grid (CSV)")
    _common(p, strength=False, nbar=False)
    p.add_argument("--strength-from", type=float)
    p.add_argument("--strength-to", type=float)
    p.add_argument("--strength-steps", type=int, default=101)
    p.add_argument("--nbar-from", type=float, default=0.0)
    p.add_argument("--nbar-to", type=float, default=20.0)
    p.add_argument("--nbar-steps", type=int, default=101)

    p = sub.add_parser("efficiency", help="photon information efficiency C/nbar (CSV)")
    _common(p, nbar=False)
    p.add_argument("--nbar-from", type=float, required=True)
    p.add_argument("--nbar-to", type=float, required=True)
    p.add_argument("--steps", type=int, default=41)
    p.add_argument("--scale", choices=["linear", "log"], default="log")
    p.add_argument("--protocols", type=_protocol_list,
                   default=["holevo-bound", "gaussian-opt", "coherent", "squeezed", "number-state",
                            "coherent-homodyne"])
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("critical-n", help="photon number below which squeezing always wins under loss")
    p.add_argument("--nth", type=float, default=0.0)
    p.add_argument("--out")
    p.add_argument("--reproducible", action="store_true")

    p = sub.add_parser("number-state", help="number-state capacity on the pure-loss channel")
    _common(p)
    p.add_argument("--cutoff", type=int, default=None, help="photon-number cutoff (default 8*max(nbar,1)+40)")
    p.add_argument("--tol", type=float, default=1e-7, help="tolerance on the mean photon number")
    p.add_argument("--max-iter", type=int, default=100_000)
    return parser


def _channel(args, strength=None) -> ChannelParams:
    value = args.strength if strength is None else strength
    if value is None:
        raise UsageError("--strength is required")
    return ChannelParams(ChannelKind(args.channel), value, args.nth)


def _require(args, *names):
    for name in names:
        if getattr(args, name) is None:
            raise UsageError(f"--{name.replace('_', '-')} is required")


def _meta(args, argv) -> list[str]:
    meta = [f"gausscap {__version__}", "command: gausscap " + shlex.join(argv)]
    if not args.reproducible:
        meta.append("generated: " + datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds"))
    return meta


@contextlib.contextmanager
def _output(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def cmd_capacity(args, argv) -> str:
    _require(args, "nbar")
    ch = _channel(args)
    name = args.protocol
    try:
        check_supported(name, ch)
    except UnsupportedProtocolError as exc:
        raise UsageError(f"unsupported protocol/channel pair: {name} with channel '{args.channel}'"
                         f" (nth={args.nth:g}): {exc}") from exc
    if args.w is not None and name != "coherent":
        raise UsageError("--w applies to the coherent protocol only")
    nbar = args.nbar
    if nbar < 0:
        raise UsageError("--nbar must be >= 0")

    params: dict = {}
    if name == "coherent":
        if args.w is not None:
            try:
                res = coarse_grained_coherent_capacity(ch, nbar, args.w)
            except UnsupportedProtocolError as exc:
                raise UsageError(f"unsupported protocol/channel pair: coarse-grained coherent with "
                                 f"channel '{args.channel}'") from exc
        else:
            res = coherent_capacity(ch, nbar)
        bits, params = res.bits, res.params
    elif name == "coherent-homodyne":
        res = coherent_single_quadrature_capacity(ch, nbar)
        bits, params = res.bits, res.params
    elif name == "squeezed":
        res = squeezed_capacity(ch, nbar)
        bits, params = res.bits, dict(res.params, exp_2r_opt=math.exp(2 * res.params["r_opt"]))
    elif name == "gaussian-opt":
        res = optimal_gaussian_capacity(ch, nbar)
        bits, params = res.bits, dict(res.params, winner=res.protocol.value)
    elif name == "number-state":
        if nbar == 0 or ch.strength == 0:
            bits = 0.0
        else:
            res = number_state_capacity(ch.strength, nbar)
            bits = res.bits
            params = {"lagrange_multiplier": res.params["lagrange_multiplier"],
                      "energy": res.params["energy"], "cutoff": res.params["cutoff"]}
    elif name == "holevo-quantity-coherent":
        bits = holevo_quantity(ch, GaussianEnsemble.coherent(nbar))
    elif name == "holevo-quantity-squeezed":
        ens = GaussianEnsemble.squeezed(ch, nbar)
        bits = holevo_quantity(ch, ens)
        params = {"r_opt": math.asinh(math.sqrt(max(nbar - ens.enc_x2 / 2, 0.0))), "sigma_x2": ens.enc_x2}
    else:
        bits = holevo_bound(ch, nbar)

    if nbar == 0:
        bits = 0.0
    lines = [
        f"protocol: {name}",
        f"channel: {args.channel} strength={format_number(ch.strength)} nth={format_number(ch.n_th)}",
        f"nbar: {format_number(nbar)}",
        f"capacity_bits: {format_number(bits)}",
    ]
    for key, value in (params or {}).items():
        lines.append(f"{key}: {value if isinstance(value, str) else format_number(value)}")
    return "\n".join(lines) + "\n"


def _sweep_spec(args, axis, start, stop, steps, scale, protocols) -> SweepSpec:
    kind = ChannelKind(args.channel)
    if axis == "strength":
        _require(args, "nbar")
        fixed = args.nbar
    else:
        _require(args, "strength")
        fixed = args.strength
    return SweepSpec(kind, args.nth, axis, start, stop, steps, scale, fixed, tuple(protocols))


def _filter_protocols(spec: SweepSpec, protocols):
    probe = spec.channel(spec.start if spec.axis == "strength" else spec.fixed)
    keep, dropped = usable_protocols(protocols, probe)
    for reason in dropped:
        print(f"gausscap: warning: omitting column: {reason}", file=sys.stderr)
    return keep


def cmd_sweep(args, argv) -> str:
    spec = _sweep_spec(args, args.axis, args.start, args.stop, args.steps, args.scale, args.protocols)
    protocols = _filter_protocols(spec, args.protocols)
    rows = sweep_rows(spec, protocols, jobs=args.jobs)
    meta = _meta(args, argv) + [
        f"axis: {spec.axis}",
        f"channel: {args.channel} nth={format_number(args.nth)} "
        + (f"nbar={format_number(spec.fixed)}" if spec.axis == "strength" else f"strength={format_number(spec.fixed)}"),
    ]
    return format_csv(["axis", *protocols], rows, meta)


def cmd_region(args, argv) -> str:
    kind = ChannelKind(args.channel)
    s_from = args.strength_from if args.strength_from is not None else (0.0 if kind is ChannelKind.LOSS else 1.0)
    s_to = args.strength_to if args.strength_to is not None else (1.0 if kind is ChannelKind.LOSS else 10.0)
    for steps in (args.strength_steps, args.nbar_steps):
        if steps < 2:
            raise UsageError("grid sizes must be >= 2")
    if not (s_from < s_to and args.nbar_from < args.nbar_to):
        raise UsageError("ranges must satisfy from < to")
    strengths = np.linspace(s_from, s_to, args.strength_steps)
    nbars = np.linspace(args.nbar_from, args.nbar_to, args.nbar_steps)
    rows = region_rows(kind, args.nth, strengths, nbars)
    meta = _meta(args, argv) + [f"channel: {args.channel} nth={format_number(args.nth)}"]
    n_c = region_critical_n(kind, args.nth)
    if n_c is not None:
        meta.append(f"n_c: {format_number(n_c)}")
    return format_csv(["strength", "nbar", "delta"], rows, meta)


def cmd_efficiency(args, argv) -> str:
    if args.nbar_from <= 0:
        raise UsageError("--nbar-from must be > 0 (efficiency divides by nbar)")
    spec = _sweep_spec(args, "nbar", args.nbar_from, args.nbar_to, args.steps, args.scale, args.protocols)
    protocols = _filter_protocols(spec, args.protocols)
    rows = efficiency_rows(spec, protocols, jobs=args.jobs)
    meta = _meta(args, argv) + [
        "units: bits per photon",
        f"channel: {args.channel} strength={format_number(spec.fixed)} nth={format_number(args.nth)}",
    ]
    return format_csv(["nbar", *protocols], rows, meta)


def cmd_critical_n(args, argv) -> str:
    if args.nth < 0:
        raise UsageError("--nth must be >= 0")
    return f"n_c: {format_number(critical_photon_number(args.nth))}\n"


def cmd_number_state(args, argv) -> str:
    _require(args, "nbar")
    ch = _channel(args)
    try:
        check_supported("number-state", ch)
    except UnsupportedProtocolError as exc:
        raise UsageError(f"unsupported protocol/channel pair: number-state with channel "
                         f"'{args.channel}' (nth={args.nth:g})") from exc
    if args.nbar < 0:
        raise UsageError("--nbar must be >= 0")
    lines = [f"channel: loss strength={format_number(ch.strength)} nth=0",
             f"nbar: {format_number(args.nbar)}"]
    if args.nbar == 0 or ch.strength == 0:
        lines.append("capacity_bits: 0")
        return "\n".join(lines) + "\n"
    res = number_state_capacity(ch.strength, args.nbar, n_cut=args.cutoff, tol=args.tol, max_iter=args.max_iter)
    prior = res.params["prior"]
    lines += [
        f"cutoff: {res.params['cutoff']}",
        f"capacity_bits: {format_number(res.bits)}",
        f"lagrange_multiplier: {format_number(res.params['lagrange_multiplier'])}",
        f"mean_photon_number: {format_number(res.params['energy'])}",
        f"certified_gap_bits: {format_number(res.params['gap'])}",
        "prior: " + " ".join(format_number(p) for p in prior[prior > 1e-9]),
    ]
    return "\n".join(lines) + "\n"


COMMANDS = {
    "capacity": cmd_capacity,
    "sweep": cmd_sweep,
    "region": cmd_region,
    "efficiency": cmd_efficiency,
    "critical-n": cmd_critical_n,
    "number-state": cmd_number_state,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        text = COMMANDS[args.command](args, argv)
    except (UsageError, UnsupportedProtocolError, DomainError) as exc:
        print(f"gausscap {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceError as exc:
        print(f"gausscap {args.command}: convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    with _output(args.out) as fh:
        fh.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
