"""Command-line entry point (``btw``).

Exit codes: 0 success, 2 usage or parameter error, 3 file format error,
4 numeric contract violation. Errors go to stderr as one line of JSON.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .attention import disparity, energy
from .errors import (BtwError, FormatError, InvalidParameterError, InvalidShapeError,
                     NumericContractError, SymmetryError)
from .fourier import BandMask, band_energies, scale_bands, scale_high
from .harness import (PATTERNS, energy_motion_sweep, gen_video, reconstruct,
                      temporal_variation, toy_temporal_attention)
from .pipeline import ENERGY_TOL, PRESETS, BtwParams, apply_block, preset
from .tensor_io import load_map, read_tensor, save_map, write_tensor

EXIT_OK, EXIT_USAGE, EXIT_FORMAT, EXIT_NUMERIC = 0, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _pair(text, sep, kind=float):
    try:
        a, b = text.lower().split(sep)
        return kind(a), kind(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected two values separated by {sep!r}, got {text!r}")


def _velocity_list(text):
    out = []
    for item in text.split(","):
        item = item.strip()
        try:
            out.append(_pair(item, ":") if ":" in item else (float(item), 0.0))
        except (ValueError, argparse.ArgumentTypeError):
            raise argparse.ArgumentTypeError(f"bad velocity {item!r}")
    return out


def build_parser():
    p = _Parser(prog="btw", description="Temporal attention self-guidance and motion enhancement.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    t = sub.add_parser("transform", help="apply self-guidance and high-band scaling to one block")
    t.add_argument("--guided", required=True)
    t.add_argument("--anchor", required=True)
    t.add_argument("--out", required=True)
    t.add_argument("--preset", choices=sorted(PRESETS))
    t.add_argument("--alpha", type=float)
    t.add_argument("--beta0", type=float)
    t.add_argument("--tau", type=int)
    t.add_argument("--upsample", choices=("bilinear", "nearest"))
    t.add_argument("--report")

    e = sub.add_parser("energy", help="print energy, optionally split into bands")
    e.add_argument("input")
    e.add_argument("--tau", type=int)

    d = sub.add_parser("disparity", help="print mean per-site distance between two maps")
    d.add_argument("a")
    d.add_argument("b")

    s = sub.add_parser("synth", help="write a synthetic moving-pattern video")
    s.add_argument("--pattern", choices=PATTERNS, default="sinusoidal_grating")
    s.add_argument("--velocity", type=lambda x: _pair(x, ","), default=(1.0, 0.0))
    s.add_argument("--frames", type=int, default=16)
    s.add_argument("--size", type=lambda x: _pair(x, "x", int), default=(64, 64))
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)

    w = sub.add_parser("sweep", help="flow magnitude vs attention energy over velocities")
    w.add_argument("--pattern", choices=PATTERNS, default="sinusoidal_grating")
    w.add_argument("--velocities", type=_velocity_list, default=_velocity_list("0,1,2,3,4"))
    w.add_argument("--frames", type=int, default=16)
    w.add_argument("--size", type=lambda x: _pair(x, "x", int), default=(64, 64))
    w.add_argument("--seed", type=int, default=0)
    w.add_argument("--temperature", type=float, default=0.2)
    w.add_argument("--patch-radius", type=int, default=1)
    w.add_argument("--report", required=True)

    a = sub.add_parser("ablate", help="reconstruct a video through band-filtered attention")
    a.add_argument("--mode", choices=("lowpass", "highpass"), required=True)
    a.add_argument("--tau", type=int, default=7)
    a.add_argument("--in", dest="input", required=True)
    a.add_argument("--temperature", type=float, default=0.2)
    a.add_argument("--patch-radius", type=int, default=1)
    a.add_argument("--out")
    a.add_argument("--report", required=True)
    return p


def _write_json(path, doc):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def _report(command, **fields):
    return {"tool": "bytheway", "version": __version__, "command": command, **fields}


def cmd_transform(args):
    params = preset(args.preset) if args.preset else BtwParams()
    params = params.with_overrides(alpha=args.alpha, beta0=args.beta0, tau=args.tau,
                                   upsample=args.upsample)
    guided, anchor = load_map(args.guided), load_map(args.anchor)
    params.band(guided.frames)  # fail early on tau before any work
    out, trace = apply_block(guided, anchor, params)
    if trace.energy_guaranteed and trace.e3 < trace.e1 - ENERGY_TOL:
        raise NumericContractError(f"energy fell from {trace.e1} to {trace.e3}")
    save_map(args.out, out)
    if args.report:
        _write_json(args.report, _report("transform", params=params.as_dict(),
                                         blocks=[trace.as_dict()]))
    print(json.dumps(trace.as_dict()))


def cmd_energy(args):
    amap = load_map(args.input)
    if args.tau is None:
        doc = {"total": energy(amap)}
    else:
        doc = band_energies(amap, BandMask(args.tau, amap.frames)).as_dict()
    print(json.dumps(doc))


def cmd_disparity(args):
    print(json.dumps({"disparity": disparity(load_map(args.a), load_map(args.b))}))


def cmd_synth(args):
    H, W = args.size
    video = gen_video(args.pattern, H, W, args.frames, args.velocity, args.seed)
    write_tensor(args.out, video.frames, {
        "pattern": video.pattern, "velocity": list(video.velocity), "seed": args.seed})


def cmd_sweep(args):
    result = energy_motion_sweep(args.velocities, args.pattern, args.seed, args.size,
                                 args.frames, args.patch_radius, args.temperature)
    _write_json(args.report, _report("sweep", data_source="synthetic", pattern=args.pattern,
                                     seed=args.seed, size=list(args.size), frames=args.frames,
                                     **result.as_dict()))
    print(json.dumps({"spearman": result.spearman}))


def cmd_ablate(args):
    frames, _ = read_tensor(args.input)
    frames = np.asarray(frames, dtype=np.float64)
    if frames.ndim != 3:
        raise InvalidShapeError(f"video must have shape (F, H, W), got {frames.shape}")
    amap = toy_temporal_attention(frames, args.patch_radius, args.temperature)
    mask = BandMask(args.tau, amap.frames)
    if args.mode == "lowpass":
        filtered = scale_high(amap, 0.0, mask)
    else:
        filtered = scale_bands(amap, mask, high=1.0, low=0.0)
    base = reconstruct(amap, frames)
    recon = reconstruct(filtered, frames)
    if args.out:
        write_tensor(args.out, recon)
    doc = _report("ablate", data_source="synthetic", mode=args.mode, tau=args.tau,
                  temporal_variation={"input": temporal_variation(frames),
                                      "original": temporal_variation(base),
                                      "filtered": temporal_variation(recon)})
    _write_json(args.report, doc)
    print(json.dumps(doc["temporal_variation"]))


COMMANDS = {"transform": cmd_transform, "energy": cmd_energy, "disparity": cmd_disparity,
            "synth": cmd_synth, "sweep": cmd_sweep, "ablate": cmd_ablate}


def _fail(code, kind, exc):
    sys.stderr.write(json.dumps({"error": kind, "message": str(exc), "exit_code": code}) + "\n")
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        COMMANDS[args.command](args)
    except UsageError as exc:
        return _fail(EXIT_USAGE, "usage", exc)
    except FormatError as exc:
        return _fail(EXIT_FORMAT, "format", exc)
    except (NumericContractError, SymmetryError) as exc:
        return _fail(EXIT_NUMERIC, "numeric", exc)
    except (InvalidParameterError, InvalidShapeError) as exc:
        return _fail(EXIT_USAGE, "parameter", exc)
    except BtwError as exc:
        return _fail(EXIT_NUMERIC, "numeric", exc)
    except OSError as exc:
        return _fail(EXIT_FORMAT, "io", exc)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
