"""Command-line front end.

Every report is line-oriented ``key=value`` text on stdout.  Exit codes:
0 success, 1 usage error (bad flags, unreadable files), 2 format or
domain error.
"""
from __future__ import annotations

import argparse
import sys

from . import codec
from .container import MODE_QZIP, parse_container
from .errors import DomainError, QpegError
from .imageio import read_pgm, write_pgm
from .mps import bond_entropies, rank_ceiling, schmidt_spectrum, uniform_parameter_count
from .rgmap import AddressScheme, image_to_ket
from .transform import dct2

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FORMAT = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _fmt(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return f"{value:.10g}"
    return str(value)


def _emit(out, **pairs) -> None:
    for key, value in pairs.items():
        print(f"{key}={_fmt(value)}", file=out)


def _read(path, mode="rb") -> bytes:
    try:
        with open(path, mode) as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from exc


def _write(path, data: bytes) -> None:
    try:
        with open(path, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _load_image(path):
    return read_pgm(_read(path))


def cmd_compress(args, out) -> int:
    grid = _load_image(args.input)
    if args.lossless:
        if args.levels is None:
            scheme = AddressScheme.for_side(grid.width, args.branch)
        else:
            scheme = AddressScheme(args.branch, args.levels)
        container = codec.qzip_encode(grid, scheme)
    else:
        config = codec.QpegConfig(
            b=args.branch,
            n=4 if args.levels is None else args.levels,
            chi_trunc=args.chi,
            use_dct=not args.no_dct,
            level_shift=not args.no_shift,
            quant_step=args.quant,
            max_sweeps=args.sweeps,
            rel_tol=args.tol,
        )
        container = codec.qpeg_encode(grid, config, workers=args.workers)
    data = container.to_bytes()
    _write(args.output, data)
    metrics = codec.psnr(grid, codec.decode(data), stored_bits=8 * len(data))
    _emit(
        out,
        mode="qzip" if container.mode == MODE_QZIP else "qpeg",
        stored_bits=metrics.stored_bits,
        bits_per_pixel=metrics.bits_per_pixel,
        mse=metrics.mse,
        psnr_db=metrics.psnr_db,
    )
    return EXIT_OK


def cmd_decompress(args, out) -> int:
    image = codec.decode(_read(args.input), workers=args.workers)
    _write(args.output, write_pgm(image))
    _emit(out, width=image.width, height=image.height)
    return EXIT_OK


def cmd_info(args, out) -> int:
    data = _read(args.input)
    c = parse_container(data)
    _emit(
        out,
        magic="QPG1",
        version=c.version,
        mode="qzip" if c.mode == MODE_QZIP else "qpeg",
        width=c.width,
        height=c.height,
        b=c.b,
        n=c.n,
        d=c.d,
        box_side=c.box_side,
        box_rows=c.box_rows,
        box_cols=c.box_cols,
        dct=c.use_dct,
        level_shift=c.level_shift,
        quantized=c.quantized,
        quant_step=c.quant_step,
        boxes=len(c.boxes),
    )
    actual_total = 0
    uniform = []
    for k, box in enumerate(c.boxes):
        bonds = [1] + list(box.bonds) + [1]
        actual = sum(l * dd * r for (l, dd, r) in c.site_shapes(box))
        uni = uniform_parameter_count(c.n, c.d, max(bonds))
        actual_total += actual
        uniform.append(uni)
        print(f"box.{k}.scale={_fmt(box.scale)}", file=out)
        print(f"box.{k}.bonds={','.join(map(str, bonds))}", file=out)
        print(f"box.{k}.actual_reals={actual}", file=out)
        print(f"box.{k}.uniform_reals={uni}", file=out)
    stored_bits = 8 * len(data)
    _emit(
        out,
        uniform_reals_per_box=max(uniform),
        actual_reals=actual_total,
        payload_bytes=len(c.payload),
        stored_bits=stored_bits,
        bits_per_pixel=stored_bits / (c.width * c.height),
    )
    return EXIT_OK


def cmd_psnr(args, out) -> int:
    m = codec.psnr(_load_image(args.first), _load_image(args.second))
    _emit(out, mse=m.mse, psnr_db=m.psnr_db)
    return EXIT_OK


def cmd_entropy(args, out) -> int:
    grid = _load_image(args.input)
    if grid.width != grid.height:
        raise DomainError(f"entropy needs a square image, got {grid.width}x{grid.height}")
    if args.levels is None:
        scheme = AddressScheme.for_side(grid.width, args.branch)
    else:
        scheme = AddressScheme(args.branch, args.levels)
    values = grid.pixels.astype(float)
    if args.dct:
        values = dct2(values - codec.LEVEL_SHIFT)
    ket = image_to_ket(values, scheme)
    _emit(out, b=scheme.b, n=scheme.n, d=scheme.d)
    for a, s in enumerate(bond_entropies(ket), start=1):
        rank = schmidt_spectrum(ket, a).rank()
        print(f"cut.{a}.entropy={_fmt(s)}", file=out)
        print(f"cut.{a}.rank={rank}", file=out)
        print(f"cut.{a}.ceiling={rank_ceiling(scheme, a + 1)}", file=out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qpeg", description="Tensor-network (MPS) image codec.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("compress", help="PGM -> .qpg")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--chi", type=int, default=4, help="bond dimension cap (default 4)")
    p.add_argument("--branch", "-b", type=int, default=2, help="branching factor per axis")
    p.add_argument("--levels", "-n", type=int, default=None,
                   help="address levels; box side is branch**levels (default 4, or inferred with --lossless)")
    p.add_argument("--no-dct", action="store_true")
    p.add_argument("--no-shift", action="store_true")
    p.add_argument("--quant", type=float, default=0.0, help="uniform quantizer step for tensor entries")
    p.add_argument("--lossless", action="store_true", help="qzip mode: exact MPS of one b**n box")
    p.add_argument("--sweeps", type=int, default=50, help="maximum ALS sweeps")
    p.add_argument("--tol", type=float, default=1e-8, help="ALS relative decrease threshold")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_compress)

    p = sub.add_parser("decompress", help=".qpg -> PGM")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_decompress)

    p = sub.add_parser("info", help="print container header and bond profiles")
    p.add_argument("input")
    p.set_defaults(func=cmd_info)

    p = sub.add_parser("psnr", help="MSE and PSNR between two PGMs")
    p.add_argument("first")
    p.add_argument("second")
    p.set_defaults(func=cmd_psnr)

    p = sub.add_parser("entropy", help="per-cut Schmidt entropies of an image")
    p.add_argument("input")
    p.add_argument("--branch", "-b", type=int, default=2)
    p.add_argument("--levels", "-n", type=int, default=None)
    p.add_argument("--dct", action="store_true", help="level-shift and DCT before casting")
    p.set_defaults(func=cmd_entropy)
    return parser


def run(argv=None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    try:
        args = build_parser().parse_args(argv)
        return args.func(args, out)
    except UsageError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_USAGE
    except QpegError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_FORMAT


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
