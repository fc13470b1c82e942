"""Bit accuracy per distortion at a tuned PSNR (the main robustness table)."""
from _common import base_config, finish, outputs, parser

from vidmark.bench import run_matrix


def main():
    p = parser(__doc__)
    p.add_argument("--psnr", type=float, default=37.0)
    p.add_argument("--repeats", type=int, default=1)
    args = p.parse_args()
    cfg = base_config(args, psnr_target=[args.psnr], alpha=None, repeats=args.repeats, outputs=outputs(args, "table"))
    report = run_matrix(cfg)
    finish(report, "table", args.out)
    if report.notes["codec_skipped"]:
        print(f"{report.notes['codec_skipped']} codec cells skipped (no encoder)")


if __name__ == "__main__":
    main()
