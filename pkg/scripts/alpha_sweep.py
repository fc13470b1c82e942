"""Accuracy on the four-distortion panel across watermark strengths."""
from _common import base_config, finish, outputs, parser

from vidmark.bench import panel_mean, sweep_alpha


def main():
    p = parser(__doc__)
    p.add_argument("--psnr", default="36,36.75,37.5,38.25,39", help="comma-separated PSNR targets (dB)")
    p.add_argument("--alpha", help="comma-separated alpha values (overrides --psnr)")
    args = p.parse_args()
    if args.alpha:
        over = {"alpha": [float(a) for a in args.alpha.split(",")]}
    else:
        over = {"alpha": None, "psnr_target": [float(t) for t in args.psnr.split(",")]}
    report = sweep_alpha(base_config(args, outputs=outputs(args, "alpha"), **over))
    finish(report, "alpha", args.out)
    for method in dict.fromkeys(r["method"] for r in report.rows):
        q = [r["psnr"] for r in report.rows if r["method"] == method]
        print(f"{method:24s} psnr {sum(q) / len(q):6.2f} dB  panel acc {100 * panel_mean(report, method):6.2f}%")


if __name__ == "__main__":
    main()
