"""Accuracy on the four-distortion panel across clip lengths and resolutions."""
from _common import base_config, finish, outputs, parser

from vidmark.bench import panel_mean, sweep_dimensions


def main():
    p = parser(__doc__)
    p.add_argument("--lengths", default="8,16,32,64")
    p.add_argument("--resolutions", default="128x128,240x462,480x864")
    p.add_argument("--psnr", type=float, default=37.0)
    args = p.parse_args()
    res = [[int(x) for x in r.split("x")] for r in args.resolutions.split(",")]
    cfg = base_config(
        args,
        lengths=[int(t) for t in args.lengths.split(",")],
        resolutions=res,
        psnr_target=[args.psnr],
        outputs=outputs(args, "dims"),
    )
    report = sweep_dimensions(cfg)
    finish(report, "dims", args.out)
    for method in dict.fromkeys(r["method"] for r in report.rows):
        print(f"{method:36s} panel acc {100 * panel_mean(report, method):6.2f}%")


if __name__ == "__main__":
    main()
