"""Accuracy on the four-distortion panel across payload sizes at a fixed PSNR."""
from _common import base_config, finish, outputs, parser

from vidmark.bench import panel_mean, sweep_payload


def main():
    p = parser(__doc__)
    p.add_argument("--payload", default="32,64,96,128,192", help="comma-separated bit counts")
    p.add_argument("--psnr", type=float, default=37.0)
    args = p.parse_args()
    payloads = [int(m) for m in args.payload.split(",")]
    cfg = base_config(args, payload=payloads, psnr_target=[args.psnr], outputs=outputs(args, "payload"))
    report = sweep_payload(cfg)
    finish(report, "payload", args.out)
    method = report.rows[0]["method"]
    for m in payloads:
        print(f"m={m:4d}  panel acc {100 * panel_mean(report, method, m):6.2f}%")


if __name__ == "__main__":
    main()
