"""Detector-filtered vs unfiltered decoding of a watermarked patch edited into longer footage."""
from _common import base_config, finish, outputs, parser

from vidmark.bench import EditingSpec, editing_gaps, run_editing_app


def main():
    p = parser(__doc__)
    p.add_argument("--lengths", default="60,120,240,360,720", help="background lengths in frames")
    p.add_argument("--trials", type=int, default=8)
    p.add_argument("--control", action="store_true", help="also run backgrounds with no inserted source")
    args = p.parse_args()
    editing = EditingSpec(lengths=[int(t) for t in args.lengths.split(",")], trials=args.trials, control=args.control)
    report = run_editing_app(base_config(args, editing=editing, outputs=outputs(args, "editing")))
    finish(report, "editing", args.out)
    for t_bg, gap in editing_gaps(report).items():
        print(f"T={t_bg:4d}  filtered - unfiltered = {gap:6.1f} pts")


if __name__ == "__main__":
    main()
