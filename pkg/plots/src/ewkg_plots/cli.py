"""Command entry: ewkg-render <plot_kind> <input_csv> <output_image>."""

import sys

from .render import PLOT_KINDS, PlotJob, SchemaError, render


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) != 3:
        print(f"usage: ewkg-render <{'|'.join(PLOT_KINDS)}> <input_csv> <output_image>",
              file=sys.stderr)
        return 2
    kind, csv_path, image_path = argv
    try:
        render(PlotJob(input_csv=csv_path, plot_kind=kind, output_image=image_path))
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
