import logging
import sys

from shiftforge.cli import build_parser, dispatch


def main():
    parser = build_parser()
    args = parser.parse_args()
    # reports go to stdout; progress lines stay on stderr
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format='%(message)s',
        stream=sys.stderr,
    )
    sys.exit(dispatch(args))


if __name__ == '__main__':
    main()
