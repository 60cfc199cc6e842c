#!/usr/bin/env python
import configparser
import logging
import sys
import time

from src import commands
from src.configuration import load_config
from src.fileformats import render_report
from src.graph import InvalidArgument, ResourceLimit
from src.kernel import DegenerateInput

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FALSE = 1
EXIT_INPUT = 2
EXIT_RESOURCE = 3


def configure_logging(args):
    level = logging.INFO
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    logging.basicConfig(stream=sys.stderr, level=level, format="> %(message)s", force=True)


def main(argv=None):
    parser = commands.build_parser()
    args = parser.parse_args(argv)
    configure_logging(args)

    try:
        cfg = load_config(args.config)
        settings = commands.settings_from_config(cfg, args)

        start = time.perf_counter()
        payload, code = args.handler(args, settings)
        elapsed = time.perf_counter() - start
        log.info(f"{args.command} finished in {elapsed:.3f} s")
        if args.timing:
            payload['timing'] = {'seconds': round(elapsed, 6)}
    except ResourceLimit as e:
        log.error(f"Resource limit: {e}")
        return EXIT_RESOURCE
    except (InvalidArgument, DegenerateInput, OSError, configparser.Error) as e:
        log.error(f"Error: {e}")
        return EXIT_INPUT
    except Exception:
        log.exception("Unexpected error")
        return EXIT_INPUT

    sys.stdout.write(render_report(payload))
    return code


if __name__ == '__main__':
    sys.exit(main())
