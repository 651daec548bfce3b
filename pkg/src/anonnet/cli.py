"""Command-line entry point: ``anonnet [global flags] COMMAND``.

Exit codes: 0 success, 1 usage or config error, 2 data error,
3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .classifier import ClassifierError
from .config import ConfigError, load_config
from .features import FEATURE_SCHEMA
from .ingest import DataError
from .netgraph import ConvergenceError, GraphError, SnowballError
from .pipeline import COMMANDS, run_command
from .topics import LDAError

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3

log = logging.getLogger("anonnet")


HELP = {
    "filter": "keep profiles whose names carry an affiliation keyword",
    "label": "apply the positive labelling rule to filtered candidates",
    "train": "fit the classifier on labelled profiles",
    "evaluate": "cross-validate forest and single tree",
    "classify": "score every snapshot profile with the trained model",
    "expand": "two-stage snowball expansion from the configured seeds",
    "graph": "build the follow graph over the expanded network",
    "centrality": "degree, eigenvector, PageRank and betweenness scores",
    "rank": "fused ranking and top-k table",
    "temporal": "creation and last-tweet year histograms",
    "subgraph": "Gephi node/edge CSVs for the top-k accounts",
    "topics": "per-account LDA with a coherence sweep over K",
    "report": "markdown summary of the run",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="anonnet", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="pipeline config file (.json or .yaml)")
    parser.add_argument("--seed", type=int, help="global seed; overrides config")
    parser.add_argument("--workers", type=int, help="cap on worker processes; overrides config")
    parser.add_argument("--output-dir", help="artifact directory; overrides config")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sub.add_parser(name, help=HELP.get(name))
    sub.add_parser("schema", help="print the 62 feature names in vector order")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")

    if args.command == "schema":
        for i, spec in enumerate(FEATURE_SCHEMA):
            print(f"{i}\t{spec.name}\t{spec.source}\t{spec.kind}")
        return EXIT_OK

    try:
        overrides = {
            "seed": args.seed,
            "workers": args.workers,
            "output_dir": str(Path(args.output_dir).resolve()) if args.output_dir else None,
        }
        config = load_config(args.config, overrides)
        result = run_command(args.command, config)
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except ConvergenceError as exc:
        log.error("%s", exc)
        return EXIT_NUMERIC
    except (DataError, FileNotFoundError, ClassifierError, GraphError, SnowballError, LDAError) as exc:
        log.error("%s", exc)
        return EXIT_DATA
    print(json.dumps(result, sort_keys=True, default=str))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
