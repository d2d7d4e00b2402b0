"""export-embeddings command line front end."""

from __future__ import annotations

import argparse
import sys

from .exporter import ExportError, export_embeddings


def run(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="export-embeddings",
        description="Embed a title corpus and write a DFV1 vector file; "
        "prints the export manifest as JSON on stdout.",
    )
    parser.add_argument("--corpus", required=True, help="corpus file to read")
    parser.add_argument("--format", default="csv", choices=["csv", "jsonl"])
    parser.add_argument(
        "--model",
        required=True,
        help="sentence-transformers checkpoint, or hash:<dim> for the "
        "built-in deterministic test encoder",
    )
    parser.add_argument("--out", required=True, help="DFV1 file to write")
    args = parser.parse_args(argv)
    try:
        manifest = export_embeddings(args.corpus, args.model, args.out, args.format)
    except ExportError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    sys.stdout.write(manifest.as_json())
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
