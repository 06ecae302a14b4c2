"""concept-extract: emit .cvec concept embeddings from a multilingual model.

Exit codes follow the toolkit convention: 0 success, 1 bad inputs or
model problems, 2 IO failures.
"""

import argparse
import sys

from .extract import ARCHITECTURES, ExtractionJob, extract
from .errors import ExtractorError
from .tables import read_concepts


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="concept-extract", description=__doc__.splitlines()[0]
    )
    parser.add_argument("--model", required=True, help="model id or local model directory")
    parser.add_argument("--strategy", required=True, choices=("vanilla", "prompt"))
    parser.add_argument("--lang", required=True, help="language column to extract")
    parser.add_argument("--concepts", required=True, help="concept table TSV")
    parser.add_argument("--out", required=True, help="output .cvec path")
    parser.add_argument("--architecture", default="auto", choices=ARCHITECTURES)
    parser.add_argument(
        "--prompt-state",
        default="decoder",
        choices=("decoder", "encoder"),
        help="which stack's last state to pool for prompts on encoder-decoder models",
    )
    parser.add_argument("--batch-size", type=int, default=16)
    parser.add_argument("--limit", type=int, help="extract only the first N concepts")
    parser.add_argument("--device", default="cpu")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        concepts = read_concepts(args.concepts, args.lang)
        if args.limit is not None:
            if args.limit < 1:
                raise ExtractorError("--limit must be positive")
            concepts = concepts[: args.limit]
        job = ExtractionJob(
            model_id=args.model,
            strategy=args.strategy,
            language=args.lang,
            concepts=tuple(concepts),
            output_path=args.out,
            architecture=args.architecture,
            prompt_state=args.prompt_state,
            batch_size=args.batch_size,
            device=args.device,
        )
        extract(job)
    except ExtractorError as exc:
        print(f"error: extraction: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: io: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {args.out} ({len(concepts)} concepts)", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
