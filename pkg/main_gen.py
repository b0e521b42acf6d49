"""
Generazione di un'istanza deterministica (λ, σ, ω, p, r) a partire da seed e preset.
"""
import json
import sys

from dotenv import load_dotenv

from src.dyadic import InvalidExponentError
from src.instance_generator import generate_instance
from src.instance_io import instance_to_dict, save_instance
from src.logger import log
from src.run_config import EXIT_BAD_INPUT, EXIT_OK, add_instance_arguments


def main(argv=None) -> int:
    """Funzione principale."""
    import argparse

    load_dotenv()
    parser = argparse.ArgumentParser(description="Genera un'istanza del teorema a due pesi")
    add_instance_arguments(parser)
    parser.add_argument("--out", default=None, help="File di destinazione (default: stdout)")
    args = parser.parse_args(argv)

    try:
        inst = generate_instance(args.seed, args.dim, args.depth, args.p, args.r, args.lambda_preset, args.weights)
    except (InvalidExponentError, ValueError) as e:
        log(f"ERRORE: {e}")
        return EXIT_BAD_INPUT

    if args.out:
        save_instance(inst, args.out)
        log(f"Istanza salvata in: {args.out}")
    else:
        json.dump(instance_to_dict(inst), sys.stdout, indent=2)
        sys.stdout.write("\n")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
