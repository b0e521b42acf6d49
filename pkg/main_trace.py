"""
Traccia strumentata della dimostrazione per una coppia (f, g = (a_Q 1_Q)).

Emette le famiglie d'arresto, le due somme dello split e le verifiche.
"""
import json
import sys
from pathlib import Path

from dotenv import load_dotenv

from src.instance_io import InstanceFormatError, load_coefficients, load_instance, load_leaf_array
from src.logger import ResultLogger, log
from src.run_config import EXIT_BAD_INPUT, EXIT_CHECK_FAILED, EXIT_OK, default_tol
from src.theorem import proof_trace


def main(argv=None) -> int:
    """Funzione principale."""
    import argparse

    load_dotenv()
    parser = argparse.ArgumentParser(description="Traccia della dimostrazione della sufficienza")
    parser.add_argument("instance", help="File d'istanza JSON")
    parser.add_argument("f_file", help="Funzione f sulle foglie (lista JSON)")
    parser.add_argument("g_file", help="Coefficienti a_Q di g (lista o mappa cubo → valore)")
    parser.add_argument("--tol", type=float, default=None, help="Tolleranza relativa (default 1e-9)")
    parser.add_argument("--out", default=None, help="Copia del report in questo file")
    args = parser.parse_args(argv)

    try:
        inst = load_instance(args.instance)
        f = load_leaf_array(args.f_file, inst.system)
        a = load_coefficients(args.g_file, inst.system)
    except (InstanceFormatError, OSError) as e:
        log(f"ERRORE: {e}")
        return EXIT_BAD_INPUT

    trace = proof_trace(inst, f, a, args.tol if args.tol is not None else default_tol())

    log(f"{'='*60}")
    log(f"|𝔉| = {len(trace.fam_f.members)}, |𝔊| = {len(trace.fam_g.members)}")
    log(f"accoppiamento = {trace.pairing:.6g}, somme = ({trace.sum1:.6g}, {trace.sum2:.6g})")
    for item in trace.checks + trace.stagewise:
        status = "✓" if item.holds else "✗"
        log(f"  {status} {item.name}: {item.lhs:.6g} ≤ {item.rhs:.6g}")
    log(f"{'='*60}")

    result = trace.to_dict()
    ResultLogger("trace").save_report(result, Path(args.instance).stem)
    json.dump(result, sys.stdout, indent=2, ensure_ascii=False)
    sys.stdout.write("\n")
    if args.out:
        with open(args.out, 'w', encoding='utf-8') as f_out:
            json.dump(result, f_out, indent=2, ensure_ascii=False)
    return EXIT_OK if trace.passed else EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
