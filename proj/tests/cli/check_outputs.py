"""Runs every wsbm subcommand and validates its JSON output against schemas/.

Also checks that each output is byte-identical across reruns and worker counts.
Usage: check_outputs.py WSBM_BINARY SCHEMA_DIR
"""

import hashlib
import json
import subprocess
import sys
import tempfile
from pathlib import Path

import jsonschema


def main() -> int:
    binary, schema_dir = sys.argv[1], Path(sys.argv[2])
    schemas = {p.name.split(".")[0]: json.loads(p.read_text()) for p in schema_dir.glob("*.schema.json")}
    failures = []

    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)

        def run(*args, threads=None):
            cmd = [binary, *args]
            if threads is not None:
                cmd += ["--threads", str(threads)]
            proc = subprocess.run(cmd, cwd=tmp, capture_output=True, text=True)
            if proc.returncode != 0:
                raise SystemExit(f"{' '.join(cmd)} failed: {proc.stderr}")
            return proc.stdout

        def check(kind, text, label):
            try:
                jsonschema.validate(json.loads(text), schemas[kind])
                print(f"ok   {label} matches {kind} schema")
            except jsonschema.ValidationError as e:
                failures.append(label)
                print(f"FAIL {label}: {e.message}")

        def stable(label, *args):
            digests = {hashlib.sha256(run(*args, threads=t).encode()).hexdigest() for t in (1, 1, 3)}
            if len(digests) == 1:
                print(f"ok   {label} is byte-stable across runs and threads")
            else:
                failures.append(label + " stability")
                print(f"FAIL {label} output changed between runs")

        gen = run("generate", "--preset", "sbm", "--groups", "3", "--group-size", "8", "--missing-fraction", "0.1",
                  "--seed", "5", "-o", "net.tsv")
        check("generate", gen, "generate")
        check("generate", run("generate", "--preset", "fig4", "--sigma2", "0.2", "-o", "fig4.tsv"), "generate fig4")

        inputs = ["-i", "net.tsv", "--missing", "net.tsv.missing.tsv"]
        fits = {
            "fit vb": ["fit", *inputs, "--k", "3", "--restarts", "3"],
            "fit bp": ["fit", *inputs, "--k", "3", "--restarts", "3", "--engine", "bp"],
            "fit dc classic": ["fit", "-i", "net.tsv", "--k", "2", "--restarts", "2", "--degree-correct", "--alpha",
                               "1"],
            "fit dirichlet": ["fit", *inputs, "--k", "2", "--restarts", "2", "--init", "dirichlet"],
        }
        for label, args in fits.items():
            check("fit", run(*args), label)
            stable(label, *args)

        (tmp / "fit.json").write_text(run(*fits["fit vb"]))
        (tmp / "pairs.txt").write_text("0 1\n2 5\n7 7\n")
        check("predictions", run("predict", "--fit", "fit.json", "--pairs", "pairs.txt"), "predict")

        sel = ["select-k", *inputs, "--k-range", "1..4", "--restarts", "2", "--format", "json", "--truth",
               "net.tsv.labels.tsv"]
        check("selection", run(*sel), "select-k")
        stable("select-k", *sel)

        ev = ["evaluate", *inputs, "--k", "3", "--trials", "2", "--restarts", "2", "--records"]
        check("evaluation", run(*ev), "evaluate")
        stable("evaluate", *ev)
        check("evaluation", run(*ev, "--normalize", "linear"), "evaluate normalized")

        run("fit", *inputs, "--k", "3", "--restarts", "2", "-o", "f.json", "--labels-out", "labels.tsv")
        check("nmi", run("nmi", "--labels-a", "labels.tsv", "--labels-b", "net.tsv.labels.tsv", "--format", "json"),
              "nmi")

    print(f"{len(failures)} failure(s)")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
