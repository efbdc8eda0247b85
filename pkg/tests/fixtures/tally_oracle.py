"""Brute-force tallies for eval50/decisions.jsonl (stdlib only).

For every class the script walks all 50 rows and classifies each one as a
true positive, false positive or false negative for that class; the transition
matrix is tallied cell by cell. Conventions: a final label inside the gold set
is correct; a wrong label is a false positive for itself and a false negative
for each gold label; a missing label only yields false negatives.

    python tests/fixtures/tally_oracle.py
"""
import json
import os

HERE = os.path.dirname(os.path.abspath(__file__))
PATH = os.path.join(HERE, "eval50", "decisions.jsonl")


def ratio(a, b):
    return a / b if b else 0.0


def main():
    rows = [json.loads(line) for line in open(PATH, encoding="utf-8") if line.strip()]
    labels = sorted({r["final_label"] for r in rows if r["final_label"]} | {g for r in rows for g in r["gold"]})

    per_class = {}
    for c in labels:
        tp = sum(1 for r in rows if r["final_label"] == c and c in r["gold"])
        fp = sum(1 for r in rows if r["final_label"] == c and c not in r["gold"])
        fn = sum(1 for r in rows if c in r["gold"] and r["final_label"] not in r["gold"])
        p, rc = ratio(tp, tp + fp), ratio(tp, tp + fn)
        f = ratio(2 * p * rc, p + rc)
        per_class[c] = {"tp": tp, "fp": fp, "fn": fn, "precision": p, "recall": rc, "f1": f}

    TP = sum(v["tp"] for v in per_class.values())
    FP = sum(v["fp"] for v in per_class.values())
    FN = sum(v["fn"] for v in per_class.values())
    mp, mr = ratio(TP, TP + FP), ratio(TP, TP + FN)
    supported = [v for v in per_class.values() if v["tp"] + v["fn"] > 0]
    macro = {
        k: sum(v[k] for v in supported) / len(supported) for k in ("precision", "recall", "f1")
    }

    seen = sorted({r["journal_only_label"] for r in rows if r["journal_only_label"]}
                  | {r["final_label"] for r in rows if r["final_label"]})
    order = seen + ["none"]
    matrix = [
        [
            sum(1 for r in rows if (r["journal_only_label"] or "none") == a and (r["final_label"] or "none") == b)
            for b in order
        ]
        for a in order
    ]

    expected = {
        "per_class": per_class,
        "micro": {"tp": TP, "fp": FP, "fn": FN, "precision": mp, "recall": mr,
                  "f1": ratio(2 * mp * mr, mp + mr)},
        "macro": macro,
        "transition": {"labels": order, "counts": matrix},
    }
    with open(os.path.join(HERE, "eval50", "expected.json"), "w", encoding="utf-8") as fh:
        json.dump(expected, fh, indent=2)
        fh.write("\n")
    print(json.dumps(expected["micro"]), json.dumps(expected["macro"]))


if __name__ == "__main__":
    main()
