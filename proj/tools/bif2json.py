#!/usr/bin/env python3
"""Convert a BIF network file into the JSON network format read by `drsl`.

Usage: bif2json.py network.bif > network.json

Only discrete variables are supported. Parent configurations in the output
CPT are enumerated lexicographically over parent category indices, with the
first-listed parent most significant. Category labels are dropped; a value's
index is its position in the BIF variable declaration.
"""

import itertools
import json
import re
import sys


def parse_bif(text):
    text = re.sub(r"//.*", "", text)
    variables = {}
    order = []
    for m in re.finditer(
        r"variable\s+([^\s{]+)\s*\{\s*type\s+discrete\s*\[\s*(\d+)\s*\]\s*\{([^}]*)\}",
        text,
    ):
        name = m.group(1)
        states = [s.strip() for s in m.group(3).split(",")]
        if len(states) != int(m.group(2)):
            raise ValueError(f"variable {name}: declared {m.group(2)} states, found {len(states)}")
        variables[name] = states
        order.append(name)

    parents = {}
    cpts = {}
    for m in re.finditer(r"probability\s*\(\s*([^)|]+?)\s*(?:\|\s*([^)]*))?\)\s*\{([^}]*)\}", text):
        child = m.group(1).strip()
        pars = [p.strip() for p in m.group(2).split(",")] if m.group(2) else []
        body = m.group(3)
        card = len(variables[child])
        parents[child] = pars
        if not pars:
            t = re.search(r"table\s+([^;]*);", body)
            cpts[child] = [[float(v) for v in t.group(1).split(",")]]
            continue
        rows = {}
        for line in re.finditer(r"\(([^)]*)\)\s*([^;]*);", body):
            key = tuple(s.strip() for s in line.group(1).split(","))
            rows[key] = [float(v) for v in line.group(2).split(",")]
        table = []
        for combo in itertools.product(*[variables[p] for p in pars]):
            if combo not in rows:
                raise ValueError(f"{child}: missing row for parent configuration {combo}")
            row = rows[combo]
            if len(row) != card:
                raise ValueError(f"{child}: row {combo} has {len(row)} entries, expected {card}")
            table.append(row)
        cpts[child] = table

    for name in order:
        if name not in cpts:
            raise ValueError(f"variable {name} has no probability block")
    return {
        "nodes": [{"name": n, "cardinality": len(variables[n])} for n in order],
        "parents": {n: parents[n] for n in order},
        "cpts": {n: cpts[n] for n in order},
    }


def main():
    if len(sys.argv) != 2:
        sys.stderr.write(__doc__)
        return 2
    with open(sys.argv[1]) as f:
        net = parse_bif(f.read())
    json.dump(net, sys.stdout, indent=1)
    sys.stdout.write("\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
