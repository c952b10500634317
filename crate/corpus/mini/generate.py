"""Regenerates the mini corpus: one mixed program per file, each holding a
flawed function and its fixed twin. Lines tagged FLAW become the manifest's
vulnerable lines."""

import json
import random
from pathlib import Path

HERE = Path(__file__).parent
FAMILIES = {}


def family(name):
    def wrap(fn):
        FAMILIES[name] = fn
        return fn
    return wrap


@family("strcpy")
def _strcpy(v):
    head = [
        f"char {v['dst']}[{v['n']}];",
        f"char {v['src']}[{v['m']}];",
        f"memset({v['src']}, 'A', {v['m']} - 1);",
        f"{v['src']}[{v['m']} - 1] = '\\0';",
    ]
    bad = head + [f"strcpy({v['dst']}, {v['src']}); /* FLAW */", f"printf(\"%s\\n\", {v['dst']});"]
    good = head + [
        f"strncpy({v['dst']}, {v['src']}, {v['n']} - 1);",
        f"{v['dst']}[{v['n']} - 1] = '\\0';",
        f"printf(\"%s\\n\", {v['dst']});",
    ]
    return "void", bad, good, "()", "()"


@family("loop")
def _loop(v):
    def body(op, tag):
        return [
            f"int {v['i']};",
            f"int {v['buf']}[{v['n']}];",
            f"for ({v['i']} = 0; {v['i']} {op} {v['n']}; {v['i']}++){tag}",
            "{",
            f"    {v['buf']}[{v['i']}] = {v['i']};",
            "}",
            f"printf(\"%d\\n\", {v['buf']}[0]);",
        ]
    return "void", body("<=", " /* FLAW */"), body("<", ""), "()", "()"


@family("underwrite")
def _underwrite(v):
    def body(rhs, tag):
        return [
            f"char * {v['data']};",
            f"char {v['buf']}[{v['n']}];",
            f"memset({v['buf']}, 'A', {v['n']} - 1);",
            f"{v['buf']}[{v['n']} - 1] = '\\0';",
            f"{v['data']} = {rhs};{tag}",
            f"{v['data']}[0] = 'B';",
            f"printf(\"%s\\n\", {v['data']});",
        ]
    return "void", body(f"{v['buf']} - 8", " /* FLAW */"), body(v["buf"], ""), "()", "()"


@family("memcpy")
def _memcpy(v):
    tail = [f"{v['buf']}[{v['n']} - 1] = '\\0';", f"printf(\"%s\\n\", {v['buf']});"]
    bad = [f"char {v['buf']}[{v['n']}];", f"memcpy({v['buf']}, {v['src']}, {v['len']}); /* FLAW */"] + tail
    good = [f"char {v['buf']}[{v['n']}];", f"memcpy({v['buf']}, {v['src']}, sizeof({v['buf']}) - 1);"] + tail
    sig = f"(const char * {v['src']}, int {v['len']})"
    return "void", bad, good, sig, '("hello world", 11)'


@family("alloc")
def _alloc(v):
    def body(size, tag):
        return [
            f"char {v['src']}[{v['n']}];",
            f"memset({v['src']}, 'A', {v['n']} - 1);",
            f"{v['src']}[{v['n']} - 1] = '\\0';",
            f"char * {v['p']} = (char *)malloc({size});{tag}",
            f"if ({v['p']} != NULL)",
            "{",
            f"    strcpy({v['p']}, {v['src']});",
            f"    printf(\"%s\\n\", {v['p']});",
            f"    free({v['p']});",
            "}",
        ]
    return "void", body(f"strlen({v['src']})", " /* FLAW */"), body(f"strlen({v['src']}) + 1", ""), "()", "()"


@family("nullcheck")
def _nullcheck(v):
    alloc = f"int * {v['p']} = (int *)malloc({v['n']} * sizeof(int));"
    tail = [f"printf(\"%d\\n\", {v['p']}[0]);", f"free({v['p']});"]
    bad = [alloc, f"{v['p']}[0] = {v['k']}; /* FLAW */"] + tail
    good = [alloc, f"if ({v['p']} != NULL)", "{", f"    {v['p']}[0] = {v['k']};"] + ["    " + t for t in tail] + ["}"]
    return "void", bad, good, "()", "()"


@family("strcat")
def _strcat(v):
    head = [
        f"char {v['dst']}[{v['n']}] = \"\";",
        f"char {v['src']}[{v['m']}];",
        f"memset({v['src']}, 'C', {v['m']} - 1);",
        f"{v['src']}[{v['m']} - 1] = '\\0';",
    ]
    bad = head + [f"strcat({v['dst']}, {v['src']}); /* FLAW */", f"printf(\"%s\\n\", {v['dst']});"]
    good = head + [f"strncat({v['dst']}, {v['src']}, {v['n']} - 1);", f"printf(\"%s\\n\", {v['dst']});"]
    return "void", bad, good, "()", "()"


@family("index")
def _index(v):
    tail = [f"printf(\"%d\\n\", {v['buf']}[0]);"]
    bad = [f"int {v['buf']}[{v['n']}] = {{0}};", f"{v['buf']}[{v['idx']}] = 1; /* FLAW */"] + tail
    good = [f"int {v['buf']}[{v['n']}] = {{0}};", f"{v['buf']}[{v['idx']} % {v['n']}] = 1;"] + tail
    return "void", bad, good, f"(int {v['idx']})", "(7)"


NAMES = {
    "dst": ["dest", "target", "out", "line", "name"],
    "src": ["source", "input", "text", "msg", "str"],
    "buf": ["buffer", "data_buf", "arr", "table", "block"],
    "data": ["data", "ptr", "cursor", "pos", "walk"],
    "p": ["p", "mem", "chunk", "heap", "region"],
    "i": ["i", "j", "k", "idx_i", "n_i"],
    "len": ["len", "size", "count", "nbytes", "amount"],
    "idx": ["index", "pos_i", "slot", "at", "which"],
    "cnt": ["counter", "calls", "total", "hits", "ticks"],
}


def variables(rng):
    v = {k: rng.choice(vals) for k, vals in NAMES.items()}
    v["n"] = rng.choice([10, 16, 20, 32, 50])
    v["m"] = v["n"] * 2 + rng.choice([0, 4, 10])
    v["k"] = rng.choice([1, 5, 42])
    return v


def extras(rng, v):
    if rng.random() < 0.5:
        return [], []
    pre = [f"int {v['cnt']} = 0;"]
    post = [f"{v['cnt']} = {v['cnt']} + 1;", f"printf(\"%d\\n\", {v['cnt']});"]
    return pre, post


def render(fam, idx, rng):
    v = variables(rng)
    ret, bad, good, sig, args = FAMILIES[fam](v)
    pre, post = extras(rng, v)
    lines = ["#include <stdio.h>", "#include <stdlib.h>", "#include <string.h>", ""]
    flaws = []
    for kind, body in (("bad", bad), ("good", good)):
        lines.append(f"{ret} {fam}_{idx:02d}_{kind}{sig}")
        lines.append("{")
        for stmt in pre + body + post:
            if "/* FLAW */" in stmt:
                flaws.append(len(lines) + 1)
            lines.append("    " + stmt)
        lines.append("}")
        lines.append("")
    lines.append("int main()")
    lines.append("{")
    for kind in ("bad", "good"):
        lines.append(f"    {fam}_{idx:02d}_{kind}{args};")
    lines.append("    return 0;")
    lines.append("}")
    return "\n".join(lines) + "\n", flaws


def main():
    rng = random.Random(20180101)
    programs = []
    src = HERE / "src"
    src.mkdir(exist_ok=True)
    for fam in FAMILIES:
        for idx in range(5):
            text, flaws = render(fam, idx, rng)
            name = f"{fam}_{idx:02d}.c"
            (src / name).write_text(text)
            programs.append({"path": name, "class": "mixed", "vulnerable_lines": flaws})
    manifest = {"corpus_root": "src", "output_dir": "out", "programs": programs}
    (HERE / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


if __name__ == "__main__":
    main()
