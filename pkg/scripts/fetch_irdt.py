#!/usr/bin/env python3
"""Download the public IRDT item-response CSV (figshare article 3142321).

The real-data cross-check tests look for the file at data/irdt.csv (or
$EGAKIT_IRDT_CSV) and skip cleanly when it is absent, so running this
script is optional and network access is never required by the test
suite.

Usage: python scripts/fetch_irdt.py [--dest data/irdt.csv]
"""

import argparse
import io
import json
import os
import sys
import urllib.request

ARTICLE_API = "https://api.figshare.com/v2/articles/3142321"


def fetch(dest: str) -> int:
    with urllib.request.urlopen(ARTICLE_API, timeout=60) as response:
        article = json.load(response)
    files = article.get("files") or []
    if not files:
        print("figshare article lists no files", file=sys.stderr)
        return 1
    url = files[0]["download_url"]
    print(f"downloading {files[0].get('name', url)} ...")
    with urllib.request.urlopen(url, timeout=300) as response:
        raw = response.read()

    text = raw.decode("utf-8-sig")
    delimiter = ";" if text.splitlines()[0].count(";") > text.splitlines()[0].count(",") else ","
    import csv

    rows = list(csv.reader(io.StringIO(text), delimiter=delimiter))
    header, body = rows[0], rows[1:]

    # Keep only complete-case rows and columns that are strictly 0/1
    # item responses (drops id/demographic columns).
    keep = []
    for j, name in enumerate(header):
        values = {row[j].strip() for row in body if j < len(row)}
        if values <= {"0", "1"} and len(values) == 2:
            keep.append(j)
    if not keep:
        print("no 0/1 item columns found; inspect the download manually",
              file=sys.stderr)
        return 1
    cleaned = [[header[j].strip() or f"V{j + 1}" for j in keep]]
    for row in body:
        if len(row) < len(header):
            continue
        cells = [row[j].strip() for j in keep]
        if all(c in ("0", "1") for c in cells):
            cleaned.append(cells)

    os.makedirs(os.path.dirname(dest) or ".", exist_ok=True)
    with open(dest, "w", newline="", encoding="utf-8") as handle:
        csv.writer(handle).writerows(cleaned)
    print(f"wrote {dest}: {len(cleaned) - 1} rows x {len(keep)} items")
    return 0


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dest", default=os.path.join("data", "irdt.csv"))
    args = parser.parse_args()
    try:
        return fetch(args.dest)
    except OSError as exc:
        print(f"download failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
