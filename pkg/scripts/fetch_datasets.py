"""
CoreMotif — SNAP dataset fetcher
Usage:
    python scripts/fetch_datasets.py                 # every dataset
    python scripts/fetch_datasets.py facebook_combined amazon0302
    python scripts/fetch_datasets.py --list

Downloads into COREMOTIF_DATA_DIR (default ./data) and writes plain
"source<TAB>target" edge lists named <dataset>.txt.
"""

import argparse
import gzip
import logging
import os
import shutil
import sys

import httpx

logger = logging.getLogger("coremotif.fetch")

SNAP = "https://snap.stanford.edu/data/"

# name -> (url, format); "csv" files keep their first two columns
DATASETS = {
    "facebook_combined": (SNAP + "facebook_combined.txt.gz", "edges"),
    "ca-HepTh": (SNAP + "ca-HepTh.txt.gz", "edges"),
    "soc-sign-bitcoinalpha": (SNAP + "soc-sign-bitcoinalpha.csv.gz", "csv"),
    "email-Eu-core": (SNAP + "email-Eu-core.txt.gz", "edges"),
    "wiki-Vote": (SNAP + "wiki-Vote.txt.gz", "edges"),
    "amazon0302": (SNAP + "amazon0302.txt.gz", "edges"),
    "web-Google": (SNAP + "web-Google.txt.gz", "edges"),
    "wiki-Talk": (SNAP + "wiki-Talk.txt.gz", "edges"),
    "soc-Epinions1": (SNAP + "soc-Epinions1.txt.gz", "edges"),
}

CHUNK = 1 << 20


def data_dir() -> str:
    return os.environ.get("COREMOTIF_DATA_DIR", os.path.join(os.getcwd(), "data"))


def download(url: str, dest: str, client: httpx.Client):
    """Stream url to dest through a .part file."""
    tmp = dest + ".part"
    with client.stream("GET", url) as resp:
        resp.raise_for_status()
        total = int(resp.headers.get("content-length", 0))
        done = 0
        with open(tmp, "wb") as f:
            for chunk in resp.iter_bytes(CHUNK):
                f.write(chunk)
                done += len(chunk)
        if total and done != total:
            raise IOError("short download: {} of {} bytes".format(done, total))
    os.replace(tmp, dest)


def unpack(archive: str, dest: str, fmt: str):
    with gzip.open(archive, "rt", encoding="utf-8", errors="replace") as src, \
            open(dest + ".part", "w", encoding="utf-8") as out:
        if fmt == "csv":
            for line in src:
                parts = line.strip().split(",")
                if len(parts) >= 2 and parts[0].isdigit() and parts[1].isdigit():
                    out.write("{}\t{}\n".format(parts[0], parts[1]))
        else:
            shutil.copyfileobj(src, out)
    os.replace(dest + ".part", dest)


def fetch(name: str, root: str, client: httpx.Client, force: bool = False) -> str:
    url, fmt = DATASETS[name]
    dest = os.path.join(root, name + ".txt")
    if os.path.exists(dest) and not force:
        logger.info("%s already present", dest)
        return dest
    archive = os.path.join(root, os.path.basename(url))
    logger.info("Downloading %s", url)
    download(url, archive, client)
    unpack(archive, dest, fmt)
    os.remove(archive)
    logger.info("Wrote %s", dest)
    return dest


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="Download the SNAP graphs used by the CoreMotif test suite")
    parser.add_argument("names", nargs="*", help="Datasets to fetch (default: all)")
    parser.add_argument("--list", action="store_true", help="List known datasets and exit")
    parser.add_argument("--force", action="store_true", help="Re-download existing files")
    parser.add_argument("--timeout", type=float, default=120.0, help="HTTP timeout in seconds")
    args = parser.parse_args(argv)
    logging.basicConfig(level="INFO", format="%(asctime)s [%(levelname)s] %(name)s: %(message)s")

    if args.list:
        for name, (url, _) in DATASETS.items():
            print("{}\t{}".format(name, url))
        return 0

    unknown = [n for n in args.names if n not in DATASETS]
    if unknown:
        print("error: unknown dataset(s): {}".format(", ".join(unknown)), file=sys.stderr)
        return 1

    root = data_dir()
    os.makedirs(root, exist_ok=True)
    failed = 0
    with httpx.Client(timeout=args.timeout, follow_redirects=True) as client:
        for name in args.names or list(DATASETS):
            try:
                fetch(name, root, client, force=args.force)
            except (httpx.HTTPError, OSError) as exc:
                logger.error("Failed to fetch %s: %s", name, exc)
                failed += 1
    return 2 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
