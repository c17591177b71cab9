#!/usr/bin/env python3
"""
Write every preset config to JSON so it can be edited and run with --config.

Usage:
    python scripts/export_presets.py [--out configs] [--desk-only] [--force]

Options:
    --out        Target directory (one sub-directory per preset)
    --desk-only  Only export the -desk variants
    --force      Overwrite existing files
"""

import sys
import argparse
from pathlib import Path

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.harness.presets import DESK_SUFFIX, preset, preset_names
from src.utils.config import save_config


def export_preset(name: str, out: Path, force: bool) -> dict:
    """
    Save the configs of one preset under ``out/<name>/<label>.json``.

    Returns:
        dict: Export statistics
    """
    stats = {"written": 0, "skipped": 0}
    for config in preset(name):
        path = out / name / f"{config.label}.json"
        if path.exists() and not force:
            stats["skipped"] += 1
            continue
        save_config(config, path)
        stats["written"] += 1
    return stats


def main():
    parser = argparse.ArgumentParser(description="Export preset experiment configs")
    parser.add_argument("--out", type=Path, default=project_root / "configs",
                        help="Target directory")
    parser.add_argument("--desk-only", action="store_true", help="Only export -desk variants")
    parser.add_argument("--force", action="store_true", help="Overwrite existing files")
    args = parser.parse_args()

    names = [n for n in preset_names() if n.endswith(DESK_SUFFIX) or not args.desk_only]

    print("=" * 60)
    print(f"Exporting {len(names)} presets to {args.out}")
    print("=" * 60)

    totals = {"written": 0, "skipped": 0}
    for name in names:
        stats = export_preset(name, args.out, args.force)
        totals["written"] += stats["written"]
        totals["skipped"] += stats["skipped"]
        print(f"  - {name}: {stats['written']} written, {stats['skipped']} skipped")

    print(f"\nDone: {totals['written']} written, {totals['skipped']} skipped (use --force to overwrite)")
    print("\nNext steps:")
    print(f"  python -m src.cli solve-optimal --config {args.out / 'base-6.1' / 'base.json'}")


if __name__ == "__main__":
    main()
