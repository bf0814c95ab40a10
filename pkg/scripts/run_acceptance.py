"""Analyze every bundled rule file and write results.jsonl + summary.csv."""
import os
import sys
import json
import csv
import asyncio
from pathlib import Path
from typing import Dict, Any

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from app.schemas import report_payload
from app.services.analysis_pipeline import run_command
from app.services.errors import LCAError
from app.services.rule_parser import load_rule_file


async def analyze_rule(path: Path) -> Dict[str, Any]:
    """Analyze a single rule file."""
    spec = load_rule_file(path)
    report = await run_command("analyze", spec)
    return report_payload(report)


async def main():
    """Main evaluation function."""
    rules_dir = Path(os.getenv("RULES_DIR", "static/rules"))

    if not rules_dir.is_dir():
        print(f"Error: rules directory not found: {rules_dir}")
        print("Please set RULES_DIR environment variable or run from the repository root.")
        return

    paths = sorted(rules_dir.glob("*.json"))
    print(f"Found {len(paths)} rule files in {rules_dir}")

    results = []
    for i, path in enumerate(paths, 1):
        print(f"\n[{i}/{len(paths)}] Analyzing {path.stem}...")

        try:
            result = await analyze_rule(path)
            result["rule_id"] = path.stem
            results.append(result)
            print(f"  ✓ Completed (latency: {result['metrics']['latency_ms']}ms)")
        except LCAError as e:
            print(f"  ✗ Error: {e}")
            results.append({
                "rule_id": path.stem,
                "error": str(e),
                "confined": None,
                "metrics": {"latency_ms": 0, "errors": [str(e)]}
            })

    results_file = "results.jsonl"
    print(f"\nWriting results to: {results_file}")
    with open(results_file, "w", encoding="utf-8") as f:
        for result in results:
            f.write(json.dumps(result, ensure_ascii=False) + "\n")

    summary_file = "summary.csv"
    print(f"Writing summary to: {summary_file}")

    with open(summary_file, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=[
            "rule", "p", "r", "confined", "a", "varpi", "t",
            "zeta_kind", "latency_ms", "trace_id", "errors"
        ])
        writer.writeheader()

        for result in results:
            metrics = result.get("metrics", {})
            spec = result.get("spec", {})
            inv = result.get("invariants") or {}
            zeta = result.get("zeta") or {}

            writer.writerow({
                "rule": result["rule_id"],
                "p": spec.get("p", ""),
                "r": spec.get("r", ""),
                "confined": result.get("confined"),
                "a": inv.get("a", ""),
                "varpi": inv.get("varpi", ""),
                "t": json.dumps(inv.get("t", {})),
                "zeta_kind": zeta.get("kind", "N/A"),
                "latency_ms": metrics.get("latency_ms", 0),
                "trace_id": metrics.get("trace_id", "N/A"),
                "errors": "; ".join(metrics.get("errors", [])) or "none"
            })

    print(f"\nEvaluation complete!")
    print(f"  Results: {results_file}")
    print(f"  Summary: {summary_file}")


if __name__ == "__main__":
    asyncio.run(main())
