#!/usr/bin/env python3
"""Regenerate the bundled data files under src/sempower/data/.

The sample CSV is a deterministic draw (seed 42, noise 0.01) around the
bundled default surface, so fitting it back recovers the documented
parameters. Run from the repository root:

    python3 scripts/make_bundled_data.py
"""

from pathlib import Path

from sempower.perception import (
    default_edge_curve,
    default_prompt_curve,
    default_surface,
    save_curve,
    save_sample_set,
    save_surface,
    synthetic_sample_set,
)

DATA = Path(__file__).resolve().parents[1] / "src" / "sempower" / "data"

SAMPLES_SEED = 42
SAMPLES_NOISE = 0.01


def main() -> None:
    DATA.mkdir(parents=True, exist_ok=True)
    save_surface(default_surface(), DATA / "default_surface.yaml")
    save_curve(default_prompt_curve(), DATA / "curve_prompt.yaml")
    save_curve(default_edge_curve(), DATA / "curve_edge.yaml")
    samples = synthetic_sample_set(default_surface(), seed=SAMPLES_SEED, noise_sigma=SAMPLES_NOISE)
    save_sample_set(samples, DATA / "surface_samples_example.csv")
    print(f"wrote {len(samples)} samples and 3 documents to {DATA}")


if __name__ == "__main__":
    main()
