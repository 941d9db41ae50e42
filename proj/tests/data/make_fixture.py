#!/usr/bin/env python3
"""Builds the synthetic ratings fixture and its independently computed expected report.

Writes, next to this script:
  ratings_fixture.csv   one row per ACR vote
  lab_mos.csv           laboratory MOS for the twelve conditions
  fixture_expected.json per (level, k) group statistics computed with pandas/scipy

Workers in quiet settings answer more screening questions correctly and rate
close to the laboratory MOS; workers in noisy settings rate noisy and
low-level conditions too high. Everything is seeded, so reruns are identical.
"""
import json
import pathlib

import numpy as np
import pandas as pd
from scipy import stats

HERE = pathlib.Path(__file__).resolve().parent
rng = np.random.default_rng(808)

conditions = [f"C{i:02d}" for i in range(1, 13)]
lab = np.array([4.45, 1.52, 1.96, 2.41, 2.93, 3.37, 1.28, 4.02, 3.71, 2.12, 3.05, 2.66])
noise_sensitive = {"C02", "C03", "C04", "C05", "C06"}
p_quiet = {10: 0.70, 8: 0.60, 6: 0.50}

rows = []
assignment = 0
for level in (10, 8, 6):
    for i in range(72):
        assignment += 1
        quiet = i >= 3 and rng.random() < p_quiet[level]
        # Each screening answer is right with a probability that depends on the setting and level.
        # The first three workers per level barely listen, so every group is populated.
        p_right = (0.97 if quiet else 0.62) - (10 - level) * (0.015 if quiet else 0.04)
        if i < 3:
            p_right = 0.05
        n_correct = int(rng.binomial(4, p_right))
        worker = f"W{assignment:04d}"
        headphone_ok = rng.random() > 0.04
        for ci, cond in enumerate(conditions):
            for rep in range(2):
                mean = lab[ci]
                if not quiet and cond in noise_sensitive:
                    mean += 0.9
                elif not quiet:
                    mean += rng.normal(0.0, 0.3)
                score = int(np.clip(np.rint(mean + rng.normal(0.0, 0.7)), 1, 5))
                rows.append({
                    "worker_id": worker,
                    "assignment_id": f"A{assignment:04d}",
                    "condition_id": cond,
                    "stimulus_id": f"{cond}_s{rep + 1}",
                    "score": score,
                    "jnd_level_db": level,
                    "n_correct": n_correct,
                    "trapping_ok": int(rng.random() > 0.02),
                    "gold_ok": int(rng.random() > 0.02),
                    "headphone_ok": int(headphone_ok),
                })

ratings = pd.DataFrame(rows)
ratings.to_csv(HERE / "ratings_fixture.csv", index=False)
lab_df = pd.DataFrame({"condition_id": conditions, "mos": lab})
lab_df.to_csv(HERE / "lab_mos.csv", index=False, float_format="%.2f")


def fisher(r1, r2, n):
    z = (np.arctanh(r1) - np.arctanh(r2)) / np.sqrt(2.0 / (n - 3))
    return float(z), float(2 * stats.norm.sf(abs(z)))


kept = ratings[(ratings.trapping_ok == 1) & (ratings.gold_ok == 1) & (ratings.headphone_ok == 1)]
expected = {"n_input": len(ratings), "n_kept": len(kept), "comparisons": [], "pass_rates": []}
lab_by_cond = lab_df.set_index("condition_id")["mos"]
for level in (10, 8, 6):
    at = kept[kept.jnd_level_db == level]
    for k in (1, 2, 3):
        groups = {}
        for name, part in (("passed", at[at.n_correct >= k]), ("failed", at[at.n_correct < k])):
            mos = part.groupby("condition_id")["score"].mean().reindex(conditions)
            assert mos.notna().all(), (level, k, name)
            x, y = mos.to_numpy(), lab_by_cond.reindex(conditions).to_numpy()
            groups[name] = {"pcc": float(stats.pearsonr(x, y)[0]), "srcc": float(stats.spearmanr(x, y)[0]),
                            "rmse": float(np.sqrt(np.mean((x - y) ** 2))), "n_votes": int(len(part))}
        p, f = groups["passed"], groups["failed"]
        z_pcc, p_pcc = fisher(p["pcc"], f["pcc"], 12)
        z_srcc, p_srcc = fisher(p["srcc"], f["srcc"], 12)
        F = max(p["rmse"], f["rmse"]) ** 2 / min(p["rmse"], f["rmse"]) ** 2
        expected["comparisons"].append({"jnd_level_db": level, "k": k, "passed": p, "failed": f,
                                        "z_pcc": z_pcc, "p_pcc": p_pcc, "z_srcc": z_srcc, "p_srcc": p_srcc,
                                        "f_rmse": float(F), "p_rmse": float(stats.f.sf(F, 11, 11))})

sessions = ratings.drop_duplicates("assignment_id")
for level in (6, 8, 10):
    s = sessions[sessions.jnd_level_db == level]
    expected["pass_rates"].append({"jnd_level_db": level, "n_sessions": int(len(s)),
                                   "percent": [float(100.0 * (s.n_correct >= k).mean()) for k in (1, 2, 3, 4)]})

(HERE / "fixture_expected.json").write_text(json.dumps(expected, indent=2) + "\n")
print(f"{len(ratings)} votes, {len(kept)} kept, {assignment} assignments")
