"""Infer floors from turn-transition timing, offline and online.

Run with ``python demos/02_floor_inference.py``.
"""
from floorspace import (
    GapModel,
    SimConfig,
    TrackConfig,
    extract_transitions,
    fit_models,
    generate_trace,
    infer_partition,
    normalize_events,
    score_partition,
    split_schedule,
    track,
)
from floorspace.simulate import truth_labelled_samples

ids = ("A", "B", "C", "D", "E", "F", "G", "H")
trace = generate_trace(SimConfig(8, 180.0, schedule=split_schedule(ids, schisms=[60.0, 120.0]), seed=3))
samples = extract_transitions(normalize_events(trace.events))
print(f"{len(samples)} transition samples; first three:")
for s in samples[:3]:
    print(f"  {s.prior} -> {s.next}  gap {s.gap:+.3f}s at {s.at:.2f}s")

# A model can be learned from a labelled trace instead of using the defaults.
model = fit_models((s.gap, same) for s, same in truth_labelled_samples(trace))
print(f"\nfitted model: same-floor N({model.same_mean:.3f}, {model.same_sd:.3f}), "
      f"cross-floor U[{model.diff_lo:.2f}, {model.diff_hi:.2f}]")

# Offline: the best partition of the last minute, against the truth.
last_minute = [s for s in samples if s.at > 120.0]
best = infer_partition(last_minute, ids, model)
greedy = infer_partition(last_minute, ids, model, method="greedy")
truth = trace.truth_at(179.0)
print(f"\nexhaustive: {best.floors}  score {best.score:.1f}")
print(f"greedy:     {greedy.floors}  score {greedy.score:.1f}")
print(f"truth:      {truth.floors}  score {score_partition(last_minute, truth, model):.1f}")

# Online: the tracker only switches after a sustained margin, so it emits
# one change per real schism instead of flickering.
print("\nonline tracking:")
for partition, change in track(samples, ids, GapModel(), TrackConfig(), duration=trace.duration):
    if change is not None:
        print(f"  t={change.at:6.2f}s  {change.kind:<9} -> {change.after.floors}")
