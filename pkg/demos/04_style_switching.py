"""Push-to-talk opens to full duplex when replies get quick, and falls back on lapses.

Run with ``python demos/04_style_switching.py``.
"""
from floorspace import ChannelState, EngagementSignals, StyleConfig, TransitionSample, engagement_signals, update_mode
from floorspace.features import Lapse

config = StyleConfig()

# A scripted session: slow replies, then quick ones, then long silences.
samples = [TransitionSample("AB"[k % 2], "BA"[k % 2], 1.4, 3.0 * k) for k in range(1, 13)]
samples += [TransitionSample("AB"[k % 2], "BA"[k % 2], 0.25, 36.0 + 1.5 * k) for k in range(1, 20)]
lapses = [Lapse(70.0 + 6.0 * k, 74.0 + 6.0 * k, "A") for k in range(8)]

state = ChannelState()
for step in range(0, 481):
    t = step * 0.25
    # a live system only learns of a lapse once it has lasted long enough
    seen = [lp for lp in lapses if lp.start + config.lapse_threshold <= t]
    signals = engagement_signals(samples, seen, t, config.window)
    new = update_mode(state, signals, t, config)
    if new.mode is not state.mode:
        tone = " (tone)" if new.pending_tone else ""
        print(f"t={t:6.2f}s  {state.mode.value} -> {new.mode.value}{tone}")
    state = new

# An external interest score can lower the evidence needed to open the channel.
eager = EngagementSignals((0.3, 0.2, 0.3), (), {"A": 0.9, "B": 0.95})
print("\nthree quick replies with high interest ->", update_mode(ChannelState(), eager, 0.0, config).mode.value)
