"""Turn a floor partition into per-listener gains and ramp between them.

Run with ``python demos/03_adaptive_mixing.py``.
"""
from floorspace import FloorPartition, MixConfig, ramp_step, target_gains
from floorspace.mix import steps_to_converge

config = MixConfig(same_gain=1.0, other_gain=0.25, ramp=0.1)
together = FloorPartition((("A", "B", "C", "D"),))
split = FloorPartition((("A", "B"), ("C", "D")))

before, after = target_gains(together, config), target_gains(split, config)
print("after the split, A hears:", after.row("A"))
print("and C hears:            ", after.row("C"))

# Gains never jump: each tick moves every level by at most ``ramp``.
print(f"\nramping A's view of C over {steps_to_converge(before, after, config.ramp)} ticks:")
gains = before
while gains != after:
    gains = ramp_step(gains, after, config)
    print(f"  A<-C {gains.gain('A', 'C'):.2f}   A<-B {gains.gain('A', 'B'):.2f}")
