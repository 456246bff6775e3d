"""
Price uncertainty inside one averaging window
=============================================

A market window holds N deals, each a (value, volume) pair.  The mean
price that matters for macro accounting is the volume-weighted one, and
its dispersion is *not* the naive variance of per-deal prices — the
weights change the answer.  This script walks through both facts on a
small hand-checkable window and then on a big synthetic one.
"""

import numpy as np

from marketmoments import (
    GenSpec,
    Lognormal,
    TradeTick,
    WindowSeries,
    WindowSpec,
    generate_arrays,
    partition_arrays,
    price_cv_sq,
    price_stats_closed_form,
    price_stats_direct,
    vwap,
    weights_order2,
    window_moments,
)

# ---------------------------------------------------------------------------
# 1. a tiny window where everything can be checked by hand
# ---------------------------------------------------------------------------

ticks = [
    TradeTick(time=0.1, value=12.0, volume=3.0),   # price 4
    TradeTick(time=0.4, value=2.0, volume=1.0),    # price 2
]
w = WindowSeries.from_ticks(WindowSpec(center=0.5, width=1.0), ticks)

print("-- two deals: prices 4 and 2, volumes 3 and 1 --")
naive_mean = np.mean([4.0, 2.0])
print(f"unweighted mean price : {naive_mean}")          # 3.0
print(f"volume-weighted mean  : {vwap(w)}")             # 14/4 = 3.5

# the big deal dominates, so the weighted mean sits closer to its price.
# dispersion uses second-power volume weights:
print(f"order-2 weights       : {weights_order2(w)}")   # 9/10, 1/10

st = price_stats_direct(w)
print(f"weighted mean price   : {st.mean}")
print(f"price volatility      : {st.volatility}")       # 0.45
print(f"weighted 2nd moment   : {st.second_moment}")
print(f"CV^2 of price         : {price_cv_sq(st)}")

# second moment = volatility + mean^2 holds exactly, not just approximately
assert st.second_moment == st.volatility + st.mean * st.mean

# ---------------------------------------------------------------------------
# 2. same numbers by a second, independent route
# ---------------------------------------------------------------------------
# The direct route averages weighted prices.  The closed form never touches
# prices at all: it combines value/volume moments and their covariance.
# Both must land on the same statistics.

closed = price_stats_closed_form(window_moments(w))
print("\n-- closed form from value/volume moments --")
print(f"mean  gap: {abs(closed.mean - st.mean):.3e}")
print(f"vol   gap: {abs(closed.volatility - st.volatility):.3e}")

# ---------------------------------------------------------------------------
# 3. scale it up: 200k synthetic ticks, lognormal values and volumes
# ---------------------------------------------------------------------------

spec = GenSpec(
    n_ticks=200_000,
    time_step=0.05,
    value_dist=Lognormal(mu=1.2, sigma=0.6),
    volume_dist=Lognormal(mu=0.3, sigma=0.5),
    target_corr_cu=0.4,
    seed=7,
)
times, values, volumes = generate_arrays(spec)
windows = partition_arrays(times, values, volumes, width=60.0, origin=0.0)
print(f"\n-- {len(windows)} one-minute windows over {spec.n_ticks} ticks --")

worst = 0.0
for win in windows:
    d = price_stats_direct(win)
    c = price_stats_closed_form(window_moments(win))
    gap = abs(d.volatility - c.volatility) / max(1.0, abs(c.volatility))
    worst = max(worst, gap)
print(f"worst direct-vs-closed volatility gap: {worst:.3e}  (pure rounding)")

first = price_stats_direct(windows[0])
print(f"first window: vwap={first.mean:.4f}  vol={first.volatility:.4f}  "
      f"cv^2={price_cv_sq(first):.4f}")
print("\nthe volatility above is the floor on price uncertainty for this")
print("window: no forecast of the mean price can beat it from within.")
