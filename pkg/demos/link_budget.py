"""
Link budget and bit errors
==========================

How much does a 20 MHz link carry, and how often does it flip a bit?
"""

import numpy as np

from mirage.channel import ChannelConfig, link_budget, transmit_bits

# Shannon rate and the resulting BER for a handful of operating points
for snr_db in (-10, -5, 0, 5, 10):
    lb = link_budget(ChannelConfig(snr_db, 20e6))
    print(f"{snr_db:+4d} dB  {lb.throughput_bps / 1e6:7.2f} Mbit/s  eta={lb.spectral_efficiency:.3f}"
          f"  Eb/N0={lb.eb_n0:.3f}  BER={lb.ber:.5f}")

###############################################################################
# A million bits through the -10 dB channel. The empirical flip rate
# should sit within a few standard deviations of the analytic one.

lb = link_budget(ChannelConfig(-10, 20e6))
rx = transmit_bits(np.zeros(10**6, dtype=np.uint8), lb.ber, rng_seed=0)
print("empirical", rx.mean(), "analytic", lb.ber)
