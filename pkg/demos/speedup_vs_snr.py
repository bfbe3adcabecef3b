"""
Speedup as the channel improves
===============================

Data speedup depends only on sizes, so it stays flat across SNR. Latency
speedup shrinks: the raw stream gets faster with throughput, while the
Mirage payload is so small that the fixed per-transmission overhead t0
dominates its latency.
"""

import numpy as np

from mirage.channel import ChannelConfig
from mirage.pipeline import SchemeConfig, prepare_models, records_to_csv, sweep, synthetic_video
from mirage.transport import Scheme

video = synthetic_video()
vq = prepare_models(video, Scheme.MIRAGE_VQ, steps=60)
rows = sweep(video, [SchemeConfig(Scheme.MIRAGE_VQ, vq=vq), SchemeConfig(Scheme.RAW)],
             [-10, -5, 0, 5, 10], ChannelConfig(0, 20e6, fixed_overhead_s=0.05), seeds=3)
print(records_to_csv(rows[:4]))

for snr in (-10, -5, 0, 5, 10):
    vq_rows = [r for r in rows if r.snr_db == snr and r.scheme == Scheme.MIRAGE_VQ]
    raw_rows = [r for r in rows if r.snr_db == snr and r.scheme == Scheme.RAW]
    print(f"{snr:+4d} dB  VQ data x{np.median([r.quality.data_speedup for r in vq_rows]):8.1f}"
          f"  latency x{np.median([r.quality.latency_speedup for r in vq_rows]):6.1f}"
          f"  raw PSNR {np.median([r.quality.psnr_db for r in raw_rows]):5.2f} dB")
