"""
Data and latency speedups
=========================

First with externally supplied per-scheme sizes, then by actually running all
four schemes on the synthetic clip.
"""

from mirage.channel import ChannelConfig
from mirage.pipeline import SchemeConfig, prepare_models, run_table1, synthetic_video
from mirage.transport import Scheme

sizes = {"raw": 32415.88, "raw-ae": 21615.02,
         "mirage-ae": {"frame": 128, "text": 0.40}, "mirage-vq": {"frame": 0.25, "text": 0.38}}
rep = run_table1(None, [], ChannelConfig(-10, 20e6, 0.002), sizes=sizes)
for r in rep.records:
    print(f"{r.scheme.cli_name:10s} {r.semantic_kb:10.2f} KB  data x{r.quality.data_speedup:9.1f}"
          f"  latency x{r.quality.latency_speedup:9.1f}")

###############################################################################
# Now the simulated path: 16 frames of 256x256, one keyframe for Mirage.

video = synthetic_video()
ae = prepare_models(video, Scheme.RAW_AE)
vq = prepare_models(video, Scheme.MIRAGE_VQ, steps=60)
configs = [SchemeConfig(Scheme.RAW), SchemeConfig(Scheme.RAW_AE, ae=ae),
           SchemeConfig(Scheme.MIRAGE_AE, ae=ae), SchemeConfig(Scheme.MIRAGE_VQ, vq=vq)]
rep = run_table1(video, configs, ChannelConfig(10, 20e6, 0.002, seed=3))
for r in rep.records:
    q = r.quality
    print(f"{r.scheme.cli_name:10s} {r.semantic_kb:10.2f} KB  bpp={q.bpp:7.4f}  PSNR={q.psnr_db:6.2f} dB"
          f"  data x{q.data_speedup:8.1f}  latency x{q.latency_speedup:7.1f}")
