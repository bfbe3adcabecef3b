"""
Receiver side: prompt and generation request
============================================

The receiver turns the caption into a personalised prompt and asks a
generator for frames. The mock stands in for a real service.
"""

from mirage.genclient import GenerationRequest, GeneratorConfig, mock_generate, personalize_prompt
from mirage.selector import SelectorConfig, score_frames, select_keyframes
from mirage.video import synthetic_video

video = synthetic_video(n=8, height=64, width=64)
keys = select_keyframes(score_frames(video, SelectorConfig(scorer="tempdiff")), 2)
print("keyframes", keys)

prompt = personalize_prompt("a bright square drifts over a colour gradient", "anonymized face", "oil painting")
print(prompt.serialize())

req = GenerationRequest(prompt, [video.frames[i] for i in keys], GeneratorConfig(F=6, H_g=128, W_g=128))
out = mock_generate(req)
print(out.frames.shape, "first frame equals first keyframe (upscaled):",
      bool((out.frames[0][::2, ::2] == video.frames[keys[0]]).all()))

# the JSON body a real endpoint would receive
print(req.to_json()[:160], "...")
