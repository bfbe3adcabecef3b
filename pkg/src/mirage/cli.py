"""Command-line entry point.

Exit status: 0 on success, 1 for usage errors, 2 for runtime failures (the
message goes to standard error).
"""
from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

from .channel import ChannelConfig, ReliabilityConfig
from .codec.vqvae import VqVaeConfig, train_vqvae
from .errors import MirageError
from .genclient import GenerationRequest, GeneratorConfig, personalize_prompt, request_generation
from .pipeline import (
    DEFAULT_CAPTION,
    SchemeConfig,
    VqModel,
    load_vq_model,
    prepare_models,
    records_to_csv,
    records_to_json,
    run_scheme,
    run_table1,
    save_vq_model,
    sweep,
)
from .selector import SelectorConfig
from .transport import Scheme
from .video import atomic_write, export_frames, ingest, synthetic_video


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _scheme(name: str) -> Scheme:
    try:
        return Scheme.parse(name)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, got {text!r}") from None


def _scheme_list(text: str) -> list[Scheme]:
    return [_scheme(t.strip()) for t in text.split(",") if t.strip()]


def _add_video_args(p):
    p.add_argument("--input", help="frame directory with manifest.json (default: synthetic test video)")
    p.add_argument("--q", type=int, default=8, help="quantization bits for raw/AE schemes")
    p.add_argument("--K", type=int, default=256, help="codebook size for mirage-vq")
    p.add_argument("--keyframes", type=int, default=1, help="keyframe budget N")
    p.add_argument("--scorer", default="variance", help="keyframe scorer: variance, tempdiff")
    p.add_argument("--caption", help="UTF-8 caption file")
    p.add_argument("--codebook", help="trained codebook file (weights are read from <file>.params.npz)")
    p.add_argument("--train-steps", type=int, default=200, help="VQ-VAE steps when no codebook is given")
    p.add_argument("--bandwidth-hz", type=float, default=20e6)
    p.add_argument("--overhead-s", type=float, default=0.0, help="fixed per-transmission overhead t0")
    p.add_argument("--epsilon", type=float, default=1e-6, help="caption residual error target")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mirage", description="Semantic video transmission simulator.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one scheme once")
    p.add_argument("--scheme", type=_scheme, required=True)
    p.add_argument("--snr-db", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    _add_video_args(p)

    p = sub.add_parser("sweep", help="scheme x SNR x seed grid, CSV output")
    p.add_argument("--snr-db", type=_float_list, required=True)
    p.add_argument("--schemes", type=_scheme_list, required=True)
    p.add_argument("--seeds", type=int, required=True, help="number of seeds, starting at --seed")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--json", help="also write full records as JSON here")
    _add_video_args(p)

    p = sub.add_parser("train-codebook", help="train a VQ-VAE and write its codebook")
    p.add_argument("--input", required=True)
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--patch", type=int, required=True)
    p.add_argument("--latent", type=int, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("table1", help="speedups from supplied sizes (size-model mode)")
    p.add_argument("--sizes", required=True, help="JSON: scheme -> KB or {frame, text}")
    p.add_argument("--snr-db", type=float, required=True)
    p.add_argument("--bandwidth-hz", type=float, required=True)
    p.add_argument("--overhead-s", type=float, default=0.0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("gen-request", help="ask a generation service for frames")
    p.add_argument("--caption", required=True)
    p.add_argument("--identity", default="")
    p.add_argument("--style", default="")
    p.add_argument("--keyframes", required=True, help="frame directory with manifest.json")
    p.add_argument("--frames", type=int, required=True)
    where = p.add_mutually_exclusive_group()
    where.add_argument("--mock", action="store_true")
    where.add_argument("--endpoint")
    p.add_argument("--width", type=int)
    p.add_argument("--height", type=int)
    p.add_argument("--fps", type=float)
    p.add_argument("--lambda", dest="lambda_", type=float, default=0.5)
    p.add_argument("--steps", type=int, default=50)
    p.add_argument("--guidance", type=float, default=7.5)
    p.add_argument("--timeout", type=float, default=60.0)
    p.add_argument("--out", required=True)
    return parser


def _load_video(args):
    return ingest(args.input) if args.input else synthetic_video()


def _read_caption(path) -> str:
    if path is None:
        return DEFAULT_CAPTION
    return Path(path).read_text(encoding="utf-8")


def _scheme_config(scheme, args, video, seed) -> SchemeConfig:
    caption = _read_caption(args.caption)
    selector = SelectorConfig(args.keyframes, args.scorer)
    common = dict(q=args.q, K=args.K, N=args.keyframes, caption=caption, selector=selector)
    if scheme in (Scheme.RAW_AE, Scheme.MIRAGE_AE):
        return SchemeConfig(scheme, ae=prepare_models(video, scheme, q=args.q), **common)
    if scheme == Scheme.MIRAGE_VQ:
        if args.codebook:
            model = load_vq_model(args.codebook)
        else:
            model = prepare_models(video, scheme, K=args.K, seed=seed, steps=args.train_steps)
        return SchemeConfig(scheme, vq=model, **common)
    return SchemeConfig(scheme, **common)


def cmd_simulate(args):
    video = _load_video(args)
    scfg = _scheme_config(args.scheme, args, video, args.seed)
    ccfg = ChannelConfig(args.snr_db, args.bandwidth_hz, args.overhead_s, args.seed)
    rec = run_scheme(video, scfg, ccfg, ReliabilityConfig(epsilon=args.epsilon), args.seed)
    atomic_write(args.out, (json.dumps(rec.to_dict(), indent=2, sort_keys=True) + "\n").encode())


def cmd_sweep(args):
    video = _load_video(args)
    schemes = [_scheme_config(s, args, video, args.seed) for s in args.schemes]
    ccfg = ChannelConfig(0.0, args.bandwidth_hz, args.overhead_s, args.seed)
    rows = sweep(video, schemes, args.snr_db, ccfg, ReliabilityConfig(epsilon=args.epsilon),
                 seeds=list(range(args.seed, args.seed + args.seeds)))
    atomic_write(args.out, records_to_csv(rows).encode())
    if args.json:
        atomic_write(args.json, (records_to_json(rows) + "\n").encode())
    failed = [r for r in rows if r.error]
    for r in failed:
        print(f"cell {r.scheme.cli_name} snr={r.snr_db} seed={r.seed}: {r.error}", file=sys.stderr)


def cmd_train_codebook(args):
    video = ingest(args.input)
    cfg = VqVaeConfig(patch_size=args.patch, latent_dim=args.latent, K=args.K, steps=args.steps)
    res = train_vqvae(video.frames, cfg, seed=args.seed)
    save_vq_model(VqModel(res.encoder, res.decoder, res.codebook), args.out)
    last = res.loss_trace[-1]
    print(f"codebook {res.codebook.id:08x}: K={cfg.K} recon={last.recon:.6g} -> {args.out}")


def cmd_table1(args):
    sizes = json.loads(Path(args.sizes).read_text(encoding="utf-8"))
    ccfg = ChannelConfig(args.snr_db, args.bandwidth_hz, args.overhead_s)
    report = run_table1(None, [], ccfg, sizes=sizes)
    atomic_write(args.out, (json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n").encode())


def cmd_gen_request(args):
    keys = ingest(args.keyframes)
    H, W = keys.shape[:2]
    prompt = personalize_prompt(_read_caption(args.caption), args.identity, args.style)
    cfg = GeneratorConfig(F=args.frames, rho=args.fps or keys.fps, H_g=args.height or H,
                          W_g=args.width or W, lambda_=args.lambda_, N_steps=args.steps,
                          omega=args.guidance)
    req = GenerationRequest(prompt, list(keys.frames), cfg)
    video = request_generation(req, "mock" if args.mock else args.endpoint, timeout=args.timeout)
    export_frames(video.frames, args.out, video.fps)


COMMANDS = {
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "train-codebook": cmd_train_codebook,
    "table1": cmd_table1,
    "gen-request": cmd_gen_request,
}


_NUMERIC = re.compile(r"^-?[\d.eE+-]+(,-?[\d.eE+-]+)*$")


def _join_negative_values(argv):
    # "--snr-db -10,-5,10" would otherwise read the value as an option
    out, it = [], iter(argv)
    for tok in it:
        if tok == "--snr-db":
            nxt = next(it, None)
            if nxt is not None and _NUMERIC.match(nxt):
                out.append(f"{tok}={nxt}")
                continue
            out.append(tok)
            if nxt is not None:
                out.append(nxt)
            continue
        out.append(tok)
    return out


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_join_negative_values(argv))
    try:
        COMMANDS[args.command](args)
    except (MirageError, ValueError, OSError) as exc:
        print(f"mirage {args.command}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
