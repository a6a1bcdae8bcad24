"""Command-line entry point: ``chaospeech`` (or ``python3 -m chaospeech``).

Every command prints a JSON report on stdout.  ``--out`` writes the result to
a file instead: a key for ``keygen``, a container for ``encrypt``, a WAV for
``decrypt``/``recv``, and for ``analyze``/``reproduce`` a report whose format
follows the suffix (``.json``, ``.csv``, or ``.dat`` for gnuplot columns).
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import adpcm, audio, pipeline, reproduce
from .analysis import differential, keyspace, lyapunov, randomness, reports, sensitivity
from .errors import ChaospeechError
from .keys import KeyBundle, keygen, load_key, save_key
from .stream_cipher import ChaoticSystem, keystream, sigma_for_epsilon
from .transport import DEFAULT_GROUP, DEFAULT_PORT, GroupConfig, MulticastReceiver, MulticastSender

log = logging.getLogger("chaospeech")

EXIT_USAGE = 2
EXIT_OS = 7


# key handling -----------------------------------------------------------------

def _stream_overrides(args) -> dict:
    out = {}
    if getattr(args, "rounds", None) is not None:
        out["rounds"] = args.rounds
    eps = getattr(args, "eps", None)
    sigma = getattr(args, "sigma", None)
    if eps is not None or sigma is not None:
        out["epsilon"] = eps
        out["sigma"] = sigma if sigma is not None or eps is None else sigma_for_epsilon(eps)
    return out


def resolve_key(args) -> KeyBundle:
    """Key from ``--key`` (reference key otherwise) with flag overrides applied."""
    key = load_key(args.key) if getattr(args, "key", None) else keygen()
    o = _stream_overrides(args)
    if "epsilon" in o:
        s = key.stream.system
        eps = o["epsilon"] if o["epsilon"] is not None else s.epsilon
        key = key.with_stream(system=ChaoticSystem(s.A, eps, o["sigma"]).validate())
    if "rounds" in o:
        key = key.with_stream(rounds=o["rounds"])
    return key


def _group(args) -> GroupConfig:
    return GroupConfig(args.group, args.port)


# output -------------------------------------------------------------------------

def emit(report: dict, out=None, header=None, rows=None) -> None:
    """Print the report, or write it to ``out`` in the format its suffix names."""
    if out is None:
        print(reports.to_json(report))
        return
    suffix = Path(out).suffix.lower()
    if suffix in (".csv", ".dat"):
        if header is None:
            raise ValueError("this report has no tabular form; use a .json output")
        (reports.write_csv if suffix == ".csv" else reports.write_gnuplot)(out, header, rows)
    else:
        reports.to_json(report, out)
    print(reports.to_json({"written": str(out)}))


# commands -----------------------------------------------------------------------

def cmd_keygen(args):
    o = _stream_overrides(args)
    key = keygen(args.seed, epsilon=o.get("epsilon"), sigma=o.get("sigma"), rounds=o.get("rounds"))
    if args.out:
        save_key(key, args.out)
        print(reports.to_json({"written": str(args.out)}))
    else:
        print(reports.to_json(key.to_dict()))


def cmd_encrypt(args):
    n = pipeline.encrypt_file(args.input, resolve_key(args), args.out)
    print(reports.to_json({"frames": n, "written": str(args.out)}))


def cmd_decrypt(args):
    n = pipeline.decrypt_file(args.input, resolve_key(args), args.out)
    print(reports.to_json({"frames": n, "written": str(args.out)}))


def cmd_send(args):
    key = resolve_key(args)
    samples, _ = audio.read_wav(args.input)
    with MulticastSender(_group(args)) as sender:
        n = pipeline.stream_send(samples, key, sender, pace=args.pace)
    print(reports.to_json({"frames": n, "group": args.group, "port": args.port}))


def assemble(frames) -> np.ndarray:
    """Concatenate received ``(seq, pcm)`` frames, filling lost ones with silence."""
    if not frames:
        return np.zeros(0, dtype=np.int16)
    by_seq = dict(frames)
    first, last = min(by_seq), max(by_seq)
    silence = np.zeros(adpcm.BLOCK_SAMPLES, dtype=np.int16)
    return np.concatenate([by_seq.get(s, silence) for s in range(first, last + 1)])


def cmd_recv(args):
    key = resolve_key(args)
    with MulticastReceiver(_group(args)) as rx:
        print(reports.to_json({"listening": args.group, "port": args.port}), flush=True)
        frames = pipeline.stream_receive(rx, key, max_frames=args.frames, idle_timeout=args.timeout)
    pcm = assemble(frames)
    audio.write_wav(args.out, pcm)
    seqs = sorted(s for s, _ in frames)
    print(reports.to_json({"frames": len(frames), "seqs": seqs, "written": str(args.out)}))


def _random_frame(seed: int) -> bytes:
    return np.random.default_rng(seed).integers(0, 256, adpcm.FRAME_BYTES, dtype=np.uint8).tobytes()


def an_lyapunov(args):
    key = resolve_key(args)
    if args.sweep:
        rows = lyapunov.sweep(args.sweep, iterations=args.iterations, base=key.stream.system)
        header = ["epsilon", "sigma", "le1", "le2", "le3"]
        return {"sweep": [dict(zip(header, r)) for r in rows]}, header, rows
    res = lyapunov.lyapunov_spectrum(key.stream.system, args.iterations, args.discard)
    s = key.stream.system
    return ({"epsilon": s.epsilon, "sigma": s.sigma, **res.to_dict()},
            ["epsilon", "sigma", "le1", "le2", "le3"], [[s.epsilon, s.sigma, *res.exponents]])


def an_nist(args):
    key = resolve_key(args)
    n_bytes = args.sequences * args.bits // 8 + 1
    if args.input:
        stream = Path(args.input).read_bytes()
    else:
        stream = keystream(key.stream, n_bytes)
    res = randomness.battery(stream, args.sequences, args.bits, args.alpha)
    rows = []
    for i, r in enumerate(res["reports"]):
        p = r.pvalues
        rows.append([i, p["frequency"], p["block_frequency"], p["runs"],
                     *p["cumulative_sums"], p["longest_run"]])
    header = ["sequence", "frequency", "block_frequency", "runs", "cusum_fwd", "cusum_bwd", "longest_run"]
    report = {"epsilon": key.stream.system.epsilon, "sigma": key.stream.system.sigma,
              "alpha": args.alpha, "n_sequences": args.sequences, "bits": args.bits,
              "pass_counts": res["pass_counts"], "pvalues": [dict(zip(header, r)) for r in rows]}
    return report, header, rows


def an_npcr(args):
    key = resolve_key(args)
    frame = _random_frame(args.seed)
    res = differential.average_npcr_uaci(key.stream, frame, args.positions, args.seed)
    return ({"rounds": key.stream.rounds, "positions": args.positions, **res.to_dict()},
            ["rounds", "npcr", "uaci"], [[key.stream.rounds, res.npcr, res.uaci]])


def an_sensitivity(args):
    key = resolve_key(args)
    res = sensitivity.sensitivity_scan(key.stream, fail_fraction=args.fail_fraction, seed=args.seed)
    rows = [[i + 1, j + 1, res.exponents[i, j]] for i in range(3) for j in range(3)]
    return res.to_dict(), ["i", "j", "log10_threshold"], rows


def an_keyspace(args):
    res = keyspace.key_space()
    d = res.to_dict()
    return d, list(d), [list(d.values())]


def an_histogram(args):
    key = resolve_key(args)
    if args.input:
        data = Path(args.input).read_bytes()
        if data[:4] == pipeline.MAGIC:
            frames, *_ = pipeline.unpack_container(data)
            data = b"".join(frames)
        h = differential.histogram(data)
        return h.to_dict(), ["value", "count"], [[v, c] for v, c in enumerate(h.counts)]
    plain = adpcm.compress(audio.speech_like(8.0, seed=args.seed))
    cipher = [pipeline.encrypt_compressed(f, key) for f in plain]
    hp, hc = differential.histogram(b"".join(plain)), differential.histogram(b"".join(cipher))
    report = {"plain": {"chi2": hp.chi2, "pvalue": hp.pvalue},
              "cipher": {"chi2": hc.chi2, "pvalue": hc.pvalue},
              "plain_counts": hp.counts.tolist(), "cipher_counts": hc.counts.tolist()}
    rows = [[v, a, b] for v, (a, b) in enumerate(zip(hp.counts, hc.counts))]
    return report, ["value", "plain", "cipher"], rows


ANALYZERS = {
    "lyapunov": an_lyapunov, "nist": an_nist, "npcr": an_npcr,
    "sensitivity": an_sensitivity, "keyspace": an_keyspace, "histogram": an_histogram,
}


def cmd_analyze(args):
    report, header, rows = ANALYZERS[args.what](args)
    emit(report, args.out, header, rows)


def cmd_reproduce(args):
    key = resolve_key(args)
    samples = audio.read_wav(args.input)[0] if args.input else audio.speech_like(8.0, seed=args.seed)
    results = [reproduce.run_scenario(s, samples, key, args.transport,
                                      _group(args) if args.transport == "multicast" else None)
               for s in args.scenario or reproduce.SCENARIOS]
    rows = [[r["scenario"], i + 1, rx["frames"], rx["identical"], rx["npcr"], rx["snr_db"]]
            for r in results for i, rx in enumerate(r["receivers"])]
    emit({"results": results}, args.out,
         ["scenario", "receiver", "frames", "identical", "npcr", "snr_db"], rows)


# parser -------------------------------------------------------------------------

def _key_flags(p, rounds=True):
    p.add_argument("--key", metavar="FILE", help="key file (default: reference key)")
    if rounds:
        p.add_argument("--rounds", type=int, metavar="M", help="override the cipher round count")
    p.add_argument("--eps", type=float, help="override the controller gain epsilon")
    p.add_argument("--sigma", type=float, help="override sigma (default follows --eps)")


def _group_flags(p):
    p.add_argument("--group", default=DEFAULT_GROUP, metavar="ADDR")
    p.add_argument("--port", type=int, default=DEFAULT_PORT, metavar="N")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="chaospeech", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("keygen", help="write a key bundle")
    p.add_argument("--seed", type=int, help="random key from this seed (default: reference key)")
    p.add_argument("--rounds", type=int, metavar="M")
    p.add_argument("--eps", type=float)
    p.add_argument("--sigma", type=float)
    p.add_argument("--out", metavar="FILE")
    p.set_defaults(func=cmd_keygen)

    for name, func, what in (("encrypt", cmd_encrypt, "WAV -> container"),
                             ("decrypt", cmd_decrypt, "container -> WAV")):
        p = sub.add_parser(name, help=what)
        p.add_argument("input")
        _key_flags(p)
        p.add_argument("--out", required=True, metavar="FILE")
        p.set_defaults(func=func)

    p = sub.add_parser("send", help="stream a WAV to a multicast group")
    p.add_argument("input")
    _key_flags(p)
    _group_flags(p)
    p.add_argument("--pace", type=float, default=0.0, help="seconds between frames")
    p.set_defaults(func=cmd_send)

    p = sub.add_parser("recv", help="receive from a multicast group into a WAV")
    _key_flags(p)
    _group_flags(p)
    p.add_argument("--out", required=True, metavar="FILE")
    p.add_argument("--frames", type=int, help="stop after this many frames")
    p.add_argument("--timeout", type=float, default=5.0, help="stop after this many idle seconds")
    p.set_defaults(func=cmd_recv)

    p = sub.add_parser("analyze", help="security analysis reports")
    p.add_argument("what", choices=sorted(ANALYZERS))
    p.add_argument("input", nargs="?", help="nist: raw bit source; histogram: file or container")
    _key_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", metavar="FILE", help=".json, .csv or .dat (gnuplot)")
    p.add_argument("--iterations", type=int, default=100_000, help="lyapunov")
    p.add_argument("--discard", type=int, default=1000, help="lyapunov")
    p.add_argument("--sweep", type=float, nargs="+", metavar="EPS", help="lyapunov gain sweep")
    p.add_argument("--sequences", type=int, default=20, help="nist")
    p.add_argument("--bits", type=int, default=100_000, help="nist: bits per sequence")
    p.add_argument("--alpha", type=float, default=randomness.DEFAULT_ALPHA, help="nist")
    p.add_argument("--positions", type=int, default=256, help="npcr")
    p.add_argument("--fail-fraction", type=float, default=sensitivity.DEFAULT_FAIL_FRACTION,
                   help="sensitivity")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("reproduce", help="matched/mismatched receiver experiments")
    p.add_argument("--scenario", action="append", choices=reproduce.SCENARIOS)
    p.add_argument("--transport", choices=("simulated", "multicast"), default="simulated")
    p.add_argument("--input", metavar="WAV")
    _key_flags(p)
    _group_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", metavar="FILE")
    p.set_defaults(func=cmd_reproduce)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except ChaospeechError as exc:
        print(f"chaospeech: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"chaospeech: {exc}", file=sys.stderr)
        return EXIT_OS
    except ValueError as exc:
        print(f"chaospeech: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return 0


if __name__ == "__main__":
    sys.exit(main())
