"""Command line front end: code construction, BLER sweeps, self-checks, and
channel analysis.

Subcommands
-----------
construct   build a reliability profile and a frozen set, write both to disk
simulate    run Monte Carlo sweeps and append one CSV row per operating point
verify      run the correctness suite (exit code 1 on any failure)
analyze     print Bhattacharyya / capacity tables for channels or code specs

All randomness is driven by (seed, trial index), so outputs are reproducible
byte for byte for a fixed seed. A plain-text key=value config file can seed
any flag's default; explicit flags win, and the POLARMUX_SEED environment
variable sits between the two for the seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from .bicm import (
    LinkConfig,
    Qam16Mapper,
    compound_frames,
    compound_genie_sampler,
    separated_frames,
    separated_genie_sampler,
)
from .channels import (
    bhattacharyya,
    box_star,
    circle_star,
    dmc_from_text,
    is_symmetric,
    make_bec,
    make_bsc,
    symmetric_capacity,
)
from .construction import (
    ReliabilityProfile,
    allocate_separated_rates,
    bec_genie_sampler,
    bec_llr_words,
    bec_z_profile,
    mc_genie_estimate,
    profile_from_csv,
    profile_to_csv,
    select_information_set,
    threshold_good_set,
    union_bound,
)
from .decoder import ScDecoder
from .transform import CompoundSpec, compound_transform, spec_from_text, spec_to_text
from .verify import run_checks

CSV_HEADER = "scheme,N,rate,ebn0_db,trials,frame_errors,bit_errors,bler,ci_lo,ci_hi,seed"
_WILSON_Z = 1.959963984540054  # two-sided 95%


@dataclass(frozen=True)
class SimRecord:
    """One Monte Carlo operating point."""

    scheme: str
    block_length: int
    rate: float
    ebn0_db: float
    trials: int
    frame_errors: int
    bit_errors: int
    seed: int

    @property
    def bler(self) -> float:
        return self.frame_errors / self.trials

    @property
    def ci95(self) -> tuple[float, float]:
        return wilson_interval(self.frame_errors, self.trials)

    def to_csv_row(self) -> str:
        lo, hi = self.ci95
        return ",".join(
            [
                self.scheme,
                str(self.block_length),
                repr(self.rate),
                repr(self.ebn0_db),
                str(self.trials),
                str(self.frame_errors),
                str(self.bit_errors),
                repr(self.bler),
                repr(lo),
                repr(hi),
                str(self.seed),
            ]
        )

    @classmethod
    def from_csv_row(cls, row: str) -> "SimRecord":
        parts = row.strip().split(",")
        if len(parts) != 11:
            raise ValueError(f"bad record row: {row!r}")
        return cls(
            scheme=parts[0],
            block_length=int(parts[1]),
            rate=float(parts[2]),
            ebn0_db=float(parts[3]),
            trials=int(parts[4]),
            frame_errors=int(parts[5]),
            bit_errors=int(parts[6]),
            seed=int(parts[10]),
        )


def wilson_interval(successes: int, trials: int, z: float = _WILSON_Z):
    """Wilson 95% score interval; stays sane at zero or few counts."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    p = successes / trials
    denom = 1.0 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * np.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return float(max(0.0, centre - half)), float(min(1.0, centre + half))


@dataclass
class RunConfig:
    """Resolved knobs for one construct or simulate invocation."""

    scheme: str
    channel: str
    block_length: int
    rate: float
    l: int
    construction: str
    construction_point: float
    epsilons: tuple
    ebn0_db: tuple
    trials: int | None
    max_trials: int
    target_errors: int
    seed: int
    out: str


def _trial_rng(seed: int, start: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((seed, start)))


# ---------------------------------------------------------------------------
# construct


def _build_open_spec(n_total: int, l: int) -> CompoundSpec:
    if n_total % l or (n_total // l) & (n_total // l - 1):
        raise ValueError("block length must be l times a power of two")
    return CompoundSpec.make(l=l, n=(n_total // l).bit_length() - 1)


def cmd_construct(cfg: RunConfig) -> int:
    total_k = round(cfg.rate * cfg.block_length)
    if abs(total_k - cfg.rate * cfg.block_length) > 1e-9:
        raise ValueError("rate times block length must be an integer")

    if cfg.scheme == "compound":
        spec = _build_open_spec(cfg.block_length, cfg.l)
        profile = _profile_for(spec, cfg)
        code = spec.with_frozen(select_information_set(profile, total_k))
        _write(cfg.out + ".profile.csv", profile_to_csv(profile))
        _write(cfg.out + ".spec", spec_to_text(code))
        print(f"wrote {cfg.out}.profile.csv and {cfg.out}.spec "
              f"(k={total_k}, N={cfg.block_length})")
        return 0

    # separated: one code of length N/2 per sub-channel
    half_spec = _build_open_spec(cfg.block_length // 2, 1)
    prof1, prof2 = _separated_profiles(half_spec, cfg)
    k1, k2 = allocate_separated_rates(prof1, prof2, total_k)
    code1 = half_spec.with_frozen(select_information_set(prof1, k1))
    code2 = half_spec.with_frozen(select_information_set(prof2, k2))
    for tag, prof, code in (("w1", prof1, code1), ("w2", prof2, code2)):
        _write(f"{cfg.out}.{tag}.profile.csv", profile_to_csv(prof))
        _write(f"{cfg.out}.{tag}.spec", spec_to_text(code))
    print(f"wrote {cfg.out}.w1/.w2 profile and spec files "
          f"(k1={k1}, k2={k2}, rates {k1 / (cfg.block_length // 2):.4f}"
          f"/{k2 / (cfg.block_length // 2):.4f})")
    return 0


def _profile_for(spec: CompoundSpec, cfg: RunConfig) -> ReliabilityProfile:
    if cfg.construction == "exact-bec":
        if cfg.channel != "bec":
            raise ValueError("exact construction needs erasure sub-channels")
        return bec_z_profile(np.array(cfg.epsilons), spec)
    if cfg.channel == "bec":
        sampler = bec_genie_sampler(spec, np.array(cfg.epsilons))
        point = cfg.epsilons[0]
    else:
        link = LinkConfig(cfg.construction_point, cfg.rate)
        sampler = compound_genie_sampler(spec, link, Qam16Mapper.build())
        point = cfg.construction_point
    return mc_genie_estimate(sampler, cfg.trials or 200_000, cfg.seed,
                             construction_point=point)


def _separated_profiles(half_spec: CompoundSpec, cfg: RunConfig):
    half = half_spec.block_length
    if cfg.construction == "exact-bec":
        if cfg.channel != "bec" or len(cfg.epsilons) != 2:
            raise ValueError("exact separated construction needs two erasure rates")
        return (
            bec_z_profile(cfg.epsilons[0], half_spec),
            bec_z_profile(cfg.epsilons[1], half_spec),
        )
    if cfg.channel == "bec":
        p1 = mc_genie_estimate(bec_genie_sampler(half_spec, cfg.epsilons[0]),
                               cfg.trials or 200_000, cfg.seed,
                               construction_point=cfg.epsilons[0])
        p2 = mc_genie_estimate(bec_genie_sampler(half_spec, cfg.epsilons[1]),
                               cfg.trials or 200_000, cfg.seed + 1,
                               construction_point=cfg.epsilons[1])
        return p1, p2
    link = LinkConfig(cfg.construction_point, cfg.rate)
    sampler = separated_genie_sampler(half_spec, half_spec, link, Qam16Mapper.build())
    both = mc_genie_estimate(sampler, cfg.trials or 200_000, cfg.seed,
                             construction_point=cfg.construction_point)
    return (
        ReliabilityProfile(both.scores[:half], both.kind, both.construction_point),
        ReliabilityProfile(both.scores[half:], both.kind, both.construction_point),
    )


def _write(path: str, text: str):
    with open(path, "w") as fh:
        fh.write(text)


# ---------------------------------------------------------------------------
# simulate


def _sweep_point(runner, block_length, scheme, rate, ebn0, cfg: RunConfig,
                 batch: int = 256) -> SimRecord:
    trials = errors = bit_errors = 0
    budget = cfg.trials if cfg.trials is not None else cfg.max_trials
    target = None if cfg.trials is not None else cfg.target_errors
    while trials < budget and (target is None or errors < target):
        n = min(batch, budget - trials)
        fe, be = runner(n, _trial_rng(cfg.seed, trials), ebn0)
        errors += fe
        bit_errors += be
        trials += n
    return SimRecord(scheme, block_length, rate, ebn0, trials, errors, bit_errors,
                     cfg.seed)


def _compound_runner(code: CompoundSpec, cfg: RunConfig):
    rate = code.info_set.size / code.block_length
    if cfg.channel == "bec":
        decoder = ScDecoder(code)
        info = code.info_set

        def run(n, rng, _point):
            u = np.zeros((n, code.block_length), dtype=np.uint8)
            u[:, info] = rng.integers(0, 2, (n, info.size), dtype=np.uint8)
            x = compound_transform(u, code)
            llrs = bec_llr_words(x, np.array(cfg.epsilons), code, rng)
            u_hat, _, _ = decoder.decode_batch(llrs)
            bad = u_hat != u
            return int(np.any(bad, axis=1).sum()), int(bad.sum())

        return run, rate

    mapper = Qam16Mapper.build()
    decoder = ScDecoder(code)

    def run(n, rng, point):
        link = LinkConfig(point, rate)
        u, u_hat, _ = compound_frames(code, link, mapper, n, rng, decoder=decoder)
        bad = u_hat != u
        return int(np.any(bad, axis=1).sum()), int(bad.sum())

    return run, rate


def _separated_runner(code1: CompoundSpec, code2: CompoundSpec, cfg: RunConfig):
    total = code1.block_length + code2.block_length
    rate = (code1.info_set.size + code2.info_set.size) / total
    if cfg.channel != "qam16":
        raise ValueError("the separated baseline is defined over 16-QAM")
    mapper = Qam16Mapper.build()
    decoders = (ScDecoder(code1), ScDecoder(code2))

    def run(n, rng, point):
        link = LinkConfig(point, rate)
        (u1, h1, _), (u2, h2, _) = separated_frames(
            code1, code2, link, mapper, n, rng, decoders=decoders
        )
        bad1, bad2 = u1 != h1, u2 != h2
        frame = np.any(bad1, axis=1) | np.any(bad2, axis=1)
        return int(frame.sum()), int(bad1.sum() + bad2.sum())

    return run, rate


def cmd_simulate(cfg: RunConfig, spec_paths: dict) -> int:
    if cfg.scheme == "compound":
        code = _load_code(spec_paths, "spec", cfg)
        runner, rate = _compound_runner(code, cfg)
        block_length = code.block_length
    else:
        code1 = _load_code(spec_paths, "spec1", cfg)
        code2 = _load_code(spec_paths, "spec2", cfg)
        runner, rate = _separated_runner(code1, code2, cfg)
        block_length = code1.block_length + code2.block_length

    new_file = not (cfg.out and os.path.exists(cfg.out))
    rows = []
    for point in cfg.ebn0_db:
        rec = _sweep_point(runner, block_length, cfg.scheme, rate, point, cfg)
        rows.append(rec.to_csv_row())
        lo, hi = rec.ci95
        print(f"{cfg.scheme} Eb/N0={point:g} dB: bler={rec.bler:.6g} "
              f"[{lo:.3g}, {hi:.3g}] ({rec.frame_errors}/{rec.trials})")
    if cfg.out:
        with open(cfg.out, "a") as fh:
            if new_file:
                fh.write(CSV_HEADER + "\n")
            fh.write("\n".join(rows) + "\n")
    return 0


def _load_code(spec_paths, key, cfg: RunConfig) -> CompoundSpec:
    path = spec_paths.get(key)
    if path:
        with open(path) as fh:
            return spec_from_text(fh.read())
    if key == "spec" and spec_paths.get("profile"):
        with open(spec_paths["profile"]) as fh:
            profile = profile_from_csv(fh.read())
        k = spec_paths.get("k")
        if k is None:
            raise ValueError("deriving a code from a profile needs --k")
        spec = _build_open_spec(len(profile), cfg.l)
        return spec.with_frozen(select_information_set(profile, int(k)))
    raise ValueError(f"missing --{key} (or --profile/--k) for scheme {cfg.scheme}")


# ---------------------------------------------------------------------------
# verify / analyze


def cmd_verify(level: str, json_path: str | None) -> int:
    results = run_checks(level)
    failed = [name for name, ok, _ in results if not ok]
    for name, ok, detail in results:
        mark = "PASS" if ok else "FAIL"
        print(f"[{mark}] {name}" + (f" ({detail})" if detail else ""))
    if json_path:
        payload = {
            "level": level,
            "checks": [
                {"name": name, "passed": bool(ok), "detail": detail}
                for name, ok, detail in results
            ],
            "all_passed": not failed,
        }
        _write(json_path, json.dumps(payload, indent=2) + "\n")
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return 1 if failed else 0


def _channel_from_args(args, prefix="") -> "object":
    file_arg = getattr(args, prefix + "file", None)
    bec_arg = getattr(args, prefix + "bec", None)
    bsc_arg = getattr(args, prefix + "bsc", None)
    chosen = [v for v in (file_arg, bec_arg, bsc_arg) if v is not None]
    if len(chosen) != 1:
        raise ValueError("specify exactly one channel source")
    if file_arg is not None:
        with open(file_arg) as fh:
            return dmc_from_text(fh.read())
    if bec_arg is not None:
        return make_bec(bec_arg)
    return make_bsc(bsc_arg)


def cmd_analyze(args) -> int:
    if args.spec:
        with open(args.spec) as fh:
            spec = spec_from_text(fh.read())
        eps = args.epsilon if args.epsilon else [0.5]
        profile = bec_z_profile(np.array(eps), spec)
        print(f"code: l={spec.l} N={spec.block_length} frozen={spec.frozen.size}")
        print("index  z")
        for i, z in enumerate(profile.scores):
            tag = " frozen" if i in set(spec.frozen.tolist()) else ""
            print(f"{i:5d}  {z:.6e}{tag}")
        if args.beta is not None:
            good = threshold_good_set(profile, args.beta)
            print(f"good set at beta={args.beta}: {good.size} positions")
        if spec.frozen.size:
            print(f"union bound over unfrozen set: {union_bound(profile, spec.info_set):.6e}")
        return 0

    w = _channel_from_args(args)
    if args.combine:
        other = _channel_from_args(args, prefix="with_")
        w = box_star(w, other) if args.combine == "box" else circle_star(w, other)
    print(f"outputs:   {w.num_outputs}")
    print(f"z:         {bhattacharyya(w):.12g}")
    print(f"capacity:  {symmetric_capacity(w):.12g}")
    print(f"symmetric: {is_symmetric(w)}")
    return 0


# ---------------------------------------------------------------------------
# argument plumbing


def _read_config_file(path: str) -> dict:
    values = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"bad config line: {line!r}")
            key, val = (part.strip() for part in line.split("=", 1))
            values[key.replace("-", "_")] = val
    return values


def _resolve_seed(flag_value, config: dict) -> int:
    if flag_value is not None:
        return flag_value
    env = os.environ.get("POLARMUX_SEED")
    if env is not None:
        return int(env)
    if "seed" in config:
        return int(config["seed"])
    return 0


_CONFIG_CASTS = {
    "n": int, "l": int, "trials": int, "max_trials": int, "target_errors": int,
    "rate": float, "construction_point": float, "k": int,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="polarmux",
        description="polar coding over multi-channels: construction, simulation, checks",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    subparsers = []

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file supplying flag defaults")
    common.add_argument("--seed", type=int, default=None,
                        help="RNG seed (flag > POLARMUX_SEED > config > 0)")

    pc = sub.add_parser("construct", parents=[common],
                        help="build a reliability profile and frozen set")
    pc.add_argument("--scheme", choices=["compound", "separated"], default="compound")
    pc.add_argument("--channel", choices=["bec", "qam16"], default="qam16")
    pc.add_argument("--n", dest="block_length", type=int, default=1024,
                    help="total coded block length")
    pc.add_argument("--rate", type=float, default=0.5)
    pc.add_argument("--l", type=int, default=2, help="number of sub-channels")
    pc.add_argument("--construction", choices=["exact-bec", "mc-genie"],
                    default="mc-genie")
    pc.add_argument("--construction-point", type=float, default=5.0,
                    help="Eb/N0 (dB) the profile is estimated at")
    pc.add_argument("--epsilon", type=float, nargs="+", default=[0.5],
                    help="erasure rate per sub-channel (bec only)")
    pc.add_argument("--trials", type=int, default=None,
                    help="genie trials (default 200000)")
    pc.add_argument("--out", required=True, help="output path prefix")

    ps = sub.add_parser("simulate", parents=[common],
                        help="Monte Carlo block error rate sweep")
    ps.add_argument("--scheme", choices=["compound", "separated"], default="compound")
    ps.add_argument("--channel", choices=["bec", "qam16"], default="qam16")
    ps.add_argument("--spec", help="code file for the compound scheme")
    ps.add_argument("--spec1", help="strong sub-channel code (separated)")
    ps.add_argument("--spec2", help="weak sub-channel code (separated)")
    ps.add_argument("--profile", help="derive the compound code from this profile")
    ps.add_argument("--k", type=int, default=None,
                    help="information bits when deriving from a profile")
    ps.add_argument("--l", type=int, default=2)
    ps.add_argument("--ebn0-db", type=float, nargs="+", default=[5.0])
    ps.add_argument("--epsilon", type=float, nargs="+", default=[0.5])
    ps.add_argument("--trials", type=int, default=None,
                    help="run exactly this many trials per point")
    ps.add_argument("--max-trials", type=int, default=1_000_000)
    ps.add_argument("--target-errors", type=int, default=100)
    ps.add_argument("--out", default=None, help="CSV to append records to")

    pv = sub.add_parser("verify", parents=[common], help="run the self-check suite")
    pv.add_argument("--level", choices=["fast", "full"], default="fast")
    pv.add_argument("--json", dest="json_path", default=None,
                    help="also write a machine-readable report here")

    pa = sub.add_parser("analyze", parents=[common],
                        help="channel or code quality tables")
    pa.add_argument("--file", help="channel transition table file")
    pa.add_argument("--bec", type=float, help="erasure channel parameter")
    pa.add_argument("--bsc", type=float, help="symmetric channel crossover")
    pa.add_argument("--combine", choices=["box", "circle"],
                    help="combine with a second channel before analysing")
    pa.add_argument("--with-file", dest="with_file")
    pa.add_argument("--with-bec", dest="with_bec", type=float)
    pa.add_argument("--with-bsc", dest="with_bsc", type=float)
    pa.add_argument("--spec", help="code file: print its erasure z table")
    pa.add_argument("--epsilon", type=float, nargs="+",
                    help="erasure rates for the z table")
    pa.add_argument("--beta", type=float, default=None)
    subparsers.extend([pc, ps, pv, pa])
    return parser, subparsers


def _apply_config(subparsers, argv):
    """Load --config (if any) and install its values as parser defaults."""
    probe = argparse.ArgumentParser(add_help=False)
    probe.add_argument("--config")
    known, _ = probe.parse_known_args(argv)
    if not known.config:
        return {}
    config = _read_config_file(known.config)
    casted = {}
    for key, val in config.items():
        if key == "seed":
            continue
        if key in ("ebn0_db", "epsilon"):
            casted[key] = [float(v) for v in val.split()]
        else:
            casted[key] = _CONFIG_CASTS.get(key, str)(val)
    for sp in subparsers:
        accepted = {a.dest for a in sp._actions}
        sp.set_defaults(**{k: v for k, v in casted.items() if k in accepted})
    return config


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser, subparsers = build_parser()
    try:
        config = _apply_config(subparsers, argv)
        args = parser.parse_args(argv)
        seed = _resolve_seed(args.seed, config)
        if args.command == "construct":
            cfg = RunConfig(
                scheme=args.scheme, channel=args.channel,
                block_length=args.block_length, rate=args.rate, l=args.l,
                construction=args.construction,
                construction_point=args.construction_point,
                epsilons=tuple(args.epsilon), ebn0_db=(),
                trials=args.trials, max_trials=0, target_errors=0,
                seed=seed, out=args.out,
            )
            return cmd_construct(cfg)
        if args.command == "simulate":
            if args.trials is not None and args.trials <= 0:
                raise ValueError("trial count must be positive")
            cfg = RunConfig(
                scheme=args.scheme, channel=args.channel,
                block_length=0, rate=0.0, l=args.l,
                construction="", construction_point=0.0,
                epsilons=tuple(args.epsilon), ebn0_db=tuple(args.ebn0_db),
                trials=args.trials, max_trials=args.max_trials,
                target_errors=args.target_errors, seed=seed, out=args.out,
            )
            paths = {"spec": args.spec, "spec1": args.spec1, "spec2": args.spec2,
                     "profile": args.profile, "k": args.k}
            return cmd_simulate(cfg, paths)
        if args.command == "verify":
            return cmd_verify(args.level, args.json_path)
        return cmd_analyze(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
