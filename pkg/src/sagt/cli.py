"""Experiment harness: ``sagt bounds|simulate|audit|selfcheck|mds-dump``.

Every subcommand writes CSV (or plain text) that is a deterministic function
of its flags, config file and seed. Exit status: 0 ok, 1 invalid parameters,
2 enumeration budget exceeded, 3 invariant failure.
"""

import argparse
import csv
import io
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from itertools import combinations, product

import numpy as np

from . import bounds as bnd
from . import _rng
from .codebook import DEFAULT_EPS_SEC, Codebook, CodebookParams, generate
from .decoder import DEFAULT_SEARCH_BUDGET, decode, decode_oracle
from .gf_mds import IRREDUCIBLE_POLYS, MdsGenerator, expand_keys, field_new, mds_generator
from .protocol import bound_sweep, monte_carlo_reliability
from .secrecy import (
    EXACT_BUDGET,
    LeakageBudgetExceeded,
    LeakageReport,
    average_exact_leakage,
    exact_leakage,
    monte_carlo_leakage,
    reports_to_csv,
)

EXIT_OK, EXIT_INVALID, EXIT_BUDGET, EXIT_INVARIANT = 0, 1, 2, 3

SIMULATE_FIELDS = ("T", "M", "F", "trials", "errors", "error_rate", "mean_candidates", "status")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    subcommand: str = ""
    n: list = field(default_factory=lambda: [50])
    k: list = field(default_factory=lambda: [2])
    t: int = None
    t_sweep: str = None
    delta: list = field(default_factory=lambda: [0.5])
    rf: list = field(default_factory=lambda: [0.25])
    eps: float = 0.2
    eps_sec: float = DEFAULT_EPS_SEC
    trials: int = 500
    seed: int = 0
    out: str = None
    threads: int = 1
    budget: int = None
    mc_trials: int = 0
    codebooks: int = 1
    timing: bool = False
    corrupt_generator: bool = False

    def validate(self):
        for name in ("n", "k", "delta", "rf"):
            if not getattr(self, name):
                raise ConfigError(f"--{name} needs at least one value")
        for n, k in product(self.n, self.k):
            if not 1 <= k <= n:
                raise ConfigError(f"need 1 <= K <= N, got K={k}, N={n}")
        for d in self.delta:
            if not 0 <= d < 1:
                raise ConfigError(f"delta must lie in [0, 1), got {d}")
        for r in self.rf:
            if not 0 <= r <= 1:
                raise ConfigError(f"Rf must lie in [0, 1], got {r}")
        if self.eps < 0 or self.eps_sec < 0:
            raise ConfigError("eps and eps_sec must be non-negative")
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if self.t is not None and self.t < 1:
            raise ConfigError("T must be >= 1")
        return self

    def point(self):
        """The single (N, K, delta, Rf) point for non-grid subcommands."""
        if any(len(getattr(self, a)) != 1 for a in ("n", "k", "delta", "rf")):
            raise ConfigError(f"{self.subcommand} takes a single value for --n, --k, --delta, --rf")
        return self.n[0], self.k[0], self.delta[0], self.rf[0]


def _floats(s):
    return [float(v) for v in str(s).split(",") if v.strip()]


def _ints(s):
    return [int(v) for v in str(s).split(",") if v.strip()]


_CONVERT = {
    "n": _ints, "k": _ints, "delta": _floats, "rf": _floats,
    "t": int, "t_sweep": str, "eps": float, "eps_sec": float, "trials": int,
    "seed": int, "out": str, "threads": int, "budget": int, "mc_trials": int,
    "codebooks": int,
    "timing": lambda v: str(v).lower() in ("1", "true", "yes", "on"),
    "corrupt_generator": lambda v: str(v).lower() in ("1", "true", "yes", "on"),
}  # fmt: skip


def read_config_file(path):
    """key=value per line, '#' starts a comment; keys use flag names."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value")
            key, val = (s.strip() for s in line.split("=", 1))
            key = key.lstrip("-").replace("-", "_")
            if key not in _CONVERT:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            out[key] = val
    return out


def build_config(ns):
    cfg = ExperimentConfig(subcommand=ns.command)
    merged = read_config_file(ns.config) if getattr(ns, "config", None) else {}
    for f in fields(ExperimentConfig):
        flag = getattr(ns, f.name, None)
        if flag is not None and flag is not False:
            merged[f.name] = flag
    try:
        for key, val in merged.items():
            setattr(cfg, key, _CONVERT[key](val) if isinstance(val, str) else val)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg.validate()


def _emit(text, out):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def resolve_tests(cfg, N, K, delta, Rf):
    """Test counts to run: --t-sweep, else --t, else the sufficiency bound."""
    t_bound = bnd.sufficient_sagt(N, K, delta, Rf, cfg.eps)[0]
    if cfg.t_sweep:
        sweep = cfg.t_sweep.strip()
        if sweep.startswith("bound:"):
            try:
                lo, hi, pts = sweep.split(":")[1:]
                return bound_sweep(t_bound, float(lo), float(hi), int(pts))
            except ValueError as exc:
                raise ConfigError(f"bad sweep {sweep!r}; use bound:LO:HI:POINTS") from exc
        ts = _ints(sweep)
        if not ts or min(ts) < 1:
            raise ConfigError("T sweep must be a non-empty list of positive integers")
        return ts
    if cfg.t is not None:
        return [cfg.t]
    return [max(1, t_bound)]


def cmd_bounds(cfg):
    reports = [
        bnd.bound_report(N, K, d, r, cfg.eps)
        for N, K, d, r in product(cfg.n, cfg.k, cfg.delta, cfg.rf)
    ]
    return bnd.reports_to_csv(reports), EXIT_OK


def cmd_simulate(cfg):
    N, K, delta, Rf = cfg.point()
    budget = cfg.budget or DEFAULT_SEARCH_BUDGET
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SIMULATE_FIELDS + (("wall_time",) if cfg.timing else ()))
    for T in resolve_tests(cfg, N, K, delta, Rf):
        params = CodebookParams(N, K, T, delta, Rf, cfg.eps_sec, seed=cfg.seed)
        t0 = time.perf_counter()
        try:
            pt = monte_carlo_reliability(params, cfg.trials, cfg.seed, cfg.threads, budget)
        except MemoryError:
            pt = None
        row = (
            [T, "", "", cfg.trials, "", "", "", "skipped"]
            if pt is None or pt.skipped
            else [T, pt.M, pt.F, pt.trials, pt.errors, f"{pt.error_rate:.6f}", f"{pt.mean_candidates:.6f}", "ok"]
        )
        if cfg.timing:
            row.append(f"{time.perf_counter() - t0:.3f}")
        w.writerow(row)
    return buf.getvalue(), EXIT_OK


def _audit_point(cfg, N, K, delta, Rf, T):
    params = CodebookParams(N, K, T, delta, Rf, cfg.eps_sec, seed=cfg.seed)
    budget = cfg.budget or EXACT_BUDGET
    G = mds_generator(K, N)
    try:
        if cfg.codebooks > 1:
            seeds = [_rng.derive_seed(cfg.seed, "codebook", i) for i in range(cfg.codebooks)]
            keyed = average_exact_leakage(params, seeds, budget)
            plain = _average_unkeyed(params, seeds, G, budget)
        else:
            keyed = exact_leakage(generate(params), G, params, budget)
            plain = exact_leakage(generate(params, M=1, F=1), G, params, budget)
    except LeakageBudgetExceeded:
        if not cfg.mc_trials:
            raise
        keyed = monte_carlo_leakage(params, cfg.mc_trials, cfg.seed, G=G)
        plain = _mc_unkeyed(params, cfg.mc_trials, cfg.seed, G)
    return keyed, plain


def _average_unkeyed(params, seeds, G, budget):
    vals = [exact_leakage(generate(params.replace(seed=s), M=1, F=1), G, params, budget).mi_bits for s in seeds]
    se = float(np.std(vals, ddof=1) / math.sqrt(len(vals)))
    return LeakageReport(params.N, params.K, params.T, 1, 1, params.delta, params.Rf, "exact-avg", float(np.mean(vals)), len(vals), se)


def _mc_unkeyed(params, trials, seed, G):
    return monte_carlo_leakage(params, trials, seed, G=G, M=1, F=1)


def _ordered(keyed, plain):
    # sampled estimates are compared up to three combined standard errors
    slack = 3 * math.hypot(keyed.stderr, plain.stderr) if keyed.method == "monte-carlo" else 0.0
    return keyed.mi_bits <= plain.mi_bits + slack + 1e-12


def cmd_audit(cfg):
    N, K, delta, Rf = cfg.point()
    tests = resolve_tests(cfg, N, K, delta, Rf)
    with ThreadPoolExecutor(max_workers=cfg.threads) as ex:
        pairs = list(ex.map(lambda T: _audit_point(cfg, N, K, delta, Rf, T), tests))
    reports, labels = [], []
    for keyed, plain in pairs:
        reports += [keyed, plain]
        labels += ["keyed", "unkeyed"]
    text = reports_to_csv(reports, labels)
    ordered = all(_ordered(k, p) for k, p in pairs)
    return text, EXIT_OK if ordered else EXIT_INVARIANT


# --- selfcheck -------------------------------------------------------------


def check_field_axioms(max_exhaustive=6):
    for m in IRREDUCIBLE_POLYS:
        field_new(m)  # table construction fails unless the polynomial is primitive
    for m in range(1, max_exhaustive + 1):
        gf = field_new(m)
        a, b, c = np.meshgrid(*(np.arange(gf.order),) * 3, indexing="ij")
        if not np.array_equal(gf.mul(a, gf.mul(b, c)), gf.mul(gf.mul(a, b), c)):
            return False
        if not np.array_equal(gf.mul(a, b ^ c), gf.mul(a, b) ^ gf.mul(a, c)):
            return False
        if not np.array_equal(gf.mul(a, b), gf.mul(b, a)):
            return False
    gf = field_new(8)
    x = np.arange(1, 256)
    return bool(np.all(gf.mul(x, gf.inv(x)) == 1))


def check_mds(max_n=12, corrupt=False):
    for N in range(1, max_n + 1):
        for K in range(1, N + 1):
            G = mds_generator(K, N)
            if corrupt and K == 2 and N == 5:
                mat = G.matrix.copy()
                mat[:, 1] = mat[:, 0]
                G = MdsGenerator(mat, G.m)
            if not G.is_mds():
                return False
    return True


def key_shares_uniform(K, N, S_K, corrupt=False):
    """Every K-subset of full expanded shares takes 2^(K*S_K) values equally often."""
    G = mds_generator(K, N)
    if corrupt:
        mat = G.matrix.copy()
        mat[:, 1] = mat[:, 0]
        G = MdsGenerator(mat, G.m)
    n = 1 << (K * S_K)
    src = ((np.arange(n)[:, None] >> np.arange(K * S_K - 1, -1, -1)) & 1).astype(np.uint8)
    shares = expand_keys(src.reshape(n, K, S_K), G, truncate=False)  # (n, N, L*m)
    width = shares.shape[-1]
    ids = shares.astype(np.int64) @ (1 << np.arange(width - 1, -1, -1, dtype=np.int64))  # (n, N)
    for cols in combinations(range(N), K):
        joint = np.zeros(n, dtype=np.int64)
        for c in cols:
            joint = joint * (1 << width) + ids[:, c]
        _, counts = np.unique(joint, return_counts=True)
        if len(counts) != n or np.any(counts != 1):
            return False
    return True


def check_key_uniformity(corrupt=False):
    return all(
        key_shares_uniform(2, N, S_K, corrupt=corrupt)
        for N in (3, 4, 5)
        for S_K in range(1, 5)
    )


def random_tiny_instance(seed):
    rng = _rng.stream(seed, "tiny")
    N = int(rng.integers(2, 7))
    K = int(rng.integers(1, min(2, N) + 1))
    M = int(rng.integers(1, 5))
    F = int(rng.integers(1, 5))
    T = int(rng.integers(1, 13))
    p = float(rng.uniform(0.15, 0.7))
    bins = rng.random((N, M, F, T)) < p
    cb = Codebook(CodebookParams(N, K, T, 0.0), bins)
    f = rng.integers(0, F, N)
    if rng.random() < 0.7:
        # planted: pool real rows of a random defective set
        subset = rng.choice(N, K, replace=False)
        ms = rng.integers(0, M, K)
        y = np.any(bins[subset, ms, f[subset]], axis=0).astype(np.uint8)
    else:
        y = (rng.random(T) < 0.5).astype(np.uint8)
    return cb, f, y


def check_decoder_oracle(instances=200, seed=0):
    for i in range(instances):
        cb, f, y = random_tiny_instance(_rng.derive_seed(seed, "inst", i))
        a, b = decode(cb, f, y), decode_oracle(cb, f, y)
        if a.status != b.status or a.w_hat != b.w_hat:
            return False
    return True


def cmd_selfcheck(cfg):
    checks = [
        ("field axioms", lambda: check_field_axioms()),
        ("mds invertibility N<=12", lambda: check_mds(corrupt=cfg.corrupt_generator)),
        ("key uniformity, full MDS shares, K=2 N<=5 S_K<=4", lambda: check_key_uniformity(corrupt=cfg.corrupt_generator)),
        ("decoder/oracle agreement", lambda: check_decoder_oracle(seed=cfg.seed)),
    ]
    lines, failed = [], False
    for name, fn in checks:
        t0 = time.perf_counter()
        ok = bool(fn())
        failed |= not ok
        lines.append(f"{'PASS' if ok else 'FAIL'} {name} ({time.perf_counter() - t0:.2f}s)")
    return "\n".join(lines) + "\n", EXIT_INVARIANT if failed else EXIT_OK


def cmd_mds_dump(cfg):
    N, K, _, _ = cfg.point()
    return mds_generator(K, N).to_text(), EXIT_OK


COMMANDS = {
    "bounds": cmd_bounds,
    "simulate": cmd_simulate,
    "audit": cmd_audit,
    "selfcheck": cmd_selfcheck,
    "mds-dump": cmd_mds_dump,
}


def make_parser():
    parser = argparse.ArgumentParser(prog="sagt", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="key=value file; flags override it")
        p.add_argument("--n", help="item count(s), comma separated")
        p.add_argument("--k", help="defective count(s), comma separated")
        p.add_argument("--t", help="tests per round")
        p.add_argument("--t-sweep", dest="t_sweep", help="comma list of T, or bound:LO:HI:POINTS")
        p.add_argument("--delta", help="eavesdropper observation probability(ies)")
        p.add_argument("--rf", help="feedback rate(s)")
        p.add_argument("--eps", help="reliability slack in the test-count bounds")
        p.add_argument("--eps-sec", dest="eps_sec", help="secrecy slack in the sub-bin exponent")
        p.add_argument("--trials")
        p.add_argument("--seed")
        p.add_argument("--out")
        p.add_argument("--threads")
        p.add_argument("--budget", help="enumeration cap for decoding / exact audit")
        p.add_argument("--mc-trials", dest="mc_trials", help="audit: Monte Carlo fallback sample count")
        p.add_argument("--codebooks", help="audit: average exact leakage over this many codebooks")
        p.add_argument("--timing", action="store_true", help="simulate: add a wall_time column")
        p.add_argument("--corrupt-generator", dest="corrupt_generator", action="store_true", help=argparse.SUPPRESS)
    return parser


def main(argv=None):
    ns = make_parser().parse_args(argv)
    try:
        cfg = build_config(ns)
        text, status = COMMANDS[ns.command](cfg)
    except (ConfigError, ValueError) as exc:
        print(f"sagt: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (LeakageBudgetExceeded, MemoryError) as exc:
        print(f"sagt: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    _emit(text, cfg.out)
    return status


if __name__ == "__main__":
    sys.exit(main())
