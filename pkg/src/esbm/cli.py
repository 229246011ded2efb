"""Command-line interface: simulate, fit, summarize, predict, compare,
prior-expect.

Exit codes: 0 on success, 1 on validation errors (bad flags, malformed or
inconsistent inputs), 2 on I/O errors.  Every run that writes files also
drops a ``manifest.json`` beside them recording parameters, input digests,
artifacts and timings.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import hashlib
import json
import logging
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .cohesion import AttributeCohesion
from .inference import (
    credible_ball,
    deviance,
    edge_misclassification,
    effective_sample_size,
    geweke_z,
    kass_raftery_label,
    log_harmonic_marginal,
    point_estimate,
    similarity_matrix,
    vi_distance,
)
from .network import AttributeTable, Network
from .prediction import predict_matrix, read_new_edges
from .priors import h_distribution, make_prior
from .sampler import LikelihoodSpec, SamplerConfig, TraceStore, run_chain
from .simulate import PRESET_NAMES, GeneratorSpec, generate, generate_holdout, preset

logger = logging.getLogger("esbm")

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2


class _UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _fmt(x):
    return f"{float(x):.6g}"


def _sha256(path):
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


@dataclass
class RunManifest:
    """Provenance record written next to every output."""

    subcommand: str
    parameters: dict
    inputs: dict
    artifacts: list
    wall_clock_s: float
    tool: str = "esbm"
    version: str = __version__
    extra: dict = field(default_factory=dict)

    def write(self, out_dir):
        path = Path(out_dir) / "manifest.json"
        payload = asdict(self)
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        return path


def _manifest(args, started, inputs, artifacts, **extra):
    skip = {"func", "command"}
    params = {
        k: (str(v) if isinstance(v, Path) else v)
        for k, v in sorted(vars(args).items())
        if k not in skip and not callable(v)
    }
    return RunManifest(
        subcommand=args.command,
        parameters=params,
        inputs={str(p): _sha256(p) for p in inputs},
        artifacts=[str(a) for a in artifacts],
        wall_clock_s=time.perf_counter() - started,
        extra=dict(extra),
    )


def _add_prior_flags(sp):
    sp.add_argument("--prior", required=True, choices=("dm", "dp", "py", "gn"),
                    help="partition prior family")
    sp.add_argument("--beta", type=float, help="DM concentration (> 0)")
    sp.add_argument("--H-bar", dest="H_bar", type=int,
                    help="DM cluster cap (positive integer)")
    sp.add_argument("--alpha", type=float, help="DP/PY strength")
    sp.add_argument("--sigma", type=float, help="PY discount in [0, 1)")
    sp.add_argument("--gamma", type=float, help="GN parameter in (0, 1)")


def _prior_from(args):
    return make_prior(args.prior, beta=args.beta, H_bar=args.H_bar,
                      alpha=args.alpha, sigma=args.sigma, gamma=args.gamma)


def _add_lik_flags(sp):
    sp.add_argument("--a", type=float, default=1.0,
                    help="Beta prior edge pseudo-count (default 1)")
    sp.add_argument("--b", type=float, default=1.0,
                    help="Beta prior non-edge pseudo-count (default 1)")


def _read_labels_csv(path, V):
    labels = np.zeros(V, dtype=np.int32)
    seen = np.zeros(V, dtype=bool)
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#") or line.startswith("node"):
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise ValueError(
                    f"{path}:{lineno}: expected 'node_id,cluster', got {line!r}"
                )
            node, lab = int(parts[0]), int(parts[1])
            if not 1 <= node <= V:
                raise ValueError(f"{path}:{lineno}: node id {node} outside 1..{V}")
            if seen[node - 1]:
                raise ValueError(f"{path}:{lineno}: node {node} listed twice")
            labels[node - 1] = lab
            seen[node - 1] = True
    if not seen.all():
        missing = int(np.flatnonzero(~seen)[0]) + 1
        raise ValueError(f"{path}: label file is missing node {missing}")
    return labels


def _write_labels_csv(path, labels, header="node_id,cluster"):
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for node, lab in enumerate(labels, start=1):
            fh.write(f"{node},{int(lab)}\n")


# ----------------------------------------------------------------- simulate

def _cmd_simulate(args):
    started = time.perf_counter()
    inputs = []
    if args.preset:
        spec = preset(args.preset, seed=args.seed)
    else:
        if not (args.sizes and args.theta):
            raise _UsageError("pass either --preset or both --sizes and --theta")
        sizes = tuple(int(s) for s in args.sizes.split(","))
        theta = np.loadtxt(args.theta, delimiter=",", ndmin=2)
        spec = GeneratorSpec(sizes=sizes, theta=theta, seed=args.seed)
        inputs.append(args.theta)
    net, truth = generate(spec)
    net.write_edge_list(args.out_edges)
    _write_labels_csv(args.out_truth, truth.labels)
    artifacts = [args.out_edges, args.out_truth]
    if args.holdout:
        hseed = None if args.seed is None else args.seed + 1
        mat, groups = generate_holdout(spec, args.holdout, args.unseen_fraction,
                                       seed=hseed)
        he = args.out_holdout_edges or f"{args.out_edges}.holdout.csv"
        ht = args.out_holdout_truth or f"{args.out_truth}.holdout.csv"
        with open(he, "w") as fh:
            for i in range(mat.shape[0]):
                new_id = net.V + 1 + i
                nz = np.flatnonzero(mat[i])
                if nz.size == 0:
                    fh.write(f"{new_id},0\n")
                for j in nz:
                    fh.write(f"{new_id},{j + 1}\n")
        with open(ht, "w") as fh:
            fh.write("node_id,cluster\n")
            for i, g in enumerate(groups):
                fh.write(f"{net.V + 1 + i},{int(g)}\n")
        artifacts += [he, ht]
    _manifest(args, started, inputs, artifacts,
              V=net.V, n_edges=net.n_edges).write(Path(args.out_edges).parent)
    return EXIT_OK


# ---------------------------------------------------------------------- fit

def _fit_worker(payload):
    net = Network.from_edge_list(payload["network"])
    attrs = cohesion = None
    if payload["attributes"]:
        attrs = AttributeTable.from_csv(payload["attributes"], net.V)
        cohesion = AttributeCohesion(np.full(attrs.C, payload["attr_alpha"]))
    prior = make_prior(payload["prior"], beta=payload["beta"],
                       H_bar=payload["H_bar"], alpha=payload["alpha"],
                       sigma=payload["sigma"], gamma=payload["gamma"])
    lik = LikelihoodSpec(a=payload["a"], b=payload["b"])
    config = SamplerConfig(sweeps=payload["sweeps"], burn_in=payload["burnin"],
                           thin=payload["thin"], seed=payload["seed"],
                           init=payload["init"])
    init_labels = None
    if payload["init_file"]:
        init_labels = _read_labels_csv(payload["init_file"], net.V)
    trace = run_chain(net, prior, lik, config, cohesion=cohesion, attrs=attrs,
                      init_labels=init_labels)
    trace.save(payload["out"])
    return payload["out"], trace.meta["sweeps_per_s"]


def _cmd_fit(args):
    started = time.perf_counter()
    if args.init == "given" and not args.init_file:
        raise _UsageError("--init given needs --init-file")
    payload = {
        "network": args.network,
        "attributes": args.attributes,
        "attr_alpha": args.attr_alpha,
        "prior": args.prior, "beta": args.beta, "H_bar": args.H_bar,
        "alpha": args.alpha, "sigma": args.sigma, "gamma": args.gamma,
        "a": args.a, "b": args.b,
        "sweeps": args.sweeps, "burnin": args.burnin, "thin": args.thin,
        "seed": args.seed, "init": args.init, "init_file": args.init_file,
        "out": args.out,
    }
    # validate inputs up front so a bad file fails before any chain runs
    net = Network.from_edge_list(args.network)
    attrs = None
    if args.attributes:
        attrs = AttributeTable.from_csv(args.attributes, net.V)
    _prior_from(args)
    artifacts = []
    if args.chains == 1:
        out, rate = _fit_worker(payload)
        artifacts.append(out)
        rates = [rate]
    else:
        jobs = []
        for c in range(args.chains):
            job = dict(payload)
            job["seed"] = None if args.seed is None else args.seed + c
            job["out"] = f"{args.out}.chain{c + 1}"
            jobs.append(job)
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.chains) as pool:
            results = list(pool.map(_fit_worker, jobs))
        for out, _ in results:
            artifacts.append(out)
        rates = [r for _, r in results]
    if attrs is not None:
        mapping_path = f"{args.out}.attrmap.csv"
        attrs.write_mapping(mapping_path)
        artifacts.append(mapping_path)
    inputs = [args.network] + ([args.attributes] if args.attributes else [])
    if args.init_file:
        inputs.append(args.init_file)
    _manifest(args, started, inputs, artifacts,
              sweeps_per_s=rates).write(Path(args.out).parent)
    return EXIT_OK


# ---------------------------------------------------------------- summarize

def _cmd_summarize(args):
    started = time.perf_counter()
    trace = TraceStore.load(args.trace)
    if trace.T == 0:
        raise ValueError(f"{args.trace}: the trace holds no samples")
    part, vistat = point_estimate(trace, candidate_limit=args.candidate_limit)
    ball = credible_ball(trace, part, level=args.level)
    sim = similarity_matrix(trace)
    lm = log_harmonic_marginal(trace)
    hs = trace.h_values()
    q1, q2, q3 = np.quantile(hs, [0.25, 0.5, 0.75])
    prefix = args.out_prefix
    pe_path = f"{prefix}point_estimate.csv"
    cb_path = f"{prefix}credible_bound.csv"
    sm_path = f"{prefix}similarity.csv"
    rp_path = f"{prefix}report.txt"
    _write_labels_csv(pe_path, part.labels, header="node,cluster")
    _write_labels_csv(cb_path, ball.bound.labels, header="node,cluster")
    with open(sm_path, "w") as fh:
        for row in sim.matrix:
            fh.write(",".join(_fmt(x) for x in row) + "\n")
    if args.network:
        net = Network.from_edge_list(args.network, V=trace.V)
        lik = LikelihoodSpec(a=args.a, b=args.b)
        dev_line = _fmt(deviance(net, part, lik))
        mis_line = _fmt(edge_misclassification(net, part, lik))
    else:
        dev_line = mis_line = "n/a (pass --network)"
    share = f"{_fmt(lm.top_weight_share)}" + (" [unstable]" if lm.unstable else "")
    lines = [
        f"clusters in point estimate: {part.H}",
        f"posterior H quartiles (25/50/75): {_fmt(q1)} / {_fmt(q2)} / {_fmt(q3)}",
        f"trace-averaged VI at point estimate: {_fmt(vistat.value)} bits",
        f"credible ball level: {_fmt(ball.level)}",
        f"credible ball VI radius: {_fmt(ball.radius)} bits "
        f"(max attainable log2(V) = {_fmt(vistat.max_value)})",
        f"VI(point estimate, ball bound): {_fmt(vi_distance(part, ball.bound))} bits",
        "ball bound tie-break: lexicographically smallest sampled partition at the radius",
        f"log marginal likelihood (harmonic mean): {_fmt(lm.value)} (MCSE {_fmt(lm.mcse)})",
        f"harmonic-mean top-1% weight share: {share}",
        f"log-likelihood chain ESS: {_fmt(effective_sample_size(trace.loglik))}",
        f"log-likelihood chain Geweke z: {_fmt(geweke_z(trace.loglik))}",
        f"deviance at point estimate: {dev_line}",
        f"edge misclassification at point estimate: {mis_line}",
    ]
    Path(rp_path).write_text("\n".join(lines) + "\n")
    inputs = [args.trace] + ([args.network] if args.network else [])
    _manifest(args, started, inputs, [pe_path, cb_path, sm_path, rp_path]).write(
        Path(rp_path).parent
    )
    return EXIT_OK


# ------------------------------------------------------------------ predict

def _cmd_predict(args):
    started = time.perf_counter()
    net = Network.from_edge_list(args.network)
    trace = TraceStore.load(args.trace)
    if trace.V != net.V:
        raise ValueError(
            f"trace covers {trace.V} nodes but the network has {net.V}"
        )
    prior = _prior_from(args)
    lik = LikelihoodSpec(a=args.a, b=args.b)
    part, _ = point_estimate(trace, candidate_limit=args.candidate_limit)
    ids, mat = read_new_edges(args.new_edges, net.V)
    probs = predict_matrix(net, part, lik, prior, mat)
    header = (
        "new_id,"
        + ",".join(f"cluster_{h}" for h in range(1, part.H + 1))
        + ",new_cluster"
    )
    rows = [header]
    for i, new_id in enumerate(ids):
        rows.append(f"{new_id}," + ",".join(_fmt(p) for p in probs[i]))
    text = "\n".join(rows) + "\n"
    if args.out:
        Path(args.out).write_text(text)
        _manifest(args, started, [args.network, args.trace, args.new_edges],
                  [args.out]).write(Path(args.out).parent)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ------------------------------------------------------------------ compare

def _cmd_compare(args):
    trace_a = TraceStore.load(args.trace_a)
    trace_b = TraceStore.load(args.trace_b)
    # estimate each marginal once; recomputing through log_bayes_factor would
    # double the work and repeat any stability warnings
    lm_a = log_harmonic_marginal(trace_a)
    lm_b = log_harmonic_marginal(trace_b)
    two_log_b = 2.0 * (lm_a.value - lm_b.value)
    sys.stdout.write(
        f"log marginal likelihood A (harmonic mean): {_fmt(lm_a.value)} "
        f"(MCSE {_fmt(lm_a.mcse)})\n"
        f"log marginal likelihood B (harmonic mean): {_fmt(lm_b.value)} "
        f"(MCSE {_fmt(lm_b.mcse)})\n"
        f"2 log Bayes factor (A over B): {_fmt(two_log_b)}\n"
        f"evidence: {kass_raftery_label(two_log_b)}\n"
    )
    return EXIT_OK


# ------------------------------------------------------------- prior-expect

def _cmd_prior_expect(args):
    prior = _prior_from(args)
    dist = h_distribution(prior, args.V)
    sys.stdout.write("h,probability\n")
    for h in range(1, args.V + 1):
        sys.stdout.write(f"{h},{_fmt(dist.pmf[h - 1])}\n")
    sys.stdout.write(f"mean,{_fmt(dist.mean)}\n")
    return EXIT_OK


# ------------------------------------------------------------------ parsing

def build_parser():
    p = _Parser(prog="esbm",
                description="Bayesian block models for binary undirected "
                            "networks with Gibbs-type partition priors")
    sub = p.add_subparsers(dest="command", required=True, metavar="SUBCOMMAND")

    sp = sub.add_parser("simulate", help="draw a planted-partition network")
    sp.add_argument("--preset", choices=PRESET_NAMES,
                    help="stock scenario (otherwise pass --sizes and --theta)")
    sp.add_argument("--sizes", help="comma-separated cluster sizes, e.g. 28,20,14,10,8")
    sp.add_argument("--theta", help="CSV file with the symmetric block probability matrix")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out-edges", required=True, help="edge list output path")
    sp.add_argument("--out-truth", required=True, help="true partition CSV output path")
    sp.add_argument("--holdout", type=int, default=0,
                    help="also draw this many held-out nodes' edges")
    sp.add_argument("--unseen-fraction", type=float, default=1.0 / 6.0,
                    help="fraction of held-out nodes from a brand-new group")
    sp.add_argument("--out-holdout-edges", help="held-out edge CSV (default <out-edges>.holdout.csv)")
    sp.add_argument("--out-holdout-truth", help="held-out truth CSV (default <out-truth>.holdout.csv)")
    sp.set_defaults(func=_cmd_simulate)

    sp = sub.add_parser("fit", help="run the collapsed Gibbs sampler")
    sp.add_argument("--network", required=True, help="edge list file")
    sp.add_argument("--attributes", help="node attribute CSV supervising the prior")
    sp.add_argument("--attr-alpha", type=float, default=1.0,
                    help="cohesion concentration per category (default 1)")
    _add_prior_flags(sp)
    _add_lik_flags(sp)
    sp.add_argument("--sweeps", type=int, default=50000)
    sp.add_argument("--burnin", type=int, default=10000)
    sp.add_argument("--thin", type=int, default=1)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--init", choices=("singletons", "given"), default="singletons")
    sp.add_argument("--init-file", help="starting partition CSV for --init given")
    sp.add_argument("--chains", type=int, default=1,
                    help="independent chains run concurrently; chain k "
                         "writes <out>.chain<k> and uses seed + k - 1")
    sp.add_argument("--out", required=True, help="trace output path")
    sp.set_defaults(func=_cmd_fit)

    sp = sub.add_parser("summarize", help="summarise a posterior trace")
    sp.add_argument("--trace", required=True)
    sp.add_argument("--level", type=float, default=0.95)
    sp.add_argument("--out-prefix", required=True)
    sp.add_argument("--network", help="edge list; enables deviance and misclassification")
    _add_lik_flags(sp)
    sp.add_argument("--candidate-limit", type=int, default=512,
                    help="distinct sampled partitions scanned as point-estimate "
                         "candidates before greedy refinement")
    sp.set_defaults(func=_cmd_summarize)

    sp = sub.add_parser("predict", help="place new nodes given their edges")
    sp.add_argument("--network", required=True)
    sp.add_argument("--trace", required=True)
    sp.add_argument("--new-edges", required=True,
                    help="CSV of new_id,existing_id rows (0 declares an isolated node)")
    _add_prior_flags(sp)
    _add_lik_flags(sp)
    sp.add_argument("--candidate-limit", type=int, default=512)
    sp.add_argument("--out", help="output CSV (default: stdout)")
    sp.set_defaults(func=_cmd_predict)

    sp = sub.add_parser("compare", help="2 log Bayes factor between two fits")
    sp.add_argument("--trace-a", required=True)
    sp.add_argument("--trace-b", required=True)
    sp.set_defaults(func=_cmd_compare)

    sp = sub.add_parser("prior-expect", help="prior pmf and mean of the cluster count")
    _add_prior_flags(sp)
    sp.add_argument("--V", type=int, required=True, help="number of nodes")
    sp.set_defaults(func=_cmd_prior_expect)

    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    if not logging.getLogger().handlers:
        logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                            format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


def entry_point():
    raise SystemExit(main())
