"""Seeded multi-run execution: build problem/oracle/method, emit CSVs + summary."""

from __future__ import annotations

import configparser
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from ..ascn import Schedule2, run
from ..errors import ConfigError, CubicNewtonError
from ..oracles import AdditiveNoiseOracle, BatchSpec, ExactOracle, MinibatchOracle, NoiseSpec
from ..problems import LogisticProblem, make_random_quadratic, make_synthetic_logistic
from ..restarts import RestartPlan, run_restarted
from ..sgd import SgdConfig, run_sgd
from ..tensor import ScheduleP, run_tensor
from .config import ExperimentConfig, build_x0
from .csvlog import read_run_csv, write_run_csv
from .libsvm import Dataset, parse_libsvm, split as split_dataset


def _dataset_from_problem(problem, name):
    return Dataset(features=sparse.csr_matrix(problem.X), labels=problem.y,
                   name=name, d_declared=problem.d)


def build_problem(cfg: ExperimentConfig):
    """Returns (train_problem, test_eval or None)."""
    spec = cfg.problem
    if spec["kind"] == "quadratic":
        if cfg.split is not None:
            raise ConfigError("quadratic problems have no train/test split")
        return make_random_quadratic(spec["d"], cond=spec["cond"],
                                     seed=spec["gen_seed"]), None
    if spec["kind"] == "logistic":
        base = make_synthetic_logistic(spec["n"], spec["d"], seed=spec["gen_seed"],
                                       l2_reg=spec["l2_reg"],
                                       flip_prob=spec["flip_prob"])
        dataset = _dataset_from_problem(base, "synthetic")
    else:
        dataset = parse_libsvm(spec["path"], name=os.path.basename(spec["path"]))

    if cfg.split is None:
        problem = (base if spec["kind"] == "logistic"
                   else dataset.to_problem(spec["l2_reg"]))
        return problem, None
    train, test = split_dataset(dataset, cfg.split["train_n"], cfg.split["test_n"],
                                cfg.split["split_seed"])
    train_problem = train.to_problem(spec["l2_reg"])
    test_eval = None
    if cfg.split["test_n"] > 0:
        test_problem = test.to_problem(spec["l2_reg"])
        test_eval = lambda x: test_problem.eval(x, order=0).f
    return train_problem, test_eval


def _mixed_seed(base_seed, run_seed):
    return int(np.random.SeedSequence([base_seed, run_seed]).generate_state(1)[0])


def build_oracle(cfg: ExperimentConfig, problem, run_seed):
    spec = cfg.oracle
    seed = _mixed_seed(spec["seed"], run_seed)
    if spec["kind"] == "exact":
        return ExactOracle(problem)
    if spec["kind"] == "minibatch":
        return MinibatchOracle(problem, BatchSpec(
            grad_batch=spec["r1"], hess_batch=spec["r2"], seed=seed,
            with_replacement=spec["with_replacement"]))
    return AdditiveNoiseOracle(problem, NoiseSpec(
        sigma1=spec["sigma1"], sigma2=spec["sigma2"], sigma3=spec["sigma3"],
        seed=seed))


def build_schedule2(cfg: ExperimentConfig, T=None) -> Schedule2:
    s = cfg.schedule
    return Schedule2(M=s["M"], sigma1_over_R=s["sigma1_over_R"], sigma2=s["sigma2"],
                     tau_mode=s["tau_mode"], tau_param=s["tau_param"],
                     tau_over_R=s["tau_over_R"], T=T or cfg.T)


def build_schedule_p(cfg: ExperimentConfig, T=None) -> ScheduleP:
    s = cfg.schedule
    return ScheduleP(M=s["M"], eta3=s["eta3"], sigma1_over_R=s["sigma1_over_R"],
                     sigma2=s["sigma2"], sigma3=s["sigma3"], tau=s["tau"],
                     tau_over_R=s["tau_over_R"], T=T or cfg.T)


def execute_run(cfg: ExperimentConfig, problem, test_eval, seed):
    """One (method, seed) execution; returns the list of IterateLog rows."""
    oracle = build_oracle(cfg, problem, seed)
    x0 = build_x0(cfg.x0_spec, problem.d)
    run_id = f"{cfg.method}-s{seed}"
    kwargs = dict(run_id=run_id, seed=seed, test_eval=test_eval,
                  test_every=cfg.test_every)
    if cfg.method == "ascn":
        result = run(problem, oracle, build_schedule2(cfg), x0, **kwargs)
    elif cfg.method == "tensor":
        result = run_tensor(problem, oracle, build_schedule_p(cfg), x0, **kwargs)
    elif cfg.method == "sgd":
        batch = cfg.oracle.get("r1", 1)
        result = run_sgd(problem, oracle, SgdConfig(lr=cfg.sgd["lr"], T=cfg.T,
                                                    batch=batch), x0, **kwargs)
    else:
        r = cfg.restart
        smooth = problem.smoothness()
        inner_kind = r["inner"]
        if inner_kind == "ascn":
            inner = build_schedule2(cfg, T=1)
            L_default = smooth.L2
        else:
            inner = build_schedule_p(cfg, T=1)
            L_default = smooth.L3
        plan = RestartPlan(mu=r["mu"], R0=r["R0"], inner=inner,
                           sigma1=r["sigma1"], tau=r["tau"], C_big=r["C_big"],
                           max_epochs=r["max_epochs"],
                           L_smooth=r["L_smooth"] if r["L_smooth"] is not None
                           else L_default)
        result = run_restarted(problem, oracle, plan, x0, run_id=run_id, seed=seed)
    return run_id, result.log


def _fmt(x):
    return format(float(x), ".17g")


def run_experiment(cfg: ExperimentConfig, out_dir, threads=1):
    """Execute all (method, seed) pairs; returns (exit_code, summary_path).

    One CSV of iterate rows per run plus a summary in the same key-value
    grammar as the config.  Any failed run is recorded in the summary and
    turns the exit code nonzero.
    """
    os.makedirs(out_dir, exist_ok=True)
    problem, test_eval = build_problem(cfg)

    def one(seed):
        try:
            run_id, rows = execute_run(cfg, problem, test_eval, seed)
            path = os.path.join(out_dir, f"{run_id}.csv")
            write_run_csv(path, rows)
            return run_id, path, rows, None
        except (CubicNewtonError, ValueError, TypeError) as exc:
            return f"{cfg.method}-s{seed}", None, None, str(exc)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, cfg.seeds))
    else:
        results = [one(seed) for seed in cfg.seeds]

    summary_path = os.path.join(out_dir, "summary.ini")
    failures = _write_summary(summary_path, cfg, results)
    return (1 if failures else 0), summary_path


def _write_summary(path, cfg, results):
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    cp.add_section("meta")
    cp.set("meta", "method", cfg.method)
    cp.set("meta", "seeds", ",".join(str(s) for s in cfg.seeds))
    cp.set("meta", "runs", str(len(results)))

    finals, bests, failures = [], [], []
    for run_id, csv_path, rows, error in results:
        section = f"run.{run_id}"
        cp.add_section(section)
        if error is not None:
            cp.set(section, "status", "failed")
            cp.set(section, "error", error)
            failures.append(run_id)
            continue
        cp.set(section, "status", "ok")
        cp.set(section, "csv", os.path.basename(csv_path))
        final = rows[-1]
        best = min(r.train_loss for r in rows)
        cp.set(section, "iterations", str(final.t))
        cp.set(section, "final_train_loss", _fmt(final.train_loss))
        cp.set(section, "best_train_loss", _fmt(best))
        if final.test_loss is not None:
            cp.set(section, "final_test_loss", _fmt(final.test_loss))
        cp.set(section, "grad_samples", str(final.grad_samples_cum))
        cp.set(section, "hess_samples", str(final.hess_samples_cum))
        finals.append(final.train_loss)
        bests.append(best)

    cp.add_section("aggregate")
    cp.set("aggregate", "failed_runs", ",".join(failures) if failures else "none")
    if finals:
        cp.set("aggregate", "mean_final_train_loss", _fmt(np.mean(finals)))
        cp.set("aggregate", "std_final_train_loss", _fmt(np.std(finals)))
        cp.set("aggregate", "mean_best_train_loss", _fmt(np.mean(bests)))
        cp.set("aggregate", "std_best_train_loss", _fmt(np.std(bests)))
    with open(path, "w") as fh:
        cp.write(fh)
    return failures


def loss_at_budget(rows, budget):
    """Train loss at the last row whose cumulative gradient samples fit the budget.

    This is the cost-fair alignment axis: runs are compared by oracle work, not
    by iteration count.
    """
    eligible = [r for r in rows if r.grad_samples_cum <= budget]
    if not eligible:
        raise ValueError("no logged row within the gradient-sample budget")
    return eligible[-1].train_loss


def summarize_run_dir(run_dir):
    """Rebuild a summary from the CSVs in a directory (CLI `summarize`)."""
    csvs = sorted(f for f in os.listdir(run_dir) if f.endswith(".csv"))
    if not csvs:
        raise ConfigError(f"no run CSVs found in {run_dir}")
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    cp.add_section("meta")
    cp.set("meta", "runs", str(len(csvs)))
    finals = []
    for name in csvs:
        rows = read_run_csv(os.path.join(run_dir, name))
        section = f"run.{rows[0].run_id}"
        cp.add_section(section)
        cp.set(section, "csv", name)
        cp.set(section, "iterations", str(rows[-1].t))
        cp.set(section, "final_train_loss", _fmt(rows[-1].train_loss))
        cp.set(section, "best_train_loss", _fmt(min(r.train_loss for r in rows)))
        cp.set(section, "grad_samples", str(rows[-1].grad_samples_cum))
        cp.set(section, "hess_samples", str(rows[-1].hess_samples_cum))
        finals.append(rows[-1].train_loss)
    cp.add_section("aggregate")
    cp.set("aggregate", "mean_final_train_loss", _fmt(np.mean(finals)))
    cp.set("aggregate", "std_final_train_loss", _fmt(np.std(finals)))
    out = os.path.join(run_dir, "summary.ini")
    with open(out, "w") as fh:
        cp.write(fh)
    return out
