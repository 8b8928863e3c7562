"""Regenerate theory_golden.json from the mpmath oracle (run manually)."""

import json
import sys
from pathlib import Path

import numpy as np

HERE = Path(__file__).resolve().parent
sys.path.insert(0, str(HERE.parent))

import mp_oracle as o  # noqa: E402
from prefbandit.environment import build_action_set, sample_environment, GaussianPrior  # noqa: E402
from prefbandit.streams import substream  # noqa: E402


def s(x):
    return o.mp.nstr(x, 25)


def main():
    rng = substream(0, "env")
    actions = build_action_set(10, 4, 0.0, rng)
    prior = GaussianPrior.standard(4)
    theta0 = sample_environment(prior, actions, rng).theta
    order = np.argsort(-(actions.actions @ theta0), kind="stable")
    a0, a1 = actions[order[0]], actions[order[1]]
    mean, cov = prior.mean.tolist(), prior.covariance.tolist()
    n0_two = o.two_action_n0(a0, a1, mean, cov, theta0, 10, 0.1)
    n0, kmax = o.theorem1_n0(actions.actions, mean, cov, theta0, 10, 0.1, 0.1)
    consts = o.bound_constants(20, 10, 300, 10, 100, 4, 0.01)
    doc = {
        "inputs": {
            "actions": [[repr(float(x)) for x in row] for row in actions.actions],
            "theta0": [repr(float(x)) for x in theta0],
            "pair": [int(order[0]), int(order[1])],
            "beta": 10.0, "eps": 0.1, "mu_min_theorem1": 0.1,
            "bound": {"N": 20, "K": 10, "T": 300, "beta": 10.0, "lam": 100.0, "d": 4, "mu_min": 0.01},
            "general": {"E": 3.0, "eps": 0.1, "K": 10, "T": 300, "C1": 2.0},
        },
        "two_action_n0": s(n0_two),
        "theorem1_n0": s(n0),
        "k_max": s(kmax),
        "bound_constants": {k: s(v) for k, v in consts.items()},
        "general_ps_bound": s(o.general_ps_bound(3, 0.1, 10, 300, 2)),
        "warmpref_bound": s(o.warmpref_bound(consts["f1_tilde"], consts["f1"], consts["f2"], 10, 300)),
    }
    (HERE / "theory_golden.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
