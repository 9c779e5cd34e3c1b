"""Choosing a neuron count empirically with the sweep helper.

Cluster granularity is the main hyperparameter: too few neurons lump
unrelated users together, too many leave everyone peerless.  The sweep
refits the chosen SOM at each candidate count, evaluates mean F1@10 on the
held-out set, and reports the whole curve plus the argmax (ties go to the
smaller count).
"""

from ctxrec.datagen import GenConfig, generate, scaled_config
from ctxrec.evaluation import EvalConfig, SplitConfig, neuron_sweep, split
from ctxrec.som import SomConfig


def main():
    cfg = scaled_config(GenConfig(seed=2), n_users=100, n_items=70)
    train_cube, test_cube = split(generate(cfg), SplitConfig(0.8, seed=2))

    result = neuron_sweep(
        train_cube,
        test_cube,
        role="phase3",
        neuron_counts=(5, 9, 13, 17, 21, 25, 29),
        phase1_cfg=SomConfig(6, seed=2),
        phase3_cfg=SomConfig(21, seed=2),
        eval_cfg=EvalConfig(seed=2),
        metric_n=10,
    )

    print("phase-3 neuron count vs mean F1@10")
    peak = max(result.scores)
    for count, score in zip(result.neuron_counts, result.scores):
        bar = "#" * int(round(score / peak * 40)) if peak else ""
        marker = "  <- best" if count == result.best else ""
        print(f"  {count:3d}  {score:.4f}  {bar}{marker}")
    print(f"\nbest count: {result.best} "
          f"(rerunning the sweep reproduces this exactly)")


if __name__ == "__main__":
    main()
