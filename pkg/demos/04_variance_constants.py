"""Monte Carlo estimation of the limit constants.

Over replicas: the never-accepted fraction p_c (conjectured 1/e for the
classic rule, about one half for the two-consecutive variant), the
accepted-count variance slope b, and the per-bid income variance a_f,
compared with the first-order theory value.
"""

from soc_auction import (E_INV, LogNormal, Rule, estimate_af, estimate_b,
                         estimate_pc, run_replicas, theory_summary)

MODEL = LogNormal(0.0, 0.3)


def show(name, est, reference):
    print(f"  {name:<14} {est.point: .5f}  "
          f"[{est.ci_low: .5f}, {est.ci_high: .5f}]  (reference {reference})")


def main():
    print("classic rule, 210 replicas per size:")
    results = {n: run_replicas(MODEL, Rule.CLASSIC, n, 210, master_seed=31 + i)
               for i, n in enumerate((5_000, 15_000, 50_000))}
    show("p_c", estimate_pc(results[50_000]), f"{E_INV:.5f} conjectured")
    show("b", estimate_b(results, n_bootstrap=200), "0.0383")
    show("a_f", estimate_af(results[50_000], n_bootstrap=200),
         f"{theory_summary(MODEL).af_approx:.4f} first-order approx, "
         "slightly high")
    print()

    print("two-consecutive variant, 30 replicas at N = 50000:")
    reps2 = run_replicas(MODEL, Rule.TWO_CONSECUTIVE, 50_000, 30, master_seed=41)
    show("p_c", estimate_pc(reps2), "0.5")
    print()

    print("accept-all baseline, 210 replicas at N = 5000:")
    reps3 = run_replicas(MODEL, Rule.ACCEPT_ALL, 5_000, 210, master_seed=51)
    show("p_c", estimate_pc(reps3), "0 exactly")
    show("a_f", estimate_af(reps3, n_bootstrap=200),
         "Var[X] of the price law (i.i.d. sum)")


if __name__ == "__main__":
    main()
