# Restarts, potential jumps and the X/F payment ledgers on weighted instances.
from svensson_atsp import Config, generate_laminar_instance, run, validate
from svensson_atsp.core import Context

total_restarts = 0
for seed in range(12):
    inst, b = generate_laminar_instance(10, seed)
    assert validate(inst, b).ok
    h, report = run(inst, b)
    total_restarts += report.restarts
    if not report.phi_history:
        print(f"seed {seed}: no budget outside the backbone, c(H) {report.cost}")
        continue

    min_ell_p = Context(inst, b, Config()).min_ell_p
    jumps = [b2 - a for a, b2 in zip(report.phi_history, report.phi_history[1:])]
    # c(H) leaves out the backbone edges, so it can sit below the LP value
    print(f"seed {seed}: c(H) {report.cost}, LP {report.lp}, restarts {report.restarts}")
    for jump in jumps:
        print(f"    potential jump / min ell^p = {float(jump / min_ell_p):.3g}")

    x_total = sum(c for _, _, c, _ in report.x_ledger)
    print(f"    X paid {x_total} of budget {report.budget_total - report.h_tilde_cost}")
    for t, i, c in report.f_ledger:
        if i > 0:
            print(f"    F_{i} at step {t}: cost {c} of ell(W_{i}) = {report.component_budgets[i]}")

print("restarts in total:", total_restarts)
