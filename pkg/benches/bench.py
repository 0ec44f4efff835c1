import sys
import time

from pi_discovery import HardwareProfile, SearchGrid, bc_adjust, gain_table, grid_search, singleint_solve
from pi_discovery.sim import Mode, QuantizedClock, ScenarioConfig, monte_carlo, offset_sweep_oracle, quantized_sweep
from pi_discovery.slotted import SearchlightEvaluator, default_eta_grid

HW = HardwareProfile()


# ─── Solvers ──────────────────────────────────────────────────────────────────


def solve_singleint(n):
    for eta in default_eta_grid()[: n % 28 + 1]:
        singleint_solve(eta, HW)


def solve_bc(n):
    for eta in default_eta_grid()[: n % 28 + 1]:
        bc_adjust(eta, HW)


def compare_table():
    gain_table(default_eta_grid(), HW, target_p=0.0019, searchlight=SearchlightEvaluator.GAIN_CONSISTENT)


# ─── Oracle ───────────────────────────────────────────────────────────────────


def sweep_singleint(eta):
    offset_sweep_oracle(singleint_solve(eta, HW).params)


def sweep_quantized(eta):
    quantized_sweep(singleint_solve(eta, HW).params, HW, QuantizedClock())


def search_small():
    grid_search(SearchGrid(ta_range=(0.013, 0.1, 0.013), ts_range=(0.1, 0.3, 0.1), ds_step=0.005), HW)


# ─── Monte Carlo ──────────────────────────────────────────────────────────────


def simulate_two_way(trials, workers):
    params = bc_adjust(0.0155, HW).params
    monte_carlo(ScenarioConfig(params=params, mode=Mode.TWO_WAY, trials=trials, master_seed=7), workers=workers)


BENCHMARKS = {
    "singleint x28": lambda: solve_singleint(27),
    "bc_adjust x28": lambda: solve_bc(27),
    "gain_table": compare_table,
    "sweep singleint 0.2%": lambda: sweep_singleint(0.002),
    "sweep singleint 1.55%": lambda: sweep_singleint(0.0155),
    "sweep quantized 1.55%": lambda: sweep_quantized(0.0155),
    "search 840": search_small,
    "simulate twoway 10k": lambda: simulate_two_way(10_000, 1),
    "simulate twoway 10k (4 workers)": lambda: simulate_two_way(10_000, 4),
}


if __name__ == "__main__":
    selected = sys.argv[1:] or list(BENCHMARKS)
    for name in selected:
        start = time.perf_counter()
        BENCHMARKS[name]()
        print(f"{name:<36} {time.perf_counter() - start:9.3f} s")
