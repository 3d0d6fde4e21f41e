#include "srlaser/sweep.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <ostream>
#include <thread>

#include "srlaser/errors.hpp"
#include "srlaser/format.hpp"
#include "srlaser/spectrum.hpp"

namespace srlaser {

std::vector<double> log_grid(double lo, double hi, int n) {
    if (!(lo > 0.0) || !(hi >= lo)) throw DomainError("log_grid needs 0 < lo <= hi");
    if (n < 1) throw DomainError("log_grid needs n >= 1");
    std::vector<double> g;
    g.reserve(n);
    if (n == 1) {
        g.push_back(lo);
        return g;
    }
    const double ratio = std::log(hi / lo);
    for (int i = 0; i < n; ++i)
        g.push_back(lo * std::exp(ratio * (static_cast<double>(i) / (n - 1))));
    g.back() = hi;  // pin the endpoint against accumulated rounding
    return g;
}

namespace {

template <class Fn>
void parallel_for(std::size_t count, int workers, Fn&& body) {
    if (workers <= 0) {
        const unsigned hw = std::thread::hardware_concurrency();
        workers = hw > 0 ? static_cast<int>(hw) : 1;
    }
    workers = static_cast<int>(
        std::min<std::size_t>(static_cast<std::size_t>(workers), count));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto drain = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            body(i);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (int t = 1; t < workers; ++t) pool.emplace_back(drain);
    drain();
    for (std::thread& th : pool) th.join();
}

// value extractor takes a finished steady-state report.
template <class Fn>
std::vector<SweepCell> run_map(const RunConfig& cfg, Fn&& value_of) {
    const std::vector<double> ws = log_grid(cfg.sweep.w_min, cfg.sweep.w_max,
                                            cfg.sweep.w_points);
    const std::vector<double> ns = log_grid(cfg.sweep.n_min, cfg.sweep.n_max,
                                            cfg.sweep.n_points);
    std::vector<SweepCell> cells(ws.size() * ns.size());
    parallel_for(cells.size(), cfg.workers, [&](std::size_t idx) {
        SweepCell& cell = cells[idx];
        cell.pump = ws[idx % ws.size()];
        cell.n_atoms = ns[idx / ws.size()];
        SystemParams p = cfg.params;
        p.pump = cell.pump;
        p.n_atoms = cell.n_atoms;
        try {
            const SteadyReport rep = steady_exact(p);
            cell.branch = rep.branch;
            cell.value = value_of(p, rep);
        } catch (const DomainError&) {
            cell.error_code = 1;
            cell.value = std::numeric_limits<double>::quiet_NaN();
        } catch (const SolverError&) {
            cell.error_code = 2;
            cell.value = std::numeric_limits<double>::quiet_NaN();
        } catch (const Error&) {
            cell.error_code = 3;
            cell.value = std::numeric_limits<double>::quiet_NaN();
        }
    });
    return cells;
}

}  // namespace

std::vector<SweepCell> run_power_map(const RunConfig& cfg) {
    return run_map(cfg, [](const SystemParams&, const SteadyReport& rep) {
        return rep.power;
    });
}

std::vector<SweepCell> run_linewidth_map(const RunConfig& cfg) {
    return run_map(cfg, [](const SystemParams& p, const SteadyReport& rep) {
        return linewidth(build_qrt(p, rep.state)).linewidth_fwhm;
    });
}

void write_sweep_csv(std::ostream& os, const RunConfig& cfg, const char* quantity,
                     const std::vector<SweepCell>& cells) {
    const SystemParams& p = cfg.params;
    os << "# " << quantity << " sweep over pump and n_atoms\n";
    os << "# gamma = " << g17(p.gamma) << "\n";
    os << "# t2_inv = " << g17(p.t2_inv) << "\n";
    os << "# kappa = " << g17(p.kappa) << "\n";
    os << "# rabi = " << g17(p.rabi) << "\n";
    os << "# detuning = " << g17(p.detuning) << "\n";
    os << "# omega_a = " << g17(p.omega_a) << "\n";
    os << "# pump grid = " << g17(cfg.sweep.w_min) << " .. " << g17(cfg.sweep.w_max)
       << " x " << cfg.sweep.w_points << " (log)\n";
    os << "# n_atoms grid = " << g17(cfg.sweep.n_min) << " .. "
       << g17(cfg.sweep.n_max) << " x " << cfg.sweep.n_points << " (log)\n";
    os << "# units: pump s^-1, power W, linewidth s^-1\n";
    os << "# reference_gamma = " << g17(p.gamma) << "\n";
    os << "# reference_t2_inv = " << g17(p.t2_inv) << "\n";
    os << "# reference_linewidth_floor = " << g17(derive(p).linewidth_floor) << "\n";
    os << "pump,n_atoms,value,branch,error_code\n";
    for (const SweepCell& c : cells)
        os << g17(c.pump) << ',' << g17(c.n_atoms) << ',' << g17(c.value) << ','
           << (c.error_code == 0 ? branch_name(c.branch) : "error") << ','
           << c.error_code << '\n';
}

}  // namespace srlaser
