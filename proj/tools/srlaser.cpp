// Command-line front end: steady-state reports, dynamics, spectra, pump and
// atom-number sweeps, threshold location and the exact few-atom cross-check.

#include <algorithm>
#include <chrono>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "srlaser/config.hpp"
#include "srlaser/cumulant.hpp"
#include "srlaser/errors.hpp"
#include "srlaser/format.hpp"
#include "srlaser/oracle.hpp"
#include "srlaser/spectrum.hpp"
#include "srlaser/steady.hpp"
#include "srlaser/sweep.hpp"

namespace {

using srlaser::RunConfig;
using json = nlohmann::ordered_json;

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> sets;
    std::string output_dir;
};

RunConfig load_config(const CommonArgs& args) {
    RunConfig cfg;
    if (!args.config_path.empty()) cfg = srlaser::parse_config_file(args.config_path);
    srlaser::apply_overrides(cfg, args.sets);
    if (!args.output_dir.empty()) cfg.output_dir = args.output_dir;
    return cfg;
}

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("-c,--config", args.config_path, "key = value config file");
    cmd->add_option("-s,--set", args.sets, "override, e.g. --set pump=300");
    cmd->add_option("-o,--output-dir", args.output_dir, "directory for CSV output");
}

std::filesystem::path out_path(const RunConfig& cfg, const char* name) {
    std::filesystem::create_directories(cfg.output_dir);
    return std::filesystem::path(cfg.output_dir) / name;
}

// Write the fully formed text in one pass; a half-written file never
// replaces a previous result and identical runs produce identical bytes.
void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw srlaser::Error("cannot open '" + path.string() + "' for writing");
    os << text;
    if (!os) throw srlaser::Error("short write to '" + path.string() + "'");
}

srlaser::CumulantState initial_state(const RunConfig& cfg) {
    if (cfg.initial == "ground") {
        srlaser::CumulantState s;
        s.inversion = -1.0;
        return s;
    }
    return srlaser::repumped_initial(cfg.params);
}

srlaser::IntegrateOptions integrate_options(const RunConfig& cfg) {
    srlaser::IntegrateOptions opt;
    opt.rel_tol = cfg.ode_rel_tol;
    opt.abs_tol = cfg.ode_abs_tol;
    return opt;
}

int cmd_steady(const RunConfig& cfg) {
    const srlaser::SteadyReport rep = srlaser::steady_exact(cfg.params);
    std::cout << srlaser::steady_report_json(cfg.params, rep);
    return 0;
}

int cmd_thresholds(const RunConfig& cfg) {
    const srlaser::ThresholdPair th = srlaser::thresholds_empirical(cfg.params);
    json j;
    j["w_lower"] = {{"value", th.w_lower}, {"unit", "s^-1"}};
    j["w_upper"] = {{"value", th.w_upper}, {"unit", "s^-1"}};
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_dynamics(const RunConfig& cfg) {
    const srlaser::Trajectory tr =
        srlaser::integrate(cfg.params, initial_state(cfg), cfg.t_end,
                           integrate_options(cfg));
    std::ostringstream os;
    srlaser::write_trajectory_csv(os, cfg.params, tr);
    const auto path = out_path(cfg, "trajectory.csv");
    write_file(path, os.str());
    std::cerr << "wrote " << path.string() << " (" << tr.t.size() << " samples, "
              << srlaser::mode_name(tr.mode_used) << " mode)\n";
    return 0;
}

// dynamics --settle: run the steady-state detector instead of a fixed window.
int cmd_settle(const RunConfig& cfg) {
    const srlaser::SettleResult res =
        srlaser::settle(cfg.params, initial_state(cfg), integrate_options(cfg),
                        cfg.settle_tol);
    json j;
    j["t_settled"] = {{"value", res.t_settled}, {"unit", "s"}};
    j["steps"] = res.steps;
    j["mode"] = srlaser::mode_name(res.mode_used);
    j["state"] = {{"inversion", res.state.inversion},
                  {"coherence_re", res.state.coherence_re},
                  {"coherence_im", res.state.coherence_im},
                  {"spin_spin", res.state.spin_spin},
                  {"photons", res.state.photons}};
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_spectrum(const RunConfig& cfg) {
    srlaser::SystemParams at_zero = cfg.params;
    at_zero.detuning = 0.0;
    const srlaser::SteadyReport rep = srlaser::steady_exact(at_zero);
    const srlaser::SpectrumResult r =
        srlaser::linewidth(srlaser::build_qrt(cfg.params, rep.state));
    std::vector<double> omega;
    omega.reserve(cfg.spectrum_points);
    const double span = 8.0 * std::max(r.linewidth_fwhm, 1e-12);
    for (int i = 0; i < cfg.spectrum_points; ++i)
        omega.push_back(r.center_offset - 0.5 * span +
                        span * (static_cast<double>(i) / (cfg.spectrum_points - 1)));
    std::ostringstream os;
    srlaser::write_spectrum_csv(os, cfg.params, r, omega);
    const auto path = out_path(cfg, "spectrum.csv");
    write_file(path, os.str());
    json j;
    j["linewidth_fwhm"] = {{"value", r.linewidth_fwhm}, {"unit", "s^-1"}};
    j["linewidth"] = {{"value", r.linewidth_hz}, {"unit", "Hz"}};
    j["center_offset"] = {{"value", r.center_offset}, {"unit", "s^-1"}};
    j["photons"] = {{"value", r.photons}, {"unit", "photons"}};
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_sweep(const RunConfig& cfg) {
    using clock = std::chrono::steady_clock;
    for (const std::string& out : cfg.outputs) {
        if (out != "power_map" && out != "linewidth_map") continue;
        const auto t0 = clock::now();
        const std::vector<srlaser::SweepCell> cells =
            out == "power_map" ? srlaser::run_power_map(cfg)
                               : srlaser::run_linewidth_map(cfg);
        std::ostringstream os;
        srlaser::write_sweep_csv(os, cfg, out.c_str(), cells);
        const auto path = out_path(cfg, (out + ".csv").c_str());
        write_file(path, os.str());
        const double dt =
            std::chrono::duration<double>(clock::now() - t0).count();
        std::cerr << "wrote " << path.string() << " (" << cells.size()
                  << " cells in " << srlaser::g17(dt) << " s)\n";
    }
    return 0;
}

int cmd_oracle(const RunConfig& cfg) {
    srlaser::HilbertSpec h{cfg.oracle_atoms, cfg.oracle_n_max};
    srlaser::SystemParams p = cfg.params;
    p.n_atoms = h.n_atoms;
    const auto rows = srlaser::cumulant_error_report(h, p);
    std::ostringstream os;
    srlaser::write_error_report_csv(os, rows);
    const auto path = out_path(cfg, "oracle_report.csv");
    write_file(path, os.str());
    std::cout << os.str();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"superradiant bad-cavity laser toolkit"};
    app.require_subcommand(1);

    CommonArgs args;
    int rc = 0;
    auto wire = [&](CLI::App* cmd, int (*fn)(const RunConfig&)) {
        add_common(cmd, args);
        cmd->callback([&args, fn, &rc] { rc = fn(load_config(args)); });
    };

    wire(app.add_subcommand("steady", "algebraic steady state as JSON"), cmd_steady);
    wire(app.add_subcommand("thresholds", "collective pump window as JSON"),
         cmd_thresholds);
    auto* dyn = app.add_subcommand("dynamics", "integrate and write trajectory.csv");
    add_common(dyn, args);
    bool settle_flag = false;
    dyn->add_flag("--settle", settle_flag,
                  "integrate until the steady-state detector fires, print JSON");
    dyn->callback([&args, &settle_flag, &rc] {
        rc = settle_flag ? cmd_settle(load_config(args))
                         : cmd_dynamics(load_config(args));
    });
    wire(app.add_subcommand("spectrum", "emission line, spectrum.csv plus JSON"),
         cmd_spectrum);
    wire(app.add_subcommand("sweep", "pump/atom-number maps as CSV"), cmd_sweep);
    wire(app.add_subcommand("oracle", "few-atom exact cross-check as CSV"),
         cmd_oracle);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const srlaser::Error& e) {
        json j;
        j["error"] = e.what();
        std::cerr << j.dump(2) << "\n";
        return 1;
    } catch (const std::exception& e) {
        json j;
        j["error"] = std::string("unexpected: ") + e.what();
        std::cerr << j.dump(2) << "\n";
        return 2;
    }
    return rc;
}
