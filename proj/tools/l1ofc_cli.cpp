#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "l1ofc/harness.hpp"

namespace {

namespace fs = std::filesystem;
using namespace l1ofc;

constexpr int kOk = 0;
constexpr int kInfeasible = 1;
constexpr int kDiverged = 2;
constexpr int kBadConfig = 3;

std::string base_name(const harness::Scenario& sc) {
    std::string out;
    for (char c : sc.name) out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
    return out.empty() ? "run" : out;
}

void emit_run(const harness::Scenario& sc, const harness::RunResult& rr, const fs::path& dir) {
    fs::create_directories(dir);
    const std::string base = base_name(sc);
    const fs::path csv = dir / (base + ".csv");
    harness::write_csv(rr.trace, csv.string());
    harness::write_plot_script(csv.string(), (dir / (base + "_plots.py")).string());
    std::ofstream rep(dir / (base + "_design.json"));
    rep << rr.artifacts.to_json() << "\n";
    std::cout << "wrote " << csv.string() << "\n";
}

int run_verify(const std::string& path) {
    harness::Scenario sc = harness::load_scenario(path);
    try {
        auto art = design::synthesize(sc.plant, sc.options, sc.gamma.omega);
        std::cout << art.report_text();
        if (!art.gamma_ok) {
            std::cout << "note: Gamma " << art.gamma << " is below the certified floor "
                      << art.gamma_min << " (run proceeds without the theoretical guarantee)\n";
        }
        std::cout << "feasible\n";
        return kOk;
    } catch (const Error& e) {
        std::cout << "infeasible: " << e.what() << "\n";
        return kInfeasible;
    }
}

int run_bounds(const std::string& path) {
    harness::Scenario sc = harness::load_scenario(path);
    auto art = design::synthesize(sc.plant, sc.options, sc.gamma.omega);
    std::cout << art.report_text();
    return kOk;
}

int run_simulate(const std::string& path, double gamma, const std::string& out_dir) {
    harness::Scenario sc = harness::load_scenario(path);
    std::optional<double> g;
    if (gamma > 0) g = gamma;
    harness::RunResult rr = harness::run_closed_loop(sc, g);
    emit_run(sc, rr, out_dir);
    return kOk;
}

int run_sweep(const std::string& path, const std::string& gammas_csv, const std::string& out_dir) {
    harness::Scenario sc = harness::load_scenario(path);
    std::vector<double> gammas;
    std::stringstream ss(gammas_csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) gammas.push_back(std::stod(tok));
    }
    if (gammas.empty()) throw ConfigError("sweep: no gamma values given");
    auto rows = harness::gamma_sweep(sc, gammas);
    fs::create_directories(out_dir);
    std::ofstream csv(fs::path(out_dir) / (base_name(sc) + "_sweep.csv"));
    csv << "gamma,steady_tracking,steady_estimation,gamma_ok,error\n";
    std::cout << "gamma\tsteady_tracking\tsteady_estimation\tflags\n";
    for (const auto& r : rows) {
        csv << r.gamma << "," << r.steady_tracking << "," << r.steady_estimation << ","
            << (r.gamma_ok ? 1 : 0) << "," << r.error << "\n";
        std::cout << r.gamma << "\t" << r.steady_tracking << "\t" << r.steady_estimation << "\t"
                  << (r.gamma_ok ? "" : "gamma-below-floor ") << r.error << "\n";
    }
    return kOk;
}

int run_delay_margin(const std::string& path, double max_delay, const std::string& out_dir) {
    harness::Scenario sc = harness::load_scenario(path);
    auto dm = harness::delay_margin_search(sc, max_delay);
    if (!dm.found) {
        std::cout << "no instability found up to " << max_delay
                  << " s; margin is at least that value\n";
    } else {
        std::cout << "delay margin: " << dm.margin() << " s (bracket [" << dm.lower << ", "
                  << dm.upper << "])\n";
    }
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        std::ofstream out(fs::path(out_dir) / (base_name(sc) + "_delay_margin.json"));
        out << "{\"lower\": " << dm.lower << ", \"upper\": " << dm.upper
            << ", \"found\": " << (dm.found ? "true" : "false") << "}\n";
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive output-feedback controller synthesis and simulation"};
    app.require_subcommand(1);

    std::string scenario, out_dir = ".", gammas = "50,500,5000";
    double gamma = -1.0, max_delay = 1.0;

    auto* verify = app.add_subcommand("verify", "Run the design pipeline and report feasibility");
    verify->add_option("scenario", scenario)->required();

    auto* bounds = app.add_subcommand("bounds", "Print the full design-constant table");
    bounds->add_option("scenario", scenario)->required();

    auto* simulate = app.add_subcommand("simulate", "Run a closed-loop simulation");
    simulate->add_option("scenario", scenario)->required();
    simulate->add_option("--gamma", gamma, "Override the adaptation gain");
    simulate->add_option("--out", out_dir, "Output directory");

    auto* sweep = app.add_subcommand("sweep", "Run a gamma sweep");
    sweep->add_option("scenario", scenario)->required();
    sweep->add_option("--gammas", gammas, "Comma-separated gain list");
    sweep->add_option("--out", out_dir, "Output directory");

    auto* delay = app.add_subcommand("delay-margin", "Bisect the input-delay margin");
    delay->add_option("scenario", scenario)->required();
    delay->add_option("--max", max_delay, "Upper end of the search range [s]");
    delay->add_option("--out", out_dir, "Output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (verify->parsed()) return run_verify(scenario);
        if (bounds->parsed()) return run_bounds(scenario);
        if (simulate->parsed()) return run_simulate(scenario, gamma, out_dir);
        if (sweep->parsed()) return run_sweep(scenario, gammas, out_dir);
        if (delay->parsed()) return run_delay_margin(scenario, max_delay, out_dir);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kBadConfig;
    } catch (const Unstable& e) {
        std::cerr << "diverged: " << e.what() << "\n";
        return kDiverged;
    } catch (const NonFiniteState& e) {
        std::cerr << "diverged: " << e.what() << "\n";
        return kDiverged;
    } catch (const Error& e) {
        std::cerr << "design error: " << e.what() << "\n";
        return kInfeasible;
    }
    return kOk;
}
