// ssim command-line front end: validate configs, run scenarios, and
// evaluate the link-budget and Lambert models one-shot.
#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include "ssim/comms.hpp"
#include "ssim/engine.hpp"
#include "ssim/error.hpp"
#include "ssim/lambert.hpp"
#include "ssim/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

std::string default_out_dir() {
    const char* env = std::getenv("SSIM_OUT_DIR");
    return env ? env : ".";
}

Eigen::Vector3d parse_triple(const std::string& csv, const std::string& what) {
    Eigen::Vector3d v;
    if (std::sscanf(csv.c_str(), "%lf,%lf,%lf", &v.x(), &v.y(), &v.z()) != 3)
        throw ssim::ConfigError("'" + what + "' must be three comma-separated numbers");
    return v;
}

int cmd_run(const std::string& scenario_path, const std::string& out_dir,
            const std::vector<std::string>& overrides) {
    ssim::Scenario scenario = ssim::Scenario::load(scenario_path, overrides);
    std::filesystem::create_directories(out_dir);

    ssim::SimEngine engine(scenario);
    ssim::RunSummary summary = engine.run();

    engine.writer().write_file(out_dir + "/telemetry.csv");
    summary.write_file(out_dir + "/summary.json");

    std::printf("run complete: %zu steps\n", summary.steps);
    std::printf("  distance to target  %.6g m -> %.6g m\n",
                summary.initial_distance_m, summary.final_distance_m);
    std::printf("  total delta-v       %.6g m/s\n", summary.total_dv_m_s);
    std::printf("  SoC min/final       %.4f / %.4f\n", summary.min_soc,
                summary.final_soc);
    std::printf("  bytes downlinked    %.6g\n", summary.bytes_downlinked);
    std::printf("  telemetry hash      %llu\n",
                static_cast<unsigned long long>(summary.telemetry_hash));
    std::printf("  wrote %s/telemetry.csv, %s/summary.json\n", out_dir.c_str(),
                out_dir.c_str());
    return kExitOk;
}

int cmd_validate(const std::string& scenario_path,
                 const std::vector<std::string>& overrides, bool print_config) {
    ssim::Scenario scenario = ssim::Scenario::load(scenario_path, overrides);
    if (print_config)
        std::printf("%s\n", scenario.to_json().dump(2).c_str());
    else
        std::printf("scenario '%s' is valid\n", scenario_path.c_str());
    return kExitOk;
}

struct LinkArgs {
    double range_m = 0.0;
    double pointing_error_deg = 0.0;
    ssim::LinkBudget budget;
    int arq_window = 1;
    double ack_fer = 0.0;
    std::string sweep_n;
};

int cmd_link_budget(const LinkArgs& a) {
    double fsl = ssim::free_space_loss_db(a.range_m, a.budget.frequency_hz);
    double point = ssim::pointing_loss_db(a.pointing_error_deg * ssim::kPi / 180.0,
                                          a.budget.beamwidth_3db_rad);
    double cn0 = ssim::carrier_to_noise_db_hz(
        a.budget, a.range_m, a.pointing_error_deg * ssim::kPi / 180.0);
    ssim::DataRate rate = ssim::supportable_data_rate(cn0, a.budget);
    ssim::ArqConfig arq = ssim::ArqConfig::with_default_curve(
        a.arq_window, a.ack_fer,
        a.budget.required_eb_n0_db - a.budget.coding_gain_db + a.budget.margin_db);
    double reff = 0.0;
    try {
        reff = ssim::arq_effective_rate_bps(rate.bps, cn0, arq);
    } catch (const ssim::RuntimeError&) {
        reff = 0.0;
    }

    std::printf("link budget\n");
    std::printf("  EIRP                % 10.2f dBW\n", a.budget.eirp_dbw());
    std::printf("  G/T                 % 10.2f dB/K\n", a.budget.gt_db_k);
    std::printf("  free-space loss     % 10.2f dB\n", fsl);
    std::printf("  pointing loss       % 10.2f dB\n", point);
    std::printf("  other losses        % 10.2f dB\n", a.budget.other_losses_db);
    std::printf("  boltzmann           % 10.2f dBJ/K\n", ssim::kBoltzmannDbJ);
    std::printf("  C/N0                % 10.2f dB-Hz\n", cn0);
    std::printf("  required Eb/N0      % 10.2f dB\n", a.budget.required_eb_n0_db);
    std::printf("  coding gain         % 10.2f dB\n", a.budget.coding_gain_db);
    std::printf("  margin              % 10.2f dB\n", a.budget.margin_db);
    std::printf("  R_b                 % 10.2f dB-Hz%s\n", rate.db_hz,
                rate.clamped ? " (clamped)" : "");
    std::printf("  R_b                 % 10.1f bps\n", rate.bps);
    std::printf("  R_eff (N=%d)        % 10.1f bps\n", a.arq_window, reff);

    if (!a.sweep_n.empty()) {
        int n1 = 0, n2 = 0;
        if (std::sscanf(a.sweep_n.c_str(), "%d:%d", &n1, &n2) != 2 || n1 < 1 ||
            n2 < n1)
            throw ssim::ConfigError("--sweep-n must be 'n1:n2' with 1 <= n1 <= n2");
        std::printf("  N sweep:\n");
        for (int n = n1; n <= n2; ++n) {
            arq.window_frames = n;
            double r = 0.0;
            try {
                r = ssim::arq_effective_rate_bps(rate.bps, cn0, arq);
            } catch (const ssim::RuntimeError&) {
                r = 0.0;
            }
            std::printf("    N=%-4d R_eff = %.1f bps\n", n, r);
        }
    }
    return kExitOk;
}

int cmd_lambert(const std::string& r1s, const std::string& r2s, double tof,
                double mu, bool retrograde, const std::string& plane) {
    Eigen::Vector3d r1 = parse_triple(r1s, "--r1");
    Eigen::Vector3d r2 = parse_triple(r2s, "--r2");
    std::optional<Eigen::Vector3d> hint;
    if (!plane.empty()) hint = parse_triple(plane, "--plane-normal");
    if (!(tof > 0.0)) throw ssim::ConfigError("--tof must be positive");
    if (!(mu > 0.0)) throw ssim::ConfigError("--mu must be positive");

    ssim::LambertSolution sol = ssim::lambert_solve(
        r1, r2, tof, mu,
        retrograde ? ssim::TransferDirection::Retrograde
                   : ssim::TransferDirection::Prograde,
        hint);

    // Round-trip check: propagate (r1, v1) for tof in a one-body field.
    ssim::CelestialBody center{"center", mu, 0.0, true, std::nullopt,
                               Eigen::Vector3d::Zero()};
    ssim::Environment env(ssim::SolarConstants{}, {center}, "center");
    ssim::VehicleForceModel probe;
    probe.mass_kg = 1.0;
    probe.include_srp = false;
    ssim::NavState x0{r1, sol.v1, "center"};
    int steps = 20000;
    ssim::PropagateOptions opt;
    opt.switch_centers = false;
    auto thrust = [](double) { return Eigen::Vector3d::Zero(); };
    auto trace = ssim::propagate(x0, thrust, 0.0, tof / steps, tof,
                                 Eigen::Quaterniond::Identity(), env, probe, opt);
    double residual = (trace.back().state.position_m - r2).norm();
    double rel = residual / r2.norm();

    std::printf("lambert solution (%d iterations)\n", sol.iterations);
    std::printf("  v1 = [%.9g, %.9g, %.9g] m/s\n", sol.v1.x(), sol.v1.y(), sol.v1.z());
    std::printf("  v2 = [%.9g, %.9g, %.9g] m/s\n", sol.v2.x(), sol.v2.y(), sol.v2.z());
    std::printf("  round-trip residual = %.6g m (%.3g relative)\n", residual, rel);
    if (rel > 1e-6) {
        std::fprintf(stderr, "residual exceeds 1e-6 relative\n");
        return kExitRuntime;
    }
    return kExitOk;
}

int cmd_sweep(const std::string& scenario_path, const std::string& out_dir,
              const std::vector<std::string>& overrides, const std::string& key,
              const std::string& values_csv, int jobs) {
    std::vector<std::string> values;
    std::string cur;
    for (char c : values_csv) {
        if (c == ',') {
            values.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) values.push_back(cur);
    if (values.empty()) throw ssim::ConfigError("--values must be a non-empty list");

    // Validate every run config up front so failures are config errors.
    std::vector<ssim::Scenario> scenarios;
    for (const std::string& v : values) {
        std::vector<std::string> ov = overrides;
        ov.push_back(key + "=" + v);
        scenarios.push_back(ssim::Scenario::load(scenario_path, ov));
    }

    std::filesystem::create_directories(out_dir);
    std::vector<ssim::RunSummary> summaries(values.size());
    std::vector<std::string> errors(values.size());

    std::size_t next = 0;
    std::mutex mtx;
    auto worker = [&]() {
        for (;;) {
            std::size_t i;
            {
                std::lock_guard<std::mutex> lock(mtx);
                if (next >= values.size()) return;
                i = next++;
            }
            try {
                ssim::SimEngine engine(scenarios[i]);
                summaries[i] = engine.run();
                std::string dir = out_dir + "/sweep_" + std::to_string(i);
                std::filesystem::create_directories(dir);
                engine.writer().write_file(dir + "/telemetry.csv");
                summaries[i].write_file(dir + "/summary.json");
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    int n_workers = std::max(1, std::min<int>(jobs, static_cast<int>(values.size())));
    std::vector<std::thread> pool;
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    bool failed = false;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!errors[i].empty()) {
            std::printf("%s=%s: FAILED: %s\n", key.c_str(), values[i].c_str(),
                        errors[i].c_str());
            failed = true;
        } else {
            std::printf("%s=%s: final_distance=%.6g m dv=%.6g m/s min_soc=%.4f\n",
                        key.c_str(), values[i].c_str(),
                        summaries[i].final_distance_m, summaries[i].total_dv_m_s,
                        summaries[i].min_soc);
        }
    }
    return failed ? kExitRuntime : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ssim: deterministic multi-subsystem smallsat mission simulator"};
    app.require_subcommand(1);

    std::string scenario_path, out_dir = default_out_dir();
    std::vector<std::string> overrides;
    std::string seed_override;

    auto add_common = [&](CLI::App* sub, bool needs_out) {
        sub->add_option("--scenario", scenario_path, "scenario JSON path")
            ->required();
        sub->add_option("--set", overrides,
                        "dotted-key override, e.g. executive.soc_charge_threshold=0.5")
            ->take_all();
        sub->add_option("--seed", seed_override, "override the scenario seed");
        if (needs_out)
            sub->add_option("--out", out_dir,
                            "output directory (default $SSIM_OUT_DIR or .)");
    };

    CLI::App* run = app.add_subcommand("run", "run a scenario to telemetry + summary");
    add_common(run, true);

    CLI::App* validate =
        app.add_subcommand("validate", "parse and validate a scenario");
    bool print_config = false;
    add_common(validate, false);
    validate->add_flag("--print-config", print_config,
                       "dump the effective configuration JSON");

    CLI::App* link = app.add_subcommand("link-budget", "one-shot link budget");
    LinkArgs la;
    link->add_option("--range-m", la.range_m, "slant range in meters")->required();
    link->add_option("--pointing-error-deg", la.pointing_error_deg,
                     "antenna pointing error");
    link->add_option("--tx-power-w", la.budget.tx_power_w, "transmit power");
    link->add_option("--tx-gain-db", la.budget.tx_gain_db, "antenna gain");
    link->add_option("--line-loss-db", la.budget.line_loss_db, "line loss");
    link->add_option("--frequency-hz", la.budget.frequency_hz, "carrier frequency");
    double beamwidth_deg = 0.1;
    link->add_option("--beamwidth-deg", beamwidth_deg, "3 dB beamwidth");
    link->add_option("--gt-db-k", la.budget.gt_db_k, "receiver G/T");
    link->add_option("--other-losses-db", la.budget.other_losses_db, "lump losses");
    link->add_option("--margin-db", la.budget.margin_db, "link margin");
    link->add_option("--eb-n0-db", la.budget.required_eb_n0_db, "required Eb/N0");
    link->add_option("--coding-gain-db", la.budget.coding_gain_db, "coding gain");
    link->add_option("--rate-limit-bps", la.budget.data_rate_limit_bps,
                     "data-rate clamp");
    link->add_option("--arq-window", la.arq_window, "Go-Back-N window");
    link->add_option("--ack-fer", la.ack_fer, "acknowledgment-channel FER");
    link->add_option("--sweep-n", la.sweep_n, "print R_eff for N range 'n1:n2'");

    CLI::App* lambert = app.add_subcommand("lambert", "one-shot Lambert solve");
    std::string r1s, r2s, plane;
    double tof = 0.0, mu = 0.0;
    bool retrograde = false;
    lambert->add_option("--r1", r1s, "start position 'x,y,z' m")->required();
    lambert->add_option("--r2", r2s, "end position 'x,y,z' m")->required();
    lambert->add_option("--tof", tof, "time of flight s")->required();
    lambert->add_option("--mu", mu, "gravitational parameter m^3/s^2")->required();
    lambert->add_flag("--retrograde", retrograde, "retrograde transfer");
    lambert->add_option("--plane-normal", plane,
                        "transfer-plane normal 'x,y,z' (needed for 180-deg)");

    CLI::App* sweep = app.add_subcommand("sweep", "run a scenario over a value sweep");
    std::string sweep_key, sweep_values;
    int jobs = static_cast<int>(std::thread::hardware_concurrency());
    add_common(sweep, true);
    sweep->add_option("--key", sweep_key, "dotted key to sweep")->required();
    sweep->add_option("--values", sweep_values, "comma-separated values")->required();
    sweep->add_option("--jobs", jobs, "worker threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp")
            return app.exit(e);
        app.exit(e);
        return kExitConfig;
    }

    if (!seed_override.empty()) overrides.push_back("seed=" + seed_override);

    try {
        if (run->parsed()) return cmd_run(scenario_path, out_dir, overrides);
        if (validate->parsed())
            return cmd_validate(scenario_path, overrides, print_config);
        if (link->parsed()) {
            la.budget.beamwidth_3db_rad = beamwidth_deg * ssim::kPi / 180.0;
            return cmd_link_budget(la);
        }
        if (lambert->parsed())
            return cmd_lambert(r1s, r2s, tof, mu, retrograde, plane);
        if (sweep->parsed())
            return cmd_sweep(scenario_path, out_dir, overrides, sweep_key,
                             sweep_values, jobs);
    } catch (const ssim::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const ssim::SimError& e) {
        std::fprintf(stderr, "runtime error: %s\n", e.what());
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRuntime;
    }
    return kExitConfig;
}
