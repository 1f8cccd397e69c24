// Command-line front end: simulate configs, run the built-in presets, and test
// transfer functions for strict positive realness.
//
// Exit codes: 0 success, 1 usage/config error, 2 runtime/analysis failure.

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "bcast/analysis.hpp"
#include "bcast/config.hpp"
#include "bcast/report.hpp"
#include "bcast/simulator.hpp"
#include "bcast/svg.hpp"
#include "bcast/trace_csv.hpp"

namespace fs = std::filesystem;

namespace {

std::string g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Writes every file or none: on failure the files already written by this
// call are removed before the error propagates.
void write_files(const fs::path& dir,
                 const std::vector<std::pair<std::string, std::string>>& files) {
    std::vector<fs::path> written;
    auto cleanup = [&] {
        std::error_code ec;
        for (const auto& p : written) fs::remove(p, ec);
    };
    for (const auto& [name, content] : files) {
        fs::path p = dir / name;
        std::ofstream os(p, std::ios::binary | std::ios::trunc);
        if (!os) {
            cleanup();
            throw std::runtime_error("cannot open " + p.string() + " for writing");
        }
        written.push_back(p);
        os << content;
        os.flush();
        if (!os) {
            cleanup();
            throw std::runtime_error("write failed for " + p.string());
        }
    }
}

std::vector<bcast::PlotSeries> agent_series(const bcast::SimTrace& trace,
                                            const std::vector<std::vector<double>>& cols,
                                            const std::string& stem) {
    std::vector<bcast::PlotSeries> series;
    for (int i = 0; i < trace.m; ++i) {
        bcast::PlotSeries s;
        s.label = stem + "_" + std::to_string(i + 1);
        s.x = trace.t;
        s.y = cols[static_cast<size_t>(i)];
        s.color = bcast::agent_color(i);
        s.dashed = i >= 5;  // agents 1-5 solid, 6-10 dashed
        series.push_back(std::move(s));
    }
    return series;
}

// Runs one config end to end and writes trace.csv, report.json, and the
// three plot files into out_dir. Returns the lines to print on stdout.
std::string run_one(const bcast::SimConfig& cfg, const std::string& identity,
                    const fs::path& out_dir, bool write_config_copy) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw std::runtime_error("cannot create " + out_dir.string() + ": " + ec.message());

    bcast::SimTrace trace = bcast::simulate(cfg);
    bcast::SprCertificate cert = bcast::spr_test(cfg.plant);

    std::vector<bcast::WindowMetrics> windows;
    for (auto [a, b] : {std::pair{0.15, 0.2}, std::pair{0.35, 0.4}})
        if (!trace.t.empty() && b <= trace.t.back() + 1e-12)
            windows.push_back({a, b, bcast::tracking_metrics(trace, a, b)});

    std::optional<bcast::PassivityReport> passivity;
    if (cfg.analysis.passivity)
        passivity = bcast::passivity_check(trace, cfg, bcast::default_storage_gains(cfg),
                                           cfg.analysis.tol);

    bcast::PlotSeries yr{"y_r", trace.t, trace.y_r, "#555555", true};
    bcast::PlotSeries yp{"y_p", trace.t, trace.y_p, "#1f77b4", false};
    std::string output_svg = bcast::render_svg_plot("plant output", "t [s]", "y", {yr, yp});
    std::string agents_svg = bcast::render_svg_plot(
        "agent outputs", "t [s]", "u_pi", agent_series(trace, trace.u_pi, "u_p"));
    std::string phases_svg =
        bcast::render_svg_plot("agent phases", "t [s]", "phi_i", agent_series(trace, trace.phi, "phi"));

    std::vector<std::string> outputs = {"trace.csv", "report.json", "output.svg",
                                        "agent_outputs.svg", "phases.svg"};
    if (write_config_copy) outputs.push_back("config.json");

    bcast::json report =
        bcast::make_report(identity, cfg, trace, cert, windows, passivity, outputs);

    std::vector<std::pair<std::string, std::string>> files;
    files.emplace_back("trace.csv", bcast::trace_csv_string(trace));
    files.emplace_back("report.json", report.dump(2) + "\n");
    files.emplace_back("output.svg", output_svg);
    files.emplace_back("agent_outputs.svg", agents_svg);
    files.emplace_back("phases.svg", phases_svg);
    if (write_config_copy) files.emplace_back("config.json", bcast::save_config(cfg).dump(2) + "\n");
    write_files(out_dir, files);

    std::ostringstream out;
    out << "run: " << identity << "\n";
    out << "rows: " << trace.rows() << " (dt=" << g17(cfg.dt) << ", t_end=" << g17(cfg.t_end)
        << ")\n";
    for (const auto& w : windows)
        out << "window [" << w.t_a << ", " << w.t_b << "]: mean_yp=" << g17(w.metrics.mean_yp)
            << " mean_e=" << g17(w.metrics.mean_e) << " std_e=" << g17(w.metrics.std_e) << "\n";
    if (passivity)
        out << "passivity: max_violation=" << g17(passivity->max_violation)
            << " c_u=" << g17(passivity->c_u) << " passed=" << (passivity->passed ? "yes" : "no")
            << "\n";
    for (const auto& f : report["flags"]) out << "flag: " << f.get<std::string>() << "\n";
    for (const auto& name : outputs) out << "wrote: " << (out_dir / name).string() << "\n";
    return out.str();
}

int exit_code_for(const std::exception& ex) {
    if (dynamic_cast<const std::invalid_argument*>(&ex)) return 1;
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"deterministic simulation and analysis of broadcast-signal agent pools"};
    app.require_subcommand(1);

    double dt_override = 0.0;
    auto* dt_opt = app.add_option("--dt", dt_override, "override the configured time step")
                       ->check(CLI::PositiveNumber);
    bool allow_non_spr = false;
    app.add_flag("--allow-non-spr", allow_non_spr, "accept plants that fail the SPR test");
    int jobs = 1;
    app.add_option("--jobs", jobs, "worker threads for multi-config batches")
        ->check(CLI::PositiveNumber);

    auto* sim = app.add_subcommand("simulate", "run one or more config files");
    sim->fallthrough();
    std::vector<std::string> config_paths;
    sim->add_option("--config", config_paths, "config file (repeat for a batch)")->required();
    std::string sim_out;
    sim->add_option("--out", sim_out, "output directory")->required();

    auto* pre = app.add_subcommand("preset", "run a named built-in experiment");
    pre->fallthrough();
    std::string preset_name;
    pre->add_option("name", preset_name, "asc-cond1 | asc-cond2 | assc-cond1 | integral-cond1")
        ->required();
    std::string pre_out;
    pre->add_option("--out", pre_out, "output directory")->required();

    auto* spr = app.add_subcommand("spr", "test a transfer function for strict positive realness");
    spr->fallthrough();
    std::vector<double> spr_num, spr_den;
    spr->add_option("--num", spr_num, "numerator coefficients, descending")->required();
    spr->add_option("--den", spr_den, "denominator coefficients, descending")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (spr->parsed()) {
            bcast::TransferFunction tf(spr_num, spr_den);
            bcast::SprCertificate cert = bcast::spr_test(tf);
            std::cout << "hurwitz: " << (cert.hurwitz ? "yes" : "no") << "\n";
            std::cout << "relative degree: " << cert.relative_degree << "\n";
            std::cout << "p(x) ascending:";
            for (double c : cert.realpart_poly) std::cout << ' ' << g17(c);
            std::cout << "\n";
            std::cout << "min over x >= 0: " << g17(cert.min_nonneg_value) << "\n";
            std::cout << "verdict: " << bcast::to_string(cert.verdict) << "\n";
            if (!cert.reason.empty()) std::cout << "reason: " << cert.reason << "\n";
            return cert.verdict == bcast::SprVerdict::StrictlyPositiveReal ? 0 : 2;
        }

        if (pre->parsed()) {
            bcast::SimConfig cfg = bcast::preset_config(preset_name);
            if (dt_opt->count() > 0) {
                cfg.dt = dt_override;
                cfg.validate();
            }
            std::cout << run_one(cfg, preset_name, pre_out, /*write_config_copy=*/true);
            return 0;
        }

        // simulate: one directory per config when batching
        struct Job {
            std::string path;
            fs::path out;
        };
        std::vector<Job> job_list;
        std::set<std::string> seen_stems;
        for (const auto& p : config_paths) {
            if (config_paths.size() > 1 && !seen_stems.insert(fs::path(p).stem().string()).second)
                throw std::invalid_argument("simulate: duplicate config stem '" +
                                            fs::path(p).stem().string() +
                                            "', output directories would collide");
            fs::path out = config_paths.size() == 1
                               ? fs::path(sim_out)
                               : fs::path(sim_out) / fs::path(p).stem();
            job_list.push_back({p, out});
        }
        std::vector<std::string> logs(job_list.size());
        std::vector<std::string> errors(job_list.size());
        std::vector<int> codes(job_list.size(), 0);
        std::atomic<size_t> next{0};
        auto worker = [&] {
            for (size_t i; (i = next.fetch_add(1)) < job_list.size();) {
                try {
                    bcast::SimConfig cfg = bcast::load_config_file(job_list[i].path, allow_non_spr);
                    if (dt_opt->count() > 0) {
                        cfg.dt = dt_override;
                        cfg.validate();
                    }
                    logs[i] = run_one(cfg, job_list[i].path, job_list[i].out, false);
                } catch (const std::exception& ex) {
                    errors[i] = job_list[i].path + ": " + ex.what();
                    codes[i] = exit_code_for(ex);
                }
            }
        };
        size_t n_threads = std::min<size_t>(static_cast<size_t>(jobs), job_list.size());
        if (n_threads <= 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            for (size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
            for (auto& t : pool) t.join();
        }
        int rc = 0;
        for (size_t i = 0; i < job_list.size(); ++i) {
            if (!logs[i].empty()) std::cout << logs[i];
            if (!errors[i].empty()) {
                std::cerr << "error: " << errors[i] << "\n";
                rc = std::max(rc, codes[i]);
            }
        }
        return rc;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return exit_code_for(ex);
    }
}
