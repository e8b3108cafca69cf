// shipnet: scenario runner, comparison, echo benchmark and switch front end.

#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "shipnet/echo.hpp"
#include "shipnet/realtime_proxy.hpp"
#include "shipnet/scenario.hpp"

namespace {

std::atomic<bool> g_stop{false};
std::atomic<bool> g_dump{false};

extern "C" void on_signal(int sig) {
    if (sig == SIGUSR1) g_dump = true;
    else g_stop = true;
}

void install_signals() {
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::signal(SIGUSR1, on_signal);
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw shipnet::Error("cannot write '" + path + "'");
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    using namespace shipnet;
    CLI::App app{"Network impairment emulation and ESM charging co-simulation"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    // run
    auto* run_cmd = app.add_subcommand("run", "Run every replicate of a scenario file");
    std::string scenario_path, out_dir;
    std::optional<std::uint64_t> seed;
    std::string mode_override;
    bool delivery_log = false, serial = false;
    run_cmd->add_option("scenario", scenario_path, "Scenario file")->required()->check(CLI::ExistingFile);
    run_cmd->add_option("--out", out_dir, "Output directory (created if missing)")->required();
    run_cmd->add_option("--seed", seed, "Override the scenario base seed");
    run_cmd->add_option("--mode", mode_override, "Override the scenario mode")
        ->check(CLI::IsMember({"event", "realtime"}));
    run_cmd->add_flag("--delivery-log", delivery_log, "Also write deliveries_run<k>.csv (event mode)");
    run_cmd->add_flag("--serial", serial, "Run replicates one after another");

    // compare
    auto* cmp_cmd = app.add_subcommand("compare", "Compare run 1 of output directories against a reference");
    std::string ref_dir, report_path;
    std::vector<std::string> against;
    cmp_cmd->add_option("--ref", ref_dir, "Reference output directory")->required()->check(CLI::ExistingDirectory);
    cmp_cmd->add_option("--against", against, "Output directories to compare")->required()->check(CLI::ExistingDirectory);
    cmp_cmd->add_option("--out", report_path, "Report CSV path (a .txt table is written next to it)")->required();

    // echo-serve
    auto* serve_cmd = app.add_subcommand("echo-serve", "Echo every UDP datagram back to its sender");
    std::string serve_bind;
    serve_cmd->add_option("bind", serve_bind, "Listen address host:port")->required();

    // echo-send
    auto* send_cmd = app.add_subcommand("echo-send", "Periodic UDP echo sender");
    std::string server, bind_addr, samples_path, stats_path;
    std::int64_t period_us = 10'000, timeout_us = 1'000'000;
    std::size_t count = 10'000, payload_size = 64;
    std::optional<int> switch_dest;
    double bin_width_us = 10.0;
    send_cmd->add_option("server", server, "Echo server (or proxy port) host:port")->required();
    send_cmd->add_option("--period-us", period_us, "Send period in microseconds")->capture_default_str()->check(CLI::PositiveNumber);
    send_cmd->add_option("--count", count, "Number of datagrams")->capture_default_str()->check(CLI::PositiveNumber);
    send_cmd->add_option("--payload-size", payload_size, "Datagram size in bytes (>= 16)")->capture_default_str();
    send_cmd->add_option("--timeout-us", timeout_us, "Reply timeout in microseconds")->capture_default_str()->check(CLI::PositiveNumber);
    send_cmd->add_option("--out", samples_path, "Samples CSV path")->required();
    send_cmd->add_option("--stats", stats_path, "Statistics CSV path")->required();
    send_cmd->add_option("--bind", bind_addr, "Local address host:port");
    send_cmd->add_option("--switch-dest", switch_dest, "Prefix datagrams with this switch destination id")
        ->check(CLI::Range(1, 255));
    send_cmd->add_option("--bin-width-us", bin_width_us, "Linear histogram bin width")->capture_default_str()->check(CLI::PositiveNumber);

    // switch
    auto* sw_cmd = app.add_subcommand("switch", "Run the real-time impairment switch (SIGUSR1 dumps counters)");
    std::string sw_config, sw_counters;
    sw_cmd->add_option("--config", sw_config, "Switch description file")->required()->check(CLI::ExistingFile);
    sw_cmd->add_option("--counters", sw_counters, "Counters CSV path (default: stdout)");

    auto* ref_cmd = app.add_subcommand("scenario-reference", "Print the scenario file reference page");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*run_cmd) {
            Scenario s = parse_scenario(std::filesystem::path(scenario_path));
            RunOptions opt;
            opt.seed = seed;
            if (!mode_override.empty()) opt.mode = mode_override == "event" ? RunMode::Event : RunMode::Realtime;
            opt.delivery_log = delivery_log;
            opt.exec = serial ? Exec::Serial : Exec::Parallel;
            const auto summary = run(s, out_dir, opt);
            write_report_table(std::cout, summary.report);
        } else if (*cmp_cmd) {
            std::vector<std::filesystem::path> dirs(against.begin(), against.end());
            const auto report = compare_outputs(ref_dir, dirs);
            auto csv = open_out(report_path);
            write_report_csv(csv, report);
            auto txt = open_out(std::filesystem::path(report_path).replace_extension(".txt").string());
            write_report_table(txt, report);
            write_report_table(std::cout, report);
        } else if (*serve_cmd) {
            install_signals();
            run_echo_server(Endpoint::parse(serve_bind), g_stop);
        } else if (*send_cmd) {
            EchoConfig cfg;
            cfg.server = Endpoint::parse(server);
            if (!bind_addr.empty()) cfg.bind = Endpoint::parse(bind_addr);
            cfg.period = Micros{period_us};
            cfg.count = count;
            cfg.payload_size = payload_size;
            cfg.timeout = Micros{timeout_us};
            if (switch_dest) cfg.switch_destination = static_cast<std::uint8_t>(*switch_dest);
            validate(cfg);
            const auto result = run_sender(cfg);
            auto samples = open_out(samples_path);
            write_samples_csv(samples, result.samples);
            const auto stats = summarize(result.samples, bin_width_us);
            auto st = open_out(stats_path);
            write_stats_csv(st, stats);
            std::cout << "n=" << stats.n << " lost=" << stats.lost << " mean_us=" << stats.mean
                      << " p50_us=" << stats.p50 << " p99_us=" << stats.p99 << '\n';
        } else if (*sw_cmd) {
            install_signals();
            const auto file = parse_switch_file(std::filesystem::path(sw_config));
            if (sw_counters.empty()) {
                run_realtime_proxy(file.config, file.bindings, g_stop, g_dump, std::cout);
            } else {
                auto out = open_out(sw_counters);
                run_realtime_proxy(file.config, file.bindings, g_stop, g_dump, out);
            }
        } else if (*ref_cmd) {
            std::cout << scenario_reference();
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
