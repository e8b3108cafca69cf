#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "shipnet/esm.hpp"
#include "shipnet/realtime_proxy.hpp"

namespace shipnet {

enum class RunMode { Event, Realtime };
enum class Transport { Proxy, Direct };

struct Scenario {
    std::string name;
    RunMode mode = RunMode::Event;
    EsmScenarioConfig sim;
    std::uint32_t replicates = 1;
    // Real-time mode: controller sockets, and proxy ports when transport = proxy.
    Transport transport = Transport::Proxy;
    std::map<std::uint8_t, Endpoint> endpoints;
    std::map<std::uint8_t, Endpoint> proxy_endpoints;
    std::uint64_t source_hash = 0;
};

// Throws ParseError (line/column) or ValidationError (violated invariant).
// Unknown sections and keys are errors.
Scenario parse_scenario(std::istream& in, const std::string& origin = "<stream>");
Scenario parse_scenario(const std::filesystem::path& path);

// Markdown page listing every key, its type, default and meaning.
std::string scenario_reference();

// Stand-alone switch description used by the `switch` subcommand.
struct SwitchFile {
    SwitchConfig config;
    std::map<std::uint8_t, ProxyBinding> bindings;
};
SwitchFile parse_switch_file(std::istream& in);
SwitchFile parse_switch_file(const std::filesystem::path& path);

struct RunOptions {
    std::optional<std::uint64_t> seed;
    std::optional<RunMode> mode;
    bool delivery_log = false;
    Exec exec = Exec::Parallel;
};

// Replicate k (0-based) uses seed + k.
std::vector<EsmRunResult> run_replicates(const Scenario& scenario, std::uint64_t seed, Exec exec,
                                         bool keep_delivery_log = false);

struct RunSummary {
    std::vector<std::uint64_t> seeds;
    std::vector<EsmRunResult> runs;
    ComparisonReport report;
};

// Runs every replicate and writes soc_run<k>.csv, counters_run<k>.csv,
// report.csv, report.txt and manifest.txt (plus deliveries_run<k>.csv when
// requested) into `out_dir`.
RunSummary run(const Scenario& scenario, const std::filesystem::path& out_dir, const RunOptions& options = {});

// Table-II style comparison of run 1 of `ref_dir` against run 1 of each other
// output directory. Throws LabelMismatch.
ComparisonReport compare_outputs(const std::filesystem::path& ref_dir,
                                 const std::vector<std::filesystem::path>& against);

RunBundle load_run(const std::filesystem::path& dir, int run_index = 1);

}  // namespace shipnet
