// Serial vs OpenMP timings for the parallel kernels. `--quick` runs tiny
// sizes and only checks that both paths agree.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <random>
#include <sstream>

#include "shipnet/echo.hpp"
#include "shipnet/metrics.hpp"
#include "shipnet/scenario.hpp"

using namespace shipnet;
using Clock = std::chrono::steady_clock;

namespace {

template <class F>
double best_of(int reps, F f) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = Clock::now();
        f();
        best = std::min(best, std::chrono::duration<double, std::milli>(Clock::now() - t0).count());
    }
    return best;
}

void row(const char* name, double serial_ms, double parallel_ms) {
    std::printf("%-28s %10.2f %10.2f %8.2fx\n", name, serial_ms, parallel_ms, serial_ms / parallel_ms);
}

}  // namespace

int main(int argc, char** argv) {
    const bool quick = argc > 1 && std::strcmp(argv[1], "--quick") == 0;
    const std::size_t n = quick ? 50'000 : 20'000'000;
    const int reps = quick ? 1 : 5;
    int bad = 0;

    std::mt19937_64 g(1);
    std::uniform_real_distribution<double> d(0.1, 1.0);
    TimeSeries a{SimTime{0}, Micros{1000}, std::vector<double>(n)}, b = a;
    for (auto& x : a.values) x = d(g);
    for (auto& x : b.values) x = d(g);

    std::printf("threads: %d\n%-28s %10s %10s %9s\n", worker_threads(), "kernel", "serial ms", "omp ms", "speedup");
    double ms = 0, mp = 0;
    const double ts = best_of(reps, [&] { ms = mape(a, b, Exec::Serial); });
    const double tp = best_of(reps, [&] { mp = mape(a, b, Exec::Parallel); });
    row("mape", ts, tp);
    bad += std::fabs(ms - mp) > 1e-12 * ms;

    double ps = 0, pp = 0;
    row("avg_abs_pd", best_of(reps, [&] { ps = avg_abs_pd(a, b, Exec::Serial); }),
        best_of(reps, [&] { pp = avg_abs_pd(a, b, Exec::Parallel); }));
    bad += std::fabs(ps - pp) > 1e-12 * ps;

    std::vector<ResponseTimeSample> samples(n / 4);
    std::uniform_int_distribution<std::int64_t> rtt(50, 5000);
    for (std::size_t i = 0; i < samples.size(); ++i) samples[i] = {i, SimTime{0}, SimTime{rtt(g)}};
    LatencyStats ss, sp;
    row("summarize (histograms)", best_of(reps, [&] { ss = summarize(samples, 10.0, Exec::Serial); }),
        best_of(reps, [&] { sp = summarize(samples, 10.0, Exec::Parallel); }));
    bad += ss.histogram.size() != sp.histogram.size();
    for (std::size_t i = 0; i < ss.histogram.size() && i < sp.histogram.size(); ++i)
        bad += ss.histogram[i].count != sp.histogram[i].count;

    std::istringstream text(quick ? "replicates = 2\nhorizon_s = 5\n" : "replicates = 8\nhorizon_s = 300\n");
    const auto scenario = parse_scenario(text, "bench");
    std::vector<EsmRunResult> rs, rp;
    row("ESM replicates", best_of(1, [&] { rs = run_replicates(scenario, 1, Exec::Serial); }),
        best_of(1, [&] { rp = run_replicates(scenario, 1, Exec::Parallel); }));
    for (std::size_t k = 0; k < rs.size(); ++k) bad += rs[k].delivery_digest != rp[k].delivery_digest;

    if (bad) std::printf("serial and parallel results differ (%d mismatches)\n", bad);
    return bad ? 1 : 0;
}
