// Benchmark: OpenMP kernels against their serial reference paths.

#include <chrono>
#include <cstdio>
#include <random>

#include "dimest/boxdim.hpp"
#include "dimest/growth.hpp"
#include "dimest/linalg.hpp"

using namespace dimest;

namespace {

template <class Fn>
double time_ms(Fn&& fn) {
    auto t0 = std::chrono::steady_clock::now();
    fn();
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

void row(const char* name, double serial_ms, double parallel_ms) {
    std::printf("%-28s %10.1f ms %10.1f ms   x%.2f\n", name, serial_ms, parallel_ms,
                parallel_ms > 0.0 ? serial_ms / parallel_ms : 0.0);
}

} // namespace

int main() {
    std::printf("%-28s %13s %13s   %s\n", "kernel", "serial", "openmp", "speedup");
    std::printf("threads available: %d\n\n", par::max_threads());

    {
        double vs = 0.0, vp = 0.0;
        double ts = time_ms([&] { vs = max_sign_determinant(5, Exec::serial); });
        double tp = time_ms([&] { vp = max_sign_determinant(5, Exec::parallel); });
        row("sign-det enumeration n = 5", ts, tp);
        if (vs != vp) std::printf("  MISMATCH: %g vs %g\n", vs, vp);
    }

    {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> U(0.0, 1.0);
        std::vector<std::vector<double>> pts;
        pts.reserve(1000000);
        for (int i = 0; i < 1000000; ++i) pts.push_back({U(rng), U(rng), U(rng)});
        PointCloud cloud = PointCloud::from_points(std::move(pts));
        std::int64_t ks = 0, kp = 0;
        double ts = time_ms([&] { ks = covering_number(cloud, 1.0 / 64.0, 0.0, Exec::serial); });
        double tp = time_ms([&] { kp = covering_number(cloud, 1.0 / 64.0, 0.0, Exec::parallel); });
        row("covering_number (1e6 pts)", ts, tp);
        if (ks != kp) std::printf("  MISMATCH: %lld vs %lld\n", (long long)ks, (long long)kp);
    }

    {
        CompactnessLadder ladder = power_ladder(Valuation::real(), 1, 1.0, 0.5);
        SearchParams params;
        params.varpi = 0.9;
        params.p_max = 10;
        params.s_max = 24;
        for (int n = 1; n <= 5; ++n) g_oracle(1.0, n, Valuation::real());  // warm cache
        (void)search_mp(ladder, params, Exec::serial);  // warm rung extension
        double rs = 0.0, rp = 0.0;
        double ts = time_ms([&] { rs = search_mp(ladder, params, Exec::serial).best_ratio; });
        double tp = time_ms([&] { rp = search_mp(ladder, params, Exec::parallel).best_ratio; });
        row("search_mp 10x24 grid", ts, tp);
        if (rs != rp) std::printf("  MISMATCH: %g vs %g\n", rs, rp);
    }

    return 0;
}
