#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace rabiwall {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParamsOutOfRange : Error { using Error::Error; };
struct GridMismatch : Error { using Error::Error; };
struct WindowOutOfDomain : Error { using Error::Error; };
struct SupportTouchesBoundary : Error { using Error::Error; };
struct MonotonicityLost : Error { using Error::Error; };
struct IterationStall : Error { using Error::Error; };
struct ZeroCenterGap : Error { using Error::Error; };
struct ReferenceNotSigned : Error { using Error::Error; };
struct LevelSetMissing : Error { using Error::Error; };
struct StabilityViolation : Error { using Error::Error; };
struct NonFiniteError : Error { using Error::Error; };
struct WrongAlpha : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

struct NoConvergence : Error {
    NoConvergence(const std::string& msg, double residual)
        : Error(msg), last_residual(residual) {}
    double last_residual;
};

using Rng = std::mt19937_64;

inline double sq(double x) { return x * x; }

inline bool finite(double x) { return std::isfinite(x); }

// Opt-in worker count for grid sweeps (the CLI --threads flag lands here).
inline std::atomic<int>& worker_threads() {
    static std::atomic<int> n{1};
    return n;
}

// Static row partition; the caller must make per-row work independent.
// Results stay bit-identical across thread counts as long as per-row outputs
// are combined in row order.
template <typename Fn>
void parallel_rows(int rows, Fn&& fn) {
    const int nt = std::min(std::max(worker_threads().load(), 1), rows);
    if (nt <= 1) {
        for (int r = 0; r < rows; ++r) fn(r);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (int t = 0; t < nt; ++t) {
        const int lo = static_cast<int>(static_cast<long>(rows) * t / nt);
        const int hi = static_cast<int>(static_cast<long>(rows) * (t + 1) / nt);
        pool.emplace_back([lo, hi, &fn] {
            for (int r = lo; r < hi; ++r) fn(r);
        });
    }
    for (auto& th : pool) th.join();
}

} // namespace rabiwall
