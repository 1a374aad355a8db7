/*
 * Copyright (C) 2026 The rewire authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef REWIRE_REPLICATES_HPP
#define REWIRE_REPLICATES_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <ostream>
#include <span>
#include <thread>
#include <type_traits>
#include <vector>

#include "ctmc.hpp"
#include "random.hpp"
#include "trajectory.hpp"

namespace rewire
{

/**
 * Evaluates fn(k) for k in [0, count) on up to `threads` workers and returns
 * the results in index order. Output does not depend on the thread count as
 * long as fn(k) depends only on k. The first exception thrown is rethrown.
 */
template <typename Fn>
auto parallel_map(std::size_t count, unsigned threads, Fn&& fn) -> std::vector<std::invoke_result_t<Fn&, std::size_t>>
{
    using T = std::invoke_result_t<Fn&, std::size_t>;
    std::vector<T> out(count);
    if (threads <= 1 || count <= 1) {
        for (std::size_t k = 0; k < count; ++k) {
            out[k] = fn(k);
        }
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t k = next.fetch_add(1);
            if (k >= count) {
                return;
            }
            try {
                out[k] = fn(k);
            }
            catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) {
                    error = std::current_exception();
                }
                next.store(count);
            }
        }
    };
    std::vector<std::thread> pool;
    const auto n_workers = static_cast<std::size_t>(std::min<std::size_t>(threads, count));
    pool.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) {
        pool.emplace_back(worker);
    }
    for (auto& th : pool) {
        th.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
    return out;
}

/// Summary of a set of final-size reports.
struct ReplicateSummary {
    std::size_t reps           = 0;
    std::size_t majors         = 0;
    std::size_t truncated      = 0;
    double major_probability   = 0.0;
    double mean_fraction       = 0.0; ///< over all replicates
    double mean_major_fraction = std::nan(""); ///< conditional on a major outbreak
    double var_major_fraction  = std::nan(""); ///< unbiased sample variance, NaN below 2 majors
    double se_major_fraction   = std::nan("");
};

inline ReplicateSummary summarize(std::span<const FinalSizeReport> reports)
{
    ReplicateSummary sm;
    sm.reps = reports.size();
    if (reports.empty()) {
        return sm;
    }
    double sum_all = 0.0;
    double sum     = 0.0;
    for (const auto& r : reports) {
        sum_all += r.final_fraction;
        if (r.major) {
            ++sm.majors;
            sum += r.final_fraction;
        }
        if (r.truncated) {
            ++sm.truncated;
        }
    }
    sm.mean_fraction     = sum_all / static_cast<double>(sm.reps);
    sm.major_probability = static_cast<double>(sm.majors) / static_cast<double>(sm.reps);
    if (sm.majors == 0) {
        return sm;
    }
    sm.mean_major_fraction = sum / static_cast<double>(sm.majors);
    if (sm.majors >= 2) {
        double ss = 0.0;
        for (const auto& r : reports) {
            if (r.major) {
                const double d = r.final_fraction - sm.mean_major_fraction;
                ss += d * d;
            }
        }
        sm.var_major_fraction = ss / static_cast<double>(sm.majors - 1);
        sm.se_major_fraction  = std::sqrt(sm.var_major_fraction / static_cast<double>(sm.majors));
    }
    else {
        sm.var_major_fraction = 0.0;
        sm.se_major_fraction  = 0.0;
    }
    return sm;
}

struct ReplicateSet {
    std::vector<FinalSizeReport> reports;
    ReplicateSummary summary;
};

/// Configuration of replicate `rep`: same model, seed derived from the base seed.
inline SimConfig replicate_config(const SimConfig& base, std::size_t rep)
{
    SimConfig c = base;
    c.seed      = derive_seed(base.seed, rep);
    return c;
}

inline ReplicateSet run_replicates(const SimConfig& cfg, std::size_t reps, unsigned threads = 1)
{
    validate(cfg);
    ReplicateSet set;
    set.reports = parallel_map(reps, threads, [&](std::size_t k) {
        SimConfig c         = replicate_config(cfg, k);
        c.record_trajectory = false;
        return run(c).report;
    });
    set.summary = summarize(set.reports);
    return set;
}

/**
 * Runs replicates in fixed-size batches until at least `target_majors` major
 * outbreaks have been seen or `max_reps` replicates have run. Batches keep the
 * replicate index sequence identical for every thread count.
 */
inline ReplicateSet run_until_majors(const SimConfig& cfg, std::size_t target_majors, std::size_t max_reps,
                                     unsigned threads = 1, std::size_t batch = 64)
{
    validate(cfg);
    ReplicateSet set;
    std::size_t majors = 0;
    while (majors < target_majors && set.reports.size() < max_reps) {
        const std::size_t start = set.reports.size();
        const std::size_t count = std::min(batch, max_reps - start);
        auto chunk = parallel_map(count, threads, [&](std::size_t k) {
            return run(replicate_config(cfg, start + k)).report;
        });
        for (const auto& r : chunk) {
            majors += r.major ? 1 : 0;
        }
        set.reports.insert(set.reports.end(), chunk.begin(), chunk.end());
    }
    set.summary = summarize(set.reports);
    return set;
}

inline void write_replicates_csv(std::ostream& os, std::span<const FinalSizeReport> reports)
{
    os << "rep,seed,final_size,final_fraction,major,truncated\n";
    for (std::size_t k = 0; k < reports.size(); ++k) {
        const auto& r = reports[k];
        os << k << ',' << r.seed << ',' << r.final_size << ',' << fmt9(r.final_fraction) << ','
           << (r.major ? 1 : 0) << ',' << (r.truncated ? 1 : 0) << '\n';
    }
}

} // namespace rewire

#endif // REWIRE_REPLICATES_HPP
