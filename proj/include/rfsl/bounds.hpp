#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "rfsl/error.hpp"
#include "rfsl/network.hpp"
#include "rfsl/parallel.hpp"
#include "rfsl/rng.hpp"
#include "rfsl/scene.hpp"

namespace rfsl {

// Q_n per target: sorted, duplicate-free link indices whose Fresnel region
// covers the target.
struct LinkSetFamily {
    std::vector<std::vector<int>> sets;

    int n_targets() const { return static_cast<int>(sets.size()); }
};

enum class BoundVariant { literal_guarded, cluster_consistent };

inline const char* to_string(BoundVariant v) {
    return v == BoundVariant::literal_guarded ? "literal-guarded" : "cluster-consistent";
}

struct BoundConfig {
    double tau = 0.2;
    BoundVariant variant = BoundVariant::cluster_consistent;
};

inline void validate(const BoundConfig& cfg) {
    if (!(cfg.tau >= 0.0 && cfg.tau < 1.0)) fail("invalid-config", "tau must lie in [0, 1)");
}

struct BoundResult {
    double n_hat = 0.0;
    std::vector<int> theta1; // per-target C1 bit
    std::vector<int> theta2; // per-target C2 bit
    std::vector<int> psi;    // per-target count of m != n with delta <= tau
};

inline LinkSetFamily link_sets(const NetworkGraph& graph, const std::vector<TargetParams>& targets,
                               double wavelength, const MembershipConfig& cfg) {
    const FresnelRegionIndex index(graph, wavelength);
    LinkSetFamily family;
    family.sets.reserve(targets.size());
    for (const auto& t : targets) family.sets.push_back(index.link_set(t, cfg));
    return family;
}

namespace detail {

inline void intersection_union(const std::vector<int>& a, const std::vector<int>& b, int& inter,
                               int& uni) {
    inter = 0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] == b[j]) {
            ++inter;
            ++i;
            ++j;
        } else if (a[i] < b[j]) {
            ++i;
        } else {
            ++j;
        }
    }
    uni = static_cast<int>(a.size() + b.size()) - inter;
}

// Exact predicate (uni - inter) / uni > tau on the true rational value.
// tau is decomposed into mantissa * 2^exponent so the comparison happens in
// integer arithmetic; ties at achievable Jaccard values stay exact.
inline bool jaccard_exceeds(int inter, int uni, double tau) {
    const int diff = uni - inter;
    if (uni == 0 || diff == 0) return 0.0 > tau; // empty sets or identical sets: delta = 0
    if (tau <= 0.0) return true;                 // diff >= 1 > 0 >= tau
    if (tau >= 1.0) return false;                // delta <= 1 always
    int exp2 = 0;
    const double frac = std::frexp(tau, &exp2); // tau = frac * 2^exp2, frac in [0.5, 1)
    const std::int64_t mant = static_cast<std::int64_t>(std::ldexp(frac, 53));
    const int shift = 53 - exp2; // diff > uni * mant * 2^(exp2 - 53)
    if (shift >= 100) return true; // tau below any representable positive delta here
    return (static_cast<__int128>(diff) << shift) > static_cast<__int128>(uni) * mant;
}

} // namespace detail

// Jaccard distance of two sorted link sets; two empty sets count as
// identical (distance 0) by convention.
inline double jaccard_distance(const std::vector<int>& q_n, const std::vector<int>& q_m) {
    int inter = 0, uni = 0;
    detail::intersection_union(q_n, q_m, inter, uni);
    if (uni == 0) return 0.0;
    return static_cast<double>(uni - inter) / static_cast<double>(uni);
}

inline int theta2(const std::vector<int>& q_n) { return q_n.empty() ? 0 : 1; }

inline int theta1(int n, const LinkSetFamily& family, double tau) {
    for (int m = 0; m < family.n_targets(); ++m) {
        if (m == n) continue;
        int inter = 0, uni = 0;
        detail::intersection_union(family.sets[n], family.sets[m], inter, uni);
        if (!detail::jaccard_exceeds(inter, uni, tau)) return 0;
    }
    return 1;
}

// Resolvable-target count. Both variants share the distinguishable term
// sum_n Theta1 Theta2; they differ in how a covered-but-indistinguishable
// target is amortized over its cluster:
//   literal-guarded:    Theta2 / psi(n), skipped when psi(n) = 0
//   cluster-consistent: Theta2 / (1 + psi(n)), so k mutually close covered
//                       targets contribute exactly 1
// with psi(n) = #{m != n : delta(n,m) <= tau}. The fractional terms are
// accumulated exactly over a common denominator when n <= 20 targets.
inline BoundResult resolvable_count(const LinkSetFamily& family, const BoundConfig& cfg) {
    validate(cfg);
    const int n = family.n_targets();
    BoundResult res;
    res.theta1.assign(n, 1);
    res.theta2.assign(n, 0);
    res.psi.assign(n, 0);

    for (int i = 0; i < n; ++i) res.theta2[i] = theta2(family.sets[i]);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            int inter = 0, uni = 0;
            detail::intersection_union(family.sets[i], family.sets[j], inter, uni);
            if (!detail::jaccard_exceeds(inter, uni, cfg.tau)) {
                res.theta1[i] = res.theta1[j] = 0;
                ++res.psi[i];
                ++res.psi[j];
            }
        }
    }

    std::int64_t whole = 0;
    std::vector<int> divisors;
    for (int i = 0; i < n; ++i) {
        if (res.theta1[i] && res.theta2[i]) {
            ++whole;
        } else if (!res.theta1[i] && res.theta2[i]) {
            const int div = cfg.variant == BoundVariant::literal_guarded ? res.psi[i] : 1 + res.psi[i];
            if (div > 0) divisors.push_back(div);
        }
    }

    if (n <= 20) {
        std::int64_t lcm = 1;
        for (int d : divisors) lcm = std::lcm(lcm, static_cast<std::int64_t>(d));
        std::int64_t num = whole * lcm;
        for (int d : divisors) num += lcm / d;
        res.n_hat = static_cast<double>(num) / static_cast<double>(lcm);
    } else {
        double acc = static_cast<double>(whole);
        for (int d : divisors) acc += 1.0 / d;
        res.n_hat = acc;
    }
    return res;
}

inline int round_half_up(double x) { return static_cast<int>(std::floor(x + 0.5)); }

struct BoundTrialStats {
    double accuracy = 0.0;
    double n_hat_mean = 0.0;
};

// Monte Carlo estimate of the counting accuracy P(round(n_hat) == N) over
// uniformly placed targets. Trials derive independent seeds from rng_seed,
// so parallel execution reproduces the sequential result exactly.
inline BoundTrialStats bound_trials(const NetworkGraph& graph, int n_targets,
                                    const SubjectProfile& profile, const BoundConfig& cfg,
                                    double wavelength, int n_trials, std::uint64_t rng_seed,
                                    const MembershipConfig& membership, int jobs = 0) {
    if (n_trials < 1) fail("invalid-config", "n_trials must be >= 1");
    validate(cfg);
    validate(membership);
    const FresnelRegionIndex index(graph, wavelength);

    std::vector<double> n_hats(n_trials);
    std::vector<std::uint8_t> hits(n_trials);
    parallel_for(n_trials, jobs, [&](int trial) {
        const auto targets =
            sample_targets(n_targets, graph.area, profile, derive_seed(rng_seed, trial));
        LinkSetFamily family;
        family.sets.reserve(targets.size());
        for (const auto& t : targets) family.sets.push_back(index.link_set(t, membership));
        const BoundResult r = resolvable_count(family, cfg);
        n_hats[trial] = r.n_hat;
        hits[trial] = round_half_up(r.n_hat) == n_targets ? 1 : 0;
    });

    BoundTrialStats stats;
    for (int i = 0; i < n_trials; ++i) {
        stats.accuracy += hits[i];
        stats.n_hat_mean += n_hats[i];
    }
    stats.accuracy /= n_trials;
    stats.n_hat_mean /= n_trials;
    return stats;
}

inline double accuracy_bound(const NetworkGraph& graph, int n_targets,
                             const SubjectProfile& profile, const BoundConfig& cfg,
                             double wavelength, int n_trials, std::uint64_t rng_seed,
                             const MembershipConfig& membership = {}, int jobs = 0) {
    return bound_trials(graph, n_targets, profile, cfg, wavelength, n_trials, rng_seed, membership,
                        jobs)
        .accuracy;
}

} // namespace rfsl
