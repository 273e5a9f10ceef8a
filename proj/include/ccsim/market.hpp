#pragma once

/// Token price processes and the Monte-Carlo expected-forfeit estimate used
/// to adjust deposits. Prices are exact Money per tick; the stochastic
/// generator uses floats only to shape noise, then rounds to minor units.

#include <cstdint>
#include <optional>
#include <vector>

#include "ccsim/forfeit.hpp"
#include "ccsim/mechanism.hpp"

namespace ccsim {

struct PricePath {
    std::vector<Money> prices;  // tick-indexed

    Money at(Tick t) const {
        if (prices.empty()) return Money{};
        if (t < 0) t = 0;
        auto i = static_cast<std::size_t>(t);
        return i < prices.size() ? prices[i] : prices.back();
    }
    Tick length() const { return static_cast<Tick>(prices.size()); }
};

/// Plan execution as seen by the market: where the ramp ends and how long it
/// takes. completion is clamped to [0, 1].
struct ExecutionModel {
    Money value_outcome;          // V per token
    Tick duration = 1;
    Fraction completion = Fraction::one();
};

/// Linear ramp from P0 to P0 + completion·(V - P0) over the duration, flat
/// afterwards.
PricePath deterministic_path(Money start_price, const ExecutionModel& exec, Tick horizon);

/// Multiplicative log-normal noise around the deterministic ramp: the
/// multiplier follows exp(sigma·Z - sigma^2/2) per tick, cumulatively, so the
/// expected price stays on the ramp. sigma == 0 returns the deterministic
/// path unchanged, bit for bit.
PricePath stochastic_path(Money start_price, const ExecutionModel& exec, Tick horizon,
                          double sigma, std::uint64_t seed);

/// Two-point terminal distribution; the expected forfeit is computable by
/// hand, which makes it the estimator's consistency oracle.
struct TwoPointDistribution {
    Money low;
    Money high;
    Fraction low_probability;
};

struct ForfeitEstimate {
    double expected_value_forfeit = 0.0;
    double expected_surety_forfeit = 0.0;
    double value_std_error = 0.0;
    double surety_std_error = 0.0;
    std::int64_t samples = 0;
};

/// Samples terminal prices at the horizon and averages value_forfeit plus the
/// surety forfeit of a synthetic close at that price (Sw = P0w = X).
ForfeitEstimate estimate_expected_forfeit(const ForfeitParams& fp, Money surety_deposit,
                                          Money start_price, const ExecutionModel& exec,
                                          double sigma, Tick horizon, std::int64_t n_samples,
                                          std::uint64_t seed);

/// Same estimator over a two-point terminal distribution.
ForfeitEstimate estimate_expected_forfeit_two_point(const ForfeitParams& fp,
                                                    Money surety_deposit,
                                                    const TwoPointDistribution& dist,
                                                    std::int64_t n_samples, std::uint64_t seed);

/// Exact expectation for the two-point distribution, the hand oracle.
double exact_expected_value_forfeit_two_point(const ForfeitParams& fp,
                                              const TwoPointDistribution& dist);

struct AdjustedDeposits {
    DepositSet deposits;
    bool value_clamped = false;
    bool surety_clamped = false;
};

/// D_v' = D_v - E[phi] floored at the strict bound + 1 minor unit;
/// D_s' = D_s - E[surety forfeit] floored at zero. Estimates are rounded
/// down to minor units before subtracting.
AdjustedDeposits adjust_deposits_stochastic(const DepositSet& deposits, const ForfeitParams& fp,
                                            const ForfeitEstimate& estimate);

}  // namespace ccsim
