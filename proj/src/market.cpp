#include "ccsim/market.hpp"

#include <cmath>

#include "ccsim/rng.hpp"

namespace ccsim {

PricePath deterministic_path(Money start_price, const ExecutionModel& exec, Tick horizon) {
    Fraction completion = exec.completion;
    if (completion < Fraction::zero()) completion = Fraction::zero();
    if (completion > Fraction::one()) completion = Fraction::one();

    Money terminal = start_price + completion.times_floor(exec.value_outcome - start_price);
    Tick duration = exec.duration < 1 ? 1 : exec.duration;

    PricePath path;
    path.prices.reserve(static_cast<std::size_t>(horizon) + 1);
    for (Tick t = 0; t <= horizon; ++t) {
        Money p;
        if (t >= duration) {
            p = terminal;
        } else {
            p = start_price + Money::mul_div_floor(terminal - start_price, t, duration);
        }
        if (p < Money{}) p = Money{};
        path.prices.push_back(p);
    }
    return path;
}

PricePath stochastic_path(Money start_price, const ExecutionModel& exec, Tick horizon,
                          double sigma, std::uint64_t seed) {
    PricePath ramp = deterministic_path(start_price, exec, horizon);
    if (sigma == 0.0) return ramp;

    Rng rng(seed);
    PricePath out;
    out.prices.reserve(ramp.prices.size());
    double log_multiplier = 0.0;
    const double drift = -0.5 * sigma * sigma;
    for (std::size_t t = 0; t < ramp.prices.size(); ++t) {
        if (t > 0) log_multiplier += drift + sigma * rng.normal();
        double scaled = static_cast<double>(ramp.prices[t].minor()) * std::exp(log_multiplier);
        if (scaled < 0.0) scaled = 0.0;
        double capped = std::nextafter(static_cast<double>(std::numeric_limits<std::int64_t>::max()), 0.0);
        if (scaled > capped) scaled = capped;
        out.prices.push_back(Money::from_minor(static_cast<std::int64_t>(std::llround(scaled))));
    }
    return out;
}

namespace {

ForfeitEstimate accumulate(const ForfeitParams& fp, Money surety_deposit,
                           const std::vector<Money>& terminals) {
    double v_sum = 0.0, v_sq = 0.0, s_sum = 0.0, s_sq = 0.0;
    for (Money x : terminals) {
        // reaching the claim is a success termination: nothing forfeits
        double v = x >= fp.value_claim
                       ? 0.0
                       : static_cast<double>(value_forfeit(fp, x).forfeit_to_holders.minor());
        double s = static_cast<double>(
            surety_settlement(surety_deposit, fp.value_deposit, fp.reserve_price, x, x, fp.q)
                .forfeited.minor());
        v_sum += v;
        v_sq += v * v;
        s_sum += s;
        s_sq += s * s;
    }
    auto n = static_cast<double>(terminals.size());
    ForfeitEstimate est;
    est.samples = static_cast<std::int64_t>(terminals.size());
    est.expected_value_forfeit = v_sum / n;
    est.expected_surety_forfeit = s_sum / n;
    if (terminals.size() > 1) {
        est.value_std_error = std::sqrt(std::max(0.0, (v_sq / n - est.expected_value_forfeit *
                                                                      est.expected_value_forfeit) /
                                                          (n - 1)));
        est.surety_std_error = std::sqrt(std::max(0.0, (s_sq / n - est.expected_surety_forfeit *
                                                                       est.expected_surety_forfeit) /
                                                           (n - 1)));
    }
    return est;
}

}  // namespace

ForfeitEstimate estimate_expected_forfeit(const ForfeitParams& fp, Money surety_deposit,
                                          Money start_price, const ExecutionModel& exec,
                                          double sigma, Tick horizon, std::int64_t n_samples,
                                          std::uint64_t seed) {
    std::vector<Money> terminals;
    terminals.reserve(static_cast<std::size_t>(n_samples));
    if (sigma == 0.0) {
        Money terminal = deterministic_path(start_price, exec, horizon).at(horizon);
        terminals.assign(static_cast<std::size_t>(n_samples), terminal);
    } else {
        for (std::int64_t i = 0; i < n_samples; ++i) {
            terminals.push_back(
                stochastic_path(start_price, exec, horizon, sigma, Rng::derive(seed, static_cast<std::uint64_t>(i)))
                    .at(horizon));
        }
    }
    return accumulate(fp, surety_deposit, terminals);
}

ForfeitEstimate estimate_expected_forfeit_two_point(const ForfeitParams& fp,
                                                    Money surety_deposit,
                                                    const TwoPointDistribution& dist,
                                                    std::int64_t n_samples, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Money> terminals;
    terminals.reserve(static_cast<std::size_t>(n_samples));
    auto p_num = static_cast<std::uint64_t>(dist.low_probability.num());
    auto p_den = static_cast<std::uint64_t>(dist.low_probability.den());
    for (std::int64_t i = 0; i < n_samples; ++i) {
        terminals.push_back(rng.below(p_den) < p_num ? dist.low : dist.high);
    }
    return accumulate(fp, surety_deposit, terminals);
}

double exact_expected_value_forfeit_two_point(const ForfeitParams& fp,
                                              const TwoPointDistribution& dist) {
    double lo = static_cast<double>(value_forfeit(fp, dist.low).forfeit_to_holders.minor());
    double hi = static_cast<double>(value_forfeit(fp, dist.high).forfeit_to_holders.minor());
    double p = static_cast<double>(dist.low_probability.num()) /
               static_cast<double>(dist.low_probability.den());
    return lo * p + hi * (1.0 - p);
}

AdjustedDeposits adjust_deposits_stochastic(const DepositSet& deposits, const ForfeitParams& fp,
                                            const ForfeitEstimate& estimate) {
    AdjustedDeposits out;
    out.deposits = deposits;

    Money bound = (fp.value_claim - fp.reserve_price) * fp.other_holder_tokens;
    Money value_floor = bound + Money::from_minor(1);
    Money v_cut = Money::from_minor(static_cast<std::int64_t>(estimate.expected_value_forfeit));
    Money adjusted_v = deposits.value_deposit - v_cut;
    if (adjusted_v < value_floor) {
        adjusted_v = value_floor;
        out.value_clamped = true;
    }
    out.deposits.value_deposit = adjusted_v;

    Money s_cut = Money::from_minor(static_cast<std::int64_t>(estimate.expected_surety_forfeit));
    Money adjusted_s = deposits.surety_deposit - s_cut;
    if (adjusted_s < Money{}) {
        adjusted_s = Money{};
        out.surety_clamped = true;
    }
    out.deposits.surety_deposit = adjusted_s;
    return out;
}

}  // namespace ccsim
