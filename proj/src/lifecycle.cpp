#include "ccsim/lifecycle.hpp"

namespace ccsim {

const char* status_name(Status s) {
    switch (s) {
        case Status::Open: return "open";
        case Status::AuctionInProgress: return "auction_in_progress";
        case Status::ControlPeriod: return "control_period";
    }
    return "unknown";
}

bool check_success_termination(std::span<const Money> prices, Money threshold,
                               const SuccessCriterion& criterion) {
    if (criterion.window <= 0 || criterion.consecutive <= 0 ||
        criterion.consecutive > criterion.window) {
        return false;
    }
    if (std::cmp_less(prices.size(), criterion.window)) return false;

    auto window = prices.subspan(prices.size() - static_cast<std::size_t>(criterion.window));

    __int128 sum = 0;
    for (Money p : window) sum += p.minor();
    if (sum < __int128(threshold.minor()) * criterion.window) return false;

    Tick best_run = 0, run = 0;
    for (Money p : window) {
        run = p >= threshold ? run + 1 : 0;
        if (run > best_run) best_run = run;
    }
    return best_run >= criterion.consecutive;
}

}  // namespace ccsim
