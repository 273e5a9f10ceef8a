#include "ccsim/strategies.hpp"

#include <algorithm>

namespace ccsim {

namespace {
using i128 = __int128;
}

Money ConcaveCurve::value_at(Money cost) const {
    if (cost < Money{}) cost = Money{};
    switch (shape) {
        case Shape::Saturating: {
            // base + gain·C / (C + scale)
            i128 denom = i128(cost.minor()) + i128(scale.minor());
            if (denom <= 0) return base_value;
            i128 lift = i128(gain.minor()) * i128(cost.minor()) / denom;
            return base_value + Money::from_minor(static_cast<std::int64_t>(lift));
        }
        case Shape::Quadratic: {
            if (cost > cost_cap) cost = cost_cap;
            i128 c = cost.minor();
            i128 cap2 = 2 * i128(cost_cap.minor());
            if (cap2 <= 0) return base_value;
            i128 eff = c - (c * c) / cap2;
            i128 lift = i128(slope.num()) * eff / slope.den();
            return base_value + Money::from_minor(static_cast<std::int64_t>(lift));
        }
    }
    return base_value;
}

bool ConcaveCurve::concave_on_grid() const {
    if (grid_points < 3 || cost_cap <= Money{}) return false;
    Money step = Money::mul_div_floor(cost_cap, 1, grid_points);
    if (step.is_zero()) return false;
    Money prev2 = value_at(Money{});
    Money prev1 = value_at(step);
    if (prev1 <= prev2) return false;  // V'(0) > 0
    for (int i = 2; i <= grid_points; ++i) {
        Money cur = value_at(step * i);
        // second difference non-positive; floor rounding of the grid values
        // can perturb it by at most one minor unit, anything above that is a
        // genuine convex bend
        if (cur - prev1 > prev1 - prev2 + Money::from_minor(1)) return false;
        prev2 = prev1;
        prev1 = cur;
    }
    return true;
}

Behavior behavior_from_name(const std::string& name) {
    if (name == "truthful") return Behavior::Truthful;
    if (name == "overbidder") return Behavior::Overbidder;
    if (name == "surplus_underbidder") return Behavior::SurplusUnderbidder;
    if (name == "colluder") return Behavior::Colluder;
    if (name == "value_destroyer") return Behavior::ValueDestroyer;
    if (name == "toehold_concealer") return Behavior::ToeholdConcealer;
    throw std::runtime_error("unknown behavior tag: " + name);
}

const char* behavior_name(Behavior b) {
    switch (b) {
        case Behavior::Truthful: return "truthful";
        case Behavior::Overbidder: return "overbidder";
        case Behavior::SurplusUnderbidder: return "surplus_underbidder";
        case Behavior::Colluder: return "colluder";
        case Behavior::ValueDestroyer: return "value_destroyer";
        case Behavior::ToeholdConcealer: return "toehold_concealer";
    }
    return "unknown";
}

namespace {

bool plan_feasible(const BusinessPlan& plan, Money reserve_price, Tokens q, const Fraction& t_m) {
    if (plan.value_outcome <= reserve_price) return plan.cost.is_zero();
    // C <= t_m·(V - P0)·q, exact
    return plan.cost * t_m.den() <= (plan.value_outcome - reserve_price) * q * t_m.num();
}

template <typename Feasible>
std::optional<ChosenPlan> scan_family(const PlanFamily& family, Money reserve_price, Tokens q,
                                      Feasible&& feasible) {
    std::optional<ChosenPlan> best;
    auto consider = [&](const BusinessPlan& plan) {
        if (!feasible(plan)) return;
        Money psi = plan.social_surplus(reserve_price, q);
        if (psi <= Money{}) return;
        if (!best || psi > best->social_surplus) best = ChosenPlan{plan, psi};
    };
    if (const auto* finite = std::get_if<FinitePlans>(&family)) {
        for (const auto& plan : finite->plans) consider(plan);
    } else {
        const auto& curve = std::get<ConcaveCurve>(family);
        if (!curve.concave_on_grid()) {
            throw std::runtime_error("plan curve is not concave with positive initial slope");
        }
        Money step = Money::mul_div_floor(curve.cost_cap, 1, curve.grid_points);
        for (int i = 0; i <= curve.grid_points; ++i) {
            Money cost = step * i;
            consider(BusinessPlan{curve.value_at(cost), cost});
        }
    }
    return best;
}

}  // namespace

std::optional<ChosenPlan> best_plan(const PlanFamily& family, Money reserve_price, Tokens q,
                                    const Fraction& t_m) {
    return scan_family(family, reserve_price, q,
                       [&](const BusinessPlan& p) { return plan_feasible(p, reserve_price, q, t_m); });
}

std::optional<ChosenPlan> best_plan_unconstrained(const PlanFamily& family, Money reserve_price,
                                                  Tokens q) {
    return scan_family(family, reserve_price, q, [](const BusinessPlan&) { return true; });
}

std::optional<Bid> optimal_bid(const ChosenPlan& chosen, Tokens toehold_tokens,
                               const AuctionTerms& terms, Money profit_target) {
    Money toehold_gain = (chosen.plan.value_outcome - terms.reserve_price) * toehold_tokens;
    Bid bid{chosen.plan.value_outcome, profit_target + chosen.plan.cost - toehold_gain,
            toehold_tokens, ""};
    BidError err = validate_bid(bid, terms);
    if (err != BidError::None) return std::nullopt;
    return bid;
}

OracleReport brute_force_best_response(const AgentProfile& profile, const AuctionTerms& terms,
                                       std::shared_ptr<const DeltaProfile> delta,
                                       int claim_grid_steps) {
    OracleReport report;

    std::vector<BusinessPlan> plans;
    if (const auto* finite = std::get_if<FinitePlans>(&profile.plans)) {
        plans = finite->plans;
    } else {
        const auto& curve = std::get<ConcaveCurve>(profile.plans);
        int samples = std::min(curve.grid_points, 128);
        Money step = Money::mul_div_floor(curve.cost_cap, 1, samples);
        for (int i = 0; i <= samples; ++i) {
            Money cost = step * i;
            plans.push_back(BusinessPlan{curve.value_at(cost), cost});
        }
    }

    auto chosen = best_plan(profile.plans, terms.reserve_price, terms.q, terms.t_m);
    if (chosen) {
        if (auto bid = optimal_bid(*chosen, profile.toehold_tokens, terms)) {
            report.optimal_bid_a = auction_parameter(*bid, terms.reserve_price, terms.q);
        }
    }

    Money v_max;
    for (const auto& plan : plans) v_max = max(v_max, plan.value_outcome);
    if (v_max <= terms.reserve_price) return report;

    const Tokens n_b = profile.toehold_tokens;
    const Tokens n_f_cap = terms.t_m.times_floor(terms.q) - n_b;
    Money grid_span = (v_max - terms.reserve_price) * 2;  // S in (P0, 2·Vmax]

    // payoff at (plan, S, n_f): gains on the deposited share, minus cost,
    // minus the forfeit expected from topping out at V under claim S
    auto payoff_at = [&](const BusinessPlan& plan, Money s, Tokens n_f, Money* a_out,
                         bool* clamped_out) -> Money {
        Money r = (s - terms.reserve_price) * n_f;
        Bid bid{s, r, n_b, profile.id};
        Money a = (s - terms.reserve_price) * (terms.q - n_b) - r;
        if (a_out) *a_out = a;
        if (clamped_out) *clamped_out = false;
        Money gains = (plan.value_outcome - terms.reserve_price) * (n_b + n_f);
        Money forfeit;
        if (s > plan.value_outcome) {
            DepositSet deps = required_deposits(bid, terms);
            ForfeitParams fp{deps.value_deposit, terms.reserve_price, s,
                             terms.q - n_b - n_f, terms.q, delta};
            forfeit = value_forfeit(fp, plan.value_outcome).forfeit_to_holders;
            Money raw = (s - plan.value_outcome) * (terms.q - n_b - n_f) +
                        delta->delta(s, plan.value_outcome);
            if (clamped_out) *clamped_out = raw != forfeit;
        }
        return gains - plan.cost - forfeit;
    };

    for (const auto& plan : plans) {
        if (plan.value_outcome <= terms.reserve_price) continue;
        Money psi = plan.social_surplus(terms.reserve_price, terms.q);

        std::vector<Money> claims;
        claims.reserve(static_cast<std::size_t>(claim_grid_steps) + 2);
        for (int i = 1; i <= claim_grid_steps; ++i) {
            claims.push_back(terms.reserve_price + Money::mul_div_floor(grid_span, i, claim_grid_steps));
        }
        claims.push_back(plan.value_outcome);  // the honest claim, exactly
        std::sort(claims.begin(), claims.end());
        claims.erase(std::unique(claims.begin(), claims.end()), claims.end());

        for (Money s : claims) {
            if (s <= terms.reserve_price) continue;
            Tokens lo = -n_b;
            Tokens hi = n_f_cap;
            if (hi < lo) continue;

            // payoff is non-decreasing in n_f: binary-search the lowest
            // token share with payoff >= 0, then take the strongest bid there
            if (payoff_at(plan, s, hi, nullptr, nullptr) < Money{}) continue;
            Tokens lo_search = lo, hi_search = hi;
            while (lo_search < hi_search) {
                Tokens mid = lo_search + (hi_search - lo_search) / 2;
                if (payoff_at(plan, s, mid, nullptr, nullptr) >= Money{}) {
                    hi_search = mid;
                } else {
                    lo_search = mid + 1;
                }
            }
            Tokens n_f_best = lo_search;

            // exact frontier identity across the lattice column:
            //   A + payoff = psi - (q - t_d q)(V - S)  for S < V
            //              = psi                        at S = V
            //              = psi - delta(S, V)          for S > V
            Tokens stride = std::max<Tokens>(1, (hi - lo) / 16);
            for (Tokens n_f = lo; n_f <= hi; n_f += stride) {
                Money a;
                bool clamped = false;
                Money p = payoff_at(plan, s, n_f, &a, &clamped);
                ++report.points_evaluated;
                if (clamped) continue;  // escrow cap engaged, different law
                Money expected = psi;
                if (s > plan.value_outcome) {
                    expected -= delta->delta(s, plan.value_outcome);
                } else if (s < plan.value_outcome) {
                    expected -= (plan.value_outcome - s) * (terms.q - n_b - n_f);
                }
                if (a + p != expected) report.frontier_identity_holds = false;
            }

            Money a;
            Money p = payoff_at(plan, s, n_f_best, &a, nullptr);
            ++report.points_evaluated;
            if (p < Money{}) continue;
            Money r = (s - terms.reserve_price) * n_f_best;
            Bid candidate{s, r, n_b, profile.id};
            if (validate_bid(candidate, terms) != BidError::None) continue;
            if (a > report.best_a_nonneg_payoff) {
                report.best_a_nonneg_payoff = a;
                report.best_point = OracleBidPoint{s, r, n_f_best, a, p};
            }
            if (s > plan.value_outcome && a >= report.optimal_bid_a && !report.found_overclaim_tie &&
                !report.optimal_bid_a.is_zero()) {
                report.found_overclaim_tie = true;
                report.tie_witness = OracleBidPoint{s, r, n_f_best, a, p};
            }
        }
    }
    return report;
}

std::vector<std::string> collusive_abstentions(
    const std::vector<std::pair<std::string, Money>>& group_exit_levels) {
    std::vector<std::string> out;
    if (group_exit_levels.size() < 2) return out;
    std::size_t best = 0;
    for (std::size_t i = 1; i < group_exit_levels.size(); ++i) {
        if (group_exit_levels[i].second > group_exit_levels[best].second) best = i;
    }
    for (std::size_t i = 0; i < group_exit_levels.size(); ++i) {
        if (i != best) out.push_back(group_exit_levels[i].first);
    }
    return out;
}

Money strategy_exit_level(const AgentProfile& profile, const ChosenPlan& chosen,
                          const AuctionTerms&) {
    switch (profile.behavior) {
        case Behavior::Overbidder:
        case Behavior::SurplusUnderbidder:
            return chosen.social_surplus + profile.overbid_exit_margin;
        default:
            return chosen.social_surplus;
    }
}

Money strategy_value_claim(const AgentProfile& profile, const ChosenPlan& chosen) {
    if (profile.behavior == Behavior::Overbidder) {
        return chosen.plan.value_outcome + profile.overbid_claim_margin;
    }
    return chosen.plan.value_outcome;
}

}  // namespace ccsim
