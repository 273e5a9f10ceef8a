#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ccsim/rng.hpp"
#include "ccsim/strategies.hpp"

using namespace ccsim;

namespace {

AuctionTerms terms_basic(Fraction t_m = Fraction(1, 2)) {
    return AuctionTerms{Money::from_fiat(10), 1000, t_m, Fraction(0, 1), Fraction(1, 100)};
}

}  // namespace

TEST_CASE("best plan: finite menu") {
    FinitePlans menu{{
        {Money::from_fiat(15), Money::from_fiat(2000)},
        {Money::from_fiat(14), Money::from_fiat(500)},
        {Money::from_fiat(12), Money::from_fiat(100)},
    }};
    auto chosen = best_plan(menu, Money::from_fiat(10), 1000, Fraction(1, 2));
    REQUIRE(chosen);
    CHECK(chosen->plan.value_outcome == Money::from_fiat(14));
    CHECK(chosen->plan.cost == Money::from_fiat(500));
    CHECK(chosen->social_surplus == Money::from_fiat(3500));
}

TEST_CASE("best plan: no bid when nothing clears the price") {
    FinitePlans menu{{
        {Money::from_fiat(9), Money::from_fiat(100)},
        {Money::from_fiat(10), Money::from_fiat(0)},
    }};
    CHECK_FALSE(best_plan(menu, Money::from_fiat(10), 1000, Fraction(1, 2)));
}

TEST_CASE("liquidity cap forces a lower-surplus plan on a concave curve") {
    ConcaveCurve curve;
    curve.shape = ConcaveCurve::Shape::Quadratic;
    curve.base_value = Money::from_fiat(10);
    curve.slope = Fraction(1, 100);
    curve.cost_cap = Money::from_fiat(2000);
    curve.grid_points = 10'000;
    REQUIRE(curve.concave_on_grid());

    auto unconstrained = best_plan_unconstrained(curve, Money::from_fiat(10), 1000);
    REQUIRE(unconstrained);
    CHECK(unconstrained->plan.cost == Money::from_fiat(1800));
    CHECK(unconstrained->social_surplus == Money::from_fiat(8100));

    auto constrained = best_plan(curve, Money::from_fiat(10), 1000, Fraction(1, 8));
    REQUIRE(constrained);
    CHECK(constrained->social_surplus == Money::from_fiat(5600));
    CHECK(constrained->plan.cost == Money::from_fiat(800));
    CHECK(constrained->social_surplus < unconstrained->social_surplus);
}

TEST_CASE("saturating curve is concave, degenerate grids are not") {
    ConcaveCurve curve;
    curve.base_value = Money::from_fiat(10);
    curve.gain = Money::from_fiat(8);
    curve.scale = Money::from_fiat(500);
    curve.cost_cap = Money::from_fiat(3000);
    curve.grid_points = 1000;
    CHECK(curve.concave_on_grid());

    ConcaveCurve flat = curve;
    flat.gain = Money{};  // V'(0) = 0
    CHECK_FALSE(flat.concave_on_grid());
}

TEST_CASE("optimal bid per the truthful strategy") {
    ChosenPlan chosen{{Money::from_fiat(14), Money::from_fiat(500)}, Money::from_fiat(3500)};
    AuctionTerms t = terms_basic();

    auto bid = optimal_bid(chosen, 50, t);
    REQUIRE(bid);
    CHECK(bid->value_claim == Money::from_fiat(14));
    CHECK(bid->surplus_claim == Money::from_fiat(300));  // 500 - 4·50
    CHECK(auction_parameter(*bid, t.reserve_price, t.q) == Money::from_fiat(3500));

    auto no_toehold = optimal_bid(chosen, 0, t);
    REQUIRE(no_toehold);
    CHECK(no_toehold->surplus_claim == chosen.plan.cost);

    auto with_profit = optimal_bid(chosen, 50, t, Money::from_fiat(1000));
    REQUIRE(with_profit);
    CHECK(with_profit->surplus_claim == Money::from_fiat(1300));
    CHECK(auction_parameter(*with_profit, t.reserve_price, t.q) == Money::from_fiat(2500));
}

TEST_CASE("optimal bid fails cleanly past the surplus-claim cap") {
    ChosenPlan chosen{{Money::from_fiat(14), Money::from_fiat(500)}, Money::from_fiat(3500)};
    AuctionTerms t = terms_basic();
    // profit target beyond t_m·N - C = 1500
    CHECK_FALSE(optimal_bid(chosen, 0, t, Money::from_fiat(1501)));
    CHECK(optimal_bid(chosen, 0, t, Money::from_fiat(1500)));
}

TEST_CASE("oracle certifies the truthful bid with the standard profile") {
    AgentProfile p;
    p.id = "x";
    p.toehold_tokens = 50;
    p.plans = FinitePlans{{
        {Money::from_fiat(15), Money::from_fiat(2000)},
        {Money::from_fiat(14), Money::from_fiat(500)},
    }};
    AuctionTerms t = terms_basic();
    auto report =
        brute_force_best_response(p, t, constant_delta_profile(Money::from_minor(1)), 160);
    CHECK(report.optimal_bid_a == Money::from_fiat(3500));
    CHECK(report.frontier_identity_holds);
    CHECK_FALSE(report.found_overclaim_tie);
    CHECK(report.best_a_nonneg_payoff <= report.optimal_bid_a);
    CHECK(report.best_point.value_claim == Money::from_fiat(14));  // S = V*
}

TEST_CASE("single plan, claim forced to V: oracle lands exactly on optimal_bid") {
    AgentProfile p;
    p.id = "x";
    p.toehold_tokens = 0;
    p.plans = FinitePlans{{{Money::from_fiat(14), Money::from_fiat(500)}}};
    AuctionTerms t = terms_basic();
    auto report = brute_force_best_response(p, t, constant_delta_profile(Money::from_minor(1)), 4);
    CHECK(report.best_a_nonneg_payoff == report.optimal_bid_a);
    CHECK(report.best_point.value_claim == Money::from_fiat(14));
    CHECK(report.best_point.payoff_if_win == Money{});
}

TEST_CASE("every overclaim lattice point is exactly delta weaker") {
    // A + payoff == psi - delta(S,V) on the whole S > V lattice, checked
    // directly against the engine evaluators
    AuctionTerms t = terms_basic();
    Money v = Money::from_fiat(14);
    Money c = Money::from_fiat(500);
    Money psi = (v - t.reserve_price) * t.q - c;
    auto delta = constant_delta_profile(Money::from_minor(1));
    for (Money s : {Money::from_fiat(15), Money::parse("14.000001"), Money::from_fiat(20)}) {
        for (Tokens n_f : {0, 100, 307, 499}) {
            Money r = (s - t.reserve_price) * n_f;
            Bid bid{s, r, 0, "x"};
            if (validate_bid(bid, t) != BidError::None) continue;
            Money a = auction_parameter(bid, t.reserve_price, t.q);
            DepositSet d = required_deposits(bid, t);
            ForfeitParams fp{d.value_deposit, t.reserve_price, s, t.q - n_f, t.q, delta};
            Money payoff = (v - t.reserve_price) * n_f - c - value_forfeit(fp, v).forfeit_to_holders;
            CHECK(a + payoff == psi - Money::from_minor(1));
        }
    }
}

TEST_CASE("zero delta admits an exact overclaim tie") {
    AuctionTerms t = terms_basic(Fraction(3, 4));
    AgentProfile p;
    p.id = "x";
    p.toehold_tokens = 0;
    p.plans = FinitePlans{{{Money::from_fiat(15), Money::from_fiat(50)}}};
    auto report = brute_force_best_response(p, t, zero_delta_profile(), 64);
    CHECK(report.found_overclaim_tie);
    REQUIRE(report.tie_witness);
    CHECK(report.tie_witness->auction_parameter >= report.optimal_bid_a);
    CHECK(report.tie_witness->payoff_if_win >= Money{});
    CHECK(report.tie_witness->value_claim > Money::from_fiat(15));
}

TEST_CASE("collusion schedule suppresses all but the strongest member") {
    std::vector<std::pair<std::string, Money>> group{
        {"a", Money::from_fiat(1000)},
        {"b", Money::from_fiat(3000)},
        {"c", Money::from_fiat(2000)},
    };
    auto abstain = collusive_abstentions(group);
    CHECK(abstain == std::vector<std::string>{"a", "c"});
    CHECK(collusive_abstentions({{"solo", Money::from_fiat(5)}}).empty());
}

TEST_CASE("behavior margins shape claims and exits") {
    ChosenPlan chosen{{Money::from_fiat(14), Money::from_fiat(500)}, Money::from_fiat(3500)};
    AuctionTerms t = terms_basic();

    AgentProfile over;
    over.behavior = Behavior::Overbidder;
    over.overbid_claim_margin = Money::from_fiat(2);
    over.overbid_exit_margin = Money::from_fiat(100);
    CHECK(strategy_value_claim(over, chosen) == Money::from_fiat(16));
    CHECK(strategy_exit_level(over, chosen, t) == Money::from_fiat(3600));

    AgentProfile under;
    under.behavior = Behavior::SurplusUnderbidder;
    under.overbid_exit_margin = Money::from_fiat(250);
    CHECK(strategy_value_claim(under, chosen) == Money::from_fiat(14));
    CHECK(strategy_exit_level(under, chosen, t) == Money::from_fiat(3750));

    AgentProfile truthful;
    CHECK(strategy_exit_level(truthful, chosen, t) == chosen.social_surplus);
    CHECK_THROWS_AS(behavior_from_name("mystery"), std::runtime_error);
}

TEST_CASE("dominant strategy certificate over randomized menus") {
    Rng rng(99);
    for (int i = 0; i < 15; ++i) {
        AuctionTerms t = terms_basic(Fraction(rng.range(1, 3), 4));
        t.q = rng.range(300, 1500);
        AgentProfile p;
        p.id = "r";
        p.toehold_tokens = rng.range(0, t.t_m.times_floor(t.q) / 3);
        FinitePlans menu;
        int n_plans = 1 + static_cast<int>(rng.below(3));
        for (int k = 0; k < n_plans; ++k) {
            Money v = t.reserve_price + Money::from_fiat(rng.range(1, 12));
            Money cap = Money::mul_div_floor((v - t.reserve_price) * t.q, t.t_m.num(), t.t_m.den());
            menu.plans.push_back(BusinessPlan{v, Money::mul_div_floor(cap, rng.range(0, 90), 100)});
        }
        p.plans = menu;
        auto report =
            brute_force_best_response(p, t, constant_delta_profile(Money::from_minor(1)), 80);
        CHECK(report.frontier_identity_holds);
        CHECK(report.best_a_nonneg_payoff <= report.optimal_bid_a);
        CHECK_FALSE(report.found_overclaim_tie);
    }
}
