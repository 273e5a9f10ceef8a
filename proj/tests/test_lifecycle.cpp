#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ccsim/lifecycle.hpp"
#include "ccsim/sim.hpp"

using namespace ccsim;

namespace {

// the running setup: q=1000, P0=10, t_m=1/4, eps=1/100, gamma=0; a single
// truthful bidder with plan (15, 1000) clears at its validity floor 3750,
// which pins R=1000, t_f=1/5, t_d=1/4, D_v=3787.5, D_p=2000, D_s=6212.5
std::string running_scenario(const std::string& extra_agent_fields,
                             const std::string& price_process = "",
                             const std::string& dao_extra = "",
                             const std::string& variants = "") {
    std::string s = R"({
  "seed": 7,
  "dao": {
    "q": 1000, "initial_price": "10", "t_m": "1/4", "gamma": "0", "epsilon": "1/100",
    "success_window": 8, "success_run": 4, "control_period_limit": 30, "auction_duration": 3)" +
                    dao_extra + R"(
  },
  "holders": [
    {"id": "h1", "tokens": 200}, {"id": "h2", "tokens": 450}, {"id": "h3", "tokens": 300}
  ],
  "agents": [
    {"id": "alice", "cash": "60000", "tokens": 50, "plans": [["15", "1000"]],
     "initiate_auction_at": [1], "exec_duration": 5)" +
                    extra_agent_fields + R"(}
  ])";
    if (!price_process.empty()) s += ",\n  \"price_process\": " + price_process;
    if (!variants.empty()) s += ",\n  \"variants\": " + variants;
    s += ",\n  \"horizon\": 50\n}";
    return s;
}

Money event_money_attr(const Ledger& ledger, const std::string& kind, const std::string& attr) {
    for (const auto& ev : ledger.events()) {
        if (ev.kind != kind) continue;
        for (const auto& [k, v] : ev.attrs) {
            if (k == attr) return Money::parse(v);
        }
    }
    FAIL("no event ", kind, " with attr ", attr);
    return Money{};
}

}  // namespace

TEST_CASE("success criterion") {
    SuccessCriterion crit{8, 4};
    Money s = Money::from_fiat(15);

    std::vector<Money> at_s(8, s);
    CHECK(check_success_termination(at_s, s, crit));

    // mean clears the bar but the longest run stops one short
    std::vector<Money> choppy{s + Money::from_fiat(10), s, s, s - Money::from_fiat(1),
                              s, s, s, s - Money::from_fiat(1)};
    __int128 sum = 0;
    for (Money p : choppy) sum += p.minor();
    REQUIRE(sum >= __int128(s.minor()) * 8);
    CHECK_FALSE(check_success_termination(choppy, s, crit));

    std::vector<Money> below(8, s - Money::from_minor(1));
    CHECK_FALSE(check_success_termination(below, s, crit));

    std::vector<Money> short_history(7, s);
    CHECK_FALSE(check_success_termination(short_history, s, crit));
}

TEST_CASE("the running auction installs with the expected escrow") {
    auto cfg = load_scenario_text(running_scenario(""));
    Simulation sim(cfg);
    while (!sim.finished() && sim.status() != Status::ControlPeriod) sim.step();
    REQUIRE(sim.status() == Status::ControlPeriod);
    REQUIRE(sim.control());
    const ControlState& c = *sim.control();
    CHECK(c.record.auction_parameter == Money::from_fiat(3750));
    CHECK(c.record.winning_bid.surplus_claim == Money::from_fiat(1000));
    CHECK(c.record.freezeout_tokens == 200);
    CHECK(c.record.deposit_tokens == 250);
    CHECK(c.record.deposits.value_deposit == Money::parse("3787.5"));
    CHECK(c.record.deposits.purchase_deposit == Money::from_fiat(2000));
    CHECK(c.record.deposits.surety_deposit == Money::parse("6212.5"));
    CHECK(c.pool.extra_votes == 1000 - 500 + 1);
    // freeze-out paid every seller exactly P0 per token
    CHECK(sim.accounts().cash.at("h2") == Money::from_fiat(95 * 10));  // 450/950 of 200 = 95
}

TEST_CASE("success termination refunds everything") {
    // full execution reaches 15 and holds: window 8, run 4
    auto cfg = load_scenario_text(running_scenario(""));
    RunResult r = run_scenario(cfg);
    CHECK(r.terminal_status == Status::Open);
    bool saw_refund = false;
    for (const auto& ev : r.ledger.events()) {
        if (ev.kind == "deposits_refunded") {
            saw_refund = true;
            for (const auto& [k, v] : ev.attrs) {
                if (k == "refund") CHECK(Money::parse(v) == Money::parse("10000"));  // 3787.5+6212.5
            }
        }
        CHECK(ev.kind != "value_deposit_settled");  // no forfeits on success
    }
    CHECK(saw_refund);
    // token deposit returned
    CHECK(r.final_accounts.tokens.at("alice") == 250);
}

TEST_CASE("abandonment at 12 forfeits the claim gap exactly") {
    // completion 2/5 ramps the price to 12, then the controller walks away
    auto cfg = load_scenario_text(
        running_scenario(R"(, "exec_completion": "2/5", "abandon_at": 20)"));
    RunResult r = run_scenario(cfg);
    CHECK(r.terminal_status == Status::Open);
    CHECK(event_money_attr(r.ledger, "value_deposit_settled", "forfeit") == Money::from_fiat(2250));
    // H = 0 at a price above P0: the whole surety comes back
    CHECK(event_money_attr(r.ledger, "surety_deposit_settled", "returned") ==
          Money::parse("6212.5"));
}

TEST_CASE("abandonment below P0 forfeits the whole value deposit") {
    auto cfg = load_scenario_text(running_scenario(
        R"(, "abandon_at": 20)",
        R"({"kind": "piecewise", "points": [[0, "10"], [12, "9"]]})"));
    RunResult r = run_scenario(cfg);
    CHECK(event_money_attr(r.ledger, "value_deposit_settled", "forfeit") == Money::parse("3787.5"));
    // H = 1000 < D_v so H* = 0: surety fully returned despite B = 1000
    CHECK(event_money_attr(r.ledger, "surety_deposit_settled", "returned") ==
          Money::parse("6212.5"));
    CHECK(event_money_attr(r.ledger, "surety_deposit_settled", "bid_shortfall") ==
          Money::from_fiat(1000));
}

TEST_CASE("abandonment at exactly P0 forfeits the full promised gain") {
    auto cfg = load_scenario_text(
        running_scenario(R"(, "exec_completion": "0", "abandon_at": 20)"));
    RunResult r = run_scenario(cfg);
    CHECK(event_money_attr(r.ledger, "value_deposit_settled", "forfeit") == Money::from_fiat(3750));
}

TEST_CASE("periodic auction with no bids settles like abandonment at the price") {
    auto cfg = load_scenario_text(
        running_scenario(R"(, "exec_completion": "0")", "", R"()"));
    RunResult r = run_scenario(cfg);
    // limit 30 after install at tick 4; price flat at 10
    CHECK(r.terminal_status == Status::Open);
    CHECK(event_money_attr(r.ledger, "value_deposit_settled", "forfeit") == Money::from_fiat(3750));
    bool saw_periodic = false;
    for (const auto& ev : r.ledger.events()) {
        if (ev.kind == "periodic_no_bids") saw_periodic = true;
    }
    CHECK(saw_periodic);
}

TEST_CASE("incumbent renewal on the periodic auction loses nothing") {
    auto cfg = load_scenario_text(running_scenario(
        R"(, "exec_completion": "2/5", "rebid_on_periodic": true, "renew_claim": true)"));
    RunResult r = run_scenario(cfg);
    CHECK(event_money_attr(r.ledger, "value_deposit_settled", "forfeit") == Money{});
    CHECK(event_money_attr(r.ledger, "value_deposit_settled", "refund") == Money::parse("3787.5"));
    CHECK(event_money_attr(r.ledger, "surety_deposit_settled", "returned") ==
          Money::parse("6212.5"));
    // still in control afterwards with a fresh deposit set
    CHECK(r.terminal_status == Status::ControlPeriod);
}

TEST_CASE("plain period end without periodic auctions pays the strict holder guarantee") {
    auto cfg = load_scenario_text(running_scenario(
        R"(, "exec_completion": "2/5")", "", "", R"({"periodic_auctions": false})"));
    RunResult r = run_scenario(cfg);
    CHECK(r.terminal_status == Status::Open);
    // plain phi at X=12 keeps the delta increment
    CHECK(event_money_attr(r.ledger, "value_deposit_settled", "forfeit") ==
          Money::parse("2250.000001"));

    // per holder: retained·X + share >= retained·S, total excess = delta
    Money x = Money::from_fiat(12);
    Money s = Money::from_fiat(15);
    std::vector<std::pair<std::string, Tokens>> retained{{"h1", 158}, {"h2", 355}, {"h3", 237}};
    Money excess_total;
    for (const auto& ev : r.ledger.events()) {
        if (ev.kind != "value_deposit_settled") continue;
        for (const auto& d : ev.deltas) {
            for (const auto& [id, ret] : retained) {
                if (d.account == id) {
                    Money need = (s - x) * ret;
                    CHECK(d.cash >= need);
                    excess_total += d.cash - need;
                }
            }
        }
    }
    CHECK(excess_total == Money::from_minor(1));
}

TEST_CASE("reset below P0: shortfall covered by the new value deposit") {
    // price falls to 8; a challenger opens an auction and the incumbent
    // re-bids S_w=12 >= P0 and wins: case-3 settlement plus a new deposit
    // that covers the value shortfall
    std::string body = R"({
  "seed": 21,
  "dao": {
    "q": 1000, "initial_price": "10", "t_m": "1/4", "gamma": "0", "epsilon": "1/100",
    "success_window": 20, "success_run": 10, "control_period_limit": 60, "auction_duration": 3
  },
  "holders": [
    {"id": "h1", "tokens": 200}, {"id": "h2", "tokens": 450}, {"id": "h3", "tokens": 300}
  ],
  "agents": [
    {"id": "alice", "cash": "80000", "tokens": 50, "plans": [["12", "100"]],
     "initiate_auction_at": [1], "exec_duration": 5,
     "rebid_on_challenge": true, "renew_claim": false},
    {"id": "carol", "cash": "60000", "tokens": 0, "plans": [["11", "600"]],
     "initiate_auction_at": [14], "participates": false, "exec_duration": 5}
  ],
  "price_process": {"kind": "piecewise", "points": [[0, "10"], [12, "8"]]},
  "horizon": 30
})";
    // note: alice's first bid is built from the plan menu at reserve 10, so
    // her original claim is S=12 with cost 100
    RunResult r = run_scenario(load_scenario_text(body));
    CHECK(r.summary.scalar("last_winner") == "alice");
    CHECK(r.terminal_status == Status::ControlPeriod);

    // case 3: S_w=12 >= P0=10 > P(Tc0)=8, credit measured at P0:
    // phi(12@10) - phi(12@10) = 0 under the renewed equal claim
    CHECK(event_money_attr(r.ledger, "value_deposit_settled", "forfeit") == Money{});
    // H = (10-8)·1000 = 2000 < D_v: the whole previous surety returns
    CHECK(event_money_attr(r.ledger, "surety_deposit_settled", "value_shortfall") ==
          Money::from_fiat(2000));
    CHECK(event_money_attr(r.ledger, "surety_deposit_settled", "forfeited") == Money{});

    // the new value deposit covers the value shortfall
    REQUIRE(r.terminal_status == Status::ControlPeriod);
    bool saw = false;
    for (const auto& ev : r.ledger.events()) {
        if (ev.kind == "control_period_started" && ev.tick > 10) saw = true;
    }
    CHECK(saw);
}

TEST_CASE("losing to a claim at least as high recovers every previous deposit") {
    // carol wins the supervening auction claiming 16 >= alice's 15
    auto cfg = load_scenario_text(running_scenario(
        R"(, "exec_completion": "2/5")", "", R"(,
    "reference_price_window": 1)"));
    // splice a challenger in
    std::string body = running_scenario(R"(, "exec_completion": "2/5")");
    auto pos = body.find("\"agents\": [");
    body.insert(pos + std::string("\"agents\": [").size(), R"(
    {"id": "carol", "cash": "80000", "tokens": 0, "plans": [["16", "200"]],
     "initiate_auction_at": [14], "participates": false, "exec_duration": 5},)");
    RunResult r = run_scenario(load_scenario_text(body));
    CHECK(r.summary.scalar("last_winner") == "carol");
    // S_w = 16 >= S = 15: delta-phi vanishes, the surety has no bid shortfall
    CHECK(event_money_attr(r.ledger, "value_deposit_settled", "forfeit") == Money{});
    CHECK(event_money_attr(r.ledger, "value_deposit_settled", "refund") == Money::parse("3787.5"));
    CHECK(event_money_attr(r.ledger, "surety_deposit_settled", "returned") ==
          Money::parse("6212.5"));
    // alice's token deposit came home before carol's closing steps ran
    bool returned = false;
    for (const auto& ev : r.ledger.events()) {
        if (ev.kind == "token_deposit_returned") returned = true;
    }
    CHECK(returned);
}

TEST_CASE("trailing-average reference price changes the settlement") {
    // prices fall right before the challenge: the spot reference (11) sits
    // below the challenger's claim, the 3-tick mean (13) sits above it
    auto spot = running_scenario(
        R"(, "exec_completion": "0")",
        R"({"kind": "piecewise", "points": [[0, "10"], [12, "14"], [14, "11"]]})");
    auto with_challenger = [](std::string base, const std::string& window) {
        auto pos = base.find("\"auction_duration\": 3");
        base.insert(pos + std::string("\"auction_duration\": 3").size(), window);
        pos = base.find("\"agents\": [");
        std::string challenger = R"(
    {"id": "carol", "cash": "60000", "tokens": 0, "plans": [["12", "100"]],
     "initiate_auction_at": [14], "participates": false, "exec_duration": 5},)";
        base.insert(pos + std::string("\"agents\": [").size(), challenger);
        return base;
    };

    RunResult spot_run = run_scenario(load_scenario_text(with_challenger(spot, "")));
    // reference 11: phi(15@11) - phi(12@11) = 3000 - 750
    CHECK(event_money_attr(spot_run.ledger, "value_deposit_settled", "forfeit") ==
          Money::from_fiat(2250));

    RunResult avg_run = run_scenario(load_scenario_text(
        with_challenger(spot, R"(, "reference_price_window": 3)")));
    // reference mean(14,14,11) = 13 clears the renewed claim entirely:
    // phi(15@13) - 0, delta included
    CHECK(event_money_attr(avg_run.ledger, "value_deposit_settled", "forfeit") ==
          Money::parse("1500.000001"));
}

TEST_CASE("illegal transitions raise typed errors") {
    auto cfg = load_scenario_text(running_scenario(""));
    Simulation sim(cfg);
    CHECK_THROWS_AS(sim.abandon("alice"), TransitionError);          // nothing to abandon
    CHECK_THROWS_AS(sim.force_success_terminate(), TransitionError); // not in control
    while (!sim.finished() && sim.status() != Status::ControlPeriod) sim.step();
    REQUIRE(sim.status() == Status::ControlPeriod);
    CHECK_THROWS_AS(sim.abandon("h1"), TransitionError);  // not the controller
    sim.force_success_terminate();
    CHECK_THROWS_AS(sim.force_success_terminate(), TransitionError);  // double terminate
}

TEST_CASE("supervening auction during the bidding window is rejected") {
    auto cfg = load_scenario_text(running_scenario(""));
    Simulation sim(cfg);
    while (!sim.finished() && sim.status() != Status::AuctionInProgress) sim.step();
    REQUIRE(sim.status() == Status::AuctionInProgress);
    CHECK_FALSE(sim.open_auction("alice", false));
    bool saw = false;
    for (const auto& ev : sim.ledger().events()) {
        if (ev.kind == "auction_rejected") saw = true;
    }
    CHECK(saw);
}
