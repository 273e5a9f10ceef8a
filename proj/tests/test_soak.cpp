// Randomized full-lifecycle soak: throw generated scenarios with mixed
// behaviors, variants and price processes at the engine and hold it to the
// global invariants only — balanced events, conserved tokens, replayable
// ledgers, determinism. The engine's own per-tick checks throw on internal
// bookkeeping drift, so simply completing a run carries weight.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "ccsim/rng.hpp"
#include "ccsim/sim.hpp"

using namespace ccsim;

namespace {

std::string generate_scenario(Rng& rng, std::uint64_t seed) {
    Tokens q = rng.range(300, 3000);
    std::int64_t p0 = rng.range(2, 40);
    const char* t_m_choices[] = {"1/4", "1/2", "3/4"};
    std::string t_m = t_m_choices[rng.below(3)];
    Tokens t_m_tokens = Fraction::parse(t_m).times_floor(q);
    const char* gamma_choices[] = {"0", "1/2", "1"};
    const char* eps_choices[] = {"1/100", "1/50"};

    int n_holders = 2 + static_cast<int>(rng.below(3));
    int n_agents = 1 + static_cast<int>(rng.below(3));
    bool with_concealer = rng.below(4) == 0;

    // carve the token supply: agents first, a nominee when concealing,
    // holders take the rest
    std::vector<Tokens> agent_tokens(static_cast<std::size_t>(n_agents));
    Tokens assigned = 0;
    for (auto& tok : agent_tokens) {
        tok = rng.range(0, t_m_tokens / 4);
        assigned += tok;
    }
    Tokens nominee_tokens = 0;
    if (with_concealer && agent_tokens[0] > 1) {
        nominee_tokens = agent_tokens[0] / 2;
        agent_tokens[0] -= nominee_tokens;
    }
    Tokens holder_pool = q - assigned;

    std::ostringstream holders;
    Tokens left = holder_pool;
    for (int h = 0; h < n_holders; ++h) {
        Tokens take = (h == n_holders - 1) ? left : rng.range(0, left / 2 + 1);
        left -= take;
        if (h) holders << ", ";
        holders << R"({"id": "h)" << h << R"(", "tokens": )" << take << "}";
    }
    if (nominee_tokens > 0) {
        holders << R"(, {"id": "nominee", "tokens": )" << nominee_tokens << "}";
    }

    Tick limit = rng.range(8, 40);
    Tick duration = rng.range(1, 4);
    Tick horizon = rng.range(30, 80);

    std::ostringstream agents;
    for (int a = 0; a < n_agents; ++a) {
        std::int64_t gain = rng.range(1, 15);
        Money cap = Money::mul_div_floor(Money::from_fiat(gain) * q,
                                         Fraction::parse(t_m).num(), Fraction::parse(t_m).den());
        Money cost = Money::mul_div_floor(cap, rng.range(0, 85), 100);
        std::int64_t cash_fiat = (p0 + gain) * q * 4;

        if (a) agents << ", ";
        agents << R"({"id": "a)" << a << R"(", "cash": ")" << cash_fiat << R"(", "tokens": )"
               << agent_tokens[static_cast<std::size_t>(a)] << R"(, "plans": [[")"
               << p0 + gain << R"(", ")" << cost.str() << R"("]], "exec_duration": )"
               << rng.range(2, 12) << R"(, "exec_completion": ")" << rng.range(0, 10)
               << R"(/10")";
        if (a == 0 || rng.below(2) == 0) {
            agents << R"(, "initiate_auction_at": [)" << rng.range(1, 6) << "]";
        }
        if (rng.below(2) == 0) agents << R"(, "rebid_on_periodic": true)";
        if (rng.below(3) == 0) agents << R"(, "rebid_on_challenge": true)";
        if (rng.below(4) == 0) agents << R"(, "abandon_at": )" << rng.range(10, 25);

        if (a == 0 && with_concealer) {
            agents << R"(, "behavior": "toehold_concealer", "concealed_tokens": )"
                   << nominee_tokens << R"(, "nominee_id": "nominee")";
        } else {
            switch (rng.below(5)) {
                case 0:
                    agents << R"(, "behavior": "surplus_underbidder", "overbid_exit_margin": ")"
                           << rng.range(1, 300) << R"(")";
                    break;
                case 1:
                    agents << R"(, "behavior": "overbidder", "overbid_claim_margin": ")"
                           << rng.range(0, 3) << R"(", "overbid_exit_margin": ")"
                           << rng.range(0, 200) << R"(")";
                    break;
                case 2:
                    agents << R"(, "behavior": "colluder", "collusion_group": "ring")";
                    break;
                case 3:
                    agents << R"(, "behavior": "value_destroyer", "destroyed_value": ")"
                           << rng.range(0, p0 - 1) << R"(", "short_notional": )"
                           << rng.range(0, q) << R"(, "destroyer_cost": "0.5")";
                    break;
                default:
                    break;  // truthful
            }
        }
        agents << "}";
    }

    std::ostringstream price;
    switch (rng.below(3)) {
        case 0:
            price << R"({"kind": "execution_ramp"})";
            break;
        case 1:
            price << R"({"kind": "stochastic", "sigma": 0.0)" << rng.range(1, 5) << "}";
            break;
        default: {
            price << R"({"kind": "piecewise", "points": [[0, ")" << p0 << R"("])";
            Tick t = 0;
            for (int k = 0; k < 3; ++k) {
                t += rng.range(3, 15);
                price << R"(, [)" << t << R"(, ")" << rng.range(1, p0 + 20) << R"("])";
            }
            price << "]}";
            break;
        }
    }

    bool flush = rng.below(10) < 3;
    std::ostringstream body;
    body << R"({"seed": )" << seed << R"(,
  "dao": {"q": )" << q << R"(, "initial_price": ")" << p0 << R"(", "t_m": ")" << t_m
         << R"(", "gamma": ")" << gamma_choices[rng.below(3)] << R"(", "epsilon": ")"
         << eps_choices[rng.below(2)] << R"(",
    "success_window": )" << rng.range(4, 10) << R"(, "success_run": 3,
    "control_period_limit": )" << limit << R"(, "auction_duration": )" << duration
         << R"(, "reference_price_window": )" << rng.range(1, 4) << R"(},
  "holders": [)" << holders.str() << R"(],
  "agents": [)" << agents.str() << R"(],
  "price_process": )" << price.str() << R"(,
  "variants": {"flush_sale": )" << (flush ? "true" : "false")
         << R"(, "flush_surplus_redirect_to_winner": )" << (rng.below(2) ? "true" : "false")
         << R"(, "periodic_auctions": )" << (rng.below(5) ? "true" : "false") << R"(},
  "flush": {"demand_intercept": )" << q + rng.range(0, 3 * q)
         << R"(, "demand_slope_per_fiat": ")" << rng.range(10, 200)
         << R"(", "registered": ["h0", "h1"], "affiliates": )"
         << (with_concealer ? R"(["nominee"])" : "[]") << R"(},
  "horizon": )" << horizon << "}";
    return body.str();
}

}  // namespace

TEST_CASE("randomized lifecycle soak holds the global invariants") {
    Rng rng(0xce5a1u);
    int executed = 0;
    for (int i = 0; i < 400; ++i) {
        std::string body = generate_scenario(rng, 40'000 + static_cast<std::uint64_t>(i));
        ScenarioConfig cfg;
        try {
            cfg = load_scenario_text(body);
        } catch (const ScenarioError&) {
            continue;  // a draw the schema rejects (e.g. destroyer at p0=1)
        }
        CAPTURE(i);
        RunResult r = run_scenario(cfg);
        ++executed;

        CHECK(r.ledger.first_unbalanced_event() < 0);

        Tokens total = 0;
        for (const auto& [account, tokens] : r.final_accounts.tokens) {
            if (!is_external_account(account)) total += tokens;
        }
        CHECK(total == cfg.q);

        Ledger reparsed = Ledger::from_jsonl(r.ledger.to_jsonl());
        CHECK(reparsed.replay() == r.final_accounts);

        if (i % 10 == 0) {
            RunResult again = run_scenario(cfg);
            CHECK(again.ledger.to_jsonl() == r.ledger.to_jsonl());
        }
    }
    // the generator is tuned to produce mostly-valid draws
    CHECK(executed > 280);
}
