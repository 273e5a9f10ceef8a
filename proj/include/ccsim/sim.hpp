#pragma once

/// The deterministic simulation driver: owns the tick loop, the accounts
/// book, the registry and the control-period state machine, and turns every
/// transfer into a ledger event. Identical (config, seed) pairs produce
/// byte-identical ledgers.

#include <optional>
#include <string>
#include <vector>

#include "ccsim/ledger.hpp"
#include "ccsim/lifecycle.hpp"
#include "ccsim/scenario.hpp"

namespace ccsim {

struct SummaryRow {
    std::string id;
    std::string kind;  // agent | holder | account
    Money cash_start;
    Money cash_end;
    Tokens tokens_start = 0;
    Tokens tokens_end = 0;
    Money wealth_delta;   // marked at the terminal price
    Money locked_escrow;  // cash still held in this party's escrow accounts
};

struct RunSummary {
    std::vector<SummaryRow> rows;
    std::vector<std::pair<std::string, std::string>> scalars;

    std::string to_csv() const;
    std::string scalar(const std::string& key) const;
    const SummaryRow* row(const std::string& id) const;
};

struct RunResult {
    Ledger ledger;
    RunSummary summary;
    Accounts final_accounts;
    std::vector<Accounts> tick_accounts;  // index = tick, state after that tick
    std::vector<Money> prices;
    Status terminal_status = Status::Open;
};

class Simulation {
public:
    explicit Simulation(ScenarioConfig cfg);

    /// Drives every tick to the horizon and assembles the result.
    RunResult run();

    void step();
    bool finished() const { return now_ > horizon_; }
    Tick now() const { return now_; }
    Status status() const { return status_; }
    const std::optional<ControlState>& control() const { return control_; }
    const Ledger& ledger() const { return ledger_; }
    const Accounts& accounts() const { return accounts_; }
    const HolderRegistry& registry() const { return registry_; }
    Money price_at(Tick t) const;

    /// Guarded transitions; the tick loop calls these, tests may as well.
    bool open_auction(const std::string& initiator_id, bool periodic);
    void abandon(const std::string& agent_id);
    void force_success_terminate();

private:
    struct PendingAuction {
        AuctionSetup setup;
        AuctionOutcome outcome;
        Money reference_price;  // P(T_c0), trailing mean when configured
        bool periodic = false;
        bool supervening = false;
        int round = 0;
    };

    void post(std::string kind, std::string step, std::vector<std::string> parties,
              std::vector<AccountDelta> deltas,
              std::vector<std::pair<std::string, std::string>> attrs = {});
    void genesis();
    Money current_price() const { return prices_.back(); }
    Money reference_price(Tick t) const;
    void advance_price();

    std::vector<BidIntent> gather_intents(Money reserve, bool periodic,
                                          const std::string& initiator,
                                          std::vector<Money>& cash_out,
                                          std::vector<std::string>& order_out);
    std::optional<BidIntent> agent_intent(const AgentSpec& agent, Money reserve, bool periodic,
                                          bool is_initiator);
    void escrow_entry(const AuctionEntry& entry, int round);
    void refund_entry(const AuctionEntry& entry, int round, const std::string& why);
    void settle_auction();
    void install_winner(const PendingAuction& auction);
    void install_winner_flush(const PendingAuction& auction, AuctionRecord& record);
    void settle_previous_deposits(Money winning_claim, Money new_reserve, Money reference);
    void close_control_with_loss(Money winning_claim, Money new_reserve, Money reference,
                                 const std::string& step);
    void plain_period_end_settlement();
    void success_terminate_impl();
    void no_bid_settlement(Money synthetic_price);
    void realize_short_gain(const AgentSpec& agent, Money settlement_price);
    void maybe_adjust_deposits_stochastic(const PendingAuction& auction, AuctionRecord& record);
    void distribute_flush_surplus();
    void check_tick_invariants();

    std::string esc(const std::string& id, int round, const char* leg) const {
        return "escrow:" + id + ":r" + std::to_string(round) + ":" + leg;
    }

    ScenarioConfig cfg_;
    Tick horizon_ = 0;
    Tick now_ = 0;
    Status status_ = Status::Open;
    Ledger ledger_;
    Accounts accounts_;
    HolderRegistry registry_;
    std::vector<Money> prices_;
    std::optional<ControlState> control_;
    std::optional<PendingAuction> auction_;
    int auction_rounds_ = 0;
    std::vector<Accounts> tick_accounts_;
    std::vector<Money> control_path_;  // realized path for the live control period

    // flush surplus awaiting its distribution date
    Money flush_surplus_escrowed_;
    Tick flush_distribution_at_ = -1;
    HolderSnapshot flush_snapshot_;
    std::string flush_winner_;
    Money flush_clearing_;
    Money dao_liability_;

    // summary bookkeeping
    Money last_clearing_a_;
    Money last_second_best_a_;
    std::string last_winner_;
    Money holder_forfeits_received_;
    Money execution_target_prev_;
    Tick execution_ends_prev_ = 0;
};

RunResult run_scenario(const ScenarioConfig& cfg);

}  // namespace ccsim
