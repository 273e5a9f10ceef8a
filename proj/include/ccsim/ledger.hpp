#pragma once

/// Append-only event log. Every transfer, forfeit, refund and state
/// transition is an event whose per-account deltas sum to zero — external
/// flows (plan costs, short gains, market makers) go through explicit
/// external accounts so the whole book balances identically at every tick.
/// Serialized as JSON Lines with a canonical key order, so equal runs are
/// byte-identical.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ccsim/money.hpp"

namespace ccsim {

using Tick = std::int64_t;

struct AccountDelta {
    std::string account;
    Money cash;             // signed
    std::int64_t tokens = 0;  // signed
};

struct LedgerEvent {
    Tick tick = 0;
    std::string kind;                   // e.g. "bid_entered", "value_forfeit"
    std::string step;                   // mechanism step name, may be empty
    std::vector<std::string> parties;
    std::vector<AccountDelta> deltas;
    std::vector<std::pair<std::string, std::string>> attrs;  // ordered key/value

    std::string to_json_line() const;
    static LedgerEvent from_json_line(const std::string& line);
};

/// Account balances; replaying a ledger reproduces these exactly.
struct Accounts {
    std::map<std::string, Money> cash;
    std::map<std::string, std::int64_t> tokens;

    void apply(const LedgerEvent& event);
    bool operator==(const Accounts&) const = default;
};

class Ledger {
public:
    void append(LedgerEvent event);
    const std::vector<LedgerEvent>& events() const { return events_; }

    /// Zero-sum check on every event; returns the index of the first
    /// unbalanced event, or -1 when all balance.
    std::int64_t first_unbalanced_event() const;

    std::string to_jsonl() const;
    static Ledger from_jsonl(const std::string& text);

    /// Applies every event up to and including `up_to_tick` (all when < 0).
    Accounts replay(Tick up_to_tick = -1) const;

private:
    std::vector<LedgerEvent> events_;
};

/// Accounts that may absorb value without a counterpart inside the economy.
bool is_external_account(const std::string& name);

}  // namespace ccsim
