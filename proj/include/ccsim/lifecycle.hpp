#pragma once

/// Control-period state machine pieces: status, success criterion, and the
/// live control-period record. Transitions are driven by the Simulation;
/// illegal (status, event) pairs raise TransitionError.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>

#include "ccsim/auction.hpp"
#include "ccsim/market.hpp"
#include "ccsim/mechanism.hpp"

namespace ccsim {

enum class Status { Open, AuctionInProgress, ControlPeriod };

const char* status_name(Status s);

class TransitionError : public std::runtime_error {
public:
    TransitionError(Status status, const std::string& event)
        : std::runtime_error(std::string("illegal transition: ") + event + " while " +
                             status_name(status)),
          status(status) {}
    Status status;
};

struct SuccessCriterion {
    Tick window = 30;       // W
    Tick consecutive = 10;  // K <= W
};

/// True iff the window mean reaches the threshold and some run of at least
/// `consecutive` ticks inside the window stays at or above it. Fewer than
/// `window` ticks of history is simply not success.
bool check_success_termination(std::span<const Money> prices, Money threshold,
                               const SuccessCriterion& criterion);

/// A live control period: the installing auction record (with its T1
/// snapshot), the vote pool, escrowed deposits and the execution in progress.
struct ControlState {
    AuctionRecord record;
    VotePool pool;
    std::string controller;
    int escrow_round = 0;       // suffix of the escrow accounts holding the deposits
    Tick started_at = 0;
    Tick limit_at = 0;
    Money execution_target;     // terminal price the executed plan reaches
    Tick execution_ends_at = 0;
    Money executed_cost;        // what the controller actually spends
};

}  // namespace ccsim
