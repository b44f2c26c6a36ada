#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "futureyou/experiment_harness.hpp"
#include "futureyou/measures.hpp"
#include "futureyou/service/event_store.hpp"

namespace futureyou::service {

struct SimulationOptions {
  std::size_t participants = 400;
  std::uint64_t seed = 1;
  // Participants who fail an attention check (even ranks) or report a
  // technical issue (odd ranks). Chosen at random, without replacement.
  std::size_t flagged = 0;
  harness::ConditionWeights weights = harness::equal_weights();
};

struct SimulationResult {
  std::vector<harness::ParticipantRecord> records;
  std::string deltas_csv;
  std::shared_ptr<MemoryEventStore> store;
};

// Runs every participant through the service end to end with the stub chat
// backend and stub aging. Deterministic in the options.
SimulationResult simulate_study(const SimulationOptions& options);

// Synthetic participant inputs, exposed for tests.
std::map<std::string, std::string> synthetic_answers(std::mt19937_64& rng);
measures::ScaleBattery synthetic_battery(measures::BatteryPhase phase, std::mt19937_64& rng,
                                         const measures::Instrument& instrument = measures::Instrument::defaults());
// Post battery drifting from `pre` with a small condition-dependent shift.
measures::ScaleBattery synthetic_followup(const measures::ScaleBattery& pre, harness::Condition condition,
                                          std::mt19937_64& rng,
                                          const measures::Instrument& instrument = measures::Instrument::defaults());

}  // namespace futureyou::service
