#ifndef WARDROP_SCENARIO_HPP
#define WARDROP_SCENARIO_HPP

#include "wardrop/learning.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>

namespace wardrop {

// Scenario files are line-oriented sectioned text. The grammar (version 1):
//
//   version 1
//   [network]
//   origin O
//   destination D
//   edge <id> <tail> <head> <capacity|inf>
//   [states]
//   state <label> ...
//   [costs]
//   cost <edge-id> <state-label|*> <variant> <params...>
//       variants: affine a b | pwaffine t1 .. tk s0 .. sk
//                 | bexp k [a] | recip gamma
//   [prior]
//   weight <state-label> <w>
//   [truth]
//   state <label>
//   [demand]
//   point d | uniform lo hi | exp mean [shift s] [trunc b]
//   [run]
//   horizon <T> | seed <s> | tol <t> | obstol <t> | grid <n> | earlystop <0|1>
//
// Unknown sections and keys are rejected. `*` assigns a cost to every state.

/** Parses scenario text; throws ParseError / ValidationError. */
Scenario parse_scenario(const std::string& text);

/** Reads and parses a scenario file. */
Scenario load_scenario(const std::string& path);

/** Canonical text form; parse(serialize(sc)) reproduces sc exactly. */
std::string serialize_scenario(const Scenario& sc);

/** FNV-1a digest of the canonical serialization. */
std::uint64_t scenario_digest(const Scenario& sc);

/** %.17g rendering used for every floating-point value we emit. */
std::string format_double(double v);

/**
 * Trace CSV: one row per period with demand, all edge loads, realized
 * costs (blank when unobserved) and the posterior weights; a leading
 * comment line carries the scenario digest and the seed.
 */
std::string trace_to_csv(const Trace& tr, const ValidatedScenario& vs);

/** Recovers the final posterior from a trace CSV written by trace_to_csv. */
Belief final_belief_from_csv(const std::string& csv, const ValidatedScenario& vs);

} // namespace wardrop

#endif
